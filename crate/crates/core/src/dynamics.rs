//! Replicator dynamics on the simplex: vector field, RK4 trajectories,
//! lattice sampling and rest-point classification.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{GameParams, SimplexPoint};
use crate::scalar::{Real, Scalar};

/// Default RK4 step.
pub const DEFAULT_DT: f64 = 0.01;
/// Default lattice order for field plots (spacing 1/15).
pub const DEFAULT_GRID_ORDER: usize = 15;
/// Finite-difference step for the reduced Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;
/// Eigenvalues with `|Re| <` this are marginal.
pub const STABILITY_TOLERANCE: f64 = 1e-7;
/// Maximum `|rhs|` for a point to count as a rest point.
pub const REST_POINT_TOLERANCE: f64 = 1e-6;

const BLOWUP_THRESHOLD: f64 = -1e-6;
const MAX_HALVINGS: u32 = 40;

/// Rate of change of the population shares; components sum to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector<T> {
    v: [T; 3],
}

impl<T: Scalar> TangentVector<T> {
    pub fn zero() -> Self {
        TangentVector { v: [T::zero(); 3] }
    }

    pub(crate) fn from_array(v: [T; 3]) -> Self {
        TangentVector { v }
    }

    pub fn sitters(&self) -> T {
        self.v[0]
    }

    pub fn identifiers(&self) -> T {
        self.v[1]
    }

    pub fn cheaters(&self) -> T {
        self.v[2]
    }

    pub fn as_array(&self) -> [T; 3] {
        self.v
    }

    pub fn component_sum(&self) -> T {
        self.v[0] + self.v[1] + self.v[2]
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(|x| *x == T::zero())
    }
}

impl<T: Real> TangentVector<T> {
    pub fn norm(&self) -> T {
        (self.v[0] * self.v[0] + self.v[1] * self.v[1] + self.v[2] * self.v[2]).sqrt()
    }

    /// Cosine of the angle between two vectors in the `(p_S, p_I)` chart.
    /// `None` when either projection vanishes.
    pub fn direction_cosine(&self, other: &Self) -> Option<T> {
        let (a0, a1) = (self.v[0], self.v[1]);
        let (b0, b1) = (other.v[0], other.v[1]);
        let na = (a0 * a0 + a1 * a1).sqrt();
        let nb = (b0 * b0 + b1 * b1).sqrt();
        if na == T::zero() || nb == T::zero() {
            return None;
        }
        Some((a0 * b0 + a1 * b1) / (na * nb))
    }
}

/// Replicator field on raw coordinates. Points without nests are rest points.
fn rhs_raw<T: Scalar>(p: [T; 3], params: &GameParams<T>) -> [T; 3] {
    let nests = p[0] + p[1];
    if nests <= T::zero() {
        return [T::zero(); 3];
    }
    let h = params.hatch_reward();
    let e = params.sitting_cost();
    let payoff = [
        h - e * (T::one() + p[2] / nests),
        params.identifier_payoff(),
        h * p[0] / nests,
    ];
    let mean = p[0] * payoff[0] + p[1] * payoff[1] + p[2] * payoff[2];
    [
        p[0] * (payoff[0] - mean),
        p[1] * (payoff[1] - mean),
        p[2] * (payoff[2] - mean),
    ]
}

/// `v_k = p_k (E_k - Ē)`. The all-cheater vertex returns the zero vector.
pub fn replicator_rhs<T: Scalar>(point: &SimplexPoint<T>, params: &GameParams<T>) -> TangentVector<T> {
    TangentVector::from_array(rhs_raw(point.as_array(), params))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    samples: Vec<(T, SimplexPoint<T>)>,
    dt: T,
}

impl<T: Scalar> Trajectory<T> {
    pub fn samples(&self) -> &[(T, SimplexPoint<T>)] {
        &self.samples
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn last(&self) -> &SimplexPoint<T> {
        &self.samples.last().expect("trajectory holds its start").1
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn axpy<T: Real>(p: [T; 3], scale: T, v: [T; 3]) -> [T; 3] {
    [p[0] + scale * v[0], p[1] + scale * v[1], p[2] + scale * v[2]]
}

fn rk4_raw<T: Real>(p: [T; 3], params: &GameParams<T>, dt: T) -> [T; 3] {
    let two = T::lit(2.0);
    let half = dt / two;
    let k1 = rhs_raw(p, params);
    let k2 = rhs_raw(axpy(p, half, k1), params);
    let k3 = rhs_raw(axpy(p, half, k2), params);
    let k4 = rhs_raw(axpy(p, dt, k3), params);
    let sixth = dt / T::lit(6.0);
    let mut out = p;
    for k in 0..3 {
        out[k] = p[k] + sixth * (k1[k] + two * k2[k] + two * k3[k] + k4[k]);
    }
    out
}

fn clip_renormalize<T: Real>(p: [T; 3]) -> Result<SimplexPoint<T>> {
    let clipped = p.map(|x| if x < T::zero() { T::zero() } else { x });
    let sum = clipped[0] + clipped[1] + clipped[2];
    SimplexPoint::from_array(clipped.map(|x| x / sum))
}

/// Advances one step of length `dt`. Sitters can go extinct in finite time
/// near the all-cheater vertex, so a step that overshoots a face is redone as
/// two half steps, recursively.
fn advance<T: Real>(p: [T; 3], params: &GameParams<T>, dt: T, depth: u32) -> std::result::Result<[T; 3], f64> {
    let next = rk4_raw(p, params, dt);
    let worst = next
        .iter()
        .fold(T::infinity(), |m, x| if *x < m { *x } else { m });
    let finite = next.iter().all(|x| x.is_finite());
    if finite && worst >= T::lit(BLOWUP_THRESHOLD) {
        let clipped = next.map(|x| if x < T::zero() { T::zero() } else { x });
        let sum = clipped[0] + clipped[1] + clipped[2];
        return Ok(clipped.map(|x| x / sum));
    }
    if depth >= MAX_HALVINGS {
        return Err(worst.to_f64().unwrap_or(f64::NAN));
    }
    let half = dt / T::lit(2.0);
    let mid = advance(p, params, half, depth + 1)?;
    advance(mid, params, half, depth + 1)
}

/// Fixed-step RK4 integration of the replicator field.
///
/// Emits `steps + 1` samples at times `k * dt`, starting with `start`. Every
/// sample is clipped to the simplex and renormalized.
pub fn integrate_trajectory<T: Real>(
    start: &SimplexPoint<T>,
    params: &GameParams<T>,
    dt: T,
    steps: usize,
) -> Result<Trajectory<T>> {
    if !dt.is_finite() || dt <= T::zero() {
        return Err(Error::domain(format!("step size must be positive, got {dt}")));
    }
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((T::zero(), *start));
    let mut current = start.as_array();
    for step in 0..steps {
        current = advance(current, params, dt, 0).map_err(|value| Error::Integration { step, value })?;
        let time = T::from_usize(step + 1).expect("step index fits scalar") * dt;
        samples.push((time, clip_renormalize(current)?));
    }
    Ok(Trajectory { samples, dt })
}

/// Barycentric lattice of order `m` as integer triples `(a, b, c)`,
/// `a + b + c = m`, in canonical order: descending `a`, then descending `b`.
pub fn lattice(order: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity((order + 1) * (order + 2) / 2);
    for a in (0..=order).rev() {
        for b in (0..=order - a).rev() {
            out.push([a, b, order - a - b]);
        }
    }
    out
}

pub fn lattice_point<T: Scalar>(abc: [usize; 3], order: usize) -> SimplexPoint<T> {
    let m = T::from_count(order as u64);
    let p = abc.map(|k| T::from_count(k as u64) / m);
    SimplexPoint::from_array(p).expect("lattice points lie on the simplex")
}

/// Replicator field at every lattice point of order `m` (spacing `1/m`).
pub fn vector_field_grid<T: Scalar>(
    params: &GameParams<T>,
    order: usize,
) -> Result<Vec<(SimplexPoint<T>, TangentVector<T>)>> {
    if order < 2 {
        return Err(Error::domain(format!("lattice order must be at least 2, got {order}")));
    }
    Ok(lattice(order)
        .into_iter()
        .map(|abc| {
            let p = lattice_point(abc, order);
            (p, replicator_rhs(&p, params))
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    StableNode,
    StableSpiral,
    UnstableNode,
    UnstableSpiral,
    Saddle,
    CenterMarginal,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::StableNode => "stable-node",
            Stability::StableSpiral => "stable-spiral",
            Stability::UnstableNode => "unstable-node",
            Stability::UnstableSpiral => "unstable-spiral",
            Stability::Saddle => "saddle",
            Stability::CenterMarginal => "center-marginal",
        }
    }

    pub fn is_asymptotically_stable(&self) -> bool {
        matches!(self, Stability::StableNode | Stability::StableSpiral)
    }
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport<T> {
    pub location: SimplexPoint<T>,
    /// Payoff residual; `None` off the interior where it is undefined.
    pub residual: Option<T>,
    /// Jacobian of `(v_S, v_I)` with respect to `(p_S, p_I)`.
    pub jacobian: [[T; 2]; 2],
    pub eigenvalues: [Complex<T>; 2],
    pub classification: Stability,
    pub ess_flag: bool,
}

fn reduced_rhs<T: Scalar>(x: T, y: T, params: &GameParams<T>) -> [T; 2] {
    let v = rhs_raw([x, y, T::one() - x - y], params);
    [v[0], v[1]]
}

/// Jacobian of the dynamics in the `(p_S, p_I)` chart by finite differences.
///
/// Central differences where both neighbours stay on the simplex; one-sided
/// toward the interior otherwise.
pub fn reduced_jacobian<T: Real>(point: &SimplexPoint<T>, params: &GameParams<T>, step: T) -> [[T; 2]; 2] {
    let [x, y, _] = point.as_array();
    let inside = |a: T, b: T| a >= T::zero() && b >= T::zero() && T::one() - a - b >= T::zero();
    let mut jac = [[T::zero(); 2]; 2];
    for col in 0..2 {
        let shift = |d: T| if col == 0 { (x + d, y) } else { (x, y + d) };
        let (px, py) = shift(step);
        let (mx, my) = shift(-step);
        let (plus, minus, width) = match (inside(px, py), inside(mx, my)) {
            (true, false) => ((px, py), (x, y), step),
            (false, true) => ((x, y), (mx, my), step),
            _ => ((px, py), (mx, my), step + step),
        };
        let fp = reduced_rhs(plus.0, plus.1, params);
        let fm = reduced_rhs(minus.0, minus.1, params);
        for (row, (p, m)) in jac.iter_mut().zip(fp.iter().zip(&fm)) {
            row[col] = (*p - *m) / width;
        }
    }
    jac
}

fn eigenvalues_2x2<T: Real>(m: &[[T; 2]; 2]) -> [Complex<T>; 2] {
    let two = T::lit(2.0);
    let half_trace = (m[0][0] + m[1][1]) / two;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = half_trace * half_trace - det;
    if disc >= T::zero() {
        let r = disc.sqrt();
        [
            Complex::new(half_trace + r, T::zero()),
            Complex::new(half_trace - r, T::zero()),
        ]
    } else {
        let w = (-disc).sqrt();
        [Complex::new(half_trace, w), Complex::new(half_trace, -w)]
    }
}

fn classify_spectrum<T: Real>(eig: &[Complex<T>; 2]) -> Stability {
    let tol = T::lit(STABILITY_TOLERANCE);
    if eig.iter().any(|l| l.re.abs() < tol) {
        return Stability::CenterMarginal;
    }
    let spiral = eig[0].im.abs() > tol;
    match (eig[0].re < T::zero(), eig[1].re < T::zero()) {
        (true, true) if spiral => Stability::StableSpiral,
        (true, true) => Stability::StableNode,
        (false, false) if spiral => Stability::UnstableSpiral,
        (false, false) => Stability::UnstableNode,
        _ => Stability::Saddle,
    }
}

/// Linear stability of an (approximate) rest point.
pub fn classify_fixed_point<T: Real>(candidate: &SimplexPoint<T>, params: &GameParams<T>) -> Result<FixedPointReport<T>> {
    let speed = replicator_rhs(candidate, params).norm();
    if speed.is_nan() || speed > T::lit(REST_POINT_TOLERANCE) {
        return Err(Error::Precondition(format!(
            "{:?} is not a rest point: |rhs| = {speed}",
            candidate.as_array()
        )));
    }
    let jacobian = reduced_jacobian(candidate, params, T::lit(JACOBIAN_STEP));
    let eigenvalues = eigenvalues_2x2(&jacobian);
    let classification = classify_spectrum(&eigenvalues);
    let tol = T::lit(STABILITY_TOLERANCE);
    let ess_flag = eigenvalues.iter().all(|l| l.re < -tol);
    Ok(FixedPointReport {
        location: *candidate,
        residual: crate::model::payoff_residual(candidate, params).ok(),
        jacobian,
        eigenvalues,
        classification,
        ess_flag,
    })
}
