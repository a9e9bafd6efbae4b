//! Game parameters, simplex geometry and the closed-form expected payoffs.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Payoff constants of the nest game.
///
/// `h` is earned per hatched own egg, `e` is paid per egg sat on, and `i` is
/// the flat cost of inspecting a nest for foreign eggs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameParams<T> {
    h: T,
    e: T,
    i: T,
}

impl<T: Scalar> GameParams<T> {
    pub fn new(h: T, e: T, i: T) -> Result<Self> {
        let zero = T::zero();
        if !(h > zero && e > zero && i > zero) {
            return Err(Error::domain(format!(
                "payoff constants must be positive, got h={h}, e={e}, i={i}"
            )));
        }
        Ok(GameParams { h, e, i })
    }

    pub fn hatch_reward(&self) -> T {
        self.h
    }

    pub fn sitting_cost(&self) -> T {
        self.e
    }

    pub fn identify_cost(&self) -> T {
        self.i
    }

    /// `h - e - i`: the identifier payoff, and the common payoff at the
    /// interior equilibrium when one exists.
    pub fn identifier_payoff(&self) -> T {
        self.h - self.e - self.i
    }

    pub fn interior_ne_exists(&self) -> bool {
        self.identifier_payoff() > T::zero()
    }

    /// Multiplies all three constants by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.h * factor, self.e * factor, self.i * factor)
    }
}

/// Population shares `(p_S, p_I, p_C)` on the 2-simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexPoint<T> {
    p: [T; 3],
}

impl<T: Scalar> SimplexPoint<T> {
    /// Validates and normalizes a triple of shares.
    ///
    /// Components down to [`Scalar::component_floor`] are clipped to zero, and
    /// the triple is renormalized when its sum is within
    /// [`Scalar::sum_tolerance`] of one.
    pub fn new(sitters: T, identifiers: T, cheaters: T) -> Result<Self> {
        Self::from_array([sitters, identifiers, cheaters])
    }

    pub fn from_array(raw: [T; 3]) -> Result<Self> {
        let floor = T::component_floor();
        let mut p = raw;
        for x in p.iter_mut() {
            if x.is_nan_like() || *x < floor {
                return Err(Error::domain(format!(
                    "simplex component {x} is negative (point {:?})",
                    raw
                )));
            }
            if *x < T::zero() {
                *x = T::zero();
            }
        }
        let sum = p[0] + p[1] + p[2];
        if (sum - T::one()).abs() > T::sum_tolerance() {
            return Err(Error::domain(format!(
                "simplex components sum to {sum}, expected 1 (point {:?})",
                raw
            )));
        }
        if sum != T::one() {
            for x in p.iter_mut() {
                *x = *x / sum;
            }
        }
        Ok(SimplexPoint { p })
    }

    /// The vertex where every agent plays `index` (0 = sitter, 1 = identifier, 2 = cheater).
    pub fn vertex(index: usize) -> Self {
        let mut p = [T::zero(); 3];
        p[index] = T::one();
        SimplexPoint { p }
    }

    pub fn sitters(&self) -> T {
        self.p[0]
    }

    pub fn identifiers(&self) -> T {
        self.p[1]
    }

    pub fn cheaters(&self) -> T {
        self.p[2]
    }

    pub fn as_array(&self) -> [T; 3] {
        self.p
    }

    /// Share of the population that owns a nest, `p_S + p_I`.
    pub fn nest_share(&self) -> T {
        self.p[0] + self.p[1]
    }

    pub fn is_interior(&self) -> bool {
        self.p.iter().all(|x| *x > T::zero())
    }

    pub fn is_vertex(&self) -> bool {
        self.p.iter().any(|x| *x == T::one())
    }

    pub fn l1_distance(&self, other: &Self) -> T {
        (0..3).fold(T::zero(), |acc, k| acc + (self.p[k] - other.p[k]).abs())
    }
}

/// NaN never compares, so a NaN component slips past `x < floor`; this traps it.
trait NanLike {
    fn is_nan_like(&self) -> bool;
}

impl<T: PartialOrd> NanLike for T {
    fn is_nan_like(&self) -> bool {
        self.partial_cmp(self).is_none()
    }
}

/// Sitter payoff, which is unbounded below when nobody owns a nest.
///
/// The variant order makes `NegInfinity` compare below every finite value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum SitterPayoff<T> {
    NegInfinity,
    Finite(T),
}

impl<T: Scalar> SitterPayoff<T> {
    pub fn is_neg_infinity(&self) -> bool {
        matches!(self, SitterPayoff::NegInfinity)
    }

    /// The finite value; arithmetic on the sentinel is a domain error.
    pub fn finite(&self) -> Result<T> {
        match self {
            SitterPayoff::Finite(x) => Ok(*x),
            SitterPayoff::NegInfinity => Err(Error::domain(
                "sitter payoff is -inf where no nests exist",
            )),
        }
    }

    /// Lossy conversion for output; the sentinel maps to `f64::NEG_INFINITY`.
    pub fn to_f64(&self) -> f64 {
        match self {
            SitterPayoff::Finite(x) => x.to_f64().unwrap_or(f64::NAN),
            SitterPayoff::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

impl<T: Scalar> PartialEq<T> for SitterPayoff<T> {
    fn eq(&self, other: &T) -> bool {
        matches!(self, SitterPayoff::Finite(x) if x == other)
    }
}

impl<T: Scalar> PartialOrd<T> for SitterPayoff<T> {
    fn partial_cmp(&self, other: &T) -> Option<Ordering> {
        match self {
            SitterPayoff::NegInfinity => Some(Ordering::Less),
            SitterPayoff::Finite(x) => x.partial_cmp(other),
        }
    }
}

/// Expected utility of each strategy at a population state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffVector<T> {
    pub sitter: SitterPayoff<T>,
    pub identifier: T,
    pub cheater: T,
}

impl<T: Scalar> PayoffVector<T> {
    /// All three payoffs as finite values, or a domain error at the sentinel.
    pub fn finite(&self) -> Result<[T; 3]> {
        Ok([self.sitter.finite()?, self.identifier, self.cheater])
    }
}

/// Expected payoffs at `point`.
///
/// With `p_S + p_I > 0`:
/// `E(S) = h - e(1 + p_C/(p_S+p_I))`, `E(I) = h - e - i`, `E(C) = h p_S/(p_S+p_I)`.
/// With no nests the sitter payoff is the `-inf` sentinel and cheaters earn 0.
pub fn expected_payoffs<T: Scalar>(point: &SimplexPoint<T>, params: &GameParams<T>) -> PayoffVector<T> {
    let identifier = params.identifier_payoff();
    let nests = point.nest_share();
    if nests == T::zero() {
        return PayoffVector {
            sitter: SitterPayoff::NegInfinity,
            identifier,
            cheater: T::zero(),
        };
    }
    let sitter = params.h - params.e * (T::one() + point.cheaters() / nests);
    let cheater = params.h * point.sitters() / nests;
    PayoffVector {
        sitter: SitterPayoff::Finite(sitter),
        identifier,
        cheater,
    }
}

/// The unique interior equilibrium
/// `(e(h-e-i)/(h(i+e)), e/h, i/(i+e))`, defined when `h - e - i > 0`.
pub fn nash_equilibrium<T: Scalar>(params: &GameParams<T>) -> Result<SimplexPoint<T>> {
    let margin = params.identifier_payoff();
    if margin <= T::zero() {
        return Err(Error::NoInteriorEquilibrium {
            margin: margin.to_f64().unwrap_or(f64::NAN),
        });
    }
    let GameParams { h, e, i } = *params;
    let sitters = e * margin / (h * (i + e));
    let identifiers = e / h;
    let cheaters = i / (i + e);
    SimplexPoint::new(sitters, identifiers, cheaters)
}

/// Largest pairwise gap between the three expected payoffs at an interior point.
pub fn payoff_residual<T: Scalar>(point: &SimplexPoint<T>, params: &GameParams<T>) -> Result<T> {
    if !point.is_interior() {
        return Err(Error::domain(format!(
            "payoff residual needs an interior point, got {:?}",
            point.as_array()
        )));
    }
    let [s, i, c] = expected_payoffs(point, params).finite()?;
    let gaps = [(s - i).abs(), (s - c).abs(), (i - c).abs()];
    Ok(gaps
        .into_iter()
        .fold(T::zero(), |m, g| if g > m { g } else { m }))
}
