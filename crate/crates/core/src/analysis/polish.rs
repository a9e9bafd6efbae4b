use crate::dynamics::{replicator_rhs, REST_POINT_TOLERANCE};
use crate::model::{GameParams, SimplexPoint};
use crate::scalar::Real;

/// Target for `|rhs|^2` when polishing a candidate rest point.
pub const POLISH_TOLERANCE: f64 = 1e-12;

const MAX_ITERATIONS: usize = 10_000;
const SNAP_THRESHOLD: f64 = 1e-5;

fn project<T: Real>(x: T, y: T) -> SimplexPoint<T> {
    let x = x.max(T::zero());
    let y = y.max(T::zero());
    let (x, y) = if x + y > T::one() { (x / (x + y), y / (x + y)) } else { (x, y) };
    let c = (T::one() - x - y).max(T::zero());
    SimplexPoint::from_array([x, y, c]).expect("projection lands on the simplex")
}

fn speed_sq<T: Real>(p: &SimplexPoint<T>, params: &GameParams<T>) -> T {
    let v = replicator_rhs(p, params).as_array();
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// Derivative-free search for a zero of the replicator field near `start`.
///
/// Nelder-Mead on `|rhs|^2` in the `(p_S, p_I)` chart, with trial points
/// projected onto the simplex. Stops once `|rhs|^2 <= POLISH_TOLERANCE`.
/// Shares below 1e-5 are snapped to zero when that keeps the point a rest point.
pub fn polish_rest_point<T: Real>(start: &SimplexPoint<T>, params: &GameParams<T>, initial_step: T) -> SimplexPoint<T> {
    let f = |v: [T; 2]| speed_sq(&project(v[0], v[1]), params);
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let tol = T::lit(POLISH_TOLERANCE);

    let [x0, y0, _] = start.as_array();
    let dx = if x0 + initial_step + y0 <= T::one() { initial_step } else { -initial_step };
    let dy = if y0 + initial_step + x0 <= T::one() { initial_step } else { -initial_step };
    let mut simplex = [[x0, y0], [x0 + dx, y0], [x0, y0 + dy]];
    let mut values = simplex.map(f);

    for _ in 0..MAX_ITERATIONS {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);
        if values[0] <= tol {
            break;
        }
        let spread = (1..3)
            .map(|k| (simplex[k][0] - simplex[0][0]).abs().max((simplex[k][1] - simplex[0][1]).abs()))
            .fold(T::zero(), T::max);
        if spread < T::lit(1e-15) {
            break;
        }

        let centroid = [(simplex[0][0] + simplex[1][0]) * half, (simplex[0][1] + simplex[1][1]) * half];
        let along = |t: T| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-T::one());
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-two);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let (contracted, fc) = if fr < values[2] {
                let p = along(-half);
                (p, f(p))
            } else {
                let p = along(half);
                (p, f(p))
            };
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + half * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + half * (simplex[k][1] - simplex[0][1]),
                    ];
                    values[k] = f(simplex[k]);
                }
            }
        }
    }

    let best = (0..3)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))
        .expect("three vertices");
    let point = project(simplex[best][0], simplex[best][1]);
    snap_small_shares(point, params)
}

fn snap_small_shares<T: Real>(point: SimplexPoint<T>, params: &GameParams<T>) -> SimplexPoint<T> {
    let threshold = T::lit(SNAP_THRESHOLD);
    let raw = point.as_array();
    if raw.iter().all(|&x| x == T::zero() || x >= threshold) {
        return point;
    }
    let clipped = raw.map(|x| if x < threshold { T::zero() } else { x });
    let sum = clipped[0] + clipped[1] + clipped[2];
    let snapped = SimplexPoint::from_array(clipped.map(|x| x / sum)).expect("renormalized shares");
    let limit = T::lit(REST_POINT_TOLERANCE);
    if speed_sq(&snapped, params).sqrt() <= limit {
        snapped
    } else {
        point
    }
}
