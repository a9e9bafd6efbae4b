use crate::scalar::Real;

/// Sample mean and standard error of the mean (zero for a single sample).
/// Two-pass, so identical samples give exactly zero spread.
pub fn mean_and_stderr<T: Real>(samples: &[T]) -> Option<(T, T)> {
    if samples.is_empty() {
        return None;
    }
    let n = T::from_usize(samples.len())?;
    let mean = samples.iter().fold(T::zero(), |acc, &x| acc + x) / n;
    if samples.len() == 1 {
        return Some((mean, T::zero()));
    }
    let ss = samples.iter().fold(T::zero(), |acc, &x| acc + (x - mean) * (x - mean));
    let variance = ss / (n - T::one());
    Some((mean, (variance / n).sqrt()))
}

/// Least-squares slope of `ln y` against `ln x`. `None` unless every `y > 0`
/// and at least two distinct `x` are present.
pub fn log_log_slope<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    if xs.len() != ys.len() || xs.len() < 2 || ys.iter().any(|&y| y.is_nan() || y <= T::zero()) {
        return None;
    }
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let n = T::from_usize(xs.len())?;
    let mx = lx.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ly.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (x, y) in lx.iter().zip(&ly) {
        sxy = sxy + (*x - mx) * (*y - my);
        sxx = sxx + (*x - mx) * (*x - mx);
    }
    (sxx > T::zero()).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_and_stderr(&[1.5f64; 10]), Some((1.5, 0.0)));
        assert_eq!(mean_and_stderr::<f64>(&[]), None);
        let (m, se) = mean_and_stderr(&[1.0f64, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [100.0f64, 400.0, 1600.0, 6400.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.5)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() + 0.5).abs() < 1e-12);
        assert!(log_log_slope(&xs, &[1.0, 0.0, 1.0, 1.0]).is_none());
    }
}
