//! Small numeric helpers shared by the solvers.

/// Bisection on a bracket whose endpoints have opposite signs.
///
/// Returns `None` when `f(lo)` and `f(hi)` share a sign. Iterates until the
/// bracket stops shrinking in floating point.
pub(crate) fn bisect<F>(mut lo: f64, mut hi: f64, mut f: F) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if (f_lo > 0.0) == (f_hi > 0.0) {
        return None;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Ordinary least squares `y = a + b x`. Returns `(a, b, residual spread)`,
/// where the spread is the standard error of the intercept (zero when the
/// fit is exact or there are only two samples).
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    if xs.len() <= 2 || sxx <= 0.0 {
        return (intercept, slope, 0.0);
    }
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let sigma2 = rss / (n - 2.0);
    let se = libm::sqrt(sigma2 * (1.0 / n + mx * mx / sxx));
    (intercept, slope, se)
}
