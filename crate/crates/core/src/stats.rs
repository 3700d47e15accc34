//! Small fitting helpers for convergence studies.

/// Least-squares slope of `ys` against `xs`; `None` with fewer than two points
/// or degenerate abscissae.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Slope of `log₂ e` against `log₂ h` for `h = 2⁻ⁿ`.
pub fn convergence_slope(levels: &[u32], errors: &[f64]) -> Option<f64> {
    let xs: Vec<f64> = levels.iter().map(|&n| -(n as f64)).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return None;
    }
    least_squares_slope(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        assert_eq!(
            least_squares_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]),
            Some(2.0)
        );
        assert_eq!(least_squares_slope(&[1.0], &[1.0]), None);
        assert_eq!(least_squares_slope(&[1.0, 1.0], &[0.0, 2.0]), None);
    }

    #[test]
    fn half_order_decay() {
        let levels = [4, 5, 6, 7];
        let errs: Vec<f64> = levels
            .iter()
            .map(|&n| 3.0 * 2f64.powf(-0.5 * n as f64))
            .collect();
        assert!((convergence_slope(&levels, &errs).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(convergence_slope(&[4], &[0.1]), None);
    }
}
