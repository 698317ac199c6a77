//! Small statistics helpers: binomial intervals, empirical CDFs on a shared
//! grid, Kolmogorov-Smirnov distances and least squares.

use serde::Serialize;

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.96;
/// Points in the pooled CDF grid.
pub const CDF_GRID_POINTS: usize = 200;

/// Wald half-width of a 95% binomial interval.
pub fn wald_halfwidth(p: f64, n: u32) -> f64 {
    Z95 * (p * (1.0 - p) / f64::from(n)).sqrt()
}

/// `CDF_GRID_POINTS` equally spaced points spanning every sample.
pub fn pooled_grid(samples: &[&[f64]]) -> Vec<f64> {
    let lo = samples
        .iter()
        .flat_map(|s| s.iter())
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = samples
        .iter()
        .flat_map(|s| s.iter())
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return Vec::new();
    }
    let k = CDF_GRID_POINTS - 1;
    (0..=k)
        .map(|i| if i == k { hi } else { lo + (hi - lo) * i as f64 / k as f64 })
        .collect()
}

/// `F(g) = #{x <= g} / n` at each grid point.
pub fn ecdf_on_grid(sample: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    grid.iter()
        .map(|&g| sorted.partition_point(|&x| x <= g) as f64 / n)
        .collect()
}

/// Largest gap between two CDFs tabulated on the same grid.
pub fn ks_on_grid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Empirical quantile by the nearest-rank rule.
pub fn quantile(sample: &[f64], q: f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn mean(sample: &[f64]) -> f64 {
    sample.iter().sum::<f64>() / sample.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual.
    pub residual: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope x + intercept`. `None` with fewer than
/// two distinct `x` values.
pub fn least_squares(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    Some(LineFit {
        slope,
        intercept,
        residual: (rss / n as f64).sqrt(),
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let fit = least_squares(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12 && (fit.intercept - 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(least_squares(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn cdfs_and_ks() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [3.0, 4.0, 5.0, 6.0];
        let grid = pooled_grid(&[&a, &b]);
        assert_eq!(grid.len(), CDF_GRID_POINTS);
        assert_eq!((grid[0], grid[CDF_GRID_POINTS - 1]), (1.0, 6.0));
        let fa = ecdf_on_grid(&a, &grid);
        let fb = ecdf_on_grid(&b, &grid);
        assert!(fa.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(fa[CDF_GRID_POINTS - 1], 1.0);
        assert!((ks_on_grid(&fa, &fb) - 0.5).abs() < 1e-12);
        assert_eq!(ks_on_grid(&fa, &fa), 0.0);
    }

    #[test]
    fn quantiles() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&s, 0.99), 99.0);
        assert_eq!(quantile(&s, 0.5), 50.0);
        assert_eq!(quantile(&s, 1.0), 100.0);
        assert_eq!(wald_halfwidth(0.0, 100), 0.0);
    }
}
