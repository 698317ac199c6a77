//! Tail probabilities of local-time fluctuation statistics.
//!
//! Two shapes of estimate appear. For the concentration bounds the maximum
//! over the pair `(x, y)` sits outside the probability, so each pair keeps
//! its own exceedance count and the curve reports the worst pair. For the
//! modulus statistics the pair maximum is inside, so each trial yields one
//! number. In both cases the curve is the maximum over start vertices.

use serde::Serialize;

use super::stats::{least_squares, quantile, wald_halfwidth, LineFit};
use super::{check_grid, check_trials, Prepared};
use crate::error::Result;
use crate::garsia::Psi;
use crate::graphs::Family;
use crate::rng::{map_trials, RngStream};
use crate::walk_sim::{
    horizon_steps, run_pair_statistic, LocalTimeField, PairGauge, PairRunConfig, Transform,
};

/// Fewest exceedances for a grid point to enter the log-slope fit.
pub const MIN_SLOPE_HITS: u32 = 10;
/// Step budget for the truncated statistic, as a multiple of
/// `L m r (1 + ln |V|)`.
pub const THM_B_BUDGET_FACTOR: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TailKind {
    /// Per-pair `max_{t <= T m r} r^{-1} |L_t(x) - L_t(y)| / sqrt(R~)`.
    #[serde(rename = "thm-a")]
    ThmA,
    /// Per-pair `max_t |L ∧ L_t(x)/r - L ∧ L_t(y)/r| / sqrt(R~)`.
    #[serde(rename = "thm-b")]
    ThmB,
    /// `max_x r^{-1} L_{T m r}(x)`.
    #[serde(rename = "sup-localtime")]
    SupLocalTime,
    /// Pair maximum of `r^{-1} |L_t(x) - L_t(y)| / sqrt(R~ (1 + ln R~^{-1}))`.
    #[serde(rename = "modulus")]
    Modulus,
    /// Gasket pair maximum with Euclidean gauge and `(3/5)^i` scaling.
    #[serde(rename = "gasket-modulus")]
    GasketModulus,
}

impl TailKind {
    pub fn name(self) -> &'static str {
        match self {
            TailKind::ThmA => "thm-a",
            TailKind::ThmB => "thm-b",
            TailKind::SupLocalTime => "sup-localtime",
            TailKind::Modulus => "modulus",
            TailKind::GasketModulus => "gasket-modulus",
        }
    }

    fn id(self) -> u32 {
        self as u32 + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailCurve {
    pub kind: TailKind,
    pub family: Family,
    pub level: u32,
    pub graph_id: String,
    pub lambda_grid: Vec<f64>,
    pub prob_est: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
    pub n_trials: u32,
    pub starts: Vec<usize>,
    /// Start attaining the estimate at each grid point.
    pub worst_start: Vec<usize>,
    pub t_horizon: Option<f64>,
    pub l_trunc: Option<f64>,
    /// Steps per trial (the horizon, or the budget for the truncated kind).
    pub steps: u64,
    /// Truncated runs that hit the step budget before saturating.
    pub unsaturated: u32,
    /// Largest per-start quantiles of the per-trial statistic, for the
    /// kinds with the pair maximum inside.
    pub quantiles: Option<Quantiles>,
    /// Fit of `ln prob` against `lambda` over grid points with `lambda > 0`
    /// and at least [`MIN_SLOPE_HITS`] exceedances.
    pub log_fit: Option<LineFit>,
}

impl TailCurve {
    pub fn file_name(&self) -> String {
        format!("tailcurve_{}_{}.csv", self.kind.name(), self.level)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,prob_est,ci_halfwidth,n_trials,worst_start\n");
        for k in 0..self.lambda_grid.len() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                self.lambda_grid[k], self.prob_est[k], self.ci_halfwidth[k], self.n_trials, self.worst_start[k]
            ));
        }
        s
    }

    /// Value at `lambda`, if it is on the grid.
    pub fn at(&self, lambda: f64) -> Option<f64> {
        self.lambda_grid
            .iter()
            .position(|&l| l == lambda)
            .map(|k| self.prob_est[k])
    }

    /// Largest increase between consecutive estimates beyond their combined
    /// half-widths; zero when the curve is nonincreasing up to noise.
    pub fn monotonicity_excess(&self) -> f64 {
        (1..self.prob_est.len())
            .map(|k| {
                self.prob_est[k] - self.prob_est[k - 1] - self.ci_halfwidth[k] - self.ci_halfwidth[k - 1]
            })
            .fold(0.0, f64::max)
    }
}

/// `2 exp(1/2 - lambda^2 / 8L)`.
pub fn thm_b_bound(lambda: f64, l_trunc: f64) -> f64 {
    2.0 * (0.5 - lambda * lambda / (8.0 * l_trunc)).exp()
}

fn cell(kind: TailKind, level: u32, start_index: usize) -> u32 {
    (kind.id() << 24) | ((level & 0xff) << 16) | (start_index as u32 & 0xffff)
}

/// Number of grid points at or below `s`, i.e. how many `{s >= lambda_k}`
/// events occurred.
fn exceeded(grid: &[f64], s: f64) -> usize {
    grid.partition_point(|&l| l <= s)
}

struct Estimate {
    counts: Vec<u32>,
    worst_start: Vec<usize>,
    quantiles: Option<Quantiles>,
    unsaturated: u32,
}

impl Estimate {
    fn new(k: usize) -> Self {
        Estimate {
            counts: vec![0; k],
            worst_start: vec![0; k],
            quantiles: None,
            unsaturated: 0,
        }
    }

    fn absorb(&mut self, start: usize, counts: &[u32]) {
        for k in 0..counts.len() {
            if counts[k] > self.counts[k] {
                self.counts[k] = counts[k];
                self.worst_start[k] = start;
            }
        }
    }
}

/// Scalar statistic per trial, maximum over starts of exceedance frequency.
fn scalar_tail(
    prep: &Prepared,
    kind: TailKind,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
    trial: impl Fn(usize, &mut RngStream) -> Result<f64> + Sync,
) -> Result<Estimate> {
    let mut est = Estimate::new(grid.len());
    let mut q = Quantiles {
        p50: 0.0,
        p90: 0.0,
        p99: 0.0,
    };
    for (j, &start) in prep.starts.iter().enumerate() {
        let values = map_trials(seed, cell(kind, prep.level, j), n_trials, |_, rng| trial(start, rng))
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
        let mut counts = vec![0u32; grid.len()];
        for &s in &values {
            for c in counts.iter_mut().take(exceeded(grid, s)) {
                *c += 1;
            }
        }
        est.absorb(start, &counts);
        q.p50 = q.p50.max(quantile(&values, 0.5));
        q.p90 = q.p90.max(quantile(&values, 0.9));
        q.p99 = q.p99.max(quantile(&values, 0.99));
    }
    est.quantiles = Some(q);
    Ok(est)
}

/// Per-pair running maxima per trial, maximum over pairs and starts of the
/// exceedance frequency.
fn per_pair_tail(
    prep: &Prepared,
    kind: TailKind,
    gauge: &PairGauge,
    cfg: &PairRunConfig,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<Estimate> {
    let g = &prep.graph;
    let n = g.num_vertices();
    let k = grid.len();
    let mut est = Estimate::new(k);
    for (j, &start) in prep.starts.iter().enumerate() {
        let runs = map_trials(seed, cell(kind, prep.level, j), n_trials, |_, rng| {
            let out = run_pair_statistic(g, &prep.kernel, gauge, start, cfg, rng)?;
            let pairs = out.per_pair.expect("per-pair tracking requested");
            let levels: Vec<u8> = (0..n)
                .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
                .map(|(x, y)| exceeded(grid, pairs[x * n + y]) as u8)
                .collect();
            Ok((levels, out.saturated))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let n_pairs = n * (n - 1) / 2;
        let mut hist = vec![0u32; n_pairs * (k + 1)];
        for (levels, saturated) in &runs {
            for (p, &l) in levels.iter().enumerate() {
                hist[p * (k + 1) + l as usize] += 1;
            }
            if !saturated && cfg.stop_when_saturated {
                est.unsaturated += 1;
            }
        }
        let mut counts = vec![0u32; k];
        for p in 0..n_pairs {
            // exceedances of lambda_i: runs whose level index is > i
            let mut above = 0;
            for i in (0..k).rev() {
                above += hist[p * (k + 1) + i + 1];
                counts[i] = counts[i].max(above);
            }
        }
        est.absorb(start, &counts);
    }
    Ok(est)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    prep: &Prepared,
    kind: TailKind,
    grid: &[f64],
    n_trials: u32,
    est: Estimate,
    t_horizon: Option<f64>,
    l_trunc: Option<f64>,
    steps: u64,
) -> TailCurve {
    let prob_est: Vec<f64> = est.counts.iter().map(|&c| f64::from(c) / f64::from(n_trials)).collect();
    let ci_halfwidth = prob_est.iter().map(|&p| wald_halfwidth(p, n_trials)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(&est.counts)
        .filter(|&(&l, &c)| l > 0.0 && c >= MIN_SLOPE_HITS)
        .map(|(&l, &c)| (l, (f64::from(c) / f64::from(n_trials)).ln()))
        .unzip();
    TailCurve {
        kind,
        family: prep.family,
        level: prep.level,
        graph_id: prep.id(),
        lambda_grid: grid.to_vec(),
        prob_est,
        ci_halfwidth,
        n_trials,
        starts: prep.starts.clone(),
        worst_start: est.worst_start,
        t_horizon,
        l_trunc,
        steps,
        unsaturated: est.unsaturated,
        quantiles: est.quantiles,
        log_fit: least_squares(&xs, &ys),
    }
}

fn per_level<T>(family: Family, levels: &[u32], f: impl Fn(&Prepared) -> Result<T>) -> Result<Vec<T>> {
    levels
        .iter()
        .map(|&level| f(&Prepared::new(family, level)?))
        .collect()
}

pub fn tail_curve_thm_a_prepared(
    prep: &Prepared,
    t_horizon: f64,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<TailCurve> {
    check_grid(grid)?;
    check_trials(n_trials)?;
    let r = prep.rm.diameter();
    let steps = horizon_steps(&prep.graph, r, t_horizon)?;
    let gauge = PairGauge::sqrt_resistance(&prep.rm)?;
    let cfg = PairRunConfig {
        transform: Transform::Linear { scale: 1.0 / r },
        max_steps: steps,
        stop_when_saturated: false,
        per_pair: true,
        validate: false,
    };
    let est = per_pair_tail(prep, TailKind::ThmA, &gauge, &cfg, grid, n_trials, seed)?;
    Ok(finish(prep, TailKind::ThmA, grid, n_trials, est, Some(t_horizon), None, steps))
}

/// Worst-pair tail of `max_{t <= T m r} r^{-1} |L_t(x) - L_t(y)| / sqrt(R~)`.
pub fn tail_curve_thm_a(
    family: Family,
    levels: &[u32],
    t_horizon: f64,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<Vec<TailCurve>> {
    per_level(family, levels, |p| tail_curve_thm_a_prepared(p, t_horizon, grid, n_trials, seed))
}

pub fn tail_curve_thm_b_prepared(
    prep: &Prepared,
    l_trunc: f64,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<TailCurve> {
    check_grid(grid)?;
    check_trials(n_trials)?;
    if !(l_trunc >= 1.0) {
        return Err(crate::Error::Range(format!("truncation level must be at least 1, got {l_trunc}")));
    }
    let g = &prep.graph;
    let r = prep.rm.diameter();
    let n = g.num_vertices() as f64;
    let steps = (THM_B_BUDGET_FACTOR * l_trunc * g.total_mass() * r * (1.0 + n.ln())).ceil() as u64;
    let gauge = PairGauge::sqrt_resistance(&prep.rm)?;
    let cfg = PairRunConfig {
        transform: Transform::Truncated {
            scale: 1.0 / r,
            cap: l_trunc,
        },
        max_steps: steps,
        stop_when_saturated: true,
        per_pair: true,
        validate: false,
    };
    let est = per_pair_tail(prep, TailKind::ThmB, &gauge, &cfg, grid, n_trials, seed)?;
    Ok(finish(prep, TailKind::ThmB, grid, n_trials, est, None, Some(l_trunc), steps))
}

/// Worst-pair tail of the truncated statistic over all times.
pub fn tail_curve_thm_b(
    family: Family,
    levels: &[u32],
    l_trunc: f64,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<Vec<TailCurve>> {
    per_level(family, levels, |p| tail_curve_thm_b_prepared(p, l_trunc, grid, n_trials, seed))
}

pub fn sup_local_time_tail_prepared(
    prep: &Prepared,
    t_horizon: f64,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<TailCurve> {
    check_grid(grid)?;
    check_trials(n_trials)?;
    let g = &prep.graph;
    let r = prep.rm.diameter();
    let steps = horizon_steps(g, r, t_horizon)?;
    let est = scalar_tail(prep, TailKind::SupLocalTime, grid, n_trials, seed, |start, rng| {
        let mut field = LocalTimeField::new(g, start, false)?;
        for _ in 0..steps {
            field.advance(&prep.kernel, rng);
        }
        Ok(field.local_times().into_iter().fold(0.0, f64::max) / r)
    })?;
    Ok(finish(prep, TailKind::SupLocalTime, grid, n_trials, est, Some(t_horizon), None, steps))
}

/// Tail of `max_x r^{-1} L_{T m r}(x)`.
pub fn sup_local_time_tail(
    family: Family,
    levels: &[u32],
    t_horizon: f64,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<Vec<TailCurve>> {
    per_level(family, levels, |p| sup_local_time_tail_prepared(p, t_horizon, grid, n_trials, seed))
}

fn inside_tail(
    prep: &Prepared,
    kind: TailKind,
    gauge: &PairGauge,
    cfg: &PairRunConfig,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<Estimate> {
    scalar_tail(prep, kind, grid, n_trials, seed, |start, rng| {
        Ok(run_pair_statistic(&prep.graph, &prep.kernel, gauge, start, cfg, rng)?.max)
    })
}

pub fn modulus_tail_prepared(
    prep: &Prepared,
    t_horizon: f64,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<TailCurve> {
    check_grid(grid)?;
    check_trials(n_trials)?;
    let r = prep.rm.diameter();
    let steps = horizon_steps(&prep.graph, r, t_horizon)?;
    let gauge = PairGauge::resistance_modulus(&prep.rm)?;
    let cfg = PairRunConfig {
        transform: Transform::Linear { scale: 1.0 / r },
        max_steps: steps,
        stop_when_saturated: false,
        per_pair: false,
        validate: false,
    };
    let est = inside_tail(prep, TailKind::Modulus, &gauge, &cfg, grid, n_trials, seed)?;
    Ok(finish(prep, TailKind::Modulus, grid, n_trials, est, Some(t_horizon), None, steps))
}

/// Tail of the resistance modulus statistic with the pair maximum inside.
pub fn modulus_tail(
    family: Family,
    levels: &[u32],
    t_horizon: f64,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<Vec<TailCurve>> {
    per_level(family, levels, |p| modulus_tail_prepared(p, t_horizon, grid, n_trials, seed))
}

pub fn gasket_modulus_prepared(
    prep: &Prepared,
    t_horizon: f64,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<TailCurve> {
    check_grid(grid)?;
    check_trials(n_trials)?;
    if !(t_horizon > 0.0) {
        return Err(crate::Error::Range(format!("time horizon must be positive, got {t_horizon}")));
    }
    let level = prep.level as i32;
    let steps = (5f64.powi(level) * t_horizon).floor() as u64;
    let gauge = PairGauge::gasket_euclidean(&prep.graph)?;
    let cfg = PairRunConfig {
        transform: Transform::Linear {
            scale: 0.6f64.powi(level),
        },
        max_steps: steps,
        stop_when_saturated: false,
        per_pair: false,
        validate: false,
    };
    let est = inside_tail(prep, TailKind::GasketModulus, &gauge, &cfg, grid, n_trials, seed)?;
    Ok(finish(prep, TailKind::GasketModulus, grid, n_trials, est, Some(t_horizon), None, steps))
}

/// Gasket statistic `(3/5)^i |L_t(x) - L_t(y)| / (|x-y|^gamma (1 + ln |x-y|^{-1})^{1/2})`
/// maximized over pairs and `t <= 5^i T`.
pub fn modulus_equicontinuity_gasket(
    levels: &[u32],
    t_horizon: f64,
    grid: &[f64],
    n_trials: u32,
    seed: u64,
) -> Result<Vec<TailCurve>> {
    per_level(Family::Gasket, levels, |p| gasket_modulus_prepared(p, t_horizon, grid, n_trials, seed))
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaGrowth {
    pub levels: Vec<u32>,
    /// Mean over trials of `m^{-2} max_{t <= T m r} Gamma(r^{-1} L_t)`.
    pub mean_scaled_gamma: Vec<f64>,
    pub n_trials: u32,
    pub c_psi: f64,
}

/// `Gamma(r^{-1} L_t)` with `d = R~`, `p = sqrt`, `psi = exp(c_psi |.|)`,
/// maximized over `t <= T m r` from the first start vertex of each level.
pub fn gamma_growth(
    family: Family,
    levels: &[u32],
    t_horizon: f64,
    c_psi: f64,
    n_trials: u32,
    seed: u64,
) -> Result<GammaGrowth> {
    let mut means = Vec::new();
    for &level in levels {
        let prep = Prepared::new(family, level)?;
        let g = &prep.graph;
        let n = g.num_vertices();
        let r = prep.rm.diameter();
        let m = g.total_mass();
        let steps = horizon_steps(g, r, t_horizon)?;
        let psi = Psi::ExpAbs(c_psi);
        let inv_p: Vec<f64> = (0..n * n)
            .map(|k| {
                let (x, y) = (k / n, k % n);
                if x == y {
                    0.0
                } else {
                    1.0 / prep.rm.rescaled(x, y).sqrt()
                }
            })
            .collect();
        let start = prep.starts[0];
        let values = map_trials(seed, cell(TailKind::Modulus, level, 0xffff), n_trials, |_, rng| {
            let mut field = LocalTimeField::new(g, start, false)?;
            let mut f = vec![0.0; n];
            // Gamma at f = 0 is m^2; update the pairs through the changed vertex
            let mut gamma = m * m;
            let mut best = gamma;
            for _ in 0..steps {
                let x = field.advance(&prep.kernel, rng);
                let new = field.local_time(x) / r;
                let mut delta = 0.0;
                for y in 0..n {
                    if y != x {
                        let w = g.measure(x) * g.measure(y);
                        delta += w * (psi.eval((new - f[y]) * inv_p[x * n + y]) - psi.eval((f[x] - f[y]) * inv_p[x * n + y]));
                    }
                }
                f[x] = new;
                gamma += 2.0 * delta;
                best = f64::max(best, gamma);
            }
            Ok(best / (m * m))
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        means.push(super::stats::mean(&values));
    }
    Ok(GammaGrowth {
        levels: levels.to_vec(),
        mean_scaled_gamma: means,
        n_trials,
        c_psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exceedance_index() {
        let grid = [0.0, 0.5, 1.0];
        assert_eq!(exceeded(&grid, 0.0), 1);
        assert_eq!(exceeded(&grid, 0.7), 2);
        assert_eq!(exceeded(&grid, 1.0), 3);
    }

    #[test]
    fn bound_at_zero_exceeds_one() {
        assert!(thm_b_bound(0.0, 1.0) > 1.0);
        assert!((thm_b_bound(4.0, 1.0) - 2.0 * (-1.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn small_thm_a_curve() {
        let grid: Vec<f64> = (0..=12).map(|k| 0.5 * k as f64).collect();
        let c = &tail_curve_thm_a(Family::Gasket, &[1], 1.0, &grid, 200, 5).unwrap()[0];
        assert_eq!(c.prob_est[0], 1.0);
        assert!(c.prob_est.iter().all(|&p| (0.0..=1.0).contains(&p)));
        assert_eq!(c.file_name(), "tailcurve_thm-a_1.csv");
        assert_eq!(c.to_csv().lines().count(), grid.len() + 1);
    }

    #[test]
    fn sup_local_time_is_at_least_t() {
        let grid = [0.0, 0.99, 1.0];
        let c = &sup_local_time_tail(Family::Gasket, &[2], 1.0, &grid, 100, 3).unwrap()[0];
        assert_eq!(c.prob_est[0], 1.0);
        // floor(T m r) steps leave max_x L / r just under T at worst
        assert_eq!(c.prob_est[1], 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(tail_curve_thm_a(Family::Gasket, &[1], 1.0, &[1.0, 0.5], 200, 1).is_err());
        assert!(tail_curve_thm_a(Family::Gasket, &[1], 1.0, &[0.0], 10, 1).is_err());
        assert!(tail_curve_thm_b(Family::Gasket, &[1], 0.5, &[0.0], 200, 1).is_err());
    }
}
