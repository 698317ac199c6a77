//! Level-to-level behaviour of rescaled local times and cover times on the
//! gasket graphs, summarized as empirical CDFs on a pooled grid.

use serde::Serialize;

use super::stats::{ecdf_on_grid, ks_on_grid, mean, pooled_grid};
use super::Prepared;
use crate::error::{Error, Result};
use crate::graphs::{Family, Point};
use crate::rng::map_trials;
use crate::walk_sim::{cover_time, default_cover_cap, LocalTimeField};

/// Largest censored fraction accepted in a cover-time study.
pub const CENSORING_LIMIT: f64 = 0.01;

const LOCAL_TIME_CELL: u32 = 0x40 << 24;
const COVER_TIME_CELL: u32 = 0x41 << 24;

#[derive(Clone, Debug, Serialize)]
pub struct LevelSummary {
    pub level: u32,
    pub n_trials: u32,
    pub mean: f64,
    /// CDF on the functional's pooled grid.
    pub cdf: Vec<f64>,
    pub censored: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionalSummary {
    pub name: String,
    pub grid: Vec<f64>,
    pub per_level: Vec<LevelSummary>,
    /// KS distance between levels `k` and `k + 1`.
    pub ks: Vec<f64>,
    pub ks_decreasing: bool,
    /// Per-level samples, kept for downstream checks; not serialized.
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub kind: String,
    pub levels: Vec<u32>,
    pub functionals: Vec<FunctionalSummary>,
}

impl ScalingReport {
    pub fn functional(&self, name: &str) -> Option<&FunctionalSummary> {
        self.functionals.iter().find(|f| f.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn summarize(name: &str, levels: &[u32], samples: Vec<Vec<f64>>, censored: &[u32]) -> FunctionalSummary {
    let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
    let grid = pooled_grid(&refs);
    let per_level: Vec<LevelSummary> = levels
        .iter()
        .zip(&samples)
        .zip(censored)
        .map(|((&level, s), &c)| LevelSummary {
            level,
            n_trials: s.len() as u32,
            mean: mean(s),
            cdf: ecdf_on_grid(s, &grid),
            censored: c,
        })
        .collect();
    let ks: Vec<f64> = per_level.windows(2).map(|w| ks_on_grid(&w[0].cdf, &w[1].cdf)).collect();
    let ks_decreasing = ks.windows(2).all(|w| w[1] < w[0]);
    FunctionalSummary {
        name: name.to_string(),
        grid,
        per_level,
        ks,
        ks_decreasing,
        samples,
    }
}

/// The default test function for the occupation functional: the horizontal
/// coordinate.
pub fn horizontal_coordinate(p: Point) -> f64 {
    p[0]
}

fn check_levels(levels: &[u32], n_trials: u32) -> Result<()> {
    if levels.len() < 2 {
        return Err(Error::InsufficientLevels {
            needed: 2,
            got: levels.len(),
        });
    }
    if n_trials == 0 {
        return Err(Error::Range("need at least one trial".into()));
    }
    Ok(())
}

/// Walks from the corner `(0, 0)` of gasket level `i` for `5^i t` steps and
/// records three functionals of `6 (3/5)^i L_{5^i t}`: the value at the
/// start, the maximum over vertices, and `5^{-i} sum_x f(x) L(x) mu_x` for
/// [`horizontal_coordinate`]. Functional names carry the `t` value.
pub fn local_time_scaling(levels: &[u32], t_values: &[f64], n_trials: u32, seed: u64) -> Result<ScalingReport> {
    local_time_scaling_with(levels, t_values, n_trials, seed, &horizontal_coordinate)
}

/// [`local_time_scaling`] with a chosen test function `f` of the vertex
/// position.
pub fn local_time_scaling_with(
    levels: &[u32],
    t_values: &[f64],
    n_trials: u32,
    seed: u64,
    test_fn: &(dyn Fn(Point) -> f64 + Sync),
) -> Result<ScalingReport> {
    check_levels(levels, n_trials)?;
    if t_values.is_empty() || t_values.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Range("time values must be positive".into()));
    }
    // samples[t][functional][level]
    let mut samples = vec![vec![Vec::new(); 3]; t_values.len()];
    for &level in levels {
        let prep = Prepared::new(Family::Gasket, level)?;
        let g = &prep.graph;
        let start = super::nearest_vertex(g, [0.0, 0.0])?;
        let f: Vec<f64> = g
            .coords()
            .iter()
            .map(|c| c.map(test_fn).ok_or_else(|| Error::Schema("gasket vertex without coordinates".into())))
            .collect::<Result<_>>()?;
        let scale = 6.0 * 0.6f64.powi(level as i32);
        let time_scale = 5f64.powi(level as i32);
        let steps: Vec<u64> = t_values.iter().map(|t| (time_scale * t).floor() as u64).collect();
        let last = *steps.iter().max().expect("nonempty");
        let cell = LOCAL_TIME_CELL | level;
        let runs = map_trials(seed, cell, n_trials, |_, rng| -> Result<Vec<[f64; 3]>> {
            let mut field = LocalTimeField::new(g, start, false)?;
            let mut occupation = 0.0;
            let mut out = vec![[0.0; 3]; steps.len()];
            loop {
                for (k, &s) in steps.iter().enumerate() {
                    if field.t() == s {
                        let lt = field.local_times();
                        out[k] = [
                            scale * lt[start],
                            scale * lt.iter().cloned().fold(0.0, f64::max),
                            occupation / time_scale,
                        ];
                    }
                }
                if field.t() >= last {
                    break;
                }
                // `advance` returns X_t, the vertex just counted
                let x = field.advance(&prep.kernel, rng);
                occupation += f[x];
            }
            Ok(out)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        for run in &runs {
            for (k, values) in run.iter().enumerate() {
                for j in 0..3 {
                    samples[k][j].push(values[j]);
                }
            }
        }
    }
    let censored = vec![0; levels.len()];
    let mut functionals = Vec::new();
    for (k, &t) in t_values.iter().enumerate() {
        let mut per = std::mem::take(&mut samples[k]).into_iter();
        for name in ["start", "max", "occupation"] {
            let flat = per.next().expect("three functionals");
            let by_level: Vec<Vec<f64>> = flat.chunks(n_trials as usize).map(|c| c.to_vec()).collect();
            functionals.push(summarize(&format!("{name}@t={t}"), levels, by_level, &censored));
        }
    }
    Ok(ScalingReport {
        kind: "local-time".into(),
        levels: levels.to_vec(),
        functionals,
    })
}

/// Samples `5^{-i} tau_cov` from the corner `(0, 0)` of each gasket level.
/// Runs that hit the default cap enter at the cap; more than
/// [`CENSORING_LIMIT`] of them is an error.
pub fn cover_time_scaling(levels: &[u32], n_trials: u32, seed: u64) -> Result<ScalingReport> {
    check_levels(levels, n_trials)?;
    let mut samples = Vec::new();
    let mut censored = Vec::new();
    for &level in levels {
        let prep = Prepared::new(Family::Gasket, level)?;
        let start = super::nearest_vertex(&prep.graph, [0.0, 0.0])?;
        let cap = default_cover_cap(&prep.graph, prep.rm.diameter());
        let scale = 5f64.powi(-(level as i32));
        let runs = map_trials(seed, COVER_TIME_CELL | level, n_trials, |_, rng| {
            match cover_time(&prep.kernel, start, cap, rng) {
                Ok(s) => Ok((s.tau_cov as f64 * scale, false)),
                Err(Error::CapExceeded { .. }) => Ok((cap as f64 * scale, true)),
                Err(e) => Err(e),
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let n_censored = runs.iter().filter(|r| r.1).count() as u32;
        let fraction = f64::from(n_censored) / f64::from(n_trials);
        if fraction > CENSORING_LIMIT {
            return Err(Error::ExcessiveCensoring {
                fraction,
                limit: CENSORING_LIMIT,
            });
        }
        samples.push(runs.into_iter().map(|r| r.0).collect());
        censored.push(n_censored);
    }
    Ok(ScalingReport {
        kind: "cover-time".into(),
        levels: levels.to_vec(),
        functionals: vec![summarize("cover", levels, samples, &censored)],
    })
}
