//! Command dispatch: builds inputs, calls the library, writes outputs and the
//! manifest.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::config::{Command, ExperimentConfig, ExperimentKind, ExperimentSection, GraphSource};
use super::graph_io::{graph_to_json, import_graph};
use super::manifest::{sha256_hex, OutputSet, RunManifest};
use crate::error::{Error, Result};
use crate::exact_chain::{
    excursion_law_from_resistance, excursion_second_moment_formula, excursion_visit_law, expected_cover_time,
    expected_hitting_time, expected_return_time, hit_before_return_prob, return_time_tail, transition_matrix,
    COVER_STATE_LIMIT,
};
use crate::experiments::uvd::default_volume_exponent;
use crate::experiments::{
    carpet_rho_estimate, check_uvd, compare_wired, cover_time_scaling, estimate_exponents, gamma_growth,
    local_time_scaling, modulus_equicontinuity_gasket, modulus_tail, sup_local_time_tail, tail_curve_thm_a,
    tail_curve_thm_b, TailCurve,
};
use crate::graphs::{generate_with_limits, Family, WeightedGraph};
use crate::resistance::{effective_resistance, resistance_matrix, ResistanceMatrix};
use crate::rng::{with_workers, RngStream};
use crate::walk_sim::{
    check_occupation_identity, cover_time, default_cover_cap, horizon_steps, run_pair_statistic, run_walk,
    CoverTimeSample, Kernel, PairGauge, PairRunConfig, Transform,
};

/// Graphs above this size skip the cubic triangle-inequality check in `validate`.
pub const METRIC_CHECK_LIMIT: usize = 1_000;
/// Graphs above this size check the key identity only on pairs through the
/// first and last vertex.
pub const ALL_PAIR_IDENTITY_LIMIT: usize = 40;

/// Runs the configured command, writing into the resolved output directory.
pub fn run_command(config: &ExperimentConfig) -> Result<RunManifest> {
    run_command_in(config, &config.resolved_output_dir())
}

/// Runs the configured command, writing into `dir`.
pub fn run_command_in(config: &ExperimentConfig, dir: &Path) -> Result<RunManifest> {
    let started = Instant::now();
    let mut out = OutputSet::create(dir)?;
    let body = |out: &mut OutputSet| match config.command {
        Command::Gen => gen(config, out),
        Command::Resist => resist(config, out),
        Command::Oracle => oracle(config, out),
        Command::Walk => walk(config, out),
        Command::Exp => experiment(config, out),
        Command::Validate => validate(config, out),
    };
    match config.workers {
        Some(w) => with_workers(w, || body(&mut out))?,
        None => body(&mut out)?,
    }
    let hash = sha256_hex(config.canonical_json().as_bytes());
    out.finish(config.command.name(), hash, config.seed, started.elapsed().as_secs_f64())
}

fn load_graph(config: &ExperimentConfig) -> Result<WeightedGraph> {
    match config.graph.as_ref().ok_or_else(|| Error::Range("no [graph] section".into()))? {
        GraphSource::Family(spec) => generate_with_limits(*spec, &config.limits),
        GraphSource::File(path) => import_graph(path),
    }
}

fn seed(config: &ExperimentConfig) -> u64 {
    config.seed.expect("validated: stochastic commands carry a seed")
}

fn gen(config: &ExperimentConfig, out: &mut OutputSet) -> Result<()> {
    let g = load_graph(config)?;
    out.write("graph.json", graph_to_json(&g).as_bytes())
}

#[derive(Serialize)]
struct ResistanceSummary {
    num_vertices: usize,
    num_edges: usize,
    total_mass: f64,
    r_diam: f64,
    r0: f64,
}

fn resist(config: &ExperimentConfig, out: &mut OutputSet) -> Result<()> {
    let g = load_graph(config)?;
    let rm = resistance_matrix(&g)?;
    out.write("resistance.csv", rm.to_csv().as_bytes())?;
    out.write_json(
        "resistance_summary.json",
        &ResistanceSummary {
            num_vertices: g.num_vertices(),
            num_edges: g.num_edges(),
            total_mass: g.total_mass(),
            r_diam: rm.diameter(),
            r0: rm.min_distance(),
        },
    )
}

#[derive(Serialize)]
struct OracleReport {
    x: usize,
    y: usize,
    mu_x: f64,
    mu_y: f64,
    total_mass: f64,
    resistance: f64,
    hit_before_return: f64,
    inverse_mu_r: f64,
    expected_return_time: f64,
    mass_over_mu: f64,
    hitting_time_xy: f64,
    hitting_time_yx: f64,
    commute_time: f64,
    mass_times_resistance: f64,
    excursion_pmf: Vec<f64>,
    excursion_pmf_from_resistance: Vec<f64>,
    excursion_degenerate: bool,
    excursion_second_moment: f64,
    excursion_second_moment_formula: f64,
    return_time_law: crate::exact_chain::FirstPassageLaw,
    expected_cover_time: Option<f64>,
}

fn oracle(config: &ExperimentConfig, out: &mut OutputSet) -> Result<()> {
    let g = load_graph(config)?;
    let o = &config.oracle;
    let (x, y) = (o.x, o.y.unwrap_or(g.num_vertices() - 1));
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    let r = effective_resistance(&g, x, y)?;
    let (mu_x, mu_y, m) = (g.measure(x), g.measure(y), g.total_mass());
    let law = excursion_visit_law(&g, x, y, o.kmax)?;
    let (from_r, _) = excursion_law_from_resistance(mu_x, mu_y, r, o.kmax);
    let (h_xy, h_yx) = (expected_hitting_time(&g, x, y)?, expected_hitting_time(&g, y, x)?);
    let report = OracleReport {
        x,
        y,
        mu_x,
        mu_y,
        total_mass: m,
        resistance: r,
        hit_before_return: hit_before_return_prob(&g, x, y)?,
        inverse_mu_r: 1.0 / (mu_x * r),
        expected_return_time: expected_return_time(&g, x)?,
        mass_over_mu: m / mu_x,
        hitting_time_xy: h_xy,
        hitting_time_yx: h_yx,
        commute_time: h_xy + h_yx,
        mass_times_resistance: m * r,
        excursion_pmf: law.law.pmf.clone(),
        excursion_pmf_from_resistance: from_r,
        excursion_degenerate: law.degenerate,
        excursion_second_moment: law.eta_moments().1,
        excursion_second_moment_formula: excursion_second_moment_formula(mu_x, mu_y, r),
        return_time_law: return_time_tail(&g, x, o.horizon)?,
        expected_cover_time: if g.num_vertices() <= COVER_STATE_LIMIT {
            Some(expected_cover_time(&g, x)?)
        } else {
            None
        },
    };
    out.write_json("oracle.json", &report)
}

#[derive(Serialize)]
struct WalkReport {
    start: usize,
    steps: u64,
    counts: Vec<u64>,
    local_times: Vec<f64>,
    occupation_identity: bool,
    cover: Option<CoverRecord>,
}

#[derive(Serialize)]
struct CoverRecord {
    cap: u64,
    censored: bool,
    sample: Option<CoverTimeSample>,
}

/// Stream of the single walk in `walk`; the cover sample uses the next one.
const WALK_STREAM: u64 = 0;

fn walk(config: &ExperimentConfig, out: &mut OutputSet) -> Result<()> {
    let g = load_graph(config)?;
    let w = &config.walk;
    g.check_vertex(w.start)?;
    let needs_r = w.steps.is_none() || (w.cover && w.cover_cap.is_none());
    let r_diam = if needs_r { Some(resistance_matrix(&g)?.diameter()) } else { None };
    let steps = match w.steps {
        Some(s) => s,
        None => horizon_steps(&g, r_diam.expect("computed"), w.t_horizon)?,
    };
    let mut rng = RngStream::new(seed(config), WALK_STREAM);
    let field = run_walk(&g, w.start, steps, true, &mut rng)?;
    check_occupation_identity(&field)?;
    out.steps += steps;
    let cover = if w.cover {
        let cap = w.cover_cap.unwrap_or_else(|| default_cover_cap(&g, r_diam.expect("computed")));
        let mut rng = RngStream::new(seed(config), WALK_STREAM + 1);
        let (censored, sample) = match cover_time(&Kernel::new(&g), w.start, cap, &mut rng) {
            Ok(s) => (false, Some(s)),
            Err(Error::CapExceeded { .. }) => (true, None),
            Err(e) => return Err(e),
        };
        out.steps += sample.as_ref().map_or(cap, |s| s.tau_cov_tilde);
        Some(CoverRecord { cap, censored, sample })
    } else {
        None
    };
    if w.retain {
        let mut csv = String::from("t,vertex\n");
        for (t, x) in field.trajectory().expect("retained").iter().enumerate() {
            csv.push_str(&format!("{t},{x}\n"));
        }
        out.write("trajectory.csv", csv.as_bytes())?;
    }
    out.write_json(
        "walk.json",
        &WalkReport {
            start: w.start,
            steps,
            counts: field.counts().to_vec(),
            local_times: field.local_times(),
            occupation_identity: true,
            cover,
        },
    )
}

fn write_curves(out: &mut OutputSet, curves: &[TailCurve]) -> Result<()> {
    for c in curves {
        out.write(&c.file_name(), c.to_csv().as_bytes())?;
        out.steps += c.steps * u64::from(c.n_trials) * c.starts.len() as u64;
    }
    let name = format!("tailcurves_{}.json", curves.first().map_or("none", |c| c.kind.name()));
    out.write_json(&name, &curves)
}

fn experiment(config: &ExperimentConfig, out: &mut OutputSet) -> Result<()> {
    let e: &ExperimentSection = config.experiment.as_ref().expect("validated");
    let seed = config.seed.unwrap_or(0);
    match e.kind {
        ExperimentKind::ThmA => write_curves(
            out,
            &tail_curve_thm_a(e.family, &e.levels, e.t_horizon, &e.lambda_grid, e.n_trials, seed)?,
        ),
        ExperimentKind::ThmB => write_curves(
            out,
            &tail_curve_thm_b(e.family, &e.levels, e.l_trunc, &e.lambda_grid, e.n_trials, seed)?,
        ),
        ExperimentKind::SupLocaltime => write_curves(
            out,
            &sup_local_time_tail(e.family, &e.levels, e.t_horizon, &e.lambda_grid, e.n_trials, seed)?,
        ),
        ExperimentKind::Modulus => write_curves(
            out,
            &modulus_tail(e.family, &e.levels, e.t_horizon, &e.lambda_grid, e.n_trials, seed)?,
        ),
        ExperimentKind::GasketModulus => {
            if e.family != Family::Gasket {
                return Err(Error::Range("gasket-modulus runs on the gasket family only".into()));
            }
            write_curves(
                out,
                &modulus_equicontinuity_gasket(&e.levels, e.t_horizon, &e.lambda_grid, e.n_trials, seed)?,
            )
        }
        ExperimentKind::Gamma => {
            let report = gamma_growth(e.family, &e.levels, e.t_horizon, e.c_psi, e.n_trials, seed)?;
            out.write_json("gamma_growth.json", &report)
        }
        ExperimentKind::Uvd => {
            let alpha = e.alpha.unwrap_or_else(|| default_volume_exponent(e.family));
            out.write_json("uvd_report.json", &check_uvd(e.family, &e.levels, alpha)?)
        }
        ExperimentKind::Exponents => out.write_json("exponents_report.json", &estimate_exponents(e.family, &e.levels)?),
        ExperimentKind::LocalTimeScaling => {
            gasket_only(e)?;
            let report = local_time_scaling(&e.levels, &e.t_values, e.n_trials, seed)?;
            let t_max = e.t_values.iter().cloned().fold(0.0, f64::max);
            out.steps += e.levels.iter().map(|&l| (5f64.powi(l as i32) * t_max) as u64).sum::<u64>() * u64::from(e.n_trials);
            out.write("scaling_report.json", (report.to_json() + "\n").as_bytes())
        }
        ExperimentKind::CoverTimeScaling => {
            gasket_only(e)?;
            let report = cover_time_scaling(&e.levels, e.n_trials, seed)?;
            out.write("scaling_report.json", (report.to_json() + "\n").as_bytes())
        }
        ExperimentKind::Carpet => {
            #[derive(Serialize)]
            struct CarpetOutput {
                rho: crate::experiments::CarpetReport,
                wiring: Vec<crate::experiments::WiringComparison>,
            }
            let wiring = e
                .levels
                .iter()
                .filter(|&&l| (1..=2).contains(&l))
                .map(|&l| compare_wired(l))
                .collect::<Result<Vec<_>>>()?;
            out.write_json(
                "carpet_report.json",
                &CarpetOutput {
                    rho: carpet_rho_estimate(&e.levels)?,
                    wiring,
                },
            )
        }
    }
}

fn gasket_only(e: &ExperimentSection) -> Result<()> {
    if e.family != Family::Gasket {
        return Err(Error::Range("scaling studies run on the gasket family only".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    /// Largest residual seen, where the check is numeric.
    residual: f64,
    detail: String,
}

#[derive(Serialize)]
struct ValidationReport {
    num_vertices: usize,
    checks: Vec<Check>,
}

fn validate(config: &ExperimentConfig, out: &mut OutputSet) -> Result<()> {
    let g = load_graph(config)?;
    let tol = config.validate.tolerance;
    let n = g.num_vertices();
    let mut checks = Vec::new();

    let p = transition_matrix(&g);
    let defect = p.row_sum_defect().max(p.stationarity_defect(g.measures()));
    checks.push(Check {
        name: "transition-matrix",
        passed: defect <= tol,
        residual: defect,
        detail: "row sums and stationarity of mu".into(),
    });

    let rm: ResistanceMatrix = resistance_matrix(&g)?;
    if n <= METRIC_CHECK_LIMIT {
        let r = rm.verify_metric(&g, tol);
        checks.push(Check {
            name: "resistance-metric",
            passed: r.is_ok(),
            residual: 0.0,
            detail: r.err().map_or_else(|| "symmetric, triangle inequality, mu R >= 1".into(), |e| e.to_string()),
        });
    }

    let pairs: Vec<(usize, usize)> = if n <= ALL_PAIR_IDENTITY_LIMIT {
        (0..n).flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y))).collect()
    } else {
        (1..n).map(|y| (0, y)).chain((0..n - 1).map(|x| (n - 1, x))).collect()
    };
    let mut worst = 0.0f64;
    for &(x, y) in &pairs {
        let lhs = hit_before_return_prob(&g, x, y)?;
        worst = worst.max((lhs - 1.0 / (g.measure(x) * rm.get(x, y))).abs());
    }
    checks.push(Check {
        name: "hit-before-return",
        passed: worst <= tol,
        residual: worst,
        detail: format!("{} ordered pairs", pairs.len()),
    });

    let mut worst = 0.0f64;
    for x in [0, n - 1] {
        let rel = (expected_return_time(&g, x)? * g.measure(x) / g.total_mass() - 1.0).abs();
        worst = worst.max(rel);
    }
    checks.push(Check {
        name: "return-time",
        passed: worst <= tol,
        residual: worst,
        detail: "E tau_x^+ = m / mu_x at the first and last vertex".into(),
    });

    let gauge = PairGauge::sqrt_resistance(&rm)?;
    let cfg = PairRunConfig {
        transform: Transform::Linear {
            scale: 1.0 / rm.diameter(),
        },
        max_steps: config.validate.steps,
        stop_when_saturated: false,
        per_pair: false,
        validate: true,
    };
    let mut rng = RngStream::new(seed(config), 0);
    let run = run_pair_statistic(&g, &Kernel::new(&g), &gauge, 0, &cfg, &mut rng)?;
    out.steps += run.steps;
    checks.push(Check {
        name: "incremental-maximum",
        passed: true,
        residual: 0.0,
        detail: format!("{} steps, recomputed every step", run.steps),
    });
    let mut rng = RngStream::new(seed(config), 1);
    let field = run_walk(&g, 0, config.validate.steps, true, &mut rng)?;
    check_occupation_identity(&field)?;
    out.steps += config.validate.steps;
    checks.push(Check {
        name: "occupation-identity",
        passed: true,
        residual: 0.0,
        detail: format!("{} steps", config.validate.steps),
    });

    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    out.write_json("validation.json", &ValidationReport { num_vertices: n, checks })?;
    if !failed.is_empty() {
        return Err(Error::InvariantViolation(format!("failed checks: {}", failed.join(", "))));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_io::parse_config;

    fn config(text: &str) -> ExperimentConfig {
        parse_config(&format!("schema_version = 1\n{text}")).unwrap()
    }

    #[test]
    fn gen_resist_exp_pipeline() {
        let dir = tempfile::tempdir().unwrap();
        let gen_dir = dir.path().join("gen");
        let m = run_command_in(&config("command = \"gen\"\n[graph]\nfamily = \"gasket\"\nlevel = 2\n"), &gen_dir).unwrap();
        assert!(m.outputs.contains_key("graph.json"));
        let graph_path = gen_dir.join("graph.json");
        let text = format!("command = \"resist\"\n[graph]\ninput = {:?}\n", graph_path.to_str().unwrap());
        let m = run_command_in(&config(&text), &dir.path().join("resist")).unwrap();
        assert!(m.outputs.contains_key("resistance.csv"));
        let text = "command = \"exp\"\nseed = 3\n[experiment]\nkind = \"thm-a\"\nlevels = [2]\nn_trials = 100\n";
        let m = run_command_in(&config(text), &dir.path().join("exp")).unwrap();
        assert!(m.outputs.contains_key("tailcurve_thm-a_2.csv"));
    }

    #[test]
    fn identical_runs_have_identical_manifests() {
        let dir = tempfile::tempdir().unwrap();
        let c = config("command = \"walk\"\nseed = 11\n[graph]\nfamily = \"vicsek\"\nlevel = 2\n[walk]\ncover = true\n");
        let a = run_command_in(&c, &dir.path().join("a")).unwrap();
        let b = run_command_in(&c, &dir.path().join("b")).unwrap();
        assert!(a.same_run(&b));
        assert!(a.steps > 0);
    }

    #[test]
    fn oracle_and_validate_on_small_graph() {
        let dir = tempfile::tempdir().unwrap();
        run_command_in(&config("command = \"oracle\"\n[graph]\nfamily = \"path\"\nlevel = 4\n"), dir.path()).unwrap();
        let v = run_command_in(
            &config("command = \"validate\"\nseed = 2\n[graph]\nfamily = \"gasket\"\nlevel = 2\n[validate]\nsteps = 2000\n"),
            &dir.path().join("v"),
        )
        .unwrap();
        assert!(v.outputs.contains_key("validation.json"));
    }
}
