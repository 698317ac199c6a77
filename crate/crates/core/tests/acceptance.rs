//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line even when output is captured; exits
//! nonzero if any criterion fails.
//!
//! All tolerances, trial counts, seeds and runtime budgets are pinned below.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use resistwalk::cli_io::{parse_config, run_command_in, sha256_hex, RunManifest};
use resistwalk::exact_chain::{
    excursion_law_from_resistance, excursion_second_moment_formula, excursion_visit_law, expected_return_time,
    hit_before_return_prob, KilledChain,
};
use resistwalk::experiments::uvd::default_volume_exponent;
use resistwalk::experiments::{
    carpet_rho_estimate, check_uvd, compare_wired, cover_time_scaling, estimate_exponents, modulus_equicontinuity_gasket,
    modulus_tail, tail_curve_thm_a, tail_curve_thm_b, thm_b_bound, TailCurve,
};
use resistwalk::garsia::{fitted_power_profile, gasket_resistance_volume_exponent, GarsiaSetup, LowerLimit, MetricContext};
use resistwalk::graphs::{build_graph, generate, Family, FamilySpec, WeightedGraph};
use resistwalk::resistance::{effective_resistance, resistance_matrix};
use resistwalk::rng::{map_trials, RngStream};
use resistwalk::walk_sim::{check_occupation_identity, cover_time, default_cover_cap, horizon_steps, run_walk, Kernel};
use resistwalk::Result;

use rand::Rng;

const SEED: u64 = 1;

const IDENTITY_TOL: f64 = 1e-10;
const COMMUTE_TOL: f64 = 1e-8;
const PMF_TOL: f64 = 1e-10;
const SECOND_MOMENT_TOL: f64 = 1e-9;
const GARSIA_SLACK: f64 = 1e-9;
const RATIO_TOL: f64 = 1e-9;
const EXPONENT_TOL: f64 = 0.1;
const UVD_LEVEL_FACTOR: f64 = 2.0;

const TAIL_TRIALS: u32 = 2_000;
/// Level-uniformity of tail estimates is compared only where every level's
/// estimate is at least this large (100 exceedances at 2,000 trials).
const RESOLVABLE_PROB: f64 = 0.05;
const TAIL_LEVEL_FACTOR: f64 = 3.0;
/// Largest-over-smallest ratio of the per-level 99th percentiles.
const P99_SPREAD_LIMIT: f64 = 1.5;

const COVER_TRIALS: u32 = 1_000;
const COVER_MEAN_CHANGE: f64 = 0.10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn triangle() -> WeightedGraph {
    build_graph(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
}

fn graph_set() -> Vec<(&'static str, WeightedGraph)> {
    let g = |family, level| generate(FamilySpec::new(family, level)).unwrap();
    vec![
        ("path(10)", g(Family::Path, 10)),
        ("triangle", triangle()),
        ("vicsek(2)", g(Family::Vicsek, 2)),
        ("gasket(3)", g(Family::Gasket, 3)),
        ("carpet(1)", g(Family::Carpet, 1)),
        ("wired_carpet(1)", g(Family::WiredCarpet, 1)),
    ]
}

fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y))).collect()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

// 1
fn key_identity() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for (_, g) in graph_set() {
        let rm = resistance_matrix(&g)?;
        let errs: Vec<f64> = ordered_pairs(g.num_vertices())
            .par_iter()
            .map(|&(x, y)| Ok((hit_before_return_prob(&g, x, y)? - 1.0 / (g.measure(x) * rm.get(x, y))).abs()))
            .collect::<Result<_>>()?;
        pairs += errs.len();
        worst = errs.into_iter().fold(worst, f64::max);
    }
    outcome(worst <= IDENTITY_TOL, format!("{pairs} ordered pairs, max |P - 1/(mu R)| = {worst:.2e}"))
}

// 2
fn moment_identities() -> Result<Outcome> {
    let (mut worst_return, mut worst_commute) = (0.0f64, 0.0f64);
    for (_, g) in graph_set() {
        let n = g.num_vertices();
        let m = g.total_mass();
        let rm = resistance_matrix(&g)?;
        for x in 0..n {
            worst_return = worst_return.max(rel_err(expected_return_time(&g, x)?, m / g.measure(x)));
        }
        // one Green function per target answers every source
        let hit: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|y| {
                let chain = KilledChain::new(&g, y)?;
                (0..n).map(|x| if x == y { Ok(0.0) } else { chain.hitting_time(x) }).collect()
            })
            .collect::<Result<_>>()?;
        for x in 0..n {
            for y in x + 1..n {
                worst_commute = worst_commute.max(rel_err(hit[y][x] + hit[x][y], m * rm.get(x, y)));
            }
        }
    }
    outcome(
        worst_return <= IDENTITY_TOL && worst_commute <= COMMUTE_TOL,
        format!("max rel err: return time {worst_return:.2e}, commute {worst_commute:.2e}"),
    )
}

// 3
fn excursion_law() -> Result<Outcome> {
    let graphs = graph_set();
    let mut rng = RngStream::new(SEED, 3);
    let mut pairs: Vec<(usize, usize, usize)> = (0..50)
        .map(|_| {
            let k = rng.random_range(0..graphs.len());
            let n = graphs[k].1.num_vertices();
            let x = rng.random_range(0..n);
            let y = (x + rng.random_range(1..n)) % n;
            (k, x, y)
        })
        .collect();
    // path end: mu_y = 1 and R = 1, so N is 0 or 1
    pairs.push((0, 1, 0));
    let (mut worst_pmf, mut worst_second) = (0.0f64, 0.0f64);
    let mut degenerate = 0;
    for &(k, x, y) in &pairs {
        let g = &graphs[k].1;
        let r = effective_resistance(g, x, y)?;
        let (mu_x, mu_y) = (g.measure(x), g.measure(y));
        let law = excursion_visit_law(g, x, y, 50)?;
        let (pmf, tail) = excursion_law_from_resistance(mu_x, mu_y, r, 50);
        degenerate += usize::from(law.degenerate);
        for (a, b) in law.law.pmf.iter().zip(&pmf) {
            worst_pmf = worst_pmf.max((a - b).abs());
        }
        worst_pmf = worst_pmf.max((law.law.tail_mass - tail).abs());
        let formula = excursion_second_moment_formula(mu_x, mu_y, r);
        worst_second = worst_second.max(rel_err(law.eta_moments().1, formula));
    }
    let mut bound_violations = 0;
    let mut checked = 0;
    for (_, g) in &graphs {
        let rm = resistance_matrix(g)?;
        for (x, y) in ordered_pairs(g.num_vertices()) {
            let r = rm.get(x, y);
            checked += 1;
            if excursion_second_moment_formula(g.measure(x), g.measure(y), r) > 2.0 * r / g.measure(x) + 1e-12 {
                bound_violations += 1;
            }
        }
    }
    outcome(
        worst_pmf <= PMF_TOL && worst_second <= SECOND_MOMENT_TOL && degenerate >= 1 && bound_violations == 0,
        format!(
            "{} pairs ({degenerate} degenerate): max pmf err {worst_pmf:.2e}, second moment rel err {worst_second:.2e}; \
             bound 2R/mu_x violated on {bound_violations}/{checked} pairs",
            pairs.len()
        ),
    )
}

// 4
fn garsia_lemma() -> Result<Outcome> {
    let g = generate(FamilySpec::new(Family::Gasket, 3))?;
    let n = g.num_vertices();
    let rm = resistance_matrix(&g)?;
    let ctx = MetricContext::from_resistance(&g, &rm, true)?;
    let profile = fitted_power_profile(&ctx, gasket_resistance_volume_exponent(), 1.0)?;
    let setup = GarsiaSetup::new(&ctx, &profile)?;
    let r = rm.diameter();
    let steps = horizon_steps(&g, r, 1.0)?;
    let kernel = Kernel::new(&g);

    // 1,000 random functions of three shapes, then 100 local-time snapshots
    let random = map_trials(SEED, 4, 1_000, |i, rng| -> Vec<f64> {
        match i % 3 {
            0 => (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            1 => {
                let z = rng.random_range(0..n);
                let a = rng.random_range(0.1..2.0);
                (0..n).map(|x| a * rm.rescaled(z, x).sqrt()).collect()
            }
            _ => (0..n).map(|_| if rng.random_bool(0.1) { rng.random_range(0.0..2.0) } else { 0.0 }).collect(),
        }
    });
    let snapshots = map_trials(SEED, 5, 100, |_, rng| -> Result<Vec<f64>> {
        let start = rng.random_range(0..n);
        let t = rng.random_range(1..=steps);
        let mut field = resistwalk::walk_sim::LocalTimeField::new(&g, start, false)?;
        for _ in 0..t {
            field.advance(&kernel, rng);
        }
        Ok(field.local_times().iter().map(|l| l / r).collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let check = |f: &Vec<f64>| -> Result<(usize, usize, f64)> {
        let gamma = setup.gamma(f)?;
        let (mut chain_bad, mut integral_bad, mut tightest) = (0, 0, 0.0f64);
        let integrals = setup.integral_bounds(gamma, LowerLimit::Zero)?;
        for x in 0..n {
            for y in x + 1..n {
                let diff = (f[x] - f[y]).abs();
                let chain = setup.bound(gamma, x, y)?;
                let integral = integrals[x * n + y];
                chain_bad += usize::from(diff > chain + GARSIA_SLACK);
                integral_bad += usize::from(chain > integral + GARSIA_SLACK * integral.max(1.0));
                tightest = tightest.max(diff / chain);
            }
        }
        Ok((chain_bad, integral_bad, tightest))
    };
    let results: Vec<(usize, usize, f64)> =
        random.par_iter().chain(snapshots.par_iter()).map(check).collect::<Result<_>>()?;
    let chain_bad: usize = results.iter().map(|r| r.0).sum();
    let integral_bad: usize = results.iter().map(|r| r.1).sum();
    let tightest = results.iter().map(|r| r.2).fold(0.0, f64::max);
    outcome(
        chain_bad == 0 && integral_bad == 0,
        format!(
            "{} functions x {} pairs: {chain_bad} chaining violations, {integral_bad} integral violations, \
             largest |diff|/bound {tightest:.3}",
            results.len(),
            n * (n - 1) / 2
        ),
    )
}

// 5
fn occupation_identity() -> Result<Outcome> {
    let (mut walks, mut covers, mut bad) = (0, 0, 0);
    for (k, (_, g)) in graph_set().iter().enumerate() {
        let fields = map_trials(SEED, 0x50 + k as u32, 50, |i, rng| run_walk(g, i as usize % g.num_vertices(), 10_000, true, rng));
        for field in fields {
            walks += 1;
            bad += usize::from(check_occupation_identity(&field?).is_err());
        }
        let kernel = Kernel::new(g);
        let cap = default_cover_cap(g, resistance_matrix(g)?.diameter());
        let samples = map_trials(SEED, 0x60 + k as u32, 500, |_, rng| cover_time(&kernel, 0, cap, rng));
        for s in samples {
            let s = s?;
            covers += 1;
            bad += usize::from(s.tau_cov_tilde != s.tau_cov + 1);
        }
    }
    outcome(bad == 0, format!("{walks} trajectories and {covers} cover samples, {bad} mismatches"))
}

// 6
fn uvd() -> Result<Outcome> {
    let path = check_uvd(Family::Path, &[4, 8, 16, 32], 1.0)?;
    let vicsek = check_uvd(Family::Vicsek, &[1, 2, 3], default_volume_exponent(Family::Vicsek))?;
    let gasket = check_uvd(Family::Gasket, &[1, 2, 3, 4], gasket_resistance_volume_exponent())?;
    let gasket_uniform = gasket.c1_spread <= UVD_LEVEL_FACTOR && gasket.c2_spread <= UVD_LEVEL_FACTOR;
    outcome(
        path.pass && path.c1 >= 1.0 && vicsek.pass && gasket.pass && gasket_uniform,
        format!(
            "path c1 = {}, vicsek pass = {}, gasket pass = {} with level spreads c1 {:.3}, c2 {:.3}",
            path.c1, vicsek.pass, gasket.pass, gasket.c1_spread, gasket.c2_spread
        ),
    )
}

// 7
fn exponents() -> Result<Outcome> {
    let e = estimate_exponents(Family::Gasket, &[1, 2, 3, 4])?;
    let alpha = 3f64.ln() / 2f64.ln();
    let gap = (5.0f64 / 3.0).ln() / 2f64.ln();
    let alpha_ok = (e.alpha_hat - alpha).abs() <= EXPONENT_TOL;
    let gap_ok = (e.beta_hat - e.alpha_hat - gap).abs() <= EXPONENT_TOL;
    let corners: Vec<f64> = (0..=4)
        .map(|level| {
            let g = generate(FamilySpec::new(Family::Gasket, level))?;
            effective_resistance(&g, g.meta().corners[0], g.meta().corners[1])
        })
        .collect::<Result<_>>()?;
    let worst_ratio = corners.windows(2).map(|w| (w[1] / w[0] - 5.0 / 3.0).abs()).fold(0.0, f64::max);
    outcome(
        alpha_ok && gap_ok && worst_ratio <= RATIO_TOL,
        format!(
            "alpha {:.4} (target {alpha:.4}), beta - alpha {:.4} (target {gap:.4}), corner ratio err {worst_ratio:.1e}",
            e.alpha_hat,
            e.beta_hat - e.alpha_hat
        ),
    )
}

// 8
fn thm_b_bound_holds() -> Result<Outcome> {
    let grid = [2.0, 3.0, 4.0];
    let (mut cells, mut bad, mut unsaturated, mut closest) = (0, 0, 0, 0.0f64);
    for l in [1.0, 2.0] {
        for c in tail_curve_thm_b(Family::Gasket, &[1, 2, 3], l, &grid, TAIL_TRIALS, SEED)? {
            unsaturated += c.unsaturated;
            for k in 0..grid.len() {
                let lower = c.prob_est[k] - c.ci_halfwidth[k];
                let bound = thm_b_bound(grid[k], l);
                cells += 1;
                bad += usize::from(lower > bound);
                closest = closest.max(lower / bound);
            }
        }
    }
    outcome(
        bad == 0,
        format!("{cells} cells, {bad} above the bound, largest (est - ci)/bound {closest:.3}, {unsaturated} unsaturated runs"),
    )
}

fn slopes(curves: &[TailCurve]) -> Vec<f64> {
    curves.iter().map(|c| c.log_fit.map_or(f64::NAN, |f| f.slope)).collect()
}

/// Largest ratio between levels over grid points where every level is at
/// least [`RESOLVABLE_PROB`].
fn level_factor(curves: &[TailCurve]) -> (f64, usize) {
    let grid = &curves[0].lambda_grid;
    let mut worst = 1.0f64;
    let mut points = 0;
    for k in 0..grid.len() {
        let vals: Vec<f64> = curves.iter().map(|c| c.prob_est[k]).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if lo < RESOLVABLE_PROB {
            continue;
        }
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        worst = worst.max(hi / lo);
        points += 1;
    }
    (worst, points)
}

// 9
fn equicontinuity() -> Result<Outcome> {
    let grid: Vec<f64> = (0..=12).map(|k| 0.5 * f64::from(k)).collect();
    let thm_a = tail_curve_thm_a(Family::Gasket, &[1, 2, 3], 1.0, &grid, TAIL_TRIALS, SEED)?;
    let modulus = modulus_tail(Family::Gasket, &[1, 2, 3], 1.0, &grid, TAIL_TRIALS, SEED)?;
    let gasket = modulus_equicontinuity_gasket(&[1, 2, 3, 4], 1.0, &grid, TAIL_TRIALS, SEED)?;
    let (sa, sm) = (slopes(&thm_a), slopes(&modulus));
    let slopes_ok = sa.iter().chain(&sm).all(|s| *s < 0.0);
    let (factor, points) = level_factor(&thm_a);
    let p99: Vec<f64> = gasket.iter().map(|c| c.quantiles.expect("inside-max kind").p99).collect();
    let spread = p99.iter().cloned().fold(0.0, f64::max) / p99.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        slopes_ok && points > 0 && factor <= TAIL_LEVEL_FACTOR && spread < P99_SPREAD_LIMIT,
        format!(
            "log-tail slopes thm-a {sa:.3?}, modulus {sm:.3?}; level factor {factor:.2} over {points} grid points; \
             gasket p99 {p99:.3?}, max/min {spread:.3} (limit {P99_SPREAD_LIMIT})"
        ),
    )
}

// 10
fn cover_time_scaling_check() -> Result<Outcome> {
    let report = cover_time_scaling(&[1, 2, 3, 4], COVER_TRIALS, SEED)?;
    let cover = &report.functionals[0];
    let means: Vec<f64> = cover.per_level.iter().map(|l| l.mean).collect();
    let change = (means[3] - means[2]).abs() / means[2];
    outcome(
        change < COVER_MEAN_CHANGE && cover.ks_decreasing,
        format!(
            "means {means:.3?}, level 3 -> 4 change {:.1}%; successive KS {:.3?} (decreasing: {})",
            100.0 * change,
            cover.ks,
            cover.ks_decreasing
        ),
    )
}

// 11
fn carpet() -> Result<Outcome> {
    let report = carpet_rho_estimate(&[0, 1, 2])?;
    let wiring = compare_wired(1)?;
    outcome(
        report.rho_hat > 1.0 && wiring.holds,
        format!(
            "rho_hat {:.4} from ratios {:.4?}; wired - unwired at most {:.2e} over {} pairs",
            report.rho_hat, report.ratios, wiring.max_excess, wiring.pairs
        ),
    )
}

// 12
fn reproducibility() -> Result<Outcome> {
    let tmp = std::env::temp_dir().join(format!("resistwalk-acceptance-{}", std::process::id()));
    let configs = [
        "command = \"exp\"\nseed = 5\n[experiment]\nkind = \"thm-a\"\nlevels = [1, 2]\nn_trials = 300\n",
        "command = \"exp\"\nseed = 5\n[experiment]\nkind = \"gasket-modulus\"\nlevels = [1, 2, 3]\nn_trials = 300\n",
        "command = \"exp\"\nseed = 5\n[experiment]\nkind = \"cover-time-scaling\"\nlevels = [1, 2]\nn_trials = 200\n",
        "command = \"walk\"\nseed = 5\n[graph]\nfamily = \"gasket\"\nlevel = 3\n[walk]\nsteps = 20000\ncover = true\nretain = true\n",
    ];
    let mut runs = 0;
    let mut mismatched = Vec::new();
    for (k, text) in configs.iter().enumerate() {
        let mut reference: Option<(RunManifest, std::path::PathBuf)> = None;
        for (j, workers) in [None, Some(1), Some(4), Some(1)].into_iter().enumerate() {
            let mut config = parse_config(&format!("schema_version = 1\n{text}"))?;
            config.workers = workers;
            let dir = tmp.join(format!("{k}-{j}"));
            let m = run_command_in(&config, &dir)?;
            runs += 1;
            let files_ok = m
                .outputs
                .iter()
                .all(|(name, sum)| std::fs::read(dir.join(name)).is_ok_and(|b| &sha256_hex(&b) == sum));
            match &reference {
                None => reference = Some((m, dir)),
                Some((first, first_dir)) => {
                    let same_bytes = m.outputs.keys().all(|name| files_equal(&first_dir.join(name), &dir.join(name)));
                    if !(files_ok && first.same_run(&m) && same_bytes) {
                        mismatched.push(format!("config {k} run {j}"));
                    }
                }
            }
        }
    }
    std::fs::remove_dir_all(&tmp).ok();
    outcome(
        mismatched.is_empty(),
        format!("{runs} runs over {} configs at 1 to 4 workers, mismatches: {mismatched:?}", configs.len()),
    )
}

fn files_equal(a: &Path, b: &Path) -> bool {
    matches!((std::fs::read(a), std::fs::read(b)), (Ok(x), Ok(y)) if x == y)
}

type Criterion = (u32, &'static str, Duration, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "key identity", Duration::from_secs(60), key_identity),
        (2, "moment identities", Duration::from_secs(60), moment_identities),
        (3, "excursion law and second moment", Duration::from_secs(60), excursion_law),
        (4, "discrete chaining lemma", Duration::from_secs(300), garsia_lemma),
        (5, "occupation identity and cover offset", Duration::from_secs(60), occupation_identity),
        (6, "uniform volume doubling", Duration::from_secs(60), uvd),
        (7, "growth exponents", Duration::from_secs(60), exponents),
        (8, "truncated tail bound", Duration::from_secs(1200), thm_b_bound_holds),
        (9, "equicontinuity proxies", Duration::from_secs(1800), equicontinuity),
        (10, "cover-time scaling", Duration::from_secs(1200), cover_time_scaling_check),
        (11, "carpet resistance and wiring", Duration::from_secs(60), carpet),
        (12, "reproducibility", Duration::from_secs(600), reproducibility),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(Ok(o)) => (o.pass && elapsed <= budget, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        let over = if elapsed > budget { format!(", over the {}s budget", budget.as_secs()) } else { String::new() };
        println!(
            "criterion {id:>2} {} {name} ({:.1}s{over}): {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
    } else {
        println!("acceptance: {} of 12 criteria fail: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
