//! Simulated frequencies against the exact chain, within 4 standard errors
//! at 10^5 trials. Every trial runs on its own seeded stream, so each check
//! is deterministic.

use resistwalk::exact_chain::{
    excursion_visit_law, expected_cover_time, expected_hitting_time, expected_return_time, hit_before_return_prob,
    return_time_laplace, return_time_tail, transition_matrix,
};
use resistwalk::graphs::{build_graph, generate, Family, FamilySpec, WeightedGraph};
use resistwalk::rng::{map_trials, RngStream};
use resistwalk::walk_sim::{cover_time, inverse_local_time, run_walk, Kernel};

const TRIALS: u32 = 100_000;
const SIGMAS: f64 = 4.0;

fn triangle() -> WeightedGraph {
    build_graph(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
}

/// A small graph with unequal conductances and a pendant vertex.
fn kite() -> WeightedGraph {
    build_graph(&[(0, 1, 2.0), (1, 2, 0.5), (0, 2, 1.0), (2, 3, 3.0), (3, 4, 1.0), (1, 3, 1.5)]).unwrap()
}

fn assert_frequency(label: &str, hits: usize, n: u32, p: f64) {
    let est = hits as f64 / f64::from(n);
    let se = (p * (1.0 - p) / f64::from(n)).sqrt();
    assert!(
        (est - p).abs() <= SIGMAS * se.max(1e-12),
        "{label}: frequency {est:.5} vs exact {p:.5} (se {se:.2e})"
    );
}

fn assert_mean(label: &str, sample: &[f64], exact: f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!(
        (mean - exact).abs() <= SIGMAS * se,
        "{label}: mean {mean:.5} vs exact {exact:.5} (se {se:.2e})"
    );
}

/// One excursion from `x`: `(tau_x^+, visits to y before returning)`.
fn excursion(kernel: &Kernel, x: usize, y: usize, rng: &mut RngStream) -> (u64, u64) {
    let mut z = kernel.step(x, rng);
    let (mut t, mut visits) = (1, 0);
    while z != x {
        if z == y {
            visits += 1;
        }
        z = kernel.step(z, rng);
        t += 1;
    }
    (t, visits)
}

fn hitting_time(kernel: &Kernel, x: usize, y: usize, rng: &mut RngStream) -> u64 {
    let (mut z, mut t) = (x, 0);
    while z != y {
        z = kernel.step(z, rng);
        t += 1;
    }
    t
}

#[test]
fn one_step_frequencies() {
    let g = kite();
    let kernel = Kernel::new(&g);
    let p = transition_matrix(&g);
    for x in 0..g.num_vertices() {
        let next = map_trials(11, x as u32, TRIALS, |_, rng| kernel.step(x, rng));
        for y in 0..g.num_vertices() {
            let hits = next.iter().filter(|&&z| z == y).count();
            assert_frequency(&format!("P({x}, {y})"), hits, TRIALS, p.get(x, y));
        }
    }
}

#[test]
fn escape_before_return() {
    for (name, g, pairs) in [
        ("triangle", triangle(), vec![(0, 1)]),
        ("kite", kite(), vec![(0, 4), (4, 0), (2, 1)]),
        ("gasket-1", generate(FamilySpec::new(Family::Gasket, 1)).unwrap(), vec![(0, 1), (0, 3)]),
    ] {
        let kernel = Kernel::new(&g);
        for (k, &(x, y)) in pairs.iter().enumerate() {
            let runs = map_trials(12, k as u32, TRIALS, |_, rng| excursion(&kernel, x, y, rng).1 > 0);
            let hits = runs.iter().filter(|&&h| h).count();
            let exact = hit_before_return_prob(&g, x, y).unwrap();
            assert_frequency(&format!("{name} ({x}, {y})"), hits, TRIALS, exact);
        }
    }
}

#[test]
fn triangle_escape_is_three_quarters() {
    assert!((hit_before_return_prob(&triangle(), 0, 1).unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn return_and_hitting_times() {
    for (name, g, x, y) in [
        ("kite", kite(), 4, 0),
        ("gasket-1", generate(FamilySpec::new(Family::Gasket, 1)).unwrap(), 0, 2),
    ] {
        let kernel = Kernel::new(&g);
        let ret: Vec<f64> = map_trials(13, 0, TRIALS, |_, rng| excursion(&kernel, x, y, rng).0 as f64);
        assert_mean(&format!("{name} E tau_{x}^+"), &ret, expected_return_time(&g, x).unwrap());
        assert!((expected_return_time(&g, x).unwrap() - g.total_mass() / g.measure(x)).abs() < 1e-10);
        let hit: Vec<f64> = map_trials(13, 1, TRIALS, |_, rng| hitting_time(&kernel, x, y, rng) as f64);
        assert_mean(&format!("{name} E_{x} tau_{y}"), &hit, expected_hitting_time(&g, x, y).unwrap());
    }
}

#[test]
fn excursion_visit_counts() {
    for (name, g, x, y) in [("triangle", triangle(), 0, 1), ("kite", kite(), 1, 4), ("kite", kite(), 4, 1)] {
        let kernel = Kernel::new(&g);
        let law = excursion_visit_law(&g, x, y, 60).unwrap();
        let counts = map_trials(14, 0, TRIALS, |_, rng| excursion(&kernel, x, y, rng).1 as usize);
        for k in 0..4 {
            let hits = counts.iter().filter(|&&c| c == k).count();
            assert_frequency(&format!("{name} P(N = {k})"), hits, TRIALS, law.law.pmf[k]);
        }
        let eta: Vec<f64> = counts.iter().map(|&c| c as f64 / g.measure(y)).collect();
        assert_mean(&format!("{name} E eta"), &eta, 1.0 / g.measure(x));
    }
}

#[test]
fn triangle_excursion_closed_form() {
    let law = excursion_visit_law(&triangle(), 0, 1, 10).unwrap();
    assert!((law.law.pmf[0] - 0.25).abs() < 1e-12);
    for k in 1..=10 {
        let exact = 9.0 / 16.0 * 0.25f64.powi(k as i32 - 1);
        assert!((law.law.pmf[k] - exact).abs() < 1e-12);
    }
    assert!((law.eta_moments().0 - 0.5).abs() < 1e-12);
}

#[test]
fn return_time_tail_and_laplace() {
    let g = triangle();
    let kernel = Kernel::new(&g);
    let times = map_trials(15, 0, TRIALS, |_, rng| excursion(&kernel, 0, 1, rng).0);
    let law = return_time_tail(&g, 0, 200).unwrap();
    assert!((law.survival(3) - 0.5).abs() < 1e-12);
    for k in 2..6 {
        let hits = times.iter().filter(|&&t| t >= k as u64).count();
        assert_frequency(&format!("P(tau^+ >= {k})"), hits, TRIALS, law.survival(k));
    }
    // E exp(-theta tau) is bounded by 1, so 3 standard errors is a tighter check
    let theta = 2f64.ln();
    let sample: Vec<f64> = times.iter().map(|&t| (-theta * t as f64).exp()).collect();
    let exact = return_time_laplace(&g, 0, theta).unwrap();
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let se = (sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact}");
}

#[test]
fn cover_time_expectation() {
    for (name, g) in [
        ("triangle", triangle()),
        ("kite", kite()),
        ("gasket-1", generate(FamilySpec::new(Family::Gasket, 1)).unwrap()),
    ] {
        let kernel = Kernel::new(&g);
        let samples = map_trials(16, 0, TRIALS, |_, rng| cover_time(&kernel, 0, 1_000_000, rng).unwrap());
        assert!(samples.iter().all(|s| s.tau_cov_tilde == s.tau_cov + 1));
        let tau: Vec<f64> = samples.iter().map(|s| s.tau_cov as f64).collect();
        assert_mean(&format!("{name} E tau_cov"), &tau, expected_cover_time(&g, 0).unwrap());
    }
}

#[test]
fn local_time_at_inverse_local_time() {
    let g = generate(FamilySpec::new(Family::Gasket, 2)).unwrap();
    for trial in 0..50 {
        let field = run_walk(&g, 0, 5_000, true, &mut RngStream::new(17, trial)).unwrap();
        let traj = field.trajectory().unwrap();
        for x in [0, 3, 7] {
            for i in 0..5 {
                let Ok(t) = inverse_local_time(traj, x, i) else { break };
                let visits_before = traj[..t as usize].iter().filter(|&&z| z == x).count();
                let first = traj.iter().position(|&z| z == x).unwrap();
                // L_t counts times 0..t-1; the first visit itself is not yet counted at tau_x(0)
                assert_eq!(visits_before, i, "x = {x}, i = {i}, first visit at {first}");
                assert_eq!(visits_before as f64 / g.measure(x), i as f64 / g.measure(x));
            }
        }
    }
}
