//! Discrete-time simple random walk with local times.
//!
//! `L_t(x)` counts the visits to `x` at times `0, ..., t-1`, divided by
//! `mu_x`. A [`LocalTimeField`] stores the integer counts and converts on
//! demand, so the occupation identity `sum_x L_t(x) mu_x = t` holds exactly.
//!
//! The pairwise statistics track a running maximum over every time step.
//! Only one local time changes per step, so only the pairs through that
//! vertex are rescored, which keeps the cost at `O(|V|)` per step.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::WeightedGraph;
use crate::resistance::{ResistanceMatrix, ALL_PAIRS_BUDGET};
use crate::rng::RngStream;

/// Cover-time cap is this multiple of `m r (1 + ln |V|)` unless overridden.
pub const DEFAULT_COVER_CAP_FACTOR: f64 = 1e3;
/// Steps between full recomputations in validation mode.
pub const VALIDATION_INTERVAL: u64 = 1_000;
/// Largest number of steps any single statistic run may take.
pub const MAX_STEPS: u64 = 4_000_000_000;

/// Neighbour sampling tables for the walk.
#[derive(Clone, Debug)]
pub struct Kernel {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    cumulative: Vec<f64>,
    uniform: Vec<bool>,
}

impl Kernel {
    pub fn new(g: &WeightedGraph) -> Self {
        let n = g.num_vertices();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut cumulative = Vec::new();
        let mut uniform = Vec::with_capacity(n);
        offsets.push(0);
        for x in 0..n {
            let nbrs = g.neighbors(x);
            let mut acc = 0.0;
            for &(y, w) in nbrs {
                acc += w;
                targets.push(y);
                cumulative.push(acc);
            }
            uniform.push(nbrs.iter().all(|&(_, w)| w == nbrs[0].1));
            offsets.push(targets.len());
        }
        Kernel {
            offsets,
            targets,
            cumulative,
            uniform,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.uniform.len()
    }

    /// Samples `X_{t+1}` given `X_t = x`.
    pub fn step<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let (a, b) = (self.offsets[x], self.offsets[x + 1]);
        if self.uniform[x] {
            return self.targets[a + rng.random_range(0..b - a)];
        }
        let cum = &self.cumulative[a..b];
        let u = rng.random::<f64>() * cum[cum.len() - 1];
        let i = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        self.targets[a + i]
    }
}

/// Visit counts of one walk up to its current time.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTimeField {
    counts: Vec<u64>,
    mu: Vec<f64>,
    t: u64,
    current: usize,
    trajectory: Option<Vec<usize>>,
    seen: Vec<bool>,
    uncovered: usize,
}

impl LocalTimeField {
    pub fn new(g: &WeightedGraph, start: usize, retain: bool) -> Result<Self> {
        g.check_vertex(start)?;
        let n = g.num_vertices();
        let mut seen = vec![false; n];
        seen[start] = true;
        Ok(LocalTimeField {
            counts: vec![0; n],
            mu: g.measures().to_vec(),
            t: 0,
            current: start,
            trajectory: retain.then(|| vec![start]),
            seen,
            uncovered: n - 1,
        })
    }

    /// Takes one step; returns the vertex whose count was incremented.
    pub fn advance<R: Rng + ?Sized>(&mut self, kernel: &Kernel, rng: &mut R) -> usize {
        let x = self.current;
        self.counts[x] += 1;
        self.t += 1;
        let y = kernel.step(x, rng);
        self.current = y;
        if !self.seen[y] {
            self.seen[y] = true;
            self.uncovered -= 1;
        }
        if let Some(traj) = &mut self.trajectory {
            traj.push(y);
        }
        x
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// `X_t`, not yet counted in the local times.
    pub fn current(&self) -> usize {
        self.current
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, x: usize) -> u64 {
        self.counts[x]
    }

    pub fn local_time(&self, x: usize) -> f64 {
        self.counts[x] as f64 / self.mu[x]
    }

    pub fn local_times(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|x| self.local_time(x)).collect()
    }

    /// `X_0, ..., X_t` when retained.
    pub fn trajectory(&self) -> Option<&[usize]> {
        self.trajectory.as_deref()
    }

    /// Vertices not in `{X_0, ..., X_t}`.
    pub fn uncovered(&self) -> usize {
        self.uncovered
    }
}

/// Runs `steps` steps from `start`.
pub fn run_walk(
    g: &WeightedGraph,
    start: usize,
    steps: u64,
    retain: bool,
    rng: &mut RngStream,
) -> Result<LocalTimeField> {
    let kernel = Kernel::new(g);
    let mut field = LocalTimeField::new(g, start, retain)?;
    for _ in 0..steps {
        field.advance(&kernel, rng);
    }
    Ok(field)
}

/// Both sides of `sum_x f(x) L_t(x) mu_x = sum_{j<t} f(X_j)`: the first from
/// the field, the second by walking the trajectory.
pub fn occupation_integral(field: &LocalTimeField, f: &[f64]) -> Result<(f64, f64)> {
    let traj = field.trajectory().ok_or(Error::TrajectoryNotRetained)?;
    if f.len() != field.counts.len() {
        return Err(Error::MissingValue {
            expected: field.counts.len(),
            got: f.len(),
        });
    }
    let lhs = (0..f.len())
        .map(|x| f[x] * field.local_time(x) * field.mu[x])
        .sum();
    let rhs = traj[..field.t as usize].iter().map(|&x| f[x]).sum();
    Ok((lhs, rhs))
}

/// Integer form of the occupation identity: the stored counts equal a fresh
/// tally of the trajectory.
pub fn check_occupation_identity(field: &LocalTimeField) -> Result<()> {
    let traj = field.trajectory().ok_or(Error::TrajectoryNotRetained)?;
    let mut tally = vec![0u64; field.counts.len()];
    for &x in &traj[..field.t as usize] {
        tally[x] += 1;
    }
    if tally != field.counts || tally.iter().sum::<u64>() != field.t {
        return Err(Error::InvariantViolation(format!(
            "occupation counts disagree with trajectory at t = {}",
            field.t
        )));
    }
    Ok(())
}

/// `tau_x(i)`: the first visit to `x` for `i = 0`, then the time of the
/// `i`-th subsequent visit.
pub fn inverse_local_time(traj: &[usize], x: usize, i: usize) -> Result<u64> {
    traj.iter()
        .enumerate()
        .filter(|&(_, &v)| v == x)
        .nth(i)
        .map(|(t, _)| t as u64)
        .ok_or(Error::NotReached { vertex: x, needed: i })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverTimeSample {
    /// First `t` with every vertex in `{X_0, ..., X_t}`.
    pub tau_cov: u64,
    /// First `t` with every local time `L_t(x)` positive.
    pub tau_cov_tilde: u64,
    pub seed: u64,
    pub stream: u64,
    pub start: usize,
}

/// `10^3 m r (1 + ln |V|)`, rounded up.
pub fn default_cover_cap(g: &WeightedGraph, r_diam: f64) -> u64 {
    let n = g.num_vertices() as f64;
    (DEFAULT_COVER_CAP_FACTOR * g.total_mass() * r_diam * (1.0 + n.ln())).ceil() as u64
}

/// Samples the cover time. `tau_cov` and `tau_cov_tilde` are tracked
/// separately, the first from arrivals and the second from the counts.
pub fn cover_time(
    kernel: &Kernel,
    start: usize,
    cap: u64,
    rng: &mut RngStream,
) -> Result<CoverTimeSample> {
    let n = kernel.num_vertices();
    if start >= n {
        return Err(Error::UnknownVertex(start));
    }
    if cap == 0 {
        return Err(Error::Range("cover-time cap must be at least 1".into()));
    }
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut unseen = n - 1;
    let mut counted = vec![false; n];
    let mut positive = 0;
    let mut tau_cov = None;
    let mut current = start;
    let mut t = 0u64;
    loop {
        if !counted[current] {
            counted[current] = true;
            positive += 1;
        }
        t += 1;
        if positive == n {
            break;
        }
        current = kernel.step(current, rng);
        if !seen[current] {
            seen[current] = true;
            unseen -= 1;
            if unseen == 0 {
                tau_cov = Some(t);
            }
        }
        if tau_cov.is_none() && t >= cap {
            return Err(Error::CapExceeded { cap });
        }
    }
    Ok(CoverTimeSample {
        tau_cov: tau_cov.expect("all vertices counted implies all seen"),
        tau_cov_tilde: t,
        seed: rng.seed(),
        stream: rng.stream(),
        start,
    })
}

/// How a visit count becomes the value compared across pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    /// `scale * L_t(x)`.
    Linear { scale: f64 },
    /// `cap ∧ (scale * L_t(x))`.
    Truncated { scale: f64, cap: f64 },
}

impl Transform {
    fn raw(&self, count: u64, mu: f64) -> f64 {
        let scale = match *self {
            Transform::Linear { scale } | Transform::Truncated { scale, .. } => scale,
        };
        scale * count as f64 / mu
    }

    pub fn apply(&self, count: u64, mu: f64) -> f64 {
        let v = self.raw(count, mu);
        match *self {
            Transform::Linear { .. } => v,
            Transform::Truncated { cap, .. } => v.min(cap),
        }
    }

    fn saturates(&self, count: u64, mu: f64) -> bool {
        match *self {
            Transform::Linear { .. } => false,
            Transform::Truncated { cap, .. } => self.raw(count, mu) >= cap,
        }
    }
}

/// Reciprocal pair gauges `1 / g(x, y)` for `x != y`, zero on the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGauge {
    n: usize,
    inv: Vec<f64>,
}

impl PairGauge {
    /// `gauge(x, y)` must be positive and finite for every `x != y`.
    pub fn from_fn(n: usize, gauge: impl Fn(usize, usize) -> f64) -> Result<Self> {
        if n > ALL_PAIRS_BUDGET {
            return Err(Error::BudgetExceeded {
                what: "pair gauge",
                size: n,
                budget: ALL_PAIRS_BUDGET,
            });
        }
        let mut inv = vec![0.0; n * n];
        for x in 0..n {
            for y in x + 1..n {
                let v = gauge(x, y);
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidProfile(format!(
                        "gauge at ({x}, {y}) is {v}"
                    )));
                }
                inv[x * n + y] = 1.0 / v;
                inv[y * n + x] = 1.0 / v;
            }
        }
        Ok(PairGauge { n, inv })
    }

    /// `sqrt(R~(x, y))`.
    pub fn sqrt_resistance(rm: &ResistanceMatrix) -> Result<Self> {
        Self::from_fn(rm.num_vertices(), |x, y| rm.rescaled(x, y).sqrt())
    }

    /// `sqrt(R~ (1 + ln R~^{-1}))`.
    pub fn resistance_modulus(rm: &ResistanceMatrix) -> Result<Self> {
        Self::from_fn(rm.num_vertices(), |x, y| {
            let r = rm.rescaled(x, y);
            (r * (1.0 + (1.0 / r).ln())).sqrt()
        })
    }

    /// `|x - y|^gamma (1 + ln |x - y|^{-1})^{1/2}` in the plane, with
    /// `gamma = ln(5/3) / (2 ln 2)`.
    pub fn gasket_euclidean(g: &WeightedGraph) -> Result<Self> {
        let coords: Vec<_> = g
            .coords()
            .iter()
            .enumerate()
            .map(|(x, c)| c.ok_or_else(|| Error::InvalidProfile(format!("vertex {x} has no coordinates"))))
            .collect::<Result<_>>()?;
        let gamma = (5.0f64 / 3.0).ln() / (2.0 * 2f64.ln());
        Self::from_fn(g.num_vertices(), |x, y| {
            let d = crate::graphs::euclid(coords[x], coords[y]);
            d.powf(gamma) * (1.0 + (1.0 / d).ln()).sqrt()
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn inverse(&self, x: usize, y: usize) -> f64 {
        self.inv[x * self.n + y]
    }
}

/// Running maximum of `|h(x) - h(y)| / g(x, y)` as `h` changes one vertex at
/// a time, optionally per pair.
#[derive(Clone, Debug)]
pub struct PairTracker<'a> {
    gauge: &'a PairGauge,
    values: Vec<f64>,
    running: f64,
    per_pair: Option<Vec<f64>>,
}

impl<'a> PairTracker<'a> {
    pub fn new(gauge: &'a PairGauge, per_pair: bool) -> Self {
        let n = gauge.n;
        PairTracker {
            gauge,
            values: vec![0.0; n],
            running: 0.0,
            per_pair: per_pair.then(|| vec![0.0; n * n]),
        }
    }

    pub fn set(&mut self, x: usize, value: f64) {
        self.values[x] = value;
        let n = self.gauge.n;
        let row = &self.gauge.inv[x * n..(x + 1) * n];
        match &mut self.per_pair {
            None => {
                let best = row
                    .iter()
                    .zip(&self.values)
                    .map(|(inv, v)| (value - v).abs() * inv)
                    .fold(0.0, f64::max);
                self.running = self.running.max(best);
            }
            Some(pairs) => {
                for y in 0..n {
                    let s = (value - self.values[y]).abs() * row[y];
                    let k = x.min(y) * n + x.max(y);
                    if s > pairs[k] {
                        pairs[k] = s;
                    }
                    if s > self.running {
                        self.running = s;
                    }
                }
            }
        }
    }

    pub fn running_max(&self) -> f64 {
        self.running
    }

    /// Pairwise maximum at the current values, over all pairs.
    pub fn current_max(&self) -> f64 {
        current_pair_max(self.gauge, &self.values)
    }

    /// Per-pair running maxima at `[x * n + y]` for `x < y`.
    pub fn per_pair(&self) -> Option<&[f64]> {
        self.per_pair.as_deref()
    }

    fn into_per_pair(self) -> Option<Vec<f64>> {
        self.per_pair
    }
}

fn current_pair_max(gauge: &PairGauge, values: &[f64]) -> f64 {
    let n = gauge.n;
    let mut best = 0.0f64;
    for x in 0..n {
        for y in x + 1..n {
            best = best.max((values[x] - values[y]).abs() * gauge.inverse(x, y));
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairRunConfig {
    pub transform: Transform,
    pub max_steps: u64,
    /// Stop once every truncated value has reached its cap.
    pub stop_when_saturated: bool,
    pub per_pair: bool,
    /// Recompute the running maximum from scratch every step and compare
    /// every [`VALIDATION_INTERVAL`] steps.
    pub validate: bool,
}

#[derive(Clone, Debug)]
pub struct PairRunOutcome {
    pub max: f64,
    pub per_pair: Option<Vec<f64>>,
    pub steps: u64,
    pub saturated: bool,
    pub field: LocalTimeField,
}

/// Runs one walk and returns the running maximum of the pair statistic over
/// every time up to the step budget.
pub fn run_pair_statistic(
    g: &WeightedGraph,
    kernel: &Kernel,
    gauge: &PairGauge,
    start: usize,
    cfg: &PairRunConfig,
    rng: &mut RngStream,
) -> Result<PairRunOutcome> {
    if gauge.n != g.num_vertices() {
        return Err(Error::MissingValue {
            expected: g.num_vertices(),
            got: gauge.n,
        });
    }
    if cfg.max_steps > MAX_STEPS {
        return Err(Error::BudgetExceeded {
            what: "walk steps",
            size: cfg.max_steps.min(usize::MAX as u64) as usize,
            budget: MAX_STEPS as usize,
        });
    }
    let n = g.num_vertices();
    let mut field = LocalTimeField::new(g, start, false)?;
    let mut tracker = PairTracker::new(gauge, cfg.per_pair);
    let mut saturated = vec![false; n];
    let mut n_saturated = 0;
    let mut brute = 0.0f64;
    while field.t() < cfg.max_steps {
        let x = field.advance(kernel, rng);
        let (c, mu) = (field.count(x), g.measure(x));
        tracker.set(x, cfg.transform.apply(c, mu));
        if !saturated[x] && cfg.transform.saturates(c, mu) {
            saturated[x] = true;
            n_saturated += 1;
        }
        if cfg.validate {
            brute = brute.max(tracker.current_max());
            if field.t() % VALIDATION_INTERVAL == 0 && brute != tracker.running_max() {
                return Err(Error::InvariantViolation(format!(
                    "incremental maximum {} differs from recomputation {} at t = {}",
                    tracker.running_max(),
                    brute,
                    field.t()
                )));
            }
        }
        if cfg.stop_when_saturated && n_saturated == n {
            break;
        }
    }
    Ok(PairRunOutcome {
        max: tracker.running_max(),
        steps: field.t(),
        saturated: n_saturated == n,
        per_pair: tracker.into_per_pair(),
        field,
    })
}

/// Replays a trajectory and evaluates the pair statistic from scratch at
/// every time `0..=steps`. Quadratic per step; used as a reference.
pub fn pair_statistic_of_trajectory(
    g: &WeightedGraph,
    gauge: &PairGauge,
    transform: Transform,
    traj: &[usize],
    steps: usize,
) -> f64 {
    let n = g.num_vertices();
    let mut counts = vec![0u64; n];
    let mut best = 0.0f64;
    for &x in &traj[..steps] {
        counts[x] += 1;
        let values: Vec<f64> = (0..n)
            .map(|y| transform.apply(counts[y], g.measure(y)))
            .collect();
        best = best.max(current_pair_max(gauge, &values));
    }
    best
}

/// `floor(T m(G) r(G))`.
pub fn horizon_steps(g: &WeightedGraph, r_diam: f64, t_horizon: f64) -> Result<u64> {
    if !(t_horizon > 0.0) {
        return Err(Error::Range(format!("time horizon must be positive, got {t_horizon}")));
    }
    let steps = (t_horizon * g.total_mass() * r_diam).floor();
    if steps > MAX_STEPS as f64 {
        return Err(Error::BudgetExceeded {
            what: "walk steps",
            size: usize::MAX,
            budget: MAX_STEPS as usize,
        });
    }
    Ok(steps as u64)
}

/// Running maximum over `x != y` and `t <= T m r` of
/// `r^{-1} |L_t(x) - L_t(y)| / sqrt(R~ (1 + ln R~^{-1}))` along one walk.
pub fn modulus_statistic(
    g: &WeightedGraph,
    rm: &ResistanceMatrix,
    start: usize,
    t_horizon: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    let gauge = PairGauge::resistance_modulus(rm)?;
    let r = rm.diameter();
    let cfg = PairRunConfig {
        transform: Transform::Linear { scale: 1.0 / r },
        max_steps: horizon_steps(g, r, t_horizon)?,
        stop_when_saturated: false,
        per_pair: false,
        validate: false,
    };
    Ok(run_pair_statistic(g, &Kernel::new(g), &gauge, start, &cfg, rng)?.max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncatedStatistic {
    pub value: f64,
    /// Every vertex reached the cap, so later times cannot raise the value.
    pub saturated: bool,
    pub steps: u64,
}

/// Running maximum over `x != y` of
/// `|L ∧ (L_t(x)/r) - L ∧ (L_t(y)/r)| / sqrt(R~)`, stopping early once all
/// vertices saturate. When `saturated` is set the value is the maximum over
/// all `t >= 0`.
pub fn truncated_modulus_statistic(
    g: &WeightedGraph,
    rm: &ResistanceMatrix,
    start: usize,
    l_trunc: f64,
    steps: u64,
    rng: &mut RngStream,
) -> Result<TruncatedStatistic> {
    if !(l_trunc >= 1.0) {
        return Err(Error::Range(format!("truncation level must be at least 1, got {l_trunc}")));
    }
    let gauge = PairGauge::sqrt_resistance(rm)?;
    let cfg = PairRunConfig {
        transform: Transform::Truncated {
            scale: 1.0 / rm.diameter(),
            cap: l_trunc,
        },
        max_steps: steps,
        stop_when_saturated: true,
        per_pair: false,
        validate: false,
    };
    let out = run_pair_statistic(g, &Kernel::new(g), &gauge, start, &cfg, rng)?;
    Ok(TruncatedStatistic {
        value: out.max,
        saturated: out.saturated,
        steps: out.steps,
    })
}
