//! Exact quantities of the simple random walk viewed as a finite Markov chain.
//!
//! Everything here is computed from the transition matrix alone, by
//! first-step analysis on absorbed chains or by iterating the taboo
//! (sub-stochastic) matrix. Nothing in this module touches the resistance
//! solver, so the electrical identities can be checked against it.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::WeightedGraph;

/// Remaining probability mass below which tail iterations stop.
pub const TAIL_EPSILON: f64 = 1e-14;
/// Hard cap on time horizons for tail iterations.
pub const MAX_HORIZON: usize = 1_000_000;
/// `|mu_y R - 1|` below this routes the excursion law to its two-point form.
pub const DEGENERATE_TOLERANCE: f64 = 1e-9;
/// Largest graph accepted by [`expected_cover_time`].
pub const COVER_STATE_LIMIT: usize = 14;

/// Row-stochastic matrix `P(x, y) = mu_xy / mu_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    p: Vec<f64>,
}

pub fn transition_matrix(g: &WeightedGraph) -> TransitionMatrix {
    let n = g.num_vertices();
    let mut p = vec![0.0; n * n];
    for x in 0..n {
        let mu = g.measure(x);
        for &(y, w) in g.neighbors(x) {
            p[x * n + y] = w / mu;
        }
    }
    TransitionMatrix { n, p }
}

impl TransitionMatrix {
    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.p[x * self.n..(x + 1) * self.n]
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_defect(&self) -> f64 {
        (0..self.n)
            .map(|x| (self.row(x).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|pi P - pi|` for `pi` proportional to `weights`.
    pub fn stationarity_defect(&self, weights: &[f64]) -> f64 {
        let total: f64 = weights.iter().sum();
        (0..self.n)
            .map(|y| {
                let flow: f64 = (0..self.n).map(|x| weights[x] * self.get(x, y)).sum();
                ((flow - weights[y]) / total).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Solves `h(z) = source(z) + sum_{w free} P(z, w) h(w)` on the states not
    /// marked absorbing; absorbing states get `h = 0`.
    fn solve_absorbed(&self, absorbing: &[bool], source: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
        let free: Vec<usize> = (0..self.n).filter(|&z| !absorbing[z]).collect();
        let mut h = vec![0.0; self.n];
        if free.is_empty() {
            return Ok(h);
        }
        let k = free.len();
        let a = DMatrix::from_fn(k, k, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - self.get(free[i], free[j])
        });
        let b = DVector::from_iterator(k, free.iter().map(|&z| source(z)));
        let sol = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::SolverFailure("absorbed chain system is singular".into()))?;
        for (i, &z) in free.iter().enumerate() {
            h[z] = sol[i];
        }
        Ok(h)
    }
}

fn distinct(g: &WeightedGraph, x: usize, y: usize) -> Result<()> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if x == y {
        return Err(Error::SameVertex(x));
    }
    Ok(())
}

/// `P_x(tau_y < tau_x^+)` by first-step analysis.
pub fn hit_before_return_prob(g: &WeightedGraph, x: usize, y: usize) -> Result<f64> {
    distinct(g, x, y)?;
    let p = transition_matrix(g);
    let mut absorbing = vec![false; g.num_vertices()];
    absorbing[x] = true;
    absorbing[y] = true;
    // h(z) = P_z(tau_y < tau_x)
    let h = p.solve_absorbed(&absorbing, |z| p.get(z, y))?;
    Ok(p.get(x, y) + (0..g.num_vertices()).map(|z| p.get(x, z) * h[z]).sum::<f64>())
}

/// `E_x tau_x^+`.
pub fn expected_return_time(g: &WeightedGraph, x: usize) -> Result<f64> {
    g.check_vertex(x)?;
    let p = transition_matrix(g);
    let mut absorbing = vec![false; g.num_vertices()];
    absorbing[x] = true;
    let k = p.solve_absorbed(&absorbing, |_| 1.0)?;
    Ok(1.0 + (0..g.num_vertices()).map(|z| p.get(x, z) * k[z]).sum::<f64>())
}

/// `E_x tau_y`.
pub fn expected_hitting_time(g: &WeightedGraph, x: usize, y: usize) -> Result<f64> {
    distinct(g, x, y)?;
    let p = transition_matrix(g);
    let mut absorbing = vec![false; g.num_vertices()];
    absorbing[y] = true;
    Ok(p.solve_absorbed(&absorbing, |_| 1.0)?[x])
}

/// The chain killed on hitting one target vertex, with its Green function
/// `N(z, w)` = expected visits to `w` before the target, starting from `z`.
/// Answers every source for that target from a single inversion.
pub struct KilledChain {
    target: usize,
    free: Vec<usize>,
    green: DMatrix<f64>,
}

impl KilledChain {
    pub fn new(g: &WeightedGraph, target: usize) -> Result<Self> {
        g.check_vertex(target)?;
        let p = transition_matrix(g);
        let free: Vec<usize> = (0..g.num_vertices()).filter(|&z| z != target).collect();
        let k = free.len();
        let a = DMatrix::from_fn(k, k, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - p.get(free[i], free[j])
        });
        let green = a
            .try_inverse()
            .ok_or_else(|| Error::SolverFailure("killed chain is singular".into()))?;
        Ok(KilledChain {
            target,
            free,
            green,
        })
    }

    fn index(&self, z: usize) -> Result<usize> {
        if z == self.target {
            return Err(Error::SameVertex(z));
        }
        self.free
            .binary_search(&z)
            .map_err(|_| Error::UnknownVertex(z))
    }

    /// `E_z tau_target`.
    pub fn hitting_time(&self, z: usize) -> Result<f64> {
        let i = self.index(z)?;
        Ok(self.green.row(i).sum())
    }

    /// `P_z(tau_target < tau_z^+) = 1 / N(z, z)`.
    pub fn escape_probability(&self, z: usize) -> Result<f64> {
        let i = self.index(z)?;
        Ok(1.0 / self.green[(i, i)])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    ReturnTime,
    ExcursionVisits,
}

/// A law on `{0, 1, ..., horizon}` plus the mass beyond the horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstPassageLaw {
    #[serde(rename = "type")]
    pub kind: LawKind,
    pub params: serde_json::Value,
    pub pmf: Vec<f64>,
    pub tail_mass: f64,
}

impl FirstPassageLaw {
    pub fn horizon(&self) -> usize {
        self.pmf.len().saturating_sub(1)
    }

    /// `P(T >= k)`, summed from the far end for accuracy.
    pub fn survival(&self, k: usize) -> f64 {
        if k >= self.pmf.len() {
            return if k == self.pmf.len() { self.tail_mass } else { f64::NAN };
        }
        self.pmf[k..].iter().rev().sum::<f64>() + self.tail_mass
    }

    pub fn total_mass(&self) -> f64 {
        self.pmf.iter().sum::<f64>() + self.tail_mass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("law serializes")
    }
}

/// Exact law of `tau_x^+` up to `horizon`, by iterating the chain with `x`
/// made absorbing. Stops early once less than [`TAIL_EPSILON`] mass remains;
/// `tail_mass` is then `P(tau_x^+ > last recorded time)`.
pub fn return_time_tail(g: &WeightedGraph, x: usize, horizon: usize) -> Result<FirstPassageLaw> {
    g.check_vertex(x)?;
    if horizon == 0 {
        return Err(Error::Range("horizon must be at least 1".into()));
    }
    if horizon > MAX_HORIZON {
        return Err(Error::HorizonTooLarge {
            horizon,
            cap: MAX_HORIZON,
        });
    }
    let n = g.num_vertices();
    // q[z] = P_x(X_t = z, tau_x^+ > t), starting at t = 1
    let mut q = vec![0.0; n];
    let mu_x = g.measure(x);
    for &(z, w) in g.neighbors(x) {
        q[z] = w / mu_x;
    }
    let mut next = vec![0.0; n];
    let mut pmf = vec![0.0, 0.0];
    let mut alive = 1.0;
    for _t in 2..=horizon {
        let mut returned = 0.0;
        next.iter_mut().for_each(|v| *v = 0.0);
        for z in 0..n {
            let mass = q[z];
            if mass == 0.0 {
                continue;
            }
            let mu = g.measure(z);
            for &(w, c) in g.neighbors(z) {
                let flow = mass * c / mu;
                if w == x {
                    returned += flow;
                } else {
                    next[w] += flow;
                }
            }
        }
        std::mem::swap(&mut q, &mut next);
        pmf.push(returned);
        alive = q.iter().sum();
        if alive < TAIL_EPSILON {
            break;
        }
    }
    Ok(FirstPassageLaw {
        kind: LawKind::ReturnTime,
        params: serde_json::json!({ "x": x, "horizon": horizon }),
        pmf,
        tail_mass: alive,
    })
}

/// Upper bound on `P_x(tau_x^+ >= t)` from Markov's inequality applied on
/// blocks of length `2 ceil(m r)`, using `E_x tau_x^+ = m / mu_x` and
/// `E_y tau_x <= r m`.
pub fn return_tail_block_bound(mass: f64, r_diam: f64, mu_x: f64, t: f64) -> f64 {
    let block = 2.0 * (mass * r_diam).ceil();
    let k = (t / block).floor();
    if k < 1.0 {
        return 1.0;
    }
    let first = (mass / (mu_x * block)).min(1.0);
    let rest = (r_diam * mass / block).min(1.0);
    first * rest.powf(k - 1.0)
}

/// `E_x exp(-theta tau_x^+)` from the exact law, run until the remaining
/// mass is below [`TAIL_EPSILON`]. The returned value includes the worst
/// case `tail_mass * exp(-theta (H + 1))` for the unresolved remainder, so it
/// overestimates by at most [`TAIL_EPSILON`].
pub fn return_time_laplace(g: &WeightedGraph, x: usize, theta: f64) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(Error::NegativeTheta(theta));
    }
    if theta == 0.0 {
        g.check_vertex(x)?;
        return Ok(1.0);
    }
    let law = return_time_tail(g, x, MAX_HORIZON)?;
    Ok(laplace_of_law(&law, theta))
}

pub fn laplace_of_law(law: &FirstPassageLaw, theta: f64) -> f64 {
    let body: f64 = law
        .pmf
        .iter()
        .enumerate()
        .map(|(k, p)| p * (-theta * k as f64).exp())
        .sum();
    body + law.tail_mass * (-theta * (law.horizon() + 1) as f64).exp()
}

/// Law of `N`, the number of visits to `y` strictly between consecutive
/// visits to `x`, for the walk started at `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcursionLaw {
    #[serde(flatten)]
    pub law: FirstPassageLaw,
    /// `P_x(tau_y < tau_x^+)`.
    pub reach: f64,
    /// `P_y(tau_x < tau_y^+)`.
    pub escape: f64,
    /// True when every step out of `y` reaches `x` before returning, so `N`
    /// takes only the values 0 and 1.
    pub degenerate: bool,
    mu_x: f64,
    mu_y: f64,
}

fn excursion_pmf(reach: f64, escape: f64, degenerate: bool, kmax: usize) -> (Vec<f64>, f64) {
    let mut pmf = Vec::with_capacity(kmax + 1);
    pmf.push(1.0 - reach);
    if degenerate {
        if kmax >= 1 {
            pmf.push(reach);
            pmf.extend(std::iter::repeat(0.0).take(kmax - 1));
            return (pmf, 0.0);
        }
        return (pmf, reach);
    }
    let stay = 1.0 - escape;
    let mut geo = reach;
    for _ in 1..=kmax {
        pmf.push(geo * escape);
        geo *= stay;
    }
    // geo = reach * stay^kmax = P(N > kmax)
    (pmf, geo)
}

/// Exact law of the excursion visit count by first-step analysis and the
/// strong Markov property at successive visits to `y`.
pub fn excursion_visit_law(g: &WeightedGraph, x: usize, y: usize, kmax: usize) -> Result<ExcursionLaw> {
    distinct(g, x, y)?;
    let reach = hit_before_return_prob(g, x, y)?;
    let escape = hit_before_return_prob(g, y, x)?;
    let degenerate = (1.0 - escape).abs() < DEGENERATE_TOLERANCE;
    let (pmf, tail_mass) = excursion_pmf(reach, escape, degenerate, kmax);
    Ok(ExcursionLaw {
        law: FirstPassageLaw {
            kind: LawKind::ExcursionVisits,
            params: serde_json::json!({ "x": x, "y": y, "kmax": kmax }),
            pmf,
            tail_mass,
        },
        reach,
        escape,
        degenerate,
        mu_x: g.measure(x),
        mu_y: g.measure(y),
    })
}

/// The same law written through the resistance: `N = 0` with probability
/// `1 - 1/(mu_x R)` and `P(N = k) = (1/(mu_x R)) (1 - 1/(mu_y R))^(k-1) / (mu_y R)`,
/// with the two-point form when `mu_y R = 1`.
pub fn excursion_law_from_resistance(mu_x: f64, mu_y: f64, r: f64, kmax: usize) -> (Vec<f64>, f64) {
    let degenerate = (mu_y * r - 1.0).abs() < DEGENERATE_TOLERANCE;
    excursion_pmf(1.0 / (mu_x * r), 1.0 / (mu_y * r), degenerate, kmax)
}

/// `E (eta - 1/mu_x)^2` in closed form through the resistance.
pub fn excursion_second_moment_formula(mu_x: f64, mu_y: f64, r: f64) -> f64 {
    2.0 * (1.0 - 1.0 / (mu_y * r)) * r / mu_x + 1.0 / (mu_x * mu_y) - 1.0 / (mu_x * mu_x)
}

impl ExcursionLaw {
    /// Moments of `eta = N / mu_y` summed from the pmf until the geometric
    /// remainder is below double precision. Returns `(E eta, E (eta - 1/mu_x)^2)`.
    pub fn eta_moments(&self) -> (f64, f64) {
        let centre = 1.0 / self.mu_x;
        let mut mean = 0.0;
        let mut second = 0.0;
        let mut add = |k: usize, p: f64| {
            let eta = k as f64 / self.mu_y;
            mean += p * eta;
            second += p * (eta - centre).powi(2);
        };
        for (k, &p) in self.law.pmf.iter().enumerate() {
            add(k, p);
        }
        if !self.degenerate {
            let stay = 1.0 - self.escape;
            let mut k = self.law.pmf.len();
            let mut p = self.law.tail_mass * self.escape;
            // terms decay geometrically once k exceeds the mean
            while p * (k as f64 / self.mu_y + centre).powi(2) > 1e-18 || (k as f64) < 10.0 / self.escape {
                add(k, p);
                p *= stay;
                k += 1;
                if p == 0.0 {
                    break;
                }
            }
        }
        (mean, second)
    }
}

/// Expected cover time from `start`, solved exactly on the chain whose states
/// are (visited set, current vertex). Limited to [`COVER_STATE_LIMIT`] vertices.
pub fn expected_cover_time(g: &WeightedGraph, start: usize) -> Result<f64> {
    g.check_vertex(start)?;
    let n = g.num_vertices();
    if n > COVER_STATE_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "exact cover time",
            size: n,
            budget: COVER_STATE_LIMIT,
        });
    }
    let p = transition_matrix(g);
    let full: usize = (1 << n) - 1;
    // remaining[s * n + v]: expected further steps to cover from (s, v)
    let mut remaining = vec![0.0; (full + 1) * n];
    let mut subsets: Vec<usize> = (1..full).collect();
    subsets.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
    for s in subsets {
        let members: Vec<usize> = (0..n).filter(|&v| s & (1 << v) != 0).collect();
        let k = members.len();
        let a = DMatrix::from_fn(k, k, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - p.get(members[i], members[j])
        });
        let b = DVector::from_iterator(
            k,
            members.iter().map(|&v| {
                1.0 + (0..n)
                    .filter(|&w| s & (1 << w) == 0)
                    .map(|w| p.get(v, w) * remaining[(s | (1 << w)) * n + w])
                    .sum::<f64>()
            }),
        );
        let sol = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::SolverFailure("cover chain system is singular".into()))?;
        for (i, &v) in members.iter().enumerate() {
            remaining[s * n + v] = sol[i];
        }
    }
    Ok(remaining[(1 << start) * n + start])
}
