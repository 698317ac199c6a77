//! Discrete Garsia lemma: a pointwise bound on `|f(x) - f(y)|` from the
//! integrated functional `Gamma(f)` under a lower volume bound.
//!
//! Metric balls are open, `B(x, r) = {y : d(x, y) < r}`. Their volumes only
//! change at realized distances, so a volume bound `v` that holds at every
//! realized distance in `[d_0, diam]` holds on the whole interval.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::WeightedGraph;
use crate::resistance::ResistanceMatrix;

/// Points in the geometric grid used to check profile shape.
pub const PROFILE_GRID_POINTS: usize = 64;
const PROFILE_GRID: (f64, f64) = (1e-6, 1e6);
/// Relative tolerance for adaptive Simpson quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;
const MAX_DEPTH: u32 = 60;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The convex weight `psi`.
#[derive(Clone)]
pub enum Psi {
    /// `exp(c |y|)`.
    ExpAbs(f64),
    /// `exp(c y^2)`.
    ExpSquare(f64),
    /// Any symmetric convex function with `psi(0) = 1`, inverted numerically.
    Custom(RealFn),
}

impl std::fmt::Debug for Psi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Psi::ExpAbs(c) => write!(f, "ExpAbs({c})"),
            Psi::ExpSquare(c) => write!(f, "ExpSquare({c})"),
            Psi::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Psi {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Psi::ExpAbs(c) => (c * y.abs()).exp(),
            Psi::ExpSquare(c) => (c * y * y).exp(),
            Psi::Custom(f) => f(y),
        }
    }

    /// `inf {y >= 0 : psi(y) > x}`.
    pub fn inverse(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match self {
            Psi::ExpAbs(c) => {
                if x < 1.0 {
                    0.0
                } else {
                    x.ln() / c
                }
            }
            Psi::ExpSquare(c) => {
                if x < 1.0 {
                    0.0
                } else {
                    (x.ln() / c).sqrt()
                }
            }
            Psi::Custom(f) => {
                if f(0.0) > x {
                    return 0.0;
                }
                if x == f64::INFINITY {
                    return f64::INFINITY;
                }
                let mut hi = 1.0;
                while f(hi) <= x {
                    hi *= 2.0;
                    if !hi.is_finite() {
                        return f64::INFINITY;
                    }
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if f(mid) > x {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }
}

/// Volume function `v`, gauge `p` and weight `psi`.
#[derive(Clone)]
pub struct GarsiaProfile {
    v: RealFn,
    p: RealFn,
    psi: Psi,
}

impl std::fmt::Debug for GarsiaProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GarsiaProfile").field("psi", &self.psi).finish_non_exhaustive()
    }
}

fn geometric_grid() -> Vec<f64> {
    let (lo, hi) = PROFILE_GRID;
    let ratio = (hi / lo).powf(1.0 / (PROFILE_GRID_POINTS - 1) as f64);
    (0..PROFILE_GRID_POINTS).map(|k| lo * ratio.powi(k as i32)).collect()
}

impl GarsiaProfile {
    /// Checks on a geometric grid over `[1e-6, 1e6]`: `v >= 0` and
    /// nondecreasing, `p(0) = 0` and `p` nondecreasing, `psi(0) = 1`,
    /// `psi` symmetric, midpoint convex and unbounded along the grid.
    pub fn new(v: RealFn, p: RealFn, psi: Psi) -> Result<Self> {
        let grid = geometric_grid();
        let bad = |what: &str, s: f64| Err(Error::InvalidProfile(format!("{what} at {s:e}")));
        if p(0.0) != 0.0 {
            return bad("p(0) is not 0", 0.0);
        }
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(v(a) >= 0.0) || v(b) < v(a) {
                return bad("v is negative or decreasing", a);
            }
            if !(p(a) >= 0.0) || p(b) < p(a) {
                return bad("p is negative or decreasing", a);
            }
        }
        if (psi.eval(0.0) - 1.0).abs() > 1e-12 {
            return bad("psi(0) is not 1", 0.0);
        }
        for &s in &grid {
            let (pos, neg) = (psi.eval(s), psi.eval(-s));
            if pos.is_finite() && (pos - neg).abs() > 1e-12 * pos {
                return bad("psi is not symmetric", s);
            }
        }
        let probe: Vec<f64> = grid.iter().map(|s| s.min(1e2)).collect();
        for w in probe.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = psi.eval(0.5 * (a + b));
            let chord = 0.5 * (psi.eval(a) + psi.eval(b));
            if mid.is_finite() && mid > chord * (1.0 + 1e-12) {
                return bad("psi is not convex", a);
            }
        }
        if psi.eval(1e2) <= psi.eval(1.0) {
            return bad("psi does not grow", 1e2);
        }
        Ok(GarsiaProfile { v, p, psi })
    }

    /// `v(s) = c s^alpha`, `p = sqrt`, `psi = exp(c_psi |.|)`.
    pub fn power_sqrt_exp(c: f64, alpha: f64, c_psi: f64) -> Result<Self> {
        Self::new(
            Arc::new(move |s: f64| c * s.max(0.0).powf(alpha)),
            Arc::new(|s: f64| s.max(0.0).sqrt()),
            Psi::ExpAbs(c_psi),
        )
    }

    pub fn v(&self, s: f64) -> f64 {
        (self.v)(s)
    }

    pub fn p(&self, s: f64) -> f64 {
        (self.p)(s)
    }

    pub fn psi(&self) -> &Psi {
        &self.psi
    }
}

/// A metric on the vertices of a graph together with the vertex measure.
#[derive(Clone, Debug)]
pub struct MetricContext {
    n: usize,
    d: Vec<f64>,
    mu: Vec<f64>,
    d0: f64,
    diam: f64,
}

/// Smallest open-ball volume at one radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallVolume {
    pub radius: f64,
    pub min_volume: f64,
    pub center: usize,
}

impl MetricContext {
    /// `d` is row-major `n x n`. Checks symmetry, zero diagonal, positivity
    /// off the diagonal and the triangle inequality (relative slack 1e-12).
    pub fn new(g: &WeightedGraph, d: Vec<f64>) -> Result<Self> {
        let n = g.num_vertices();
        if d.len() != n * n {
            return Err(Error::MissingValue {
                expected: n * n,
                got: d.len(),
            });
        }
        let at = |x: usize, y: usize| d[x * n + y];
        let mut d0 = f64::INFINITY;
        let mut diam = 0.0f64;
        for x in 0..n {
            if at(x, x) != 0.0 {
                return Err(Error::InvalidProfile(format!("d({x}, {x}) is not 0")));
            }
            for y in x + 1..n {
                let v = at(x, y);
                if !(v > 0.0) || !v.is_finite() || v != at(y, x) {
                    return Err(Error::InvalidProfile(format!("d({x}, {y}) is {v}")));
                }
                d0 = d0.min(v);
                diam = diam.max(v);
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if at(x, z) > (at(x, y) + at(y, z)) * (1.0 + 1e-12) {
                        return Err(Error::InvalidProfile(format!(
                            "triangle inequality fails at ({x}, {y}, {z})"
                        )));
                    }
                }
            }
        }
        Ok(MetricContext {
            n,
            d,
            mu: g.measures().to_vec(),
            d0,
            diam,
        })
    }

    /// The resistance metric, divided by `r(G)` when `rescaled`.
    pub fn from_resistance(g: &WeightedGraph, rm: &ResistanceMatrix, rescaled: bool) -> Result<Self> {
        let n = rm.num_vertices();
        let scale = if rescaled { rm.diameter() } else { 1.0 };
        let d = (0..n * n).map(|k| rm.get(k / n, k % n) / scale).collect();
        Self::new(g, d)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.d[x * self.n + y]
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn diameter(&self) -> f64 {
        self.diam
    }

    pub fn measure(&self, x: usize) -> f64 {
        self.mu[x]
    }

    pub fn total_mass(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// `min_x mu(B(x, r))` at every distinct realized distance `r`, ascending.
    pub fn min_ball_volumes(&self) -> Vec<BallVolume> {
        let n = self.n;
        // per centre: sorted distances and prefix masses
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .map(|x| {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| self.dist(x, a).total_cmp(&self.dist(x, b)));
                let dists = order.iter().map(|&y| self.dist(x, y)).collect();
                let mut acc = 0.0;
                let prefix = order
                    .iter()
                    .map(|&y| {
                        acc += self.mu[y];
                        acc
                    })
                    .collect();
                (dists, prefix)
            })
            .collect();
        let mut radii: Vec<f64> = (0..n)
            .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
            .map(|(x, y)| self.dist(x, y))
            .collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        radii
            .into_iter()
            .map(|r| {
                let (center, min_volume) = rows
                    .iter()
                    .enumerate()
                    .map(|(x, (dists, prefix))| {
                        let k = dists.partition_point(|&s| s < r);
                        (x, prefix[k - 1])
                    })
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("nonempty");
                BallVolume {
                    radius: r,
                    min_volume,
                    center,
                }
            })
            .collect()
    }

    /// Checks `min_x mu(B(x, r)) >= v(r)` for all `r` in `[d_0, diam]`.
    pub fn verify_volume_bound(&self, profile: &GarsiaProfile) -> Result<()> {
        for b in self.min_ball_volumes() {
            let bound = profile.v(b.radius);
            if b.min_volume < bound * (1.0 - 1e-12) {
                return Err(Error::VolumeBoundUnverified {
                    radius: b.radius,
                    volume: b.min_volume,
                    bound,
                });
            }
        }
        Ok(())
    }

    /// Largest `c` such that `c w(r)` is a valid volume bound, for a
    /// nonnegative shape `w`.
    pub fn fit_volume_constant(&self, shape: impl Fn(f64) -> f64) -> f64 {
        self.min_ball_volumes()
            .iter()
            .map(|b| b.min_volume / shape(b.radius))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A metric context whose volume bound has been checked against a profile.
#[derive(Clone, Debug)]
pub struct GarsiaSetup<'a> {
    ctx: &'a MetricContext,
    profile: &'a GarsiaProfile,
}

/// Lower limit of the integral bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerLimit {
    D0,
    Zero,
}

impl<'a> GarsiaSetup<'a> {
    pub fn new(ctx: &'a MetricContext, profile: &'a GarsiaProfile) -> Result<Self> {
        ctx.verify_volume_bound(profile)?;
        Ok(GarsiaSetup { ctx, profile })
    }

    /// `Gamma(f) = sum_{x,y} psi((f(x) - f(y)) / p(d(x, y))) mu_x mu_y`, with
    /// diagonal terms `mu_x^2`.
    pub fn gamma(&self, f: &[f64]) -> Result<f64> {
        gamma_unchecked(self.ctx, self.profile, f)
    }

    /// Chaining bound on `|f(x) - f(y)|` given `Gamma(f)`.
    pub fn bound(&self, gamma: f64, x: usize, y: usize) -> Result<f64> {
        let d = self.pair_distance(x, y)?;
        let d0 = self.ctx.d0;
        let psi = &self.profile.psi;
        let mut total = 0.0;
        let mut i = 1;
        loop {
            let scale = d0 * 2f64.powi(i - 1);
            let v = self.profile.v(scale);
            total += self.profile.p(4.0 * scale) * psi.inverse(gamma / (v * v));
            // stop at the first i with d0 2^i > d
            if 2.0 * scale > d {
                break;
            }
            i += 1;
        }
        Ok(2.0 * total)
    }

    /// `4 int_{lo}^{2 d(x, y)} p(4s)/s psi^{-1}(Gamma / v(s/2)^2) ds`.
    pub fn integral_bound(&self, gamma: f64, x: usize, y: usize, lower: LowerLimit) -> Result<f64> {
        let d = self.pair_distance(x, y)?;
        let below = self.below_d0(gamma, lower)?;
        Ok(self.above_d0(gamma, d)? + below)
    }

    /// [`GarsiaSetup::integral_bound`] for every pair, row-major with zeros on
    /// the diagonal. The part below `d0` is shared by all pairs and the rest
    /// depends only on `d(x, y)`, so each is integrated once.
    pub fn integral_bounds(&self, gamma: f64, lower: LowerLimit) -> Result<Vec<f64>> {
        let n = self.ctx.n;
        let below = self.below_d0(gamma, lower)?;
        let mut by_distance: HashMap<u64, f64> = HashMap::new();
        let mut out = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let d = self.ctx.dist(x, y);
                let above = match by_distance.get(&d.to_bits()) {
                    Some(&v) => v,
                    None => {
                        let v = self.above_d0(gamma, d)?;
                        by_distance.insert(d.to_bits(), v);
                        v
                    }
                };
                out[x * n + y] = above + below;
            }
        }
        Ok(out)
    }

    fn integrand(&self, gamma: f64) -> impl Fn(f64) -> f64 + '_ {
        move |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let v = self.profile.v(0.5 * s);
            4.0 * self.profile.p(4.0 * s) / s * self.profile.psi.inverse(gamma / (v * v))
        }
    }

    /// The integral over `[d0, 2d]`, in dyadic pieces `[d0 2^k, d0 2^{k+1}]`.
    fn above_d0(&self, gamma: f64, d: f64) -> Result<f64> {
        let integrand = self.integrand(gamma);
        let mut total = 0.0;
        let mut a = self.ctx.d0;
        while a < 2.0 * d {
            let b = (2.0 * a).min(2.0 * d);
            total += simpson(&integrand, a, b)?;
            a = b;
        }
        Ok(total)
    }

    /// The integral over `(0, d0)` for [`LowerLimit::Zero`], else 0. Halves
    /// towards 0 until three successive pieces fall below `1e-15` of the
    /// running total, counted from the piece `[d0, 2 d0]` every pair shares.
    fn below_d0(&self, gamma: f64, lower: LowerLimit) -> Result<f64> {
        if lower == LowerLimit::D0 {
            return Ok(0.0);
        }
        let integrand = self.integrand(gamma);
        let d0 = self.ctx.d0;
        let base = simpson(&integrand, d0, 2.0 * d0)?;
        let mut total = 0.0;
        let mut b = d0;
        let mut small = 0;
        for _ in 0..4_000 {
            let a = 0.5 * b;
            let piece = simpson(&integrand, a, b)?;
            total += piece;
            if piece <= 1e-15 * (base + total) {
                small += 1;
                if small == 3 {
                    return Ok(total);
                }
            } else {
                small = 0;
            }
            b = a;
        }
        Err(Error::QuadratureFailure("integral from 0 did not converge".into()))
    }

    fn pair_distance(&self, x: usize, y: usize) -> Result<f64> {
        if x >= self.ctx.n {
            return Err(Error::UnknownVertex(x));
        }
        if y >= self.ctx.n {
            return Err(Error::UnknownVertex(y));
        }
        if x == y {
            return Err(Error::SameVertex(x));
        }
        Ok(self.ctx.dist(x, y))
    }
}

fn gamma_unchecked(ctx: &MetricContext, profile: &GarsiaProfile, f: &[f64]) -> Result<f64> {
    let n = ctx.n;
    if f.len() != n {
        return Err(Error::MissingValue {
            expected: n,
            got: f.len(),
        });
    }
    let mut total = 0.0;
    for x in 0..n {
        total += ctx.mu[x] * ctx.mu[x];
        for y in x + 1..n {
            let z = (f[x] - f[y]) / profile.p(ctx.dist(x, y));
            let term = profile.psi.eval(z) * ctx.mu[x] * ctx.mu[y];
            if !term.is_finite() {
                return Err(Error::Overflow { x, y });
            }
            total += 2.0 * term;
        }
    }
    if !total.is_finite() {
        return Err(Error::Overflow { x: 0, y: 0 });
    }
    Ok(total)
}

/// `Gamma(f)` for a context and profile. Needs no volume bound.
pub fn gamma_functional(ctx: &MetricContext, f: &[f64], profile: &GarsiaProfile) -> Result<f64> {
    gamma_unchecked(ctx, profile, f)
}

pub fn psi_inverse(profile: &GarsiaProfile, x: f64) -> f64 {
    profile.psi.inverse(x)
}

/// Chaining bound on `|f(x) - f(y)|`; verifies the volume bound first.
pub fn garsia_bound(
    ctx: &MetricContext,
    f: &[f64],
    x: usize,
    y: usize,
    profile: &GarsiaProfile,
) -> Result<f64> {
    let setup = GarsiaSetup::new(ctx, profile)?;
    let gamma = setup.gamma(f)?;
    setup.bound(gamma, x, y)
}

pub fn garsia_integral_bound(
    ctx: &MetricContext,
    f: &[f64],
    x: usize,
    y: usize,
    profile: &GarsiaProfile,
    lower: LowerLimit,
) -> Result<f64> {
    let setup = GarsiaSetup::new(ctx, profile)?;
    let gamma = setup.gamma(f)?;
    setup.integral_bound(gamma, x, y, lower)
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = simpson_step(f, a, b, fa, fm, fb, whole, QUADRATURE_TOLERANCE * whole.abs().max(1e-300), 0)?;
    if !value.is_finite() {
        return Err(Error::QuadratureFailure(format!("non-finite value on [{a:e}, {b:e}]")));
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureFailure(format!(
            "no convergence on [{a:e}, {b:e}] at depth {depth}"
        )));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

/// `ln 3 / ln(5/3)`, the volume exponent of the gasket in the resistance
/// metric.
pub fn gasket_resistance_volume_exponent() -> f64 {
    3f64.ln() / (5.0f64 / 3.0).ln()
}

/// The profile used for rescaled local times: `d = R~`,
/// `v(s) = c s^alpha` with `c` fitted to the realized ball volumes,
/// `p = sqrt`, `psi = exp(c_psi |.|)`.
pub fn fitted_power_profile(ctx: &MetricContext, alpha: f64, c_psi: f64) -> Result<GarsiaProfile> {
    let c = ctx.fit_volume_constant(|s| s.powf(alpha));
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidProfile(format!("fitted volume constant is {c}")));
    }
    GarsiaProfile::power_sqrt_exp(c, alpha, c_psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_graph, generate, Family, FamilySpec};
    use crate::resistance::resistance_matrix;

    fn unit_p_profile(c_psi: f64) -> GarsiaProfile {
        // p = 1 away from 0
        GarsiaProfile::new(
            Arc::new(|_| 0.0),
            Arc::new(|s: f64| if s > 0.0 { 1.0 } else { 0.0 }),
            Psi::ExpAbs(c_psi),
        )
        .unwrap()
    }

    #[test]
    fn gamma_examples() {
        let g = build_graph(&[(0, 1, 1.0)]).unwrap();
        let rm = resistance_matrix(&g).unwrap();
        let ctx = MetricContext::from_resistance(&g, &rm, true).unwrap();
        let profile = unit_p_profile(1.0);
        let gamma = gamma_functional(&ctx, &[0.0, 1.0], &profile).unwrap();
        assert!((gamma - (1.0 + 1.0 + 2.0 * std::f64::consts::E)).abs() < 1e-12);
        let gamma = gamma_functional(&ctx, &[5.0, 5.0], &profile).unwrap();
        assert_eq!(gamma, 4.0);
        let shifted = gamma_functional(&ctx, &[3.0, 4.0], &profile).unwrap();
        assert!((shifted - (2.0 + 2.0 * std::f64::consts::E)).abs() < 1e-12);
        assert!(matches!(
            gamma_functional(&ctx, &[0.0, 1e6], &profile),
            Err(Error::Overflow { x: 0, y: 1 })
        ));
    }

    #[test]
    fn psi_inverses() {
        let e = Psi::ExpAbs(1.0);
        assert_eq!(e.inverse(0.5), 0.0);
        assert!((e.inverse(10.0) - 10f64.ln()).abs() < 1e-15);
        let q = Psi::ExpSquare(2.0);
        assert!((q.inverse(10.0) - (10f64.ln() / 2.0).sqrt()).abs() < 1e-15);
        let custom = Psi::Custom(Arc::new(|y: f64| (y.abs()).exp()));
        for x in [0.3, 1.0, 2.0, 50.0] {
            assert!((custom.inverse(x) - e.inverse(x)).abs() < 1e-12);
        }
        for y in [0.1, 1.0, 3.0] {
            assert!(e.inverse(e.eval(y) - 1e-9) <= y);
            assert!(custom.inverse(e.eval(y) - 1e-9) <= y + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_profiles() {
        let v: RealFn = Arc::new(|s| s);
        let p: RealFn = Arc::new(|s: f64| s.sqrt());
        assert!(GarsiaProfile::new(Arc::new(|s: f64| -s), p.clone(), Psi::ExpAbs(1.0)).is_err());
        assert!(GarsiaProfile::new(v.clone(), Arc::new(|s: f64| 1.0 + s), Psi::ExpAbs(1.0)).is_err());
        let concave = Psi::Custom(Arc::new(|y: f64| 1.0 + y.abs().sqrt()));
        assert!(GarsiaProfile::new(v.clone(), p.clone(), concave).is_err());
        let shifted = Psi::Custom(Arc::new(|y: f64| 2.0 + y * y));
        assert!(GarsiaProfile::new(v, p, shifted).is_err());
    }

    #[test]
    fn volume_bound_is_checked() {
        let g = generate(FamilySpec::new(Family::Gasket, 2)).unwrap();
        let rm = resistance_matrix(&g).unwrap();
        let ctx = MetricContext::from_resistance(&g, &rm, true).unwrap();
        let alpha = gasket_resistance_volume_exponent();
        let good = fitted_power_profile(&ctx, alpha, 1.0).unwrap();
        assert!(GarsiaSetup::new(&ctx, &good).is_ok());
        let c = ctx.fit_volume_constant(|s| s.powf(alpha));
        let bad = GarsiaProfile::power_sqrt_exp(1.01 * c, alpha, 1.0).unwrap();
        assert!(matches!(
            GarsiaSetup::new(&ctx, &bad),
            Err(Error::VolumeBoundUnverified { .. })
        ));
    }

    #[test]
    fn constant_function_and_adjacent_pair() {
        let g = generate(FamilySpec::new(Family::Gasket, 2)).unwrap();
        let rm = resistance_matrix(&g).unwrap();
        let ctx = MetricContext::from_resistance(&g, &rm, true).unwrap();
        let profile = fitted_power_profile(&ctx, gasket_resistance_volume_exponent(), 1.0).unwrap();
        let setup = GarsiaSetup::new(&ctx, &profile).unwrap();
        let f = vec![2.5; g.num_vertices()];
        let gamma = setup.gamma(&f).unwrap();
        let m = g.total_mass();
        assert!((gamma - m * m).abs() < 1e-9 * m * m);
        // a pair at distance d0 uses the single term i = 1
        let (x, y) = (0..g.num_vertices())
            .flat_map(|x| (0..g.num_vertices()).map(move |y| (x, y)))
            .find(|&(x, y)| x != y && ctx.dist(x, y) == ctx.d0())
            .unwrap();
        let d0 = ctx.d0();
        let v = profile.v(d0);
        let single = 2.0 * profile.p(4.0 * d0) * profile.psi().inverse(gamma / (v * v));
        assert_eq!(setup.bound(gamma, x, y).unwrap(), single);
    }

    #[test]
    fn closed_form_integral() {
        // v(s) = C s^a, p = sqrt, psi = exp(c|.|) with Gamma / v(s/2)^2 >= 1
        // on the range: integrand (8/c) s^{-1/2} (K - 2a ln s),
        // K = ln Gamma - 2 ln C + 2a ln 2.
        let g = generate(FamilySpec::new(Family::Gasket, 2)).unwrap();
        let rm = resistance_matrix(&g).unwrap();
        let ctx = MetricContext::from_resistance(&g, &rm, true).unwrap();
        let a = gasket_resistance_volume_exponent();
        let c_psi = 0.7;
        let profile = fitted_power_profile(&ctx, a, c_psi).unwrap();
        let big_c = ctx.fit_volume_constant(|s| s.powf(a));
        let setup = GarsiaSetup::new(&ctx, &profile).unwrap();
        let f: Vec<f64> = (0..g.num_vertices()).map(|x| (x as f64 * 0.37).sin()).collect();
        let gamma = setup.gamma(&f).unwrap();
        let k = gamma.ln() - 2.0 * big_c.ln() + 2.0 * a * 2f64.ln();
        let anti = |s: f64| {
            let r = s.sqrt();
            8.0 / c_psi * (2.0 * k * r - 2.0 * a * (2.0 * r * s.ln() - 4.0 * r))
        };
        let (x, y) = (0, 1);
        let d = ctx.dist(x, y);
        assert!(gamma / profile.v(d).powi(2) >= 1.0);
        let want = anti(2.0 * d) - anti(ctx.d0());
        let got = setup.integral_bound(gamma, x, y, LowerLimit::D0).unwrap();
        assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
        let want0 = anti(2.0 * d);
        let got0 = setup.integral_bound(gamma, x, y, LowerLimit::Zero).unwrap();
        assert!((got0 - want0).abs() < 1e-6 * want0, "{got0} vs {want0}");
    }

    #[test]
    fn bounds_hold_on_random_functions() {
        let g = generate(FamilySpec::new(Family::Gasket, 2)).unwrap();
        let rm = resistance_matrix(&g).unwrap();
        let ctx = MetricContext::from_resistance(&g, &rm, true).unwrap();
        let profile = fitted_power_profile(&ctx, gasket_resistance_volume_exponent(), 1.0).unwrap();
        let setup = GarsiaSetup::new(&ctx, &profile).unwrap();
        let n = g.num_vertices();
        for k in 0..20 {
            let f: Vec<f64> = (0..n).map(|x| ((x * 31 + k * 17) % 23) as f64 / 7.0).collect();
            let gamma = setup.gamma(&f).unwrap();
            for x in 0..n {
                for y in x + 1..n {
                    let b = setup.bound(gamma, x, y).unwrap();
                    let i0 = setup.integral_bound(gamma, x, y, LowerLimit::D0).unwrap();
                    let iz = setup.integral_bound(gamma, x, y, LowerLimit::Zero).unwrap();
                    assert!((f[x] - f[y]).abs() <= b + 1e-9);
                    assert!(b <= i0 * (1.0 + 1e-6));
                    assert!(i0 <= iz);
                }
            }
        }
    }

    #[test]
    fn all_pair_integrals_match_single_pairs() {
        let g = generate(FamilySpec::new(Family::Gasket, 2)).unwrap();
        let rm = resistance_matrix(&g).unwrap();
        let ctx = MetricContext::from_resistance(&g, &rm, true).unwrap();
        let profile = fitted_power_profile(&ctx, gasket_resistance_volume_exponent(), 1.0).unwrap();
        let setup = GarsiaSetup::new(&ctx, &profile).unwrap();
        let n = g.num_vertices();
        let f: Vec<f64> = (0..n).map(|x| (x as f64).cos()).collect();
        let gamma = setup.gamma(&f).unwrap();
        for lower in [LowerLimit::D0, LowerLimit::Zero] {
            let all = setup.integral_bounds(gamma, lower).unwrap();
            for x in 0..n {
                assert_eq!(all[x * n + x], 0.0);
                for y in (0..n).filter(|&y| y != x) {
                    assert_eq!(all[x * n + y], setup.integral_bound(gamma, x, y, lower).unwrap());
                }
            }
        }
    }
}
