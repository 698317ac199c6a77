//! Volume growth in the resistance metric and the growth exponents.

use serde::Serialize;

use super::stats::{least_squares, LineFit};
use crate::error::{Error, Result};
use crate::garsia::MetricContext;
use crate::graphs::{all_pairs_graph_distance, generate, Family, FamilySpec};
use crate::resistance::resistance_matrix;

/// Per-level constants may differ by at most this factor.
pub const UVD_SPREAD_LIMIT: f64 = 2.0;

#[derive(Clone, Debug, Serialize)]
pub struct UvdLevel {
    pub level: u32,
    pub num_vertices: usize,
    pub total_mass: f64,
    pub r0: f64,
    pub r_diam: f64,
    /// Realized resistances in `[r0, r_diam]`, ascending.
    pub radii: Vec<f64>,
    /// `min_x mu(B(x, r))` at each radius.
    pub min_volumes: Vec<f64>,
    /// `min_r min_volume(r) / v(r)` on this level.
    pub c1: f64,
    /// `m / v(r_diam)` on this level.
    pub c2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UvdReport {
    pub family: Family,
    /// `v(r) = r^alpha`.
    pub alpha: f64,
    pub levels: Vec<UvdLevel>,
    pub c1: f64,
    pub c2: f64,
    /// Doubling constant `sup v(2r) / v(r)`.
    pub c3: f64,
    pub c1_spread: f64,
    pub c2_spread: f64,
    pub level_uniform: bool,
    pub pass: bool,
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let hi = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Checks uniform volume growth with `v(r) = r^alpha` in the (unscaled)
/// resistance metric over the given levels.
pub fn check_uvd(family: Family, levels: &[u32], alpha: f64) -> Result<UvdReport> {
    if levels.is_empty() {
        return Err(Error::InsufficientData("no levels given".into()));
    }
    let v = |r: f64| r.powf(alpha);
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let g = generate(FamilySpec::new(family, level))?;
        let rm = resistance_matrix(&g)?;
        let ctx = MetricContext::from_resistance(&g, &rm, false)?;
        let balls = ctx.min_ball_volumes();
        let c1 = balls
            .iter()
            .map(|b| b.min_volume / v(b.radius))
            .fold(f64::INFINITY, f64::min);
        out.push(UvdLevel {
            level,
            num_vertices: g.num_vertices(),
            total_mass: g.total_mass(),
            r0: rm.min_distance(),
            r_diam: rm.diameter(),
            radii: balls.iter().map(|b| b.radius).collect(),
            min_volumes: balls.iter().map(|b| b.min_volume).collect(),
            c1,
            c2: g.total_mass() / v(rm.diameter()),
        });
    }
    let c1 = out.iter().map(|l| l.c1).fold(f64::INFINITY, f64::min);
    let c2 = out.iter().map(|l| l.c2).fold(0.0, f64::max);
    let c1_spread = spread(out.iter().map(|l| l.c1));
    let c2_spread = spread(out.iter().map(|l| l.c2));
    let level_uniform = c1_spread <= UVD_SPREAD_LIMIT && c2_spread <= UVD_SPREAD_LIMIT;
    Ok(UvdReport {
        family,
        alpha,
        levels: out,
        c1,
        c2,
        c3: 2f64.powf(alpha),
        c1_spread,
        c2_spread,
        level_uniform,
        pass: c1 > 0.0 && c1.is_finite() && c2.is_finite() && level_uniform,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentReport {
    pub family: Family,
    pub levels: Vec<u32>,
    /// Hop diameter per level.
    pub graph_diameter: Vec<usize>,
    pub total_mass: Vec<f64>,
    pub r_diam: Vec<f64>,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub volume_fit: LineFit,
    pub resistance_fit: LineFit,
}

/// Growth exponents from whole-graph scales: `alpha` is the slope of
/// `ln m(G_i)` against `ln diam(G_i)` in the hop metric and `beta - alpha`
/// the slope of `ln r(G_i)` against the same, both pooled over levels.
pub fn estimate_exponents(family: Family, levels: &[u32]) -> Result<ExponentReport> {
    if levels.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 levels, got {}",
            levels.len()
        )));
    }
    let mut diam = Vec::new();
    let mut mass = Vec::new();
    let mut r = Vec::new();
    for &level in levels {
        let g = generate(FamilySpec::new(family, level))?;
        let rm = resistance_matrix(&g)?;
        diam.push(*all_pairs_graph_distance(&g).iter().max().expect("nonempty"));
        mass.push(g.total_mass());
        r.push(rm.diameter());
    }
    let ld: Vec<f64> = diam.iter().map(|&d| (d as f64).ln()).collect();
    let lm: Vec<f64> = mass.iter().map(|m| m.ln()).collect();
    let lr: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    let fail = || Error::InsufficientData("levels share one diameter".into());
    let volume_fit = least_squares(&ld, &lm).ok_or_else(fail)?;
    let resistance_fit = least_squares(&ld, &lr).ok_or_else(fail)?;
    Ok(ExponentReport {
        family,
        levels: levels.to_vec(),
        graph_diameter: diam,
        total_mass: mass,
        r_diam: r,
        alpha_hat: volume_fit.slope,
        beta_hat: volume_fit.slope + resistance_fit.slope,
        volume_fit,
        resistance_fit,
    })
}

/// `v(r) = r^alpha` exponents used for each family.
pub fn default_volume_exponent(family: Family) -> f64 {
    match family {
        Family::Path => 1.0,
        Family::Vicsek => 5f64.ln() / 3f64.ln(),
        Family::Gasket => 3f64.ln() / (5.0f64 / 3.0).ln(),
        // d_f / (d_w - d_f) with the estimate rho ~ 1.25
        Family::Carpet | Family::WiredCarpet => 8f64.ln() / 1.25f64.ln(),
    }
}
