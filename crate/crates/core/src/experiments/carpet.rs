//! Carpet resistance scaling and the effect of wiring the boundary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{generate, wire_vertices, Family, FamilySpec, WeightedGraph};
use crate::resistance::{resistance_matrix, set_resistance};

/// Successive resistance ratios may differ by at most this factor.
pub const RATIO_SPREAD_LIMIT: f64 = 1.25;

#[derive(Clone, Debug, Serialize)]
pub struct CarpetReport {
    pub levels: Vec<u32>,
    /// Left-column to right-column resistance per level.
    pub resistances: Vec<f64>,
    /// `R_{i+1} / R_i`.
    pub ratios: Vec<f64>,
    /// Geometric mean of the ratios.
    pub rho_hat: f64,
    /// Largest ratio over smallest.
    pub ratio_spread: f64,
}

fn column(g: &WeightedGraph, right: bool) -> Result<Vec<usize>> {
    let xs: Vec<f64> = g
        .coords()
        .iter()
        .map(|c| c.map(|p| p[0]).ok_or_else(|| Error::Schema("carpet vertex without coordinates".into())))
        .collect::<Result<_>>()?;
    let target = if right {
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    } else {
        xs.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    Ok((0..xs.len()).filter(|&x| (xs[x] - target).abs() < 1e-12).collect())
}

/// Resistance between the left and right columns of the unwired carpet.
pub fn carpet_side_resistance(level: u32) -> Result<f64> {
    let g = generate(FamilySpec::new(Family::Carpet, level))?;
    set_resistance(&g, &column(&g, false)?, &column(&g, true)?)
}

/// Estimates the resistance growth factor `rho` from the side-to-side
/// resistances of consecutive carpet levels.
pub fn carpet_rho_estimate(levels: &[u32]) -> Result<CarpetReport> {
    if levels.len() < 2 {
        return Err(Error::InsufficientLevels {
            needed: 2,
            got: levels.len(),
        });
    }
    let resistances: Vec<f64> = levels
        .iter()
        .map(|&l| carpet_side_resistance(l))
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = resistances.windows(2).map(|w| w[1] / w[0]).collect();
    let rho_hat = ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64;
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(CarpetReport {
        levels: levels.to_vec(),
        resistances,
        ratios,
        rho_hat: rho_hat.exp(),
        ratio_spread: hi / lo,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WiringComparison {
    pub level: u32,
    pub pairs: usize,
    /// Largest `R_wired - R_unwired` over all pairs; at most 0 up to rounding.
    pub max_excess: f64,
    pub holds: bool,
}

/// Compares every pair's resistance before and after wiring the boundary.
pub fn compare_wired(level: u32) -> Result<WiringComparison> {
    let g = generate(FamilySpec::new(Family::Carpet, level))?;
    let q = wire_vertices(&g, &g.meta().boundary)?;
    let unwired = resistance_matrix(&g)?;
    let wired = resistance_matrix(&q.graph)?;
    let n = g.num_vertices();
    let mut max_excess = f64::NEG_INFINITY;
    for x in 0..n {
        for y in x + 1..n {
            let (a, b) = (q.map[x], q.map[y]);
            let rw = if a == b { 0.0 } else { wired.get(a, b) };
            max_excess = max_excess.max(rw - unwired.get(x, y));
        }
    }
    Ok(WiringComparison {
        level,
        pairs: n * (n - 1) / 2,
        max_excess,
        holds: max_excess <= 1e-10,
    })
}
