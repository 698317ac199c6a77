//! Grounded graph Laplacian solves.
//!
//! The Laplacian of a connected graph is singular with kernel the constants;
//! fixing the potential of one ground vertex (the last id) leaves a symmetric
//! positive definite system. Small graphs are factored once with a dense
//! Cholesky decomposition and every query reuses the factor; larger graphs
//! fall back to Jacobi-preconditioned conjugate gradients.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graphs::WeightedGraph;

/// Above this many vertices the solver switches to conjugate gradients.
pub const DENSE_LIMIT: usize = 5_000;
/// Relative residual target for the iterative path.
pub const CG_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
enum Backend {
    Dense(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Iterative,
}

#[derive(Clone, Debug)]
pub struct GroundedLaplacian<'g> {
    graph: &'g WeightedGraph,
    backend: Backend,
}

impl<'g> GroundedLaplacian<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Result<Self> {
        Self::with_dense_limit(graph, DENSE_LIMIT)
    }

    pub fn with_dense_limit(graph: &'g WeightedGraph, dense_limit: usize) -> Result<Self> {
        let backend = if graph.num_vertices() <= dense_limit {
            Backend::Dense(dense_factor(graph)?)
        } else {
            Backend::Iterative
        };
        Ok(GroundedLaplacian { graph, backend })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn ground(&self) -> usize {
        self.graph.num_vertices() - 1
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.backend, Backend::Dense(_))
    }

    /// Potential `v` with `v[ground] = 0` solving `L v = current`.
    /// `current` must sum to zero.
    pub fn potential(&self, current: &[f64]) -> Result<Vec<f64>> {
        let n = self.graph.num_vertices();
        if current.len() != n {
            return Err(Error::MissingValue {
                expected: n,
                got: current.len(),
            });
        }
        let rhs = &current[..n - 1];
        let mut v = match &self.backend {
            Backend::Dense(chol) => {
                let b = DVector::from_column_slice(rhs);
                chol.solve(&b).as_slice().to_vec()
            }
            Backend::Iterative => conjugate_gradient(self.graph, rhs)?,
        };
        v.push(0.0);
        Ok(v)
    }

    /// Inverse of the reduced Laplacian, padded with a zero row and column
    /// for the ground. Dense backend only.
    pub fn green_matrix(&self) -> Result<DMatrix<f64>> {
        let Backend::Dense(chol) = &self.backend else {
            return Err(Error::SolverFailure(
                "green matrix requested from iterative backend".into(),
            ));
        };
        let n = self.graph.num_vertices();
        let inv = chol.inverse();
        let mut out = DMatrix::zeros(n, n);
        out.view_mut((0, 0), (n - 1, n - 1)).copy_from(&inv);
        Ok(out)
    }
}

fn dense_factor(g: &WeightedGraph) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let m = g.num_vertices() - 1;
    let mut a = DMatrix::<f64>::zeros(m, m);
    for x in 0..m {
        a[(x, x)] = g.measure(x);
        for &(y, w) in g.neighbors(x) {
            if y < m {
                a[(x, y)] = -w;
            }
        }
    }
    a.cholesky()
        .ok_or_else(|| Error::SolverFailure("grounded Laplacian is not positive definite".into()))
}

/// Reduced Laplacian product, vertices `0..n-1` (ground excluded).
fn reduced_apply(g: &WeightedGraph, v: &[f64], out: &mut [f64]) {
    let m = v.len();
    for x in 0..m {
        let mut s = g.measure(x) * v[x];
        for &(y, w) in g.neighbors(x) {
            if y < m {
                s -= w * v[y];
            }
        }
        out[x] = s;
    }
}

fn conjugate_gradient(g: &WeightedGraph, b: &[f64]) -> Result<Vec<f64>> {
    let m = b.len();
    let b_norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = vec![0.0; m];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = (0..m).map(|i| 1.0 / g.measure(i)).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; m];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let max_iter = 20 * m + 1_000;
    for _ in 0..max_iter {
        reduced_apply(g, &p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(Error::SolverFailure("conjugate gradient breakdown".into()));
        }
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r_norm <= CG_TOLERANCE * b_norm {
            return Ok(x);
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure(format!(
        "conjugate gradient did not reach {CG_TOLERANCE:e} in {max_iter} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{generate, Family, FamilySpec};

    #[test]
    fn dense_and_iterative_agree() {
        let g = generate(FamilySpec::new(Family::Gasket, 3)).unwrap();
        let dense = GroundedLaplacian::new(&g).unwrap();
        let iter = GroundedLaplacian::with_dense_limit(&g, 0).unwrap();
        assert!(dense.is_dense() && !iter.is_dense());
        let mut current = vec![0.0; g.num_vertices()];
        current[0] = 1.0;
        current[7] = -1.0;
        let a = dense.potential(&current).unwrap();
        let b = iter.potential(&current).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn green_matrix_inverts() {
        let g = generate(FamilySpec::new(Family::Vicsek, 1)).unwrap();
        let lap = GroundedLaplacian::new(&g).unwrap();
        let gm = lap.green_matrix().unwrap();
        let n = g.num_vertices();
        let mut col = vec![0.0; n - 1];
        let mut out = vec![0.0; n - 1];
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                col[i] = gm[(i, j)];
            }
            reduced_apply(&g, &col, &mut out);
            for i in 0..n - 1 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((out[i] - want).abs() < 1e-10);
            }
        }
        assert!(GroundedLaplacian::with_dense_limit(&g, 0)
            .unwrap()
            .green_matrix()
            .is_err());
    }
}
