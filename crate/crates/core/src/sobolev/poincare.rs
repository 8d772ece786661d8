use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::addressing::{build_lattice, LatticeGraph};
use crate::error::{Error, Result};
use crate::harmonic::graph_energy;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub m: usize,
    pub n: usize,
    pub vertices: usize,
    /// `max Var / E` over nonconstant functions.
    pub constant: f64,
    /// Smallest nonzero eigenvalue of `W^(-1/2) L W^(-1/2)`.
    pub lambda: f64,
    /// `|A x - lambda x|` for the unit eigenvector.
    pub residual: f64,
    /// `Var / E` evaluated directly on the extremizer.
    pub attained: f64,
    #[serde(skip)]
    pub extremizer: Vec<f64>,
}

/// `Var` with respect to the vertex weights `nu_hat` (total mass 1).
pub fn variance(lattice: &LatticeGraph, f: &[f64]) -> f64 {
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for (v, x) in f.iter().enumerate() {
        let w = lattice.weight_f64(v);
        s1 += w * x;
        s2 += w * x * x;
    }
    s2 - s1 * s1
}

/// `Var(f) / E(f)`, or `None` for constants.
pub fn poincare_ratio(lattice: &LatticeGraph, f: &[f64]) -> Option<f64> {
    let e = graph_energy(lattice, f);
    if e <= 0.0 {
        None
    } else {
        Some(variance(lattice, f) / e)
    }
}

/// Energy matrix `L` with `f^T L f = E^(m)(f)`.
pub fn energy_matrix(lattice: &LatticeGraph) -> DMatrix<f64> {
    let nv = lattice.vertex_count();
    let n = lattice.arity();
    let scale = (5.0f64 / 3.0).powi(lattice.level() as i32) / 2.0;
    let mut l = DMatrix::<f64>::zeros(nv, nv);
    for e in lattice.edges() {
        let mut w = scale;
        if n > 1 {
            for (b, &c) in lattice.coord_ids(e.src).iter().enumerate() {
                if b != e.axis {
                    w *= lattice.weight_1d_f64(c);
                }
            }
        }
        l[(e.src, e.src)] += w;
        l[(e.dst, e.dst)] += w;
        l[(e.src, e.dst)] -= w;
        l[(e.dst, e.src)] -= w;
    }
    l
}

/// Optimal discrete Poincare constant on `V_{0,m}` of `S0^n`.
pub fn poincare_estimate(m: usize, n: usize, budget: u128) -> Result<PoincareReport> {
    let lattice = build_lattice(m, n, budget)?;
    let nv = lattice.vertex_count();
    Error::check_budget("dense Poincare matrix", (nv as u128) * (nv as u128), budget)?;
    let l = energy_matrix(&lattice);
    let s: Vec<f64> = (0..nv).map(|v| 1.0 / lattice.weight_f64(v).sqrt()).collect();
    let a = DMatrix::from_fn(nv, nv, |i, j| s[i] * l[(i, j)] * s[j]);
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let k = order[1];
    let lambda = eig.eigenvalues[k];
    if !(lambda > 0.0) {
        return Err(Error::Internal(format!("nonpositive second eigenvalue {lambda}")));
    }
    let x = eig.eigenvectors.column(k).into_owned();
    let residual = (&a * &x - &x * lambda).norm();
    let f: Vec<f64> = (0..nv).map(|v| s[v] * x[v]).collect();
    let attained = poincare_ratio(&lattice, &f).unwrap_or(0.0);
    Ok(PoincareReport { m, n, vertices: nv, constant: 1.0 / lambda, lambda, residual, attained, extremizer: f })
}
