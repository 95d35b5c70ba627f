//! Brute-force validation of the analytic eigensystem.
//!
//! The sector Hamiltonian is assembled directly from the hopping rule in the
//! lexicographic ket basis and diagonalized densely; the analytic spectrum
//! and eigenvectors are then checked against it.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, BasisKet, ChainConfig, EigenLabel};

pub const EIGENVALUE_REL_TOL: f64 = 1e-9;
pub const VECTOR_RESIDUAL_TOL: f64 = 1e-9;
pub const PROJECTOR_RESIDUAL_TOL: f64 = 1e-8;
/// Eigenvalues closer than this fraction of the spectral range form one
/// degenerate cluster.
pub const CLUSTER_REL_TOL: f64 = 1e-8;

/// Hamiltonian of one excitation sector in the canonical ket basis.
#[derive(Debug, Clone)]
pub struct SectorMatrix {
    pub n_atoms: usize,
    pub m: usize,
    pub basis: Vec<BasisKet>,
    pub entries: DMatrix<f64>,
}

impl SectorMatrix {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

pub fn build_sector_hamiltonian(cfg: &ChainConfig, m: usize) -> Result<SectorMatrix> {
    let n = cfg.n_atoms();
    let basis = model::sector_kets(n, m)?;
    let index: HashMap<&[usize], usize> =
        basis.iter().enumerate().map(|(i, b)| (b.k(), i)).collect();
    let dim = basis.len();
    let mut h = DMatrix::from_diagonal_element(dim, dim, m as f64 * cfg.omega0());

    // S_i^+ S_j^- with |i - j| = 1 moves one excitation to an empty neighbour;
    // order is preserved because the target site lies between the neighbours.
    let mut moved = Vec::with_capacity(m);
    for (col, ket) in basis.iter().enumerate() {
        let occupied = ket.k();
        for (slot, &site) in occupied.iter().enumerate() {
            for target in [site.wrapping_sub(1), site + 1] {
                if target == 0 || target > n || occupied.contains(&target) {
                    continue;
                }
                moved.clear();
                moved.extend_from_slice(occupied);
                moved[slot] = target;
                let row = index[moved.as_slice()];
                h[(row, col)] = cfg.omega_coupling();
            }
        }
    }
    Ok(SectorMatrix {
        n_atoms: n,
        m,
        basis,
        entries: h,
    })
}

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn diagonalize(sector: &SectorMatrix) -> Result<Eigensystem> {
    let dim = sector.dimension();
    let h = &sector.entries;
    let asymmetry = (h - h.transpose()).amax();
    if asymmetry > 1e-14 * h.amax().max(1.0) {
        return Err(Error::Eigensolver {
            dimension: dim,
            reason: format!("matrix is not symmetric (max |H - H^T| = {asymmetry:e})"),
        });
    }
    let eig =
        SymmetricEigen::try_new(h.clone(), f64::EPSILON, 100 * dim.max(10)).ok_or_else(|| {
            Error::Eigensolver {
                dimension: dim,
                reason: format!(
                    "no convergence (max |H_ij| = {:e}, trace = {:e})",
                    h.amax(),
                    h.trace()
                ),
            }
        })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigensystem { values, vectors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFailure {
    pub label: String,
    pub check: String,
    pub residual: f64,
}

/// Outcome of comparing the analytic sector against dense diagonalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: usize,
    pub m: usize,
    pub dimension: usize,
    pub max_eigenvalue_residual: f64,
    pub max_vector_residual: f64,
    pub max_projector_residual: f64,
    pub status: Status,
    pub failures: Vec<OracleFailure>,
}

pub fn verify_analytic(cfg: &ChainConfig, m: usize) -> Result<OracleReport> {
    verify_analytic_with(cfg, m, |label, basis| {
        let norm = (2.0 / (cfg.n_atoms() + 1) as f64).powf(m as f64 / 2.0);
        basis
            .iter()
            .map(|ket| Ok(norm * model::coefficient_raw(cfg, label, ket.k())?))
            .collect()
    })
}

/// [`verify_analytic`] with a caller-supplied source of eigenvector
/// amplitudes, ordered like `basis`.
pub fn verify_analytic_with<F>(cfg: &ChainConfig, m: usize, amplitudes: F) -> Result<OracleReport>
where
    F: Fn(&EigenLabel, &[BasisKet]) -> Result<Vec<f64>>,
{
    let sector = build_sector_hamiltonian(cfg, m)?;
    let numeric = diagonalize(&sector)?;
    let labels = model::sector_labels(cfg.n_atoms(), m)?;
    let mut failures = Vec::new();

    let mut analytic: Vec<(f64, &EigenLabel)> = labels
        .iter()
        .map(|l| Ok((model::eigenvalue(cfg, l)?, l)))
        .collect::<Result<_>>()?;
    analytic.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut max_eigenvalue_residual: f64 = 0.0;
    for (&(e, label), &lambda) in analytic.iter().zip(&numeric.values) {
        let r = (e - lambda).abs() / lambda.abs().max(1.0);
        max_eigenvalue_residual = max_eigenvalue_residual.max(r);
        if r > EIGENVALUE_REL_TOL {
            failures.push(OracleFailure {
                label: label.to_string(),
                check: "eigenvalue".into(),
                residual: r,
            });
        }
    }

    let clusters = cluster(&numeric.values);
    let mut max_vector_residual: f64 = 0.0;
    let mut max_projector_residual: f64 = 0.0;
    for &(e, label) in &analytic {
        let c = DVector::from_vec(amplitudes(label, &sector.basis)?);
        let r = (&sector.entries * &c - &c * e).norm();
        max_vector_residual = max_vector_residual.max(r);
        if r > VECTOR_RESIDUAL_TOL {
            failures.push(OracleFailure {
                label: label.to_string(),
                check: "vector_residual".into(),
                residual: r,
            });
        }

        let nearest = nearest_index(&numeric.values, e);
        let (lo, hi) = clusters[nearest];
        let basis = numeric.vectors.columns(lo, hi - lo);
        let projected = basis * (basis.transpose() * &c);
        let p = (&c - projected).norm();
        max_projector_residual = max_projector_residual.max(p);
        if p > PROJECTOR_RESIDUAL_TOL {
            failures.push(OracleFailure {
                label: label.to_string(),
                check: "projector_residual".into(),
                residual: p,
            });
        }
    }

    Ok(OracleReport {
        n: cfg.n_atoms(),
        m,
        dimension: sector.dimension(),
        max_eigenvalue_residual,
        max_vector_residual,
        max_projector_residual,
        status: if failures.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        failures,
    })
}

/// For each sorted eigenvalue, the half-open index range of its cluster.
fn cluster(values: &[f64]) -> Vec<(usize, usize)> {
    let range = match (values.first(), values.last()) {
        (Some(a), Some(b)) => b - a,
        _ => return Vec::new(),
    };
    let tol = CLUSTER_REL_TOL * range;
    let mut spans = vec![(0, 0); values.len()];
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            spans[start..i].fill((start, i));
            start = i;
        }
    }
    spans
}

fn nearest_index(sorted: &[f64], x: f64) -> usize {
    (0..sorted.len())
        .min_by(|&a, &b| (sorted[a] - x).abs().total_cmp(&(sorted[b] - x).abs()))
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(n: usize, omega0: f64, omega: f64) -> ChainConfig {
        ChainConfig::new(n, 0.0, 0.0)
            .unwrap()
            .with_frequencies(omega0, omega)
            .unwrap()
    }

    #[test]
    fn two_atom_block() {
        let s = build_sector_hamiltonian(&cfg(2, 5.0, 0.7), 1).unwrap();
        assert_eq!(
            s.entries,
            DMatrix::from_row_slice(2, 2, &[5.0, 0.7, 0.7, 5.0])
        );
        let e = diagonalize(&s).unwrap();
        assert!((e.values[0] - 4.3).abs() < 1e-13);
        assert!((e.values[1] - 5.7).abs() < 1e-13);
    }

    #[test]
    fn three_atom_one_excitation_is_tridiagonal() {
        let s = build_sector_hamiltonian(&cfg(3, 2.0, 1.0), 1).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        assert_eq!(s.entries, want);
        let e = diagonalize(&s).unwrap();
        let mut analytic: Vec<f64> = (1..=3)
            .map(|g| 2.0 + 2.0 * (g as f64 * PI / 4.0).cos())
            .collect();
        analytic.sort_by(f64::total_cmp);
        for (a, b) in analytic.iter().zip(&e.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn three_atom_two_excitation_hops() {
        let s = build_sector_hamiltonian(&cfg(3, 1.0, 0.5), 2).unwrap();
        let k: Vec<&[usize]> = s.basis.iter().map(|b| b.k()).collect();
        assert_eq!(k, vec![&[1, 2][..], &[1, 3], &[2, 3]]);
        assert_eq!(s.entries[(0, 1)], 0.5);
        assert_eq!(s.entries[(1, 2)], 0.5);
        assert_eq!(s.entries[(0, 2)], 0.0);
        for i in 0..3 {
            assert_eq!(s.entries[(i, i)], 2.0);
        }
    }

    #[test]
    fn ground_sector() {
        let s = build_sector_hamiltonian(&cfg(4, 100.0, 1.0), 0).unwrap();
        assert_eq!(s.dimension(), 1);
        assert_eq!(diagonalize(&s).unwrap().values, vec![0.0]);
        let report = verify_analytic(&cfg(4, 100.0, 1.0), 0).unwrap();
        assert_eq!(report.status, Status::Pass);
    }

    #[test]
    fn sector_structure_and_trace() {
        for n in 1..=10 {
            for m in 0..=3.min(n) {
                let c = cfg(n, 100.0, 1.0);
                let s = build_sector_hamiltonian(&c, m).unwrap();
                let dim = model::binomial(n, m).unwrap();
                assert_eq!(s.dimension(), dim);
                assert_eq!(s.entries, s.entries.transpose());
                for i in 0..dim {
                    assert_eq!(s.entries[(i, i)], m as f64 * 100.0);
                    for j in 0..dim {
                        if i == j {
                            continue;
                        }
                        let (a, b) = (s.basis[i].k(), s.basis[j].k());
                        let moved: Vec<(usize, usize)> = a
                            .iter()
                            .zip(b)
                            .filter(|(x, y)| x != y)
                            .map(|(&x, &y)| (x, y))
                            .collect();
                        let adjacent = moved.len() == 1 && moved[0].0.abs_diff(moved[0].1) == 1;
                        let want = if adjacent { 1.0 } else { 0.0 };
                        assert_eq!(s.entries[(i, j)], want, "N={n} {:?} {:?}", a, b);
                    }
                }
                let e = diagonalize(&s).unwrap();
                let sum: f64 = e.values.iter().sum();
                assert!((sum - dim as f64 * m as f64 * 100.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eigenpairs_satisfy_residual_bound() {
        let s = build_sector_hamiltonian(&cfg(8, 100.0, 1.0), 3).unwrap();
        let e = diagonalize(&s).unwrap();
        let norm = s.entries.norm();
        for (i, &l) in e.values.iter().enumerate() {
            let v = e.vectors.column(i);
            assert!((&s.entries * v - v * l).norm() <= 1e-10 * norm);
        }
        let gram = e.vectors.transpose() * &e.vectors;
        assert!((gram - DMatrix::identity(56, 56)).amax() < 1e-10);
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let mut s = build_sector_hamiltonian(&cfg(3, 1.0, 1.0), 1).unwrap();
        s.entries[(0, 1)] = 2.0;
        assert!(matches!(diagonalize(&s), Err(Error::Eigensolver { .. })));
    }

    #[test]
    fn small_sectors_pass() {
        for (n, m) in [(5, 1), (6, 2)] {
            let r = verify_analytic(&cfg(n, 100.0, 1.0), m).unwrap();
            assert_eq!(r.status, Status::Pass, "{r:?}");
            assert!(r.max_vector_residual < 1e-9);
        }
    }

    #[test]
    fn corrupted_coefficient_is_named() {
        let c = cfg(2, 100.0, 1.0);
        let r = verify_analytic_with(&c, 1, |label, basis| {
            let mut v: Vec<f64> = basis
                .iter()
                .map(|k| c.one_photon_amplitude(label.g()[0], k.k()[0]))
                .collect();
            if label.g() == [1] {
                v[0] *= 1.1;
            }
            Ok(v)
        })
        .unwrap();
        assert_eq!(r.status, Status::Fail);
        assert!(!r.failures.is_empty());
        assert!(r.failures.iter().all(|f| f.label == "(1)"));
    }

    #[test]
    fn clusters_group_degenerate_values() {
        let spans = cluster(&[0.0, 1.0, 1.0 + 1e-12, 2.0]);
        assert_eq!(spans, vec![(0, 1), (1, 3), (1, 3), (3, 4)]);
    }
}
