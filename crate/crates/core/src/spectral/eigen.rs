//! Symmetric eigendecomposition, eigenportfolios, explained volatility,
//! and the inverse participation ratio.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::returns::CorrelationMatrix;

/// Sorted eigendecomposition of a symmetric matrix: eigenvalues
/// ascending, orthonormal eigenvectors as columns, signs canonicalized
/// so each vector's first non-negligible component is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    labels: Vec<String>,
    eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` is the unit eigenvector paired with
    /// `eigenvalues[j]`, components aligned with `labels`.
    eigenvectors: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn new(
        labels: Vec<String>,
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let m = labels.len();
        if eigenvalues.len() != m || eigenvectors.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: eigenvalues.len().min(eigenvectors.len()),
            });
        }
        if eigenvectors.iter().any(|v| v.len() != m) {
            return Err(Error::Contract("ragged eigenvector array".into()));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Contract("eigenvalues must be ascending".into()));
        }
        Ok(Self {
            labels,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector paired with the `j`-th smallest eigenvalue.
    pub fn eigenvector(&self, j: usize) -> &[f64] {
        &self.eigenvectors[j]
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

// Flip each column so its first component over the noise floor is
// positive. Degenerate eigenspaces then get a reproducible basis.
fn canonicalize_sign(v: &mut [f64]) {
    let lead = v.iter().find(|x| x.abs() > 1e-12);
    if let Some(&x) = lead {
        if x < 0.0 {
            for c in v.iter_mut() {
                *c = -*c;
            }
        }
    }
}

/// Eigendecompose a symmetric matrix with explicit labels. The
/// symmetry check guards oracle paths that bypass
/// [`CorrelationMatrix`].
pub fn eig_sym_matrix(m: &DMatrix<f64>, labels: &[String]) -> Result<EigenSystem> {
    if m.nrows() != m.ncols() {
        return Err(Error::Contract("matrix not square".into()));
    }
    let asym = (0..m.nrows())
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)] - m[(j, i)]).abs())
        .fold(0.0f64, f64::max);
    if asym > 1e-9 {
        return Err(Error::Contract(format!(
            "matrix asymmetry {asym:.3e} exceeds 1e-9"
        )));
    }
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    // stable ascending order: ties keep nalgebra's output order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    for v in &mut eigenvectors {
        canonicalize_sign(v);
    }
    EigenSystem::new(labels.to_vec(), eigenvalues, eigenvectors)
}

/// Eigendecompose a correlation matrix.
pub fn eig_sym(corr: &CorrelationMatrix) -> Result<EigenSystem> {
    eig_sym_matrix(&corr.to_matrix(), corr.labels())
}

/// Portfolio weights of the `rank`-th smallest eigenvalue; rank 0 is the
/// minimum-volatility normalized portfolio.
pub fn eigenportfolio(es: &EigenSystem, rank: usize) -> Result<Vec<f64>> {
    if rank >= es.dim() {
        return Err(Error::RankOutOfRange {
            rank,
            m: es.dim(),
        });
    }
    Ok(es.eigenvector(rank).to_vec())
}

/// Cumulative explained-volatility fraction by descending eigenvalue
/// rank: `φ(j) = Σ_{k≤j} λ_(k) / Σ λ` with λ_(0) the largest.
pub fn cumulative_volatility(es: &EigenSystem) -> Vec<f64> {
    let total: f64 = es.eigenvalues().iter().sum();
    let mut acc = 0.0;
    es.eigenvalues()
        .iter()
        .rev()
        .map(|l| {
            acc += l;
            acc / total
        })
        .collect()
}

/// Raw inverse participation ratio per eigenvector, `1 / Σ_k v_k⁴`,
/// aligned with the ascending eigenvalue order. 1 marks a fully
/// localized vector, M a uniform one.
pub fn ipr_raw(es: &EigenSystem) -> Vec<f64> {
    (0..es.dim())
        .map(|j| {
            let quartic: f64 = es.eigenvector(j).iter().map(|v| v.powi(4)).sum();
            1.0 / quartic
        })
        .collect()
}

/// Normalized participation ratio, raw divided by M, so values live in
/// `[1/M, 1]`: 1/M localized, 1 extended.
pub fn ipr(es: &EigenSystem) -> Vec<f64> {
    let m = es.dim() as f64;
    ipr_raw(es).into_iter().map(|d| d / m).collect()
}
