//! Distance metrics between assets.
//!
//! The Euclidean metric is the distance between standardized return
//! vectors, `√(2(1 − Λ_nm))`. The spectral metric compares
//! eigenvalue-weighted eigenvector loading profiles,
//! `√(Σ_k λ_k² (⟨e_n|k⟩ − ⟨e_m|k⟩)²)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::returns::CorrelationMatrix;
use crate::spectral::EigenSystem;

/// Symmetric, zero-diagonal, nonnegative distance matrix over labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    d: DMatrix<f64>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, d: DMatrix<f64>) -> Result<Self> {
        if d.nrows() != d.ncols() || d.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: d.nrows(),
            });
        }
        for i in 0..d.nrows() {
            if d[(i, i)] != 0.0 {
                return Err(Error::Contract(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                if d[(i, j)] != d[(j, i)] {
                    return Err(Error::Contract(format!("asymmetry at ({i},{j})")));
                }
                if d[(i, j)] < 0.0 {
                    return Err(Error::Contract(format!("negative distance at ({i},{j})")));
                }
            }
        }
        Ok(Self { labels, d })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.d
    }
}

/// Euclidean distance between standardized return vectors:
/// `d_nm = √(2 (1 − Λ_nm))`, in `[0, 2]`.
pub fn euclid_dist(corr: &CorrelationMatrix) -> Result<DistanceMatrix> {
    let n = corr.dim();
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (2.0 * (1.0 - corr.get(i, j))).max(0.0).sqrt()
        }
    });
    DistanceMatrix::new(corr.labels().to_vec(), d)
}

/// Spectral distance between eigenvalue-weighted loading profiles.
pub fn spectral_dist(es: &EigenSystem) -> Result<DistanceMatrix> {
    let m = es.dim();
    let d = DMatrix::from_fn(m, m, |a, b| {
        if a == b {
            return 0.0;
        }
        let mut acc = 0.0;
        for k in 0..m {
            let l = es.eigenvalues()[k];
            let diff = es.eigenvector(k)[a] - es.eigenvector(k)[b];
            acc += l * l * diff * diff;
        }
        acc.sqrt()
    });
    DistanceMatrix::new(es.labels().to_vec(), d)
}
