//! Standardized log-returns and the bootstrapped correlation ensemble.
//!
//! Prices become log-returns, log-returns are standardized per asset
//! (population convention: divide by the row length), and an ensemble of
//! correlation matrices is built by resampling contiguous windows with
//! replacement. Each window is re-standardized before the Gram product so
//! every sample is a true correlation matrix with an exact unit diagonal.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PriceMatrix;
use crate::{par, rng};

/// Symmetric correlation (or, for heavy-tailed benchmark controls, Gram)
/// matrix over labelled assets.
///
/// Matrices built from standardized data carry a unit diagonal and
/// off-diagonals in `[-1, 1]`; benchmark controls built from raw
/// heavy-tailed entries keep their natural scale and only promise
/// symmetry and positive semidefiniteness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    /// Wrap a matrix that must satisfy the full correlation contract:
    /// exact symmetry, unit diagonal within 1e-10, off-diagonals in
    /// `[-1, 1]` (with a 1e-12 rounding allowance, clamped).
    pub fn from_correlation(labels: Vec<String>, m: DMatrix<f64>) -> Result<Self> {
        Self::check_shape(&labels, &m)?;
        for i in 0..m.nrows() {
            if (m[(i, i)] - 1.0).abs() > 1e-10 {
                return Err(Error::Contract(format!(
                    "diagonal entry {} is {}, expected 1",
                    i,
                    m[(i, i)]
                )));
            }
            for j in 0..i {
                if m[(i, j)].abs() > 1.0 + 1e-12 {
                    return Err(Error::Contract(format!(
                        "off-diagonal ({i},{j}) = {} outside [-1, 1]",
                        m[(i, j)]
                    )));
                }
            }
        }
        Ok(Self::mirror(labels, m, true))
    }

    /// Wrap a symmetric Gram matrix without the unit-diagonal requirement.
    /// Used by benchmark ensembles whose entries are not standardized.
    pub fn from_gram(labels: Vec<String>, m: DMatrix<f64>) -> Result<Self> {
        Self::check_shape(&labels, &m)?;
        Ok(Self::mirror(labels, m, false))
    }

    fn check_shape(labels: &[String], m: &DMatrix<f64>) -> Result<()> {
        if m.nrows() != m.ncols() {
            return Err(Error::Contract(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if labels.len() != m.nrows() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: labels.len(),
            });
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
        Ok(())
    }

    // Store the lower triangle mirrored so Λ = Λᵀ holds bit-exactly.
    fn mirror(labels: Vec<String>, m: DMatrix<f64>, clamp_unit: bool) -> Self {
        let n = m.nrows();
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            values[i][i] = m[(i, i)];
            for j in 0..i {
                let mut v = 0.5 * (m[(i, j)] + m[(j, i)]);
                if clamp_unit {
                    v = v.clamp(-1.0, 1.0);
                }
                values[i][j] = v;
                values[j][i] = v;
            }
        }
        Self { labels, values }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Dense copy of the matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.values[i][j])
    }

    /// Elementwise mean of an ensemble. The mean of correlation matrices
    /// is again symmetric PSD with unit diagonal.
    pub fn ensemble_mean(members: &[CorrelationMatrix]) -> Result<CorrelationMatrix> {
        let first = members
            .first()
            .ok_or_else(|| Error::Argument("empty ensemble".into()))?;
        let n = first.dim();
        let mut acc = DMatrix::zeros(n, n);
        for m in members {
            if m.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: m.dim(),
                });
            }
            acc += m.to_matrix();
        }
        acc /= members.len() as f64;
        Ok(Self::mirror(first.labels.clone(), acc, false))
    }
}

/// Standardized log-return matrix `L` (assets x observations) with the
/// per-asset mean and population standard deviation that were removed.
#[derive(Debug, Clone)]
pub struct NormalizedReturns {
    labels: Vec<String>,
    l: DMatrix<f64>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl NormalizedReturns {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Per-asset means of the raw returns.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Per-asset population standard deviations of the raw returns.
    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn assets(&self) -> usize {
        self.l.nrows()
    }

    pub fn observations(&self) -> usize {
        self.l.ncols()
    }

    /// Re-wrap an already-standardized matrix (e.g. read back from disk).
    /// Rows must have mean 0 and standard deviation 1 within 1e-8.
    pub fn from_standardized(labels: Vec<String>, l: DMatrix<f64>) -> Result<Self> {
        if labels.len() != l.nrows() {
            return Err(Error::DimensionMismatch {
                expected: l.nrows(),
                actual: labels.len(),
            });
        }
        for (r, label) in labels.iter().enumerate() {
            let (mean, std) = row_moments(&l, r);
            if mean.abs() > 1e-8 || (std - 1.0).abs() > 1e-8 {
                return Err(Error::Contract(format!(
                    "row {label} not standardized: mean {mean:.3e}, std {std}"
                )));
            }
        }
        let m = l.nrows();
        Ok(Self {
            labels,
            l,
            means: vec![0.0; m],
            stds: vec![1.0; m],
        })
    }
}

/// Bootstrap resampling plan: window length, sample count, and run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub window: usize,
    pub samples: usize,
    pub seed: u64,
}

impl BootstrapSpec {
    fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::Argument(format!(
                "window must be >= 2, got {}",
                self.window
            )));
        }
        if self.samples < 1 {
            return Err(Error::Argument("samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// One resampled window: the re-standardized sub-matrix, its start
/// column, and how many degenerate draws were rejected to obtain it.
#[derive(Debug, Clone)]
pub struct BootstrapWindow {
    pub matrix: DMatrix<f64>,
    pub start: usize,
    pub rejected: u32,
}

/// A full bootstrap ensemble in sample order.
#[derive(Debug, Clone)]
pub struct BootstrapEnsemble {
    pub windows: Vec<BootstrapWindow>,
    /// Total degenerate windows rejected across all samples.
    pub rejected: u64,
}

/// Log-returns of a price matrix: element `(m, n)` is
/// `ln p[m][n+1] - ln p[m][n]`, one column fewer than the input.
pub fn log_returns(prices: &PriceMatrix) -> Result<DMatrix<f64>> {
    let p = prices.prices();
    if p.ncols() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: p.ncols(),
        });
    }
    let mut r = DMatrix::zeros(p.nrows(), p.ncols() - 1);
    for i in 0..p.nrows() {
        for j in 0..p.ncols() - 1 {
            let (a, b) = (p[(i, j)], p[(i, j + 1)]);
            if a <= 0.0 || b <= 0.0 {
                return Err(Error::Domain(format!(
                    "non-positive price for {} at column {}",
                    prices.symbols()[i],
                    j
                )));
            }
            r[(i, j)] = b.ln() - a.ln();
        }
    }
    Ok(r)
}

fn row_moments(m: &DMatrix<f64>, row: usize) -> (f64, f64) {
    let n = m.ncols() as f64;
    let mean = m.row(row).sum() / n;
    let var = m.row(row).iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Standardize each row to mean 0 and population standard deviation 1.
pub fn normalize(returns: &DMatrix<f64>, labels: &[String]) -> Result<NormalizedReturns> {
    if labels.len() != returns.nrows() {
        return Err(Error::DimensionMismatch {
            expected: returns.nrows(),
            actual: labels.len(),
        });
    }
    let mut l = returns.clone();
    let mut means = Vec::with_capacity(l.nrows());
    let mut stds = Vec::with_capacity(l.nrows());
    for r in 0..l.nrows() {
        let (mean, std) = row_moments(&l, r);
        if std <= 0.0 {
            return Err(Error::DegenerateAsset {
                symbol: labels[r].clone(),
            });
        }
        for c in 0..l.ncols() {
            l[(r, c)] = (l[(r, c)] - mean) / std;
        }
        means.push(mean);
        stds.push(std);
    }
    Ok(NormalizedReturns {
        labels: labels.to_vec(),
        l,
        means,
        stds,
    })
}

// Re-standardize the rows of a window in place. Returns the index of the
// first zero-variance row, if any.
fn standardize_window(w: &mut DMatrix<f64>) -> Option<usize> {
    for r in 0..w.nrows() {
        let (mean, std) = row_moments(w, r);
        if std <= 1e-12 {
            return Some(r);
        }
        for c in 0..w.ncols() {
            w[(r, c)] = (w[(r, c)] - mean) / std;
        }
    }
    None
}

const MAX_WINDOW_REJECTIONS: u32 = 10_000;

/// Draw bootstrap sample `index` of the plan: a uniformly chosen
/// contiguous window, re-standardized. Degenerate windows (an asset
/// constant across the window) are rejected and redrawn within the
/// sample's own RNG stream, so the result depends only on
/// `(returns, spec, index)`.
pub fn bootstrap_sample(
    returns: &NormalizedReturns,
    spec: &BootstrapSpec,
    index: u64,
) -> Result<BootstrapWindow> {
    spec.validate()?;
    let n = returns.observations();
    if spec.window > n {
        return Err(Error::InsufficientData {
            needed: spec.window,
            available: n,
        });
    }
    let mut rng = rng::member_rng(spec.seed, index);
    let max_start = n - spec.window;
    let mut rejected = 0u32;
    loop {
        let start = rng.random_range(0..=max_start);
        let mut w = DMatrix::zeros(returns.assets(), spec.window);
        w.copy_from(&returns.matrix().columns(start, spec.window));
        match standardize_window(&mut w) {
            None => {
                return Ok(BootstrapWindow {
                    matrix: w,
                    start,
                    rejected,
                });
            }
            Some(row) => {
                rejected += 1;
                if rejected >= MAX_WINDOW_REJECTIONS {
                    return Err(Error::DegenerateWindow {
                        symbol: returns.labels()[row].clone(),
                    });
                }
            }
        }
    }
}

/// The full bootstrap ensemble, generated member-by-member from
/// per-sample subseeds (parallel when the `parallel` feature is on,
/// bit-identical either way).
pub fn bootstrap_windows(
    returns: &NormalizedReturns,
    spec: &BootstrapSpec,
) -> Result<BootstrapEnsemble> {
    spec.validate()?;
    if spec.window > returns.observations() {
        return Err(Error::InsufficientData {
            needed: spec.window,
            available: returns.observations(),
        });
    }
    let samples = par::indexed_map(spec.samples, |i| bootstrap_sample(returns, spec, i as u64));
    let mut windows = Vec::with_capacity(spec.samples);
    let mut rejected = 0u64;
    for s in samples {
        let s = s?;
        rejected += u64::from(s.rejected);
        windows.push(s);
    }
    Ok(BootstrapEnsemble { windows, rejected })
}

/// Pearson correlation matrix of a multivariate sample: rows are
/// centered and scaled by their population standard deviation, then
/// `(1/n) L Lᵀ` is formed with the diagonal pinned to exactly 1.
pub fn correlation(sample: &DMatrix<f64>, labels: &[String]) -> Result<CorrelationMatrix> {
    if labels.len() != sample.nrows() {
        return Err(Error::DimensionMismatch {
            expected: sample.nrows(),
            actual: labels.len(),
        });
    }
    if sample.ncols() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: sample.ncols(),
        });
    }
    let mut l = sample.clone();
    if let Some(row) = standardize_window(&mut l) {
        return Err(Error::DegenerateWindow {
            symbol: labels[row].clone(),
        });
    }
    Ok(CorrelationMatrix {
        labels: labels.to_vec(),
        values: gram_rows(&l, true),
    })
}

/// `(1/n) L Lᵀ` without standardization; the benchmark path for raw
/// heavy-tailed controls.
pub fn gram(sample: &DMatrix<f64>, labels: &[String]) -> Result<CorrelationMatrix> {
    if labels.len() != sample.nrows() {
        return Err(Error::DimensionMismatch {
            expected: sample.nrows(),
            actual: labels.len(),
        });
    }
    Ok(CorrelationMatrix {
        labels: labels.to_vec(),
        values: gram_rows(sample, false),
    })
}

// Lower triangle of (1/n) L Lᵀ, mirrored for exact symmetry. When
// `unit_diag` is set the diagonal is written as exactly 1 and
// off-diagonals are clamped into [-1, 1] against last-bit rounding.
fn gram_rows(l: &DMatrix<f64>, unit_diag: bool) -> Vec<Vec<f64>> {
    let (m, n) = (l.nrows(), l.ncols());
    let inv_n = 1.0 / n as f64;
    let mut values = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let mut dot = 0.0;
            for k in 0..n {
                dot += l[(i, k)] * l[(j, k)];
            }
            let mut v = dot * inv_n;
            if unit_diag {
                v = if i == j { 1.0 } else { v.clamp(-1.0, 1.0) };
            }
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    values
}
