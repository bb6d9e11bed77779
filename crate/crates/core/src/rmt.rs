//! Benchmark random-matrix ensembles and the Marčenko–Pastur law.
//!
//! Two controls bracket real market data. The Gaussian control draws
//! i.i.d. standard normals, standardizes each row, and forms the sample
//! correlation — the Wishart ensemble whose eigenvalue density follows
//! the Marčenko–Pastur law. The heavy-tailed control fills the
//! standardized-return slots with raw Cauchy variates and skips the
//! per-row standardization: the Cauchy family is closed under scaling,
//! so any per-row normalization would cancel the scale parameter exactly
//! and every γ would produce the identical ensemble. Keeping the raw
//! scale is what makes γ fittable against a unit-variance target.

use nalgebra::DMatrix;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::returns::{correlation, gram, CorrelationMatrix};
use crate::spectral::{dos_green, eig_sym, expected_pr, EigenSystem, SigmaPolicy};
use crate::{par, rng};

/// Entry distribution for a benchmark ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryDistribution {
    Gaussian,
    Cauchy { gamma: f64 },
}

/// Benchmark ensemble plan: distribution, matrix shape, sample count,
/// and run seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub distribution: EntryDistribution,
    /// Asset count (rows).
    pub m: usize,
    /// Window length (columns).
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Argument(format!("M must be >= 2, got {}", self.m)));
        }
        if self.n < 2 {
            return Err(Error::Argument(format!("n must be >= 2, got {}", self.n)));
        }
        if self.samples < 1 {
            return Err(Error::Argument("samples must be >= 1".into()));
        }
        if let EntryDistribution::Cauchy { gamma } = self.distribution {
            if !(gamma > 0.0) {
                return Err(Error::Domain(format!("gamma must be > 0, got {gamma}")));
            }
        }
        Ok(())
    }
}

/// Marčenko–Pastur support for aspect ratio `q = M/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MPSupport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub q: f64,
}

/// Cauchy density `f(x; γ) = γ / (π (x² + γ²))`, the normalized
/// Lorentzian with half-width-at-half-maximum γ.
pub fn cauchy_pdf(x: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be > 0, got {gamma}")));
    }
    Ok(gamma / (std::f64::consts::PI * (x * x + gamma * gamma)))
}

/// Support endpoints `(1 ∓ √(M/n))²` of the Marčenko–Pastur density.
pub fn mp_support(m: usize, n: usize) -> MPSupport {
    let q = m as f64 / n as f64;
    let s = q.sqrt();
    MPSupport {
        lambda_min: (1.0 - s) * (1.0 - s),
        lambda_max: (1.0 + s) * (1.0 + s),
        q,
    }
}

/// Marčenko–Pastur density at `λ` for an M×n sample correlation of
/// i.i.d. standard entries: `(n / 2πM) √((λ−λ₋)(λ₊−λ)) / λ` on the
/// support, 0 outside. Valid for `M ≤ n`.
pub fn mp_density(lambda: f64, m: usize, n: usize) -> Result<f64> {
    if m > n {
        return Err(Error::Domain(format!(
            "density form requires M <= n (q <= 1), got M={m}, n={n}"
        )));
    }
    let support = mp_support(m, n);
    if lambda <= support.lambda_min || lambda >= support.lambda_max || lambda <= 0.0 {
        return Ok(0.0);
    }
    let num = ((lambda - support.lambda_min) * (support.lambda_max - lambda)).sqrt();
    Ok(n as f64 / (2.0 * std::f64::consts::PI * m as f64) * num / lambda)
}

fn anon_labels(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("X{i}")).collect()
}

/// Draw one benchmark sample. Gaussian entries go through the sample
/// correlation (row standardization); Cauchy entries stay raw and only
/// the Gram product is formed.
pub fn benchmark_sample(spec: &EnsembleSpec, index: u64) -> Result<CorrelationMatrix> {
    spec.validate()?;
    let mut rng = rng::member_rng(spec.seed, index);
    let labels = anon_labels(spec.m);
    match spec.distribution {
        EntryDistribution::Gaussian => {
            let l = DMatrix::from_fn(spec.m, spec.n, |_, _| StandardNormal.sample(&mut rng));
            correlation(&l, &labels)
        }
        EntryDistribution::Cauchy { gamma } => {
            let dist = Cauchy::new(0.0, gamma)
                .map_err(|e| Error::Domain(format!("cauchy scale: {e}")))?;
            let l = DMatrix::from_fn(spec.m, spec.n, |_, _| dist.sample(&mut rng));
            gram(&l, &labels)
        }
    }
}

/// Generate the whole benchmark ensemble (member `i` from subseed `i`,
/// parallel when enabled, bit-identical either way).
pub fn sample_benchmark_ensemble(spec: &EnsembleSpec) -> Result<Vec<CorrelationMatrix>> {
    spec.validate()?;
    par::indexed_map(spec.samples, |i| benchmark_sample(spec, i as u64))
        .into_iter()
        .collect()
}

/// Eigendecompose every member of an ensemble.
pub fn ensemble_eigensystems(members: &[CorrelationMatrix]) -> Result<Vec<EigenSystem>> {
    par::indexed_map(members.len(), |i| eig_sym(&members[i]))
        .into_iter()
        .collect()
}

/// Which ensemble-derived curve a γ fit compares against the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaObjective {
    /// Green's-function density of states with broadening `eta`.
    Density { eta: f64 },
    /// Expected normalized participation-ratio curve.
    Participation { sigma: SigmaPolicy },
}

/// Result of a γ grid search.
#[derive(Debug, Clone)]
pub struct GammaFit {
    pub gamma: f64,
    pub sse: f64,
    /// The full scan, `(γ, sse)` in grid order.
    pub scan: Vec<(f64, f64)>,
}

/// Least-squares grid search for the Cauchy scale whose ensemble curve
/// best matches `target` (points `(λ, y)`). All candidates share the
/// same seed (common random numbers); ties break toward smaller γ.
pub fn fit_gamma(
    target: &[(f64, f64)],
    m: usize,
    n: usize,
    samples: usize,
    gamma_grid: &[f64],
    objective: GammaObjective,
    seed: u64,
) -> Result<GammaFit> {
    if gamma_grid.is_empty() {
        return Err(Error::Argument("gamma grid is empty".into()));
    }
    if gamma_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("gamma grid must be strictly ascending".into()));
    }
    if target.is_empty() {
        return Err(Error::Argument("target curve is empty".into()));
    }
    let grid: Vec<f64> = target.iter().map(|&(x, _)| x).collect();
    let mut scan = Vec::with_capacity(gamma_grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &gamma in gamma_grid {
        let spec = EnsembleSpec {
            distribution: EntryDistribution::Cauchy { gamma },
            m,
            n,
            samples,
            seed,
        };
        let members = sample_benchmark_ensemble(&spec)?;
        let systems = ensemble_eigensystems(&members)?;
        let curve: Vec<f64> = match objective {
            GammaObjective::Density { eta } => dos_green(&systems, &grid, eta)?.density,
            GammaObjective::Participation { sigma } => {
                expected_pr(&systems, &grid, sigma)?.pr
            }
        };
        let sse: f64 = target
            .iter()
            .zip(&curve)
            .map(|(&(_, y), &c)| (y - c) * (y - c))
            .sum();
        scan.push((gamma, sse));
        // strict < keeps the earliest (smallest) gamma on ties
        if best.map_or(true, |(_, s)| sse < s) {
            best = Some((gamma, sse));
        }
    }
    let (gamma, sse) = best.unwrap();
    Ok(GammaFit { gamma, sse, scan })
}
