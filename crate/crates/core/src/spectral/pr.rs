//! Participation-ratio curves via Gaussian radial basis interpolation.
//!
//! Per ensemble member, the participation ratio at each eigenvalue is
//! interpolated by a superposition of Gaussians centered on the
//! eigenvalues (coefficients from solving `E A = Δ`), evaluated on a
//! shared grid, and averaged across members to an expected curve
//! `⟨Δ(λ)⟩`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{ipr, EigenSystem};

/// Kernel width selection for the Gaussian interpolant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SigmaPolicy {
    /// Mean nearest-neighbor eigenvalue spacing of the member.
    Auto,
    Fixed(f64),
}

/// Ensemble-averaged normalized participation-ratio curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRCurve {
    pub grid: Vec<f64>,
    /// Expected normalized participation ratio, clamped to `[1/M, 1]`.
    pub pr: Vec<f64>,
    /// Mean kernel width actually used across members.
    pub sigma: f64,
    /// Members dropped because their kernel solve failed.
    pub dropped: usize,
}

/// Gaussian radial basis interpolant `φ(λ) = Σ A_m exp(−(λ−λ_m)²/2σ²)`.
#[derive(Debug, Clone)]
pub struct RbfInterpolant {
    centers: Vec<f64>,
    coeffs: Vec<f64>,
    sigma: f64,
}

impl RbfInterpolant {
    pub fn eval(&self, x: f64) -> f64 {
        let inv = 1.0 / (2.0 * self.sigma * self.sigma);
        self.centers
            .iter()
            .zip(&self.coeffs)
            .map(|(&c, &a)| a * (-(x - c) * (x - c) * inv).exp())
            .sum()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

const RIDGE: f64 = 1e-10;
const COLLAPSE_TOL: f64 = 1e-9;
const INTERP_TOL: f64 = 1e-6;

// Collapse anchors closer than COLLAPSE_TOL, averaging their values;
// degenerate spectra would otherwise make E exactly singular.
fn collapse_anchors(xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut cx: Vec<f64> = Vec::new();
    let mut cy: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for &i in &order {
        match cx.last() {
            Some(&last) if (xs[i] - last).abs() < COLLAPSE_TOL => {
                let k = cy.len() - 1;
                let n = counts[k] as f64;
                cy[k] = (cy[k] * n + ys[i]) / (n + 1.0);
                counts[k] += 1;
            }
            _ => {
                cx.push(xs[i]);
                cy.push(ys[i]);
                counts.push(1);
            }
        }
    }
    (cx, cy)
}

/// Interpolate `(eigenvalue, value)` anchors with Gaussians of width
/// `sigma`. Anchors within 1e-9 are merged first; the kernel system
/// carries a 1e-10 ridge and the solution must reproduce every anchor
/// within 1e-6, otherwise the kernel is reported ill-conditioned with a
/// condition estimate.
pub fn rbf_fit(eigenvalues: &[f64], values: &[f64], sigma: f64) -> Result<RbfInterpolant> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    if eigenvalues.len() != values.len() || eigenvalues.is_empty() {
        return Err(Error::Argument("anchor arrays empty or mismatched".into()));
    }
    let (centers, targets) = collapse_anchors(eigenvalues, values);
    let k = centers.len();
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut e = DMatrix::from_fn(k, k, |a, b| {
        let d = centers[a] - centers[b];
        (-d * d * inv).exp()
    });
    for i in 0..k {
        e[(i, i)] += RIDGE;
    }
    let rhs = DVector::from_column_slice(&targets);
    let coeffs = e
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::IllConditionedKernel {
            cond: condition_estimate(&e),
        })?;
    let interp = RbfInterpolant {
        centers: centers.clone(),
        coeffs: coeffs.iter().copied().collect(),
        sigma,
    };
    let worst = centers
        .iter()
        .zip(&targets)
        .map(|(&c, &t)| (interp.eval(c) - t).abs())
        .fold(0.0f64, f64::max);
    if worst > INTERP_TOL {
        return Err(Error::IllConditionedKernel {
            cond: condition_estimate(&e),
        });
    }
    Ok(interp)
}

fn condition_estimate(e: &DMatrix<f64>) -> f64 {
    let eig = e.clone().symmetric_eigenvalues();
    let max = eig.iter().fold(f64::MIN, |a, &b| a.max(b));
    let min = eig.iter().fold(f64::MAX, |a, &b| a.min(b.abs()));
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn auto_sigma(eigenvalues: &[f64]) -> f64 {
    let mut xs = eigenvalues.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gaps: Vec<f64> = xs
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > COLLAPSE_TOL)
        .collect();
    if gaps.is_empty() {
        return 1.0; // fully degenerate spectrum
    }
    gaps.iter().sum::<f64>() / gaps.len() as f64
}

/// Per member: participation ratios, Gaussian interpolation, evaluation
/// on `grid`; then the pointwise ensemble mean, clamped into `[1/M, 1]`.
/// Members whose kernel solve fails are dropped and counted.
pub fn expected_pr(
    ensemble: &[EigenSystem],
    grid: &[f64],
    sigma: SigmaPolicy,
) -> Result<PRCurve> {
    if ensemble.is_empty() {
        return Err(Error::Argument("empty ensemble".into()));
    }
    let m = ensemble[0].dim();
    if ensemble.iter().any(|es| es.dim() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: ensemble.iter().map(EigenSystem::dim).find(|&d| d != m).unwrap(),
        });
    }
    let fits = par::indexed_map(ensemble.len(), |i| {
        let es = &ensemble[i];
        let s = match sigma {
            SigmaPolicy::Auto => auto_sigma(es.eigenvalues()),
            SigmaPolicy::Fixed(v) => v,
        };
        rbf_fit(es.eigenvalues(), &ipr(es), s).map(|f| {
            let row: Vec<f64> = grid.iter().map(|&x| f.eval(x)).collect();
            (row, f.sigma())
        })
    });
    let mut acc = vec![0.0; grid.len()];
    let mut sigma_sum = 0.0;
    let mut kept = 0usize;
    let mut dropped = 0usize;
    for fit in fits {
        match fit {
            Ok((row, s)) => {
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
                sigma_sum += s;
                kept += 1;
            }
            Err(Error::IllConditionedKernel { .. }) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    if kept == 0 {
        return Err(Error::IllConditionedKernel { cond: f64::INFINITY });
    }
    let lo = 1.0 / m as f64;
    let pr = acc
        .into_iter()
        .map(|v| (v / kept as f64).clamp(lo, 1.0))
        .collect();
    Ok(PRCurve {
        grid: grid.to_vec(),
        pr,
        sigma: sigma_sum / kept as f64,
        dropped,
    })
}
