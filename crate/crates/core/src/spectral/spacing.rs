//! Level unfolding and nearest-neighbor spacing statistics.
//!
//! Synthetic levels are drawn through the linearly interpolated inverse
//! CDF of a density-of-states curve. The staircase `η(λ) = Σ θ(λ − λ_n)`
//! is averaged across all sets and each level is mapped through the
//! averaged staircase, which enforces unit mean level density; the
//! histogram of nearest-neighbor differences of the unfolded levels is
//! then pooled over sets.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spectral::DOSCurve;

/// Pooled nearest-neighbor spacing histogram, normalized to unit area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingHistogram {
    pub bin_edges: Vec<f64>,
    /// Probability density per bin (unit total area).
    pub counts: Vec<f64>,
    pub draws: usize,
    pub sets: usize,
    pub seed: u64,
    /// Mean of the pooled unfolded spacings; 1 by construction.
    pub mean_spacing: f64,
}

// Cumulative trapezoid CDF of the curve, normalized to end at 1.
fn normalized_cdf(dos: &DOSCurve) -> Result<Vec<f64>> {
    if dos.grid.len() < 2 {
        return Err(Error::CannotUnfold(
            "degenerate density: need at least two grid points".into(),
        ));
    }
    let mut cdf = Vec::with_capacity(dos.grid.len());
    cdf.push(0.0);
    let mut acc = 0.0;
    for i in 1..dos.grid.len() {
        let dx = dos.grid[i] - dos.grid[i - 1];
        acc += 0.5 * (dos.density[i] + dos.density[i - 1]) * dx;
        cdf.push(acc);
    }
    let total = *cdf.last().unwrap();
    if !(total > 0.0) {
        return Err(Error::CannotUnfold("density has no positive mass".into()));
    }
    for v in &mut cdf {
        *v /= total;
    }
    Ok(cdf)
}

// Linear-interpolation inverse of a nondecreasing CDF sampled on `grid`.
fn inverse_cdf(grid: &[f64], cdf: &[f64], u: f64) -> f64 {
    let i = cdf.partition_point(|&c| c < u);
    if i == 0 {
        return grid[0];
    }
    if i >= cdf.len() {
        return *grid.last().unwrap();
    }
    let (c0, c1) = (cdf[i - 1], cdf[i]);
    let (x0, x1) = (grid[i - 1], grid[i]);
    if c1 <= c0 {
        return x1; // flat segment
    }
    x0 + (u - c0) / (c1 - c0) * (x1 - x0)
}

/// Draw `draws` levels per set through the inverse CDF of `dos`, unfold
/// them against the set-averaged staircase, and histogram the pooled
/// nearest-neighbor spacings into `bins` equal bins.
pub fn unfold_and_spacings(
    dos: &DOSCurve,
    draws: usize,
    sets: usize,
    bins: usize,
    seed: u64,
) -> Result<SpacingHistogram> {
    if draws < 2 {
        return Err(Error::Argument(format!("draws must be >= 2, got {draws}")));
    }
    if sets < 1 || bins < 1 {
        return Err(Error::Argument("sets and bins must be >= 1".into()));
    }
    let cdf = normalized_cdf(dos)?;

    // Sampled level sets, each sorted; members reproducible from (seed, set).
    let level_sets = crate::par::indexed_map(sets, |s| {
        let mut r = rng::member_rng(seed, s as u64);
        let mut levels: Vec<f64> = (0..draws)
            .map(|_| inverse_cdf(&dos.grid, &cdf, r.random::<f64>()))
            .collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels
    });

    // Averaged staircase: count of pooled levels <= x, divided by sets.
    let mut pooled: Vec<f64> = level_sets.iter().flatten().copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let staircase = |x: f64| pooled.partition_point(|&l| l <= x) as f64 / sets as f64;

    let mut spacings = Vec::with_capacity(sets * (draws - 1));
    for levels in &level_sets {
        let mut prev = staircase(levels[0]);
        for &l in &levels[1..] {
            let cur = staircase(l);
            spacings.push(cur - prev);
            prev = cur;
        }
    }
    let mean_spacing = spacings.iter().sum::<f64>() / spacings.len() as f64;

    let smax = spacings.iter().copied().fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let width = smax / bins as f64;
    let mut raw = vec![0usize; bins];
    for &s in &spacings {
        let b = ((s / width) as usize).min(bins - 1);
        raw[b] += 1;
    }
    let total = spacings.len() as f64;
    let counts = raw.iter().map(|&c| c as f64 / (total * width)).collect();
    let bin_edges = (0..=bins).map(|i| i as f64 * width).collect();

    Ok(SpacingHistogram {
        bin_edges,
        counts,
        draws,
        sets,
        seed,
        mean_spacing,
    })
}
