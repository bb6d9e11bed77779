//! Eigenvector-sign partitioning and cluster-count scaling.
//!
//! Starting from all assets, each set splits by the sign of its members'
//! components in successive eigenvectors, taken in descending-eigenvalue
//! order (level 0 uses the top eigenvector). A set that an eigenvector
//! fails to split falls through to the next one. Components that are
//! exactly zero go to the positive side so the tree is deterministic.

use crate::error::{Error, Result};
use crate::spectral::EigenSystem;

/// Node of a sign-partition tree; `members` are asset indices.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionNode {
    /// Singleton, or a residue whose members share every remaining sign.
    Leaf { members: Vec<usize> },
    Split {
        /// Eigenvector level that produced the split (0 = largest eigenvalue).
        level: usize,
        members: Vec<usize>,
        positive: Box<PartitionNode>,
        negative: Box<PartitionNode>,
    },
}

impl PartitionNode {
    pub fn members(&self) -> &[usize] {
        match self {
            PartitionNode::Leaf { members } => members,
            PartitionNode::Split { members, .. } => members,
        }
    }
}

/// Sign-partition hierarchy over the assets of one eigensystem.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTree {
    pub root: PartitionNode,
    pub labels: Vec<String>,
}

// component of descending-rank eigenvector `level` for asset `i`
fn component(es: &EigenSystem, level: usize, asset: usize) -> f64 {
    es.eigenvector(es.dim() - 1 - level)[asset]
}

fn build(es: &EigenSystem, members: Vec<usize>, mut level: usize) -> PartitionNode {
    let m = es.dim();
    if members.len() <= 1 {
        return PartitionNode::Leaf { members };
    }
    while level < m {
        let (pos, neg): (Vec<usize>, Vec<usize>) = members
            .iter()
            .partition(|&&i| component(es, level, i) >= 0.0);
        if pos.is_empty() || neg.is_empty() {
            level += 1; // this eigenvector does not split the set
            continue;
        }
        return PartitionNode::Split {
            level,
            members,
            positive: Box::new(build(es, pos, level + 1)),
            negative: Box::new(build(es, neg, level + 1)),
        };
    }
    PartitionNode::Leaf { members }
}

/// Recursive sign partition of the portfolio by descending eigenvectors.
pub fn sign_partition(es: &EigenSystem) -> PartitionTree {
    let members: Vec<usize> = (0..es.dim()).collect();
    PartitionTree {
        root: build(es, members, 0),
        labels: es.labels().to_vec(),
    }
}

/// Number of disjoint clusters when the tree is cut after level `p`:
/// splits at levels `<= p` apply, deeper structure is merged.
pub fn cluster_count(tree: &PartitionTree, p: usize) -> usize {
    fn count(node: &PartitionNode, p: usize) -> usize {
        match node {
            PartitionNode::Leaf { .. } => 1,
            PartitionNode::Split {
                level,
                positive,
                negative,
                ..
            } => {
                if *level <= p {
                    count(positive, p) + count(negative, p)
                } else {
                    1
                }
            }
        }
    }
    count(&tree.root, p)
}

/// Uniform pairwise-bifurcation baseline: `min(2^(p+1), M)` clusters
/// after level `p`.
pub fn trivial_count(m: usize, p: usize) -> usize {
    if p >= usize::BITS as usize - 1 {
        return m;
    }
    let full = 1usize.checked_shl(p as u32 + 1).unwrap_or(usize::MAX);
    full.min(m)
}

/// Ordinary least-squares fit of `log(baseline - measured)` against the
/// level index.
#[derive(Debug, Clone, PartialEq)]
pub struct P0Fit {
    /// Characteristic partition `p0 = 1/slope`.
    pub p0: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Levels excluded because the difference was not positive.
    pub excluded: Vec<usize>,
}

/// Fit the exponential scaling `N ∝ exp(p/p0)` of the baseline-minus-
/// measured cluster-count difference. Levels with non-positive
/// difference are excluded (and reported); fewer than two usable levels
/// or a vanishing slope is an error.
pub fn fit_p0(measured: &[f64], baseline: &[f64]) -> Result<P0Fit> {
    if measured.len() != baseline.len() {
        return Err(Error::DimensionMismatch {
            expected: baseline.len(),
            actual: measured.len(),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for (p, (&m, &b)) in measured.iter().zip(baseline).enumerate() {
        let diff = b - m;
        if diff > 0.0 {
            xs.push(p as f64);
            ys.push(diff.ln());
        } else {
            excluded.push(p);
        }
    }
    if xs.len() < 2 {
        return Err(Error::FitDomain { levels: excluded });
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < f64::EPSILON {
        return Err(Error::DegenerateSlope { slope: 0.0 });
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    if slope.abs() < 1e-12 {
        return Err(Error::DegenerateSlope { slope });
    }
    Ok(P0Fit {
        p0: 1.0 / slope,
        slope,
        intercept,
        excluded,
    })
}
