//! Agglomerative single-linkage clustering.
//!
//! Clusters merge by the Lance–Williams update with the single-linkage
//! coefficients (αᵢ = αⱼ = ½, β = 0, γ = −½), which reduces to
//! `d_km = min(d_im, d_jm)`. Merged clusters get ids M..2M−2 above the
//! leaf ids 0..M−1; ties break toward the lowest cluster-id pair.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::DistanceMatrix;

/// One agglomeration step: clusters `a < b` joined at `height` into a
/// cluster of `size` leaves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

/// Stepwise dendrogram: M−1 merges with nondecreasing heights plus the
/// leaf order used for plotting (first-merge height, ties by merge
/// index, then leaf index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
    pub leaf_order: Vec<usize>,
}

/// Single-linkage agglomeration of a distance matrix.
pub fn single_linkage(d: &DistanceMatrix) -> Result<Dendrogram> {
    let m = d.dim();
    if m < 2 {
        return Err(Error::Argument(format!("need at least 2 labels, got {m}")));
    }
    // active clusters: id -> (index into `dist` rows, leaf count)
    let mut dist: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| d.get(i, j)).collect())
        .collect();
    let mut ids: Vec<usize> = (0..m).collect(); // cluster id per active row
    let mut sizes: Vec<usize> = vec![1; m];
    let mut active: Vec<bool> = vec![true; m];
    let mut merges = Vec::with_capacity(m - 1);

    for step in 0..m - 1 {
        // closest active pair; ties toward the smallest (id_i, id_j)
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..dist.len() {
            if !active[i] {
                continue;
            }
            for j in i + 1..dist.len() {
                if !active[j] {
                    continue;
                }
                let w = dist[i][j];
                let (lo, hi) = if ids[i] < ids[j] {
                    (ids[i], ids[j])
                } else {
                    (ids[j], ids[i])
                };
                let better = match best {
                    None => true,
                    Some((bw, bl, bh)) => {
                        w < bw || (w == bw && (lo, hi) < (bl, bh))
                    }
                };
                if better {
                    best = Some((w, lo, hi));
                }
            }
        }
        let (height, id_a, id_b) = best.ok_or(Error::NoSpanningTree)?;
        // rows of the two clusters being merged
        let ra = ids.iter().position(|&x| x == id_a).unwrap();
        let rb = ids.iter().position(|&x| x == id_b).unwrap();
        let size = sizes[ra] + sizes[rb];
        merges.push(Merge {
            a: id_a,
            b: id_b,
            height,
            size,
        });
        // Lance-Williams update with the single-linkage coefficients
        // (alpha = 1/2, beta = 0, gamma = -1/2) reduces to min(d_im, d_jm);
        // evaluating it as min keeps merge heights exactly equal to input
        // distances instead of an ulp off.
        for k in 0..dist.len() {
            if active[k] && k != ra && k != rb {
                let dm = dist[ra][k].min(dist[rb][k]);
                dist[ra][k] = dm;
                dist[k][ra] = dm;
            }
        }
        active[rb] = false;
        ids[ra] = m + step;
        sizes[ra] = size;
    }

    let leaf_order = leaf_order_from(&merges, m);
    Ok(Dendrogram {
        labels: d.labels().to_vec(),
        merges,
        leaf_order,
    })
}

// Leaves sorted by (height of first merge, merge index, leaf index).
fn leaf_order_from(merges: &[Merge], m: usize) -> Vec<usize> {
    let mut first: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); m];
    // membership: cluster id -> leaves
    let mut members: HashMap<usize, Vec<usize>> = (0..m).map(|i| (i, vec![i])).collect();
    for (idx, mg) in merges.iter().enumerate() {
        let mut leaves = members.remove(&mg.a).unwrap_or_default();
        leaves.extend(members.remove(&mg.b).unwrap_or_default());
        for &leaf in &leaves {
            if first[leaf].1 == usize::MAX {
                first[leaf] = (mg.height, idx);
            }
        }
        members.insert(m + idx, leaves);
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| {
        first[x]
            .0
            .partial_cmp(&first[y].0)
            .unwrap()
            .then(first[x].1.cmp(&first[y].1))
            .then(x.cmp(&y))
    });
    order
}

/// Cophenetic distances: each pair of leaves sits at the height of the
/// merge that first put them in the same cluster.
pub fn cophenetic(dendro: &Dendrogram) -> Result<DistanceMatrix> {
    let m = dendro.labels.len();
    let mut members: HashMap<usize, Vec<usize>> = (0..m).map(|i| (i, vec![i])).collect();
    let mut d = DMatrix::zeros(m, m);
    for (idx, mg) in dendro.merges.iter().enumerate() {
        let a = members.remove(&mg.a).ok_or_else(|| {
            Error::Contract(format!("merge {idx} references unknown cluster {}", mg.a))
        })?;
        let b = members.remove(&mg.b).ok_or_else(|| {
            Error::Contract(format!("merge {idx} references unknown cluster {}", mg.b))
        })?;
        for &x in &a {
            for &y in &b {
                d[(x, y)] = mg.height;
                d[(y, x)] = mg.height;
            }
        }
        let mut joined = a;
        joined.extend(b);
        members.insert(m + idx, joined);
    }
    DistanceMatrix::new(dendro.labels.clone(), d)
}

/// Strong-triangle-inequality audit of a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UltrametricReport {
    pub is_ultrametric: bool,
    /// Violating triples `(i, j, k)` where `d(i,k) > max(d(i,j), d(j,k))`.
    pub violations: Vec<(usize, usize, usize)>,
}

/// Check `d(x,z) <= max(d(x,y), d(y,z))` for every triple within 1e-12.
pub fn ultrametric_check(d: &DistanceMatrix) -> UltrametricReport {
    let m = d.dim();
    let mut violations = Vec::new();
    for i in 0..m {
        for k in 0..m {
            if i == k {
                continue;
            }
            for j in 0..m {
                if j == i || j == k {
                    continue;
                }
                if d.get(i, k) > d.get(i, j).max(d.get(j, k)) + 1e-12 {
                    violations.push((i, j, k));
                }
            }
        }
    }
    UltrametricReport {
        is_ultrametric: violations.is_empty(),
        violations,
    }
}

/// Pearson correlation between leaf appearance order and an external
/// per-label value.
pub fn leaf_order_correlation(
    dendro: &Dendrogram,
    external_rank: &HashMap<String, f64>,
) -> Result<f64> {
    let mut xs = Vec::with_capacity(dendro.leaf_order.len());
    let mut ys = Vec::with_capacity(dendro.leaf_order.len());
    for (pos, &leaf) in dendro.leaf_order.iter().enumerate() {
        let label = &dendro.labels[leaf];
        let v = external_rank
            .get(label)
            .ok_or_else(|| Error::MissingLabel {
                label: label.clone(),
            })?;
        xs.push(pos as f64);
        ys.push(*v);
    }
    pearson(&xs, &ys)
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}
