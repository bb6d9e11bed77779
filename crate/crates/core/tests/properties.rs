//! Property tests for the pipeline invariants.

use std::collections::HashMap;

use nalgebra::DMatrix;
use proptest::prelude::*;

use eigenfolio::returns::{bootstrap_windows, correlation, normalize, BootstrapSpec};
use eigenfolio::spectral::{eig_sym, eig_sym_matrix};
use eigenfolio::structure::{
    cluster_count, cophenetic, euclid_dist, mst_prim, sign_partition, single_linkage,
    spectral_dist, trivial_count, ultrametric_check, DistanceMatrix,
};

fn asset_labels(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("A{i}")).collect()
}

fn seeded_returns(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = eigenfolio::rng::member_rng(seed, 0);
    DMatrix::from_fn(m, n, |_, _| {
        rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
    })
}

fn random_distance(n: usize, seed: u64) -> DistanceMatrix {
    let mut rng = eigenfolio::rng::member_rng(seed, 1);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v: f64 = rand::Rng::random_range(&mut rng, 0.05..3.0);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    DistanceMatrix::new(asset_labels(n), d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // correlation(normalize(r)) is invariant under per-asset affine
    // rescaling with positive slope: standardization absorbs it.
    #[test]
    fn correlation_affine_invariant(
        seed in 0u64..1000,
        a in 0.1f64..10.0,
        b in -5.0f64..5.0,
    ) {
        let labels = asset_labels(4);
        let r = seeded_returns(4, 60, seed);
        let base = correlation(normalize(&r, &labels).unwrap().matrix(), &labels).unwrap();

        let mut scaled = r.clone();
        for c in 0..scaled.ncols() {
            scaled[(1, c)] = a * scaled[(1, c)] + b;
        }
        let alt = correlation(normalize(&scaled, &labels).unwrap().matrix(), &labels).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((base.get(i, j) - alt.get(i, j)).abs() < 1e-9);
            }
        }
    }

    // Every bootstrap sample's correlation matrix satisfies the full
    // contract, including positive semidefiniteness and trace M.
    #[test]
    fn bootstrap_samples_satisfy_invariants(seed in 0u64..500) {
        let labels = asset_labels(5);
        let r = seeded_returns(5, 150, seed.wrapping_add(1000));
        let nr = normalize(&r, &labels).unwrap();
        let spec = BootstrapSpec { window: 50, samples: 8, seed };
        let ens = bootstrap_windows(&nr, &spec).unwrap();
        for w in &ens.windows {
            let c = correlation(&w.matrix, &labels).unwrap();
            let es = eig_sym(&c).unwrap();
            prop_assert!(es.eigenvalues()[0] >= -1e-9);
            let trace: f64 = es.eigenvalues().iter().sum();
            prop_assert!((trace - 5.0).abs() < 1e-8);
            for i in 0..5 {
                prop_assert_eq!(c.get(i, i), 1.0);
                for j in 0..5 {
                    prop_assert_eq!(c.get(i, j), c.get(j, i));
                    prop_assert!(c.get(i, j).abs() <= 1.0);
                }
            }
        }
    }

    // MST total weight is invariant under relabeling permutations.
    #[test]
    fn mst_weight_permutation_invariant(seed in 0u64..500, n in 4usize..9) {
        let d = random_distance(n, seed);
        let base = mst_prim(&d).unwrap().total_weight;

        let mut rng = eigenfolio::rng::member_rng(seed, 7);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rand::Rng::random_range(&mut rng, 0..=i);
            perm.swap(i, j);
        }
        let pd = DMatrix::from_fn(n, n, |i, j| d.get(perm[i], perm[j]));
        let permuted = DistanceMatrix::new(asset_labels(n), pd).unwrap();
        let alt = mst_prim(&permuted).unwrap().total_weight;
        prop_assert!((base - alt).abs() < 1e-12);
    }

    // The single-linkage dendrogram and the MST encode the same
    // subdominant ultrametric: cophenetic(i,j) equals the maximum edge
    // weight on the unique MST path between i and j.
    #[test]
    fn cophenetic_equals_mst_bottleneck(seed in 0u64..500) {
        let n = 8;
        let d = random_distance(n, seed.wrapping_add(31));
        let dendro = single_linkage(&d).unwrap();
        let coph = cophenetic(&dendro).unwrap();
        prop_assert!(ultrametric_check(&coph).is_ultrametric);

        let tree = mst_prim(&d).unwrap();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let index: HashMap<&str, usize> = d
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        for (a, b, w) in &tree.edges {
            let (ia, ib) = (index[a.as_str()], index[b.as_str()]);
            adj[ia].push((ib, *w));
            adj[ib].push((ia, *w));
        }
        // max edge on the path from s to every other node, by DFS
        for s in 0..n {
            let mut bottleneck = vec![f64::NAN; n];
            let mut stack = vec![(s, f64::MIN)];
            let mut seen = vec![false; n];
            seen[s] = true;
            while let Some((u, maxw)) = stack.pop() {
                bottleneck[u] = maxw;
                for &(v, w) in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push((v, maxw.max(w)));
                    }
                }
            }
            for t in 0..n {
                if t != s {
                    prop_assert!(
                        (coph.get(s, t) - bottleneck[t]).abs() < 1e-12,
                        "pair ({}, {}): cophenetic {} vs bottleneck {}",
                        s, t, coph.get(s, t), bottleneck[t]
                    );
                }
            }
        }
    }

    // Distance metrics are permutation-equivariant.
    #[test]
    fn distances_permutation_equivariant(seed in 0u64..300) {
        let labels = asset_labels(5);
        let r = seeded_returns(5, 80, seed.wrapping_add(2000));
        let c = correlation(&r, &labels).unwrap();
        let de = euclid_dist(&c).unwrap();
        let ds = spectral_dist(&eig_sym(&c).unwrap()).unwrap();

        let perm = [2usize, 0, 4, 1, 3];
        let pm = DMatrix::from_fn(5, 5, |i, j| c.get(perm[i], perm[j]));
        let plabels: Vec<String> = perm.iter().map(|&k| labels[k].clone()).collect();
        let pc = eigenfolio::returns::CorrelationMatrix::from_correlation(plabels, pm).unwrap();
        let pde = euclid_dist(&pc).unwrap();
        let pds = spectral_dist(&eig_sym(&pc).unwrap()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                prop_assert!((pde.get(i, j) - de.get(perm[i], perm[j])).abs() < 1e-12);
                prop_assert!((pds.get(i, j) - ds.get(perm[i], perm[j])).abs() < 1e-9);
            }
        }
    }

    // Cluster counts are monotone in the cut level and bounded by M.
    #[test]
    fn cluster_count_monotone(seed in 0u64..300) {
        let labels = asset_labels(6);
        let r = seeded_returns(6, 90, seed.wrapping_add(3000));
        let es = eig_sym(&correlation(&r, &labels).unwrap()).unwrap();
        let tree = sign_partition(&es);
        let mut prev = 0usize;
        for p in 0..10 {
            let n = cluster_count(&tree, p);
            prop_assert!(n >= prev && n <= 6);
            prop_assert!(trivial_count(6, p) >= n.min(trivial_count(6, p)));
            prev = n;
        }
    }

    // Single-linkage merge heights are drawn from the input distances.
    #[test]
    fn linkage_heights_subset_of_inputs(seed in 0u64..300, n in 3usize..9) {
        let d = random_distance(n, seed.wrapping_add(4000));
        let dendro = single_linkage(&d).unwrap();
        for mg in &dendro.merges {
            let found = (0..n)
                .flat_map(|i| (0..i).map(move |j| (i, j)))
                .any(|(i, j)| d.get(i, j) == mg.height);
            prop_assert!(found);
        }
    }

    // eig_sym reconstructs arbitrary symmetric matrices.
    #[test]
    fn eig_reconstruction(seed in 0u64..300) {
        let n = 5;
        let mut rng = eigenfolio::rng::member_rng(seed, 9);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rand::Rng::random_range(&mut rng, -2.0..2.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let es = eig_sym_matrix(&m, &asset_labels(n)).unwrap();
        let mut rec = DMatrix::zeros(n, n);
        for j in 0..n {
            let v = DMatrix::from_column_slice(n, 1, es.eigenvector(j));
            rec += es.eigenvalues()[j] * &v * v.transpose();
        }
        prop_assert!((rec - m).abs().max() < 1e-8);
    }
}
