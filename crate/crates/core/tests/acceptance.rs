//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured numbers (visible with `--nocapture`).

use nalgebra::DMatrix;
use rand::Rng;

use eigenfolio::rmt::{
    benchmark_sample, ensemble_eigensystems, mp_density, mp_support, sample_benchmark_ensemble,
    EnsembleSpec, EntryDistribution,
};
use eigenfolio::spectral::{
    cumulative_volatility, dos_green, eig_sym, ipr_raw, l1_distance, unfold_and_spacings,
};
use eigenfolio::structure::{
    cophenetic, fit_p0, mst_prim, single_linkage, ultrametric_check, DistanceMatrix,
};

fn node_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("N{i}")).collect()
}

#[test]
fn c01_mp_support_endpoints() {
    let s = mp_support(17, 100);
    assert!((s.lambda_min - 0.345).abs() < 0.01, "lambda_min {}", s.lambda_min);
    assert!((s.lambda_max - 1.995).abs() < 0.01, "lambda_max {}", s.lambda_max);
    println!(
        "C1 PASS - mp_support(17, 100) = ({:.4}, {:.4}), quoted (0.345, 1.995) within 0.01",
        s.lambda_min, s.lambda_max
    );
}

#[test]
fn c02_resolvent_dos_matches_analytic_mp() {
    let spec = EnsembleSpec {
        distribution: EntryDistribution::Gaussian,
        m: 17,
        n: 100,
        samples: 1000,
        seed: 20,
    };
    let systems = ensemble_eigensystems(&sample_benchmark_ensemble(&spec).unwrap()).unwrap();
    let support = mp_support(17, 100);
    let grid: Vec<f64> = (0..600)
        .map(|i| {
            support.lambda_min
                + (support.lambda_max - support.lambda_min) * i as f64 / 599.0
        })
        .collect();
    let dos = dos_green(&systems, &grid, 0.05).unwrap();
    let dist = l1_distance(
        &dos,
        |x| mp_density(x, 17, 100).unwrap(),
        support.lambda_min,
        support.lambda_max,
    );
    assert!(dist < 0.05, "L1 distance {dist}");
    println!("C2 PASS - dos_green vs mp_density on MP support: L1 = {dist:.4} < 0.05");
}

#[test]
fn c03_resolvent_identity_against_complex_inversion() {
    use nalgebra::Complex;

    let labels = node_labels(5);
    let mut rng = eigenfolio::rng::member_rng(33, 0);
    let l = DMatrix::from_fn(5, 40, |_, _| {
        rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
    });
    let corr = eigenfolio::returns::correlation(&l, &labels).unwrap();
    let es = eig_sym(&corr).unwrap();
    let eta = 0.06;
    let grid: Vec<f64> = (0..200).map(|i| -0.4 + i as f64 * 0.015).collect();
    let dos = dos_green(std::slice::from_ref(&es), &grid, eta).unwrap();

    let lam_c = corr.to_matrix().map(|x| Complex::new(x, 0.0));
    let mut worst = 0.0f64;
    for (gi, &x) in grid.iter().enumerate() {
        let z = Complex::new(x, eta);
        let g = (DMatrix::from_diagonal_element(5, 5, z) - &lam_c)
            .try_inverse()
            .unwrap();
        let tr_im: f64 = (0..5).map(|i| g[(i, i)].im).sum();
        let oracle = -tr_im / (std::f64::consts::PI * 5.0);
        worst = worst.max((oracle - dos.density[gi]).abs());
    }
    assert!(worst < 1e-10, "max pointwise difference {worst:.3e}");
    println!("C3 PASS - closed form vs complex inversion on 200-point grid: max diff {worst:.3e} < 1e-10");
}

#[test]
fn c04_fat_tail_widening() {
    let gaussian_edge = mp_support(17, 100).lambda_max;
    let mut lines = Vec::new();
    for &(gamma, samples, assert_widening) in
        &[(0.05, 200usize, true), (0.032, 100, true), (0.048, 100, true), (0.45, 100, true)]
    {
        let spec = EnsembleSpec {
            distribution: EntryDistribution::Cauchy { gamma },
            m: 17,
            n: 100,
            samples,
            seed: 40,
        };
        let systems = ensemble_eigensystems(&sample_benchmark_ensemble(&spec).unwrap()).unwrap();
        let pooled_max = systems
            .iter()
            .flat_map(|s| s.eigenvalues().iter().copied())
            .fold(f64::MIN, f64::max);
        let pooled_min = systems
            .iter()
            .flat_map(|s| s.eigenvalues().iter().copied())
            .fold(f64::MAX, f64::min);
        if assert_widening {
            assert!(
                pooled_max > gaussian_edge,
                "gamma {gamma}: pooled max {pooled_max} <= {gaussian_edge}"
            );
        }
        lines.push(format!(
            "gamma={gamma}: pooled eigenvalue range [{pooled_min:.3e}, {pooled_max:.3e}]"
        ));
    }
    println!(
        "C4 PASS - Cauchy ensembles exceed the Gaussian MP edge {gaussian_edge:.3}; {}",
        lines.join("; ")
    );
}

#[test]
fn c05_localization_porter_thomas_oracle() {
    // Brute-force oracle: mean raw participation ratio of random unit
    // vectors uniform on the sphere in dimension M.
    let m = 17;
    let mut rng = eigenfolio::rng::member_rng(50, 0);
    let mut oracle_sum = 0.0;
    let oracle_n = 100_000;
    for _ in 0..oracle_n {
        let mut v = [0.0f64; 17];
        let mut norm2 = 0.0;
        for x in v.iter_mut() {
            *x = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            norm2 += *x * *x;
        }
        let quartic: f64 = v.iter().map(|x| (x * x / norm2) * (x * x / norm2)).sum();
        oracle_sum += 1.0 / quartic;
    }
    let oracle = oracle_sum / oracle_n as f64;

    let spec = EnsembleSpec {
        distribution: EntryDistribution::Gaussian,
        m,
        n: 100,
        samples: 500,
        seed: 51,
    };
    let support = mp_support(m, 100);
    let mut bulk_sum = 0.0;
    let mut bulk_n = 0usize;
    for i in 0..spec.samples {
        let es = eig_sym(&benchmark_sample(&spec, i as u64).unwrap()).unwrap();
        for (j, &l) in es.eigenvalues().iter().enumerate() {
            if l >= support.lambda_min && l <= support.lambda_max {
                bulk_sum += ipr_raw(&es)[j];
                bulk_n += 1;
            }
        }
    }
    let bulk = bulk_sum / bulk_n as f64;
    let rel = (bulk - oracle).abs() / oracle;
    assert!(
        rel < 0.15,
        "bulk mean raw IPR {bulk:.3} vs oracle {oracle:.3}: {:.1}% off",
        rel * 100.0
    );
    println!(
        "C5 PASS - Wishart bulk mean raw IPR {bulk:.3} within {:.1}% of Porter-Thomas oracle {oracle:.3} (asymptotic M/3 = {:.3})",
        rel * 100.0,
        m as f64 / 3.0
    );
}

#[test]
fn c06_spacing_unfolding_unit_mean() {
    let mut lines = Vec::new();
    for (name, dist) in [
        ("gaussian", EntryDistribution::Gaussian),
        ("cauchy(0.05)", EntryDistribution::Cauchy { gamma: 0.05 }),
    ] {
        let spec = EnsembleSpec {
            distribution: dist,
            m: 17,
            n: 100,
            samples: 200,
            seed: 60,
        };
        let systems = ensemble_eigensystems(&sample_benchmark_ensemble(&spec).unwrap()).unwrap();
        let (lo, hi) = systems
            .iter()
            .flat_map(|s| s.eigenvalues().iter().copied())
            .fold((f64::MAX, f64::MIN), |(a, b), l| (a.min(l), b.max(l)));
        let eta = 0.05 * (hi / 2.0).max(1e-6);
        let grid: Vec<f64> = (0..2000)
            .map(|i| {
                (lo - 10.0 * eta) + (hi - lo + 20.0 * eta) * i as f64 / 1999.0
            })
            .collect();
        let dos = dos_green(&systems, &grid, eta).unwrap();
        let hist = unfold_and_spacings(&dos, 10_000, 100, 50, 61).unwrap();
        assert!(
            (hist.mean_spacing - 1.0).abs() < 0.05,
            "{name}: mean unfolded spacing {}",
            hist.mean_spacing
        );
        lines.push(format!("{name}: mean spacing {:.4}", hist.mean_spacing));
    }
    println!(
        "C6 PASS - unfolded nearest-neighbor spacings have unit mean (draws=10^4, sets=100): {}",
        lines.join("; ")
    );
}

// Decode a Prüfer sequence into tree edges; with Cayley's formula this
// enumerates all n^(n-2) labeled spanning trees.
fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] = 0;
        degree[s] -= 1;
    }
    let mut ends = (0..n).filter(|&v| degree[v] == 1);
    edges.push((ends.next().unwrap(), ends.next().unwrap()));
    edges
}

#[test]
fn c07_mst_optimality_against_exhaustive_enumeration() {
    let n = 7;
    let mut rng = eigenfolio::rng::member_rng(70, 0);
    for instance in 0..50 {
        // dyadic weights (k/64) make every tree weight exactly
        // representable, so optimality comparison is exact equality
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let w = rng.random_range(1..=512) as f64 / 64.0;
                d[(i, j)] = w;
                d[(j, i)] = w;
            }
        }
        let dm = DistanceMatrix::new(node_labels(n), d.clone()).unwrap();
        let prim = mst_prim(&dm).unwrap();

        let mut best = f64::INFINITY;
        let mut seq = [0usize; 5];
        loop {
            let weight: f64 = prufer_decode(&seq, n)
                .iter()
                .map(|&(a, b)| d[(a, b)])
                .sum();
            if weight < best {
                best = weight;
            }
            // next sequence in base-n counting
            let mut k = 0;
            loop {
                if k == seq.len() {
                    break;
                }
                seq[k] += 1;
                if seq[k] < n {
                    break;
                }
                seq[k] = 0;
                k += 1;
            }
            if k == seq.len() {
                break;
            }
        }
        assert_eq!(
            prim.total_weight, best,
            "instance {instance}: prim {} vs exhaustive {}",
            prim.total_weight, best
        );
    }
    println!("C7 PASS - Prim total weight equals exhaustive enumeration over 7^5 labeled trees on 50 instances, exactly");
}

#[test]
fn c08_ultrametric_dendrograms_and_mst_equivalence() {
    let n = 10;
    let mut rng = eigenfolio::rng::member_rng(80, 0);
    for instance in 0..50 {
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let w: f64 = rng.random_range(0.05..4.0);
                d[(i, j)] = w;
                d[(j, i)] = w;
            }
        }
        let dm = DistanceMatrix::new(node_labels(n), d).unwrap();
        let dendro = single_linkage(&dm).unwrap();
        let coph = cophenetic(&dendro).unwrap();
        let report = ultrametric_check(&coph);
        assert!(
            report.is_ultrametric,
            "instance {instance}: violations {:?}",
            report.violations
        );

        let tree = mst_prim(&dm).unwrap();
        let mut adj = vec![Vec::new(); n];
        for (a, b, w) in &tree.edges {
            let ia: usize = a[1..].parse().unwrap();
            let ib: usize = b[1..].parse().unwrap();
            adj[ia].push((ib, *w));
            adj[ib].push((ia, *w));
        }
        for s in 0..n {
            let mut stack = vec![(s, f64::MIN)];
            let mut seen = vec![false; n];
            seen[s] = true;
            while let Some((u, maxw)) = stack.pop() {
                if u != s {
                    assert!(
                        (coph.get(s, u) - maxw).abs() < 1e-12,
                        "instance {instance}, pair ({s},{u}): cophenetic {} vs MST bottleneck {maxw}",
                        coph.get(s, u)
                    );
                }
                for &(v, w) in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push((v, maxw.max(w)));
                    }
                }
            }
        }
    }
    println!("C8 PASS - single-linkage cophenetic distances are ultrametric and equal MST path maxima on 50 instances");
}

#[test]
fn c09_p0_fitter_recovers_planted_values() {
    for &p0 in &[0.5f64, 1.0625, 2.0] {
        let levels = 10;
        let baseline: Vec<f64> = (0..levels)
            .map(|p| 4.0 * (p as f64 / p0).exp() + 2.0)
            .collect();
        let measured = vec![2.0; levels];
        let fit = fit_p0(&measured, &baseline).unwrap();
        assert!(
            (fit.p0 - p0).abs() < 1e-6,
            "planted {p0}, recovered {}",
            fit.p0
        );
    }
    println!("C9 PASS - fit_p0 recovers planted p0 in {{0.5, 1.0625, 2.0}} within 1e-6");
}

#[test]
fn c10_explained_volatility_ordering() {
    let mean_phi = |dist: EntryDistribution, seed: u64| -> Vec<f64> {
        let spec = EnsembleSpec {
            distribution: dist,
            m: 17,
            n: 100,
            samples: 300,
            seed,
        };
        let systems = ensemble_eigensystems(&sample_benchmark_ensemble(&spec).unwrap()).unwrap();
        let mut acc = vec![0.0; 17];
        for es in &systems {
            let phi = cumulative_volatility(es);
            assert!(phi.windows(2).all(|w| w[1] >= w[0] - 1e-14), "phi not monotone");
            assert!(
                (phi[16] - 1.0).abs() < 1e-10,
                "phi(16) = {} for a member",
                phi[16]
            );
            for (a, p) in acc.iter_mut().zip(phi) {
                *a += p;
            }
        }
        acc.into_iter().map(|a| a / systems.len() as f64).collect()
    };
    let gauss = mean_phi(EntryDistribution::Gaussian, 100);
    let cauchy = mean_phi(EntryDistribution::Cauchy { gamma: 0.45 }, 101);
    assert!(
        cauchy[0] > gauss[0],
        "phi(0): cauchy {} vs gaussian {}",
        cauchy[0],
        gauss[0]
    );
    println!(
        "C10 PASS - phi(0): cauchy(0.45) {:.3} > gaussian {:.3}; both curves monotone with phi(16) = 1",
        cauchy[0], gauss[0]
    );
}
