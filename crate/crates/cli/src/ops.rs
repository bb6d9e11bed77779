//! Subcommand implementations. Every output is written atomically and
//! accompanied by a `<file>.meta.json` sidecar holding the producing
//! configuration (no timestamps, so reruns are byte-identical).

use std::path::Path;

use serde_json::json;

use eigenfolio::error::{Error, Result};
use eigenfolio::ingest::{self, fetch::FetchConfig, PriceMatrix};
use eigenfolio::io;
use eigenfolio::returns::{
    bootstrap_windows, correlation, log_returns, normalize, BootstrapSpec, CorrelationMatrix,
    NormalizedReturns,
};
use eigenfolio::rmt::{ensemble_eigensystems, sample_benchmark_ensemble, EnsembleSpec, EntryDistribution};
use eigenfolio::spectral::{
    cumulative_volatility, dos_green, eig_sym, expected_pr, unfold_and_spacings, DOSCurve,
    EigenSystem, SigmaPolicy,
};
use eigenfolio::structure::{
    cluster_count, cophenetic, euclid_dist, fit_p0, mst_prim, sign_partition, single_linkage,
    spectral_dist, trivial_count, DistanceMatrix,
};

use crate::{DistKind, FetchArgs, MetricKind, PipelineArgs, API_BASE_ENV};

fn meta(command: &str, params: serde_json::Value) -> serde_json::Value {
    json!({
        "tool": "eigenfolio",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "params": params,
    })
}

/// Parse a `start:stop:points` grid specification.
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Argument(format!(
            "grid must be start:stop:points, got `{spec}`"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Argument(format!("bad grid start `{}`", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Argument(format!("bad grid stop `{}`", parts[1])))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|_| Error::Argument(format!("bad grid points `{}`", parts[2])))?;
    if points < 2 || stop <= start {
        return Err(Error::Argument(format!("degenerate grid `{spec}`")));
    }
    Ok(linspace(start, stop, points))
}

fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
        .collect()
}

fn pooled_range(systems: &[EigenSystem]) -> (f64, f64) {
    systems
        .iter()
        .flat_map(|s| s.eigenvalues().iter().copied())
        .fold((f64::MAX, f64::MIN), |(lo, hi), l| (lo.min(l), hi.max(l)))
}

/// Default broadening: 0.05 * (largest observed eigenvalue / 2).
fn auto_eta(systems: &[EigenSystem]) -> f64 {
    let (_, hi) = pooled_range(systems);
    (0.05 * hi / 2.0).max(1e-9)
}

fn auto_grid(systems: &[EigenSystem], eta: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = pooled_range(systems);
    linspace(lo - 10.0 * eta, hi + 10.0 * eta, points)
}

fn parse_sigma(s: &str) -> Result<SigmaPolicy> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(SigmaPolicy::Auto);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Argument(format!("sigma must be `auto` or a number, got `{s}`")))?;
    if !(v > 0.0) {
        return Err(Error::Domain(format!("sigma must be > 0, got {v}")));
    }
    Ok(SigmaPolicy::Fixed(v))
}

pub fn fetch(args: FetchArgs) -> Result<()> {
    let endpoint = args
        .endpoint
        .clone()
        .or_else(|| std::env::var(API_BASE_ENV).ok())
        .unwrap_or_else(|| FetchConfig::default().base_url);
    let cfg = FetchConfig {
        base_url: endpoint.clone(),
        page_limit: args.page_limit,
        delay: std::time::Duration::from_millis(args.delay_ms),
        ..FetchConfig::default()
    };
    let transport = eigenfolio::ingest::fetch::HttpTransport::new()?;
    let mut series = Vec::with_capacity(args.symbols.len());
    for symbol in &args.symbols {
        let candles =
            eigenfolio::ingest::fetch::fetch_candles(&transport, &cfg, symbol, &args.period, args.limit)?;
        series.push((symbol.clone(), candles));
    }
    let min_length = args.min_length.unwrap_or((args.limit * 9 / 10).max(2));
    let report = ingest::align_series(&series, min_length)?;
    ingest::write_csv(&report.matrix, &args.out)?;
    io::write_sidecar(
        &args.out,
        &meta(
            "fetch",
            json!({
                "symbols": args.symbols,
                "period": args.period,
                "limit": args.limit,
                "min_length": min_length,
                "endpoint": endpoint,
                "dropped": report.dropped,
            }),
        ),
    )?;
    if !report.dropped.is_empty() {
        println!("dropped {} series: {}", report.dropped.len(), report.dropped.join(","));
    }
    println!(
        "aligned {} assets x {} timestamps -> {}",
        report.matrix.assets(),
        report.matrix.timestamps().len(),
        args.out.display()
    );
    Ok(())
}

pub fn returns(input: &Path, out: &Path) -> Result<()> {
    let prices = ingest::load_csv(input)?;
    let r = log_returns(&prices)?;
    let nr = normalize(&r, prices.symbols())?;
    ingest::write_timeseries_csv(out, nr.labels(), &prices.timestamps()[1..], nr.matrix())?;
    io::write_sidecar(
        out,
        &meta(
            "returns",
            json!({
                "in": input.display().to_string(),
                "assets": nr.assets(),
                "observations": nr.observations(),
                "means": nr.means(),
                "stds": nr.stds(),
            }),
        ),
    )
}

fn load_returns(input: &Path) -> Result<NormalizedReturns> {
    let (symbols, _, values) = ingest::read_timeseries_csv(input)?;
    NormalizedReturns::from_standardized(symbols, values)
}

pub fn ensemble(input: &Path, window: usize, samples: usize, seed: u64, out: &Path) -> Result<()> {
    let nr = load_returns(input)?;
    let spec = BootstrapSpec {
        window,
        samples,
        seed,
    };
    let ens = bootstrap_windows(&nr, &spec)?;
    let members = eigenfolio::par::indexed_map(ens.windows.len(), |i| {
        correlation(&ens.windows[i].matrix, nr.labels())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    io::write_matrix_jsonl(out, &members)?;
    io::write_sidecar(
        out,
        &meta(
            "ensemble",
            json!({
                "in": input.display().to_string(),
                "window": window,
                "samples": samples,
                "seed": seed,
                "rejected_windows": ens.rejected,
            }),
        ),
    )
}

pub fn bench(
    dist: DistKind,
    gamma: Option<f64>,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let distribution = match dist {
        DistKind::Gaussian => EntryDistribution::Gaussian,
        DistKind::Cauchy => EntryDistribution::Cauchy {
            gamma: gamma.ok_or_else(|| Error::Argument("--gamma is required for --dist cauchy".into()))?,
        },
    };
    let spec = EnsembleSpec {
        distribution,
        m,
        n,
        samples,
        seed,
    };
    let members = sample_benchmark_ensemble(&spec)?;
    io::write_matrix_jsonl(out, &members)?;
    io::write_sidecar(
        out,
        &meta(
            "bench",
            json!({
                "distribution": spec.distribution,
                "m": m, "n": n, "samples": samples, "seed": seed,
            }),
        ),
    )
}

pub fn spectrum(input: &Path, out: &Path) -> Result<()> {
    let members = io::read_matrix_jsonl(input)?;
    let systems = ensemble_eigensystems(&members)?;
    io::write_eigs_json(out, &systems)?;
    io::write_sidecar(
        out,
        &meta(
            "spectrum",
            json!({"in": input.display().to_string(), "members": systems.len()}),
        ),
    )
}

pub fn dos(input: &Path, eta: Option<f64>, grid: Option<&str>, out: &Path) -> Result<()> {
    let members = io::read_matrix_jsonl(input)?;
    let systems = ensemble_eigensystems(&members)?;
    let eta = eta.unwrap_or_else(|| auto_eta(&systems));
    let grid = match grid {
        Some(spec) => parse_grid(spec)?,
        None => auto_grid(&systems, eta, 600),
    };
    let curve = dos_green(&systems, &grid, eta)?;
    let points: Vec<(f64, f64)> = curve.grid.iter().copied().zip(curve.density.iter().copied()).collect();
    io::write_curve_csv(out, &points)?;
    io::write_sidecar(
        out,
        &meta(
            "dos",
            json!({
                "in": input.display().to_string(),
                "eta": eta,
                "grid_start": grid.first(),
                "grid_stop": grid.last(),
                "grid_points": grid.len(),
                "members": curve.sample_count,
            }),
        ),
    )
}

pub fn spacings(
    input: &Path,
    draws: usize,
    sets: usize,
    bins: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let points = io::read_curve_csv(input)?;
    let curve = DOSCurve {
        grid: points.iter().map(|&(x, _)| x).collect(),
        density: points.iter().map(|&(_, y)| y).collect(),
        eta: 0.0, // not used by unfolding; the producing eta lives in the input sidecar
        sample_count: 0,
    };
    let hist = unfold_and_spacings(&curve, draws, sets, bins, seed)?;
    let centers: Vec<(f64, f64)> = hist
        .bin_edges
        .windows(2)
        .zip(&hist.counts)
        .map(|(w, &c)| (0.5 * (w[0] + w[1]), c))
        .collect();
    io::write_curve_csv(out, &centers)?;
    io::write_sidecar(
        out,
        &meta(
            "spacings",
            json!({
                "in": input.display().to_string(),
                "draws": draws,
                "sets": sets,
                "bins": bins,
                "seed": seed,
                "mean_spacing": hist.mean_spacing,
            }),
        ),
    )
}

pub fn ipr(input: &Path, sigma: &str, grid: Option<&str>, out: &Path) -> Result<()> {
    let members = io::read_matrix_jsonl(input)?;
    let systems = ensemble_eigensystems(&members)?;
    let policy = parse_sigma(sigma)?;
    let grid = match grid {
        Some(spec) => parse_grid(spec)?,
        None => {
            let (lo, hi) = pooled_range(&systems);
            let pad = 0.05 * (hi - lo).max(1e-9);
            linspace(lo - pad, hi + pad, 400)
        }
    };
    let curve = expected_pr(&systems, &grid, policy)?;
    let points: Vec<(f64, f64)> = curve.grid.iter().copied().zip(curve.pr.iter().copied()).collect();
    io::write_curve_csv(out, &points)?;
    io::write_sidecar(
        out,
        &meta(
            "ipr",
            json!({
                "in": input.display().to_string(),
                "sigma_policy": sigma,
                "sigma_mean": curve.sigma,
                "dropped_members": curve.dropped,
                "grid_points": grid.len(),
            }),
        ),
    )
}

pub fn volatility(input: &Path, out: &Path) -> Result<()> {
    let members = io::read_matrix_jsonl(input)?;
    let systems = ensemble_eigensystems(&members)?;
    let m = systems[0].dim();
    let mut acc = vec![0.0f64; m];
    for es in &systems {
        if es.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: es.dim(),
            });
        }
        for (a, p) in acc.iter_mut().zip(cumulative_volatility(es)) {
            *a += p;
        }
    }
    let points: Vec<(f64, f64)> = acc
        .iter()
        .enumerate()
        .map(|(j, &s)| (j as f64, s / systems.len() as f64))
        .collect();
    io::write_curve_csv(out, &points)?;
    io::write_sidecar(
        out,
        &meta(
            "volatility",
            json!({"in": input.display().to_string(), "members": systems.len()}),
        ),
    )
}

pub fn clusters(input: &Path, out: &Path) -> Result<()> {
    let systems = io::read_eigs_json(input)?;
    let m = systems[0].dim();
    let levels = m;
    let mut measured = vec![0.0f64; levels];
    for es in &systems {
        if es.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: es.dim(),
            });
        }
        let tree = sign_partition(es);
        for (p, slot) in measured.iter_mut().enumerate() {
            *slot += cluster_count(&tree, p) as f64;
        }
    }
    for v in &mut measured {
        *v /= systems.len() as f64;
    }
    let baseline: Vec<f64> = (0..levels).map(|p| trivial_count(m, p) as f64).collect();

    let mut buf = Vec::new();
    {
        let mut w = csv::WriterBuilder::new().from_writer(&mut buf);
        w.write_record(["p", "N_measured", "N_trivial"])?;
        for p in 0..levels {
            w.write_record([p.to_string(), format!("{}", measured[p]), format!("{}", baseline[p])])?;
        }
        w.flush()?;
    }
    io::write_atomic(out, &buf)?;

    let p0 = fit_p0(&measured, &baseline).ok();
    if let Some(fit) = &p0 {
        println!("characteristic partition p0 = {:.6}", fit.p0);
    }
    io::write_sidecar(
        out,
        &meta(
            "clusters",
            json!({
                "in": input.display().to_string(),
                "members": systems.len(),
                "p0": p0.as_ref().map(|f| f.p0),
                "p0_excluded_levels": p0.as_ref().map(|f| f.excluded.clone()),
            }),
        ),
    )
}

fn mean_matrix(input: &Path) -> Result<CorrelationMatrix> {
    let members = io::read_matrix_jsonl(input)?;
    CorrelationMatrix::ensemble_mean(&members)
}

pub fn dist(input: &Path, metric: MetricKind, out: &Path) -> Result<()> {
    let mean = mean_matrix(input)?;
    let d = match metric {
        MetricKind::Euclid => euclid_dist(&mean)?,
        MetricKind::Spectral => spectral_dist(&eig_sym(&mean)?)?,
    };
    io::write_matrix_csv(out, d.labels(), |i, j| d.get(i, j))?;
    io::write_sidecar(
        out,
        &meta(
            "dist",
            json!({
                "in": input.display().to_string(),
                "metric": match metric { MetricKind::Euclid => "euclid", MetricKind::Spectral => "spectral" },
                "aggregation": "ensemble mean",
            }),
        ),
    )
}

pub fn mst(input: &Path, out: &Path) -> Result<()> {
    let d = io::read_distance_csv(input)?;
    let tree = mst_prim(&d)?;
    io::write_dot(out, &tree, "mst")?;
    io::write_sidecar(
        out,
        &meta(
            "mst",
            json!({
                "in": input.display().to_string(),
                "total_weight": tree.total_weight,
                "edges": tree.edges.len(),
            }),
        ),
    )
}

pub fn dendro(input: &Path, out: &Path, coph_out: Option<&Path>) -> Result<()> {
    let d = io::read_distance_csv(input)?;
    let dendro = single_linkage(&d)?;
    io::write_dendro_json(out, &dendro)?;
    if let Some(path) = coph_out {
        let coph = cophenetic(&dendro)?;
        io::write_matrix_csv(path, coph.labels(), |i, j| coph.get(i, j))?;
        io::write_sidecar(
            path,
            &meta("dendro", json!({"in": input.display().to_string(), "artifact": "cophenetic"})),
        )?;
    }
    io::write_sidecar(
        out,
        &meta(
            "dendro",
            json!({
                "in": input.display().to_string(),
                "merges": dendro.merges.len(),
            }),
        ),
    )
}

/// Full pipeline: prices -> returns -> bootstrap ensemble -> spectra ->
/// every curve and network artifact, under one output directory.
pub fn pipeline(args: PipelineArgs) -> Result<()> {
    std::fs::create_dir_all(&args.outdir)?;
    let dir = args.outdir.as_path();
    let pjoin = |name: &str| dir.join(name);

    let prices: PriceMatrix = ingest::load_csv(&args.input)?;
    let r = log_returns(&prices)?;
    let nr = normalize(&r, prices.symbols())?;
    ingest::write_timeseries_csv(pjoin("returns.csv").as_path(), nr.labels(), &prices.timestamps()[1..], nr.matrix())?;

    let spec = BootstrapSpec {
        window: args.window,
        samples: args.samples,
        seed: args.seed,
    };
    let ens = bootstrap_windows(&nr, &spec)?;
    let members = eigenfolio::par::indexed_map(ens.windows.len(), |i| {
        correlation(&ens.windows[i].matrix, nr.labels())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    io::write_matrix_jsonl(pjoin("lambda.jsonl").as_path(), &members)?;

    let systems = ensemble_eigensystems(&members)?;
    io::write_eigs_json(pjoin("eigs.json").as_path(), &systems)?;

    // explained volatility
    let m = systems[0].dim();
    let mut phi_acc = vec![0.0f64; m];
    for es in &systems {
        for (a, p) in phi_acc.iter_mut().zip(cumulative_volatility(es)) {
            *a += p;
        }
    }
    let phi: Vec<(f64, f64)> = phi_acc
        .iter()
        .enumerate()
        .map(|(j, &s)| (j as f64, s / systems.len() as f64))
        .collect();
    io::write_curve_csv(pjoin("phi.csv").as_path(), &phi)?;

    // density of states and spacing statistics
    let eta = args.eta.unwrap_or_else(|| auto_eta(&systems));
    let grid = auto_grid(&systems, eta, args.grid_points);
    let dos_curve = dos_green(&systems, &grid, eta)?;
    let dos_points: Vec<(f64, f64)> = dos_curve
        .grid
        .iter()
        .copied()
        .zip(dos_curve.density.iter().copied())
        .collect();
    io::write_curve_csv(pjoin("dos.csv").as_path(), &dos_points)?;

    let hist = unfold_and_spacings(&dos_curve, args.draws, args.sets, args.bins, args.seed)?;
    let centers: Vec<(f64, f64)> = hist
        .bin_edges
        .windows(2)
        .zip(&hist.counts)
        .map(|(w, &c)| (0.5 * (w[0] + w[1]), c))
        .collect();
    io::write_curve_csv(pjoin("spacings.csv").as_path(), &centers)?;

    // participation ratio
    let pr_curve = expected_pr(&systems, &grid, SigmaPolicy::Auto)?;
    let pr_points: Vec<(f64, f64)> = pr_curve
        .grid
        .iter()
        .copied()
        .zip(pr_curve.pr.iter().copied())
        .collect();
    io::write_curve_csv(pjoin("pr.csv").as_path(), &pr_points)?;

    // cluster scaling
    let mut measured = vec![0.0f64; m];
    for es in &systems {
        let tree = sign_partition(es);
        for (p, slot) in measured.iter_mut().enumerate() {
            *slot += cluster_count(&tree, p) as f64;
        }
    }
    for v in &mut measured {
        *v /= systems.len() as f64;
    }
    let baseline: Vec<f64> = (0..m).map(|p| trivial_count(m, p) as f64).collect();
    let mut buf = Vec::new();
    {
        let mut w = csv::WriterBuilder::new().from_writer(&mut buf);
        w.write_record(["p", "N_measured", "N_trivial"])?;
        for p in 0..m {
            w.write_record([p.to_string(), format!("{}", measured[p]), format!("{}", baseline[p])])?;
        }
        w.flush()?;
    }
    io::write_atomic(pjoin("clusters.csv").as_path(), &buf)?;
    let p0 = fit_p0(&measured, &baseline).ok();

    // networks and dendrograms on the ensemble-mean correlation
    let mean = CorrelationMatrix::ensemble_mean(&members)?;
    let mean_es = eig_sym(&mean)?;
    let metrics: [(&str, DistanceMatrix); 2] = [
        ("euclid", euclid_dist(&mean)?),
        ("spectral", spectral_dist(&mean_es)?),
    ];
    for (name, d) in &metrics {
        io::write_matrix_csv(pjoin(&format!("dist_{name}.csv")).as_path(), d.labels(), |i, j| {
            d.get(i, j)
        })?;
        let tree = mst_prim(d)?;
        io::write_dot(pjoin(&format!("mst_{name}.dot")).as_path(), &tree, "mst")?;
        let dendro = single_linkage(d)?;
        io::write_dendro_json(pjoin(&format!("dendro_{name}.json")).as_path(), &dendro)?;
        let coph = cophenetic(&dendro)?;
        io::write_matrix_csv(
            pjoin(&format!("cophenetic_{name}.csv")).as_path(),
            coph.labels(),
            |i, j| coph.get(i, j),
        )?;
    }

    // one sidecar for the whole run, plus per-file config stamps
    let params = json!({
        "in": args.input.display().to_string(),
        "window": args.window,
        "samples": args.samples,
        "seed": args.seed,
        "eta": eta,
        "draws": args.draws,
        "sets": args.sets,
        "bins": args.bins,
        "grid_points": args.grid_points,
        "rejected_windows": ens.rejected,
        "mean_spacing": hist.mean_spacing,
        "p0": p0.as_ref().map(|f| f.p0),
    });
    for name in [
        "returns.csv",
        "lambda.jsonl",
        "eigs.json",
        "phi.csv",
        "dos.csv",
        "spacings.csv",
        "pr.csv",
        "clusters.csv",
        "dist_euclid.csv",
        "dist_spectral.csv",
        "mst_euclid.dot",
        "mst_spectral.dot",
        "dendro_euclid.json",
        "dendro_spectral.json",
        "cophenetic_euclid.csv",
        "cophenetic_spectral.csv",
    ] {
        io::write_sidecar(pjoin(name).as_path(), &meta("pipeline", params.clone()))?;
    }
    println!(
        "pipeline complete: {} assets, {} samples, outputs in {}",
        m,
        args.samples,
        dir.display()
    );
    Ok(())
}
