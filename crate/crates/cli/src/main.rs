//! `snns` — generate planted datasets, build spectral indexes, run queries,
//! and verify the numerical bounds behind them.
//!
//! stdout carries machine-readable JSON or CSV only; progress and wall times
//! go to stderr, so piped output is stable across runs with equal flags.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use snns_core::genmodel::{
    self, brute_force_nn, gen_planted, perturb_adversarial, perturb_gaussian, Adversary, Geometry,
    NoiseMode, NoisyInstance,
};
use snns_core::io::{
    file_sha256, load_iterpca, load_tree, read_dataset, read_matrix, save_iterpca, save_tree,
    write_dataset, DatasetSidecar,
};
use snns_core::iterpca::{build_iterpca, build_warmup, CaptureMode, IterPcaParams, Variant};
use snns_core::pcatree::{build_tree, query_tree, PcaTreeParams};
use snns_core::verify::{
    check_chi_square_tail, check_iterpca_diagnostics, check_nn_preserved,
    check_pcatree_diagnostics, check_spectral_norm_bound, check_submatrix_norm_bound, check_wedin,
    DiagnosticsConfig, VerifyReport,
};
use snns_core::{seeds, DenseMatrix};
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "snns",
    version,
    about = "Nearest-neighbor search for low-dimensional signals in high-dimensional noise"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a planted dataset (binary matrix + JSON sidecar).
    Gen(GenArgs),
    /// Build an index over a dataset and write it next to the data.
    Build(BuildArgs),
    /// Run queries against an index (or a brute-force scan) and emit CSV.
    Query(QueryArgs),
    /// Run a numerical check and emit its report as JSON; exits 0 iff it passes.
    Verify(VerifyArgs),
    /// Generate, build, and query across seeds in one run; emit a single CSV.
    Eval(EvalArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    /// Per-coordinate noise deviation, or "auto" for 0.05·ε/(d·ln n)^¼.
    #[arg(long, default_value = "auto")]
    sigma: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Noise stream seed; defaults to a value derived from --seed.
    #[arg(long)]
    noise_seed: Option<u64>,
    #[arg(long, default_value = "random-cluster", value_parser = parse_geometry)]
    geometry: Geometry,
    #[arg(long, default_value = "full-gaussian", value_parser = parse_noise_mode)]
    noise_mode: NoiseMode,
    /// Output stem; writes <out>.bin and <out>.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    /// warmup | iterpca | pcatree
    #[arg(long)]
    algo: String,
    /// Dataset stem (expects <dataset>.bin and <dataset>.json).
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Sampling seed for the iterpca build.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sample size per iteration; defaults to max(4k, min(n/2, ⌈k·d·ln n⌉)).
    #[arg(long)]
    r: Option<usize>,
    /// threshold | fraction
    #[arg(long, default_value = "threshold")]
    capture: String,
    /// Capture share for fraction mode; defaults to √(ln n / d).
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = snns_core::iterpca::DEFAULT_C_THRESHOLD)]
    c_threshold: f64,
    #[arg(long, default_value_t = snns_core::iterpca::DEFAULT_C_ITER)]
    c_iter: f64,
    /// Leaf size for pcatree; defaults to d.
    #[arg(long)]
    stop_size: Option<usize>,
}

#[derive(Args)]
struct QueryArgs {
    /// warmup | iterpca | pcatree | scan
    #[arg(long)]
    algo: String,
    #[arg(long)]
    dataset: PathBuf,
    /// Index file; required for every algo except scan.
    #[arg(long)]
    index: Option<PathBuf>,
    /// "from-sidecar" or a path to a matrix file of query rows.
    #[arg(long, default_value = "from-sidecar")]
    queries: String,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill the micros column with wall times (breaks byte-determinism).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// wedin | chi2 | nn | specnorm | subnorm | iterpca | pcatree
    #[arg(long)]
    check: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    subsets: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Dataset stem (iterpca / pcatree diagnostics).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Index file (iterpca / pcatree diagnostics).
    #[arg(long)]
    index: Option<PathBuf>,
    /// Subspace-angle bound multiplier for the diagnostics checks.
    #[arg(long)]
    c_sin: Option<f64>,
    /// Iteration bound multiplier for the diagnostics checks.
    #[arg(long)]
    c_iter: Option<f64>,
    /// Direction-heaviness bound multiplier for the diagnostics checks.
    #[arg(long)]
    c_gamma: Option<f64>,
    /// Capture-fraction floor multiplier for the diagnostics checks.
    #[arg(long)]
    eta_min_factor: Option<f64>,
    /// Also write the report JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value = "auto")]
    sigma: String,
    #[arg(long, default_value = "random-cluster", value_parser = parse_geometry)]
    geometry: Geometry,
    #[arg(long, default_value = "full-gaussian", value_parser = parse_noise_mode)]
    noise_mode: NoiseMode,
    /// Instance seeds to sweep.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Extra queries per instance on top of the sidecar query.
    #[arg(long, default_value_t = 20)]
    queries: u64,
    /// Comma-separated: scan,warmup,iterpca,pcatree
    #[arg(long, default_value = "scan,iterpca,pcatree")]
    algos: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_geometry(s: &str) -> Result<Geometry, String> {
    match s {
        "random-cluster" => Ok(Geometry::RandomCluster),
        "sparse-direction-adversarial" => Ok(Geometry::SparseDirectionAdversarial),
        _ => Err(format!(
            "unknown geometry '{s}' (random-cluster | sparse-direction-adversarial)"
        )),
    }
}

fn parse_noise_mode(s: &str) -> Result<NoiseMode, String> {
    match s {
        "full-gaussian" => Ok(NoiseMode::FullGaussian),
        "orthogonal-gaussian" => Ok(NoiseMode::OrthogonalGaussian),
        "adversarial-toward-query" => Ok(NoiseMode::AdversarialTowardQuery),
        "adversarial-random-direction" => Ok(NoiseMode::AdversarialRandomDirection),
        _ => Err(format!(
            "unknown noise mode '{s}' (full-gaussian | orthogonal-gaussian | \
             adversarial-toward-query | adversarial-random-direction)"
        )),
    }
}

fn parse_sigma(s: &str, eps: f64, d: usize, n: usize) -> Result<f64> {
    if s == "auto" {
        return Ok(genmodel::sigma_auto(eps, d, n));
    }
    let v: f64 = s
        .parse()
        .with_context(|| format!("--sigma must be a number or 'auto', got '{s}'"))?;
    if !(v >= 0.0 && v.is_finite()) {
        bail!("--sigma must be finite and nonnegative, got {v}");
    }
    Ok(v)
}

fn main() {
    if let Ok(threads) = std::env::var("SNNS_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global();
        }
    }
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(pass) => {
            if pass {
                0
            } else {
                1
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args).map(|()| true),
        Cmd::Build(args) => cmd_build(args).map(|()| true),
        Cmd::Query(args) => cmd_query(args).map(|()| true),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Eval(args) => cmd_eval(args).map(|()| true),
    }
}

#[allow(clippy::too_many_arguments)]
fn make_noisy(
    n: usize,
    d: usize,
    k: usize,
    eps: f64,
    sigma: f64,
    geometry: Geometry,
    noise_mode: NoiseMode,
    seed: u64,
    noise_seed: u64,
) -> Result<NoisyInstance> {
    let inst = gen_planted(n, d, k, eps, geometry, seed)?;
    let noisy = match noise_mode {
        NoiseMode::FullGaussian => perturb_gaussian(&inst, sigma, false, noise_seed)?,
        NoiseMode::OrthogonalGaussian => perturb_gaussian(&inst, sigma, true, noise_seed)?,
        NoiseMode::AdversarialTowardQuery => {
            perturb_adversarial(&inst, Adversary::TowardQuery, noise_seed)?
        }
        NoiseMode::AdversarialRandomDirection => {
            perturb_adversarial(&inst, Adversary::RandomDirection, noise_seed)?
        }
    };
    Ok(noisy)
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let sigma = parse_sigma(&args.sigma, args.eps, args.d, args.n)?;
    if matches!(
        args.noise_mode,
        NoiseMode::AdversarialTowardQuery | NoiseMode::AdversarialRandomDirection
    ) && args.sigma != "auto"
        && sigma != 0.0
    {
        eprintln!("note: adversarial noise uses displacement eps/16; --sigma is ignored");
    }
    let noise_seed = args
        .noise_seed
        .unwrap_or_else(|| seeds::derive(args.seed, 0x6e6f_6973));
    let start = Instant::now();
    let noisy = make_noisy(
        args.n,
        args.d,
        args.k,
        args.eps,
        sigma,
        args.geometry,
        args.noise_mode,
        args.seed,
        noise_seed,
    )?;
    write_dataset(&args.out, &noisy)?;
    eprintln!(
        "wrote {}.bin and {}.json in {:.3}s",
        args.out.display(),
        args.out.display(),
        start.elapsed().as_secs_f64()
    );
    let summary = serde_json::json!({
        "n": args.n,
        "d": args.d,
        "k": args.k,
        "epsilon": args.eps,
        "sigma": noisy.sigma,
        "geometry": args.geometry,
        "noise_mode": args.noise_mode,
        "seed": args.seed,
        "noise_seed": noise_seed,
        "planted_index": noisy.base.planted_index,
    });
    println!("{summary}");
    Ok(())
}

#[derive(serde::Serialize)]
struct IterPcaBuildOut<'a> {
    algo: &'a str,
    n: usize,
    d: usize,
    k: usize,
    epsilon: f64,
    sigma: f64,
    r: usize,
    layers: usize,
    leftover: usize,
    stats: &'a snns_core::iterpca::BuildStats,
}

#[derive(serde::Serialize)]
struct TreeBuildOut<'a> {
    algo: &'a str,
    n: usize,
    d: usize,
    k: usize,
    epsilon: f64,
    theta: f64,
    stop_size: usize,
    stats: &'a snns_core::pcatree::TreeStats,
}

fn cmd_build(args: BuildArgs) -> Result<()> {
    let (points, sidecar) = read_dataset(&args.dataset)?;
    let hash = file_sha256(&args.dataset.with_extension("bin"))?;
    let model = &sidecar.model;
    let start = Instant::now();
    match args.algo.as_str() {
        "warmup" => {
            let index = build_warmup(&points, model.k, model.epsilon)?;
            save_iterpca(&args.out, &index, &hash)?;
            let out = IterPcaBuildOut {
                algo: "warmup",
                n: model.n,
                d: model.d,
                k: model.k,
                epsilon: model.epsilon,
                sigma: model.sigma,
                r: index.params.r,
                layers: index.layers.len(),
                leftover: index.leftover_ids.len(),
                stats: &index.stats,
            };
            println!("{}", serde_json::to_string(&out)?);
        }
        "iterpca" => {
            let r = args
                .r
                .unwrap_or_else(|| IterPcaParams::default_r(model.n, model.d, model.k));
            let capture = match args.capture.as_str() {
                "threshold" => CaptureMode::Threshold,
                "fraction" => CaptureMode::Fraction {
                    eta: args
                        .eta
                        .unwrap_or_else(|| IterPcaParams::default_eta(model.n, model.d)),
                },
                other => bail!("unknown capture mode '{other}' (threshold | fraction)"),
            };
            let params = IterPcaParams {
                k: model.k,
                epsilon: model.epsilon,
                sigma: model.sigma,
                r,
                c_threshold: args.c_threshold,
                c_iter: args.c_iter,
                capture,
                seed: args.seed,
            };
            let index = build_iterpca(&points, &params)?;
            save_iterpca(&args.out, &index, &hash)?;
            let out = IterPcaBuildOut {
                algo: "iterpca",
                n: model.n,
                d: model.d,
                k: model.k,
                epsilon: model.epsilon,
                sigma: model.sigma,
                r,
                layers: index.layers.len(),
                leftover: index.leftover_ids.len(),
                stats: &index.stats,
            };
            println!("{}", serde_json::to_string(&out)?);
        }
        "pcatree" => {
            let mut params = PcaTreeParams::new(model.k, model.epsilon, model.d);
            if let Some(s) = args.stop_size {
                params.stop_size = s;
            }
            let tree = build_tree(&points, &params)?;
            save_tree(&args.out, &tree, &hash)?;
            let out = TreeBuildOut {
                algo: "pcatree",
                n: model.n,
                d: model.d,
                k: model.k,
                epsilon: model.epsilon,
                theta: params.theta(),
                stop_size: params.stop_size,
                stats: &tree.stats,
            };
            println!("{}", serde_json::to_string(&out)?);
        }
        other => bail!("unknown algo '{other}' (warmup | iterpca | pcatree)"),
    }
    eprintln!("built {} in {:.3}s", args.out.display(), start.elapsed().as_secs_f64());
    Ok(())
}

struct QueryRow {
    query_id: usize,
    returned_id: usize,
    truth_id: Option<usize>,
    distance: f64,
    visits: usize,
    micros: u128,
}

fn csv_line(row: &QueryRow) -> String {
    let (truth, correct) = match row.truth_id {
        Some(t) => (t.to_string(), (row.returned_id == t).to_string()),
        None => (String::new(), String::new()),
    };
    format!(
        "{},{},{},{},{},{},{}",
        row.query_id, row.returned_id, truth, row.distance, correct, row.visits, row.micros
    )
}

const CSV_HEADER: &str = "query_id,returned_id,planted_id,distance,correct,visits,micros";

enum Engine {
    Scan(DenseMatrix),
    Layered(snns_core::IterPcaIndex),
    Tree(snns_core::PcaTree),
}

impl Engine {
    fn run(&self, q: &[f64]) -> Result<(usize, f64, usize)> {
        match self {
            Engine::Scan(points) => {
                let (id, dist) = brute_force_nn(points, q)?;
                Ok((id, dist, points.rows()))
            }
            Engine::Layered(index) => {
                let out = snns_core::iterpca::query(index, q)?;
                Ok((out.id, out.distance, out.visited))
            }
            Engine::Tree(tree) => {
                let out = query_tree(tree, q)?;
                Ok((out.id, out.distance, out.points_scanned))
            }
        }
    }
}

fn load_engine(
    algo: &str,
    index: Option<&Path>,
    dataset: &Path,
    points: &DenseMatrix,
) -> Result<Engine> {
    let need_index = || {
        index.ok_or_else(|| anyhow!("--index is required for algo '{algo}'"))
    };
    match algo {
        "scan" => Ok(Engine::Scan(points.clone())),
        "warmup" | "iterpca" => {
            let hash = file_sha256(&dataset.with_extension("bin"))?;
            let idx = load_iterpca(need_index()?, points, &hash)?;
            let expected = if algo == "warmup" {
                Variant::Warmup
            } else {
                Variant::Full
            };
            if idx.variant != expected {
                bail!(
                    "index file holds the {:?} variant but --algo asked for {algo}",
                    idx.variant
                );
            }
            Ok(Engine::Layered(idx))
        }
        "pcatree" => {
            let hash = file_sha256(&dataset.with_extension("bin"))?;
            Ok(Engine::Tree(load_tree(need_index()?, points, &hash)?))
        }
        other => bail!("unknown algo '{other}' (warmup | iterpca | pcatree | scan)"),
    }
}

fn cmd_query(args: QueryArgs) -> Result<()> {
    let (points, sidecar) = read_dataset(&args.dataset)?;
    let engine = load_engine(&args.algo, args.index.as_deref(), &args.dataset, &points)?;

    let (queries, truth): (Vec<Vec<f64>>, Vec<Option<usize>>) = if args.queries == "from-sidecar" {
        (
            vec![sidecar.q_tilde.clone()],
            vec![Some(sidecar.planted_index)],
        )
    } else {
        let m = read_matrix(Path::new(&args.queries))?;
        if m.cols() != points.cols() {
            bail!(
                "query matrix has dimension {} but the dataset has {}",
                m.cols(),
                points.cols()
            );
        }
        let qs: Vec<Vec<f64>> = m.row_iter().map(<[f64]>::to_vec).collect();
        let t = vec![None; qs.len()];
        (qs, t)
    };

    let mut lines = Vec::with_capacity(queries.len() + 1);
    lines.push(CSV_HEADER.to_string());
    for (i, (q, truth_id)) in queries.iter().zip(&truth).enumerate() {
        let started = Instant::now();
        let (id, dist, visits) = engine.run(q)?;
        let micros = if args.timing {
            started.elapsed().as_micros()
        } else {
            0
        };
        lines.push(csv_line(&QueryRow {
            query_id: i,
            returned_id: id,
            truth_id: *truth_id,
            distance: dist,
            visits,
            micros,
        }));
    }

    let body = lines.join("\n") + "\n";
    match &args.out {
        Some(path) => File::create(path)?.write_all(body.as_bytes())?,
        None => print!("{body}"),
    }
    Ok(())
}

fn regen_instance(sidecar: &DatasetSidecar, points: &DenseMatrix) -> Result<NoisyInstance> {
    let m = &sidecar.model;
    let noisy = make_noisy(
        m.n, m.d, m.k, m.epsilon, m.sigma, m.geometry, m.noise_mode, m.seed, m.noise_seed,
    )?;
    if noisy.points.data() != points.data() {
        bail!(
            "dataset does not reproduce from its sidecar (file was edited or \
             generated by a different build)"
        );
    }
    Ok(noisy)
}

fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let need = |name: &str, v: Option<usize>| {
        v.ok_or_else(|| anyhow!("--{name} is required for --check {}", args.check))
    };
    let needf = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| anyhow!("--{name} is required for --check {}", args.check))
    };
    let mut cfg = DiagnosticsConfig::default();
    if let Some(v) = args.c_sin {
        cfg.c_sin = v;
    }
    if let Some(v) = args.c_iter {
        cfg.c_iter = v;
    }
    if let Some(v) = args.c_gamma {
        cfg.c_gamma = v;
    }
    if let Some(v) = args.eta_min_factor {
        cfg.eta_min_factor = v;
    }

    let report: VerifyReport = match args.check.as_str() {
        "wedin" => {
            let n = need("n", args.n)?;
            let d = need("d", args.d)?;
            let k = need("k", args.k)?;
            let m = args.m.unwrap_or(k);
            let sigma: f64 = args
                .sigma
                .as_deref()
                .unwrap_or("0.05")
                .parse()
                .context("--sigma must be numeric for wedin")?;
            check_wedin(n, d, k, m, sigma, args.trials.unwrap_or(100), args.seed)?
        }
        "chi2" => {
            let d = need("d", args.d)?;
            let x = needf("x", args.x)?;
            check_chi_square_tail(d, x, args.samples.unwrap_or(100_000), args.seed)?
        }
        "nn" => {
            let n = need("n", args.n)?;
            let d = need("d", args.d)?;
            let k = need("k", args.k)?;
            let eps = needf("eps", args.eps)?;
            let sigma = parse_sigma(args.sigma.as_deref().unwrap_or("auto"), eps, d, n)?;
            check_nn_preserved(n, d, k, eps, sigma, args.trials.unwrap_or(200), args.seed)?
        }
        "specnorm" => {
            let n = need("n", args.n)?;
            let d = need("d", args.d)?;
            let sigma: f64 = args
                .sigma
                .as_deref()
                .unwrap_or("1.0")
                .parse()
                .context("--sigma must be numeric for specnorm")?;
            check_spectral_norm_bound(n, d, sigma, args.trials.unwrap_or(50), args.seed)?
        }
        "subnorm" => {
            let n = need("n", args.n)?;
            let d = need("d", args.d)?;
            let sigma: f64 = args
                .sigma
                .as_deref()
                .unwrap_or("1.0")
                .parse()
                .context("--sigma must be numeric for subnorm")?;
            check_submatrix_norm_bound(
                n,
                d,
                sigma,
                args.trials.unwrap_or(20),
                args.subsets.unwrap_or(5),
                args.seed,
            )?
        }
        "iterpca" => {
            let dataset = args
                .dataset
                .as_ref()
                .ok_or_else(|| anyhow!("--dataset is required for --check iterpca"))?;
            let index_path = args
                .index
                .as_ref()
                .ok_or_else(|| anyhow!("--index is required for --check iterpca"))?;
            let (points, sidecar) = read_dataset(dataset)?;
            let noisy = regen_instance(&sidecar, &points)?;
            let hash = file_sha256(&dataset.with_extension("bin"))?;
            let index = load_iterpca(index_path, &points, &hash)?;
            check_iterpca_diagnostics(&noisy, &index, &cfg)?
        }
        "pcatree" => {
            let dataset = args
                .dataset
                .as_ref()
                .ok_or_else(|| anyhow!("--dataset is required for --check pcatree"))?;
            let index_path = args
                .index
                .as_ref()
                .ok_or_else(|| anyhow!("--index is required for --check pcatree"))?;
            let (points, sidecar) = read_dataset(dataset)?;
            let noisy = regen_instance(&sidecar, &points)?;
            let hash = file_sha256(&dataset.with_extension("bin"))?;
            let tree = load_tree(index_path, &points, &hash)?;
            check_pcatree_diagnostics(&noisy, &tree, &cfg)?
        }
        other => bail!(
            "unknown check '{other}' (wedin | chi2 | nn | specnorm | subnorm | iterpca | pcatree)"
        ),
    };

    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(path) = &args.out {
        let mut f = File::create(path)?;
        f.write_all(json.as_bytes())?;
        f.write_all(b"\n")?;
    }
    Ok(report.pass)
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let algos: Vec<&str> = args.algos.split(',').map(str::trim).collect();
    for algo in &algos {
        if !matches!(*algo, "scan" | "warmup" | "iterpca" | "pcatree") {
            bail!("unknown algo '{algo}' in --algos");
        }
    }
    let sigma = parse_sigma(&args.sigma, args.eps, args.d, args.n)?;

    let mut lines = Vec::new();
    lines.push(format!("seed,algo,{CSV_HEADER}"));
    let mut totals: std::collections::BTreeMap<&str, (usize, usize, usize)> =
        std::collections::BTreeMap::new();

    for s in 0..args.seeds {
        let inst_seed = seeds::derive(args.seed, s);
        let noise_seed = seeds::derive(args.seed, 0x0001_0000 | s);
        let noisy = make_noisy(
            args.n,
            args.d,
            args.k,
            args.eps,
            sigma,
            args.geometry,
            args.noise_mode,
            inst_seed,
            noise_seed,
        )?;

        // queries: the sidecar query, then fresh ones from the noise stream
        let mut queries = vec![noisy.query.clone()];
        for t in 0..args.queries {
            queries.push(noisy.extra_query(t)?);
        }
        let truths: Vec<usize> = queries
            .iter()
            .enumerate()
            .map(|(i, q)| {
                if i == 0 {
                    noisy.base.planted_index
                } else {
                    brute_force_nn(&noisy.points, q).expect("nonempty dataset").0
                }
            })
            .collect();

        for algo in &algos {
            let engine = match *algo {
                "scan" => Engine::Scan(noisy.points.clone()),
                "warmup" => Engine::Layered(build_warmup(
                    &noisy.points,
                    args.k,
                    args.eps,
                )?),
                "iterpca" => {
                    let r = IterPcaParams::default_r(args.n, args.d, args.k);
                    let params = IterPcaParams::new(
                        args.k,
                        args.eps,
                        noisy.sigma,
                        r,
                        seeds::derive(args.seed, 0x0002_0000 | s),
                    );
                    Engine::Layered(build_iterpca(&noisy.points, &params)?)
                }
                "pcatree" => Engine::Tree(build_tree(
                    &noisy.points,
                    &PcaTreeParams::new(args.k, args.eps, args.d),
                )?),
                _ => unreachable!("validated above"),
            };
            for (i, q) in queries.iter().enumerate() {
                let (id, dist, visits) = engine.run(q)?;
                let entry = totals.entry(algo).or_insert((0, 0, 0));
                entry.0 += 1;
                entry.1 += usize::from(id == truths[i]);
                entry.2 += visits;
                lines.push(format!(
                    "{},{},{}",
                    s,
                    algo,
                    csv_line(&QueryRow {
                        query_id: i,
                        returned_id: id,
                        truth_id: Some(truths[i]),
                        distance: dist,
                        visits,
                        micros: 0,
                    })
                ));
            }
        }
    }

    let body = lines.join("\n") + "\n";
    match &args.out {
        Some(path) => File::create(path)?.write_all(body.as_bytes())?,
        None => print!("{body}"),
    }
    for (algo, (total, correct, visits)) in totals {
        eprintln!(
            "{algo}: {correct}/{total} correct, mean visits {:.1}",
            visits as f64 / total as f64
        );
    }
    Ok(())
}
