//! `olscert` command-line tool.
//!
//! Exit status: 0 on success, 2 on usage errors, 1 when the library refuses
//! the request (out-of-domain inputs, rank deficiency, bad files). In the
//! last case stderr carries a one-line JSON object `{"error": .., "message": ..}`.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use olscert::bench::{self, ExperimentConfig};
use olscert::coherence::{profile, MeasurementMatrix};
use olscert::guarantees::{self, NoisyBoundReport, ThresholdReport};
use olscert::solvers::{recover, Algorithm, SolverConfig};
use olscert::{io, Error, IndexSet};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "olscert", version, about = "Greedy sparse recovery and coherence-based certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coherence profile of a matrix file, or sparsity thresholds for given coherences.
    Bounds(BoundsArgs),
    /// Exact recovery indicator at one point of a greedy trajectory.
    Erc(ErcArgs),
    /// Run OLS, MOLS or BOLS on a measurement vector.
    Recover(RecoverArgs),
    /// Monte Carlo success-frequency curve, written as CSV.
    Sweep(SweepArgs),
    /// Minimum entry magnitudes for recovery under Gaussian noise.
    NoisyBounds(NoisyArgs),
    /// Check the projected-column-norm lower bound on every admissible support.
    LemmaCheck(LemmaArgs),
}

#[derive(Args)]
struct Output {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Matrix file; prints mu, mu_block, nu and the Welch bound.
    #[arg(long, conflicts_with_all = ["mu", "mu_block", "nu", "k", "sigma", "m", "l"])]
    matrix: Option<PathBuf>,
    #[arg(long, required_unless_present = "matrix")]
    mu: Option<f64>,
    /// Block-coherence; selects the block (BOLS) formulas.
    #[arg(long = "mu-block", requires = "mu")]
    mu_block: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    #[arg(long = "block-len", default_value_t = 1)]
    block_len: usize,
    /// Sparsity `K` (block count `k` with --mu-block) for T and the probability bound.
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long, requires_all = ["k", "m"])]
    sigma: Option<f64>,
    #[arg(long = "M")]
    m: Option<usize>,
    /// Iteration index for the noisy floor.
    #[arg(long, default_value_t = 0)]
    l: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ErcArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// True support (block indices when --block-len > 1), comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    support: Vec<usize>,
    /// Already selected part of the support.
    #[arg(long, value_delimiter = ',')]
    selected: Vec<usize>,
    #[arg(long = "block-len", default_value_t = 1)]
    block_len: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Measurement vector file (M x 1 or 1 x M).
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value = "ols", value_parser = parse_algo)]
    algo: Algorithm,
    /// Iteration budget: K for OLS/MOLS, block count k for BOLS.
    #[arg(long = "K", alias = "sparsity")]
    k: usize,
    #[arg(long = "L", default_value_t = 2)]
    l: usize,
    #[arg(long = "block-len", default_value_t = 1)]
    block_len: usize,
    /// Residual tolerance.
    #[arg(long, default_value_t = olscert::solvers::DEFAULT_RESIDUAL_TOL)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment config; the flags below are used when it is absent.
    #[arg(long, conflicts_with_all = ["algo", "m", "n", "sparsity"])]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_algo, required_unless_present = "config")]
    algo: Option<Algorithm>,
    #[arg(long = "M", required_unless_present = "config")]
    m: Option<usize>,
    #[arg(long = "N", required_unless_present = "config")]
    n: Option<usize>,
    #[arg(long = "block-len")]
    block_len: Option<usize>,
    /// Total sparsity grid (K, or kd for BOLS), comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "config")]
    sparsity: Option<Vec<usize>>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Overrides the config's seed (which defaults to 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for the CSV, named after the config hash.
    #[arg(long = "out-dir", env = "OLSCERT_OUT_DIR", conflicts_with = "out")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct NoisyArgs {
    #[arg(long)]
    mu: f64,
    /// Block-coherence; selects the block floors.
    #[arg(long = "mu-block")]
    mu_block: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    #[arg(long = "block-len", default_value_t = 1)]
    block_len: usize,
    /// K, or block count k with --mu-block.
    #[arg(long = "K")]
    k: usize,
    #[arg(long, default_value_t = 0)]
    l: usize,
    #[arg(long)]
    sigma: f64,
    #[arg(long = "M")]
    m: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct LemmaArgs {
    /// Matrix file to check; otherwise seeded Gaussian matrices are drawn.
    #[arg(long, conflicts_with_all = ["m", "n", "instances"])]
    matrix: Option<PathBuf>,
    #[arg(long = "M", required_unless_present = "matrix")]
    m: Option<usize>,
    #[arg(long = "N", required_unless_present = "matrix")]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    instances: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// K, or block count k when --block-len > 1.
    #[arg(long = "K")]
    k: usize,
    #[arg(long = "block-len", default_value_t = 1)]
    block_len: usize,
    #[command(flatten)]
    output: Output,
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

type CliResult = Result<(), Error>;

fn emit(output: &Output, text: &str) -> CliResult {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(output: &Output, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    emit(output, &text)
}

fn load_matrix(path: &PathBuf, block_len: usize) -> Result<MeasurementMatrix, Error> {
    MeasurementMatrix::new(io::read_matrix(path)?, block_len)
}

#[derive(Serialize)]
struct BoundsReport {
    threshold: ThresholdReport,
    /// Small-coherence limit of the threshold; keyed `asymptotic_ols` or
    /// `asymptotic_bols`.
    #[serde(skip_serializing_if = "Option::is_none")]
    asymptotic_ols: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    asymptotic_bols: Option<f64>,
    /// OMP (or block OMP) comparison bound.
    omp_bound: f64,
    coherence_cap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    projection_lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    projection_bound_classic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probability_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noisy: Option<NoisyBoundReport>,
}

fn bounds(a: BoundsArgs) -> CliResult {
    if let Some(path) = &a.matrix {
        let d = load_matrix(path, a.block_len)?;
        return emit_json(&a.output, &profile(&d));
    }
    let mu = a.mu.expect("clap enforces --mu without --matrix");
    let block = a.mu_block.map(|mb| (mb, a.nu, a.block_len));
    let (threshold, asymptotic, omp_bound) = match block {
        None => (
            guarantees::cardano_threshold_ols(mu)?,
            guarantees::asymptotic_ols(mu)?,
            guarantees::tropp_omp(mu)?,
        ),
        Some((mb, nu, d)) => (
            guarantees::cardano_threshold_bols(mu, mb, nu, d)?,
            guarantees::asymptotic_bols(mb, d)?,
            guarantees::bomp_bound(mb, d)?,
        ),
    };
    let mut rep = BoundsReport {
        threshold,
        asymptotic_ols: block.is_none().then_some(asymptotic),
        asymptotic_bols: block.is_some().then_some(asymptotic),
        omp_bound,
        coherence_cap: guarantees::coherence_cap(mu)?,
        t: None,
        projection_lower_bound: None,
        projection_bound_classic: None,
        probability_bound: None,
        noisy: None,
    };
    if let Some(k) = a.k {
        let (t, d) = match block {
            None => (guarantees::t_factor(mu, k)?, 1),
            Some((_, nu, d)) => (guarantees::t_factor_block(mu, nu, k, d)?, d),
        };
        rep.t = Some(t);
        rep.projection_lower_bound = Some(1.0 / t.sqrt());
        rep.projection_bound_classic = guarantees::projection_bound_classic(mu, k * d).ok();
        if let Some(m) = a.m {
            let tau = block.map_or(mu, |(mb, _, _)| mb);
            rep.probability_bound = guarantees::probability_bound(m, k * d, tau, t, d).ok();
        }
        if let (Some(sigma), Some(m)) = (a.sigma, a.m) {
            rep.noisy = Some(match block {
                None => guarantees::noisy_floor_ols(mu, k, a.l, sigma, m)?,
                Some((mb, nu, d)) => guarantees::noisy_floor_bols(mu, mb, nu, k, d, a.l, sigma, m)?,
            });
        }
    }
    emit_json(&a.output, &rep)
}

#[derive(Serialize)]
struct ErcReport {
    indicator: f64,
    certified: bool,
}

fn erc(a: ErcArgs) -> CliResult {
    let d = load_matrix(&a.matrix, a.block_len)?;
    let support = IndexSet::new(a.support)?;
    let selected = IndexSet::new(a.selected)?;
    let indicator = if a.block_len == 1 {
        guarantees::erc_indicator_ols(&d, &support, &selected)?
    } else {
        guarantees::erc_indicator_bols(&d, &support, &selected)?
    };
    emit_json(
        &a.output,
        &ErcReport {
            indicator,
            certified: indicator < 1.0,
        },
    )
}

fn recover_cmd(a: RecoverArgs) -> CliResult {
    let d = load_matrix(&a.matrix, a.block_len)?;
    let y = io::read_vector(&a.y)?;
    let cfg = SolverConfig::new(a.k).with_l(a.l).with_tol(a.tol);
    emit_json(&a.output, &recover(a.algo, &d, &y, &cfg)?)
}

fn sweep(a: SweepArgs) -> CliResult {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::read(path)?,
        None => ExperimentConfig::new(
            a.algo.expect("clap enforces --algo"),
            a.m.expect("clap enforces --M"),
            a.n.expect("clap enforces --N"),
            a.sparsity.clone().expect("clap enforces --sparsity"),
        ),
    };
    if let Some(d) = a.block_len {
        cfg.d = d;
    }
    if let Some(l) = a.l {
        cfg.l = l;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.sigma {
        cfg.sigma = s;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = a.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let curve = pool.install(|| bench::run_curve(&cfg))?;

    match &a.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = bench::write_curve_in(dir, &cfg, &curve)?;
            println!("{}", path.display());
            Ok(())
        }
        None => emit(&a.output, &bench::curve_to_csv(&curve)),
    }
}

fn noisy(a: NoisyArgs) -> CliResult {
    let rep = match a.mu_block {
        None => guarantees::noisy_floor_ols(a.mu, a.k, a.l, a.sigma, a.m)?,
        Some(mb) => guarantees::noisy_floor_bols(a.mu, mb, a.nu, a.k, a.block_len, a.l, a.sigma, a.m)?,
    };
    emit_json(&a.output, &rep)
}

#[derive(Serialize)]
struct LemmaSummary {
    instances: usize,
    violations: usize,
    evaluations: usize,
    /// Smallest `‖P⊥_S D_i‖₂ − 1/√T` seen; negative means the bound was crossed.
    min_margin: f64,
    max_norm: f64,
    reports: Vec<guarantees::LemmaCheck>,
}

fn lemma_check(a: LemmaArgs) -> CliResult {
    let matrices: Vec<MeasurementMatrix> = match &a.matrix {
        Some(path) => vec![load_matrix(path, a.block_len)?],
        None => {
            let (m, n) = (a.m.expect("clap enforces --M"), a.n.expect("clap enforces --N"));
            (0..a.instances)
                .map(|i| bench::gaussian_matrix(&mut bench::trial_rng(a.seed, 0, i as usize), m, n, a.block_len))
                .collect::<Result<_, _>>()?
        }
    };
    let reports = matrices
        .iter()
        .map(|d| {
            if a.block_len == 1 {
                guarantees::lemma_check_ols(d, a.k)
            } else {
                guarantees::lemma_check_bols(d, a.k)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let summary = LemmaSummary {
        instances: reports.len(),
        violations: reports.iter().map(|r| r.violations).sum(),
        evaluations: reports.iter().map(|r| r.evaluations).sum(),
        min_margin: reports
            .iter()
            .map(|r| r.min_norm - r.lower_bound)
            .fold(f64::INFINITY, f64::min),
        max_norm: reports.iter().map(|r| r.max_norm).fold(0.0, f64::max),
        reports,
    };
    emit_json(&a.output, &summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => bounds(a),
        Command::Erc(a) => erc(a),
        Command::Recover(a) => recover_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::NoisyBounds(a) => noisy(a),
        Command::LemmaCheck(a) => lemma_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
