//! Seeded Monte Carlo recovery experiments.
//!
//! Every trial draws a fresh matrix, signal and noise vector from its own
//! ChaCha stream, seeded with `SHA-256(seed ‖ grid index ‖ trial index)`.
//! Trials therefore run in any order on any number of threads, and the
//! integer tallies come out the same.

use std::fs::File;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coherence::{profile, MeasurementMatrix};
use crate::error::{Error, Result};
use crate::guarantees::{noisy_floor_bols, noisy_floor_ols};
use crate::matcore::{DenseMatrix, IndexSet};
use crate::solvers::{recover, Algorithm, BlockSparseSignal, SolverConfig, SparseSignal};

/// Extra room when comparing a trial's measured coherences with configured bounds.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// i.i.d. `N(0, 1/M)` entries, columns normalized afterwards.
    #[default]
    Gaussian,
    /// `[I | diag(s) H / √M]` with a Sylvester Hadamard `H` and random signs
    /// `s`: `μ = 1/√M`, `ν = 0`, `μ_B = √2/(2√M)` for `d = 2`. Needs `N = 2M`.
    IdentityHadamard,
}

/// How nonzero amplitudes are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Amplitude {
    /// Standard normal entries.
    #[default]
    Gaussian,
    /// Each nonzero entry (block, for `d > 1`) has magnitude `floor · (1 + |g|)`,
    /// `g ~ N(0,1)`, where `floor` is the noisy entry floor for the given
    /// coherence bounds. Trials whose matrix exceeds the bounds are errors.
    AboveFloor { mu: f64, mu_block: f64, nu: f64 },
}

fn default_block_len() -> usize {
    1
}
fn default_l() -> usize {
    2
}
fn default_trials() -> usize {
    200
}
fn default_radius() -> f64 {
    1e-6
}

/// One curve: an algorithm on a sparsity grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algo: Algorithm,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Block length of the signal model (and of BOLS).
    #[serde(default = "default_block_len")]
    pub d: usize,
    /// Total sparsity values: `K` for OLS/MOLS, `kd` for BOLS.
    pub sparsity: Vec<usize>,
    #[serde(rename = "L", default = "default_l")]
    pub l: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_radius")]
    pub success_radius: f64,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default)]
    pub amplitude: Amplitude,
}

impl ExperimentConfig {
    pub fn new(algo: Algorithm, m: usize, n: usize, sparsity: Vec<usize>) -> Self {
        Self {
            algo,
            m,
            n,
            d: 1,
            sparsity,
            l: default_l(),
            trials: default_trials(),
            sigma: 0.0,
            seed: 0,
            success_radius: default_radius(),
            ensemble: Ensemble::Gaussian,
            amplitude: Amplitude::Gaussian,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m == 0 || self.m > self.n {
            return bad(format!("need 1 <= M <= N (M={}, N={})", self.m, self.n));
        }
        if self.d == 0 || self.n % self.d != 0 {
            return bad(format!("d = {} must divide N = {}", self.d, self.n));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.sparsity.is_empty() {
            return bad("empty sparsity grid".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if !(self.success_radius > 0.0) {
            return bad("success radius must be positive".into());
        }
        if self.algo == Algorithm::Mols && self.l == 0 {
            return bad("MOLS needs L >= 1".into());
        }
        for &s in &self.sparsity {
            if s > self.m {
                return bad(format!("sparsity {s} exceeds M = {}", self.m));
            }
            if s % self.d != 0 {
                return bad(format!("sparsity {s} is not a multiple of d = {}", self.d));
            }
            if self.algo == Algorithm::Mols && s * self.l > self.m {
                return bad(format!("L * K = {} exceeds M = {}", s * self.l, self.m));
            }
        }
        if self.ensemble == Ensemble::IdentityHadamard
            && (self.n != 2 * self.m || !self.m.is_power_of_two())
        {
            return bad("identity/Hadamard ensemble needs M a power of two and N = 2M".into());
        }
        Ok(())
    }

    /// Solver budget at total sparsity `s`: `K` for OLS/MOLS, `k = s/d` blocks for BOLS.
    pub fn solver_config(&self, s: usize) -> SolverConfig {
        let budget = match self.algo {
            Algorithm::Bols => s / self.d,
            _ => s,
        };
        SolverConfig::new(budget).with_l(self.l)
    }

    /// Short hex digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(&json)[..8])
    }

    /// `<algo>-d<d>-<hash>.csv`.
    pub fn file_name(&self) -> String {
        format!("{}-d{}-{}.csv", self.algo, self.d, self.hash())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One grid point of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub sparsity: usize,
    pub trials: usize,
    pub successes: usize,
    /// Trials where the solver or a precondition check errored (counted as failures).
    pub errors: usize,
}

impl CurvePoint {
    pub fn frequency(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Success frequencies of one algorithm along a sparsity grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCurve {
    pub algo: Algorithm,
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub l: usize,
    pub sigma: f64,
    pub points: Vec<CurvePoint>,
}

impl FrequencyCurve {
    pub fn frequency_at(&self, sparsity: usize) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.sparsity == sparsity)
            .map(CurvePoint::frequency)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    algo: Algorithm,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    #[serde(rename = "L")]
    l: usize,
    sigma: f64,
    sparsity: usize,
    trials: usize,
    successes: usize,
    frequency: f64,
    errors: usize,
}

/// CSV header of [`write_csv`].
pub const CSV_HEADER: &str = "algo,M,N,d,L,sigma,sparsity,trials,successes,frequency,errors";

pub fn write_csv<W: std::io::Write>(curve: &FrequencyCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in &curve.points {
        w.serialize(CsvRow {
            algo: curve.algo,
            m: curve.m,
            n: curve.n,
            d: curve.d,
            l: curve.l,
            sigma: curve.sigma,
            sparsity: p.sparsity,
            trials: p.trials,
            successes: p.successes,
            frequency: p.frequency(),
            errors: p.errors,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn curve_to_csv(curve: &FrequencyCurve) -> String {
    let mut buf = Vec::new();
    write_csv(curve, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// Parses CSV written by [`write_csv`]; all rows must describe one curve.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<FrequencyCurve> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected header `{header}`")));
    }
    let mut curve: Option<FrequencyCurve> = None;
    for row in rdr.deserialize::<CsvRow>() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        let point = CurvePoint {
            sparsity: row.sparsity,
            trials: row.trials,
            successes: row.successes,
            errors: row.errors,
        };
        if row.trials == 0 || row.successes > row.trials || point.frequency() != row.frequency {
            return Err(Error::Parse(format!(
                "inconsistent counts at sparsity {}",
                row.sparsity
            )));
        }
        let c = curve.get_or_insert_with(|| FrequencyCurve {
            algo: row.algo,
            m: row.m,
            n: row.n,
            d: row.d,
            l: row.l,
            sigma: row.sigma,
            points: Vec::new(),
        });
        if (c.algo, c.m, c.n, c.d, c.l) != (row.algo, row.m, row.n, row.d, row.l)
            || c.sigma.to_bits() != row.sigma.to_bits()
        {
            return Err(Error::Parse("rows from more than one curve".into()));
        }
        c.points.push(point);
    }
    curve.ok_or_else(|| Error::Parse("no data rows".into()))
}

pub fn write_csv_file(curve: &FrequencyCurve, path: impl AsRef<Path>) -> Result<()> {
    write_csv(curve, File::create(path)?)
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<FrequencyCurve> {
    read_csv(File::open(path)?)
}

/// Writes the curve to `dir/<cfg.file_name()>` and returns the path.
pub fn write_curve_in(dir: impl AsRef<Path>, cfg: &ExperimentConfig, curve: &FrequencyCurve) -> Result<PathBuf> {
    let path = dir.as_ref().join(cfg.file_name());
    write_csv_file(curve, &path)?;
    Ok(path)
}

/// 32-byte seed of trial `trial` at grid point `grid`.
pub fn trial_seed(seed: u64, grid: usize, trial: usize) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((grid as u64).to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    h.finalize().into()
}

pub fn trial_rng(seed: u64, grid: usize, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(trial_seed(seed, grid, trial))
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, m: usize, n: usize, d: usize) -> Result<MeasurementMatrix> {
    let scale = 1.0 / (m as f64).sqrt();
    let mat = DMatrix::from_fn(m, n, |_, _| scale * normal(rng));
    MeasurementMatrix::new(DenseMatrix::from_nalgebra(mat)?, d)
}

/// `[I | diag(s) H / √M]` for `M` a power of two.
pub fn identity_hadamard_matrix<R: Rng>(rng: &mut R, m: usize, d: usize) -> Result<MeasurementMatrix> {
    if !m.is_power_of_two() {
        return Err(Error::InvalidConfig(format!("M = {m} is not a power of two")));
    }
    let signs: Vec<f64> = (0..m).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let scale = 1.0 / (m as f64).sqrt();
    let mat = DMatrix::from_fn(m, 2 * m, |i, j| {
        if j < m {
            if i == j { 1.0 } else { 0.0 }
        } else {
            // Sylvester entry: (−1)^popcount(i & j).
            let h = if ((i & (j - m)).count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
            signs[i] * h * scale
        }
    });
    MeasurementMatrix::new(DenseMatrix::from_nalgebra(mat)?, d)
}

/// Gaussian sensing matrix, deterministic in `seed`.
pub fn gen_matrix(m: usize, n: usize, d: usize, seed: u64) -> Result<MeasurementMatrix> {
    if m == 0 || m > n {
        return Err(Error::InvalidConfig(format!("need 1 <= M <= N (M={m}, N={n})")));
    }
    gaussian_matrix(&mut ChaCha8Rng::seed_from_u64(seed), m, n, d)
}

fn random_support<R: Rng>(rng: &mut R, n: usize, k: usize) -> IndexSet {
    IndexSet::new(sample(rng, n, k).into_vec()).expect("sampled indices are distinct")
}

pub fn sparse_signal_with<R: Rng>(rng: &mut R, n: usize, k: usize) -> Result<SparseSignal> {
    if k > n {
        return Err(Error::InvalidConfig(format!("K = {k} exceeds N = {n}")));
    }
    let support = random_support(rng, n, k);
    let values = (0..k)
        .map(|_| loop {
            let v = normal(rng);
            if v != 0.0 {
                break v;
            }
        })
        .collect();
    SparseSignal::new(n, support, values)
}

pub fn block_signal_with<R: Rng>(rng: &mut R, n: usize, d: usize, k: usize) -> Result<BlockSparseSignal> {
    if d == 0 || n % d != 0 || k * d > n {
        return Err(Error::InvalidConfig(format!(
            "cannot place {k} blocks of length {d} in {n} entries"
        )));
    }
    let blocks = random_support(rng, n / d, k);
    let values = (0..k * d).map(|_| normal(rng)).collect();
    BlockSparseSignal::new(n, d, blocks, values)
}

/// `K`-sparse signal: uniform support, `N(0,1)` nonzeros.
pub fn gen_signal(n: usize, k: usize, seed: u64) -> Result<SparseSignal> {
    sparse_signal_with(&mut ChaCha8Rng::seed_from_u64(seed), n, k)
}

/// Block `k`-sparse signal: uniform block set, `N(0,1)` entries.
pub fn gen_block_signal(n: usize, d: usize, k: usize, seed: u64) -> Result<BlockSparseSignal> {
    block_signal_with(&mut ChaCha8Rng::seed_from_u64(seed), n, d, k)
}

/// Rescales every nonzero entry (or block, for `d > 1`) to norm `floor·(1+|g|)`.
fn lift_above_floor<R: Rng>(rng: &mut R, x: &mut [f64], support: &IndexSet, d: usize, floor: f64) {
    let idx = support.as_slice();
    for chunk in idx.chunks(d) {
        let norm = chunk.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt();
        let target = floor * (1.0 + normal(rng).abs());
        let s = if norm > 0.0 { target / norm } else { 0.0 };
        for &i in chunk {
            x[i] *= s;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Success,
    Failure,
    Error,
}

struct GridPoint {
    sparsity: usize,
    floor: Option<f64>,
}

fn entry_floor(cfg: &ExperimentConfig, s: usize) -> Result<Option<f64>> {
    let Amplitude::AboveFloor { mu, mu_block, nu } = cfg.amplitude else {
        return Ok(None);
    };
    let rep = if cfg.d == 1 {
        noisy_floor_ols(mu, s, 0, cfg.sigma, cfg.m)?
    } else {
        noisy_floor_bols(mu, mu_block, nu, s / cfg.d, cfg.d, 0, cfg.sigma, cfg.m)?
    };
    Ok(Some(rep.entry_floor))
}

fn run_trial(cfg: &ExperimentConfig, grid: usize, point: &GridPoint, trial: usize) -> Outcome {
    let attempt = || -> Result<bool> {
        let mut rng = trial_rng(cfg.seed, grid, trial);
        let d = match cfg.ensemble {
            Ensemble::Gaussian => gaussian_matrix(&mut rng, cfg.m, cfg.n, cfg.d)?,
            Ensemble::IdentityHadamard => identity_hadamard_matrix(&mut rng, cfg.m, cfg.d)?,
        };
        if let Amplitude::AboveFloor { mu, mu_block, nu } = cfg.amplitude {
            let p = profile(&d);
            if p.mu > mu + BOUND_SLACK
                || p.mu_block > mu_block + BOUND_SLACK
                || p.nu > nu + BOUND_SLACK
            {
                return Err(Error::InvalidState("matrix exceeds the configured coherence bounds".into()));
            }
        }
        let (mut x, support) = if cfg.d == 1 {
            let s = sparse_signal_with(&mut rng, cfg.n, point.sparsity)?;
            (s.to_dense(), s.support().clone())
        } else {
            let s = block_signal_with(&mut rng, cfg.n, cfg.d, point.sparsity / cfg.d)?;
            (s.to_dense(), s.support())
        };
        if let Some(floor) = point.floor {
            lift_above_floor(&mut rng, &mut x, &support, cfg.d, floor);
        }
        let mut y = d.apply(&x)?;
        if cfg.sigma > 0.0 {
            for v in &mut y {
                *v += cfg.sigma * normal(&mut rng);
            }
        }
        let res = recover(cfg.algo, &d, &y, &cfg.solver_config(point.sparsity))?;
        Ok(if cfg.sigma > 0.0 {
            res.support_estimate == support
        } else {
            let err: f64 = res
                .estimate
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            err < cfg.success_radius
        })
    };
    match attempt() {
        Ok(true) => Outcome::Success,
        Ok(false) => Outcome::Failure,
        Err(_) => Outcome::Error,
    }
}

/// Runs every grid point of `cfg` on the current rayon pool.
pub fn run_curve(cfg: &ExperimentConfig) -> Result<FrequencyCurve> {
    cfg.validate()?;
    let grid: Vec<GridPoint> = cfg
        .sparsity
        .iter()
        .map(|&s| {
            Ok(GridPoint {
                sparsity: s,
                floor: entry_floor(cfg, s)?,
            })
        })
        .collect::<Result<_>>()?;
    let points = grid
        .iter()
        .enumerate()
        .map(|(gi, gp)| {
            let outcomes: Vec<Outcome> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, gi, gp, t))
                .collect();
            CurvePoint {
                sparsity: gp.sparsity,
                trials: cfg.trials,
                successes: outcomes.iter().filter(|o| **o == Outcome::Success).count(),
                errors: outcomes.iter().filter(|o| **o == Outcome::Error).count(),
            }
        })
        .collect();
    Ok(FrequencyCurve {
        algo: cfg.algo,
        m: cfg.m,
        n: cfg.n,
        d: cfg.d,
        l: cfg.l,
        sigma: cfg.sigma,
        points,
    })
}
