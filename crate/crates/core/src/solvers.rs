//! Greedy recovery: OLS, multiple OLS (MOLS) and block OLS (BOLS).
//!
//! All three share one loop: pick candidates, re-solve least squares on the
//! enlarged support, update the residual, stop after `K` iterations or once
//! `‖r‖₂ ≤ ζ`. They differ only in the selection rule, and each rule is
//! available in two forms that must agree on the selected index:
//!
//! * OLS, correlation form: `argmax_j |⟨D_j, r⟩| / ‖P⊥_S D_j‖₂`, and
//!   residual form: `argmin_j ‖P⊥_{S∪{j}} y‖₂²`.
//! * MOLS: the `L` best candidates under either form.
//! * BOLS, telescoping form: per block, the sum over its columns (in natural
//!   order) of squared correlations with the residual left after projecting
//!   out `S` and the block's earlier columns, normalized by the matching
//!   nested projection norms; residual form: `argmin_b ‖P⊥_{S∪block(b)} y‖₂²`.
//!
//! Ties go to the smallest (block) index. Candidates whose projection
//! norm falls below [`DEGENERATE_TOL`] add no new direction and are skipped.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coherence::MeasurementMatrix;
use crate::error::{Error, Result};
use crate::matcore::{IndexSet, Projector};

/// Projection norms below this are treated as "already in the span".
pub const DEGENERATE_TOL: f64 = 1e-10;

/// Default residual tolerance `ζ`.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;

/// A `K`-sparse vector with an explicit support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    len: usize,
    support: IndexSet,
    values: Vec<f64>,
}

impl SparseSignal {
    pub fn new(len: usize, support: IndexSet, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} support indices for {} values",
                support.len(),
                values.len()
            )));
        }
        if support.iter().any(|i| i >= len) {
            return Err(Error::DimensionMismatch(format!(
                "support {:?} exceeds length {len}",
                support.as_slice()
            )));
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidState(
                "support values must be finite and nonzero".into(),
            ));
        }
        Ok(Self {
            len,
            support,
            values,
        })
    }

    pub fn zero(len: usize) -> Self {
        Self {
            len,
            support: IndexSet::empty(),
            values: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.len];
        for (i, v) in self.support.iter().zip(&self.values) {
            x[i] = *v;
        }
        x
    }
}

/// A block `k`-sparse vector: `k` blocks of length `d` with nonzero ℓ₂ norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSparseSignal {
    len: usize,
    block_len: usize,
    block_support: IndexSet,
    /// Block values concatenated in increasing block order (`k · d` entries).
    values: Vec<f64>,
}

impl BlockSparseSignal {
    pub fn new(
        len: usize,
        block_len: usize,
        block_support: IndexSet,
        values: Vec<f64>,
    ) -> Result<Self> {
        if block_len == 0 || len % block_len != 0 {
            return Err(Error::DimensionMismatch(format!(
                "block length {block_len} does not divide {len}"
            )));
        }
        if values.len() != block_support.len() * block_len {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} blocks of length {block_len}",
                values.len(),
                block_support.len()
            )));
        }
        if block_support.iter().any(|b| b >= len / block_len) {
            return Err(Error::DimensionMismatch("block index out of range".into()));
        }
        if values.iter().any(|v| !v.is_finite())
            || values
                .chunks(block_len)
                .any(|blk| blk.iter().all(|v| *v == 0.0))
        {
            return Err(Error::InvalidState(
                "every supported block needs a finite, nonzero value".into(),
            ));
        }
        Ok(Self {
            len,
            block_len,
            block_support,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn block_support(&self) -> &IndexSet {
        &self.block_support
    }

    /// Column support: every index of every supported block.
    pub fn support(&self) -> IndexSet {
        self.block_support.expand_blocks(self.block_len)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.len];
        for (i, v) in self.support().iter().zip(&self.values) {
            x[i] = *v;
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ols,
    Mols,
    Bols,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Ols => "ols",
            Algorithm::Mols => "mols",
            Algorithm::Bols => "bols",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ols" => Ok(Algorithm::Ols),
            "mols" => Ok(Algorithm::Mols),
            "bols" => Ok(Algorithm::Bols),
            other => Err(Error::Parse(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HaltReason {
    SparsityBudget,
    ResidualTolerance,
    RankDeficiency,
}

/// Solver inputs: iteration budget `K` (block budget `k` for BOLS), `ζ`, and `L` for MOLS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_sparsity: usize,
    pub residual_tol: f64,
    pub mols_l: usize,
}

impl SolverConfig {
    pub fn new(max_sparsity: usize) -> Self {
        Self {
            max_sparsity,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            mols_l: 2,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.mols_l = l;
        self
    }

    /// Checks the budget keeps every least-squares problem overdetermined.
    pub fn validate(&self, algo: Algorithm, d: &MeasurementMatrix) -> Result<()> {
        if self.max_sparsity == 0 {
            return Err(Error::InvalidConfig("sparsity budget must be positive".into()));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(Error::InvalidConfig("residual tolerance must be >= 0".into()));
        }
        let m = d.rows();
        let (need, what) = match algo {
            Algorithm::Ols => (self.max_sparsity, "K"),
            Algorithm::Mols => {
                if self.mols_l == 0 {
                    return Err(Error::InvalidConfig("MOLS needs L >= 1".into()));
                }
                (self.mols_l * self.max_sparsity, "L*K")
            }
            Algorithm::Bols => (self.max_sparsity * d.block_len(), "k*d"),
        };
        if need > m || need > d.cols() {
            return Err(Error::InvalidConfig(format!(
                "{what} = {need} exceeds M = {m} (or N = {})",
                d.cols()
            )));
        }
        Ok(())
    }
}

/// Output of a recovery run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub support_estimate: IndexSet,
    pub estimate: Vec<f64>,
    /// `‖r^l‖₂` for `l = 0..=iterations`; entry 0 is `‖y‖₂`.
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    pub halted_by: HaltReason,
    /// Column indices added in each iteration, in selection order.
    pub selections: Vec<Vec<usize>>,
}

/// `P⊥_S D` for a fixed support `S`, updated one column at a time.
struct OrthState {
    /// Column `j` holds `P⊥_S D_j`.
    orth: DMatrix<f64>,
    support: IndexSet,
}

impl OrthState {
    fn new(d: &MeasurementMatrix, support: &IndexSet) -> Result<Self> {
        if support.iter().any(|i| i >= d.cols()) {
            return Err(Error::DimensionMismatch("support index out of range".into()));
        }
        let proj = Projector::from_nalgebra(&d.na().select_columns(support.as_slice()))?;
        Ok(Self {
            orth: proj.project_orth_mat(d.na()),
            support: support.clone(),
        })
    }

    /// Adds column `j` to the support (one modified Gram-Schmidt sweep).
    fn add(&mut self, j: usize) -> Result<()> {
        let col = self.orth.column(j).into_owned();
        let norm = col.norm();
        if norm < DEGENERATE_TOL {
            return Err(Error::RankDeficient { ratio: norm });
        }
        let e = col / norm;
        let coeffs = self.orth.tr_mul(&e);
        self.orth.ger(-1.0, &e, &coeffs, 1.0);
        self.support.insert(j);
        Ok(())
    }

    fn proj_norm(&self, j: usize) -> f64 {
        self.orth.column(j).norm()
    }

    /// Correlation-form OLS score for every column (`None` inside `S` or degenerate).
    fn ols_scores(&self, d: &MeasurementMatrix, r: &DVector<f64>) -> Vec<Option<f64>> {
        let corr = d.na().tr_mul(r);
        (0..d.cols())
            .map(|j| {
                if self.support.contains(j) {
                    return None;
                }
                let n = self.proj_norm(j);
                (n >= DEGENERATE_TOL).then(|| corr[j].abs() / n)
            })
            .collect()
    }

    /// Telescoping-form BOLS score for every block (`None` if selected or degenerate).
    fn block_scores(&self, d: &MeasurementMatrix, r: &DVector<f64>) -> Vec<Option<f64>> {
        let len = d.block_len();
        (0..d.num_blocks())
            .map(|b| {
                let cols = d.block_columns(b);
                if cols.clone().any(|j| self.support.contains(j)) {
                    return None;
                }
                let mut basis: Vec<DVector<f64>> = Vec::with_capacity(len);
                let mut t = r.clone();
                let mut score = 0.0;
                for j in cols {
                    // P⊥ of D_j against S and the earlier columns of this block.
                    let mut v = self.orth.column(j).into_owned();
                    for e in &basis {
                        let c = e.dot(&v);
                        v.axpy(-c, e, 1.0);
                    }
                    let n = v.norm();
                    if n < DEGENERATE_TOL {
                        return None;
                    }
                    let num = d.na().column(j).dot(&t);
                    score += (num / n).powi(2);
                    let e = v / n;
                    let c = e.dot(&t);
                    t.axpy(-c, &e, 1.0);
                    basis.push(e);
                }
                Some(score)
            })
            .collect()
    }
}

/// Scores this close (relative) count as tied, so rounding cannot break ties.
const TIE_TOL: f64 = 1e-12;

/// First index of the largest score; `None` scores are skipped.
fn argmax(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| s > b + TIE_TOL * b.abs().max(1e-300)) {
                best = Some((i, s));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// First index of the smallest score.
fn argmin(scores: &[Option<f64>]) -> Option<usize> {
    let negated: Vec<Option<f64>> = scores.iter().map(|s| s.map(|v| -v)).collect();
    argmax(&negated)
}

/// Indices of the `l` largest scores, ties to the smaller index.
fn top_l(scores: &[Option<f64>], l: usize) -> Option<Vec<usize>> {
    let mut left = scores.to_vec();
    let mut picks = Vec::with_capacity(l);
    for _ in 0..l {
        let i = argmax(&left)?;
        left[i] = None;
        picks.push(i);
    }
    Some(picks)
}

fn dvec(v: &[f64], m: usize) -> Result<DVector<f64>> {
    if v.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for {m} measurements",
            v.len()
        )));
    }
    Ok(DVector::from_column_slice(v))
}

/// `‖P⊥_T y‖₂²` for a candidate support `T`, or `None` if `D_T` is rank deficient.
fn residual_power(d: &MeasurementMatrix, cols: &[usize], y: &DVector<f64>) -> Option<f64> {
    let proj = Projector::from_nalgebra(&d.na().select_columns(cols.iter())).ok()?;
    Some(proj.project_orth_vec(y).norm_squared())
}

/// OLS selection in correlation form. `r` must be the residual of `y` against `D_S`.
pub fn ols_select(d: &MeasurementMatrix, support: &IndexSet, r: &[f64]) -> Result<usize> {
    let state = OrthState::new(d, support)?;
    argmax(&state.ols_scores(d, &dvec(r, d.rows())?)).ok_or(Error::NoCandidate)
}

/// OLS selection in residual form: `argmin_j ‖P⊥_{S∪{j}} y‖₂²`.
pub fn ols_select_by_residual(d: &MeasurementMatrix, support: &IndexSet, y: &[f64]) -> Result<usize> {
    let y = dvec(y, d.rows())?;
    let scores: Vec<Option<f64>> = (0..d.cols())
        .map(|j| {
            if support.contains(j) {
                return None;
            }
            let mut cols: Vec<usize> = support.iter().collect();
            cols.push(j);
            residual_power(d, &cols, &y)
        })
        .collect();
    argmin(&scores).ok_or(Error::NoCandidate)
}

/// MOLS selection: the `l` best candidates under the correlation form.
pub fn mols_select(
    d: &MeasurementMatrix,
    support: &IndexSet,
    r: &[f64],
    l: usize,
) -> Result<Vec<usize>> {
    let state = OrthState::new(d, support)?;
    top_l(&state.ols_scores(d, &dvec(r, d.rows())?), l).ok_or(Error::NoCandidate)
}

/// MOLS selection minimizing `Σ_{j∈Q} ‖P⊥_{S∪{j}} y‖₂²` over `|Q| = l`. The
/// objective separates over candidates, so this is the `l` smallest terms.
pub fn mols_select_by_residual(
    d: &MeasurementMatrix,
    support: &IndexSet,
    y: &[f64],
    l: usize,
) -> Result<Vec<usize>> {
    let y = dvec(y, d.rows())?;
    let neg: Vec<Option<f64>> = (0..d.cols())
        .map(|j| {
            if support.contains(j) {
                return None;
            }
            let mut cols: Vec<usize> = support.iter().collect();
            cols.push(j);
            residual_power(d, &cols, &y).map(|p| -p)
        })
        .collect();
    top_l(&neg, l).ok_or(Error::NoCandidate)
}

/// BOLS selection in telescoping form. `blocks` are the already selected
/// block indices; `r` is the residual of `y` against their columns.
pub fn bols_select(d: &MeasurementMatrix, blocks: &IndexSet, r: &[f64]) -> Result<usize> {
    let state = OrthState::new(d, &blocks.expand_blocks(d.block_len()))?;
    argmax(&state.block_scores(d, &dvec(r, d.rows())?)).ok_or(Error::NoCandidate)
}

/// BOLS selection in residual form: `argmin_b ‖P⊥_{S∪block(b)} y‖₂²`.
pub fn bols_select_by_residual(d: &MeasurementMatrix, blocks: &IndexSet, y: &[f64]) -> Result<usize> {
    let y = dvec(y, d.rows())?;
    let base: Vec<usize> = blocks.expand_blocks(d.block_len()).iter().collect();
    let scores: Vec<Option<f64>> = (0..d.num_blocks())
        .map(|b| {
            if blocks.contains(b) {
                return None;
            }
            let mut cols = base.clone();
            cols.extend(d.block_columns(b));
            residual_power(d, &cols, &y)
        })
        .collect();
    argmin(&scores).ok_or(Error::NoCandidate)
}

/// Shared greedy loop; `pick` returns the columns to add this iteration.
fn greedy<F>(d: &MeasurementMatrix, y: &[f64], cfg: &SolverConfig, mut pick: F) -> Result<RecoveryResult>
where
    F: FnMut(&OrthState, &DVector<f64>) -> Result<Vec<usize>>,
{
    let y = dvec(y, d.rows())?;
    let mut state = OrthState::new(d, &IndexSet::empty())?;
    let mut r = y.clone();
    let mut coef = DVector::zeros(0);
    let mut residual_norms = vec![y.norm()];
    let mut selections = Vec::new();

    let halted_by = loop {
        if r.norm() <= cfg.residual_tol {
            break HaltReason::ResidualTolerance;
        }
        if selections.len() >= cfg.max_sparsity {
            break HaltReason::SparsityBudget;
        }
        let Ok(picks) = pick(&state, &r) else {
            break HaltReason::RankDeficiency;
        };
        let mut next = OrthStateUpdate::new(&state);
        if picks.iter().any(|&j| next.add(&mut state, j).is_err()) {
            next.rollback(&mut state);
            break HaltReason::RankDeficiency;
        }
        let cols = d.na().select_columns(state.support.as_slice());
        let Ok(proj) = Projector::from_nalgebra(&cols) else {
            next.rollback(&mut state);
            break HaltReason::RankDeficiency;
        };
        coef = proj.solve_vec(&y);
        r = &y - &cols * &coef;
        residual_norms.push(r.norm());
        selections.push(picks);
    };

    let mut estimate = vec![0.0; d.cols()];
    for (i, v) in state.support.iter().zip(coef.iter()) {
        estimate[i] = *v;
    }
    Ok(RecoveryResult {
        support_estimate: state.support,
        estimate,
        residual_norms,
        iterations: selections.len(),
        halted_by,
        selections,
    })
}

/// Snapshot used to undo a partially applied multi-column update.
struct OrthStateUpdate {
    orth: DMatrix<f64>,
    support: IndexSet,
}

impl OrthStateUpdate {
    fn new(state: &OrthState) -> Self {
        Self {
            orth: state.orth.clone(),
            support: state.support.clone(),
        }
    }

    fn add(&mut self, state: &mut OrthState, j: usize) -> Result<()> {
        if state.support.contains(j) {
            return Err(Error::InvalidState(format!("column {j} selected twice")));
        }
        state.add(j)
    }

    fn rollback(self, state: &mut OrthState) {
        state.orth = self.orth;
        state.support = self.support;
    }
}

/// Orthogonal least squares (one column per iteration).
pub fn ols_recover(d: &MeasurementMatrix, y: &[f64], cfg: &SolverConfig) -> Result<RecoveryResult> {
    cfg.validate(Algorithm::Ols, d)?;
    greedy(d, y, cfg, |state, r| {
        argmax(&state.ols_scores(d, r))
            .map(|j| vec![j])
            .ok_or(Error::NoCandidate)
    })
}

/// Multiple OLS (`cfg.mols_l` columns per iteration; the estimate keeps all of them).
pub fn mols_recover(d: &MeasurementMatrix, y: &[f64], cfg: &SolverConfig) -> Result<RecoveryResult> {
    cfg.validate(Algorithm::Mols, d)?;
    let l = cfg.mols_l;
    greedy(d, y, cfg, |state, r| {
        let mut picks = top_l(&state.ols_scores(d, r), l).ok_or(Error::NoCandidate)?;
        picks.sort_unstable();
        Ok(picks)
    })
}

/// Block OLS (one block of `d.block_len()` columns per iteration; budget counts blocks).
pub fn bols_recover(d: &MeasurementMatrix, y: &[f64], cfg: &SolverConfig) -> Result<RecoveryResult> {
    cfg.validate(Algorithm::Bols, d)?;
    greedy(d, y, cfg, |state, r| {
        argmax(&state.block_scores(d, r))
            .map(|b| d.block_columns(b).collect())
            .ok_or(Error::NoCandidate)
    })
}

pub fn recover(
    algo: Algorithm,
    d: &MeasurementMatrix,
    y: &[f64],
    cfg: &SolverConfig,
) -> Result<RecoveryResult> {
    match algo {
        Algorithm::Ols => ols_recover(d, y, cfg),
        Algorithm::Mols => mols_recover(d, y, cfg),
        Algorithm::Bols => bols_recover(d, y, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::DenseMatrix;

    fn orthonormal(n: usize, d: usize) -> MeasurementMatrix {
        MeasurementMatrix::new(DenseMatrix::identity(n), d).unwrap()
    }

    /// A fixed 4x4 rotation-like orthonormal matrix (scaled Hadamard).
    fn hadamard4(d: usize) -> MeasurementMatrix {
        #[rustfmt::skip]
        let h = [1.0, 1.0, 1.0, 1.0,
                 1.0, -1.0, 1.0, -1.0,
                 1.0, 1.0, -1.0, -1.0,
                 1.0, -1.0, -1.0, 1.0];
        MeasurementMatrix::new(DenseMatrix::from_row_slice(4, 4, &h).unwrap(), d).unwrap()
    }

    #[test]
    fn ols_picks_exact_match_on_orthonormal_dictionary() {
        let d = hadamard4(1);
        let y: Vec<f64> = d.matrix().column(3).iter().map(|v| 2.0 * v).collect();
        assert_eq!(ols_select(&d, &IndexSet::empty(), &y).unwrap(), 3);
        assert_eq!(ols_select_by_residual(&d, &IndexSet::empty(), &y).unwrap(), 3);
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let d = orthonormal(3, 1);
        let y = [1.0, 1.0, 0.5];
        assert_eq!(ols_select(&d, &IndexSet::empty(), &y).unwrap(), 0);
        assert_eq!(ols_select_by_residual(&d, &IndexSet::empty(), &y).unwrap(), 0);
        assert_eq!(mols_select(&d, &IndexSet::empty(), &y, 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn degenerate_candidates_are_skipped() {
        // Column 2 duplicates column 0: once 0 is selected it has no new direction.
        let m = DenseMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let d = MeasurementMatrix::new(m, 1).unwrap();
        let s = IndexSet::new(vec![0]).unwrap();
        assert_eq!(ols_select(&d, &s, &[0.0, 1.0]).unwrap(), 1);
        let s2 = IndexSet::new(vec![0, 1]).unwrap();
        assert_eq!(ols_select(&d, &s2, &[0.0, 0.0]), Err(Error::NoCandidate));
        assert_eq!(ols_select_by_residual(&d, &s2, &[1.0, 1.0]), Err(Error::NoCandidate));
    }

    #[test]
    fn mols_with_all_remaining_candidates() {
        let d = orthonormal(4, 1);
        let s = IndexSet::new(vec![1]).unwrap();
        let r = [0.3, 0.0, -2.0, 1.0];
        assert_eq!(mols_select(&d, &s, &r, 3).unwrap(), vec![2, 3, 0]);
        assert_eq!(mols_select(&d, &s, &r, 4), Err(Error::NoCandidate));
    }

    #[test]
    fn orthonormal_ols_recovers_exactly_in_k_iterations() {
        let d = hadamard4(1);
        let x = [0.0, 1.5, 0.0, -0.25];
        let y = d.apply(&x).unwrap();
        let res = ols_recover(&d, &y, &SolverConfig::new(2)).unwrap();
        assert_eq!(res.support_estimate.as_slice(), &[1, 3]);
        assert_eq!(res.iterations, 2);
        for (a, b) in res.estimate.iter().zip(x) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(*res.residual_norms.last().unwrap() < 1e-12);
    }

    #[test]
    fn mols_on_orthonormal_dictionary_finishes_in_half_the_iterations() {
        // Diagonal Gram: the top-2 correlations are always true atoms.
        let d = orthonormal(8, 1);
        let x = [0.0, 3.0, 0.0, -1.0, 0.0, 2.0, 0.5, 0.0];
        let y = d.apply(&x).unwrap();
        let res = mols_recover(&d, &y, &SolverConfig::new(4).with_l(2)).unwrap();
        assert_eq!(res.iterations, 2);
        assert_eq!(res.selections, vec![vec![1, 5], vec![3, 6]]);
        assert_eq!(res.halted_by, HaltReason::ResidualTolerance);
    }

    #[test]
    fn bols_on_block_orthonormal_dictionary() {
        let d = hadamard4(2);
        let x = [0.0, 0.0, 1.0, -2.0];
        let y = d.apply(&x).unwrap();
        assert_eq!(bols_select(&d, &IndexSet::empty(), &y).unwrap(), 1);
        assert_eq!(bols_select_by_residual(&d, &IndexSet::empty(), &y).unwrap(), 1);

        let d6 = orthonormal(6, 2);
        let x6 = [1.0, 2.0, 0.0, 0.0, -1.0, 0.5];
        let y6 = d6.apply(&x6).unwrap();
        let res = bols_recover(&d6, &y6, &SolverConfig::new(2)).unwrap();
        assert_eq!(res.iterations, 2);
        assert_eq!(res.support_estimate.as_slice(), &[0, 1, 4, 5]);
        assert!((res.estimate[5] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_measurement_halts_immediately() {
        let d = orthonormal(3, 1);
        let res = ols_recover(&d, &[0.0; 3], &SolverConfig::new(2)).unwrap();
        assert_eq!(res.iterations, 0);
        assert_eq!(res.halted_by, HaltReason::ResidualTolerance);
        assert_eq!(res.residual_norms, vec![0.0]);
    }

    #[test]
    fn config_validation() {
        let d = orthonormal(4, 2);
        assert!(SolverConfig::new(5).validate(Algorithm::Ols, &d).is_err());
        assert!(SolverConfig::new(3).with_l(2).validate(Algorithm::Mols, &d).is_err());
        assert!(SolverConfig::new(3).validate(Algorithm::Bols, &d).is_err());
        assert!(SolverConfig::new(2).validate(Algorithm::Bols, &d).is_ok());
        assert!(SolverConfig::new(0).validate(Algorithm::Ols, &d).is_err());
        assert!(ols_recover(&d, &[1.0; 3], &SolverConfig::new(1)).is_err());
    }

    #[test]
    fn signal_invariants() {
        let s = IndexSet::new(vec![1, 4]).unwrap();
        assert!(SparseSignal::new(5, s.clone(), vec![1.0, 0.0]).is_err());
        assert!(SparseSignal::new(4, s.clone(), vec![1.0, 2.0]).is_err());
        let x = SparseSignal::new(5, s, vec![1.0, -2.0]).unwrap();
        assert_eq!(x.to_dense(), vec![0.0, 1.0, 0.0, 0.0, -2.0]);

        let b = IndexSet::new(vec![1]).unwrap();
        assert!(BlockSparseSignal::new(4, 2, b.clone(), vec![0.0, 0.0]).is_err());
        let xb = BlockSparseSignal::new(4, 2, b, vec![0.0, 3.0]).unwrap();
        assert_eq!(xb.to_dense(), vec![0.0, 0.0, 0.0, 3.0]);
        assert_eq!(xb.support().as_slice(), &[2, 3]);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::Ols, Algorithm::Mols, Algorithm::Bols] {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        assert!("omp".parse::<Algorithm>().is_err());
    }
}
