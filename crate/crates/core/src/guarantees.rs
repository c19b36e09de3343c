//! Recovery guarantees in terms of `μ`, `μ_B` and `ν`.
//!
//! Covers the normalization-factor bounds `T` / `T_B`, exact recovery
//! condition (ERC) indicators, the cubic sparsity thresholds with their
//! bisection cross-check, the closed-form comparison scalars, the Gaussian
//! probability bound and the noisy entry floors.
//!
//! Formulas refuse to produce numbers outside their validity region: any
//! vacated precondition is a [`Error::Domain`]. Logarithms are natural.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coherence::{coherence, sub_coherence, MeasurementMatrix};
use crate::error::{Error, Result};
use crate::matcore::{norm_11, rho_c, DenseMatrix, IndexSet, Projector};

/// Step of the sign scan that brackets the threshold.
pub const SCAN_STEP: f64 = 0.25;
/// Width at which the bisection stops.
pub const BISECTION_TOL: f64 = 1e-9;
/// Largest tolerated gap between the closed form and the bisection root.
pub const ROOT_AGREEMENT_TOL: f64 = 1e-4;

fn check_coherence(name: &str, v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        return Err(Error::domain(format!("{name} must lie in [0, 1)"), v));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::domain(format!("{name} must be positive"), v));
    }
    Ok(())
}

/// `T` for real-valued sparsity (the threshold search varies `K` continuously).
fn t_factor_real(mu: f64, k: f64) -> Result<f64> {
    let gersh = 1.0 - (k - 1.0) * mu;
    if gersh <= 0.0 {
        return Err(Error::domain("mu * (K - 1) must be below 1", mu * (k - 1.0)));
    }
    let inner = 1.0 - (1.0 + (k - 1.0) * mu) * k * mu * mu / (gersh * gersh);
    if inner <= 0.0 {
        return Err(Error::domain("normalization factor undefined (inner term <= 0)", inner));
    }
    Ok(1.0 / inner)
}

/// Lower-bound factor `T = (1 − (1+(K−1)μ)Kμ² / (1−(K−1)μ)²)⁻¹`, so that
/// `‖P⊥_S D_i‖₂ ≥ 1/√T` for every `|S| < K` and `i ∉ S`.
pub fn t_factor(mu: f64, k: usize) -> Result<f64> {
    check_coherence("mu", mu)?;
    if k == 0 {
        return Err(Error::domain("K must be at least 1", 0.0));
    }
    t_factor_real(mu, k as f64)
}

/// `T_B` for real-valued total sparsity `n = kd`.
fn t_factor_block_real(mu: f64, nu: f64, n: f64, d: f64) -> Result<f64> {
    if mu * (n - 1.0) >= 1.0 {
        return Err(Error::domain("mu * (kd - 1) must be below 1", mu * (n - 1.0)));
    }
    let k = n / d;
    let den = 1.0 - (d - 1.0) * nu - (k - 1.0) * d * mu;
    if den <= 0.0 {
        return Err(Error::domain(
            "(d - 1) nu + (k - 1) d mu must be below 1",
            1.0 - den,
        ));
    }
    let ratio = (1.0 + (n - 1.0) * mu).sqrt() * (n * mu * mu).sqrt() / den;
    let inner = 1.0 - ratio * ratio;
    if inner <= 0.0 {
        return Err(Error::domain("block normalization factor undefined (inner term <= 0)", inner));
    }
    Ok(1.0 / inner)
}

/// Block factor `T_B = (1 − (√(1+(kd−1)μ)·√(kdμ²) / (1−(d−1)ν−(k−1)dμ))²)⁻¹`.
pub fn t_factor_block(mu: f64, nu: f64, k: usize, d: usize) -> Result<f64> {
    check_coherence("mu", mu)?;
    check_coherence("nu", nu)?;
    if k == 0 || d == 0 {
        return Err(Error::domain("k and d must be at least 1", 0.0));
    }
    t_factor_block_real(mu, nu, (k * d) as f64, d as f64)
}

/// `T` or `T_B` with the inputs it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBound {
    pub t: f64,
    pub mu: f64,
    pub nu: f64,
    /// `K`, or the block count `k`.
    pub sparsity: usize,
    pub block_len: usize,
}

impl NormalizationBound {
    pub fn ols(mu: f64, k: usize) -> Result<Self> {
        Ok(Self {
            t: t_factor(mu, k)?,
            mu,
            nu: 0.0,
            sparsity: k,
            block_len: 1,
        })
    }

    pub fn block(mu: f64, nu: f64, k: usize, d: usize) -> Result<Self> {
        Ok(Self {
            t: t_factor_block(mu, nu, k, d)?,
            mu,
            nu,
            sparsity: k,
            block_len: d,
        })
    }

    /// The guaranteed lower bound `1/√T` on projected column norms.
    pub fn lower_bound(&self) -> f64 {
        1.0 / self.t.sqrt()
    }
}

/// The older projection-norm lower bound `√(1 − Kμ)`, kept for comparison.
pub fn projection_bound_classic(mu: f64, k: usize) -> Result<f64> {
    check_coherence("mu", mu)?;
    let x = 1.0 - k as f64 * mu;
    if x <= 0.0 {
        return Err(Error::domain("K * mu must be below 1", k as f64 * mu));
    }
    Ok(x.sqrt())
}

fn check_selection(true_support: &IndexSet, selected: &IndexSet, bound: usize) -> Result<()> {
    if true_support.iter().any(|i| i >= bound) {
        return Err(Error::DimensionMismatch("true support out of range".into()));
    }
    if !selected.is_subset(true_support) {
        return Err(Error::InvalidState(
            "selected indices must be a subset of the true support".into(),
        ));
    }
    if selected.len() >= true_support.len() {
        return Err(Error::InvalidState(
            "nothing left to select: selected covers the true support".into(),
        ));
    }
    Ok(())
}

/// Scaled, projected columns `P⊥_S D_j / w_j` in the given order.
fn scaled_columns(orth: &DMatrix<f64>, cols: &[usize], weights: &[f64]) -> DMatrix<f64> {
    let mut out = orth.select_columns(cols);
    for (mut c, w) in out.column_iter_mut().zip(weights) {
        c /= *w;
    }
    out
}

/// `(A)† B` through a QR of `A`; errors if `A` is rank deficient.
fn pinv_apply(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DenseMatrix> {
    let proj = Projector::from_nalgebra(a)?;
    DenseMatrix::from_nalgebra(proj.solve_mat(b))
}

/// OLS/MOLS exact recovery indicator at the state where `selected ⊆ true_support`
/// has been chosen: `‖(Q̃ R)† (Q̃' R')‖₁,₁`, where `Q̃` holds the remaining true
/// columns and `Q̃'` all other columns, both after projecting out `selected`,
/// and `R`, `R'` rescale each column by `1/‖P⊥_S D_i‖₂`. A value below 1
/// certifies the next OLS pick (and at least one MOLS pick) is a true index.
///
/// With nothing selected this is `‖(Q₀R₀)†(Q̄₀R̄₀)‖₁,₁` on the raw columns.
pub fn erc_indicator_ols(
    d: &MeasurementMatrix,
    true_support: &IndexSet,
    selected: &IndexSet,
) -> Result<f64> {
    check_selection(true_support, selected, d.cols())?;
    let orth = Projector::from_nalgebra(&d.na().select_columns(selected.as_slice()))?
        .project_orth_mat(d.na());
    let remaining = true_support.difference(selected);
    let others: Vec<usize> = (0..d.cols()).filter(|i| !true_support.contains(*i)).collect();
    if others.is_empty() {
        return Ok(0.0);
    }
    let norm = |j: &usize| orth.column(*j).norm();
    let rem_w: Vec<f64> = remaining.iter().map(|j| norm(&j)).collect();
    let oth_w: Vec<f64> = others.iter().map(norm).collect();
    if let Some(w) = oth_w.iter().find(|w| **w < crate::solvers::DEGENERATE_TOL) {
        return Err(Error::RankDeficient { ratio: *w });
    }
    let a = scaled_columns(&orth, remaining.as_slice(), &rem_w);
    let b = scaled_columns(&orth, &others, &oth_w);
    Ok(norm_11(&pinv_apply(&a, &b)?))
}

/// `P⊥` of each column of `blocks` against `S` and the earlier columns of its
/// own block, returned as the nested norms `‖P⊥_{S∪{prefix}} D_j‖₂`.
fn nested_norms(orth: &DMatrix<f64>, d: &MeasurementMatrix, blocks: &[usize]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(blocks.len() * d.block_len());
    for &b in blocks {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for j in d.block_columns(b) {
            let mut v = orth.column(j).into_owned();
            for e in &basis {
                let c = e.dot(&v);
                v.axpy(-c, e, 1.0);
            }
            let n = v.norm();
            if n < crate::solvers::DEGENERATE_TOL {
                return Err(Error::RankDeficient { ratio: n });
            }
            out.push(n);
            basis.push(v / n);
        }
    }
    Ok(out)
}

/// BOLS exact recovery indicator `ρ_c((Q̃ R)† (Q̃' R'))` with `d × d` blocks,
/// where the columns are projected against the selected blocks and `R`, `R'`
/// hold the nested within-block normalizations `1/‖P⊥_{S∪prefix} D_j‖₂`.
/// A value below 1 certifies the next BOLS pick is a true block.
pub fn erc_indicator_bols(
    d: &MeasurementMatrix,
    true_blocks: &IndexSet,
    selected_blocks: &IndexSet,
) -> Result<f64> {
    check_selection(true_blocks, selected_blocks, d.num_blocks())?;
    let len = d.block_len();
    let s = selected_blocks.expand_blocks(len);
    let orth = Projector::from_nalgebra(&d.na().select_columns(s.as_slice()))?
        .project_orth_mat(d.na());
    let remaining: Vec<usize> = true_blocks.difference(selected_blocks).iter().collect();
    let others: Vec<usize> = (0..d.num_blocks()).filter(|b| !true_blocks.contains(*b)).collect();
    if others.is_empty() {
        return Ok(0.0);
    }
    let cols = |bl: &[usize]| -> Vec<usize> { bl.iter().flat_map(|&b| d.block_columns(b)).collect() };
    let a = scaled_columns(&orth, &cols(&remaining), &nested_norms(&orth, d, &remaining)?);
    let b = scaled_columns(&orth, &cols(&others), &nested_norms(&orth, d, &others)?);
    rho_c(&pinv_apply(&a, &b)?, len, len)
}

/// Cubic `α x³ + β x² + γ x + δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cubic {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Cubic {
    pub fn eval(&self, x: f64) -> f64 {
        ((self.alpha * x + self.beta) * x + self.gamma) * x + self.delta
    }

    /// Depressed-cubic quantities `(q, p, Δ)` with `Δ = (q/2)² + (p/3)³`.
    pub fn depressed(&self) -> (f64, f64, f64) {
        let (a, b, c, d) = (self.alpha, self.beta, self.gamma, self.delta);
        let q = (27.0 * a * a * d - 9.0 * a * b * c + 2.0 * b * b * b) / (27.0 * a * a * a);
        let p = (3.0 * a * c - b * b) / (3.0 * a * a);
        (q, p, (q / 2.0).powi(2) + (p / 3.0).powi(3))
    }

    /// Real roots: one from Cardano's formula when `Δ ≥ 0`, three from the
    /// trigonometric method when `Δ < 0`.
    pub fn real_roots(&self) -> Vec<f64> {
        let (q, p, disc) = self.depressed();
        let shift = -self.beta / (3.0 * self.alpha);
        if disc >= 0.0 {
            vec![cardano_sum(q / 2.0, p / 3.0) + shift]
        } else {
            let r = 2.0 * (-p / 3.0).sqrt();
            let phi = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0).acos() / 3.0;
            (0..3)
                .map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos() + shift)
                .collect()
        }
    }
}

/// `∛(−Q + √(Q²+P³)) + ∛(−Q − √(Q²+P³))` with real cube roots.
///
/// Written as `A − P/A` with `A` the larger-magnitude term, which avoids
/// cancellation; a slightly negative discriminant from rounding is read as 0.
/// A clearly negative one takes the principal complex branch, which is real.
pub fn cardano_sum(big_q: f64, big_p: f64) -> f64 {
    let disc = big_q * big_q + big_p.powi(3);
    let scale = big_q * big_q + big_p.abs().powi(3);
    if disc >= -1e-12 * scale {
        let root = disc.max(0.0).sqrt();
        let s = -big_q;
        let a = (s + if s >= 0.0 { root } else { -root }).cbrt();
        if a == 0.0 {
            return 0.0;
        }
        a - big_p / a
    } else {
        let modulus = (big_q * big_q - disc).sqrt();
        let arg = (-disc).sqrt().atan2(-big_q);
        2.0 * modulus.cbrt() * (arg / 3.0).cos()
    }
}

/// Scans `x = 0, step, 2·step, …` for the first point where `holds` fails,
/// then bisects the bracketing interval down to [`BISECTION_TOL`].
fn failure_point(holds: impl Fn(f64) -> bool, upper: f64) -> Result<f64> {
    if !holds(0.0) {
        return Ok(0.0);
    }
    let steps = (upper / SCAN_STEP).ceil() as usize + 1;
    let fail = (1..=steps)
        .map(|i| i as f64 * SCAN_STEP)
        .find(|&x| !holds(x))
        .ok_or_else(|| Error::domain("condition never fails within the scan range", upper))?;
    let (mut lo, mut hi) = (fail - SCAN_STEP, fail);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMethod {
    /// Single real root from Cardano's formula (`Δ ≥ 0`).
    Cardano,
    /// `Δ < 0`: the closed form needs complex cube roots; the bisection root
    /// picks among the three trigonometric real roots.
    Bisection,
}

/// Largest admissible sparsity (exclusive) with the cubic it comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// Bisection root of the underlying rational condition.
    pub threshold: f64,
    /// Closed-form root of the cubic.
    pub closed_form: f64,
    pub cubic: Cubic,
    pub q: f64,
    pub p: f64,
    pub discriminant: f64,
    pub method: ThresholdMethod,
}

fn threshold_report(cubic: Cubic, bisection: f64) -> Result<ThresholdReport> {
    let (q, p, disc) = cubic.depressed();
    let roots = cubic.real_roots();
    let closed_form = roots
        .iter()
        .copied()
        .min_by(|a, b| (a - bisection).abs().total_cmp(&(b - bisection).abs()))
        .unwrap_or(f64::NAN);
    if !((closed_form - bisection).abs() <= ROOT_AGREEMENT_TOL) {
        return Err(Error::InconsistentRoots {
            closed_form,
            bisection,
        });
    }
    Ok(ThresholdReport {
        threshold: bisection,
        closed_form,
        cubic,
        q,
        p,
        discriminant: disc,
        method: if disc >= 0.0 {
            ThresholdMethod::Cardano
        } else {
            ThresholdMethod::Bisection
        },
    })
}

/// Coefficients of the OLS threshold cubic in `K`.
pub fn ols_cubic(mu: f64) -> Cubic {
    let (m2, m3, m4) = (mu * mu, mu.powi(3), mu.powi(4));
    Cubic {
        alpha: -m4 / 2.0 + 1.5 * m3,
        beta: m4 / 2.0 - 3.0 * m3 - 4.0 * m2,
        gamma: 1.5 * m3 + 7.0 * m2 + 3.5 * mu,
        delta: -m3 / 2.0 - 2.0 * m2 - 2.5 * mu - 1.0,
    }
}

/// Whether `2KTμ / (2 − (K−T)μ) < 1` holds (false wherever `T` is undefined).
pub fn ols_condition(mu: f64, k: f64) -> bool {
    let Ok(t) = t_factor_real(mu, k) else {
        return false;
    };
    let den = 2.0 - (k - t) * mu;
    den > 0.0 && 2.0 * k * t * mu / den < 1.0
}

/// Sparsity threshold for OLS/MOLS: every `K` below it satisfies the ERC for
/// any matrix of coherence `μ`.
pub fn cardano_threshold_ols(mu: f64) -> Result<ThresholdReport> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain("mu must lie in (0, 1)", mu));
    }
    let bisection = failure_point(|k| ols_condition(mu, k), 1.0 / mu + 2.0)?;
    threshold_report(ols_cubic(mu), bisection)
}

/// Coefficients of the BOLS threshold cubic in `kd`.
pub fn bols_cubic(mu: f64, mu_block: f64, nu: f64, d: usize) -> Cubic {
    let d = d as f64;
    let mb = mu_block;
    let g = (d - 1.0) * nu - 1.0 - d * mu;
    let (m2, m3) = (mu * mu, mu.powi(3));
    Cubic {
        alpha: -mb * m3 + 3.0 * mb * m2,
        beta: (2.0 + mb) * m3 - (d * mb + mb + 2.0) * m2 + 6.0 * mb * g * mu,
        gamma: -2.0 * m3 + 2.0 * m2 - (2.0 * d * mb * g + 4.0 * g) * mu + 3.0 * mb * g * g,
        delta: -d * mb * g * g - 2.0 * g * g,
    }
}

/// Whether `2 T_B kd μ_B / (2 − (k−T_B) d μ_B) < 1` holds at total sparsity `n = kd`.
pub fn bols_condition(mu: f64, mu_block: f64, nu: f64, d: usize, n: f64) -> bool {
    let df = d as f64;
    let Ok(t) = t_factor_block_real(mu, nu, n, df) else {
        return false;
    };
    let den = 2.0 - (n / df - t) * df * mu_block;
    den > 0.0 && 2.0 * t * n * mu_block / den < 1.0
}

/// Threshold on `kd` for BOLS given `μ`, `μ_B`, `ν` and block length `d`.
/// With `d = 1`, `ν = 0`, `μ_B = μ` it coincides with [`cardano_threshold_ols`].
pub fn cardano_threshold_bols(mu: f64, mu_block: f64, nu: f64, d: usize) -> Result<ThresholdReport> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain("mu must lie in (0, 1)", mu));
    }
    check_positive("mu_block", mu_block)?;
    if !(0.0..1.0).contains(&nu) {
        return Err(Error::domain("nu must lie in [0, 1)", nu));
    }
    if d == 0 {
        return Err(Error::domain("d must be at least 1", 0.0));
    }
    let bisection = failure_point(|n| bols_condition(mu, mu_block, nu, d, n), 1.0 / mu + 2.0)?;
    threshold_report(bols_cubic(mu, mu_block, nu, d), bisection)
}

/// Small-coherence limit of the OLS threshold, `(2/3)(1/μ + 1)`.
pub fn asymptotic_ols(mu: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    Ok(2.0 / 3.0 * (1.0 / mu + 1.0))
}

/// Small-coherence limit of the BOLS threshold, `(2/3)(1/μ_B + 7d/6 − 1/6)`.
pub fn asymptotic_bols(mu_block: f64, d: usize) -> Result<f64> {
    check_positive("mu_block", mu_block)?;
    check_positive("d", d as f64)?;
    Ok(2.0 / 3.0 * (1.0 / mu_block + 7.0 * d as f64 / 6.0 - 1.0 / 6.0))
}

/// OMP sparsity bound `(1/2)(1/μ + 1)`.
pub fn tropp_omp(mu: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    Ok(0.5 * (1.0 / mu + 1.0))
}

/// Block OMP bound `(1/2)(1/μ_B + d)`.
pub fn bomp_bound(mu_block: f64, d: usize) -> Result<f64> {
    check_positive("mu_block", mu_block)?;
    check_positive("d", d as f64)?;
    Ok(0.5 * (1.0 / mu_block + d as f64))
}

/// `1/μ + 1`, the sparsity cap below which `T` stays defined.
pub fn coherence_cap(mu: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    Ok(1.0 / mu + 1.0)
}

fn sqrt_m_ratio(m: f64, omega: f64) -> Result<f64> {
    check_positive("M", m)?;
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::domain("compression ratio must lie in (0, 1)", omega));
    }
    Ok((m / (1.0 - omega)).sqrt())
}

/// Large-`M, N` cap on the OLS threshold at compression ratio `ω = M/N`:
/// `(2/3)(√(M/(1−ω)) + 1)`.
pub fn remark1_cap(m: f64, omega: f64) -> Result<f64> {
    Ok(2.0 / 3.0 * (sqrt_m_ratio(m, omega)? + 1.0))
}

/// Slope `W(d)` of the block cap.
pub fn block_cap_slope(d: usize) -> f64 {
    let d = d as f64;
    let u = -8.0 / 729.0 * d.powi(3) + 4.0 / 81.0 * d * d - 2.0 / 27.0 * d + 1.0 / 27.0;
    let v = -4.0 / 81.0 * d * d + 4.0 / 27.0 * d - 1.0 / 9.0;
    cardano_sum(u, v) + 2.0 / 9.0 * d + 2.0 / 3.0
}

/// Large-`M, N` cap on the BOLS threshold with `ν = 0`:
/// `W(d)√(M/(1−ω)) + 5d/9 + 1/9`.
pub fn remark4_cap(m: f64, omega: f64, d: usize) -> Result<f64> {
    check_positive("d", d as f64)?;
    let d_f = d as f64;
    Ok(block_cap_slope(d) * sqrt_m_ratio(m, omega)? + 5.0 / 9.0 * d_f + 1.0 / 9.0)
}

/// Lower bound on `P{‖BᵀB − I‖₁,₁ ≤ (K−T)τ/2}` for an `M × K` Gaussian `B`
/// (`d = 1`), or its block analogue with `ρ_c` for `kd` columns in blocks of `d`:
/// `1 − k·e^{−((kd−1)/2)(C − ln(1+C))} / (C√(π(kd−1)))`,
/// `C = M(k−T)²d²τ² / (4(kd−1)²) − 1`. Clamped to `[0, 1]`.
pub fn probability_bound(m: usize, kd: usize, tau: f64, t: f64, d: usize) -> Result<f64> {
    if d == 0 || kd % d != 0 {
        return Err(Error::domain("d must divide the total sparsity", d as f64));
    }
    if kd < 2 {
        return Err(Error::domain("total sparsity must be at least 2", kd as f64));
    }
    check_positive("tau", tau)?;
    let (n, df) = (kd as f64, d as f64);
    let k = n / df;
    let c = m as f64 * (k - t).powi(2) * df * df * tau * tau / (4.0 * (n - 1.0).powi(2)) - 1.0;
    if !(c > 0.0) {
        return Err(Error::domain(
            "bound is vacuous (C <= 0); increase M or tau",
            c,
        ));
    }
    let tail = k * (-(n - 1.0) / 2.0 * (c - c.ln_1p())).exp() / (c * (PI * (n - 1.0)).sqrt());
    Ok((1.0 - tail).clamp(0.0, 1.0))
}

/// Entry floors for recovery under `N(0, σ²I)` noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyBoundReport {
    /// Minimum `‖x_{0∖S}‖₂` for the next pick to be correct.
    pub vector_floor: f64,
    /// Minimum `|x_i|` (or `‖x[i]‖₂` per block) for whole-support recovery.
    pub entry_floor: f64,
    pub mu: f64,
    pub mu_block: f64,
    pub nu: f64,
    /// `K`, or the block count `k`.
    pub sparsity: usize,
    pub block_len: usize,
    pub iteration: usize,
    pub sigma: f64,
    pub m: usize,
    /// `T` or `T_B`.
    pub t: f64,
}

/// `√(M + 2√(M ln M))`.
pub fn noise_amplitude(m: usize) -> f64 {
    let m = m as f64;
    (m + 2.0 * (m * m.ln()).sqrt()).sqrt()
}

fn check_noise(sparsity: usize, l: usize, sigma: f64, m: usize) -> Result<()> {
    if l >= sparsity {
        return Err(Error::domain("iteration l must be below the sparsity", l as f64));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain("sigma must be >= 0", sigma));
    }
    if m == 0 {
        return Err(Error::domain("M must be positive", 0.0));
    }
    Ok(())
}

/// Noisy OLS/MOLS floors at iteration `l`:
/// `2√(K−l)(2−(K−T)μ)σ√(M+2√(M ln M)) / ((2−(K−T)μ−2KTμ)(1−(K−1)μ))`
/// for the remaining vector; the per-entry floor drops `√(K−l)`.
pub fn noisy_floor_ols(mu: f64, k: usize, l: usize, sigma: f64, m: usize) -> Result<NoisyBoundReport> {
    check_noise(k, l, sigma, m)?;
    let t = t_factor(mu, k)?;
    let kf = k as f64;
    let a = 2.0 - (kf - t) * mu;
    let den = (a - 2.0 * kf * t * mu) * (1.0 - (kf - 1.0) * mu);
    if !(a - 2.0 * kf * t * mu > 0.0) {
        return Err(Error::domain("noiseless condition fails for this (mu, K)", den));
    }
    let entry = 2.0 * a * sigma * noise_amplitude(m) / den;
    Ok(NoisyBoundReport {
        vector_floor: ((k - l) as f64).sqrt() * entry,
        entry_floor: entry,
        mu,
        mu_block: mu,
        nu: 0.0,
        sparsity: k,
        block_len: 1,
        iteration: l,
        sigma,
        m,
        t,
    })
}

/// Noisy BOLS floors at iteration `l`, per block:
/// `2√(k−l)(2−(k−T_B)dμ_B)√d σ√(M+2√(M ln M)) / ((2−(k−T_B)dμ_B−2T_B kdμ_B)(1−(kd−1)μ))`.
pub fn noisy_floor_bols(
    mu: f64,
    mu_block: f64,
    nu: f64,
    k: usize,
    d: usize,
    l: usize,
    sigma: f64,
    m: usize,
) -> Result<NoisyBoundReport> {
    check_noise(k, l, sigma, m)?;
    check_positive("mu_block", mu_block)?;
    let t = t_factor_block(mu, nu, k, d)?;
    let (kf, df) = (k as f64, d as f64);
    let a = 2.0 - (kf - t) * df * mu_block;
    let lead = a - 2.0 * t * kf * df * mu_block;
    let den = lead * (1.0 - (kf * df - 1.0) * mu);
    if !(lead > 0.0) {
        return Err(Error::domain("noiseless condition fails for this (mu_B, k, d)", den));
    }
    let entry = 2.0 * a * df.sqrt() * sigma * noise_amplitude(m) / den;
    Ok(NoisyBoundReport {
        vector_floor: ((k - l) as f64).sqrt() * entry,
        entry_floor: entry,
        mu,
        mu_block,
        nu,
        sparsity: k,
        block_len: d,
        iteration: l,
        sigma,
        m,
        t,
    })
}

/// Outcome of checking the projected-norm bounds on every admissible support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    /// `1/√T` (or `1/√T_B`) computed from the matrix's own coherences.
    pub lower_bound: f64,
    pub mu: f64,
    pub nu: f64,
    pub min_norm: f64,
    pub max_norm: f64,
    pub supports: usize,
    pub evaluations: usize,
    pub violations: usize,
}

/// Slack allowed below `1/√T` and above 1.
pub const LEMMA_LOWER_SLACK: f64 = 1e-9;
pub const LEMMA_UPPER_SLACK: f64 = 1e-12;

fn subsets_up_to(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&v: &usize| v + 1);
            for i in start..n {
                let mut t: Vec<usize> = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn tally(d: &MeasurementMatrix, supports: &[Vec<usize>], lower: f64, mu: f64, nu: f64) -> Result<LemmaCheck> {
    let mut rep = LemmaCheck {
        lower_bound: lower,
        mu,
        nu,
        min_norm: f64::INFINITY,
        max_norm: 0.0,
        supports: supports.len(),
        evaluations: 0,
        violations: 0,
    };
    for s in supports {
        let orth = Projector::from_nalgebra(&d.na().select_columns(s))?.project_orth_mat(d.na());
        for i in (0..d.cols()).filter(|i| !s.contains(i)) {
            let n = orth.column(i).norm();
            rep.min_norm = rep.min_norm.min(n);
            rep.max_norm = rep.max_norm.max(n);
            rep.evaluations += 1;
            if n < lower - LEMMA_LOWER_SLACK || n > 1.0 + LEMMA_UPPER_SLACK {
                rep.violations += 1;
            }
        }
    }
    Ok(rep)
}

/// Checks `1/√T ≤ ‖P⊥_S D_i‖₂ ≤ 1` over every `S` with `|S| ≤ K−1` and every `i ∉ S`.
/// The number of supports grows like `N^(K−1)`; intended for small `N`.
pub fn lemma_check_ols(d: &MeasurementMatrix, k: usize) -> Result<LemmaCheck> {
    let mu = coherence(d);
    let t = t_factor(mu, k)?;
    let supports = subsets_up_to(d.cols(), k.saturating_sub(1).min(d.rows()));
    tally(d, &supports, 1.0 / t.sqrt(), mu, 0.0)
}

/// Block analogue of [`lemma_check_ols`]: `S` ranges over unions of at most
/// `k−1` blocks plus a prefix (fewer than `d` columns) of one further block.
pub fn lemma_check_bols(d: &MeasurementMatrix, k: usize) -> Result<LemmaCheck> {
    let len = d.block_len();
    let (mu, nu) = (coherence(d), sub_coherence(d));
    let t = t_factor_block(mu, nu, k, len)?;
    let mut supports = Vec::new();
    for blocks in subsets_up_to(d.num_blocks(), k.saturating_sub(1)) {
        let base: Vec<usize> = blocks.iter().flat_map(|&b| d.block_columns(b)).collect();
        supports.push(base.clone());
        for extra in (0..d.num_blocks()).filter(|b| !blocks.contains(b)) {
            for p in 1..len {
                let mut s = base.clone();
                s.extend(d.block_columns(extra).take(p));
                supports.push(s);
            }
        }
    }
    supports.retain(|s| s.len() < d.rows());
    tally(d, &supports, 1.0 / t.sqrt(), mu, nu)
}
