//! Incoherence measures of a sensing matrix.
//!
//! * coherence `μ`: largest absolute inner product of two distinct columns;
//! * block-coherence `μ_B`: largest spectral norm of a cross-Gram block
//!   `D[i]ᵀ D[j]` (`i ≠ j`), divided by the block length;
//! * sub-coherence `ν`: largest coherence between two columns of the same block;
//! * the Welch-type lower bound `√((N−M)/(M(N−1)))` on `μ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{spectral_norm_of, DenseMatrix};

/// A sensing matrix with unit-norm columns and an optional block partition.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    mat: DenseMatrix,
    block_len: usize,
}

impl MeasurementMatrix {
    /// Normalizes every column to unit ℓ₂ norm. `block_len` must divide the
    /// number of columns; use 1 for an unstructured matrix.
    pub fn new(mat: DenseMatrix, block_len: usize) -> Result<Self> {
        let (m, n) = (mat.rows(), mat.cols());
        if m == 0 || n == 0 {
            return Err(Error::InvalidMatrix(format!("empty {m}x{n} sensing matrix")));
        }
        if block_len == 0 || n % block_len != 0 {
            return Err(Error::DimensionMismatch(format!(
                "block length {block_len} does not divide {n} columns"
            )));
        }
        let mut inner = mat.into_nalgebra();
        for (j, mut col) in inner.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(Error::InvalidMatrix(format!("column {j} is zero")));
            }
            col /= norm;
        }
        Ok(Self {
            mat: DenseMatrix::from_nalgebra(inner)?,
            block_len,
        })
    }

    /// Same columns, different block partition.
    pub fn with_block_len(&self, block_len: usize) -> Result<Self> {
        let n = self.cols();
        if block_len == 0 || n % block_len != 0 {
            return Err(Error::DimensionMismatch(format!(
                "block length {block_len} does not divide {n} columns"
            )));
        }
        Ok(Self {
            mat: self.mat.clone(),
            block_len,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.mat
    }

    pub(crate) fn na(&self) -> &DMatrix<f64> {
        self.mat.as_nalgebra()
    }

    /// Number of measurements `M`.
    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    /// Signal length `N`.
    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Number of blocks `N / d`.
    pub fn num_blocks(&self) -> usize {
        self.cols() / self.block_len
    }

    /// Column indices belonging to block `b`.
    pub fn block_columns(&self, b: usize) -> std::ops::Range<usize> {
        b * self.block_len..(b + 1) * self.block_len
    }

    /// `D x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.mat.mul_vec(x)
    }

    /// `DᵀD`, computed by column panels on and above the diagonal only.
    fn gram(&self) -> DMatrix<f64> {
        const PANEL: usize = 128;
        let a = self.na();
        let n = a.ncols();
        let at = a.transpose();
        let mut g = DMatrix::zeros(n, n);
        for j0 in (0..n).step_by(PANEL) {
            let w = PANEL.min(n - j0);
            let blk = at.rows(0, j0 + w) * a.columns(j0, w);
            g.view_mut((0, j0), (j0 + w, w)).copy_from(&blk);
        }
        for j in 0..n {
            for i in j + 1..n {
                g[(i, j)] = g[(j, i)];
            }
        }
        g
    }
}

/// `μ`, `μ_B`, `ν` and the Welch bound of one matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceProfile {
    pub mu: f64,
    pub mu_block: f64,
    pub nu: f64,
    pub welch: f64,
}

/// Largest `|⟨D_i, D_j⟩|` over distinct columns (0 for a single column).
pub fn coherence(d: &MeasurementMatrix) -> f64 {
    coherence_from_gram(&d.gram())
}

fn coherence_from_gram(g: &DMatrix<f64>) -> f64 {
    let n = g.ncols();
    let mut best = 0.0_f64;
    for j in 0..n {
        for i in 0..j {
            best = best.max(g[(i, j)].abs());
        }
    }
    best
}

/// `max_{i≠j} ρ(D[i]ᵀ D[j]) / d` over block pairs (0 for a single block).
pub fn block_coherence(d: &MeasurementMatrix) -> f64 {
    block_coherence_from_gram(&d.gram(), d.block_len())
}

fn block_coherence_from_gram(g: &DMatrix<f64>, len: usize) -> f64 {
    let nb = g.ncols() / len;
    let mut best = 0.0_f64;
    // ρ(M[i,j]) = ρ(M[j,i]) since M[j,i] = M[i,j]ᵀ, so one triangle suffices.
    for j in 0..nb {
        for i in 0..j {
            let blk = g.view((i * len, j * len), (len, len)).into_owned();
            best = best.max(spectral_norm_of(&blk));
        }
    }
    best / len as f64
}

/// Largest `|⟨D_i, D_j⟩|` between distinct columns of the same block; 0 when `d = 1`.
pub fn sub_coherence(d: &MeasurementMatrix) -> f64 {
    sub_coherence_from_gram(&d.gram(), d.block_len())
}

fn sub_coherence_from_gram(g: &DMatrix<f64>, len: usize) -> f64 {
    let nb = g.ncols() / len;
    let mut best = 0.0_f64;
    for b in 0..nb {
        for j in 0..len {
            for i in 0..j {
                best = best.max(g[(b * len + i, b * len + j)].abs());
            }
        }
    }
    best
}

/// `√((N−M)/(M(N−1)))`, a lower bound on the coherence of any `M × N`
/// unit-column matrix. Requires `1 ≤ M ≤ N` and `N ≥ 2`.
pub fn welch_bound(m: usize, n: usize) -> Result<f64> {
    if m == 0 || m > n || n < 2 {
        return Err(Error::domain(format!("Welch bound needs 1 <= M <= N, N >= 2 (M={m}, N={n})"), m as f64));
    }
    let (m, n) = (m as f64, n as f64);
    Ok(((n - m) / (m * (n - 1.0))).sqrt())
}

/// All three measures plus the Welch bound, sharing one Gram computation.
pub fn profile(d: &MeasurementMatrix) -> CoherenceProfile {
    let g = d.gram();
    let len = d.block_len();
    let mu = coherence_from_gram(&g);
    CoherenceProfile {
        mu,
        mu_block: if len == 1 { mu } else { block_coherence_from_gram(&g, len) },
        nu: if len == 1 { 0.0 } else { sub_coherence_from_gram(&g, len) },
        welch: welch_bound(d.rows().min(d.cols()), d.cols().max(2)).unwrap_or(0.0),
    }
}
