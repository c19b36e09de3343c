//! Dense real linear algebra used by the solvers and certificates.
//!
//! Everything here is a thin, validated layer over `nalgebra`: a finite
//! [`DenseMatrix`], strictly increasing [`IndexSet`]s, a QR-backed
//! [`Projector`] for least squares and orthogonal projections, and the
//! mixed norms (`‖·‖₁,₁`, `‖·‖∞,∞`, `ρ_c`, `ρ_r`) the recovery
//! certificates are phrased in.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot tolerance below which a triangular factor is treated as singular.
pub const RANK_TOL: f64 = 1e-10;

/// A finite, dense, real matrix.
///
/// Zero-column matrices are allowed so that `span(∅)` can be represented
/// by an `M × 0` matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from its columns. All columns must have the same length.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} in a matrix with {rows} rows",
                bad.len()
            )));
        }
        let flat: Vec<f64> = columns.iter().flatten().copied().collect();
        Self::from_nalgebra(DMatrix::from_column_slice(rows, columns.len(), &flat))
    }

    /// Wraps an `nalgebra` matrix after checking every entry is finite.
    pub fn from_nalgebra(inner: DMatrix<f64>) -> Result<Self> {
        if let Some(bad) = inner.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!("non-finite entry {bad}")));
        }
        Ok(Self { inner })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.inner.column(j).iter().copied().collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            out.extend(self.inner.row(i).iter());
        }
        out
    }

    /// The sub-matrix made of the listed columns, in the listed order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self {
            inner: self.inner.select_columns(cols.iter()),
        }
    }

    /// The `rows × cols` sub-block starting at `(row0, col0)`.
    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        Self {
            inner: self.inner.view((row0, col0), (rows, cols)).into_owned(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols()
            )));
        }
        Ok((&self.inner * DVector::from_column_slice(v)).as_slice().to_vec())
    }

    pub fn mul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix {}x{} {:?}", self.rows(), self.cols(), self.to_row_major())
    }
}

/// Strictly increasing set of column (or block) indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Accepts indices in any order; duplicates are an error.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidState(format!(
                "duplicate index in {indices:?}"
            )));
        }
        Ok(Self(indices))
    }

    /// Like [`IndexSet::new`] but also checks every index is below `bound`.
    pub fn within(indices: Vec<usize>, bound: usize) -> Result<Self> {
        let set = Self::new(indices)?;
        if let Some(&last) = set.0.last() {
            if last >= bound {
                return Err(Error::DimensionMismatch(format!(
                    "index {last} out of range 0..{bound}"
                )));
            }
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Inserts `i`; returns false if it was already present.
    pub fn insert(&mut self, i: usize) -> bool {
        match self.0.binary_search(&i) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, i);
                true
            }
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Elements of `self` that are not in `other`.
    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    /// Expands block indices into the column indices they cover.
    pub fn expand_blocks(&self, block_len: usize) -> IndexSet {
        IndexSet(
            self.iter()
                .flat_map(|b| b * block_len..(b + 1) * block_len)
                .collect(),
        )
    }
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

/// Thin QR factorization of a full-column-rank matrix.
///
/// `q` has orthonormal columns spanning `range(A)`; `r` is upper triangular.
/// An `M × 0` input yields the zero projection.
#[derive(Debug, Clone)]
pub struct Projector {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl Projector {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        Self::from_nalgebra(a.as_nalgebra())
    }

    pub(crate) fn from_nalgebra(a: &DMatrix<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if n == 0 {
            return Ok(Self {
                q: DMatrix::zeros(m, 0),
                r: DMatrix::zeros(0, 0),
            });
        }
        if n > m {
            return Err(Error::RankDeficient { ratio: 0.0 });
        }
        let qr = a.clone().qr();
        let r = qr.r();
        let (lo, hi) = r
            .diagonal()
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| {
                (lo.min(v.abs()), hi.max(v.abs()))
            });
        let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        if ratio <= RANK_TOL {
            return Err(Error::RankDeficient { ratio });
        }
        Ok(Self { q: qr.q(), r })
    }

    /// Number of columns of the factored matrix.
    pub fn rank(&self) -> usize {
        self.q.ncols()
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// Orthonormal basis of the column space.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub(crate) fn project_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.rank() == 0 {
            return DVector::zeros(v.len());
        }
        &self.q * (self.q.transpose() * v)
    }

    pub(crate) fn project_orth_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.project_vec(v)
    }

    /// `P⊥ B` for every column of `B` at once.
    pub(crate) fn project_orth_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        if self.rank() == 0 {
            return b.clone();
        }
        b - &self.q * (self.q.transpose() * b)
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        Ok(self
            .project_vec(&DVector::from_column_slice(v))
            .as_slice()
            .to_vec())
    }

    pub fn project_orth(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        Ok(self
            .project_orth_vec(&DVector::from_column_slice(v))
            .as_slice()
            .to_vec())
    }

    /// Least-squares coefficients `R⁻¹ Qᵀ y`.
    pub(crate) fn solve_vec(&self, y: &DVector<f64>) -> DVector<f64> {
        if self.rank() == 0 {
            return DVector::zeros(0);
        }
        let qty = self.q.transpose() * y;
        self.r
            .solve_upper_triangular(&qty)
            .expect("triangular factor was checked to be nonsingular")
    }

    pub(crate) fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        if self.rank() == 0 {
            return DMatrix::zeros(0, b.ncols());
        }
        let qtb = self.q.transpose() * b;
        self.r
            .solve_upper_triangular(&qtb)
            .expect("triangular factor was checked to be nonsingular")
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {len} in a space of dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `argmin_x ‖y − A x‖₂` through a QR factorization of `A`.
pub fn least_squares(a: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for {} rows",
            y.len(),
            a.rows()
        )));
    }
    let p = Projector::new(a)?;
    Ok(p.solve_vec(&DVector::from_column_slice(y)).as_slice().to_vec())
}

/// Orthogonal projection of `v` onto `range(A)`.
pub fn project(a: &DenseMatrix, v: &[f64]) -> Result<Vec<f64>> {
    Projector::new(a)?.project(v)
}

/// Projection of `v` onto the orthogonal complement of `range(A)`.
pub fn project_orth(a: &DenseMatrix, v: &[f64]) -> Result<Vec<f64>> {
    Projector::new(a)?.project_orth(v)
}

/// `A† B = (AᵀA)⁻¹ Aᵀ B`, computed column-wise by least squares.
pub fn pseudoinverse_apply(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows, B has {}",
            a.rows(),
            b.rows()
        )));
    }
    let p = Projector::new(a)?;
    DenseMatrix::from_nalgebra(p.solve_mat(b.as_nalgebra()))
}

/// Maximum absolute column sum.
pub fn norm_11(a: &DenseMatrix) -> f64 {
    a.as_nalgebra()
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute row sum.
pub fn norm_inf_inf(a: &DenseMatrix) -> f64 {
    a.as_nalgebra()
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value `ρ(A) = √λ_max(AᵀA)`.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    spectral_norm_of(a.as_nalgebra())
}

pub(crate) fn spectral_norm_of(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a.ncols() == 1 || a.nrows() == 1 {
        return a.norm();
    }
    a.singular_values().iter().fold(0.0, |m, &s| m.max(s))
}

fn check_blocking(a: &DenseMatrix, d_row: usize, d_col: usize) -> Result<()> {
    if d_row == 0 || d_col == 0 || a.rows() % d_row != 0 || a.cols() % d_col != 0 {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix cannot be split into {d_row}x{d_col} blocks",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// Spectral norms of every `d_row × d_col` block, indexed `[block_row][block_col]`.
fn block_spectral_norms(a: &DenseMatrix, d_row: usize, d_col: usize) -> Vec<Vec<f64>> {
    let m = a.as_nalgebra();
    (0..a.rows() / d_row)
        .map(|i| {
            (0..a.cols() / d_col)
                .map(|j| {
                    spectral_norm_of(&m.view((i * d_row, j * d_col), (d_row, d_col)).into_owned())
                })
                .collect()
        })
        .collect()
}

/// Block analogue of `‖·‖₁,₁`: largest sum of block spectral norms down a block column.
pub fn rho_c(a: &DenseMatrix, d_row: usize, d_col: usize) -> Result<f64> {
    check_blocking(a, d_row, d_col)?;
    let norms = block_spectral_norms(a, d_row, d_col);
    let n_bcols = a.cols() / d_col;
    Ok((0..n_bcols)
        .map(|j| norms.iter().map(|row| row[j]).sum::<f64>())
        .fold(0.0, f64::max))
}

/// Block analogue of `‖·‖∞,∞`: largest sum of block spectral norms along a block row.
pub fn rho_r(a: &DenseMatrix, d_row: usize, d_col: usize) -> Result<f64> {
    check_blocking(a, d_row, d_col)?;
    Ok(block_spectral_norms(a, d_row, d_col)
        .iter()
        .map(|row| row.iter().sum::<f64>())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn least_squares_identity() {
        let a = DenseMatrix::identity(2);
        let x = least_squares(&a, &[3.0, -1.0]).unwrap();
        assert!(close(x[0], 3.0, 1e-14) && close(x[1], -1.0, 1e-14));
    }

    #[test]
    fn least_squares_single_column() {
        // (AᵀA)⁻¹Aᵀy with A = (1,1)/√2, y = (1,0): 1 · (1/√2).
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = DenseMatrix::from_row_slice(2, 1, &[s, s]).unwrap();
        let x = least_squares(&a, &[1.0, 0.0]).unwrap();
        assert!(close(x[0], s, 1e-14));
    }

    #[test]
    fn least_squares_orthonormal_columns() {
        let a = DenseMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let y = [2.0, 5.0, 7.0];
        let x = least_squares(&a, &y).unwrap();
        assert!(close(x[0], 2.0, 1e-14) && close(x[1], 5.0, 1e-14));
        let fit = a.mul_vec(&x).unwrap();
        let resid: Vec<f64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
        assert!(close(resid[0], 0.0, 1e-14) && close(resid[1], 0.0, 1e-14));
        assert!(close(resid[2], 7.0, 1e-14));
    }

    #[test]
    fn least_squares_rank_deficient() {
        let a = DenseMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            least_squares(&a, &[1.0, 1.0, 1.0]),
            Err(Error::RankDeficient { .. })
        ));
        let wide = DenseMatrix::from_row_slice(1, 2, &[1.0, 0.5]).unwrap();
        assert!(matches!(
            least_squares(&wide, &[1.0]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn empty_projection_convention() {
        let a = DenseMatrix::zeros(3, 0);
        let v = [1.0, -2.0, 4.0];
        assert_eq!(project(&a, &v).unwrap(), vec![0.0; 3]);
        assert_eq!(project_orth(&a, &v).unwrap(), v.to_vec());
    }

    #[test]
    fn axis_projection() {
        let a = DenseMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]).unwrap();
        let v = [1.0, 2.0, 3.0];
        let p = project(&a, &v).unwrap();
        let q = project_orth(&a, &v).unwrap();
        for (got, want) in p.iter().zip([1.0, 0.0, 0.0]) {
            assert!(close(*got, want, 1e-15));
        }
        for (got, want) in q.iter().zip([0.0, 2.0, 3.0]) {
            assert!(close(*got, want, 1e-15));
        }
    }

    #[test]
    fn pseudoinverse_of_square_matrix() {
        let a = DenseMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        let b = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 4.0, -1.0]).unwrap();
        let x = pseudoinverse_apply(&a, &b).unwrap();
        let back = a.mul(&x).unwrap();
        for (g, w) in back.to_row_major().iter().zip(b.to_row_major()) {
            assert!(close(*g, w, 1e-10));
        }
    }

    #[test]
    fn pseudoinverse_of_orthonormal_columns_is_transpose() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = DenseMatrix::from_row_slice(3, 2, &[s, 0.0, s, 0.0, 0.0, 1.0]).unwrap();
        let b = DenseMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let x = pseudoinverse_apply(&a, &b).unwrap();
        let at_b = a.transpose().mul(&b).unwrap();
        for (g, w) in x.to_row_major().iter().zip(at_b.to_row_major()) {
            assert!(close(*g, w, 1e-12));
        }
    }

    #[test]
    fn mixed_norms() {
        let a = DenseMatrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, 4.0]).unwrap();
        assert_eq!(norm_11(&a), 6.0);
        assert_eq!(norm_inf_inf(&a), 7.0);
        assert_eq!(norm_11(&DenseMatrix::identity(4)), 1.0);
        assert_eq!(norm_inf_inf(&DenseMatrix::identity(4)), 1.0);
    }

    #[test]
    fn spectral_norm_simple_cases() {
        assert!(close(spectral_norm(&DenseMatrix::identity(3)), 1.0, 1e-14));
        let d = DenseMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -4.0]).unwrap();
        assert!(close(spectral_norm(&d), 4.0, 1e-13));
    }

    #[test]
    fn rho_with_identity_blocks_and_scalar_blocks() {
        let eye = DenseMatrix::identity(6);
        assert!(close(rho_c(&eye, 2, 2).unwrap(), 1.0, 1e-13));
        let a = DenseMatrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 3.0, 4.0, -1.0]).unwrap();
        assert!(close(rho_c(&a, 1, 1).unwrap(), norm_11(&a), 1e-14));
        assert!(close(rho_r(&a, 1, 1).unwrap(), norm_inf_inf(&a), 1e-14));
        assert!(matches!(rho_c(&a, 2, 2), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn index_set_rejects_duplicates_and_sorts() {
        let s = IndexSet::new(vec![5, 1, 3]).unwrap();
        assert_eq!(s.as_slice(), &[1, 3, 5]);
        assert!(IndexSet::new(vec![1, 1]).is_err());
        assert!(IndexSet::within(vec![0, 4], 4).is_err());
        assert_eq!(IndexSet::new(vec![0, 2]).unwrap().expand_blocks(3).as_slice(), &[0, 1, 2, 6, 7, 8]);
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(DenseMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_row_slice(1, 2, &[1.0]).is_err());
    }
}
