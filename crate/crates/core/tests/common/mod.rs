//! Reference computations that share no code with the library.
#![allow(dead_code)]

use olscert::matcore::DenseMatrix;
use olscert::MeasurementMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_rows(a: &DenseMatrix) -> Mat {
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| a.get(i, j)).collect())
        .collect()
}

pub fn from_rows(a: &Mat) -> DenseMatrix {
    let cols = a.first().map_or(0, Vec::len);
    let flat: Vec<f64> = a.iter().flatten().copied().collect();
    DenseMatrix::from_row_slice(a.len(), cols, &flat).unwrap()
}

pub fn random_rows(rng: &mut impl Rng, m: usize, n: usize) -> Mat {
    (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn random_matrix(seed: u64, m: usize, n: usize, d: usize) -> MeasurementMatrix {
    MeasurementMatrix::new(from_rows(&random_rows(&mut rng(seed), m, n)), d).unwrap()
}

pub fn transpose(a: &Mat) -> Mat {
    let n = a.first().map_or(0, Vec::len);
    (0..n).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|r| {
            (0..n)
                .map(|j| (0..inner).map(|k| r[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `G X = B` for square `G` by Gaussian elimination with partial pivoting.
pub fn solve(g: &Mat, b: &Mat) -> Mat {
    let n = g.len();
    let m = b.first().map_or(0, Vec::len);
    let mut aug: Mat = g.iter().zip(b).map(|(r, s)| r.iter().chain(s).copied().collect()).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        aug.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = aug[row][col] / aug[col][col];
                for k in col..n + m {
                    aug[row][k] -= f * aug[col][k];
                }
            }
        }
    }
    (0..n)
        .map(|i| (0..m).map(|j| aug[i][n + j] / aug[i][i]).collect())
        .collect()
}

/// `(AᵀA)⁻¹ AᵀB` via the normal equations.
pub fn naive_pinv_apply(a: &Mat, b: &Mat) -> Mat {
    let at = transpose(a);
    solve(&matmul(&at, a), &matmul(&at, b))
}

/// Number of eigenvalues of symmetric `g` below `lambda` (inertia of `g − λI`
/// from the pivots of symmetric elimination).
fn count_below(g: &Mat, lambda: f64) -> usize {
    let n = g.len();
    let mut a: Mat = g.clone();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let mut neg = 0;
    for k in 0..n {
        let mut p = a[k][k];
        if p == 0.0 {
            p = -1e-300;
        }
        if p < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let f = a[i][k] / p;
            for j in k + 1..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    neg
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by bisection
/// on the eigenvalue count.
pub fn max_eigen_psd(g: &Mat) -> f64 {
    let n = g.len();
    let (mut lo, mut hi) = (0.0, (0..n).map(|i| g[i][i]).sum::<f64>() + 1e-12);
    while hi - lo > 1e-13 * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if count_below(g, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn spectral_oracle(a: &Mat) -> f64 {
    if a.is_empty() || a[0].is_empty() {
        return 0.0;
    }
    max_eigen_psd(&matmul(&transpose(a), a)).sqrt()
}

pub fn columns(d: &MeasurementMatrix) -> Vec<Vec<f64>> {
    (0..d.cols()).map(|j| d.matrix().column(j)).collect()
}

/// `v` minus its projection onto the span of `basis` (Gram-Schmidt twice).
pub fn residual_against(basis_cols: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for c in basis_cols {
        let mut u = c.clone();
        for _ in 0..2 {
            for e in &ortho {
                let p = dot(e, &u);
                u.iter_mut().zip(e).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = norm(&u);
        ortho.push(u.iter().map(|x| x / n).collect());
    }
    let mut r = v.to_vec();
    for _ in 0..2 {
        for e in &ortho {
            let p = dot(e, &r);
            r.iter_mut().zip(e).for_each(|(x, y)| *x -= p * y);
        }
    }
    r
}

/// All `k`-subsets of `items`, in lexicographic order.
pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
