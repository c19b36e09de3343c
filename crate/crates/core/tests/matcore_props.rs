mod common;

use common::*;
use olscert::matcore::{
    least_squares, norm_11, norm_inf_inf, project, project_orth, pseudoinverse_apply, rho_c, rho_r,
    spectral_norm, DenseMatrix, Projector,
};
use olscert::Error;
use proptest::prelude::*;

fn tall_matrix() -> impl Strategy<Value = (Mat, Vec<f64>)> {
    (2usize..9)
        .prop_flat_map(|m| (Just(m), 1usize..=m))
        .prop_flat_map(|(m, n)| {
            (
                prop::collection::vec(prop::collection::vec(-5.0f64..5.0, n), m),
                prop::collection::vec(-5.0f64..5.0, m),
            )
        })
}

fn any_matrix() -> impl Strategy<Value = Mat> {
    (1usize..7, 1usize..7).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop::collection::vec(-5.0f64..5.0, n), m)
    })
}

fn well_posed(a: &Mat) -> bool {
    Projector::new(&from_rows(a)).is_ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_pythagorean_and_idempotent((a, v) in tall_matrix()) {
        prop_assume!(well_posed(&a));
        let a = from_rows(&a);
        let p = project(&a, &v).unwrap();
        let q = project_orth(&a, &v).unwrap();
        let scale = 1.0 + dot(&v, &v);
        prop_assert!((dot(&p, &p) + dot(&q, &q) - dot(&v, &v)).abs() <= 1e-10 * scale);
        for i in 0..v.len() {
            prop_assert!((p[i] + q[i] - v[i]).abs() <= 1e-12 * scale);
        }
        let pp = project(&a, &p).unwrap();
        let qq = project_orth(&a, &q).unwrap();
        prop_assert!(pp.iter().zip(&p).all(|(x, y)| (x - y).abs() <= 1e-10 * scale));
        prop_assert!(qq.iter().zip(&q).all(|(x, y)| (x - y).abs() <= 1e-10 * scale));
    }

    #[test]
    fn range_vectors_have_no_orthogonal_part((a, c) in tall_matrix()) {
        prop_assume!(well_posed(&a));
        let a = from_rows(&a);
        let c = &c[..a.cols()];
        let v = a.mul_vec(c).unwrap();
        let q = project_orth(&a, &v).unwrap();
        prop_assert!(norm(&q) <= 1e-10 * (1.0 + norm(&v)));
    }

    #[test]
    fn least_squares_residual_is_orthogonal_to_columns((a, y) in tall_matrix()) {
        prop_assume!(well_posed(&a));
        let rows = a.clone();
        let a = from_rows(&a);
        let x = least_squares(&a, &y).unwrap();
        let ax = a.mul_vec(&x).unwrap();
        let r: Vec<f64> = y.iter().zip(&ax).map(|(u, v)| u - v).collect();
        for col in transpose(&rows) {
            prop_assert!(dot(&col, &r).abs() <= 1e-9 * (1.0 + norm(&col) * norm(&y)));
        }
    }

    #[test]
    fn pseudoinverse_matches_normal_equations((a, y) in tall_matrix()) {
        prop_assume!(well_posed(&a));
        let g = matmul(&transpose(&a), &a);
        // keep the normal-equation oracle well conditioned
        prop_assume!(max_eigen_psd(&g) < 1e6 * min_pivot(&g));
        let b: Mat = y.iter().map(|v| vec![*v, 2.0 * v - 1.0]).collect();
        let want = naive_pinv_apply(&a, &b);
        let got = pseudoinverse_apply(&from_rows(&a), &from_rows(&b)).unwrap();
        let scale = 1.0 + want.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                prop_assert!((got.get(i, j) - w).abs() <= 1e-7 * scale);
            }
        }
        // column by column agrees with least squares
        let x = least_squares(&from_rows(&a), &y).unwrap();
        for (i, xi) in x.iter().enumerate() {
            prop_assert!((got.get(i, 0) - xi).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn norm_duality(a in any_matrix()) {
        let m = from_rows(&a);
        let t = from_rows(&transpose(&a));
        prop_assert_eq!(norm_11(&m), norm_inf_inf(&t));
        prop_assert_eq!(rho_c(&m, 1, 1).unwrap(), norm_11(&m));
        let max_col_sum = transpose(&a)
            .iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        prop_assert!((norm_11(&m) - max_col_sum).abs() <= 1e-12 * (1.0 + max_col_sum));
    }

    #[test]
    fn spectral_norm_bounds(a in any_matrix()) {
        let m = from_rows(&a);
        let s = spectral_norm(&m);
        prop_assert!(s + 1e-12 >= m.max_abs());
        let oracle = spectral_oracle(&a);
        prop_assert!((s - oracle).abs() <= 1e-8 * (1.0 + oracle));
    }

    #[test]
    fn block_norm_duality(seed in any::<u64>(), br in 1usize..4, bc in 1usize..4, nr in 1usize..4, nc in 1usize..4) {
        let a = random_rows(&mut rng(seed), br * nr, bc * nc);
        let m = from_rows(&a);
        let t = from_rows(&transpose(&a));
        let x = rho_c(&m, br, bc).unwrap();
        let y = rho_r(&t, bc, br).unwrap();
        prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x));
    }
}

fn min_pivot(g: &Mat) -> f64 {
    // smallest eigenvalue via the largest eigenvalue of (trace·I − G)
    let n = g.len();
    let tr: f64 = (0..n).map(|i| g[i][i]).sum();
    let shifted: Mat = (0..n)
        .map(|i| (0..n).map(|j| if i == j { tr - g[i][j] } else { -g[i][j] }).collect())
        .collect();
    (tr - max_eigen_psd(&shifted)).max(0.0)
}

fn block_rho_c_oracle(a: &Mat, d_row: usize, d_col: usize) -> f64 {
    let nr = a.len() / d_row;
    let nc = a[0].len() / d_col;
    (0..nc)
        .map(|j| {
            (0..nr)
                .map(|i| {
                    let blk: Mat = (0..d_row)
                        .map(|r| a[i * d_row + r][j * d_col..(j + 1) * d_col].to_vec())
                        .collect();
                    spectral_oracle(&blk)
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[test]
fn spectral_norm_of_random_8x4_matches_oracle() {
    let a = random_rows(&mut rng(7), 8, 4);
    let s = spectral_norm(&from_rows(&a));
    assert!((s - spectral_oracle(&a)).abs() < 1e-10, "{s}");
}

#[test]
fn rho_c_of_random_8x8_matches_blockwise_oracle() {
    let a = random_rows(&mut rng(11), 8, 8);
    let got = rho_c(&from_rows(&a), 2, 2).unwrap();
    assert!((got - block_rho_c_oracle(&a, 2, 2)).abs() < 1e-10, "{got}");
    let got = rho_c(&from_rows(&a), 4, 2).unwrap();
    assert!((got - block_rho_c_oracle(&a, 4, 2)).abs() < 1e-10, "{got}");
}

#[test]
fn pseudoinverse_of_8x3_against_8x4() {
    let mut r = rng(3);
    let a = random_rows(&mut r, 8, 3);
    let b = random_rows(&mut r, 8, 4);
    let got = pseudoinverse_apply(&from_rows(&a), &from_rows(&b)).unwrap();
    let want = naive_pinv_apply(&a, &b);
    for (i, row) in want.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            assert!((got.get(i, j) - w).abs() < 1e-10);
        }
    }
}

#[test]
fn projection_of_identity_columns() {
    let a = DenseMatrix::from_columns(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
    assert_eq!(project(&a, &[3.0, 4.0, 5.0]).unwrap(), vec![3.0, 4.0, 0.0]);
    assert_eq!(project_orth(&a, &[3.0, 4.0, 5.0]).unwrap(), vec![0.0, 0.0, 5.0]);
}

#[test]
fn empty_selection_projects_to_zero() {
    let a = DenseMatrix::zeros(3, 0);
    assert_eq!(project(&a, &[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 3]);
    assert_eq!(project_orth(&a, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
}

#[test]
fn rank_deficient_columns_are_rejected() {
    let a = DenseMatrix::from_columns(3, &[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
    assert!(matches!(Projector::new(&a), Err(Error::RankDeficient { .. })));
    assert!(matches!(least_squares(&a, &[1.0, 0.0, 0.0]), Err(Error::RankDeficient { .. })));
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let a = DenseMatrix::identity(3);
    assert!(matches!(project(&a, &[1.0, 2.0]), Err(Error::DimensionMismatch(_))));
    assert!(rho_c(&a, 2, 1).is_err());
}
