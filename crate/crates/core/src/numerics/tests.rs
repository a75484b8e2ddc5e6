use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vector::{dot, norm2};
use super::*;
use crate::error::Error;

fn mat(rows: &[&[f64]]) -> DenseMatrix {
    let v: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    DenseMatrix::from_rows(&v, rows[0].len()).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
    let data = (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseMatrix::from_row_major(r, c, data).unwrap()
}

#[test]
fn solve_examples() {
    let x = solve_linear(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
    assert_eq!(x, vec![1.0, 2.0, 3.0]);
    let x = solve_linear(&DenseMatrix::from_diag(&[2.0, 4.0]), &[2.0, 8.0]).unwrap();
    assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    assert_eq!(
        solve_linear(&mat(&[&[1.0, 2.0], &[2.0, 4.0]]), &[1.0, 1.0]),
        Err(Error::Singular)
    );
    assert!(matches!(
        solve_linear(&DenseMatrix::zeros(2, 3), &[1.0, 1.0]),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn solve_residual_on_random_well_conditioned_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 1000 {
        let n = rng.random_range(1..=8);
        let a = random_matrix(&mut rng, n, n);
        let s = singular_values(&a);
        if s[0] / s[n - 1] >= 1e6 {
            continue;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let x = solve_linear(&a, &b).unwrap();
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) <= 1e-10 * (1.0 + norm2(&b)));
        checked += 1;
    }
}

#[test]
fn nullspace_examples() {
    let z = nullspace_basis(&mat(&[&[1.0, 1.0]]));
    assert_eq!(z.cols(), 1);
    let c = z.column(0);
    assert!((c[0] + c[1]).abs() < 1e-12 && (norm2(&c) - 1.0).abs() < 1e-12);
    assert_eq!(nullspace_basis(&DenseMatrix::identity(2)).cols(), 0);
    let z = nullspace_basis(&mat(&[&[1.0, 0.0, 0.0]]));
    assert_eq!(z.cols(), 2);
    for j in 0..2 {
        assert!(z[(0, j)].abs() < 1e-12);
    }
    let g = z.transpose().matmul(&z);
    assert!(g.sub(&DenseMatrix::identity(2)).max_abs() < 1e-12);
}

#[test]
fn smallest_singular_examples() {
    let s = smallest_singular_value(&DenseMatrix::identity(4)).unwrap();
    assert!((s.value - 1.0).abs() < 1e-12 && (norm2(&s.right) - 1.0).abs() < 1e-12);
    let n = 7;
    let d: Vec<f64> = (1..=n).map(|k| 1.0 / k as f64).collect();
    let s = smallest_singular_value(&DenseMatrix::from_diag(&d)).unwrap();
    assert!((s.value - 1.0 / n as f64).abs() < 1e-12);
    assert!((s.right[n - 1].abs() - 1.0).abs() < 1e-12);
    let s = smallest_singular_value(&mat(&[&[1.0], &[1.0]])).unwrap();
    assert!((s.value - 2f64.sqrt()).abs() < 1e-12);
    assert!(smallest_singular_value(&DenseMatrix::zeros(1, 2)).is_err());
}

#[test]
fn smallest_singular_matches_sphere_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_matrix(&mut rng, 5, 3);
    let s = smallest_singular_value(&a).unwrap();
    let mut best = f64::INFINITY;
    for _ in 0..100_000 {
        let h: Vec<f64> = (0..3)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let h: Vec<f64> = h.iter().map(|v| v / norm2(&h)).collect();
        best = best.min(norm2(&a.mul_vec(&h)));
    }
    assert!(best >= s.value - 1e-12);
    assert!((best - s.value).abs() <= 1e-3);
    let av = a.mul_vec(&s.right);
    assert!((norm2(&av) - s.value).abs() < 1e-12);
    let u: Vec<f64> = av.iter().map(|v| v / s.value).collect();
    assert!((dot(&u, &s.left).abs() - 1.0).abs() < 1e-9);
}

#[test]
fn eigen_examples() {
    let e = symmetric_eigen_extremes(&DenseMatrix::from_diag(&[2.0, 5.0])).unwrap();
    assert_eq!((e.lambda_min, e.lambda_max), (2.0, 5.0));
    assert!((e.v_min[0].abs() - 1.0).abs() < 1e-15);
    let a = mat(&[&[2.0, 1.0], &[1.0, 2.0]]);
    let e = symmetric_eigen_extremes(&a).unwrap();
    assert!((e.lambda_min - 1.0).abs() < 1e-12);
    assert!((e.v_min[0] + e.v_min[1]).abs() < 1e-12);
    let av = a.mul_vec(&e.v_min);
    assert!((av[0] - e.v_min[0]).abs() < 1e-12);
    let e = symmetric_eigen_extremes(&DenseMatrix::zeros(2, 2)).unwrap();
    assert_eq!((e.lambda_min, e.lambda_max), (0.0, 0.0));
    assert!(matches!(
        symmetric_eigen_extremes(&mat(&[&[1.0, 2.0], &[0.0, 1.0]])),
        Err(Error::NotSymmetric(_))
    ));
}

#[test]
fn rank_and_lstsq() {
    let a = mat(&[&[1.0, 2.0], &[2.0, 4.0]]);
    assert_eq!(rank(&a), 1);
    let x = lstsq_min_norm(&a, &[1.0, 2.0]);
    let r = a.mul_vec(&x);
    assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
    // Minimum norm solution lies in the row space (1,2).
    assert!((x[0] * 2.0 - x[1]).abs() < 1e-12);
    let (q, r) = qr_thin(&mat(&[&[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]));
    assert_eq!((q.cols(), r.rows()), (2, 2));
    let back = q.matmul(&r);
    assert!((back[(1, 0)] - 1.0).abs() < 1e-12 && (back[(2, 1)] - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sigma_min_squared_is_lambda_min_of_gram(seed in any::<u64>(), r in 1usize..7, extra in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = r;
        let a = random_matrix(&mut rng, r + extra, c);
        let s = smallest_singular_value(&a).unwrap().value;
        let g = a.transpose().matmul(&a);
        let l = symmetric_eigen_extremes(&g).unwrap().lambda_min.max(0.0);
        let scale = symmetric_eigen_extremes(&g).unwrap().lambda_max;
        prop_assert!((s * s - l).abs() <= 1e-8 * scale.max(1e-300));
    }

    #[test]
    fn nullspace_is_orthonormal_and_annihilated(seed in any::<u64>(), r in 0usize..5, c in 1usize..7, deficient in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = random_matrix(&mut rng, r, c);
        if deficient && r >= 2 {
            for j in 0..c {
                a[(r - 1, j)] = a[(0, j)] * 2.0;
            }
        }
        let z = nullspace_basis(&a);
        prop_assert_eq!(z.cols(), c - rank(&a));
        let g = z.transpose().matmul(&z);
        prop_assert!(g.sub(&DenseMatrix::identity(z.cols())).max_abs() <= 1e-10);
        if r > 0 {
            prop_assert!(a.matmul(&z).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn eigen_rayleigh_quotients(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_matrix(&mut rng, n, n);
        let a = b.add(&b.transpose());
        let e = symmetric_eigen_extremes(&a).unwrap();
        let rq = |v: &[f64]| dot(v, &a.mul_vec(v)) / dot(v, v);
        prop_assert!((rq(&e.v_min) - e.lambda_min).abs() <= 1e-9);
        prop_assert!((rq(&e.v_max) - e.lambda_max).abs() <= 1e-9);
    }
}
