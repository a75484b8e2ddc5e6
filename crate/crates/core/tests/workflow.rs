use proptest::prelude::*;

use subreg_core::demos::fixtures::{halfplane_kkt, newton_fixtures};
use subreg_core::geq::{GeneralizedEquation, SetPart, SmoothMap};
use subreg_core::nlp::{halfplane_qp, nlp_equivalence, NlpReport};
use subreg_core::numerics::{singular_values, DenseMatrix};
use subreg_core::ocp::{clipped_tracking, convergence_experiment, ConvergenceStudy};
use subreg_core::polyhedral::PolyhedralCone;
use subreg_core::regularity::{displacement_rate_sample, linear_map_moduli, radius_linear, radius_variational, Norm};
use subreg_core::solvers::{josephy_newton, semismooth_newton, NewtonConfig, SolveReport};

const RADII: [f64; 3] = [1e-3, 1e-5, 1e-7];

fn affine_ge(m: DenseMatrix) -> GeneralizedEquation {
    let n = m.rows();
    GeneralizedEquation::new(SmoothMap::affine(m, vec![0.0; n]), SetPart::ZeroMap, Some(vec![0.0; n])).unwrap()
}

#[test]
fn kkt_fixture_solvers_agree() {
    let ge = halfplane_kkt();
    let x0 = [0.7, 0.2, 0.6];
    let a = josephy_newton(&ge, &x0, &NewtonConfig::default()).unwrap();
    let b = semismooth_newton(&ge, &x0, &NewtonConfig::default()).unwrap();
    assert!(a.converged() && b.converged());
    for ((u, v), w) in a.last().iter().zip(b.last()).zip([0.5, 0.5, 1.0]) {
        assert!((u - w).abs() < 1e-9 && (v - w).abs() < 1e-9);
    }
}

#[test]
fn reports_round_trip_through_json() {
    let fx = &newton_fixtures()[0];
    let rep = josephy_newton(&fx.ge, &fx.start, &NewtonConfig::default()).unwrap();
    let back: SolveReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
    assert_eq!(back, rep);

    let inst = halfplane_qp();
    let nlp = nlp_equivalence(&inst.problem, &inst.point).unwrap();
    let back: NlpReport = serde_json::from_str(&serde_json::to_string(&nlp).unwrap()).unwrap();
    assert_eq!(back, nlp);

    let study = convergence_experiment(&clipped_tracking(), &[8, 16], 128).unwrap();
    let back: ConvergenceStudy = serde_json::from_str(&serde_json::to_string(&study).unwrap()).unwrap();
    assert_eq!(back.errors, study.errors);
    assert_eq!(back.fitted_order, study.fitted_order);
}

fn matrix(n: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |d| DenseMatrix::from_row_major(n, n, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampled_rate_is_reciprocal_of_modulus(m in matrix(2)) {
        let sigma = singular_values(&m).into_iter().fold(f64::INFINITY, f64::min);
        prop_assume!(sigma > 0.2);
        let modulus = linear_map_moduli(&m, Norm::L2, Norm::L2).unwrap().subreg_modulus;
        let est = displacement_rate_sample(&affine_ge(m), &RADII).unwrap();
        let p = est.rate.unwrap() * modulus;
        prop_assert!((0.9..=1.1).contains(&p), "{}", p);
    }

    #[test]
    fn newton_solves_affine_maps_in_one_step(m in matrix(3), x0 in prop::collection::vec(-1.0f64..1.0, 3)) {
        let sigma = singular_values(&m).into_iter().fold(f64::INFINITY, f64::min);
        prop_assume!(sigma > 0.1);
        let rep = josephy_newton(&affine_ge(m), &x0, &NewtonConfig::default()).unwrap();
        prop_assert!(rep.converged());
        prop_assert!(rep.steps() <= 2);
        prop_assert!(rep.last().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn radii_agree_on_positive_definite_matrices(g in matrix(3)) {
        let a = g.transpose().matmul(&g).add(&DenseMatrix::identity(3).scale(0.05));
        let lin = radius_linear(&a).unwrap().radius;
        let var = radius_variational(&a, &PolyhedralCone::whole_space(3)).unwrap().sigma;
        prop_assert!((lin - var).abs() <= 1e-9 * (1.0 + lin));
    }
}
