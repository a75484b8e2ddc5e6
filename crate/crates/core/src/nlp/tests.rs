use super::*;
use crate::functions::Polynomial;
use crate::polyhedral::PolyhedralCone;
use crate::regularity::radius_variational;

fn poly(p: Polynomial) -> ScalarFunction {
    ScalarFunction::from_polynomial(p)
}

fn data(inst: &FamilyInstance) -> (IndexSets, CriticalConeData) {
    let sets = classify_indices(&inst.problem, &inst.point, KKT_TOL);
    let cone = CriticalConeData::new(&inst.problem, &inst.point, &sets).unwrap();
    (sets, cone)
}

#[test]
fn kkt_residual_examples() {
    let f = halfplane_qp();
    assert!(kkt_residual(&f.problem, &[0.5, 0.5], &[1.0]).unwrap() <= 1e-12);
    // ∇g = (−1, −1): a 0.1 multiplier shift moves ∇ₓL by 0.1 in ℓ∞.
    let r = kkt_residual(&f.problem, &[0.5, 0.5], &[1.1]).unwrap();
    assert!((r - 0.1).abs() < 1e-12);
    assert!(kkt_residual(&f.problem, &[0.5], &[1.0]).is_err());

    let obj = poly(Polynomial::from_terms(2, &[(1.0, &[2, 0]), (3.0, &[0, 1])]));
    let p = NlpProblem::new(2, 0, obj, vec![]).unwrap();
    assert!((kkt_residual(&p, &[0.0, 0.0], &[]).unwrap() - 3.0).abs() < 1e-12);
    // Negative multiplier on an inequality is a violation.
    assert!(kkt_residual(&f.problem, &[0.5, 0.5], &[-1.0]).unwrap() > 1.0);
}

#[test]
fn construction_checks() {
    let bad = ScalarFunction::new(1, |x| x[0] * x[0]).with_gradient(|x| vec![3.0 * x[0]]);
    assert!(matches!(NlpProblem::new(1, 0, bad, vec![]), Err(Error::CrossCheck(_))));
    let obj = poly(Polynomial::from_terms(1, &[(1.0, &[2])]));
    assert!(NlpProblem::new(2, 0, obj.clone(), vec![]).is_err());
    assert!(NlpProblem::new(1, 1, obj.clone(), vec![]).is_err());
    let p = NlpProblem::new(1, 0, obj, vec![poly(Polynomial::affine(&[1.0], -1.0))]).unwrap();
    assert!(KktPoint::new(&p, vec![0.0], vec![0.0]).is_ok());
    // Complementarity violated: inactive constraint with a positive multiplier.
    assert!(KktPoint::new(&p, vec![0.0], vec![0.5]).is_err());
}

#[test]
fn classification_examples() {
    let f = halfplane_qp();
    let sets = classify_indices(&f.problem, &f.point, KKT_TOL);
    assert_eq!(
        (sets.i1.clone(), sets.i2.clone(), sets.i3.clone()),
        (vec![0], vec![], vec![])
    );

    // An inactive constraint x₁ ≤ 10 joins I3.
    let obj = poly(Polynomial::from_terms(2, &[(1.0, &[2, 0]), (1.0, &[0, 2])]));
    let cons = vec![
        poly(Polynomial::affine(&[-1.0, -1.0], 1.0)),
        poly(Polynomial::affine(&[1.0, 0.0], -10.0)),
    ];
    let p = NlpProblem::new(2, 0, obj, cons).unwrap();
    let pt = KktPoint::new(&p, vec![0.5, 0.5], vec![1.0, 0.0]).unwrap();
    let sets = classify_indices(&p, &pt, KKT_TOL);
    assert_eq!((sets.i1, sets.i3), (vec![0], vec![1]));

    // Active with zero multiplier: x ≥ 0 at the unconstrained minimum 0.
    let obj = poly(Polynomial::from_terms(1, &[(1.0, &[2])]));
    let p = NlpProblem::new(1, 0, obj, vec![poly(Polynomial::affine(&[-1.0], 0.0))]).unwrap();
    let pt = KktPoint::new(&p, vec![0.0], vec![0.0]).unwrap();
    let sets = classify_indices(&p, &pt, KKT_TOL);
    assert_eq!((sets.i2, sets.degenerate), (vec![0], vec![0]));
}

#[test]
fn classification_is_a_stable_partition() {
    let mut instances = random_family(30, 11).unwrap();
    instances.extend([halfplane_qp(), duplicated_constraint(), indefinite_hessian()]);
    for inst in &instances {
        let a = classify_indices(&inst.problem, &inst.point, KKT_TOL);
        let mut all: Vec<usize> = a.i1.iter().chain(&a.i2).chain(&a.i3).cloned().collect();
        all.sort();
        assert_eq!(all, (0..inst.problem.m()).collect::<Vec<_>>());
        assert!((0..inst.problem.s()).all(|i| a.i1.contains(&i)));
        let b = classify_indices(&inst.problem, &inst.point, KKT_TOL / 2.0);
        assert_eq!(a, b, "{}", inst.label);
    }
}

#[test]
fn strict_mfcq_examples() {
    let (sets, cone) = data(&halfplane_qp());
    assert!(strict_mfcq_check(&cone, &sets).unwrap());
    let (sets, cone) = data(&duplicated_constraint());
    assert!(!strict_mfcq_check(&cone, &sets).unwrap());
    let (sets, cone) = data(&indefinite_hessian());
    assert!(strict_mfcq_check(&cone, &sets).unwrap());
    // The literal variant lets the inactive multipliers move: ±1 gradients cancel.
    assert!(!strict_mfcq_literal(&cone, &sets).unwrap());
}

#[test]
fn sosc_examples() {
    let (_, cone) = data(&halfplane_qp());
    assert!((sosc_sigma(&cone).unwrap() - 2.0).abs() < 1e-9);

    // min x s.t. −x ≤ 0: K = {0}.
    let p = NlpProblem::new(
        1,
        0,
        poly(Polynomial::affine(&[1.0], 0.0)),
        vec![poly(Polynomial::affine(&[-1.0], 0.0))],
    )
    .unwrap();
    let pt = KktPoint::new(&p, vec![0.0], vec![1.0]).unwrap();
    let sets = classify_indices(&p, &pt, KKT_TOL);
    let cone = CriticalConeData::new(&p, &pt, &sets).unwrap();
    assert_eq!(sosc_sigma(&cone).unwrap(), f64::INFINITY);

    let (_, cone) = data(&indefinite_hessian());
    assert!((sosc_sigma(&cone).unwrap() + 2.0).abs() < 1e-9);
}

#[test]
fn critical_cone_is_built_as_stated() {
    let (_, cone) = data(&halfplane_qp());
    assert_eq!(cone.b1.row(0), &[-1.0, -1.0]);
    assert_eq!(cone.b2.rows(), 0);
    assert!(cone.k.contains(&[1.0, -1.0], 1e-12));
    assert!(!cone.k.contains(&[1.0, 0.0], 1e-12));
    let direct = radius_variational(
        &cone.a_hess,
        &PolyhedralCone::new(cone.b2.clone(), cone.b1.clone()).unwrap(),
    )
    .unwrap();
    assert_eq!(direct.sigma, sosc_sigma(&cone).unwrap());
}

#[test]
fn linearized_kkt_matches_finite_differences() {
    let mut instances = random_family(20, 5).unwrap();
    instances.extend([halfplane_qp(), duplicated_constraint(), indefinite_hessian()]);
    for inst in &instances {
        let (h, _) = linearized_kkt(&inst.problem, &inst.point);
        let ge = inst.problem.kkt_ge(None).unwrap();
        let z = [inst.point.x.as_slice(), inst.point.y.as_slice()].concat();
        let fd = ge.smooth.fd_jacobian(&z);
        assert!(h.m.sub(&fd).max_abs() < 1e-4, "{}", inst.label);
        assert!(h.eval(&z).iter().zip(ge.eval(&z)).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}

#[test]
fn linearized_kkt_blocks() {
    let f = halfplane_qp();
    let (h, c) = linearized_kkt(&f.problem, &f.point);
    let expect = DenseMatrix::from_rows(&[vec![2.0, 0.0, -1.0], vec![0.0, 2.0, -1.0], vec![1.0, 1.0, 0.0]], 3).unwrap();
    assert!(h.m.sub(&expect).max_abs() < 1e-12);
    assert!(matches!(c, SetPart::KktCone { s: 2, m: 3 }));

    // Unconstrained: only the Hessian.
    let obj = poly(Polynomial::from_terms(
        2,
        &[(1.0, &[2, 0]), (2.0, &[1, 1]), (5.0, &[0, 2])],
    ));
    let p = NlpProblem::new(2, 0, obj, vec![]).unwrap();
    let pt = KktPoint::new(&p, vec![0.0, 0.0], vec![]).unwrap();
    let (h, _) = linearized_kkt(&p, &pt);
    assert!(
        h.m.sub(&DenseMatrix::from_rows(&[vec![2.0, 2.0], vec![2.0, 10.0]], 2).unwrap())
            .max_abs()
            < 1e-12
    );

    // Inactive constraints: the constant term is −g > 0 on them.
    let f = indefinite_hessian();
    let (h, _) = linearized_kkt(&f.problem, &f.point);
    assert_eq!(h.eval(&[0.0, 0.0, 0.0]), vec![0.0, 1.0, 1.0]);
}

#[test]
fn homogeneous_vi_examples() {
    let (sets, cone) = data(&halfplane_qp());
    assert!(homogeneous_vi_unique_zero(&cone, &sets).unwrap());
    let (sets, cone) = data(&duplicated_constraint());
    assert!(!homogeneous_vi_unique_zero(&cone, &sets).unwrap());

    // A = 0, B = 0.
    let obj = poly(Polynomial::affine(&[0.0, 0.0], 0.0));
    let p = NlpProblem::new(2, 0, obj, vec![]).unwrap();
    let pt = KktPoint::new(&p, vec![0.0, 0.0], vec![]).unwrap();
    let sets = classify_indices(&p, &pt, KKT_TOL);
    let cone = CriticalConeData::new(&p, &pt, &sets).unwrap();
    assert!(!homogeneous_vi_unique_zero(&cone, &sets).unwrap());

    // Weakly active constraint: min x² s.t. −x ≤ 0 at 0.
    let obj = poly(Polynomial::from_terms(1, &[(1.0, &[2])]));
    let p = NlpProblem::new(1, 0, obj, vec![poly(Polynomial::affine(&[-1.0], 0.0))]).unwrap();
    let pt = KktPoint::new(&p, vec![0.0], vec![0.0]).unwrap();
    let sets = classify_indices(&p, &pt, KKT_TOL);
    let cone = CriticalConeData::new(&p, &pt, &sets).unwrap();
    assert!(homogeneous_vi_unique_zero(&cone, &sets).unwrap());
}

#[test]
fn equivalence_on_fixtures() {
    let r = nlp_equivalence(&halfplane_qp().problem, &halfplane_qp().point).unwrap();
    assert!(r.smf && r.sosc && r.subreg && r.consistent);
    assert_eq!(r.local_min_witness, Some(true));
    assert_eq!(r.linearization_isolated, Some(true));

    let d = duplicated_constraint();
    let r = nlp_equivalence(&d.problem, &d.point).unwrap();
    assert!(!r.smf && r.sosc && !r.subreg && r.consistent);
    assert_eq!(r.linearization_isolated, Some(false));

    let i = indefinite_hessian();
    let r = nlp_equivalence(&i.problem, &i.point).unwrap();
    assert!(r.smf && !r.sosc && r.subreg && r.consistent);
    assert!(r.smf_variants_differ);
    assert_eq!(r.local_min_witness, None);
}

#[test]
fn random_family_equivalence() {
    let family = random_family(70, 2024).unwrap();
    let check = FamilyCheck::run(&family).unwrap();
    assert_eq!(check.total, 70);
    assert!(
        check.checked >= 50,
        "checked {} skipped {}",
        check.checked,
        check.skipped
    );
    assert!(check.mismatches.is_empty(), "{:?}", check.mismatches);
    assert!(check.smf_failures > 0 && check.unique_zero > 0);
    for r in &check.reports {
        assert!(r.consistent);
        if r.sigma.abs() >= 1e-7 {
            assert_eq!(r.linearization_isolated, Some(r.subreg));
        }
    }
}

#[test]
fn kkt_ge_reference_and_solve() {
    let f = halfplane_qp();
    let ge = f.problem.kkt_ge(Some((&f.point.x, &f.point.y))).unwrap();
    let rep = crate::solvers::josephy_newton(&ge, &[0.4, 0.7, 0.5], &Default::default()).unwrap();
    assert!(rep.converged());
    let z = rep.last();
    assert!((z[0] - 0.5).abs() < 1e-10 && (z[2] - 1.0).abs() < 1e-10);
}
