use super::*;
use crate::functions::Polynomial;
use crate::solvers::{semismooth_newton, NewtonConfig};

const SWEEP: [usize; 6] = [8, 16, 32, 64, 128, 256];

/// φ = (y² + u²)/2, g = u, U = R.
fn plain_lq() -> ControlProblem {
    let phi = Polynomial::from_terms(2, &[(0.5, &[2, 0]), (0.5, &[0, 2])]);
    let g = Polynomial::from_terms(2, &[(1.0, &[0, 1])]);
    ControlProblem::from_polynomials(1, 1, phi, vec![g], BoxSet::free(1)).unwrap()
}

/// Discrete Riccati sweep for the unconstrained tracking problem: `pⁱ = Pᵢ yⁱ + qᵢ`.
fn riccati(n_steps: usize) -> DiscreteTriple {
    let h = 1.0 / n_steps as f64;
    let (mut big_p, mut q) = (vec![0.0; n_steps + 1], vec![0.0; n_steps + 1]);
    for i in (0..n_steps).rev() {
        let d = 1.0 + h * big_p[i + 1];
        big_p[i] = (big_p[i + 1] + h) / d;
        q[i] = (q[i + 1] - h) / d;
    }
    let mut tri = DiscreteTriple::zeros(n_steps, 1, 1);
    for i in 0..n_steps {
        tri.p[i][0] = big_p[i] * tri.y[i][0] + q[i];
        tri.u[i][0] = -tri.p[i][0];
        tri.y[i + 1][0] = tri.y[i][0] + h * tri.u[i][0];
    }
    tri
}

/// Largest violation of the discrete optimality system, checked equation by equation.
fn dos_violation(cp: &ControlProblem, tri: &DiscreteTriple) -> f64 {
    let h = tri.step();
    let mut worst: f64 = 0.0;
    for i in 0..tri.n_steps {
        let g = cp.dynamics(&tri.y[i], &tri.u[i]);
        worst = worst.max((tri.y[i + 1][0] - tri.y[i][0] - h * g[0]).abs());
        let (_, hy, _) = hamiltonian_grads(cp, &tri.y[i], &tri.u[i], &tri.p[i + 1]).unwrap();
        worst = worst.max((tri.p[i][0] - tri.p[i + 1][0] - h * hy[0]).abs());
        let (_, _, hu) = hamiltonian_grads(cp, &tri.y[i], &tri.u[i], &tri.p[i]).unwrap();
        let z = (tri.u[i][0] - hu[0]).clamp(cp.u_box().lower[0], cp.u_box().upper[0]);
        worst = worst.max((tri.u[i][0] - z).abs());
    }
    worst
}

#[test]
fn hamiltonian_examples() {
    let cp = plain_lq();
    let (h, hy, hu) = hamiltonian_grads(&cp, &[0.3], &[-0.2], &[0.7]).unwrap();
    assert!((h - (0.5 * (0.09 + 0.04) + 0.7 * -0.2)).abs() < 1e-15);
    assert!((hu[0] - (-0.2 + 0.7)).abs() < 1e-15);
    assert!((hy[0] - 0.3).abs() < 1e-15);
    let (h, _, _) = hamiltonian_grads(&cp, &[0.3], &[-0.2], &[0.0]).unwrap();
    assert!((h - 0.065).abs() < 1e-15);
    let (_, hy, _) = hamiltonian_grads(&cp, &[1.5], &[0.0], &[0.0]).unwrap();
    assert!((hy[0] - 1.5).abs() < 1e-15);
    assert!(hamiltonian_grads(&cp, &[0.0, 1.0], &[0.0], &[0.0]).is_err());
}

#[test]
fn problem_validation() {
    let phi = ScalarFunction::new(2, |z| z[0] * z[0]).with_gradient(|z| vec![z[0], 0.0]);
    let g = ScalarFunction::from_polynomial(Polynomial::from_terms(2, &[(1.0, &[0, 1])]));
    assert!(matches!(
        ControlProblem::new(1, 1, phi, vec![g.clone()], BoxSet::free(1)),
        Err(Error::CrossCheck(_))
    ));
    let phi = ScalarFunction::from_polynomial(Polynomial::from_terms(2, &[(1.0, &[2, 0])]));
    assert!(ControlProblem::new(1, 1, phi.clone(), vec![g.clone(), g.clone()], BoxSet::free(1)).is_err());
    assert!(ControlProblem::new(1, 1, phi, vec![g], BoxSet::free(2)).is_err());
}

#[test]
fn discrete_system_dimensions() {
    let ge = build_discrete_system(&clipped_tracking(), 2).unwrap();
    assert_eq!(ge.dim(), 6);
    assert!(build_discrete_system(&clipped_tracking(), 1).is_err());
    assert!(solve_discrete_os(&clipped_tracking(), 1, None).is_err());
}

#[test]
fn zero_problem_has_zero_solution() {
    let phi = Polynomial::from_terms(2, &[]);
    let g = Polynomial::from_terms(2, &[]);
    let cp = ControlProblem::from_polynomials(1, 1, phi, vec![g], BoxSet::new(vec![-1.0], vec![1.0]).unwrap()).unwrap();
    let ge = build_discrete_system(&cp, 4).unwrap();
    let z0 = vec![0.0; ge.dim()];
    assert!(ge.natural_map(&z0).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn clipped_tracking_coarse_solve_from_zero() {
    let s = solve_discrete_os(&clipped_tracking(), 8, None).unwrap();
    assert!(s.iterations <= 15, "{} iterations", s.iterations);
    assert!(s.residual <= NATURAL_TOL);
    assert!(dos_violation(&clipped_tracking(), &s.triple) < 1e-11);
    // The bound is active at the start.
    assert_eq!(s.triple.u[0][0], 0.6);
    assert!(s.triple.u[7][0] < 0.6);
}

#[test]
fn banded_and_generic_solvers_agree() {
    for cp in [clipped_tracking(), lq_unconstrained()] {
        let banded = solve_discrete_os(&cp, 8, None).unwrap().triple;
        let ge = build_discrete_system(&cp, 8).unwrap();
        let rep = semismooth_newton(&ge, &vec![0.0; ge.dim()], &NewtonConfig::default()).unwrap();
        assert!(rep.converged(), "{:?}", rep.status);
        let generic = DiscreteTriple::from_unknowns(8, 1, 1, rep.last()).unwrap();
        let diff = banded
            .to_unknowns()
            .iter()
            .zip(generic.to_unknowns())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }
}

#[test]
fn unknown_vector_round_trip() {
    let s = solve_discrete_os(&clipped_tracking(), 5, None).unwrap().triple;
    let back = DiscreteTriple::from_unknowns(5, 1, 1, &s.to_unknowns()).unwrap();
    assert_eq!(back, s);
    assert!(DiscreteTriple::from_unknowns(5, 1, 1, &[0.0; 3]).is_err());
}

#[test]
fn unconstrained_matches_riccati() {
    for n in [2usize, 16, 64, 257] {
        let s = solve_discrete_os(&lq_unconstrained(), n, None).unwrap().triple;
        let r = riccati(n);
        let diff = s
            .to_unknowns()
            .iter()
            .zip(r.to_unknowns())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "N={n}: {diff}");
    }
}

#[test]
fn two_step_toy_by_substitution() {
    // h = 1/2: y¹ = u⁰/2, y² = y¹ + u¹/2, p¹ = (y¹ − 1)/2, p⁰ = p¹ − 1/2, u = −p.
    // Then u⁰ = 1/2 − p¹ = 1 − y¹/2 and y¹ = u⁰/2 give y¹ = 2/5.
    let s = solve_discrete_os(&lq_unconstrained(), 2, None).unwrap().triple;
    let y1 = s.y[1][0];
    assert!((y1 - 0.4).abs() < 1e-14);
    assert!((s.p[1][0] - (y1 - 1.0) / 2.0).abs() < 1e-14);
    assert!((s.p[0][0] - (s.p[1][0] - 0.5)).abs() < 1e-14);
    assert!((s.u[0][0] + s.p[0][0]).abs() < 1e-14 && (s.u[1][0] + s.p[1][0]).abs() < 1e-14);
    assert!((s.y[2][0] - (y1 + 0.5 * s.u[1][0])).abs() < 1e-14);
    assert_eq!(dos_violation(&lq_unconstrained(), &s) < 1e-14, true);
}

#[test]
fn triple_invariants() {
    let cp = clipped_tracking();
    for n in [8usize, 33, 128] {
        let tri = solve_discrete_os(&cp, n, None).unwrap().triple;
        assert_eq!(tri.y[0], vec![0.0]);
        assert_eq!(tri.p[n], vec![0.0]);
        // Forward re-simulation.
        let h = tri.step();
        let mut y = 0.0;
        for i in 0..n {
            y += h * tri.u[i][0];
            assert!((y - tri.y[i + 1][0]).abs() <= 1e-12);
        }
        for i in 0..n {
            let u = tri.u[i][0];
            assert!((-0.6..=0.6).contains(&u));
            if u.abs() < 0.6 - 1e-9 {
                let (_, _, hu) = hamiltonian_grads(&cp, &tri.y[i], &tri.u[i], &tri.p[i]).unwrap();
                assert!(hu[0].abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn residual_w_behaviour() {
    let cp = clipped_tracking();
    let w: Vec<f64> = SWEEP
        .iter()
        .map(|&n| residual_w_norm(&cp, &solve_discrete_os(&cp, n, None).unwrap().triple, 16).unwrap())
        .collect();
    for k in 1..w.len() {
        let ratio = w[k] / w[k - 1];
        assert!((0.4..=0.6).contains(&ratio), "{w:?}");
    }
    // First order: eight times the steps, one eighth of the residual.
    assert!(w[3] <= 0.13 * w[0], "{w:?}");
    assert!(w[4] < 0.1 * w[0]);

    // Constant (zero) solution.
    let tri = solve_discrete_os(&plain_lq(), 16, None).unwrap().triple;
    assert!(tri.u.iter().all(|u| u[0] == 0.0));
    assert_eq!(residual_w_norm(&plain_lq(), &tri, 16).unwrap(), 0.0);
}

#[test]
fn clipped_tracking_convergence_study() {
    let study = convergence_experiment(&clipped_tracking(), &SWEEP, 4096).unwrap();
    let order = study.fitted_order.unwrap();
    assert!(order >= 0.9, "{study:?}");
    assert!(study.errors.windows(2).all(|w| w[1] < w[0]));
    let scaled: Vec<f64> = study.errors.iter().zip(&SWEEP).map(|(e, &n)| e * n as f64).collect();
    let (lo, hi) = scaled
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo <= 3.0, "{scaled:?}");
    assert!(study.fallback_start.iter().all(|f| !f));
    assert!(study.to_csv().starts_with("N,error,w_norm,iterations\n8,"));
}

#[test]
fn lq_errors_match_closed_form() {
    let study = convergence_experiment(&lq_unconstrained(), &SWEEP, 16384).unwrap();
    for (s, &e) in study.solutions.iter().zip(&study.errors) {
        let exact = x_distance(s, &LqSolution, 16384 / s.n_steps);
        assert!((e - exact).abs() <= 0.05 * exact, "N={}: {e} vs {exact}", s.n_steps);
    }
}

#[test]
fn closed_form_solves_the_optimality_system() {
    let t = 0.37;
    let x = LqSolution;
    let (y, p, u) = (x.y(t)[0], x.p(t)[0], x.u(t)[0]);
    assert!((x.y_dot(t)[0] - u).abs() < 1e-15);
    assert!((x.p_dot(t)[0] - (1.0 - y)).abs() < 1e-14);
    assert!((u + p).abs() < 1e-15);
    assert!(x.y(0.0)[0].abs() < 1e-15 && x.p(1.0)[0].abs() < 1e-15);
}

#[test]
fn study_validation() {
    let cp = clipped_tracking();
    let single = convergence_experiment(&cp, &[8], 64).unwrap();
    assert_eq!((single.fitted_order, single.fitted_c), (None, None));
    assert_eq!(single.errors.len(), 1);
    assert!(convergence_experiment(&cp, &[], 64).is_err());
    assert!(convergence_experiment(&cp, &[16, 8], 256).is_err());
    assert!(convergence_experiment(&cp, &[8, 16], 64).is_err());
    assert!(convergence_experiment(&cp, &[8, 12], 1000).is_err());
    assert_eq!(fit_order(&[1, 2], &[1.0, 0.0]), None);
    let (o, c) = fit_order(&[10, 20, 40], &[0.3, 0.15, 0.075]).unwrap();
    assert!((o - 1.0).abs() < 1e-12 && (c - 3.0).abs() < 1e-9);
}
