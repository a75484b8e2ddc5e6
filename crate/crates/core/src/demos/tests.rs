use super::fixtures::*;
use super::*;
use crate::regularity::{perturbation_bound_check, polyhedral_isolated_point_test};
use crate::solvers::{
    broyden_inexact_newton, final_error_ratio, josephy_newton, semismooth_newton, superlinear_witness, NewtonConfig,
};

#[test]
fn every_demo_passes() {
    for name in DemoName::ALL {
        let rep = run_demo(name, None).unwrap();
        assert!(rep.all_pass, "{}", rep.to_table());
    }
}

#[test]
fn diagonal_demo_sizes() {
    for n in [5usize, 10, 50] {
        let rep = run_demo(DemoName::EllInftyDiag, Some(n)).unwrap();
        assert!(rep.all_pass, "{}", rep.to_table());
        assert_eq!(rep.rows[0].computed, n as f64);
    }
    assert!(run_demo(DemoName::EllInftyDiag, Some(0)).is_err());
}

#[test]
fn demo_names_round_trip() {
    for name in DemoName::ALL {
        assert_eq!(name.as_str().parse::<DemoName>().unwrap(), name);
        assert_eq!(serde_json::to_string(&name).unwrap(), format!("\"{name}\""));
    }
    assert!("minus-x".parse::<DemoName>().is_err());
}

#[test]
fn table_lists_each_row() {
    let rep = run_demo(DemoName::CubeRoot, None).unwrap();
    let table = rep.to_table();
    assert_eq!(table.lines().count(), rep.rows.len() + 2);
    assert!(table.contains("+inf") && table.contains("PASS"));
}

#[test]
fn newton_fixtures_are_certified_and_quadratic() {
    for fx in newton_fixtures() {
        let xbar = fx.ge.reference_point.clone().unwrap();
        let h = crate::regularity::AffineMap::linearization(fx.ge.jacobian(&xbar), &fx.ge.eval(&xbar), &xbar);
        let zero = vec![0.0; xbar.len()];
        assert!(
            polyhedral_isolated_point_test(&h, &fx.ge.set_part, &xbar, &zero).unwrap(),
            "{}",
            fx.label
        );
        let rep = josephy_newton(&fx.ge, &fx.start, &NewtonConfig::default()).unwrap();
        assert!(rep.converged(), "{}", fx.label);
        let order = rep.order_fit.unwrap_or(f64::NAN);
        assert!(
            (1.8..=2.2).contains(&order),
            "{}: {order} {:?}",
            fx.label,
            rep.errors_to_reference
        );
    }
}

#[test]
fn box_vi_fixtures_are_superlinear() {
    for fx in box_vi_fixtures() {
        let rep = semismooth_newton(&fx.ge, &fx.start, &NewtonConfig::default()).unwrap();
        assert!(rep.converged(), "{}", fx.label);
        let errs = rep.errors_to_reference.as_ref().unwrap();
        let ratio = final_error_ratio(errs).unwrap();
        assert!(ratio < 1e-2, "{}: {errs:?}", fx.label);
        if fx.label != "ncp" {
            // The NCP identifies its active set in one step, leaving too few ratios.
            assert!(superlinear_witness(errs), "{}: {errs:?}", fx.label);
        }
    }
}

#[test]
fn broyden_on_smooth_fixtures() {
    let mut good = 0;
    for fx in newton_fixtures() {
        let xbar = fx.ge.reference_point.clone().unwrap();
        let start: Vec<f64> = fx.start.iter().zip(&xbar).map(|(s, x)| x + 0.25 * (s - x)).collect();
        let b0 = fx.ge.jacobian(&start);
        let rep = broyden_inexact_newton(
            &fx.ge,
            &start,
            &b0,
            &|x, _| vec![0.0; x.len()],
            &NewtonConfig::default(),
        )
        .unwrap();
        let dm = rep
            .dennis_more_trace
            .as_ref()
            .and_then(|t| t.last().copied())
            .unwrap_or(f64::NAN);
        if rep.converged() && dm < 1e-3 && rep.order_fit.is_some_and(|o| o > 1.2) {
            good += 1;
        }
    }
    assert!(good >= 4, "{good}");
}

#[test]
fn reciprocity_on_known_moduli() {
    for k in known_moduli() {
        let rate = displacement_rate_sample(&k.ge, &RADII).unwrap().rate.unwrap();
        let p = rate * k.modulus;
        assert!((0.9..=1.1).contains(&p), "{}: {p}", k.label);
    }
}

#[test]
fn perturbation_instances_respect_their_bounds() {
    let all = perturbation_instances();
    assert_eq!(all.iter().filter(|i| i.q == 1.0).count(), 20);
    assert_eq!(all.iter().filter(|i| i.q == 2.0).count(), 5);
    for inst in &all {
        assert!(inst.kappa * inst.mu.powf(inst.q) < 1.0, "{}", inst.label);
        let est = if inst.q == 1.0 {
            displacement_rate_sample(&inst.sum, &RADII).unwrap().value
        } else {
            q_subreg_estimate(&inst.sum, inst.q, &RADII).unwrap().value
        };
        let (bound, holds) = perturbation_bound_check(inst.kappa, inst.mu, est, inst.q).unwrap();
        assert!(holds, "{}: {est} > {bound}", inst.label);
        assert!(est.is_finite() && est > 0.0);
    }
}
