//! One function per subcommand; each parses its problem file and returns an [`Outcome`].

use serde_json::{json, Value};
use subreg_core::demos::{run_demo, DemoName};
use subreg_core::geq::GeneralizedEquation;
use subreg_core::nlp::{classify_indices, nlp_equivalence, CriticalConeData, KktPoint, KKT_TOL};
use subreg_core::numerics::DenseMatrix;
use subreg_core::ocp::convergence_experiment;
use subreg_core::polyhedral::critical_cone;
use subreg_core::regularity::{
    displacement_rate_sample_with, frechet_coderivative_inner_norm, graphical_derivative_outer_norm, linear_map_moduli,
    nonlocal_slope_estimate, polyhedral_isolated_point_test, q_subreg_estimate, radius_linear, radius_variational,
    AffineMap, Norm, DEFAULT_SAMPLES,
};
use subreg_core::rng::{seeded, uniform_box};
use subreg_core::solvers::{broyden_inexact_newton, josephy_newton, semismooth_newton, NewtonConfig, SolveStatus};
use subreg_core::Error;

use crate::problem::{GeqSpec, ProblemFile};
use crate::report::{CliError, Outcome, EXIT_OK, EXIT_STALLED, EXIT_SUBPROBLEM};
use crate::{DemoArgs, KktArgs, Method, OcpArgs, RegularityArgs, Routine, SolveArgs};

/// Half-width of the seeded box around x̄ used when no start is given.
const START_SPREAD: f64 = 0.1;
const SYMMETRY_TOL: f64 = 1e-12;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn wrong_kind(command: &str, want: &str, got: &ProblemFile) -> CliError {
    CliError::Input(format!("{command} needs a {want} problem, got {}", got.kind()))
}

fn geq_spec(command: &str, text: &str) -> Result<GeqSpec, CliError> {
    match ProblemFile::parse(text)? {
        ProblemFile::Geq(spec) => Ok(spec),
        other => Err(wrong_kind(command, "geq", &other)),
    }
}

fn reference(ge: &GeneralizedEquation) -> Result<Vec<f64>, CliError> {
    ge.reference_point
        .clone()
        .ok_or_else(|| CliError::Input("this routine needs reference_point".into()))
}

pub fn solve(text: &str, a: &SolveArgs, seed: u64) -> Result<Outcome, CliError> {
    let spec = geq_spec("solve", text)?;
    let ge = spec.build()?;
    let x0 = match (&a.x0, &spec.start, &ge.reference_point) {
        (Some(x), _, _) | (None, Some(x), _) => x.clone(),
        (None, None, Some(xbar)) => {
            let shift = uniform_box(&mut seeded(seed), xbar.len(), START_SPREAD);
            xbar.iter().zip(shift).map(|(x, s)| x + s).collect()
        }
        (None, None, None) => return Err("no start: pass --x0 or give start/reference_point".into()),
    };
    if x0.len() != ge.dim() {
        return Err(CliError::Input(format!(
            "start has length {}, problem has dimension {}",
            x0.len(),
            ge.dim()
        )));
    }
    let cfg = NewtonConfig {
        max_iter: a.max_iter,
        ..NewtonConfig::default()
    };
    let rep = match a.method {
        Method::Josephy => josephy_newton(&ge, &x0, &cfg)?,
        Method::Semismooth => semismooth_newton(&ge, &x0, &cfg)?,
        Method::Broyden => {
            let n = ge.dim();
            broyden_inexact_newton(&ge, &x0, &ge.jacobian(&x0), &move |_, _| vec![0.0; n], &cfg)?
        }
    };
    let exit_code = match rep.status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::Stalled | SolveStatus::BudgetExhausted => EXIT_STALLED,
        SolveStatus::SubproblemFailed => EXIT_SUBPROBLEM,
    };
    let mut diagnostics = Vec::new();
    if let Some(d) = &rep.diagnostic {
        diagnostics.push(d.clone());
    }
    Ok(Outcome {
        results: json!({
            "x0": x0,
            "solution": rep.last(),
            "steps": rep.steps(),
            "report": to_value(&rep),
        }),
        diagnostics,
        exit_code,
        csv: a.csv.as_ref().map(|p| (p.display().to_string(), rep.to_csv())),
    })
}

fn parse_norm(s: &str) -> Result<Norm, CliError> {
    match s.trim() {
        "l2" => Ok(Norm::L2),
        "linf" => Ok(Norm::Linf),
        other => Err(CliError::Input(format!("unknown norm {other:?} (use l2 or linf)"))),
    }
}

fn linearize(ge: &GeneralizedEquation, xbar: &[f64]) -> AffineMap {
    AffineMap::linearization(ge.jacobian(xbar), &ge.eval(xbar), xbar)
}

pub fn regularity(text: &str, a: &RegularityArgs, seed: u64) -> Result<Outcome, CliError> {
    if let Routine::Radius = a.routine {
        return radius(text);
    }
    let ge = geq_spec("regularity", text)?.build()?;
    let results = match a.routine {
        Routine::Rate => to_value(&displacement_rate_sample_with(&ge, &a.radii, DEFAULT_SAMPLES, seed)?),
        Routine::Qrate => to_value(&q_subreg_estimate(&ge, a.q, &a.radii)?),
        Routine::Linear => {
            let (dom, cod) = a.norms.split_once(',').ok_or("--norms expects two norms, e.g. l2,l2")?;
            let jac = ge.jacobian(&reference(&ge)?);
            to_value(&linear_map_moduli(&jac, parse_norm(dom)?, parse_norm(cod)?)?)
        }
        Routine::Polyhedral => {
            let xbar = reference(&ge)?;
            let h = linearize(&ge, &xbar);
            let y = &ge.reference_value;
            let isolated = polyhedral_isolated_point_test(&h, &ge.set_part, &xbar, y)?;
            let outer = graphical_derivative_outer_norm(&h, &ge.set_part, &xbar, y)?;
            let coder = frechet_coderivative_inner_norm(&h, &ge.set_part, &xbar, y)?;
            json!({
                "isolated": isolated,
                "graphical_outer_norm": real(outer),
                "frechet_coderiv_inner_norm": real(coder),
            })
        }
        Routine::Slope => to_value(&nonlocal_slope_estimate(&ge, 1.0, 3)?),
        Routine::Radius => unreachable!("handled above"),
    };
    Ok(Outcome::ok(results))
}

/// Finite reals as numbers, infinities as the strings used throughout the reports.
fn real(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn is_symmetric(a: &DenseMatrix) -> bool {
    a.is_square() && a.sub(&a.transpose()).max_abs() <= SYMMETRY_TOL * (1.0 + a.max_abs())
}

pub fn radius(text: &str) -> Result<Outcome, CliError> {
    match ProblemFile::parse(text)? {
        ProblemFile::Geq(spec) => {
            let ge = spec.build()?;
            let xbar = reference(&ge)?;
            let jac = ge.jacobian(&xbar);
            let domain = ge
                .set_part
                .normal_cone_domain(ge.dim())
                .ok_or(Error::Unsupported("radius (needs a normal-cone set part)"))?;
            let fx = ge.eval(&xbar);
            let v: Vec<f64> = ge.reference_value.iter().zip(&fx).map(|(y, f)| y - f).collect();
            let k = critical_cone(&domain, &xbar, &v)?;
            let linear = radius_linear(&jac)?;
            let mut diagnostics = Vec::new();
            let variational = if is_symmetric(&jac) {
                Some(radius_variational(&jac, &k)?)
            } else {
                diagnostics.push("Jacobian is not symmetric; only the linear radius is reported".into());
                None
            };
            if let Some(w) = variational.as_ref().and_then(|r| r.warning.clone()) {
                diagnostics.push(w);
            }
            Ok(Outcome {
                results: json!({
                    "sigma": variational.as_ref().map(|r| r.sigma),
                    "worst_b": variational.as_ref().map(|r| to_value(&r.worst_b)),
                    "variational": variational.as_ref().map(to_value),
                    "linear": to_value(&linear),
                }),
                diagnostics,
                exit_code: EXIT_OK,
                csv: None,
            })
        }
        ProblemFile::Nlp(spec) => {
            let (prob, pt) = spec.build()?;
            let pt = pt.ok_or("radius of an NLP needs its KKT point")?;
            let sets = classify_indices(&prob, &pt, KKT_TOL);
            let cone = CriticalConeData::new(&prob, &pt, &sets)?;
            let r = radius_variational(&cone.a_hess, &cone.k)?;
            let diagnostics = r.warning.clone().into_iter().collect();
            Ok(Outcome {
                results: json!({
                    "sigma": r.sigma,
                    "worst_b": to_value(&r.worst_b),
                    "variational": to_value(&r),
                }),
                diagnostics,
                exit_code: EXIT_OK,
                csv: None,
            })
        }
        other => Err(wrong_kind("radius", "geq or nlp", &other)),
    }
}

pub fn kkt(text: &str, a: &KktArgs) -> Result<Outcome, CliError> {
    let spec = match ProblemFile::parse(text)? {
        ProblemFile::Nlp(spec) => spec,
        other => return Err(wrong_kind("kkt", "nlp", &other)),
    };
    let (prob, from_file) = spec.build()?;
    let pt = match (&a.x, &a.y) {
        (Some(x), Some(y)) => KktPoint::new(&prob, x.clone(), y.clone())?,
        (None, None) => from_file.ok_or("no KKT point: pass --x and --y or give point in the file")?,
        _ => return Err("--x and --y must be given together".into()),
    };
    let rep = nlp_equivalence(&prob, &pt)?;
    let mut diagnostics = Vec::new();
    if !rep.consistent {
        diagnostics.push("verdicts are inconsistent with the equivalence".into());
    }
    if rep.smf_variants_differ {
        diagnostics.push("strict MFCQ differs between the y_I3 = 0 and literal variants".into());
    }
    Ok(Outcome {
        results: json!({ "x": pt.x, "y": pt.y, "report": to_value(&rep) }),
        diagnostics,
        exit_code: EXIT_OK,
        csv: None,
    })
}

pub fn ocp(text: &str, a: &OcpArgs) -> Result<Outcome, CliError> {
    let spec = match ProblemFile::parse(text)? {
        ProblemFile::Ocp(spec) => spec,
        other => return Err(wrong_kind("ocp", "ocp", &other)),
    };
    let cp = spec.build()?;
    let study = convergence_experiment(&cp, &a.ns, a.nref)?;
    let mut diagnostics = Vec::new();
    if study.fitted_order.is_none() {
        diagnostics.push("no order fit (errors not positive)".into());
    }
    for (n, fell_back) in study.n_list.iter().zip(&study.fallback_start) {
        if *fell_back {
            diagnostics.push(format!("N = {n}: warm start failed, restarted from zero"));
        }
    }
    Ok(Outcome {
        results: to_value(&study),
        diagnostics,
        exit_code: EXIT_OK,
        csv: a.csv.as_ref().map(|p| (p.display().to_string(), study.to_csv())),
    })
}

pub fn demo(a: &DemoArgs) -> Result<Outcome, CliError> {
    let name: DemoName = a.name.parse()?;
    let rep = run_demo(name, a.n)?;
    eprint!("{}", rep.to_table());
    let exit_code = if rep.all_pass { EXIT_OK } else { EXIT_STALLED };
    Ok(Outcome {
        results: to_value(&rep),
        diagnostics: Vec::new(),
        exit_code,
        csv: None,
    })
}
