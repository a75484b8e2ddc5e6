use crate::error::{Error, Result};
use crate::geq::{avi_solve, GeneralizedEquation, SetPart, SmoothMap};
use crate::numerics::vector::{all_finite, dist2, norm_inf, sub};
use crate::numerics::{solve_linear, DenseMatrix};

use super::{NewtonConfig, SolveReport, SolveStatus, Subproblem};

/// Outcome of one linearized step.
pub(crate) enum Step {
    Next(Vec<f64>),
    Failed(String),
}

/// Solves `f(x_k) + M(z − x_k) + extra + F(z) ∋ rhs` for z.
pub(crate) fn linearized_step(
    ge: &GeneralizedEquation,
    xk: &[f64],
    fk: &[f64],
    m: &DenseMatrix,
    extra: &[f64],
    rhs: &[f64],
    subproblem: Subproblem,
) -> Result<Step> {
    let n = xk.len();
    match &ge.set_part {
        SetPart::ZeroMap => {
            if ge.smooth.dim_out() != n {
                return Err(Error::Unsupported("Newton step needs a square system"));
            }
            let b: Vec<f64> = (0..n).map(|i| rhs[i] - fk[i] - extra[i]).collect();
            Ok(match solve_linear(m, &b) {
                Ok(d) => Step::Next(xk.iter().zip(d).map(|(x, d)| x + d).collect()),
                Err(e) => Step::Failed(format!("linear step: {e}")),
            })
        }
        SetPart::BoxNormalCone(_) | SetPart::KktCone { .. } => {
            let mx = m.mul_vec(xk);
            let q: Vec<f64> = (0..n).map(|i| fk[i] - mx[i] + extra[i] - rhs[i]).collect();
            match subproblem {
                Subproblem::ExactAvi => match avi_solve(m, &q, &ge.set_part, xk) {
                    Ok(z) => Ok(Step::Next(z)),
                    Err(Error::NoSolution) => Ok(Step::Failed("affine VI has no solution".into())),
                    Err(e) => Err(e),
                },
                Subproblem::InnerSemismooth => {
                    let lin = SmoothMap::affine(m.clone(), q);
                    let sub_ge = GeneralizedEquation::new(lin, ge.set_part.clone(), None)?;
                    let cfg = NewtonConfig {
                        max_iter: 100,
                        residual_tol: 1e-14,
                        ..NewtonConfig::default()
                    };
                    let rep = semismooth_newton(&sub_ge, xk, &cfg)?;
                    Ok(if rep.converged() {
                        Step::Next(rep.last().to_vec())
                    } else {
                        Step::Failed(format!("inner semismooth solve ended {:?}", rep.status))
                    })
                }
            }
        }
        _ => Err(Error::Unsupported("Newton steps need a zero, box or KKT set part")),
    }
}

/// Residual of the step inclusion for (x_k, z).
pub(crate) fn step_inclusion_residual(
    ge: &GeneralizedEquation,
    xk: &[f64],
    fk: &[f64],
    m: &DenseMatrix,
    extra: &[f64],
    rhs: &[f64],
    z: &[f64],
) -> f64 {
    let md = m.mul_vec(&sub(z, xk));
    let target: Vec<f64> = (0..rhs.len()).map(|i| rhs[i] - fk[i] - md[i] - extra[i]).collect();
    ge.set_part.distance_to(z, &target)
}

fn check_start(ge: &GeneralizedEquation, x0: &[f64], cfg: &NewtonConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if x0.len() != ge.dim() {
        return Err(Error::DimensionMismatch(format!(
            "start has length {}, expected {}",
            x0.len(),
            ge.dim()
        )));
    }
    cfg.rhs(&ge.reference_value)
}

/// Josephy–Newton: `f(x_k) + Df(x_k)(x_{k+1} − x_k) + F(x_{k+1}) ∋ ȳ + p`.
pub fn josephy_newton(ge: &GeneralizedEquation, x0: &[f64], cfg: &NewtonConfig) -> Result<SolveReport> {
    let rhs = check_start(ge, x0, cfg)?;
    let reference = ge.reference_point.as_deref();
    let zeros = vec![0.0; ge.smooth.dim_out()];
    let mut report = SolveReport::start(x0.to_vec(), ge.residual_distance_to(x0, &rhs), reference);
    if report.residuals[0] <= cfg.residual_tol {
        return Ok(report.finish(SolveStatus::Converged));
    }
    let mut x = x0.to_vec();
    for _ in 0..cfg.max_iter {
        let fx = ge.eval(&x);
        let jac = ge.jacobian(&x);
        let z = match linearized_step(ge, &x, &fx, &jac, &zeros, &rhs, cfg.subproblem)? {
            Step::Next(z) => z,
            Step::Failed(msg) => {
                report.diagnostic = Some(msg);
                return Ok(report.finish(SolveStatus::SubproblemFailed));
            }
        };
        if !all_finite(&z) {
            report.diagnostic = Some("non-finite iterate".into());
            return Ok(report.finish(SolveStatus::Stalled));
        }
        report
            .step_residuals
            .push(step_inclusion_residual(ge, &x, &fx, &jac, &zeros, &rhs, &z));
        let step = dist2(&z, &x);
        let r = ge.residual_distance_to(&z, &rhs);
        report.push(z.clone(), r, reference);
        x = z;
        if r <= cfg.residual_tol || step <= cfg.step_tol {
            return Ok(report.finish(SolveStatus::Converged));
        }
    }
    Ok(report.finish(SolveStatus::BudgetExhausted))
}

/// Semismooth Newton on the natural map: `A_k d = −Φ(x_k)` with `A_k ∈ ∂_B Φ(x_k)`.
/// Residuals are `‖Φ(x)‖∞`.
pub fn semismooth_newton(ge: &GeneralizedEquation, x0: &[f64], cfg: &NewtonConfig) -> Result<SolveReport> {
    let rhs = check_start(ge, x0, cfg)?;
    let reference = ge.reference_point.as_deref();
    let mut phi = ge.natural_map_shifted(x0, &rhs)?;
    let mut report = SolveReport::start(x0.to_vec(), norm_inf(&phi), reference);
    if report.residuals[0] <= cfg.residual_tol {
        return Ok(report.finish(SolveStatus::Converged));
    }
    let mut x = x0.to_vec();
    for _ in 0..cfg.max_iter {
        let a = ge.b_jacobian_shifted(&x, &rhs)?;
        let minus_phi: Vec<f64> = phi.iter().map(|v| -v).collect();
        let d = match solve_linear(&a, &minus_phi) {
            Ok(d) => d,
            Err(e) => {
                report.diagnostic = Some(format!("singular generalized Jacobian: {e}"));
                return Ok(report.finish(SolveStatus::Stalled));
            }
        };
        let ad = a.mul_vec(&d);
        report
            .step_residuals
            .push(phi.iter().zip(&ad).map(|(p, q)| (p + q).abs()).fold(0.0, f64::max));
        let z: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        if !all_finite(&z) {
            report.diagnostic = Some("non-finite iterate".into());
            return Ok(report.finish(SolveStatus::Stalled));
        }
        phi = ge.natural_map_shifted(&z, &rhs)?;
        let r = norm_inf(&phi);
        let step = crate::numerics::vector::norm2(&d);
        report.push(z.clone(), r, reference);
        x = z;
        if r <= cfg.residual_tol || step <= cfg.step_tol {
            return Ok(report.finish(SolveStatus::Converged));
        }
    }
    Ok(report.finish(SolveStatus::BudgetExhausted))
}
