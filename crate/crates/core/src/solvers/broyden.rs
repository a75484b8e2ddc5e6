use crate::error::{Error, Result};
use crate::geq::GeneralizedEquation;
use crate::numerics::vector::{all_finite, dist2, dot, norm2, sub};
use crate::numerics::DenseMatrix;

use super::newton::{linearized_step, step_inclusion_residual, Step};
use super::{NewtonConfig, SolveReport, SolveStatus};

/// `r_k(x)`: the inexactness term of step k.
pub type ResidualSchedule<'a> = dyn Fn(&[f64], usize) -> Vec<f64> + Sync + 'a;

const MIN_UPDATE_STEP: f64 = 1e-14;

/// Inexact quasi-Newton iteration with good Broyden updates:
/// `f(x_k) + B_k(x_{k+1} − x_k) + r_k(x_k) + F(x_{k+1}) ∋ ȳ + p`.
///
/// When x̄ is known the report carries the Dennis–Moré quotients
/// `(‖(Df(x̄) − B_k)Δx‖ + ‖r_k(x_k)‖) / ‖Δx‖`.
pub fn broyden_inexact_newton(
    ge: &GeneralizedEquation,
    x0: &[f64],
    b0: &DenseMatrix,
    residual_schedule: &ResidualSchedule<'_>,
    cfg: &NewtonConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let n = ge.dim();
    if x0.len() != n || b0.rows() != n || b0.cols() != n || ge.smooth.dim_out() != n {
        return Err(Error::DimensionMismatch(format!(
            "Broyden needs a square system: x0 {}, B0 {}x{}, f: R^{} -> R^{}",
            x0.len(),
            b0.rows(),
            b0.cols(),
            n,
            ge.smooth.dim_out()
        )));
    }
    let rhs = cfg.rhs(&ge.reference_value)?;
    let reference = ge.reference_point.as_deref();
    let jac_ref = reference.map(|r| ge.jacobian(r));
    let mut report = SolveReport::start(x0.to_vec(), ge.residual_distance_to(x0, &rhs), reference);
    report.dennis_more_trace = jac_ref.as_ref().map(|_| Vec::new());
    if report.residuals[0] <= cfg.residual_tol {
        return Ok(report.finish(SolveStatus::Converged));
    }
    let mut b = b0.clone();
    let mut x = x0.to_vec();
    let mut fx = ge.eval(&x);
    for k in 0..cfg.max_iter {
        let rk = residual_schedule(&x, k);
        if rk.len() != n {
            return Err(Error::DimensionMismatch("residual schedule output".into()));
        }
        let z = match linearized_step(ge, &x, &fx, &b, &rk, &rhs, cfg.subproblem)? {
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
            .push(step_inclusion_residual(ge, &x, &fx, &b, &rk, &rhs, &z));
        let dx = sub(&z, &x);
        let step = norm2(&dx);
        if let (Some(trace), Some(jr)) = (report.dennis_more_trace.as_mut(), jac_ref.as_ref()) {
            let gap = jr.sub(&b).mul_vec(&dx);
            trace.push(if step > 0.0 {
                (norm2(&gap) + norm2(&rk)) / step
            } else {
                f64::INFINITY
            });
        }
        let fz = ge.eval(&z);
        if step < MIN_UPDATE_STEP {
            report.skipped_updates.push(k);
        } else {
            let bdx = b.mul_vec(&dx);
            let y: Vec<f64> = (0..n).map(|i| fz[i] - fx[i] - bdx[i]).collect();
            b = b.add(&DenseMatrix::outer(&y, &dx).scale(1.0 / dot(&dx, &dx)));
        }
        let r = ge.residual_distance_to(&z, &rhs);
        report.push(z.clone(), r, reference);
        let moved = dist2(&z, &x);
        x = z;
        fx = fz;
        if r <= cfg.residual_tol || moved <= cfg.step_tol {
            return Ok(report.finish(SolveStatus::Converged));
        }
    }
    Ok(report.finish(SolveStatus::BudgetExhausted))
}
