//! Josephy–Newton, semismooth Newton and Broyden iterations for generalized equations,
//! with convergence diagnostics.

mod broyden;
mod diagnostics;
mod newton;

pub use broyden::{broyden_inexact_newton, ResidualSchedule};
pub use diagnostics::{
    convergence_order_estimate, final_error_ratio, perturbed_sequence_check, superlinear_witness, PerturbedCheck,
};
pub use newton::{josephy_newton, semismooth_newton};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the linearized subproblem of the Josephy–Newton step is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subproblem {
    ExactAvi,
    InnerSemismooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub max_iter: usize,
    pub residual_tol: f64,
    pub step_tol: f64,
    /// Right-hand side perturbation p; `None` means p = 0.
    pub perturbation_p: Option<Vec<f64>>,
    pub subproblem: Subproblem,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_iter: 50,
            residual_tol: 1e-12,
            step_tol: 1e-14,
            perturbation_p: None,
            subproblem: Subproblem::ExactAvi,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if !(self.residual_tol > 0.0 && self.step_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn rhs(&self, reference_value: &[f64]) -> Result<Vec<f64>> {
        match &self.perturbation_p {
            None => Ok(reference_value.to_vec()),
            Some(p) if p.len() == reference_value.len() => {
                Ok(reference_value.iter().zip(p).map(|(a, b)| a + b).collect())
            }
            Some(p) => Err(Error::DimensionMismatch(format!(
                "perturbation has length {}, expected {}",
                p.len(),
                reference_value.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    Stalled,
    BudgetExhausted,
    SubproblemFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterates: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub errors_to_reference: Option<Vec<f64>>,
    pub status: SolveStatus,
    pub order_fit: Option<f64>,
    pub dennis_more_trace: Option<Vec<f64>>,
    /// Residual of the defining step inclusion for each step x_k → x_{k+1}.
    pub step_residuals: Vec<f64>,
    /// Steps whose Broyden update was skipped because ‖Δx‖ < 1e-14.
    pub skipped_updates: Vec<usize>,
    pub diagnostic: Option<String>,
}

impl SolveReport {
    pub(crate) fn start(x0: Vec<f64>, residual: f64, reference: Option<&[f64]>) -> Self {
        let errors = reference.map(|r| vec![crate::numerics::vector::dist2(&x0, r)]);
        Self {
            iterates: vec![x0],
            residuals: vec![residual],
            errors_to_reference: errors,
            status: SolveStatus::BudgetExhausted,
            order_fit: None,
            dennis_more_trace: None,
            step_residuals: Vec::new(),
            skipped_updates: Vec::new(),
            diagnostic: None,
        }
    }

    pub(crate) fn push(&mut self, x: Vec<f64>, residual: f64, reference: Option<&[f64]>) {
        if let (Some(errs), Some(r)) = (self.errors_to_reference.as_mut(), reference) {
            errs.push(crate::numerics::vector::dist2(&x, r));
        }
        self.iterates.push(x);
        self.residuals.push(residual);
    }

    pub(crate) fn finish(mut self, status: SolveStatus) -> Self {
        self.status = status;
        let series = self.errors_to_reference.as_ref().unwrap_or(&self.residuals);
        self.order_fit = convergence_order_estimate(series);
        self
    }

    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("reports hold the starting point")
    }

    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// CSV log with columns `iter,residual,error,dm_quotient`; the quotient on row k
    /// belongs to the step from x_k to x_{k+1}.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,residual,error,dm_quotient\n");
        for k in 0..self.iterates.len() {
            let err = self
                .errors_to_reference
                .as_ref()
                .map(|e| format!("{:e}", e[k]))
                .unwrap_or_default();
            let dm = self
                .dennis_more_trace
                .as_ref()
                .and_then(|t| t.get(k))
                .map(|v| format!("{v:e}"))
                .unwrap_or_default();
            out.push_str(&format!("{k},{:e},{err},{dm}\n", self.residuals[k]));
        }
        out
    }
}
