use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geq::GeneralizedEquation;
use crate::numerics::vector::{dist2, norm2};

use super::{josephy_newton, NewtonConfig};

const ORDER_WINDOW: (f64, f64) = (1e-15, 1e-2);
const MAX_PAIRS: usize = 4;

/// Least-squares slope of `log e_{k+1}` against `log e_k`.
///
/// Uses the last run of errors inside (1e-15, 1e-2), cut at the first non-decrease,
/// and at most its last four pairs. Needs at least two pairs.
pub fn convergence_order_estimate(errors: &[f64]) -> Option<f64> {
    let inside = |e: f64| e > ORDER_WINDOW.0 && e < ORDER_WINDOW.1;
    let end = errors.iter().rposition(|&e| inside(e))?;
    let mut start = end;
    while start > 0 && inside(errors[start - 1]) {
        start -= 1;
    }
    let mut run = vec![errors[start]];
    for &e in &errors[start + 1..=end] {
        if e >= *run.last().unwrap() {
            break;
        }
        run.push(e);
    }
    if run.len() < 3 {
        return None;
    }
    let pairs: Vec<(f64, f64)> = run.windows(2).map(|w| (w[0].ln(), w[1].ln())).collect();
    let pairs = &pairs[pairs.len().saturating_sub(MAX_PAIRS)..];
    let k = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Finite-run superlinearity proxy: the last three ratios `e_{k+1}/e_k` (over errors above
/// 1e-15) are strictly decreasing and the final ratio is below 1e-2.
pub fn superlinear_witness(errors: &[f64]) -> bool {
    let len = errors
        .iter()
        .position(|&e| !(e > ORDER_WINDOW.0))
        .unwrap_or(errors.len());
    let ratios: Vec<f64> = errors[..len].windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.len() < 3 {
        return false;
    }
    let t = &ratios[ratios.len() - 3..];
    t[0] > t[1] && t[1] > t[2] && t[2] < 1e-2
}

/// The last ratio `e_{k+1}/e_k` over the leading errors above 1e-15.
pub fn final_error_ratio(errors: &[f64]) -> Option<f64> {
    let len = errors
        .iter()
        .position(|&e| !(e > ORDER_WINDOW.0))
        .unwrap_or(errors.len());
    (len >= 2).then(|| errors[len - 1] / errors[len - 2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedCheck {
    /// Max over solved samples of `sup_{k≥1} ‖x_k − x̄‖ − (γ‖u − x̄‖ + λ‖p‖)`.
    pub worst_violation: f64,
    /// Per-sample margins; `None` for skipped samples.
    pub margins: Vec<Option<f64>>,
    /// Indices of samples whose solve failed.
    pub flagged: Vec<usize>,
}

/// Checks `sup_k ‖x_k − x̄‖ ≤ γ‖u − x̄‖ + λ‖p‖` along Josephy–Newton sequences started at u
/// with right-hand side perturbation p.
pub fn perturbed_sequence_check(
    ge: &GeneralizedEquation,
    samples: &[(Vec<f64>, Vec<f64>)],
    gamma: f64,
    lambda: f64,
) -> Result<PerturbedCheck> {
    let xbar = ge
        .reference_point
        .as_ref()
        .ok_or_else(|| Error::Hypothesis("perturbed sequence check needs x̄".into()))?;
    if !(gamma > 0.0 && gamma < 1.0) || !(lambda >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need γ in (0,1) and λ ≥ 0, got {gamma}, {lambda}"
        )));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut margins = Vec::with_capacity(samples.len());
    let mut flagged = Vec::new();
    for (i, (p, u)) in samples.iter().enumerate() {
        let cfg = NewtonConfig {
            perturbation_p: Some(p.clone()),
            ..NewtonConfig::default()
        };
        match josephy_newton(ge, u, &cfg) {
            Ok(rep) if rep.converged() => {
                let tail = if rep.steps() == 0 {
                    &rep.iterates[..]
                } else {
                    &rep.iterates[1..]
                };
                let sup = tail.iter().map(|x| dist2(x, xbar)).fold(0.0, f64::max);
                let margin = sup - (gamma * dist2(u, xbar) + lambda * norm2(p));
                worst = worst.max(margin);
                margins.push(Some(margin));
            }
            Ok(_) | Err(_) => {
                flagged.push(i);
                margins.push(None);
            }
        }
    }
    Ok(PerturbedCheck {
        worst_violation: worst,
        margins,
        flagged,
    })
}
