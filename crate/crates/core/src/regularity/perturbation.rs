use serde::{Deserialize, Serialize};

use super::{graphical_derivative_outer_norm, AffineMap};
use crate::error::{Error, Result};
use crate::geq::{GeneralizedEquation, SetPart, SmoothMap};
use crate::numerics::vector::{dist_inf, norm_inf};
use crate::rng::{seeded, uniform_box};
use crate::solvers::{josephy_newton, NewtonConfig};

/// Bound on the modulus of `g + G` from a modulus κ of G and a calmness constant µ of g:
/// `κ/(1 − κµ)` for q = 1 and `κ/(1 − κ^{1/q} µ)^q` otherwise. Holds when the estimate is
/// within 1% of the bound.
pub fn perturbation_bound_check(kappa: f64, mu: f64, estimated_sum_modulus: f64, q: f64) -> Result<(f64, bool)> {
    if !(kappa > 0.0 && mu >= 0.0 && q > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need κ > 0, µ ≥ 0, q > 0 (got {kappa}, {mu}, {q})"
        )));
    }
    if kappa * mu.powf(q) >= 1.0 {
        return Err(Error::Hypothesis(format!(
            "κµ^q = {} is not below 1",
            kappa * mu.powf(q)
        )));
    }
    let bound = if q == 1.0 {
        kappa / (1.0 - kappa * mu)
    } else {
        kappa / (1.0 - kappa.powf(1.0 / q) * mu).powf(q)
    };
    Ok((bound, estimated_sum_modulus <= bound * (1.0 + 1e-2)))
}

/// `p ↦ {x : 0 ∈ f(p, x) + F(x)}` with f defined on R^{dim_p} × Rⁿ (parameters first).
#[derive(Debug, Clone)]
pub struct ParametricGe {
    pub f: SmoothMap,
    pub dim_p: usize,
    pub set_part: SetPart,
}

impl ParametricGe {
    pub fn dim_x(&self) -> usize {
        self.f.dim_in() - self.dim_p
    }

    /// The generalized equation in x at a fixed parameter.
    pub fn at(&self, p: &[f64]) -> Result<GeneralizedEquation> {
        let (f, fj, dp, n) = (self.f.clone(), self.f.clone(), self.dim_p, self.dim_x());
        let (p1, pp) = (p.to_vec(), p.to_vec());
        let smooth = SmoothMap::new(n, self.f.dim_out(), move |x| f.eval(&[p1.as_slice(), x].concat())).with_jacobian(
            move |x| {
                let j = fj.jacobian(&[pp.as_slice(), x].concat());
                j.select_cols(&(dp..dp + n).collect::<Vec<_>>())
            },
        );
        GeneralizedEquation::new(smooth, self.set_part.clone(), None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalmnessCheck {
    pub clm_estimate: f64,
    #[serde(with = "crate::serde_ext::real")]
    pub bound: f64,
    pub holds: bool,
    #[serde(with = "crate::serde_ext::real")]
    pub subreg_modulus: f64,
    pub dp_norm: f64,
    pub flagged: Vec<usize>,
}

/// Samples p with `‖p − p̄‖∞ ≤ 1e-3`, solves by Josephy–Newton from x̄ and compares
/// `max ‖x(p) − x̄‖∞ / ‖p − p̄‖∞` with `subreg(h + F; x̄|0) · ‖D_p f(p̄, x̄)‖∞`, h being the
/// linearization in x. All norms are ℓ∞.
pub fn parametric_calmness_check(
    pge: &ParametricGe,
    pbar: &[f64],
    xbar: &[f64],
    samples: usize,
    seed: u64,
) -> Result<CalmnessCheck> {
    let (dp, n) = (pge.dim_p, pge.dim_x());
    if pbar.len() != dp || xbar.len() != n {
        return Err(Error::DimensionMismatch("parameter or reference point length".into()));
    }
    let z = [pbar, xbar].concat();
    let jac = pge.f.jacobian(&z);
    let jx = jac.select_cols(&(dp..dp + n).collect::<Vec<_>>());
    let jp = jac.select_cols(&(0..dp).collect::<Vec<_>>());
    let h = AffineMap::linearization(jx, &pge.f.eval(&z), xbar);
    let zero = vec![0.0; pge.f.dim_out()];
    let modulus = graphical_derivative_outer_norm(&h, &pge.set_part, xbar, &zero)?;
    let dp_norm = jp.norm_inf();
    let bound = if dp_norm == 0.0 { 0.0 } else { modulus * dp_norm };

    let mut rng = seeded(seed);
    let mut clm: f64 = 0.0;
    let mut flagged = Vec::new();
    for i in 0..samples {
        let delta = uniform_box(&mut rng, dp, 1e-3);
        if norm_inf(&delta) == 0.0 {
            continue;
        }
        let p: Vec<f64> = pbar.iter().zip(&delta).map(|(a, b)| a + b).collect();
        let ge = pge.at(&p)?;
        match josephy_newton(&ge, xbar, &NewtonConfig::default()) {
            Ok(rep) if rep.converged() => {
                clm = clm.max(dist_inf(rep.last(), xbar) / norm_inf(&delta));
            }
            _ => flagged.push(i),
        }
    }
    let holds = clm <= bound * (1.0 + 5e-2);
    Ok(CalmnessCheck {
        clm_estimate: clm,
        bound,
        holds,
        subreg_modulus: modulus,
        dp_norm,
        flagged,
    })
}
