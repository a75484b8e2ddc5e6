//! Strong (q-)subregularity moduli: sampled estimates, exact polyhedral and linear
//! computations, perturbation bounds and radius computations.

mod clarke;
mod graph;
mod linear;
mod perturbation;
mod polyhedral_ge;
mod radius;
mod sampling;
mod slope;

pub use clarke::{clarke_sufficiency_check, ClarkeVerdict, DerivativeFamily};
pub use graph::{GraphPiece, PiecewiseGraph};
pub(crate) use linear::linf_sphere_min;
pub use linear::{coderivative_inner_norm_linear, linear_map_moduli, radius_linear, LinearMapAnalysis, LinearRadius};
pub use perturbation::{parametric_calmness_check, perturbation_bound_check, CalmnessCheck, ParametricGe};
pub use polyhedral_ge::{
    frechet_coderivative_inner_norm, graphical_derivative_outer_norm, linearization_graph,
    polyhedral_isolated_point_test, AffineMap,
};
pub use radius::{radius_variational, VariationalRadius};
pub use sampling::{
    displacement_rate_sample, displacement_rate_sample_with, q_subreg_estimate, sphere_points, DEFAULT_SAMPLES,
};
pub use slope::{nonlocal_slope_estimate, SlopeEstimate};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L2,
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusKind {
    Exact,
    SampledLower,
    SampledUpper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    #[serde(with = "crate::serde_ext::real")]
    pub value: f64,
    pub kind: ModulusKind,
    pub q_exponent: f64,
    pub domain_norm: Norm,
    pub codomain_norm: Norm,
    pub radii_schedule: Vec<f64>,
    /// Per-radius values of the sampled quantity (rate for q = 1 sampling, ratio otherwise).
    #[serde(with = "crate::serde_ext::vec_real")]
    pub per_radius: Vec<f64>,
    /// Steepest displacement rate estimate, when the routine samples it.
    #[serde(with = "crate::serde_ext::opt_real")]
    pub rate: Option<f64>,
}

impl ModulusEstimate {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}
