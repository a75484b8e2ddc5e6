use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{graphical_derivative_outer_norm, polyhedral_isolated_point_test, AffineMap};
use crate::error::{Error, Result};
use crate::geq::SetPart;
use crate::numerics::DenseMatrix;
use crate::rng::seeded;

/// A finite family of derivative approximations (vertex Jacobians) with approximation
/// constant c. The measure of non-compactness of a finite family is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeFamily {
    pub operators: Vec<DenseMatrix>,
    pub approximation_constant_c: f64,
    pub chi_upper_bound: f64,
}

impl DerivativeFamily {
    pub fn new(operators: Vec<DenseMatrix>, approximation_constant_c: f64) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidInput("empty derivative family".into()));
        };
        let shape = (first.rows(), first.cols());
        if operators.iter().any(|a| (a.rows(), a.cols()) != shape) {
            return Err(Error::DimensionMismatch("family members differ in shape".into()));
        }
        if !(approximation_constant_c >= 0.0) {
            return Err(Error::InvalidInput("c must be nonnegative".into()));
        }
        Ok(Self {
            operators,
            approximation_constant_c,
            chi_upper_bound: 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClarkeVerdict {
    pub sufficient: bool,
    #[serde(with = "crate::serde_ext::real")]
    pub modulus_bound: f64,
    /// `"vertex"` or `"vertex+sampled"`: which members of the hull were tested.
    pub label: String,
    pub vertex_isolated: Vec<bool>,
    #[serde(with = "crate::serde_ext::vec_real")]
    pub vertex_outer_norms: Vec<f64>,
    pub sampled_isolated: Vec<bool>,
}

/// Tests `H_A = f(x̄) + A(· − x̄) + F` for isolated solutions at every vertex A and at
/// `hull_samples` seeded convex combinations. The bound is `m / (1 − (c + χ) m)` with m the
/// largest ℓ∞ outer norm found.
pub fn clarke_sufficiency_check(
    family: &DerivativeFamily,
    f_at_xbar: &[f64],
    c: &SetPart,
    xbar: &[f64],
    ybar: &[f64],
    hull_samples: usize,
    seed: u64,
) -> Result<ClarkeVerdict> {
    let h_of = |a: &DenseMatrix| AffineMap::linearization(a.clone(), f_at_xbar, xbar);
    let mut vertex_isolated = Vec::new();
    let mut vertex_outer_norms = Vec::new();
    for a in &family.operators {
        let h = h_of(a);
        vertex_isolated.push(polyhedral_isolated_point_test(&h, c, xbar, ybar)?);
        vertex_outer_norms.push(graphical_derivative_outer_norm(&h, c, xbar, ybar)?);
    }
    let mut rng = seeded(seed);
    let mut sampled_isolated = Vec::new();
    let mut m = vertex_outer_norms.iter().cloned().fold(0.0, f64::max);
    let k = family.operators.len();
    for _ in 0..if k > 1 { hull_samples } else { 0 } {
        let w: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = w.iter().sum();
        let first = &family.operators[0];
        let mut a = DenseMatrix::zeros(first.rows(), first.cols());
        for (op, wi) in family.operators.iter().zip(&w) {
            a = a.add(&op.scale(wi / total));
        }
        let h = h_of(&a);
        sampled_isolated.push(polyhedral_isolated_point_test(&h, c, xbar, ybar)?);
        m = m.max(graphical_derivative_outer_norm(&h, c, xbar, ybar)?);
    }
    let slack = family.approximation_constant_c + family.chi_upper_bound;
    let (contraction_ok, modulus_bound) = if slack > 0.0 {
        if slack * m < 1.0 {
            (true, m / (1.0 - slack * m))
        } else {
            (false, f64::INFINITY)
        }
    } else {
        (true, m)
    };
    let sufficient = contraction_ok && vertex_isolated.iter().all(|&b| b) && sampled_isolated.iter().all(|&b| b);
    let label = if sampled_isolated.is_empty() {
        "vertex"
    } else {
        "vertex+sampled"
    };
    Ok(ClarkeVerdict {
        sufficient,
        modulus_bound,
        label: label.into(),
        vertex_isolated,
        vertex_outer_norms,
        sampled_isolated,
    })
}
