use serde::{Deserialize, Serialize};

use super::PiecewiseGraph;
use crate::error::{Error, Result};
use crate::geq::SetPart;
use crate::numerics::vector::{dist_inf, norm_inf, sub};
use crate::numerics::DenseMatrix;
use crate::polyhedral::{critical_cone, tangent_cone};

/// `h(x) = M x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub m: DenseMatrix,
    pub b: Vec<f64>,
}

impl AffineMap {
    pub fn new(m: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        if m.rows() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "affine map: {} rows, offset of length {}",
                m.rows(),
                b.len()
            )));
        }
        Ok(Self { m, b })
    }

    /// `x ↦ f(x̄) + A(x − x̄)`.
    pub fn linearization(a: DenseMatrix, f_at_xbar: &[f64], xbar: &[f64]) -> Self {
        let ax = a.mul_vec(xbar);
        let b = sub(f_at_xbar, &ax);
        Self { m: a, b }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.m.mul_vec(x);
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi += bi;
        }
        y
    }
}

/// The graph of the graphical derivative `DH(x̄|ȳ)` for `H = h + F` with polyhedral structure.
pub fn linearization_graph(h: &AffineMap, c: &SetPart, xbar: &[f64], ybar: &[f64]) -> Result<PiecewiseGraph> {
    let n = h.m.cols();
    if xbar.len() != n || ybar.len() != h.m.rows() {
        return Err(Error::DimensionMismatch("reference pair does not match h".into()));
    }
    let v = sub(ybar, &h.eval(xbar));
    match c {
        SetPart::ZeroMap => {
            if norm_inf(&v) > 1e-8 * (1.0 + norm_inf(ybar)) {
                return Err(Error::NotNormal);
            }
            Ok(PiecewiseGraph::linear(&h.m))
        }
        SetPart::BoxNormalCone(_) | SetPart::KktCone { .. } | SetPart::PolyhedralNormalCone(_) => {
            let domain = c.normal_cone_domain(n).expect("normal-cone variants have a domain");
            let k = critical_cone(&domain, xbar, &v)?;
            PiecewiseGraph::affine_vi(&h.m, &k)
        }
        SetPart::ConstantSet(p) => {
            if !p.contains(&v, 1e-8) {
                return Err(Error::NotNormal);
            }
            Ok(PiecewiseGraph::linear_plus_cone(&h.m, &tangent_cone(p, &v)))
        }
        SetPart::FiniteSelection(maps) => {
            let active: Vec<DenseMatrix> = maps
                .iter()
                .filter(|g| dist_inf(&g.eval(xbar), &v) <= 1e-10 * (1.0 + norm_inf(&v)))
                .map(|g| h.m.add(&g.jacobian(xbar)))
                .collect();
            if active.is_empty() {
                return Err(Error::NotNormal);
            }
            Ok(PiecewiseGraph::linear_selection(&active))
        }
        SetPart::ExplicitGraph(_) => Err(Error::Unsupported(
            "finite graphs have no polyhedral graphical derivative",
        )),
    }
}

/// True iff x̄ is an isolated solution of `ȳ ∈ h(x) + F(x)`, i.e. `DH(x̄|ȳ)⁻¹(0) = {0}`.
pub fn polyhedral_isolated_point_test(h: &AffineMap, c: &SetPart, xbar: &[f64], ybar: &[f64]) -> Result<bool> {
    Ok(linearization_graph(h, c, xbar, ybar)?.kernel_is_trivial())
}

/// `‖DH(x̄|ȳ)⁻¹‖⁺` in ℓ∞ norms; `+∞` when the isolated-point test fails.
pub fn graphical_derivative_outer_norm(h: &AffineMap, c: &SetPart, xbar: &[f64], ybar: &[f64]) -> Result<f64> {
    let g = linearization_graph(h, c, xbar, ybar)?;
    if !g.kernel_is_trivial() {
        return Ok(f64::INFINITY);
    }
    Ok(g.outer_norm_inverse())
}

/// `‖D̂*H(x̄|ȳ)⁻¹‖⁻` for ℓ∞ norms (ℓ₁ on the duals).
pub fn frechet_coderivative_inner_norm(h: &AffineMap, c: &SetPart, xbar: &[f64], ybar: &[f64]) -> Result<f64> {
    Ok(linearization_graph(h, c, xbar, ybar)?.frechet_inner_norm_inverse())
}
