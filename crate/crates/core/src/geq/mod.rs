//! The generalized-equation model `ȳ ∈ f(x) + F(x)`, its residual, the natural-map
//! reformulation for box-like set parts and an exact affine-VI oracle.

mod avi;
mod set_part;
mod smooth;

pub use avi::{avi_solutions, avi_solve, AVI_MAX_BOUNDED};
pub use set_part::SetPart;
pub use smooth::SmoothMap;

use crate::error::{Error, Result};
use crate::numerics::vector::{all_finite, sub};
use crate::numerics::DenseMatrix;
use crate::polyhedral::{project_box, BoxSet};

/// Tolerance for `ȳ ∈ f(x̄) + F(x̄)` at construction.
pub const REFERENCE_TOL: f64 = 1e-8;
/// Ties `|z_i − bound| ≤ TIE_TOL` select the smooth branch of ∂_B Φ.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GeneralizedEquation {
    pub smooth: SmoothMap,
    pub set_part: SetPart,
    pub reference_point: Option<Vec<f64>>,
    pub reference_value: Vec<f64>,
}

impl GeneralizedEquation {
    /// Builds `0 ∈ f(x) + F(x)` and, if a reference point is given, checks it is a solution.
    pub fn new(smooth: SmoothMap, set_part: SetPart, reference_point: Option<Vec<f64>>) -> Result<Self> {
        let m = smooth.dim_out();
        Self::with_value(smooth, set_part, reference_point, vec![0.0; m])
    }

    pub fn with_value(
        smooth: SmoothMap,
        set_part: SetPart,
        reference_point: Option<Vec<f64>>,
        reference_value: Vec<f64>,
    ) -> Result<Self> {
        if reference_value.len() != smooth.dim_out() {
            return Err(Error::DimensionMismatch(format!(
                "reference value has length {}, f maps into R^{}",
                reference_value.len(),
                smooth.dim_out()
            )));
        }
        if !all_finite(&reference_value) {
            return Err(Error::NonFinite("reference value"));
        }
        check_set_part_dims(&smooth, &set_part)?;
        let ge = Self {
            smooth,
            set_part,
            reference_point,
            reference_value,
        };
        if let Some(xbar) = &ge.reference_point {
            if xbar.len() != ge.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "reference point has length {}, f is defined on R^{}",
                    xbar.len(),
                    ge.dim()
                )));
            }
            let r = ge.residual_distance(xbar);
            if !(r <= REFERENCE_TOL) {
                return Err(Error::Hypothesis(format!(
                    "reference point is not a solution: residual {r:e}"
                )));
            }
        }
        Ok(ge)
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim_in()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.smooth.eval(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> DenseMatrix {
        self.smooth.jacobian(x)
    }

    /// `d(ȳ, f(x) + F(x))` in the Euclidean norm, `+∞` if F(x) is empty.
    pub fn residual_distance(&self, x: &[f64]) -> f64 {
        self.residual_distance_to(x, &self.reference_value)
    }

    /// `d(y, f(x) + F(x))` for an arbitrary left-hand side y.
    pub fn residual_distance_to(&self, x: &[f64], y: &[f64]) -> f64 {
        let fx = self.smooth.eval(x);
        if !all_finite(&fx) {
            return f64::INFINITY;
        }
        self.set_part.distance_to(x, &sub(y, &fx))
    }

    /// The box C with F = N_C, if the set part is box-like.
    pub fn box_domain(&self) -> Option<BoxSet> {
        self.set_part.as_box(self.dim())
    }

    fn require_box(&self) -> Result<BoxSet> {
        if self.smooth.dim_in() != self.smooth.dim_out() {
            return Err(Error::Unsupported("natural map needs a square system"));
        }
        self.box_domain()
            .ok_or(Error::Unsupported("natural map needs a box or KKT normal cone"))
    }

    /// `Φ(x) = x − P_C(x − (f(x) − ȳ))`.
    pub fn natural_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.natural_map_shifted(x, &self.reference_value)
    }

    /// `Φ(x) = x − P_C(x − (f(x) − shift))`.
    pub fn natural_map_shifted(&self, x: &[f64], shift: &[f64]) -> Result<Vec<f64>> {
        let c = self.require_box()?;
        let z = self.natural_argument(x, shift);
        Ok(sub(x, &project_box(&z, &c)))
    }

    fn natural_argument(&self, x: &[f64], shift: &[f64]) -> Vec<f64> {
        let fx = self.smooth.eval(x);
        x.iter()
            .zip(fx.iter().zip(shift))
            .map(|(xi, (fi, si))| xi - (fi - si))
            .collect()
    }

    /// An element of ∂_B Φ(x): Jf rows where `x − f(x) + ȳ` lies inside its interval
    /// (ties included), identity rows where it lies strictly outside.
    pub fn b_jacobian_natural_map(&self, x: &[f64]) -> Result<DenseMatrix> {
        self.b_jacobian_shifted(x, &self.reference_value)
    }

    pub fn b_jacobian_shifted(&self, x: &[f64], shift: &[f64]) -> Result<DenseMatrix> {
        let c = self.require_box()?;
        let z = self.natural_argument(x, shift);
        let jf = self.smooth.jacobian(x);
        let n = x.len();
        let mut out = jf;
        for i in 0..n {
            let outside = z[i] < c.lower[i] - TIE_TOL || z[i] > c.upper[i] + TIE_TOL;
            if outside {
                for j in 0..n {
                    out[(i, j)] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        Ok(out)
    }
}

fn check_set_part_dims(smooth: &SmoothMap, set_part: &SetPart) -> Result<()> {
    let (n, m) = (smooth.dim_in(), smooth.dim_out());
    let mismatch = |what: &str, got: usize, want: usize| {
        Err(Error::DimensionMismatch(format!("{what}: got {got}, expected {want}")))
    };
    match set_part {
        SetPart::ZeroMap => Ok(()),
        SetPart::BoxNormalCone(b) if b.dim() != n || n != m => mismatch("box dimension", b.dim(), n),
        SetPart::PolyhedralNormalCone(p) if p.dim() != n || n != m => mismatch("polyhedron dimension", p.dim(), n),
        SetPart::KktCone { s, m: mm } if s > mm || *mm > n || n != m => Err(Error::InvalidInput(format!(
            "KKT cone (s={s}, m={mm}) does not fit R^{n}"
        ))),
        SetPart::ConstantSet(p) if p.dim() != m => mismatch("constant set dimension", p.dim(), m),
        SetPart::FiniteSelection(maps) => {
            for g in maps {
                if g.dim_in() != n || g.dim_out() != m {
                    return mismatch("selection output", g.dim_out(), m);
                }
            }
            Ok(())
        }
        SetPart::ExplicitGraph(pts) => {
            for (x, y) in pts {
                if x.len() != n || y.len() != m {
                    return mismatch("graph point", x.len(), n);
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}
