//! Nonlinear programs `min g₀(x)` s.t. `g_i(x) = 0` (i < s), `g_i(x) ≤ 0` (s ≤ i < m):
//! KKT maps, index classification, strict MFCQ, second-order sufficiency and the
//! homogeneous variational inequality that decides strong subregularity of the KKT map.

mod analysis;
mod family;
#[cfg(test)]
mod tests;

pub use analysis::{
    homogeneous_vi_unique_zero, local_min_witness, nlp_equivalence, sosc_sigma, strict_mfcq_check, strict_mfcq_literal,
    NlpReport, SOSC_TOL,
};
pub use family::{duplicated_constraint, halfplane_qp, indefinite_hessian, random_family, FamilyCheck, FamilyInstance};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::geq::{GeneralizedEquation, SetPart, SmoothMap};
use crate::numerics::vector::norm_inf;
use crate::numerics::DenseMatrix;
use crate::polyhedral::PolyhedralCone;
use crate::regularity::AffineMap;
use crate::rng::{seeded, uniform_box};

pub const KKT_TOL: f64 = 1e-8;
const DERIVATIVE_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct NlpProblem {
    n: usize,
    s: usize,
    objective: ScalarFunction,
    constraints: Vec<ScalarFunction>,
}

impl NlpProblem {
    /// Validates dimensions and compares analytic derivative oracles with finite differences
    /// at the origin and a few seeded points of `[-1, 1]ⁿ`.
    pub fn new(n: usize, s: usize, objective: ScalarFunction, constraints: Vec<ScalarFunction>) -> Result<Self> {
        if s > constraints.len() {
            return Err(Error::InvalidInput(format!(
                "s = {s} exceeds m = {}",
                constraints.len()
            )));
        }
        if objective.nvars() != n || constraints.iter().any(|g| g.nvars() != n) {
            return Err(Error::DimensionMismatch("oracle variable counts differ from n".into()));
        }
        let mut rng = seeded(0xd1ff);
        let mut points = vec![vec![0.0; n]];
        points.extend((0..3).map(|_| uniform_box(&mut rng, n, 1.0)));
        for x in &points {
            for (i, g) in std::iter::once(&objective).chain(&constraints).enumerate() {
                let worst = g.derivative_check(x);
                if worst > DERIVATIVE_TOL {
                    return Err(Error::CrossCheck(format!(
                        "derivative oracle of function {i} is off by {worst:e} at {x:?}"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            s,
            objective,
            constraints,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn objective(&self) -> &ScalarFunction {
        &self.objective
    }

    pub fn constraints(&self) -> &[ScalarFunction] {
        &self.constraints
    }

    pub fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|g| g.value(x)).collect()
    }

    /// Rows are the constraint gradients.
    pub fn constraint_jacobian(&self, x: &[f64]) -> DenseMatrix {
        let rows: Vec<Vec<f64>> = self.constraints.iter().map(|g| g.gradient(x)).collect();
        DenseMatrix::from_rows(&rows, self.n).expect("gradient length checked at construction")
    }

    pub fn lagrangian_gradient(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut grad = self.objective.gradient(x);
        for (g, &yi) in self.constraints.iter().zip(y) {
            for (a, b) in grad.iter_mut().zip(g.gradient(x)) {
                *a += yi * b;
            }
        }
        grad
    }

    pub fn lagrangian_hessian(&self, x: &[f64], y: &[f64]) -> DenseMatrix {
        let mut h = self.objective.hessian(x);
        for (g, &yi) in self.constraints.iter().zip(y) {
            if yi != 0.0 {
                h = h.add(&g.hessian(x).scale(yi));
            }
        }
        h.add(&h.transpose()).scale(0.5)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.constraint_values(x)
            .iter()
            .enumerate()
            .all(|(i, &g)| if i < self.s { g.abs() <= tol } else { g <= tol })
    }

    /// The KKT map as a generalized equation in z = (x, y):
    /// `0 ∈ (∇ₓL(x, y), −g(x)) + N_{Rⁿ×Rˢ×R₊^{m−s}}(x, y)`.
    pub fn kkt_ge(&self, reference: Option<(&[f64], &[f64])>) -> Result<GeneralizedEquation> {
        let (n, m) = (self.n, self.m());
        let (p1, p2) = (self.clone(), self.clone());
        let smooth = SmoothMap::new(n + m, n + m, move |z| {
            let (x, y) = z.split_at(n);
            let mut out = p1.lagrangian_gradient(x, y);
            out.extend(p1.constraint_values(x).into_iter().map(|g| -g));
            out
        })
        .with_jacobian(move |z| {
            let (x, y) = z.split_at(n);
            kkt_block(&p2.lagrangian_hessian(x, y), &p2.constraint_jacobian(x))
        });
        let reference = reference.map(|(x, y)| [x, y].concat());
        GeneralizedEquation::new(
            smooth,
            SetPart::KktCone {
                s: n + self.s,
                m: n + m,
            },
            reference,
        )
    }
}

/// `[[A, Bᵀ], [−B, 0]]`.
pub(crate) fn kkt_block(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (n, m) = (a.rows(), b.rows());
    let top = DenseMatrix::hstack(&[a, &b.transpose()], n);
    let bottom = DenseMatrix::hstack(&[&b.scale(-1.0), &DenseMatrix::zeros(m, m)], m);
    DenseMatrix::vstack(&[&top, &bottom], n + m)
}

/// `‖∇ₓL‖∞` plus the largest per-constraint violation of `g(x) ∈ N(y)`: `|g_i|` for
/// equalities, `|min(y_i, −g_i)| + max(−y_i, 0)` for inequalities.
pub fn kkt_residual(prob: &NlpProblem, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != prob.n || y.len() != prob.m() {
        return Err(Error::DimensionMismatch(format!(
            "expected x in R^{} and y in R^{}",
            prob.n,
            prob.m()
        )));
    }
    let stationarity = norm_inf(&prob.lagrangian_gradient(x, y));
    let g = prob.constraint_values(x);
    let comp = g
        .iter()
        .zip(y)
        .enumerate()
        .map(|(i, (&gi, &yi))| {
            if i < prob.s {
                gi.abs()
            } else {
                yi.min(-gi).abs() + (-yi).max(0.0)
            }
        })
        .fold(0.0, f64::max);
    Ok(stationarity + comp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl KktPoint {
    pub fn new(prob: &NlpProblem, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let r = kkt_residual(prob, &x, &y)?;
        if r > KKT_TOL {
            return Err(Error::Hypothesis(format!("KKT residual {r:e} exceeds {KKT_TOL:e}")));
        }
        let g = prob.constraint_values(&x);
        for i in prob.s..prob.m() {
            if y[i] < 0.0 || (y[i] * g[i]).abs() > KKT_TOL {
                return Err(Error::Hypothesis(format!(
                    "multiplier {i} violates sign or complementarity"
                )));
            }
        }
        Ok(Self { x, y })
    }
}

/// Zero-based index sets. `degenerate` lists the I2 members placed there by a tie
/// (`|g_i| ≤ tol` and `y_i ≤ tol`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSets {
    pub i1: Vec<usize>,
    pub i2: Vec<usize>,
    pub i3: Vec<usize>,
    pub degenerate: Vec<usize>,
}

pub fn classify_indices(prob: &NlpProblem, pt: &KktPoint, tol: f64) -> IndexSets {
    let g = prob.constraint_values(&pt.x);
    let mut sets = IndexSets {
        i1: Vec::new(),
        i2: Vec::new(),
        i3: Vec::new(),
        degenerate: Vec::new(),
    };
    for i in 0..prob.m() {
        if i < prob.s {
            sets.i1.push(i);
        } else if g[i] < -tol {
            sets.i3.push(i);
        } else if pt.y[i] > tol {
            sets.i1.push(i);
        } else {
            sets.i2.push(i);
            sets.degenerate.push(i);
        }
    }
    sets
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalConeData {
    pub a_hess: DenseMatrix,
    pub b_full: DenseMatrix,
    pub b1: DenseMatrix,
    pub b2: DenseMatrix,
    /// `{x′ : B1 x′ = 0, B2 x′ ≤ 0}`.
    pub k: PolyhedralCone,
}

impl CriticalConeData {
    pub fn new(prob: &NlpProblem, pt: &KktPoint, sets: &IndexSets) -> Result<Self> {
        let a_hess = prob.lagrangian_hessian(&pt.x, &pt.y);
        let b_full = prob.constraint_jacobian(&pt.x);
        let b1 = b_full.select_rows(&sets.i1);
        let b2 = b_full.select_rows(&sets.i2);
        let k = PolyhedralCone::new(b2.clone(), b1.clone())?;
        Ok(Self {
            a_hess,
            b_full,
            b1,
            b2,
            k,
        })
    }
}

/// The linearization of the KKT map at (x̄, ȳ): `h(z) = f(z̄) + [[A, Bᵀ], [−B, 0]](z − z̄)`
/// where `f(z̄) = (0, −g(x̄))` vanishes outside the inactive block.
pub fn linearized_kkt(prob: &NlpProblem, pt: &KktPoint) -> (AffineMap, SetPart) {
    let (n, m) = (prob.n, prob.m());
    let mat = kkt_block(&prob.lagrangian_hessian(&pt.x, &pt.y), &prob.constraint_jacobian(&pt.x));
    let mut value = prob.lagrangian_gradient(&pt.x, &pt.y);
    value.extend(prob.constraint_values(&pt.x).into_iter().map(|g| -g));
    let zbar = [pt.x.as_slice(), pt.y.as_slice()].concat();
    (
        AffineMap::linearization(mat, &value, &zbar),
        SetPart::KktCone {
            s: n + prob.s,
            m: n + m,
        },
    )
}
