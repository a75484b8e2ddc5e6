use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Feasibility and activity tolerance for polyhedral membership tests.
pub const ACTIVE_TOL: f64 = 1e-10;

/// `{x : ineq·x ≤ ineq_rhs, eq·x = eq_rhs}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron {
    pub ineq: DenseMatrix,
    pub ineq_rhs: Vec<f64>,
    pub eq: DenseMatrix,
    pub eq_rhs: Vec<f64>,
}

impl Polyhedron {
    pub fn new(ineq: DenseMatrix, ineq_rhs: Vec<f64>, eq: DenseMatrix, eq_rhs: Vec<f64>) -> Result<Self> {
        if ineq.cols() != eq.cols() {
            return Err(Error::DimensionMismatch(format!(
                "inequality block has {} columns, equality block {}",
                ineq.cols(),
                eq.cols()
            )));
        }
        if ineq.rows() != ineq_rhs.len() || eq.rows() != eq_rhs.len() {
            return Err(Error::DimensionMismatch("right-hand side length".into()));
        }
        if ineq_rhs.iter().chain(&eq_rhs).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("polyhedron right-hand side"));
        }
        Ok(Self {
            ineq,
            ineq_rhs,
            eq,
            eq_rhs,
        })
    }

    /// Inequality-only polyhedron from rows `a_i·x ≤ b_i`.
    pub fn from_inequalities(rows: &[Vec<f64>], rhs: &[f64], dim: usize) -> Result<Self> {
        Self::new(
            DenseMatrix::from_rows(rows, dim)?,
            rhs.to_vec(),
            DenseMatrix::zeros(0, dim),
            Vec::new(),
        )
    }

    pub fn whole_space(dim: usize) -> Self {
        Self {
            ineq: DenseMatrix::zeros(0, dim),
            ineq_rhs: Vec::new(),
            eq: DenseMatrix::zeros(0, dim),
            eq_rhs: Vec::new(),
        }
    }

    pub fn nonneg_orthant(dim: usize) -> Self {
        Self {
            ineq: DenseMatrix::identity(dim).scale(-1.0),
            ineq_rhs: vec![0.0; dim],
            eq: DenseMatrix::zeros(0, dim),
            eq_rhs: Vec::new(),
        }
    }

    pub fn from_box(b: &BoxSet) -> Self {
        let n = b.dim();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..n {
            if b.upper[i].is_finite() {
                let mut r = vec![0.0; n];
                r[i] = 1.0;
                rows.push(r);
                rhs.push(b.upper[i]);
            }
            if b.lower[i].is_finite() {
                let mut r = vec![0.0; n];
                r[i] = -1.0;
                rows.push(r);
                rhs.push(-b.lower[i]);
            }
        }
        Self::from_inequalities(&rows, &rhs, n).expect("box rows are consistent")
    }

    pub fn dim(&self) -> usize {
        self.ineq.cols()
    }

    pub fn num_ineq(&self) -> usize {
        self.ineq.rows()
    }

    /// Largest constraint violation at x (0 when feasible).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.ineq.mul_vec(x);
        let e = self.eq.mul_vec(x);
        let vi = a.iter().zip(&self.ineq_rhs).fold(0.0f64, |m, (ax, b)| m.max(ax - b));
        e.iter().zip(&self.eq_rhs).fold(vi, |m, (ex, f)| m.max((ex - f).abs()))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.violation(x) <= tol
    }

    /// Indices of inequalities active at x within `tol`.
    pub fn active_set(&self, x: &[f64], tol: f64) -> Vec<usize> {
        let a = self.ineq.mul_vec(x);
        (0..self.num_ineq())
            .filter(|&i| (a[i] - self.ineq_rhs[i]).abs() <= tol)
            .collect()
    }
}

/// A polyhedral cone `{x : ineq·x ≤ 0, eq·x = 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralCone {
    pub ineq: DenseMatrix,
    pub eq: DenseMatrix,
}

impl PolyhedralCone {
    pub fn new(ineq: DenseMatrix, eq: DenseMatrix) -> Result<Self> {
        if ineq.cols() != eq.cols() {
            return Err(Error::DimensionMismatch("cone blocks".into()));
        }
        Ok(Self { ineq, eq })
    }

    pub fn whole_space(dim: usize) -> Self {
        Self {
            ineq: DenseMatrix::zeros(0, dim),
            eq: DenseMatrix::zeros(0, dim),
        }
    }

    pub fn nonneg_orthant(dim: usize) -> Self {
        Self {
            ineq: DenseMatrix::identity(dim).scale(-1.0),
            eq: DenseMatrix::zeros(0, dim),
        }
    }

    /// The subspace spanned by the columns of `basis`.
    pub fn subspace(basis: &DenseMatrix) -> Self {
        let eq = crate::numerics::nullspace_basis(&basis.transpose()).transpose();
        let dim = basis.rows();
        Self {
            ineq: DenseMatrix::zeros(0, dim),
            eq: if eq.rows() == 0 { DenseMatrix::zeros(0, dim) } else { eq },
        }
    }

    pub fn dim(&self) -> usize {
        self.ineq.cols()
    }

    pub fn num_ineq(&self) -> usize {
        self.ineq.rows()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.ineq.mul_vec(x).iter().all(|v| *v <= tol) && self.eq.mul_vec(x).iter().all(|v| v.abs() <= tol)
    }

    pub fn to_polyhedron(&self) -> Polyhedron {
        Polyhedron {
            ineq: self.ineq.clone(),
            ineq_rhs: vec![0.0; self.ineq.rows()],
            eq: self.eq.clone(),
            eq_rhs: vec![0.0; self.eq.rows()],
        }
    }
}

/// Axis-aligned box with possibly infinite bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSet {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch("box bounds".into()));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return Err(Error::InvalidInput(format!("invalid box interval [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn free(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn nonneg(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Number of finite bounds, the count of coordinates that need pattern enumeration.
    pub fn bounded_coordinates(&self) -> usize {
        self.lower
            .iter()
            .zip(&self.upper)
            .filter(|(l, u)| l.is_finite() || u.is_finite())
            .count()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
    }
}

/// A face of a polyhedral cone: its exact active pattern and an orthonormal basis of its span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub active: Vec<usize>,
    pub span_basis: DenseMatrix,
}
