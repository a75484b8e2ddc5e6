//! Tangent, normal and critical cones of polyhedra, and face enumeration of cones.

use serde::{Deserialize, Serialize};

use super::projection::cone_distance;
use super::sets::{Face, PolyhedralCone, Polyhedron, ACTIVE_TOL};
use super::simplex::LinearProgram;
use crate::combinatorics::subsets_by_size;
use crate::error::{cap, Error, Result};
use crate::numerics::vector::norm_inf;
use crate::numerics::{nullspace_basis, DenseMatrix};

/// A finitely generated cone `{Σ λ_i g_i + Σ μ_j l_j : λ ≥ 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedCone {
    pub dim: usize,
    pub generators: Vec<Vec<f64>>,
    pub lineality: Vec<Vec<f64>>,
}

impl GeneratedCone {
    pub fn distance(&self, w: &[f64]) -> Result<f64> {
        Ok(cone_distance(w, &self.generators, &self.lineality)?.distance)
    }

    pub fn is_zero(&self) -> bool {
        self.generators
            .iter()
            .chain(&self.lineality)
            .all(|g| norm_inf(g) == 0.0)
    }
}

/// `N_P(x)` in generator form, or `None` when x ∉ P (violation beyond 1e-10).
pub fn normal_cone_at(p: &Polyhedron, x: &[f64]) -> Option<GeneratedCone> {
    if !p.contains(x, ACTIVE_TOL) {
        return None;
    }
    let active = p.active_set(x, ACTIVE_TOL);
    Some(GeneratedCone {
        dim: p.dim(),
        generators: active.iter().map(|&i| p.ineq.row(i).to_vec()).collect(),
        lineality: p.eq.row_vecs(),
    })
}

/// `T_P(x)` in constraint form (x assumed feasible).
pub fn tangent_cone(p: &Polyhedron, x: &[f64]) -> PolyhedralCone {
    let active = p.active_set(x, ACTIVE_TOL);
    PolyhedralCone {
        ineq: p.ineq.select_rows(&active),
        eq: p.eq.clone(),
    }
}

/// `K_P(x, v) = T_P(x) ∩ v^⊥` after verifying v ∈ N_P(x) at tolerance 1e-8.
pub fn critical_cone(p: &Polyhedron, x: &[f64], v: &[f64]) -> Result<PolyhedralCone> {
    let Some(n) = normal_cone_at(p, x) else {
        return Err(Error::InvalidInput("point is outside the polyhedron".into()));
    };
    if n.distance(v)? > 1e-8 * (1.0 + norm_inf(v)) {
        return Err(Error::NotNormal);
    }
    let t = tangent_cone(p, x);
    let eq = if norm_inf(v) > 0.0 {
        DenseMatrix::vstack(&[&t.eq, &DenseMatrix::from_rows(&[v.to_vec()], p.dim())?], p.dim())
    } else {
        t.eq
    };
    Ok(PolyhedralCone { ineq: t.ineq, eq })
}

/// True iff the relative interior of the face with exact active pattern `active` is nonempty.
fn pattern_realizable(k: &PolyhedralCone, active: &[usize]) -> bool {
    let d = k.dim();
    let mut lp = LinearProgram::new(d + 1);
    lp.objective[d] = 1.0;
    for j in 0..d {
        lp.bounds(j, -1.0, 1.0);
    }
    lp.bounds(d, f64::NEG_INFINITY, 1.0);
    for i in 0..k.num_ineq() {
        let mut row = k.ineq.row(i).to_vec();
        if active.contains(&i) {
            row.push(0.0);
            lp.eq(row, 0.0);
        } else {
            row.push(1.0);
            lp.le(row, 0.0);
        }
    }
    for i in 0..k.eq.rows() {
        let mut row = k.eq.row(i).to_vec();
        row.push(0.0);
        lp.eq(row, 0.0);
    }
    lp.maximize().value().is_some_and(|t| t > 1e-9)
}

/// All faces of K, one per realizable exact active pattern.
pub fn enumerate_faces(k: &PolyhedralCone) -> Result<Vec<Face>> {
    cap("face enumeration inequalities", 20, k.num_ineq())?;
    let d = k.dim();
    let mut faces = Vec::new();
    for subset in subsets_by_size(k.num_ineq()) {
        if !pattern_realizable(k, &subset) {
            continue;
        }
        let rows = DenseMatrix::vstack(&[&k.ineq.select_rows(&subset), &k.eq], d);
        let span = if rows.rows() == 0 {
            DenseMatrix::identity(d)
        } else {
            nullspace_basis(&rows)
        };
        faces.push(Face {
            active: subset,
            span_basis: span,
        });
    }
    Ok(faces)
}

/// True iff the cone `{x : ineq·x ≤ 0, eq·x = 0}` is `{0}`.
pub fn cone_is_trivial(ineq: &DenseMatrix, eq: &DenseMatrix) -> bool {
    let d = ineq.cols();
    if d == 0 {
        return true;
    }
    let both = DenseMatrix::vstack(&[ineq, eq], d);
    if both.rows() == 0 || nullspace_basis(&both).cols() > 0 {
        return false;
    }
    // Pointed: a nonzero element must make some inequality strictly negative.
    let mut lp = LinearProgram::new(d);
    let mut sum = vec![0.0; d];
    for i in 0..ineq.rows() {
        lp.le(ineq.row(i).to_vec(), 0.0);
        for (s, a) in sum.iter_mut().zip(ineq.row(i)) {
            *s -= a;
        }
    }
    for i in 0..eq.rows() {
        lp.eq(eq.row(i).to_vec(), 0.0);
    }
    lp.le(sum.clone(), 1.0);
    lp.objective = sum;
    lp.maximize().value().is_none_or(|v| v <= 1e-9)
}

impl PolyhedralCone {
    pub fn is_trivial(&self) -> bool {
        cone_is_trivial(&self.ineq, &self.eq)
    }
}
