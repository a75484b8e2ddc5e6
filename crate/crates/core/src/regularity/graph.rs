//! Set-valued maps whose graph is a finite union of polyhedral cones, possibly given as
//! projections of cones with auxiliary variables.

use serde::{Deserialize, Serialize};

use crate::combinatorics::subsets_by_size;
use crate::error::{cap, Error, Result};
use crate::numerics::DenseMatrix;
use crate::polyhedral::{LinearProgram, LpOutcome, PolyhedralCone};

/// Cap on inequalities of a critical cone expanded into complementarity pieces.
pub const MAX_PATTERN_INEQ: usize = 20;

/// `{(u, v) : ∃ w, ineq·(u, v, w) ≤ 0, eq·(u, v, w) = 0}` with u ∈ Rⁿ, v ∈ Rᵐ, w ∈ Rᵃ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPiece {
    pub aux: usize,
    pub ineq: Vec<Vec<f64>>,
    pub eq: Vec<Vec<f64>>,
}

/// A positively homogeneous map `u ↦ {v : (u, v) ∈ ∪ pieces}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseGraph {
    pub n: usize,
    pub m: usize,
    pub pieces: Vec<GraphPiece>,
}

impl PiecewiseGraph {
    /// The graph of `u ↦ A u`.
    pub fn linear(a: &DenseMatrix) -> Self {
        Self::linear_selection(std::slice::from_ref(a))
    }

    /// The graph of `u ↦ {A_1 u, …, A_k u}`.
    pub fn linear_selection(maps: &[DenseMatrix]) -> Self {
        let (m, n) = (maps[0].rows(), maps[0].cols());
        let pieces = maps
            .iter()
            .map(|a| GraphPiece {
                aux: 0,
                ineq: Vec::new(),
                eq: (0..m)
                    .map(|i| {
                        let mut row: Vec<f64> = a.row(i).iter().map(|x| -x).collect();
                        row.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
                        row
                    })
                    .collect(),
            })
            .collect();
        Self { n, m, pieces }
    }

    /// The graph of `u ↦ M u + N_K(u)`, one piece per set of inequalities allowed to
    /// carry multipliers.
    pub fn affine_vi(mat: &DenseMatrix, k: &PolyhedralCone) -> Result<Self> {
        let n = mat.cols();
        if mat.rows() != n || k.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "affine VI: M is {}x{}, cone lives in R^{}",
                mat.rows(),
                n,
                k.dim()
            )));
        }
        let g = &k.ineq;
        let e = &k.eq;
        cap("critical cone inequalities", MAX_PATTERN_INEQ, g.rows())?;
        let mut pieces = Vec::new();
        for active in subsets_by_size(g.rows()) {
            let la = active.len();
            let aux = la + e.rows();
            let width = 2 * n + aux;
            let mut eq = Vec::new();
            // v − M u − G_Aᵀ λ − Eᵀ μ = 0
            for i in 0..n {
                let mut row = vec![0.0; width];
                for j in 0..n {
                    row[j] = -mat[(i, j)];
                }
                row[n + i] = 1.0;
                for (t, &r) in active.iter().enumerate() {
                    row[2 * n + t] = -g[(r, i)];
                }
                for r in 0..e.rows() {
                    row[2 * n + la + r] = -e[(r, i)];
                }
                eq.push(row);
            }
            for &r in &active {
                let mut row = vec![0.0; width];
                row[..n].copy_from_slice(g.row(r));
                eq.push(row);
            }
            for r in 0..e.rows() {
                let mut row = vec![0.0; width];
                row[..n].copy_from_slice(e.row(r));
                eq.push(row);
            }
            let mut ineq = Vec::new();
            for r in (0..g.rows()).filter(|r| !active.contains(r)) {
                let mut row = vec![0.0; width];
                row[..n].copy_from_slice(g.row(r));
                ineq.push(row);
            }
            for t in 0..la {
                let mut row = vec![0.0; width];
                row[2 * n + t] = -1.0;
                ineq.push(row);
            }
            pieces.push(GraphPiece { aux, ineq, eq });
        }
        Ok(Self { n, m: n, pieces })
    }

    /// The graph of `u ↦ A u + T` for a polyhedral cone T ⊂ Rᵐ.
    pub fn linear_plus_cone(a: &DenseMatrix, t: &PolyhedralCone) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let width = n + 2 * m;
        let mut eq = Vec::new();
        // v − A u − w = 0
        for i in 0..m {
            let mut row = vec![0.0; width];
            for j in 0..n {
                row[j] = -a[(i, j)];
            }
            row[n + i] = 1.0;
            row[n + m + i] = -1.0;
            eq.push(row);
        }
        let lift = |r: &[f64]| {
            let mut row = vec![0.0; width];
            row[n + m..].copy_from_slice(r);
            row
        };
        eq.extend(t.eq.row_vecs().iter().map(|r| lift(r)));
        let ineq = t.ineq.row_vecs().iter().map(|r| lift(r)).collect();
        Self {
            n,
            m,
            pieces: vec![GraphPiece { aux: m, ineq, eq }],
        }
    }

    fn width(&self, piece: &GraphPiece) -> usize {
        self.n + self.m + piece.aux
    }

    fn piece_lp(&self, piece: &GraphPiece) -> LinearProgram {
        let mut lp = LinearProgram::new(self.width(piece));
        for r in &piece.ineq {
            lp.le(r.clone(), 0.0);
        }
        for r in &piece.eq {
            lp.eq(r.clone(), 0.0);
        }
        lp
    }

    /// True iff `0 ∈ G(u)` forces `u = 0`.
    pub fn kernel_is_trivial(&self) -> bool {
        self.pieces.iter().all(|piece| {
            let mut base = self.piece_lp(piece);
            for k in 0..self.m {
                base.bounds(self.n + k, 0.0, 0.0);
            }
            (0..self.n).all(|j| {
                [1.0, -1.0].iter().all(|&s| {
                    let mut lp = base.clone();
                    let mut row = vec![0.0; lp.n];
                    row[j] = -s;
                    lp.le(row, -1.0);
                    !lp.is_feasible()
                })
            })
        })
    }

    /// `sup {‖u‖∞ : v ∈ G(u), ‖v‖∞ ≤ 1}`, the ℓ∞/ℓ∞ outer norm of the inverse.
    pub fn outer_norm_inverse(&self) -> f64 {
        let mut best: f64 = 0.0;
        for piece in &self.pieces {
            let mut base = self.piece_lp(piece);
            for k in 0..self.m {
                base.bounds(self.n + k, -1.0, 1.0);
            }
            for j in 0..self.n {
                for s in [1.0, -1.0] {
                    let mut lp = base.clone();
                    lp.objective[j] = s;
                    match lp.maximize() {
                        LpOutcome::Optimal { value, .. } => best = best.max(value),
                        LpOutcome::Unbounded => return f64::INFINITY,
                        LpOutcome::Infeasible => {}
                    }
                }
            }
        }
        best
    }

    /// `sup_{‖x*‖₁ ≤ 1} inf {‖y*‖₁ : (x*, −y*) ∈ N̂_gph(0, 0)}`, the inner norm of the
    /// inverse Fréchet coderivative for ℓ∞ norms on both spaces.
    ///
    /// The regular normal cone of a union of cones at the origin is the intersection of
    /// the polars of the pieces; the supremum of this sublinear function over the ℓ₁ ball
    /// is attained at ±e_j.
    pub fn frechet_inner_norm_inverse(&self) -> f64 {
        let (n, m) = (self.n, self.m);
        // Layout: y* (m), t (m), then per piece α (ineq) and β (eq).
        let mut offsets = Vec::with_capacity(self.pieces.len());
        let mut total = 2 * m;
        for p in &self.pieces {
            offsets.push(total);
            total += p.ineq.len() + p.eq.len();
        }
        let mut best: f64 = 0.0;
        for j in 0..n {
            for s in [1.0, -1.0] {
                let mut lp = LinearProgram::new(total);
                for k in 0..m {
                    lp.objective[m + k] = 1.0;
                    let mut a = vec![0.0; total];
                    a[k] = 1.0;
                    a[m + k] = -1.0;
                    lp.le(a, 0.0);
                    let mut b = vec![0.0; total];
                    b[k] = -1.0;
                    b[m + k] = -1.0;
                    lp.le(b, 0.0);
                }
                for (p, &off) in self.pieces.iter().zip(&offsets) {
                    for t in 0..p.ineq.len() {
                        lp.bounds(off + t, 0.0, f64::INFINITY);
                    }
                    let w = self.width(p);
                    // Component c of Σ α_t ineq_t + Σ β_t eq_t equals (s e_j, −y*, 0)_c.
                    for c in 0..w {
                        let mut row = vec![0.0; total];
                        for (t, r) in p.ineq.iter().enumerate() {
                            row[off + t] = r[c];
                        }
                        for (t, r) in p.eq.iter().enumerate() {
                            row[off + p.ineq.len() + t] = r[c];
                        }
                        let mut rhs = 0.0;
                        if c < n {
                            rhs = if c == j { s } else { 0.0 };
                        } else if c < n + m {
                            row[c - n] += 1.0;
                        }
                        lp.eq(row, rhs);
                    }
                }
                match lp.minimize() {
                    LpOutcome::Optimal { value, .. } => best = best.max(value),
                    LpOutcome::Infeasible | LpOutcome::Unbounded => return f64::INFINITY,
                }
            }
        }
        best
    }
}
