//! Exact LP oracle by vertex enumeration plus a recession-ray check.

use serde::{Deserialize, Serialize};

use super::sets::Polyhedron;
use crate::combinatorics::Combinations;
use crate::error::{cap, Result};
use crate::numerics::{nullspace_basis, rank, solve_linear, vector::dot, DenseMatrix};

const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
}

/// Solves `min/max cᵀx` over P exactly by enumerating basic solutions.
pub fn lp_solve(c: &[f64], p: &Polyhedron, sense: Sense) -> Result<LpSolution> {
    let d = p.dim();
    cap("lp dimension", 12, d)?;
    cap("lp constraints", 24, p.num_ineq() + p.eq.rows())?;
    let cmin: Vec<f64> = match sense {
        Sense::Min => c.to_vec(),
        Sense::Max => c.iter().map(|v| -v).collect(),
    };
    let finish = |x: Vec<f64>, status: LpStatus| {
        let value = match status {
            LpStatus::Optimal => dot(c, &x),
            LpStatus::Unbounded => match sense {
                Sense::Min => f64::NEG_INFINITY,
                Sense::Max => f64::INFINITY,
            },
            LpStatus::Infeasible => f64::NAN,
        };
        LpSolution { status, x, value }
    };

    // Lineality space L = null([A; E]); restrict to L^⊥ to obtain a pointed polyhedron.
    let all = DenseMatrix::vstack(&[&p.ineq, &p.eq], d);
    let lineality = nullspace_basis(&all);
    let lineal_dirs: Vec<Vec<f64>> = (0..lineality.cols()).map(|j| lineality.column(j)).collect();
    let c_along_lineality = lineal_dirs.iter().any(|l| dot(&cmin, l).abs() > 1e-12);

    let mut eq_rows = p.eq.row_vecs();
    let mut eq_rhs = p.eq_rhs.clone();
    for l in &lineal_dirs {
        eq_rows.push(l.clone());
        eq_rhs.push(0.0);
    }
    let eq = DenseMatrix::from_rows(&eq_rows, d)?;
    let eq_rank = if eq.rows() == 0 { 0 } else { rank(&eq) };
    let k = d - eq_rank;
    let a_rows = p.ineq.row_vecs();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for subset in Combinations::new(a_rows.len(), k) {
        let mut rows = eq_rows.clone();
        let mut rhs = eq_rhs.clone();
        for &i in &subset {
            rows.push(a_rows[i].clone());
            rhs.push(p.ineq_rhs[i]);
        }
        let Some(x) = solve_square_or_overdetermined(&rows, &rhs, d) else {
            continue;
        };
        if !p.contains(&x, FEAS_TOL * (1.0 + crate::numerics::vector::norm_inf(&x))) {
            continue;
        }
        let v = dot(&cmin, &x);
        if best.as_ref().is_none_or(|(bv, _)| v < *bv - 1e-13) {
            best = Some((v, x));
        }
    }
    let Some((_, xbest)) = best else {
        return Ok(finish(vec![f64::NAN; d], LpStatus::Infeasible));
    };
    if c_along_lineality {
        return Ok(finish(xbest, LpStatus::Unbounded));
    }
    // Extreme rays of the pointed recession cone {A r ≤ 0, E r = 0, Lᵀ r = 0}.
    if k >= 1 {
        for subset in Combinations::new(a_rows.len(), k - 1) {
            let mut rows = eq_rows.clone();
            for &i in &subset {
                rows.push(a_rows[i].clone());
            }
            let m = DenseMatrix::from_rows(&rows, d)?;
            let z = nullspace_basis(&m);
            if z.cols() != 1 {
                continue;
            }
            let r = z.column(0);
            for sign in [1.0, -1.0] {
                let dir: Vec<f64> = r.iter().map(|v| v * sign).collect();
                let feasible = p.ineq.mul_vec(&dir).iter().all(|v| *v <= 1e-10);
                if feasible && dot(&cmin, &dir) < -1e-10 {
                    return Ok(finish(xbest, LpStatus::Unbounded));
                }
            }
        }
    }
    Ok(finish(xbest, LpStatus::Optimal))
}

/// Solves a system with exactly `d` independent equations among the rows, if it has a unique solution.
fn solve_square_or_overdetermined(rows: &[Vec<f64>], rhs: &[f64], d: usize) -> Option<Vec<f64>> {
    let m = DenseMatrix::from_rows(rows, d).ok()?;
    if m.rows() < d || rank(&m) < d {
        return None;
    }
    let idx = crate::numerics::independent_rows(&m);
    if idx.len() != d {
        return None;
    }
    let sq = m.select_rows(&idx);
    let b: Vec<f64> = idx.iter().map(|&i| rhs[i]).collect();
    let x = solve_linear(&sq, &b).ok()?;
    // Remaining (dependent) equalities must hold as well.
    let r = m.mul_vec(&x);
    if r.iter().zip(rhs).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs())) {
        return None;
    }
    Some(x)
}
