//! Euclidean projections onto boxes and polyhedra, and distances to finitely generated cones.

use super::sets::{BoxSet, Polyhedron, ACTIVE_TOL};
use crate::combinatorics::subsets_by_size;
use crate::error::{cap, Error, Result};
use crate::numerics::vector::{dot, norm2, norm_inf, sub};
use crate::numerics::{independent_rows, lstsq_min_norm, rank, solve_linear, DenseMatrix};

pub fn project_box(x: &[f64], b: &BoxSet) -> Vec<f64> {
    x.iter()
        .zip(b.lower.iter().zip(&b.upper))
        .map(|(v, (l, u))| v.max(*l).min(*u))
        .collect()
}

/// Nearest point of P to x by exhaustive active-set enumeration.
pub fn project_polyhedron(x: &[f64], p: &Polyhedron) -> Result<Vec<f64>> {
    let d = p.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch("projection point".into()));
    }
    cap("projection dimension", 12, d)?;
    cap("projection inequalities", 20, p.num_ineq())?;
    let scale = 1.0 + norm_inf(x);
    if p.contains(x, ACTIVE_TOL * scale) {
        return Ok(x.to_vec());
    }
    let eq_idx = independent_rows(&p.eq);
    let eq_rows: Vec<Vec<f64>> = eq_idx.iter().map(|&i| p.eq.row(i).to_vec()).collect();
    let eq_rhs: Vec<f64> = eq_idx.iter().map(|&i| p.eq_rhs[i]).collect();
    let a_rows = p.ineq.row_vecs();
    for subset in subsets_by_size(a_rows.len()) {
        if subset.len() + eq_rows.len() > d {
            break;
        }
        let mut rows = eq_rows.clone();
        let mut rhs = eq_rhs.clone();
        for &i in &subset {
            rows.push(a_rows[i].clone());
            rhs.push(p.ineq_rhs[i]);
        }
        let z;
        let mut lambda = Vec::new();
        if rows.is_empty() {
            z = x.to_vec();
        } else {
            let m = DenseMatrix::from_rows(&rows, d)?;
            if rank(&m) < rows.len() {
                continue;
            }
            // z = x - Mᵀλ with M z = rhs  ⇒  (M Mᵀ) λ = M x - rhs.
            let g = m.matmul(&m.transpose());
            let mx = m.mul_vec(x);
            let r: Vec<f64> = mx.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            let Ok(l) = solve_linear(&g, &r) else { continue };
            z = sub(x, &m.tr_mul_vec(&l));
            lambda = l;
        }
        let mult_ok = lambda[eq_rows.len().min(lambda.len())..]
            .iter()
            .all(|v| *v >= -1e-10 * scale);
        if mult_ok && p.contains(&z, ACTIVE_TOL * scale.max(1.0 + norm_inf(&z))) {
            return Ok(z);
        }
    }
    Err(Error::Infeasible)
}

/// Result of a nonnegative least-squares fit `w ≈ Gλ + Lμ`, λ ≥ 0.
#[derive(Debug, Clone)]
pub struct ConeFit {
    pub distance: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Euclidean distance from w to `cone(generators) + span(lineality)` via active-set enumeration.
pub fn cone_distance(w: &[f64], generators: &[Vec<f64>], lineality: &[Vec<f64>]) -> Result<ConeFit> {
    cap("cone generators", 20, generators.len())?;
    let d = w.len();
    let lin_m = DenseMatrix::from_rows(lineality, d)?;
    let lin_idx = independent_rows(&lin_m);
    let lin: Vec<Vec<f64>> = lin_idx.iter().map(|&i| lineality[i].clone()).collect();
    let scale = 1.0 + norm_inf(w) + generators.iter().map(|g| norm_inf(g)).fold(0.0, f64::max);
    for subset in subsets_by_size(generators.len()) {
        if subset.len() + lin.len() > d {
            break;
        }
        let cols: Vec<Vec<f64>> = subset
            .iter()
            .map(|&i| generators[i].clone())
            .chain(lin.iter().cloned())
            .collect();
        let coef = if cols.is_empty() {
            Vec::new()
        } else {
            let m = DenseMatrix::from_columns(&cols, d)?;
            if rank(&m) < cols.len() {
                continue;
            }
            lstsq_min_norm(&m, w)
        };
        let k = subset.len();
        if coef[..k].iter().any(|v| *v < -1e-12 * scale) {
            continue;
        }
        let mut fit = vec![0.0; d];
        for (c, col) in coef.iter().zip(&cols) {
            for (f, v) in fit.iter_mut().zip(col) {
                *f += c * v;
            }
        }
        let r = sub(w, &fit);
        let dual_ok = generators
            .iter()
            .enumerate()
            .filter(|(i, _)| !subset.contains(i))
            .all(|(_, g)| dot(g, &r) <= 1e-10 * scale * scale);
        if dual_ok {
            let mut lambda = vec![0.0; generators.len()];
            for (pos, &i) in subset.iter().enumerate() {
                lambda[i] = coef[pos].max(0.0);
            }
            let mut mu = vec![0.0; lineality.len()];
            for (pos, &i) in lin_idx.iter().enumerate() {
                mu[i] = coef[k + pos];
            }
            return Ok(ConeFit {
                distance: norm2(&r),
                lambda,
                mu,
            });
        }
    }
    Err(Error::CrossCheck(
        "nonnegative least squares found no optimal active set".into(),
    ))
}
