use crate::combinatorics::Patterns;
use crate::error::{cap, Error, Result};
use crate::numerics::vector::{dist2, norm_inf};
use crate::numerics::{lstsq_min_norm, DenseMatrix};

use super::SetPart;

/// Cap on bounded or sign-constrained coordinates in [`avi_solve`].
pub const AVI_MAX_BOUNDED: usize = 20;
const SIGN_TOL: f64 = 1e-10;

#[derive(Clone, Copy)]
enum Slot {
    Fixed,
    Lower,
    Free,
    Upper,
}

/// All pattern solutions of `0 ∈ q + M z + N_C(z)` for box-like C.
///
/// Each bounded coordinate is fixed at a bound or left free; free coordinates solve
/// `(q + M z)_i = 0`. Singular patterns contribute the solution nearest `anchor`.
pub fn avi_solutions(m: &DenseMatrix, q: &[f64], c: &SetPart, anchor: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = q.len();
    if m.rows() != n || m.cols() != n || anchor.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "avi: M is {}x{}, q has {n}, anchor has {}",
            m.rows(),
            m.cols(),
            anchor.len()
        )));
    }
    let b = c
        .as_box(n)
        .ok_or(Error::Unsupported("avi_solve needs a box or KKT normal cone"))?;
    let slots: Vec<Vec<Slot>> = (0..n)
        .map(|i| {
            let mut s = Vec::with_capacity(3);
            if b.lower[i] == b.upper[i] {
                s.push(Slot::Fixed);
                return s;
            }
            if b.lower[i].is_finite() {
                s.push(Slot::Lower);
            }
            s.push(Slot::Free);
            if b.upper[i].is_finite() {
                s.push(Slot::Upper);
            }
            s
        })
        .collect();
    let bounded = (0..n)
        .filter(|&i| b.lower[i].is_finite() || b.upper[i].is_finite())
        .count();
    cap("avi bounded coordinates", AVI_MAX_BOUNDED, bounded)?;

    let scale = 1.0 + norm_inf(q).max(m.max_abs());
    let tol = SIGN_TOL * scale;
    let radices: Vec<u8> = slots.iter().map(|s| s.len() as u8).collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for digits in Patterns::new(radices) {
        let pattern: Vec<Slot> = digits.iter().zip(&slots).map(|(&d, s)| s[d as usize]).collect();
        let mut z = anchor.to_vec();
        let mut free = Vec::new();
        for (i, slot) in pattern.iter().enumerate() {
            match slot {
                Slot::Lower | Slot::Fixed => z[i] = b.lower[i],
                Slot::Upper => z[i] = b.upper[i],
                Slot::Free => free.push(i),
            }
        }
        if !free.is_empty() {
            // Solve M_FF (z_F − a_F) = −(q + M z)_F with min-norm correction.
            let w = residual(m, q, &z);
            let rhs: Vec<f64> = free.iter().map(|&i| -w[i]).collect();
            let mff = m.select_rows(&free).select_cols(&free);
            let d = lstsq_min_norm(&mff, &rhs);
            for (k, &i) in free.iter().enumerate() {
                z[i] += d[k];
            }
        }
        let w = residual(m, q, &z);
        let ok = pattern.iter().enumerate().all(|(i, slot)| match slot {
            Slot::Free => w[i].abs() <= tol && z[i] >= b.lower[i] - tol && z[i] <= b.upper[i] + tol,
            Slot::Fixed => true,
            Slot::Lower => w[i] >= -tol,
            Slot::Upper => w[i] <= tol,
        });
        if ok && !out.iter().any(|s| dist2(s, &z) <= 1e-12 * scale) {
            out.push(z);
        }
    }
    Ok(out)
}

/// The solution of `0 ∈ q + M z + N_C(z)` nearest to `nearest_to`.
pub fn avi_solve(m: &DenseMatrix, q: &[f64], c: &SetPart, nearest_to: &[f64]) -> Result<Vec<f64>> {
    avi_solutions(m, q, c, nearest_to)?
        .into_iter()
        .min_by(|a, b| dist2(a, nearest_to).total_cmp(&dist2(b, nearest_to)))
        .ok_or(Error::NoSolution)
}

fn residual(m: &DenseMatrix, q: &[f64], z: &[f64]) -> Vec<f64> {
    let mut w = m.mul_vec(z);
    for (wi, qi) in w.iter_mut().zip(q) {
        *wi += qi;
    }
    w
}
