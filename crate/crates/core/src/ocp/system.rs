use serde::{Deserialize, Serialize};

use super::{ControlProblem, DiscreteTriple, LocalDerivatives};
use crate::error::{Error, Result};
use crate::geq::{GeneralizedEquation, SetPart, SmoothMap, TIE_TOL};
use crate::numerics::vector::{all_finite, norm_inf};
use crate::numerics::{BandMatrix, DenseMatrix};
use crate::polyhedral::BoxSet;

/// Natural-map residual at which the discrete solve stops.
pub const NATURAL_TOL: f64 = 1e-10;
const MAX_ITER: usize = 50;

/// An unknown of the discrete system: node index (y: 1..=N, p: 0..N) or cell index (u).
#[derive(Debug, Clone, Copy)]
enum Var {
    Y(usize, usize),
    P(usize, usize),
    U(usize, usize),
}

/// Spec ordering `(y¹ … y^N, p⁰ … p^{N−1}, u⁰ … u^{N−1})`.
fn global_index(v: Var, n: usize, m: usize, steps: usize) -> usize {
    match v {
        Var::Y(i, c) => (i - 1) * n + c,
        Var::P(i, c) => n * steps + i * n + c,
        Var::U(i, c) => 2 * n * steps + i * m + c,
    }
}

/// Time-blocked ordering `(p^i, u^i, y^{i+1})` per cell, which keeps the Jacobian banded.
fn band_index(v: Var, n: usize, m: usize) -> usize {
    let b = 2 * n + m;
    match v {
        Var::P(i, c) => i * b + c,
        Var::U(i, c) => i * b + n + c,
        Var::Y(i, c) => (i - 1) * b + n + m + c,
    }
}

/// Residual rows, each paired with an unknown: the y-row of cell i with `y^{i+1}`, the
/// p-row with `p^i`, the u-row with `u^i`.
struct Residual {
    rows: Vec<(Var, f64)>,
}

fn locals(cp: &ControlProblem, tri: &DiscreteTriple, i: usize) -> (LocalDerivatives, LocalDerivatives) {
    let (y, u) = (&tri.y[i], &tri.u[i]);
    (cp.local(y, u, &tri.p[i + 1]), cp.local(y, u, &tri.p[i]))
}

/// `(y^{i+1} − y^i)/h − g(y^i, u^i)`, `(p^{i+1} − p^i)/h + ∇_y H(y^i, u^i, p^{i+1})`,
/// `∇_u H(y^i, u^i, p^i)`, with their Jacobian entries passed to `jac(row, col, value)`.
fn assemble(cp: &ControlProblem, tri: &DiscreteTriple, mut jac: Option<&mut dyn FnMut(Var, Var, f64)>) -> Residual {
    let (n, m, steps) = (cp.n(), cp.m(), tri.n_steps);
    let inv_h = steps as f64;
    let mut rows = Vec::with_capacity(steps * (2 * n + m));
    for i in 0..steps {
        let (a, b) = locals(cp, tri, i);
        for r in 0..n {
            let row = Var::Y(i + 1, r);
            rows.push((row, (tri.y[i + 1][r] - tri.y[i][r]) * inv_h - a.g[r]));
            if let Some(j) = jac.as_deref_mut() {
                j(row, Var::Y(i + 1, r), inv_h);
                for c in 0..n {
                    if i >= 1 {
                        let d = if c == r { inv_h } else { 0.0 };
                        j(row, Var::Y(i, c), -d - a.gy[(r, c)]);
                    }
                }
                for c in 0..m {
                    j(row, Var::U(i, c), -a.gu[(r, c)]);
                }
            }
        }
        for r in 0..n {
            let row = Var::P(i, r);
            rows.push((row, (tri.p[i + 1][r] - tri.p[i][r]) * inv_h + a.hy[r]));
            if let Some(j) = jac.as_deref_mut() {
                j(row, Var::P(i, r), -inv_h);
                for c in 0..n {
                    if i + 1 < steps {
                        let d = if c == r { inv_h } else { 0.0 };
                        j(row, Var::P(i + 1, c), d + a.gy[(c, r)]);
                    }
                    if i >= 1 {
                        j(row, Var::Y(i, c), a.hyy[(r, c)]);
                    }
                }
                for c in 0..m {
                    j(row, Var::U(i, c), a.hyu[(r, c)]);
                }
            }
        }
        for r in 0..m {
            let row = Var::U(i, r);
            rows.push((row, b.hu[r]));
            if let Some(j) = jac.as_deref_mut() {
                for c in 0..n {
                    if i >= 1 {
                        j(row, Var::Y(i, c), b.huy[(r, c)]);
                    }
                    j(row, Var::P(i, c), b.gu[(c, r)]);
                }
                for c in 0..m {
                    j(row, Var::U(i, c), b.huu[(r, c)]);
                }
            }
        }
    }
    Residual { rows }
}

fn value(tri: &DiscreteTriple, v: Var) -> f64 {
    match v {
        Var::Y(i, c) => tri.y[i][c],
        Var::P(i, c) => tri.p[i][c],
        Var::U(i, c) => tri.u[i][c],
    }
}

fn value_mut(tri: &mut DiscreteTriple, v: Var) -> &mut f64 {
    match v {
        Var::Y(i, c) => &mut tri.y[i][c],
        Var::P(i, c) => &mut tri.p[i][c],
        Var::U(i, c) => &mut tri.u[i][c],
    }
}

fn all_vars(n: usize, m: usize, steps: usize) -> impl Iterator<Item = Var> {
    (0..steps).flat_map(move |i| {
        (0..n)
            .map(move |c| Var::Y(i + 1, c))
            .chain((0..n).map(move |c| Var::P(i, c)))
            .chain((0..m).map(move |c| Var::U(i, c)))
    })
}

impl DiscreteTriple {
    /// The unknown vector `(y¹ … y^N, p⁰ … p^{N−1}, u⁰ … u^{N−1})`.
    pub fn to_unknowns(&self) -> Vec<f64> {
        let (n, m) = (self.y[0].len(), self.u[0].len());
        let mut z = vec![0.0; self.n_steps * (2 * n + m)];
        for v in all_vars(n, m, self.n_steps) {
            z[global_index(v, n, m, self.n_steps)] = value(self, v);
        }
        z
    }

    pub fn from_unknowns(n_steps: usize, n: usize, m: usize, z: &[f64]) -> Result<Self> {
        if z.len() != n_steps * (2 * n + m) {
            return Err(Error::DimensionMismatch(format!(
                "{} unknowns for N = {n_steps}",
                z.len()
            )));
        }
        let mut tri = Self::zeros(n_steps, n, m);
        for v in all_vars(n, m, n_steps) {
            *value_mut(&mut tri, v) = z[global_index(v, n, m, n_steps)];
        }
        Ok(tri)
    }
}

fn full_box(cp: &ControlProblem, steps: usize) -> BoxSet {
    let (n, m) = (cp.n(), cp.m());
    let dim = steps * (2 * n + m);
    let mut lower = vec![f64::NEG_INFINITY; dim];
    let mut upper = vec![f64::INFINITY; dim];
    for i in 0..steps {
        for c in 0..m {
            let k = global_index(Var::U(i, c), n, m, steps);
            lower[k] = cp.u_box().lower[c];
            upper[k] = cp.u_box().upper[c];
        }
    }
    BoxSet::new(lower, upper).expect("control box is valid")
}

/// The discrete optimality system as a generalized equation with a dense Jacobian,
/// `h = 1/N`. Meant for small N; [`solve_discrete_os`] uses a banded solver instead.
pub fn build_discrete_system(cp: &ControlProblem, n_steps: usize) -> Result<GeneralizedEquation> {
    if n_steps < 2 {
        return Err(Error::InvalidInput(format!("need N ≥ 2, got {n_steps}")));
    }
    let (n, m) = (cp.n(), cp.m());
    let dim = n_steps * (2 * n + m);
    let (c1, c2) = (cp.clone(), cp.clone());
    let smooth = SmoothMap::new(dim, dim, move |z| {
        let tri = DiscreteTriple::from_unknowns(n_steps, n, m, z).expect("length checked by caller");
        let mut out = vec![0.0; dim];
        for (v, r) in assemble(&c1, &tri, None).rows {
            out[global_index(v, n, m, n_steps)] = r;
        }
        out
    })
    .with_jacobian(move |z| {
        let tri = DiscreteTriple::from_unknowns(n_steps, n, m, z).expect("length checked by caller");
        let mut jm = DenseMatrix::zeros(dim, dim);
        let mut sink = |r: Var, c: Var, v: f64| {
            jm[(global_index(r, n, m, n_steps), global_index(c, n, m, n_steps))] += v;
        };
        assemble(&c2, &tri, Some(&mut sink));
        jm
    });
    GeneralizedEquation::new(smooth, SetPart::BoxNormalCone(full_box(cp, n_steps)), None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcpSolve {
    pub triple: DiscreteTriple,
    pub iterations: usize,
    pub residual: f64,
}

/// Semismooth Newton on the natural map `Φ(z) = z − P_C(z − f(z))` of the discrete system,
/// with B-Jacobian rows as in the generic solver and a banded LU per step. Starts from
/// the warm start, or from zero.
pub fn solve_discrete_os(cp: &ControlProblem, n_steps: usize, warm_start: Option<&DiscreteTriple>) -> Result<OcpSolve> {
    if n_steps < 2 {
        return Err(Error::InvalidInput(format!("need N ≥ 2, got {n_steps}")));
    }
    let (n, m) = (cp.n(), cp.m());
    let dim = n_steps * (2 * n + m);
    let bw = 2 * (2 * n + m);
    let mut tri = match warm_start {
        Some(w) if w.n_steps == n_steps => w.clone(),
        Some(w) => w.resample(n_steps),
        None => DiscreteTriple::zeros(n_steps, n, m),
    };
    tri.y[0].iter_mut().for_each(|v| *v = 0.0);
    tri.p[n_steps].iter_mut().for_each(|v| *v = 0.0);
    let (lo, hi) = (&cp.u_box().lower, &cp.u_box().upper);
    let mut last = f64::INFINITY;
    for k in 0..=MAX_ITER {
        let mut band = BandMatrix::zeros(dim, bw, bw);
        let mut sink = |r: Var, c: Var, v: f64| band.add(band_index(r, n, m), band_index(c, n, m), v);
        let res = assemble(cp, &tri, Some(&mut sink));
        let mut phi = vec![0.0; dim];
        for &(v, r) in &res.rows {
            let row = band_index(v, n, m);
            phi[row] = match v {
                Var::U(i, c) => {
                    let z = tri.u[i][c] - r;
                    let outside = z < lo[c] - TIE_TOL || z > hi[c] + TIE_TOL;
                    if outside {
                        for col in row.saturating_sub(bw)..(row + bw + 1).min(dim) {
                            let cur = band.get(row, col);
                            if cur != 0.0 {
                                band.add(row, col, -cur);
                            }
                        }
                        band.add(row, row, 1.0);
                    }
                    tri.u[i][c] - z.clamp(lo[c], hi[c])
                }
                _ => r,
            };
        }
        last = norm_inf(&phi);
        if !last.is_finite() || !all_finite(&phi) {
            break;
        }
        if last <= NATURAL_TOL {
            return Ok(OcpSolve {
                triple: tri,
                iterations: k,
                residual: last,
            });
        }
        if k == MAX_ITER {
            break;
        }
        let rhs: Vec<f64> = phi.iter().map(|v| -v).collect();
        let d = match band.solve(&rhs) {
            Ok(d) => d,
            Err(e) => {
                return Err(Error::NonConvergence(format!(
                    "N = {n_steps}: Newton matrix {e} at iteration {k}, residual {last:e}"
                )))
            }
        };
        for v in all_vars(n, m, n_steps) {
            *value_mut(&mut tri, v) += d[band_index(v, n, m)];
        }
    }
    Err(Error::NonConvergence(format!(
        "N = {n_steps}: natural-map residual {last:e} after {MAX_ITER} iterations"
    )))
}
