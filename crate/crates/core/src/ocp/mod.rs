//! Optimal control on [0, 1]: `min ∫ φ(y, u)` with `ẏ = g(y, u)`, `y(0) = 0`, `u(t) ∈ U`.
//! Euler discretization of the optimality system, a banded semismooth Newton solver,
//! the residual `w_N` and the error-versus-N study.

mod study;
mod system;
#[cfg(test)]
mod tests;

pub use study::{
    convergence_experiment, fit_order, residual_w_norm, x_distance, ConvergenceStudy, LqSolution, Trajectory,
};
pub use system::{build_discrete_system, solve_discrete_os, OcpSolve, NATURAL_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{Polynomial, ScalarFunction};
use crate::numerics::DenseMatrix;
use crate::polyhedral::BoxSet;
use crate::rng::{seeded, uniform_box};

const ORACLE_TOL: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct ControlProblem {
    n: usize,
    m: usize,
    phi: ScalarFunction,
    g: Vec<ScalarFunction>,
    u_box: BoxSet,
}

/// Values and derivatives of g and of `H = φ + pᵀg` at one (y, u, p).
#[derive(Debug, Clone)]
pub(crate) struct LocalDerivatives {
    pub g: Vec<f64>,
    pub gy: DenseMatrix,
    pub gu: DenseMatrix,
    pub hy: Vec<f64>,
    pub hu: Vec<f64>,
    pub hyy: DenseMatrix,
    pub hyu: DenseMatrix,
    pub huy: DenseMatrix,
    pub huu: DenseMatrix,
}

impl ControlProblem {
    /// φ and each g_k are functions of the joint vector (y, u). Oracles are compared with
    /// finite differences at the origin and at seeded points of `[-1, 1]^{n+m}`.
    pub fn new(n: usize, m: usize, phi: ScalarFunction, g: Vec<ScalarFunction>, u_box: BoxSet) -> Result<Self> {
        if g.len() != n || u_box.dim() != m || n == 0 || m == 0 {
            return Err(Error::DimensionMismatch(format!(
                "need n = {n} dynamics components and a control box of dimension m = {m}"
            )));
        }
        if phi.nvars() != n + m || g.iter().any(|gk| gk.nvars() != n + m) {
            return Err(Error::DimensionMismatch("oracles must take (y, u)".into()));
        }
        let mut rng = seeded(0x0c9);
        let mut points = vec![vec![0.0; n + m]];
        points.extend((0..3).map(|_| uniform_box(&mut rng, n + m, 1.0)));
        for z in &points {
            for (k, f) in std::iter::once(&phi).chain(&g).enumerate() {
                let worst = f.derivative_check(z);
                if worst > ORACLE_TOL {
                    return Err(Error::CrossCheck(format!("oracle {k} off by {worst:e} at {z:?}")));
                }
            }
        }
        Ok(Self { n, m, phi, g, u_box })
    }

    /// Polynomial cost and dynamics in the variables (y, u).
    pub fn from_polynomials(n: usize, m: usize, phi: Polynomial, g: Vec<Polynomial>, u_box: BoxSet) -> Result<Self> {
        Self::new(
            n,
            m,
            ScalarFunction::from_polynomial(phi),
            g.into_iter().map(ScalarFunction::from_polynomial).collect(),
            u_box,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn u_box(&self) -> &BoxSet {
        &self.u_box
    }

    pub fn dynamics(&self, y: &[f64], u: &[f64]) -> Vec<f64> {
        let z = [y, u].concat();
        self.g.iter().map(|gk| gk.value(&z)).collect()
    }

    pub(crate) fn local(&self, y: &[f64], u: &[f64], p: &[f64]) -> LocalDerivatives {
        let (n, m) = (self.n, self.m);
        let z = [y, u].concat();
        let ys: Vec<usize> = (0..n).collect();
        let us: Vec<usize> = (n..n + m).collect();
        let mut grad = self.phi.gradient(&z);
        let mut hess = self.phi.hessian(&z);
        let mut g = Vec::with_capacity(n);
        let mut jac_rows = Vec::with_capacity(n);
        for (gk, &pk) in self.g.iter().zip(p) {
            g.push(gk.value(&z));
            let gr = gk.gradient(&z);
            grad.iter_mut().zip(&gr).for_each(|(a, b)| *a += pk * b);
            if pk != 0.0 {
                hess = hess.add(&gk.hessian(&z).scale(pk));
            }
            jac_rows.push(gr);
        }
        let jac = DenseMatrix::from_rows(&jac_rows, n + m).expect("gradient length n + m");
        LocalDerivatives {
            g,
            gy: jac.select_cols(&ys),
            gu: jac.select_cols(&us),
            hy: grad[..n].to_vec(),
            hu: grad[n..].to_vec(),
            hyy: hess.select_rows(&ys).select_cols(&ys),
            hyu: hess.select_rows(&ys).select_cols(&us),
            huy: hess.select_rows(&us).select_cols(&ys),
            huu: hess.select_rows(&us).select_cols(&us),
        }
    }
}

/// `(H, ∇_y H, ∇_u H)` with `H(y, u, p) = φ(y, u) + pᵀ g(y, u)`.
pub fn hamiltonian_grads(cp: &ControlProblem, y: &[f64], u: &[f64], p: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    if y.len() != cp.n || p.len() != cp.n || u.len() != cp.m {
        return Err(Error::DimensionMismatch("hamiltonian arguments".into()));
    }
    let z = [y, u].concat();
    let h = cp.phi.value(&z) + cp.g.iter().zip(p).map(|(gk, pk)| pk * gk.value(&z)).sum::<f64>();
    let d = cp.local(y, u, p);
    Ok((h, d.hy, d.hu))
}

/// Euler-grid values: `y⁰ … y^N`, `p⁰ … p^N` at nodes, `u⁰ … u^{N−1}` on cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTriple {
    pub n_steps: usize,
    pub y: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
}

impl DiscreteTriple {
    pub fn zeros(n_steps: usize, n: usize, m: usize) -> Self {
        Self {
            n_steps,
            y: vec![vec![0.0; n]; n_steps + 1],
            p: vec![vec![0.0; n]; n_steps + 1],
            u: vec![vec![0.0; m]; n_steps],
        }
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n_steps as f64
    }

    /// Piecewise-linear y and p, piecewise-constant (right-continuous) u.
    pub fn y_at(&self, t: f64) -> Vec<f64> {
        lerp_nodes(&self.y, t)
    }

    pub fn p_at(&self, t: f64) -> Vec<f64> {
        lerp_nodes(&self.p, t)
    }

    pub fn u_at(&self, t: f64) -> Vec<f64> {
        self.u[self.cell(t)].clone()
    }

    pub(crate) fn cell(&self, t: f64) -> usize {
        ((t * self.n_steps as f64).floor().max(0.0) as usize).min(self.n_steps - 1)
    }

    /// Samples this grid function on a grid of `n_steps` cells (u at cell midpoints) and
    /// restores the boundary values.
    pub fn resample(&self, n_steps: usize) -> Self {
        let h = 1.0 / n_steps as f64;
        let mut out = Self {
            n_steps,
            y: (0..=n_steps).map(|i| self.y_at(i as f64 * h)).collect(),
            p: (0..=n_steps).map(|i| self.p_at(i as f64 * h)).collect(),
            u: (0..n_steps).map(|i| self.u_at((i as f64 + 0.5) * h)).collect(),
        };
        out.y[0].iter_mut().for_each(|v| *v = 0.0);
        out.p[n_steps].iter_mut().for_each(|v| *v = 0.0);
        out
    }
}

fn lerp_nodes(nodes: &[Vec<f64>], t: f64) -> Vec<f64> {
    let n_steps = nodes.len() - 1;
    let s = (t * n_steps as f64).clamp(0.0, n_steps as f64);
    let i = (s.floor() as usize).min(n_steps - 1);
    let w = s - i as f64;
    nodes[i]
        .iter()
        .zip(&nodes[i + 1])
        .map(|(a, b)| (1.0 - w) * a + w * b)
        .collect()
}

/// φ = ((y − 1)² + u²)/2, g = u, with control box `[lo, hi]`.
fn tracking_problem(lo: f64, hi: f64) -> ControlProblem {
    let phi = Polynomial::from_terms(2, &[(0.5, &[2, 0]), (-1.0, &[1, 0]), (0.5, &[0, 0]), (0.5, &[0, 2])]);
    let g = Polynomial::from_terms(2, &[(1.0, &[0, 1])]);
    ControlProblem::from_polynomials(1, 1, phi, vec![g], BoxSet::new(vec![lo], vec![hi]).expect("valid box"))
        .expect("valid fixture")
}

/// Tracking problem with `U = [−0.6, 0.6]`; the bound is active on an initial interval.
pub fn clipped_tracking() -> ControlProblem {
    tracking_problem(-0.6, 0.6)
}

/// The same problem with `U = R`, solvable in closed form (see [`LqSolution`]).
pub fn lq_unconstrained() -> ControlProblem {
    tracking_problem(f64::NEG_INFINITY, f64::INFINITY)
}
