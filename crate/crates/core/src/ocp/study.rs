use serde::{Deserialize, Serialize};

use super::{solve_discrete_os, ControlProblem, DiscreteTriple};
use crate::error::{Error, Result};
use crate::numerics::vector::{dist_inf, norm_inf, sub};

/// A time-continuous triple (y, p, u) on [0, 1] with the derivatives of y and p.
pub trait Trajectory {
    fn y(&self, t: f64) -> Vec<f64>;
    fn y_dot(&self, t: f64) -> Vec<f64>;
    fn p(&self, t: f64) -> Vec<f64>;
    fn p_dot(&self, t: f64) -> Vec<f64>;
    fn u(&self, t: f64) -> Vec<f64>;
}

fn slope(nodes: &[Vec<f64>], i: usize, inv_h: f64) -> Vec<f64> {
    nodes[i + 1]
        .iter()
        .zip(&nodes[i])
        .map(|(b, a)| (b - a) * inv_h)
        .collect()
}

impl Trajectory for DiscreteTriple {
    fn y(&self, t: f64) -> Vec<f64> {
        self.y_at(t)
    }

    fn y_dot(&self, t: f64) -> Vec<f64> {
        slope(&self.y, self.cell(t), self.n_steps as f64)
    }

    fn p(&self, t: f64) -> Vec<f64> {
        self.p_at(t)
    }

    fn p_dot(&self, t: f64) -> Vec<f64> {
        slope(&self.p, self.cell(t), self.n_steps as f64)
    }

    fn u(&self, t: f64) -> Vec<f64> {
        self.u_at(t)
    }
}

/// Closed-form solution of the unconstrained tracking problem:
/// `y = 1 − cosh t + tanh(1) sinh t`, `u = sinh(1 − t)/cosh 1`, `p = −u`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LqSolution;

impl Trajectory for LqSolution {
    fn y(&self, t: f64) -> Vec<f64> {
        vec![1.0 - t.cosh() + 1f64.tanh() * t.sinh()]
    }

    fn y_dot(&self, t: f64) -> Vec<f64> {
        self.u(t)
    }

    fn p(&self, t: f64) -> Vec<f64> {
        vec![-self.u(t)[0]]
    }

    fn p_dot(&self, t: f64) -> Vec<f64> {
        vec![(1.0 - t).cosh() / 1f64.cosh()]
    }

    fn u(&self, t: f64) -> Vec<f64> {
        vec![(1.0 - t).sinh() / 1f64.cosh()]
    }
}

/// Grid realization of the W^{1,∞} × W^{1,∞} × L^∞ distance: the largest node error
/// `‖y^i − ȳ(t_i)‖∞ + ‖p^i − p̄(t_i)‖∞` plus the largest per-cell sum of slope deviations
/// of y and p and value deviation of u, each cell sampled at `samples_per_cell` midpoints.
pub fn x_distance(coarse: &DiscreteTriple, reference: &dyn Trajectory, samples_per_cell: usize) -> f64 {
    let steps = coarse.n_steps;
    let h = coarse.step();
    let nodes = (0..=steps)
        .map(|i| {
            let t = i as f64 * h;
            dist_inf(&coarse.y[i], &reference.y(t)) + dist_inf(&coarse.p[i], &reference.p(t))
        })
        .fold(0.0, f64::max);
    let cells = (0..steps)
        .map(|i| {
            let (sy, sp) = (slope(&coarse.y, i, steps as f64), slope(&coarse.p, i, steps as f64));
            let (mut dy, mut dp, mut du) = (0.0f64, 0.0f64, 0.0f64);
            for j in 0..samples_per_cell {
                let t = (i as f64 + (j as f64 + 0.5) / samples_per_cell as f64) * h;
                dy = dy.max(dist_inf(&sy, &reference.y_dot(t)));
                dp = dp.max(dist_inf(&sp, &reference.p_dot(t)));
                du = du.max(dist_inf(&coarse.u[i], &reference.u(t)));
            }
            dy + dp + du
        })
        .fold(0.0, f64::max);
    nodes + cells
}

/// `‖w_N‖_Y`: per cell, the sup over `fine_factor + 1` points of `[t_i, t_{i+1}]` of
/// `‖g(yⁱ,uⁱ) − g(y(t),uⁱ)‖∞ + ‖∇_yH(yⁱ,uⁱ,pⁱ⁺¹) − ∇_yH(y(t),uⁱ,p(t))‖∞
///  + ‖∇_uH(yⁱ,uⁱ,pⁱ) − ∇_uH(y(t),uⁱ,p(t))‖∞` with y, p piecewise linear.
pub fn residual_w_norm(cp: &ControlProblem, triple: &DiscreteTriple, fine_factor: usize) -> Result<f64> {
    if fine_factor == 0 {
        return Err(Error::InvalidInput("fine_factor must be positive".into()));
    }
    let mut worst: f64 = 0.0;
    for i in 0..triple.n_steps {
        let u = &triple.u[i];
        let at_next = cp.local(&triple.y[i], u, &triple.p[i + 1]);
        let at_node = cp.local(&triple.y[i], u, &triple.p[i]);
        for k in 0..=fine_factor {
            let w = k as f64 / fine_factor as f64;
            let y: Vec<f64> = triple.y[i]
                .iter()
                .zip(&triple.y[i + 1])
                .map(|(a, b)| (1.0 - w) * a + w * b)
                .collect();
            let p: Vec<f64> = triple.p[i]
                .iter()
                .zip(&triple.p[i + 1])
                .map(|(a, b)| (1.0 - w) * a + w * b)
                .collect();
            let here = cp.local(&y, u, &p);
            let total = norm_inf(&sub(&at_next.g, &here.g))
                + norm_inf(&sub(&at_next.hy, &here.hy))
                + norm_inf(&sub(&at_node.hu, &here.hu));
            worst = worst.max(total);
        }
    }
    Ok(worst)
}

/// Least-squares fit of `log e = log c − order · log N`; none with fewer than two points
/// or a nonpositive error.
pub fn fit_order(n_list: &[usize], errors: &[f64]) -> Option<(f64, f64)> {
    if n_list.len() < 2 || n_list.len() != errors.len() || errors.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Some((-slope, (my - slope * mx).exp()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub n_list: Vec<usize>,
    pub n_ref: usize,
    pub errors: Vec<f64>,
    pub w_norms: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Whether the interpolated warm start failed and the solve restarted from zero.
    pub fallback_start: Vec<bool>,
    pub fitted_order: Option<f64>,
    pub fitted_c: Option<f64>,
    #[serde(skip)]
    pub solutions: Vec<DiscreteTriple>,
    #[serde(skip)]
    pub reference: Option<DiscreteTriple>,
}

impl ConvergenceStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,error,w_norm,iterations\n");
        for k in 0..self.n_list.len() {
            out.push_str(&format!(
                "{},{:e},{:e},{}\n",
                self.n_list[k], self.errors[k], self.w_norms[k], self.iterations[k]
            ));
        }
        out
    }
}

fn solve_with_fallback(
    cp: &ControlProblem,
    n: usize,
    warm: Option<&DiscreteTriple>,
) -> Result<(super::OcpSolve, bool)> {
    match solve_discrete_os(cp, n, warm) {
        Ok(s) => Ok((s, false)),
        Err(_) if warm.is_some() => Ok((solve_discrete_os(cp, n, None)?, true)),
        Err(e) => Err(e),
    }
}

/// Solves for each N (increasing, each warm-started from the previous solution), solves
/// the reference at `n_ref` and measures [`x_distance`] against it.
pub fn convergence_experiment(cp: &ControlProblem, n_list: &[usize], n_ref: usize) -> Result<ConvergenceStudy> {
    let Some(&n_max) = n_list.last() else {
        return Err(Error::InvalidInput("empty N list".into()));
    };
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] < 2 {
        return Err(Error::InvalidInput(
            "N list must be strictly increasing from at least 2".into(),
        ));
    }
    if n_ref < 8 * n_max || n_list.iter().any(|&n| n_ref % n != 0) {
        return Err(Error::InvalidInput(format!(
            "N_ref = {n_ref} must be at least 8·{n_max} and a multiple of every N"
        )));
    }
    let mut solutions = Vec::with_capacity(n_list.len());
    let mut iterations = Vec::new();
    let mut fallback_start = Vec::new();
    for &n in n_list {
        let (s, fell_back) = solve_with_fallback(cp, n, solutions.last())?;
        iterations.push(s.iterations);
        fallback_start.push(fell_back);
        solutions.push(s.triple);
    }
    let (reference, _) = solve_with_fallback(cp, n_ref, solutions.last())?;
    let reference = reference.triple;
    let errors: Vec<f64> = solutions
        .iter()
        .map(|s| x_distance(s, &reference, n_ref / s.n_steps))
        .collect();
    let w_norms = solutions
        .iter()
        .map(|s| residual_w_norm(cp, s, 16))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_order(n_list, &errors);
    Ok(ConvergenceStudy {
        n_list: n_list.to_vec(),
        n_ref,
        errors,
        w_norms,
        iterations,
        fallback_start,
        fitted_order: fit.map(|f| f.0),
        fitted_c: fit.map(|f| f.1),
        solutions,
        reference: Some(reference),
    })
}
