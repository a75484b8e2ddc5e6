use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{nlp_equivalence, KktPoint, NlpProblem, NlpReport};
use crate::error::Result;
use crate::functions::{Polynomial, ScalarFunction};
use crate::numerics::vector::dot;
use crate::numerics::DenseMatrix;
use crate::rng::{gaussian_vector, substream};

/// Instances whose cone-quadratic minimum is this close to zero are skipped.
const DEGENERATE_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub label: String,
    pub problem: NlpProblem,
    pub point: KktPoint,
}

fn poly(p: Polynomial) -> ScalarFunction {
    ScalarFunction::from_polynomial(p)
}

/// `min x₁² + x₂²` s.t. `1 − x₁ − x₂ ≤ 0`, at `x̄ = (1/2, 1/2)`, `ȳ = 1`.
pub fn halfplane_qp() -> FamilyInstance {
    let obj = Polynomial::from_terms(2, &[(1.0, &[2, 0]), (1.0, &[0, 2])]);
    let g = Polynomial::affine(&[-1.0, -1.0], 1.0);
    let problem = NlpProblem::new(2, 0, poly(obj), vec![poly(g)]).expect("valid fixture");
    let point = KktPoint::new(&problem, vec![0.5, 0.5], vec![1.0]).expect("KKT point");
    FamilyInstance {
        label: "halfplane-qp".into(),
        problem,
        point,
    }
}

/// The `halfplane_qp` constraint stated twice; multipliers split evenly.
pub fn duplicated_constraint() -> FamilyInstance {
    let obj = Polynomial::from_terms(2, &[(1.0, &[2, 0]), (1.0, &[0, 2])]);
    let g = Polynomial::affine(&[-1.0, -1.0], 1.0);
    let problem = NlpProblem::new(2, 0, poly(obj), vec![poly(g.clone()), poly(g)]).expect("valid fixture");
    let point = KktPoint::new(&problem, vec![0.5, 0.5], vec![0.5, 0.5]).expect("KKT point");
    FamilyInstance {
        label: "duplicated-constraint".into(),
        problem,
        point,
    }
}

/// `min −x²` s.t. `x ∈ [−1, 1]` at the interior stationary point 0.
pub fn indefinite_hessian() -> FamilyInstance {
    let obj = Polynomial::from_terms(1, &[(-1.0, &[2])]);
    let cons = vec![
        poly(Polynomial::affine(&[1.0], -1.0)),
        poly(Polynomial::affine(&[-1.0], -1.0)),
    ];
    let problem = NlpProblem::new(1, 0, poly(obj), cons).expect("valid fixture");
    let point = KktPoint::new(&problem, vec![0.0], vec![0.0, 0.0]).expect("KKT point");
    FamilyInstance {
        label: "indefinite-hessian".into(),
        problem,
        point,
    }
}

#[derive(Clone, Copy)]
enum Role {
    Equality,
    Strong,
    Weak,
    Inactive,
}

/// One convex instance with n ≤ 4, m ≤ 5 and a planted KKT point. The objective is
/// `½(x − x̄)ᵀQ(x − x̄) + cᵀx` with `Q = LLᵀ` of random rank; inequality constraints may
/// carry a term `½‖x − x̄‖²`. Some gradients are copies or combinations of earlier active
/// ones, so strict MFCQ fails on part of the family.
fn random_instance(seed: u64, index: u64) -> Result<FamilyInstance> {
    let mut rng = substream(seed, index);
    let n = rng.random_range(1..=4usize);
    let m = rng.random_range(0..=5usize);
    let s = rng.random_range(0..=m.min(n.saturating_sub(1)));
    let xbar = gaussian_vector(&mut rng, n);
    let rank = rng.random_range(0..=n);
    let l = DenseMatrix::from_row_major(n, rank, gaussian_vector(&mut rng, n * rank))?;
    let q = l.matmul(&l.transpose());

    let mut grads: Vec<Vec<f64>> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut y = Vec::new();
    let mut cons = Vec::new();
    for i in 0..m {
        let role = if i < s {
            Role::Equality
        } else {
            match rng.random_range(0..4) {
                0 | 1 => Role::Strong,
                2 => Role::Weak,
                _ => Role::Inactive,
            }
        };
        let a = if !active.is_empty() && rng.random_bool(0.3) {
            let j = active[rng.random_range(0..active.len())];
            let k = active[rng.random_range(0..active.len())];
            let (s1, s2) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            grads[j].iter().zip(&grads[k]).map(|(u, v)| s1 * u + s2 * v).collect()
        } else {
            gaussian_vector(&mut rng, n)
        };
        let (yi, slack) = match role {
            Role::Equality => (rng.random_range(-2.0..2.0), 0.0),
            Role::Strong => (rng.random_range(0.5..2.0), 0.0),
            Role::Weak => (0.0, 0.0),
            Role::Inactive => (0.0, rng.random_range(0.5..2.0)),
        };
        let curvature = if matches!(role, Role::Equality) || rng.random_bool(0.5) {
            0.0
        } else {
            1.0
        };
        if !matches!(role, Role::Inactive) {
            active.push(i);
        }
        cons.push(constraint(&a, &xbar, curvature, slack));
        grads.push(a);
        y.push(yi);
    }
    let mut c = vec![0.0; n];
    for (a, &yi) in grads.iter().zip(&y) {
        c.iter_mut().zip(a).for_each(|(ci, ai)| *ci -= yi * ai);
    }
    let objective = quadratic(q, c, xbar.clone());
    let problem = NlpProblem::new(n, s, objective, cons)?;
    let point = KktPoint::new(&problem, xbar, y)?;
    Ok(FamilyInstance {
        label: format!("random-{index}"),
        problem,
        point,
    })
}

/// `aᵀ(x − x̄) + (curvature/2)‖x − x̄‖² − slack`.
fn constraint(a: &[f64], xbar: &[f64], curvature: f64, slack: f64) -> ScalarFunction {
    let n = a.len();
    let (a1, a2, x1, x2) = (a.to_vec(), a.to_vec(), xbar.to_vec(), xbar.to_vec());
    ScalarFunction::new(n, move |x| {
        let d: Vec<f64> = x.iter().zip(&x1).map(|(u, v)| u - v).collect();
        dot(&a1, &d) + 0.5 * curvature * dot(&d, &d) - slack
    })
    .with_gradient(move |x| {
        a2.iter()
            .zip(x.iter().zip(&x2))
            .map(|(ai, (u, v))| ai + curvature * (u - v))
            .collect()
    })
    .with_hessian(move |_| DenseMatrix::identity(n).scale(curvature))
}

/// `½(x − x̄)ᵀQ(x − x̄) + cᵀx`.
fn quadratic(q: DenseMatrix, c: Vec<f64>, xbar: Vec<f64>) -> ScalarFunction {
    let n = c.len();
    let (q1, q2, q3) = (q.clone(), q.clone(), q);
    let (c1, c2, x1, x2) = (c.clone(), c, xbar.clone(), xbar);
    ScalarFunction::new(n, move |x| {
        let d: Vec<f64> = x.iter().zip(&x1).map(|(u, v)| u - v).collect();
        0.5 * dot(&d, &q1.mul_vec(&d)) + dot(&c1, x)
    })
    .with_gradient(move |x| {
        let d: Vec<f64> = x.iter().zip(&x2).map(|(u, v)| u - v).collect();
        q2.mul_vec(&d).iter().zip(&c2).map(|(a, b)| a + b).collect()
    })
    .with_hessian(move |_| q3.clone())
}

pub fn random_family(count: usize, seed: u64) -> Result<Vec<FamilyInstance>> {
    (0..count as u64).map(|i| random_instance(seed, i)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyCheck {
    pub total: usize,
    pub checked: usize,
    pub skipped: usize,
    pub mismatches: Vec<String>,
    pub smf_failures: usize,
    pub sosc_failures: usize,
    pub unique_zero: usize,
    pub reports: Vec<NlpReport>,
}

impl FamilyCheck {
    /// Runs the equivalence check on every instance; `|σ| < 1e-7` counts as degenerate.
    pub fn run(instances: &[FamilyInstance]) -> Result<Self> {
        let mut out = FamilyCheck {
            total: instances.len(),
            checked: 0,
            skipped: 0,
            mismatches: Vec::new(),
            smf_failures: 0,
            sosc_failures: 0,
            unique_zero: 0,
            reports: Vec::new(),
        };
        for inst in instances {
            let r = nlp_equivalence(&inst.problem, &inst.point)?;
            if r.sigma.abs() < DEGENERATE_TOL {
                out.skipped += 1;
            } else {
                out.checked += 1;
                out.smf_failures += usize::from(!r.smf);
                out.sosc_failures += usize::from(!r.sosc);
                out.unique_zero += usize::from(r.subreg);
                if (r.smf && r.sosc) != r.subreg {
                    out.mismatches.push(inst.label.clone());
                }
            }
            out.reports.push(r);
        }
        Ok(out)
    }
}
