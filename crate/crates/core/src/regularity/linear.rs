use serde::{Deserialize, Serialize};

use super::Norm;
use crate::error::{cap, Error, Result};
use crate::geq::{avi_solve, SetPart};
use crate::numerics::vector::{norm1, norm2};
use crate::numerics::{inverse, lstsq_min_norm, qr_thin, rank, smallest_singular_value, spectral_norm, DenseMatrix};
use crate::polyhedral::{BoxSet, LinearProgram, LpOutcome};

const MAX_DIM: usize = 200;
const MAX_LINF_COLS: usize = 10;
const INJECTIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMapAnalysis {
    pub domain_norm: Norm,
    pub codomain_norm: Norm,
    /// `min {‖A x‖ : ‖x‖ = 1}` in the chosen norms.
    pub sigma_min: f64,
    pub injective: bool,
    #[serde(with = "crate::serde_ext::real")]
    pub subreg_modulus: f64,
    #[serde(with = "crate::serde_ext::real")]
    pub graphical_outer_norm: f64,
    #[serde(with = "crate::serde_ext::real")]
    pub frechet_coderiv_inner_norm: f64,
}

fn reciprocal(sigma: f64, injective: bool) -> f64 {
    if injective {
        1.0 / sigma
    } else {
        f64::INFINITY
    }
}

/// Subregularity modulus, graphical-derivative outer norm and Fréchet-coderivative inner
/// norm of a linear map, each by its own computation.
pub fn linear_map_moduli(a: &DenseMatrix, domain_norm: Norm, codomain_norm: Norm) -> Result<LinearMapAnalysis> {
    cap("linear map rows", MAX_DIM, a.rows())?;
    cap("linear map columns", MAX_DIM, a.cols())?;
    let (sigma, outer, coder) = match (domain_norm, codomain_norm) {
        (Norm::L2, Norm::L2) => {
            let sigma = if a.rows() >= a.cols() {
                smallest_singular_value(a)?.value
            } else {
                0.0
            };
            let injective = sigma > INJECTIVE_TOL;
            let outer = if injective {
                // DF⁻¹(v) = R⁻¹Qᵀv on the range.
                let (_, r) = qr_thin(a);
                spectral_norm(&inverse(&r)?)
            } else {
                f64::INFINITY
            };
            (sigma, outer, coderivative_inner_norm_linear(a))
        }
        (Norm::Linf, cod) => {
            let sigma = linf_sphere_min(a, cod, false)?;
            let injective = sigma > INJECTIVE_TOL;
            if injective {
                (sigma, linf_outer_norm(a, cod), linf_coderivative_norm(a, cod))
            } else {
                (sigma, f64::INFINITY, f64::INFINITY)
            }
        }
        (Norm::L2, Norm::Linf) => {
            return Err(Error::Unsupported("ℓ₂ domain with ℓ∞ codomain"));
        }
    };
    let injective = sigma > INJECTIVE_TOL;
    Ok(LinearMapAnalysis {
        domain_norm,
        codomain_norm,
        sigma_min: sigma,
        injective,
        subreg_modulus: reciprocal(sigma, injective),
        graphical_outer_norm: outer,
        frechet_coderiv_inner_norm: coder,
    })
}

/// `sup_{‖x*‖₂ ≤ 1} min {‖y*‖₂ : Aᵀ y* = x*}`: the norm of the minimum-norm right inverse
/// of Aᵀ, or `+∞` when Aᵀ is not onto.
pub fn coderivative_inner_norm_linear(a: &DenseMatrix) -> f64 {
    let (m, n) = (a.rows(), a.cols());
    if m < n || rank(a) < n {
        return f64::INFINITY;
    }
    let at = a.transpose();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            lstsq_min_norm(&at, &e)
        })
        .collect();
    let y = DenseMatrix::from_columns(&cols, m).expect("columns have length m");
    spectral_norm(&y)
}

/// `min {‖A x‖ : ‖x‖∞ = 1}` by minimizing over each facet `x_j = 1` (the sphere is symmetric).
/// Diagonal matrices use `min |a_kk|` unless `force_facets` is set.
pub(crate) fn linf_sphere_min(a: &DenseMatrix, cod: Norm, force_facets: bool) -> Result<f64> {
    let n = a.cols();
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    if !force_facets && a.is_square() && a.is_diagonal() {
        return Ok((0..n).map(|k| a[(k, k)].abs()).fold(f64::INFINITY, f64::min));
    }
    cap("ℓ∞-domain columns", MAX_LINF_COLS, n)?;
    let mut best = f64::INFINITY;
    for j in 0..n {
        let others: Vec<usize> = (0..n).filter(|&k| k != j).collect();
        let aj = a.column(j);
        let value = match cod {
            Norm::L2 => {
                if others.is_empty() {
                    norm2(&aj)
                } else {
                    // min ½‖A_o z + a_j‖² over z ∈ [−1, 1]^{n−1} as an affine VI.
                    let ao = a.select_cols(&others);
                    let m = ao.transpose().matmul(&ao);
                    let q = ao.tr_mul_vec(&aj);
                    let c = SetPart::BoxNormalCone(BoxSet::new(vec![-1.0; n - 1], vec![1.0; n - 1])?);
                    let z = avi_solve(&m, &q, &c, &vec![0.0; n - 1])?;
                    let mut x = vec![0.0; n];
                    x[j] = 1.0;
                    for (k, &o) in others.iter().enumerate() {
                        x[o] = z[k];
                    }
                    norm2(&a.mul_vec(&x))
                }
            }
            Norm::Linf => {
                // min t s.t. −t ≤ (A x)_i ≤ t, x_j = 1, |x_k| ≤ 1.
                let mut lp = LinearProgram::new(n + 1);
                lp.objective[n] = 1.0;
                for k in 0..n {
                    lp.bounds(k, -1.0, 1.0);
                }
                lp.bounds(j, 1.0, 1.0);
                for i in 0..a.rows() {
                    let mut up = a.row(i).to_vec();
                    up.push(-1.0);
                    lp.le(up, 0.0);
                    let mut lo: Vec<f64> = a.row(i).iter().map(|v| -v).collect();
                    lo.push(-1.0);
                    lp.le(lo, 0.0);
                }
                lp.minimize()
                    .value()
                    .ok_or_else(|| Error::CrossCheck("facet LP has no optimum".into()))?
            }
        };
        best = best.min(value);
    }
    Ok(best)
}

/// `max_i sup {|u_i| : ‖A u‖ ≤ 1}` for an injective A.
fn linf_outer_norm(a: &DenseMatrix, cod: Norm) -> f64 {
    let n = a.cols();
    match cod {
        Norm::L2 => {
            // Rows of the pseudo-inverse: u = A⁺ v on the range.
            let pinv_t: Vec<Vec<f64>> = (0..a.rows())
                .map(|i| {
                    let mut e = vec![0.0; a.rows()];
                    e[i] = 1.0;
                    lstsq_min_norm(a, &e)
                })
                .collect();
            (0..n)
                .map(|j| norm2(&pinv_t.iter().map(|c| c[j]).collect::<Vec<_>>()))
                .fold(0.0, f64::max)
        }
        Norm::Linf => {
            let mut best: f64 = 0.0;
            for j in 0..n {
                let mut lp = LinearProgram::new(n);
                lp.objective[j] = 1.0;
                for i in 0..a.rows() {
                    lp.le(a.row(i).to_vec(), 1.0);
                    lp.le(a.row(i).iter().map(|v| -v).collect(), 1.0);
                }
                match lp.maximize() {
                    LpOutcome::Optimal { value, .. } => best = best.max(value),
                    _ => return f64::INFINITY,
                }
            }
            best
        }
    }
}

/// `max_j min {‖y*‖_dual : Aᵀ y* = e_j}` (the ℓ₁ ball of x* has vertices ±e_j).
fn linf_coderivative_norm(a: &DenseMatrix, cod: Norm) -> f64 {
    let (m, n) = (a.rows(), a.cols());
    let at = a.transpose();
    let mut best: f64 = 0.0;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let value = match cod {
            Norm::L2 => norm2(&lstsq_min_norm(&at, &e)),
            Norm::Linf => {
                // min Σ t s.t. Aᵀ y = e_j, |y| ≤ t.
                let mut lp = LinearProgram::new(2 * m);
                for k in 0..m {
                    lp.objective[m + k] = 1.0;
                    let mut r1 = vec![0.0; 2 * m];
                    r1[k] = 1.0;
                    r1[m + k] = -1.0;
                    lp.le(r1, 0.0);
                    let mut r2 = vec![0.0; 2 * m];
                    r2[k] = -1.0;
                    r2[m + k] = -1.0;
                    lp.le(r2, 0.0);
                }
                for (c, &ec) in e.iter().enumerate() {
                    let mut row = at.row(c).to_vec();
                    row.extend(vec![0.0; m]);
                    lp.eq(row, ec);
                }
                match lp.minimize() {
                    LpOutcome::Optimal { x, .. } => norm1(&x[..m]),
                    _ => f64::INFINITY,
                }
            }
        };
        best = best.max(value);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRadius {
    pub radius: f64,
    pub worst_b: DenseMatrix,
}

/// `σ_min(A)` with the rank-one perturbation `B = −σ u vᵀ` making A + B singular.
pub fn radius_linear(a: &DenseMatrix) -> Result<LinearRadius> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Ok(LinearRadius {
            radius: 0.0,
            worst_b: DenseMatrix::zeros(m, n),
        });
    }
    let s = smallest_singular_value(a)?;
    if s.value <= INJECTIVE_TOL {
        return Ok(LinearRadius {
            radius: 0.0,
            worst_b: DenseMatrix::zeros(m, n),
        });
    }
    let b = DenseMatrix::outer(&s.left, &s.right).scale(-s.value);
    let norm_b = spectral_norm(&b);
    if (norm_b - s.value).abs() > 1e-9 * (1.0 + s.value) {
        return Err(Error::CrossCheck(format!("‖B‖ = {norm_b}, radius = {}", s.value)));
    }
    if rank(&b) != 1 {
        return Err(Error::CrossCheck("worst perturbation is not rank one".into()));
    }
    let after = smallest_singular_value(&a.add(&b))?.value;
    if after > 1e-9 {
        return Err(Error::CrossCheck(format!("σ_min(A + B) = {after:e}")));
    }
    Ok(LinearRadius {
        radius: s.value,
        worst_b: b,
    })
}
