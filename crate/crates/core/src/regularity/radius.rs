use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sphere_points;
use crate::error::{cap, Error, Result};
use crate::numerics::vector::{dot, norm2, normalized};
use crate::numerics::{spectral_norm, symmetric_eigen, DenseMatrix};
use crate::polyhedral::{enumerate_faces, project_polyhedron, PolyhedralCone};
use crate::rng::{gaussian_vector, substream};

const STARTS: usize = 200;
const PG_ITERS: usize = 400;
const CROSS_TOL: f64 = 1e-6;
const SAMPLES_HIGH_DIM: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalRadius {
    pub sigma: f64,
    pub x_star: Vec<f64>,
    pub worst_b: DenseMatrix,
    pub face_eigen_min: f64,
    pub projected_gradient_min: f64,
    pub sampling_min: Option<f64>,
    pub warning: Option<String>,
}

fn quad(a: &DenseMatrix, x: &[f64]) -> f64 {
    dot(x, &a.mul_vec(x))
}

/// `min {⟨x, A x⟩ : x ∈ K, ‖x‖ = 1}` and the rank-one `B = −σ x* x*ᵀ` with
/// `⟨x*, (A + B) x*⟩ = 0`.
///
/// Three methods: restricted eigenvectors on every face of K, projected gradient from
/// 200 seeded starts, and dense sphere sampling in dimension ≤ 4. The result is the
/// smallest candidate; a sampled value more than 1e-6 below the face minimum is an error.
pub fn radius_variational(a: &DenseMatrix, k: &PolyhedralCone) -> Result<VariationalRadius> {
    let n = a.rows();
    if !a.is_square() || k.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, K lives in R^{}",
            a.rows(),
            a.cols(),
            k.dim()
        )));
    }
    cap("variational radius dimension", 8, n)?;
    cap("variational radius inequalities", 16, k.num_ineq())?;
    let asym = a.asymmetry();
    if asym > 1e-12 * a.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let cone = k.to_polyhedron();
    let project = |y: &[f64]| -> Option<Vec<f64>> {
        let p = if k.num_ineq() == 0 && k.eq.rows() == 0 {
            y.to_vec()
        } else {
            project_polyhedron(y, &cone).ok()?
        };
        (norm2(&p) > 1e-12).then(|| normalized(&p))
    };

    let (face_min, face_x) = face_candidates(a, k)?;
    let (pg_min, pg_x) = projected_gradient(a, &project);
    let sampled = if n <= 4 { Some(sampling(a, n, &project)) } else { None };

    for (label, value) in [
        ("projected gradient", Some(pg_min)),
        ("sampling", sampled.as_ref().map(|s| s.0)),
    ] {
        if let Some(v) = value {
            if v < face_min - CROSS_TOL {
                return Err(Error::CrossCheck(format!(
                    "{label} found {v} below the face-eigen minimum {face_min}"
                )));
            }
        }
    }
    let mut best = (face_min, face_x);
    if pg_min < best.0 {
        best = (pg_min, pg_x);
    }
    if let Some((v, x)) = &sampled {
        if *v < best.0 {
            best = (*v, x.clone());
        }
    }
    let (sigma, x_star) = best;
    let worst_b = DenseMatrix::outer(&x_star, &x_star).scale(-sigma);
    let norm_b = spectral_norm(&worst_b);
    if (norm_b - sigma.abs()).abs() > 1e-8 {
        return Err(Error::CrossCheck(format!("‖B‖ = {norm_b}, |σ| = {}", sigma.abs())));
    }
    let after = quad(&a.add(&worst_b), &x_star);
    if after > 1e-8 {
        return Err(Error::CrossCheck(format!("⟨x*, (A+B)x*⟩ = {after:e}")));
    }
    let warning = (sigma <= 0.0).then(|| format!("A is not positive definite on K (σ = {sigma})"));
    Ok(VariationalRadius {
        sigma,
        x_star,
        worst_b,
        face_eigen_min: face_min,
        projected_gradient_min: pg_min,
        sampling_min: sampled.map(|s| s.0),
        warning,
    })
}

/// On each face with orthonormal span basis Z, eigenvectors of ZᵀAZ mapped back and kept
/// when they (or their negatives) lie in K.
fn face_candidates(a: &DenseMatrix, k: &PolyhedralCone) -> Result<(f64, Vec<f64>)> {
    let mut best = (f64::INFINITY, Vec::new());
    for face in enumerate_faces(k)? {
        let z = &face.span_basis;
        if z.cols() == 0 {
            continue;
        }
        let restricted = z.transpose().matmul(a).matmul(z);
        let sym = restricted.add(&restricted.transpose()).scale(0.5);
        let (_, vecs) = symmetric_eigen(&sym)?;
        for c in 0..vecs.cols() {
            let x = normalized(&z.mul_vec(&vecs.column(c)));
            for s in [1.0, -1.0] {
                let xs: Vec<f64> = x.iter().map(|v| s * v).collect();
                if k.contains(&xs, 1e-9) {
                    let val = quad(a, &xs);
                    if val < best.0 {
                        best = (val, xs);
                    }
                }
            }
        }
    }
    if best.1.is_empty() {
        return Err(Error::InvalidInput("K is the zero cone".into()));
    }
    Ok(best)
}

fn projected_gradient(a: &DenseMatrix, project: &(dyn Fn(&[f64]) -> Option<Vec<f64>> + Sync)) -> (f64, Vec<f64>) {
    let n = a.rows();
    let step = 0.25 / spectral_norm(a).max(1e-12);
    let runs: Vec<Option<(f64, Vec<f64>)>> = (0..STARTS)
        .into_par_iter()
        .map(|s| {
            let mut rng = substream(0x5eed, s as u64);
            let mut x = project(&gaussian_vector(&mut rng, n))?;
            for _ in 0..PG_ITERS {
                let g = a.mul_vec(&x);
                let y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - 2.0 * step * gi).collect();
                let Some(next) = project(&y) else { break };
                let moved = next.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                x = next;
                if moved < 1e-13 {
                    break;
                }
            }
            Some((quad(a, &x), x))
        })
        .collect();
    runs.into_iter().flatten().fold(
        (f64::INFINITY, Vec::new()),
        |best, c| if c.0 < best.0 { c } else { best },
    )
}

fn sampling(a: &DenseMatrix, n: usize, project: &(dyn Fn(&[f64]) -> Option<Vec<f64>> + Sync)) -> (f64, Vec<f64>) {
    // Two dimensions: 10⁻³ angular resolution.
    let count = if n == 2 { 6284 } else { SAMPLES_HIGH_DIM };
    let pts = sphere_points(n, count, 0x5a3);
    let vals: Vec<Option<(f64, Vec<f64>)>> = pts.par_iter().map(|y| project(y).map(|x| (quad(a, &x), x))).collect();
    vals.into_iter().flatten().fold(
        (f64::INFINITY, Vec::new()),
        |best, c| if c.0 < best.0 { c } else { best },
    )
}
