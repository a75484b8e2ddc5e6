use rayon::prelude::*;

use super::{ModulusEstimate, ModulusKind, Norm};
use crate::error::{cap, Error, Result};
use crate::geq::{GeneralizedEquation, SetPart};
use crate::numerics::vector::dist2;
use crate::rng::{seeded, unit_sphere};

/// Sphere samples per radius for dimensions two and up.
pub const DEFAULT_SAMPLES: usize = 10_000;
const RATE_FLOOR: f64 = 1e-12;
const MIN_RADIUS: f64 = 1e-7;
const GROWTH_LIMIT: f64 = 10.0;

/// Unit vectors for sphere sampling: ±1 in one dimension, equally spaced angles in two,
/// the coordinate axes plus seeded uniform points otherwise.
pub fn sphere_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(4))
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / count.max(4) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut pts = Vec::with_capacity(count.max(2 * dim));
            for j in 0..dim {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; dim];
                    e[j] = s;
                    pts.push(e);
                }
            }
            let mut rng = seeded(seed);
            while pts.len() < count {
                pts.push(unit_sphere(&mut rng, dim));
            }
            pts
        }
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::InvalidInput("empty radius schedule".into()));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("radii must be strictly decreasing".into()));
    }
    if !(radii[radii.len() - 1] >= MIN_RADIUS) {
        return Err(Error::InvalidInput(format!("radii must stay ≥ {MIN_RADIUS:e}")));
    }
    Ok(())
}

fn reference(ge: &GeneralizedEquation) -> Result<&[f64]> {
    ge.reference_point
        .as_deref()
        .ok_or_else(|| Error::Hypothesis("sampling needs a reference point x̄".into()))
}

/// Points at which to evaluate: the sphere of radius r around x̄, plus stored graph points
/// of a finite graph within distance r.
fn sample_points(ge: &GeneralizedEquation, xbar: &[f64], r: f64, dirs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = dirs
        .iter()
        .map(|d| xbar.iter().zip(d).map(|(x, e)| x + r * e).collect())
        .collect();
    if let SetPart::ExplicitGraph(points) = &ge.set_part {
        for (x, _) in points {
            let d = dist2(x, xbar);
            if d > 0.0 && d <= r * (1.0 + 1e-12) {
                pts.push(x.clone());
            }
        }
    }
    pts
}

fn smallest_two(per_radius: &[f64], pick: fn(f64, f64) -> f64) -> f64 {
    let k = per_radius.len();
    if k == 1 {
        per_radius[0]
    } else {
        pick(per_radius[k - 1], per_radius[k - 2])
    }
}

pub fn displacement_rate_sample(ge: &GeneralizedEquation, radii: &[f64]) -> Result<ModulusEstimate> {
    displacement_rate_sample_with(ge, radii, DEFAULT_SAMPLES, 0)
}

/// Per radius r, the minimum over samples x with ‖x − x̄‖ = r of `d(ȳ, f(x)+F(x)) / ‖x − x̄‖`.
/// The rate is the minimum over the two smallest radii; the modulus is its reciprocal
/// (`+∞` once the rate is at most 1e-12).
pub fn displacement_rate_sample_with(
    ge: &GeneralizedEquation,
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ModulusEstimate> {
    let xbar = reference(ge)?;
    cap("displacement sampling dimension", 4, xbar.len())?;
    check_radii(radii)?;
    let dirs = sphere_points(xbar.len(), samples, seed);
    let per_radius: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let pts = sample_points(ge, xbar, r, &dirs);
            let ratios: Vec<f64> = pts
                .par_iter()
                .map(|x| ge.residual_distance(x) / dist2(x, xbar))
                .collect();
            ratios.into_iter().fold(f64::INFINITY, f64::min)
        })
        .collect();
    let rate = smallest_two(&per_radius, f64::min);
    let value = if rate <= RATE_FLOOR { f64::INFINITY } else { 1.0 / rate };
    Ok(ModulusEstimate {
        value,
        kind: ModulusKind::SampledLower,
        q_exponent: 1.0,
        domain_norm: Norm::L2,
        codomain_norm: Norm::L2,
        radii_schedule: radii.to_vec(),
        per_radius,
        rate: Some(rate),
    })
}

/// Per radius, the supremum over sphere samples of `‖x − x̄‖ / d(ȳ, f(x)+F(x))^q`; the
/// estimate is the maximum over the two smallest radii, and `+∞` when the per-radius value
/// grows by more than 10× across the schedule.
pub fn q_subreg_estimate(ge: &GeneralizedEquation, q: f64, radii: &[f64]) -> Result<ModulusEstimate> {
    if !(q > 0.0) {
        return Err(Error::InvalidInput(format!("q must be positive, got {q}")));
    }
    let xbar = reference(ge)?;
    cap("q-subregularity sampling dimension", 3, xbar.len())?;
    check_radii(radii)?;
    let dirs = sphere_points(xbar.len(), DEFAULT_SAMPLES, 0);
    let per_radius: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let pts = sample_points(ge, xbar, r, &dirs);
            let ratios: Vec<f64> = pts
                .par_iter()
                .map(|x| {
                    let res = ge.residual_distance(x);
                    let d = dist2(x, xbar);
                    if res == 0.0 {
                        f64::INFINITY
                    } else {
                        d / res.powf(q)
                    }
                })
                .collect();
            ratios.into_iter().fold(0.0, f64::max)
        })
        .collect();
    let first = per_radius[0];
    let grows = per_radius.iter().any(|v| !v.is_finite() || *v > GROWTH_LIMIT * first);
    let value = if grows {
        f64::INFINITY
    } else {
        smallest_two(&per_radius, f64::max)
    };
    Ok(ModulusEstimate {
        value,
        kind: ModulusKind::SampledLower,
        q_exponent: q,
        domain_norm: Norm::L2,
        codomain_norm: Norm::L2,
        radii_schedule: radii.to_vec(),
        per_radius,
        rate: None,
    })
}
