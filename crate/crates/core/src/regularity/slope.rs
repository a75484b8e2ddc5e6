use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sphere_points;
use crate::error::{cap, Error, Result};
use crate::geq::{GeneralizedEquation, SetPart};
use crate::numerics::vector::{dist2, sub};

const OUTER_SAMPLES: usize = 1000;
const INNER_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    /// `(ρ, inf-sup value)` per level, ρ decreasing.
    pub levels: Vec<(f64, f64)>,
    /// The value at the final (smallest) level.
    pub value: f64,
}

/// Graph points `(x, y)` of `x ↦ f(x) + F(x)` over the given x samples (all stored
/// points for a finite graph).
fn graph_points(ge: &GeneralizedEquation, xs: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let mut out = Vec::new();
    match &ge.set_part {
        SetPart::ZeroMap => {
            for x in xs {
                out.push((x.clone(), ge.eval(x)));
            }
        }
        SetPart::FiniteSelection(maps) => {
            for x in xs {
                let fx = ge.eval(x);
                for g in maps {
                    let y = fx.iter().zip(g.eval(x)).map(|(a, b)| a + b).collect();
                    out.push((x.clone(), y));
                }
            }
        }
        SetPart::ExplicitGraph(points) => {
            for (x, y) in points {
                let fx = ge.eval(x);
                out.push((x.clone(), fx.iter().zip(y).map(|(a, b)| a + b).collect()));
            }
        }
        _ => return Err(Error::Unsupported("nonlocal slope needs a sampleable graph")),
    }
    Ok(out)
}

/// Points of the ball of radius r around c: a uniform grid in 1-D, rings in 2-D.
fn ball_points(c: &[f64], r: f64, count: usize) -> Vec<Vec<f64>> {
    match c.len() {
        1 => (0..count)
            .map(|i| vec![c[0] - r + 2.0 * r * (i as f64 + 0.5) / count as f64])
            .collect(),
        _ => {
            let rings = 20;
            let per_ring = count.div_ceil(rings);
            let dirs = sphere_points(2, per_ring, 0);
            (1..=rings)
                .flat_map(|k| {
                    let t = r * k as f64 / rings as f64;
                    dirs.iter()
                        .map(move |d| vec![c[0] + t * d[0], c[1] + t * d[1]])
                        .collect::<Vec<_>>()
                })
                .collect()
        }
    }
}

/// The inf-sup quantity whose limit as ρ ↓ 0 is `1 / subreg`:
/// inf over graph points (x, y) with `0 < ‖x − x̄‖ < ρ`, `‖y − ȳ‖ < ρ` of
/// sup over graph points (u, v) ≠ (x, y) of `(‖y − ȳ‖ − ‖v − ȳ‖) / max(‖u − x‖, ρ‖v − y‖)`.
pub fn nonlocal_slope_estimate(ge: &GeneralizedEquation, rho: f64, shrink_steps: usize) -> Result<SlopeEstimate> {
    let xbar = ge
        .reference_point
        .as_deref()
        .ok_or_else(|| Error::Hypothesis("nonlocal slope needs x̄".into()))?;
    cap("nonlocal slope dimension", 2, xbar.len())?;
    if !(rho > 0.0) {
        return Err(Error::InvalidInput("ρ must be positive".into()));
    }
    let ybar = &ge.reference_value;
    let mut levels = Vec::new();
    for step in 0..=shrink_steps {
        let r = rho * 0.5f64.powi(step as i32);
        let is_finite_graph = matches!(ge.set_part, SetPart::ExplicitGraph(_));
        let outer_x = if is_finite_graph {
            Vec::new()
        } else {
            ball_points(xbar, r, OUTER_SAMPLES)
        };
        let mut inner_x = if is_finite_graph {
            Vec::new()
        } else {
            ball_points(xbar, 2.0 * r, INNER_SAMPLES)
        };
        inner_x.push(xbar.to_vec());
        let outer: Vec<(Vec<f64>, Vec<f64>)> = graph_points(ge, &outer_x)?
            .into_iter()
            .filter(|(x, y)| {
                let dx = dist2(x, xbar);
                dx > 0.0 && dx < r && dist2(y, ybar) < r
            })
            .collect();
        let inner = graph_points(ge, &inner_x)?;
        let value = outer
            .par_iter()
            .map(|(x, y)| {
                let ny = dist2(y, ybar);
                inner
                    .iter()
                    .filter(|(u, v)| u != x || v != y)
                    .map(|(u, v)| {
                        let denom = dist2(u, x).max(r * crate::numerics::vector::norm2(&sub(v, y)));
                        (ny - dist2(v, ybar)) / denom
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect::<Vec<f64>>()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        levels.push((r, value));
    }
    let value = levels.last().map(|l| l.1).unwrap_or(f64::NAN);
    Ok(SlopeEstimate { levels, value })
}
