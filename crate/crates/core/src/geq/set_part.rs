use crate::numerics::vector::{dist2, norm2};
use crate::polyhedral::{cone_distance, normal_cone_at, project_polyhedron, BoxSet, Polyhedron, ACTIVE_TOL};

use super::SmoothMap;

/// The set-valued part F of a generalized equation `ȳ ∈ f(x) + F(x)`.
#[derive(Debug, Clone)]
pub enum SetPart {
    /// F ≡ {0}.
    ZeroMap,
    /// F = N_B for a box B.
    BoxNormalCone(BoxSet),
    /// F = N_P for a polyhedron P.
    PolyhedralNormalCone(Polyhedron),
    /// F = N over Rⁿ × Rˢ × R₊^{m−s}, where n is the ambient dimension minus m.
    KktCone { s: usize, m: usize },
    /// F given by finitely many graph points (x, y).
    ExplicitGraph(Vec<(Vec<f64>, Vec<f64>)>),
    /// F(x) = {f_1(x), …, f_k(x)}.
    FiniteSelection(Vec<SmoothMap>),
    /// F ≡ P, a constant polyhedral set (inequality systems f(x) ∈ −P).
    ConstantSet(Polyhedron),
}

impl SetPart {
    pub fn name(&self) -> &'static str {
        match self {
            SetPart::ZeroMap => "zero",
            SetPart::BoxNormalCone(_) => "box-normal-cone",
            SetPart::PolyhedralNormalCone(_) => "polyhedral-normal-cone",
            SetPart::KktCone { .. } => "kkt-cone",
            SetPart::ExplicitGraph(_) => "explicit-graph",
            SetPart::FiniteSelection(_) => "finite-selection",
            SetPart::ConstantSet(_) => "constant-set",
        }
    }

    /// The box C with F = N_C, for the box-like variants over R^dim.
    pub fn as_box(&self, dim: usize) -> Option<BoxSet> {
        match self {
            SetPart::BoxNormalCone(b) => Some(b.clone()),
            SetPart::KktCone { s, m } => {
                let free = dim.checked_sub(m - s)?;
                let mut lower = vec![f64::NEG_INFINITY; dim];
                for l in lower.iter_mut().skip(free) {
                    *l = 0.0;
                }
                Some(BoxSet {
                    lower,
                    upper: vec![f64::INFINITY; dim],
                })
            }
            _ => None,
        }
    }

    /// The polyhedron C with F = N_C, when F is a normal cone of a polyhedral set.
    pub fn normal_cone_domain(&self, dim: usize) -> Option<Polyhedron> {
        match self {
            SetPart::ZeroMap => Some(Polyhedron::whole_space(dim)),
            SetPart::PolyhedralNormalCone(p) => Some(p.clone()),
            _ => self.as_box(dim).map(|b| Polyhedron::from_box(&b)),
        }
    }

    /// Euclidean distance from `target` to F(x) (+∞ when F(x) is empty).
    pub fn distance_to(&self, x: &[f64], target: &[f64]) -> f64 {
        match self {
            SetPart::ZeroMap => norm2(target),
            SetPart::BoxNormalCone(_) | SetPart::KktCone { .. } => {
                let b = self.as_box(x.len()).expect("box-like variant");
                box_normal_distance(&b, x, target)
            }
            // 0 lies in every normal cone, so no cone computation is needed.
            SetPart::PolyhedralNormalCone(p) if target.iter().all(|&t| t == 0.0) => {
                if p.contains(x, ACTIVE_TOL) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            SetPart::PolyhedralNormalCone(p) => match normal_cone_at(p, x) {
                None => f64::INFINITY,
                Some(cone) => cone.distance(target).unwrap_or(f64::INFINITY),
            },
            SetPart::ConstantSet(p) => match project_polyhedron(target, p) {
                Ok(z) => dist2(&z, target),
                Err(_) => f64::INFINITY,
            },
            SetPart::FiniteSelection(maps) => maps
                .iter()
                .map(|m| dist2(&m.eval(x), target))
                .fold(f64::INFINITY, f64::min),
            SetPart::ExplicitGraph(points) => points
                .iter()
                .filter(|(px, _)| dist2(px, x) <= 1e-12)
                .map(|(_, py)| dist2(py, target))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// One element of F(x) nearest to `target`, when F(x) is nonempty.
    pub fn nearest_element(&self, x: &[f64], target: &[f64]) -> Option<Vec<f64>> {
        match self {
            SetPart::ZeroMap => Some(vec![0.0; target.len()]),
            SetPart::BoxNormalCone(_) | SetPart::KktCone { .. } => {
                let b = self.as_box(x.len())?;
                box_normal_nearest(&b, x, target)
            }
            SetPart::PolyhedralNormalCone(p) => {
                let cone = normal_cone_at(p, x)?;
                let fit = cone_distance(target, &cone.generators, &cone.lineality).ok()?;
                let mut fitted = vec![0.0; target.len()];
                let weighted = fit.lambda.iter().zip(&cone.generators);
                for (w, g) in weighted.chain(fit.mu.iter().zip(&cone.lineality)) {
                    for (f, v) in fitted.iter_mut().zip(g) {
                        *f += w * v;
                    }
                }
                Some(fitted)
            }
            SetPart::ConstantSet(p) => project_polyhedron(target, p).ok(),
            SetPart::FiniteSelection(maps) => maps
                .iter()
                .map(|m| m.eval(x))
                .min_by(|a, b| dist2(a, target).total_cmp(&dist2(b, target))),
            SetPart::ExplicitGraph(points) => points
                .iter()
                .filter(|(px, _)| dist2(px, x) <= 1e-12)
                .map(|(_, py)| py.clone())
                .min_by(|a, b| dist2(a, target).total_cmp(&dist2(b, target))),
        }
    }
}

/// Per-coordinate normal cone interval of [l, u] at t, or `None` if t is outside.
fn normal_interval(l: f64, u: f64, t: f64) -> Option<(f64, f64)> {
    if t < l - ACTIVE_TOL || t > u + ACTIVE_TOL {
        return None;
    }
    let at_l = l.is_finite() && (t - l).abs() <= ACTIVE_TOL;
    let at_u = u.is_finite() && (t - u).abs() <= ACTIVE_TOL;
    Some(match (at_l, at_u) {
        (true, true) => (f64::NEG_INFINITY, f64::INFINITY),
        (true, false) => (f64::NEG_INFINITY, 0.0),
        (false, true) => (0.0, f64::INFINITY),
        (false, false) => (0.0, 0.0),
    })
}

fn box_normal_nearest(b: &BoxSet, x: &[f64], target: &[f64]) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let (lo, hi) = normal_interval(b.lower[i], b.upper[i], x[i])?;
        out.push(target[i].max(lo).min(hi));
    }
    Some(out)
}

fn box_normal_distance(b: &BoxSet, x: &[f64], target: &[f64]) -> f64 {
    match box_normal_nearest(b, x, target) {
        Some(n) => dist2(&n, target),
        None => f64::INFINITY,
    }
}
