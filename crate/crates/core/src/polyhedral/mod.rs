//! Constraint-represented convex sets, their tangent/normal/critical cones, face
//! enumeration, projections and a small exact LP oracle.

mod cones;
mod lp;
mod projection;
mod sets;
pub(crate) mod simplex;

pub use cones::{cone_is_trivial, critical_cone, enumerate_faces, normal_cone_at, tangent_cone, GeneratedCone};
pub use lp::{lp_solve, LpSolution, LpStatus, Sense};
pub use projection::{cone_distance, project_box, project_polyhedron, ConeFit};
pub use sets::{BoxSet, Face, PolyhedralCone, Polyhedron, ACTIVE_TOL};
pub use simplex::{LinearProgram, LpOutcome};

#[cfg(test)]
mod tests;
