//! Generalized equations `0 ∈ f(x) + F(x)`: Newton-type solvers and numerical
//! certificates of strong metric subregularity.

mod combinatorics;
pub mod demos;
pub mod error;
pub mod functions;
pub mod geq;
pub mod nlp;
pub mod numerics;
pub mod ocp;
pub mod polyhedral;
pub mod regularity;
pub mod rng;
pub mod serde_ext;
pub mod solvers;

pub use error::{Error, Result};
