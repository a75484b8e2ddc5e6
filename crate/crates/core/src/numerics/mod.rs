//! Small dense linear-algebra kernel: matrices, factorizations, nullspaces and
//! extreme singular/eigen values.

mod banded;
mod decomp;
mod matrix;
pub mod vector;

pub use banded::BandMatrix;
pub use decomp::{
    independent_rows, inverse, lstsq_min_norm, nullspace_basis, qr_thin, range_basis, rank, singular_values,
    smallest_singular_value, solve_linear, spectral_norm, svd, symmetric_eigen, symmetric_eigen_extremes,
    EigenExtremes, SmallestSingular, Svd, PIVOT_TOL, RANK_TOL,
};
pub use matrix::DenseMatrix;

#[cfg(test)]
mod tests;
