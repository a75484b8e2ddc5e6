//! Scripted analyses of classic small examples, each checked against its known verdict.

pub mod fixtures;
#[cfg(test)]
mod tests;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geq::{GeneralizedEquation, SetPart};
use crate::numerics::DenseMatrix;
use crate::regularity::{
    displacement_rate_sample, frechet_coderivative_inner_norm, graphical_derivative_outer_norm, linear_map_moduli,
    linf_sphere_min, nonlocal_slope_estimate, polyhedral_isolated_point_test, q_subreg_estimate, AffineMap, Norm,
};

const RADII: [f64; 3] = [1e-3, 1e-5, 1e-7];
/// Size of the truncated graph {(1/k, 0)}.
pub const ISOLATED_POINTS: usize = 2000;
pub const DEFAULT_DIAG_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoName {
    MinusXX,
    EllInftyDiag,
    IsolatedPointsGraph,
    CubeRoot,
    SumCounterexample,
}

impl DemoName {
    pub const ALL: [DemoName; 5] = [
        DemoName::MinusXX,
        DemoName::EllInftyDiag,
        DemoName::IsolatedPointsGraph,
        DemoName::CubeRoot,
        DemoName::SumCounterexample,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DemoName::MinusXX => "minus-x-x",
            DemoName::EllInftyDiag => "ell-infty-diag",
            DemoName::IsolatedPointsGraph => "isolated-points-graph",
            DemoName::CubeRoot => "cube-root",
            DemoName::SumCounterexample => "sum-counterexample",
        }
    }
}

impl fmt::Display for DemoName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DemoName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DemoName::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown demo {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub check: String,
    pub expected: String,
    #[serde(with = "crate::serde_ext::real")]
    pub computed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub name: DemoName,
    pub rows: Vec<VerdictRow>,
    pub all_pass: bool,
}

impl DemoReport {
    fn new(name: DemoName, rows: Vec<VerdictRow>) -> Self {
        let all_pass = rows.iter().all(|r| r.pass);
        Self { name, rows, all_pass }
    }

    /// Plain-text table: check, expected, computed, verdict.
    pub fn to_table(&self) -> String {
        let w = self.rows.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
        let e = self.rows.iter().map(|r| r.expected.len()).max().unwrap_or(8).max(8);
        let mut out = format!(
            "{}\n{:<w$}  {:<e$}  {:<22}  verdict\n",
            self.name, "check", "expected", "computed"
        );
        for r in &self.rows {
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{:<w$}  {:<e$}  {:<22}  {verdict}\n",
                r.check,
                r.expected,
                fmt_real(r.computed)
            ));
        }
        out
    }
}

fn fmt_real(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "+inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.12}")
    }
}

fn row(check: &str, expected: &str, computed: f64, pass: bool) -> VerdictRow {
    VerdictRow {
        check: check.into(),
        expected: expected.into(),
        computed,
        pass,
    }
}

fn near(check: &str, target: f64, tol: f64, computed: f64) -> VerdictRow {
    row(
        check,
        &format!("{target} ± {tol}"),
        computed,
        (computed - target).abs() <= tol,
    )
}

fn infinite(check: &str, computed: f64) -> VerdictRow {
    row(check, "+inf", computed, computed == f64::INFINITY)
}

fn flag(check: &str, expected: bool, computed: bool) -> VerdictRow {
    row(
        check,
        &expected.to_string(),
        if computed { 1.0 } else { 0.0 },
        computed == expected,
    )
}

fn linearization(ge: &GeneralizedEquation, xbar: &[f64]) -> AffineMap {
    AffineMap::linearization(ge.jacobian(xbar), &ge.eval(xbar), xbar)
}

/// Runs the named demo; `n` sets the dimension of `ell-infty-diag` and is ignored otherwise.
pub fn run_demo(name: DemoName, n: Option<usize>) -> Result<DemoReport> {
    let rows = match name {
        DemoName::MinusXX => minus_x_x()?,
        DemoName::EllInftyDiag => ell_infty_diag(n.unwrap_or(DEFAULT_DIAG_N))?,
        DemoName::IsolatedPointsGraph => isolated_points_graph()?,
        DemoName::CubeRoot => cube_root()?,
        DemoName::SumCounterexample => sum_counterexample()?,
    };
    Ok(DemoReport::new(name, rows))
}

fn minus_x_x() -> Result<Vec<VerdictRow>> {
    let ge = fixtures::minus_x_x();
    let sampled = displacement_rate_sample(&ge, &RADII)?.value;
    let zero = AffineMap::linearization(DenseMatrix::zeros(1, 1), &[0.0], &[0.0]);
    let outer = graphical_derivative_outer_norm(&zero, &ge.set_part, &[0.0], &[0.0])?;
    let coder = frechet_coderivative_inner_norm(&zero, &ge.set_part, &[0.0], &[0.0])?;
    let slope = nonlocal_slope_estimate(&ge, 1.0, 3)?.value;
    Ok(vec![
        flag("strongly subregular", true, sampled.is_finite()),
        near("sampled modulus", 1.0, 0.02, sampled),
        near("graphical derivative outer norm", 1.0, 1e-12, outer),
        infinite("Frechet coderivative inner norm", coder),
        near("nonlocal slope", 1.0, 0.05, slope),
    ])
}

fn ell_infty_diag(n: usize) -> Result<Vec<VerdictRow>> {
    if n == 0 {
        return Err(Error::InvalidInput("ell-infty-diag needs N ≥ 1".into()));
    }
    let a = fixtures::harmonic_diagonal(n);
    let r = linear_map_moduli(&a, Norm::Linf, Norm::L2)?;
    let target = n as f64;
    let mut rows = vec![
        near("modulus (linf -> l2)", target, 1e-12 * target, r.subreg_modulus),
        near(
            "graphical derivative outer norm",
            target,
            1e-9 * target,
            r.graphical_outer_norm,
        ),
        near(
            "Frechet coderivative inner norm",
            target,
            1e-9 * target,
            r.frechet_coderiv_inner_norm,
        ),
    ];
    if n <= 10 {
        let facets = 1.0 / linf_sphere_min(&a, Norm::L2, true)?;
        rows.push(near("modulus by facet minimization", target, 1e-9 * target, facets));
    }
    Ok(rows)
}

fn isolated_points_graph() -> Result<Vec<VerdictRow>> {
    let ge = fixtures::isolated_points_graph(ISOLATED_POINTS);
    let sampled = displacement_rate_sample(&ge, &[1e-1, 1e-2, 1e-3])?.value;
    let slope = nonlocal_slope_estimate(&ge, 1.0, 3)?.value;
    Ok(vec![
        flag("strongly subregular", false, sampled.is_finite()),
        infinite("sampled modulus", sampled),
        row("nonlocal slope", "< 0.05", slope, slope < 0.05),
    ])
}

fn cube_root() -> Result<Vec<VerdictRow>> {
    let ge = fixtures::cube();
    let q1 = q_subreg_estimate(&ge, 1.0, &RADII)?.value;
    let q3 = q_subreg_estimate(&ge, 1.0 / 3.0, &RADII)?.value;
    let h = linearization(&ge, &[0.0]);
    let lin = polyhedral_isolated_point_test(&h, &SetPart::ZeroMap, &[0.0], &[0.0])?;
    Ok(vec![
        infinite("modulus, q = 1", q1),
        near("modulus, q = 1/3", 1.0, 0.05, q3),
        flag("linearization strongly subregular", false, lin),
    ])
}

fn sum_counterexample() -> Result<Vec<VerdictRow>> {
    let g_big = displacement_rate_sample(&fixtures::sum_counterexample_g(), &RADII)?.value;
    let g_small = displacement_rate_sample(&fixtures::sum_counterexample_perturbation(), &RADII)?.value;
    let sum = q_subreg_estimate(&fixtures::sum_counterexample(), 1.0, &RADII)?.value;
    Ok(vec![
        near("G strongly subregular, modulus", 0.5, 0.01, g_big),
        near("g isolatedly calm, modulus", 1.0, 0.02, g_small),
        flag("g + G strongly subregular", false, sum.is_finite()),
        infinite("g + G modulus", sum),
    ])
}
