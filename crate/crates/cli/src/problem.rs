//! Problem files: a JSON document with a top-level `kind` of `geq`, `nlp` or `ocp`.
//!
//! Every object rejects unknown fields. Smooth maps are given as `{"builtin": name}`,
//! `{"affine": {...}}` or `{"polynomial": {...}}`; polynomial terms are `[coef, [powers]]`.

use serde::Deserialize;
use subreg_core::demos::fixtures;
use subreg_core::functions::{Polynomial, ScalarFunction};
use subreg_core::geq::{GeneralizedEquation, SetPart, SmoothMap};
use subreg_core::nlp::{self, KktPoint, NlpProblem};
use subreg_core::numerics::DenseMatrix;
use subreg_core::ocp::{self, ControlProblem};
use subreg_core::polyhedral::{BoxSet, Polyhedron};

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemFile {
    Geq(GeqSpec),
    Nlp(NlpSpec),
    Ocp(OcpSpec),
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("problem file: {e}"))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ProblemFile::Geq(_) => "geq",
            ProblemFile::Nlp(_) => "nlp",
            ProblemFile::Ocp(_) => "ocp",
        }
    }
}

pub type Term = (f64, Vec<u32>);

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialTable {
    pub vars: usize,
    /// One list of terms per output component.
    pub components: Vec<Vec<Term>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSpec {
    pub matrix: Vec<Vec<f64>>,
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MapSpec {
    Builtin(String),
    Affine(AffineSpec),
    Polynomial(PolynomialTable),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    /// `null` entries stand for −∞.
    pub lower: Vec<Option<f64>>,
    /// `null` entries stand for +∞.
    pub upper: Vec<Option<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyhedronSpec {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub aeq: Vec<Vec<f64>>,
    #[serde(default)]
    pub beq: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KktSpec {
    pub s: usize,
    pub m: usize,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    Zero,
    Box(BoxSpec),
    Nonneg,
    Polyhedron(PolyhedronSpec),
    Kkt(KktSpec),
    /// F(x) = {f_1(x), …, f_k(x)}.
    Selection(Vec<MapSpec>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeqSpec {
    pub map: MapSpec,
    #[serde(default = "zero_set")]
    pub set: SetSpec,
    #[serde(default)]
    pub reference_point: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<Vec<f64>>,
}

fn zero_set() -> SetSpec {
    SetSpec::Zero
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlpSpec {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    /// The first `equalities` constraints are equalities.
    #[serde(default)]
    pub equalities: usize,
    #[serde(default)]
    pub objective: Option<Vec<Term>>,
    #[serde(default)]
    pub constraints: Vec<Vec<Term>>,
    #[serde(default)]
    pub point: Option<PointSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcpSpec {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    /// Running cost in the variables (y, u).
    #[serde(default)]
    pub cost: Option<Vec<Term>>,
    #[serde(default)]
    pub dynamics: Vec<Vec<Term>>,
    #[serde(default)]
    pub control_box: Option<BoxSpec>,
}

pub const MAP_BUILTINS: [&str; 6] = ["x^2-1", "circle-line", "ncp", "disk-kkt", "exp-1", "cube"];

fn builtin_map(name: &str) -> Result<SmoothMap, String> {
    if name == "cube" {
        return Ok(fixtures::cube().smooth);
    }
    fixtures::newton_fixtures()
        .into_iter()
        .find(|f| f.label == name)
        .map(|f| f.ge.smooth)
        .ok_or_else(|| format!("unknown builtin map {name:?}; known: {}", MAP_BUILTINS.join(", ")))
}

fn polynomial(vars: usize, terms: &[Term]) -> Result<Polynomial, String> {
    for (_, powers) in terms {
        if powers.len() != vars {
            return Err(format!("term {powers:?} needs {vars} exponents"));
        }
    }
    let borrowed: Vec<(f64, &[u32])> = terms.iter().map(|(c, p)| (*c, p.as_slice())).collect();
    Ok(Polynomial::from_terms(vars, &borrowed))
}

fn matrix(rows: &[Vec<f64>], cols: usize) -> Result<DenseMatrix, String> {
    DenseMatrix::from_rows(rows, cols).map_err(|e| e.to_string())
}

impl MapSpec {
    pub fn build(&self) -> Result<SmoothMap, String> {
        match self {
            MapSpec::Builtin(name) => builtin_map(name),
            MapSpec::Affine(a) => {
                let cols = a.matrix.first().map_or(0, Vec::len);
                let m = matrix(&a.matrix, cols)?;
                let offset = a.offset.clone().unwrap_or_else(|| vec![0.0; m.rows()]);
                if offset.len() != m.rows() {
                    return Err(format!(
                        "offset has length {}, matrix has {} rows",
                        offset.len(),
                        m.rows()
                    ));
                }
                Ok(SmoothMap::affine(m, offset))
            }
            MapSpec::Polynomial(t) => {
                let comps = t
                    .components
                    .iter()
                    .map(|c| polynomial(t.vars, c))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SmoothMap::polynomial(comps, t.vars))
            }
        }
    }
}

fn bound(v: Option<f64>, inf: f64) -> f64 {
    v.unwrap_or(inf)
}

impl BoxSpec {
    pub fn build(&self) -> Result<BoxSet, String> {
        let lower = self.lower.iter().map(|v| bound(*v, f64::NEG_INFINITY)).collect();
        let upper = self.upper.iter().map(|v| bound(*v, f64::INFINITY)).collect();
        BoxSet::new(lower, upper).map_err(|e| e.to_string())
    }
}

impl SetSpec {
    pub fn build(&self, dim: usize) -> Result<SetPart, String> {
        Ok(match self {
            SetSpec::Zero => SetPart::ZeroMap,
            SetSpec::Box(b) => SetPart::BoxNormalCone(b.build()?),
            SetSpec::Nonneg => SetPart::BoxNormalCone(BoxSet::nonneg(dim)),
            SetSpec::Polyhedron(p) => {
                let ineq = matrix(&p.a, dim)?;
                let eq = matrix(&p.aeq, dim)?;
                let poly = Polyhedron::new(ineq, p.b.clone(), eq, p.beq.clone()).map_err(|e| e.to_string())?;
                SetPart::PolyhedralNormalCone(poly)
            }
            SetSpec::Kkt(k) => SetPart::KktCone { s: k.s, m: k.m },
            SetSpec::Selection(maps) => {
                SetPart::FiniteSelection(maps.iter().map(MapSpec::build).collect::<Result<_, _>>()?)
            }
        })
    }
}

impl GeqSpec {
    pub fn build(&self) -> Result<GeneralizedEquation, String> {
        let f = self.map.build()?;
        let c = self.set.build(f.dim_in())?;
        GeneralizedEquation::new(f, c, self.reference_point.clone()).map_err(|e| e.to_string())
    }
}

pub const NLP_BUILTINS: [&str; 3] = ["halfplane-qp", "duplicated-constraint", "indefinite-hessian"];

impl NlpSpec {
    /// The problem and, if the file names one, its KKT point.
    pub fn build(&self) -> Result<(NlpProblem, Option<KktPoint>), String> {
        if let Some(name) = &self.builtin {
            if self.n.is_some() || self.objective.is_some() || !self.constraints.is_empty() {
                return Err("a builtin NLP cannot be combined with n, objective or constraints".into());
            }
            let inst = match name.as_str() {
                "halfplane-qp" => nlp::halfplane_qp(),
                "duplicated-constraint" => nlp::duplicated_constraint(),
                "indefinite-hessian" => nlp::indefinite_hessian(),
                other => {
                    return Err(format!(
                        "unknown builtin NLP {other:?}; known: {}",
                        NLP_BUILTINS.join(", ")
                    ))
                }
            };
            let point = match &self.point {
                Some(p) => Some(KktPoint::new(&inst.problem, p.x.clone(), p.y.clone()).map_err(|e| e.to_string())?),
                None => Some(inst.point),
            };
            return Ok((inst.problem, point));
        }
        let n = self.n.ok_or("nlp problems need n or a builtin")?;
        let obj = self.objective.as_ref().ok_or("nlp problems need an objective")?;
        let objective = ScalarFunction::from_polynomial(polynomial(n, obj)?);
        let constraints = self
            .constraints
            .iter()
            .map(|c| polynomial(n, c).map(ScalarFunction::from_polynomial))
            .collect::<Result<Vec<_>, _>>()?;
        let prob = NlpProblem::new(n, self.equalities, objective, constraints).map_err(|e| e.to_string())?;
        let point = match &self.point {
            Some(p) => Some(KktPoint::new(&prob, p.x.clone(), p.y.clone()).map_err(|e| e.to_string())?),
            None => None,
        };
        Ok((prob, point))
    }
}

pub const OCP_BUILTINS: [&str; 2] = ["clipped-tracking", "lq"];

impl OcpSpec {
    pub fn build(&self) -> Result<ControlProblem, String> {
        if let Some(name) = &self.builtin {
            if self.n.is_some() || self.cost.is_some() || !self.dynamics.is_empty() || self.control_box.is_some() {
                return Err("a builtin control problem cannot be combined with other fields".into());
            }
            return match name.as_str() {
                "clipped-tracking" => Ok(ocp::clipped_tracking()),
                "lq" => Ok(ocp::lq_unconstrained()),
                other => Err(format!(
                    "unknown builtin control problem {other:?}; known: {}",
                    OCP_BUILTINS.join(", ")
                )),
            };
        }
        let (n, m) = (
            self.n.ok_or("ocp problems need n")?,
            self.m.ok_or("ocp problems need m")?,
        );
        let cost = polynomial(n + m, self.cost.as_ref().ok_or("ocp problems need a cost")?)?;
        let dynamics = self
            .dynamics
            .iter()
            .map(|g| polynomial(n + m, g))
            .collect::<Result<Vec<_>, _>>()?;
        let u_box = match &self.control_box {
            Some(b) => b.build()?,
            None => BoxSet::free(m),
        };
        ControlProblem::from_polynomials(n, m, cost, dynamics, u_box).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_geq_with_polynomial_map_and_box() {
        let text = r#"{"kind": "geq",
            "map": {"polynomial": {"vars": 1, "components": [[[1.0, [2]], [-1.0, [0]]]]}},
            "set": {"box": {"lower": [0.0], "upper": [null]}},
            "reference_point": [1.0]}"#;
        let ProblemFile::Geq(spec) = ProblemFile::parse(text).unwrap() else {
            panic!("kind")
        };
        let ge = spec.build().unwrap();
        assert_eq!(ge.eval(&[3.0]), vec![8.0]);
        assert_eq!(ge.box_domain().unwrap().upper, vec![f64::INFINITY]);
    }

    #[test]
    fn parses_selection_and_builtins() {
        let text = r#"{"kind": "geq", "map": {"affine": {"matrix": [[0.0]]}},
            "set": {"selection": [{"affine": {"matrix": [[-1.0]]}}, {"affine": {"matrix": [[1.0]]}}]},
            "reference_point": [0.0]}"#;
        let ProblemFile::Geq(spec) = ProblemFile::parse(text).unwrap() else {
            panic!("kind")
        };
        assert!(matches!(spec.build().unwrap().set_part, SetPart::FiniteSelection(ref v) if v.len() == 2));

        for name in MAP_BUILTINS {
            assert!(builtin_map(name).is_ok(), "{name}");
        }
        assert!(builtin_map("nope").is_err());
    }

    #[test]
    fn rejects_unknown_fields_and_kinds() {
        assert!(ProblemFile::parse(r#"{"kind": "geq", "map": {"builtin": "cube"}, "colour": 1}"#).is_err());
        assert!(ProblemFile::parse(r#"{"kind": "pde"}"#).is_err());
        assert!(ProblemFile::parse(r#"{"kind": "geq", "map": {"builtin": "cube", "extra": 1}}"#).is_err());
        assert!(ProblemFile::parse("{not json").is_err());
    }

    #[test]
    fn reference_point_must_solve() {
        let text = r#"{"kind": "geq", "map": {"builtin": "x^2-1"}, "reference_point": [2.0]}"#;
        let ProblemFile::Geq(spec) = ProblemFile::parse(text).unwrap() else {
            panic!("kind")
        };
        assert!(spec.build().unwrap_err().contains("not a solution"));
    }

    #[test]
    fn nlp_from_tables_and_builtin() {
        let text = r#"{"kind": "nlp", "n": 2,
            "objective": [[1.0, [2, 0]], [1.0, [0, 2]]],
            "constraints": [[[-1.0, [1, 0]], [-1.0, [0, 1]], [1.0, [0, 0]]]],
            "point": {"x": [0.5, 0.5], "y": [1.0]}}"#;
        let ProblemFile::Nlp(spec) = ProblemFile::parse(text).unwrap() else {
            panic!("kind")
        };
        let (prob, pt) = spec.build().unwrap();
        assert_eq!((prob.n(), prob.m()), (2, 1));
        assert!(pt.is_some());

        let ProblemFile::Nlp(spec) = ProblemFile::parse(r#"{"kind": "nlp", "builtin": "halfplane-qp"}"#).unwrap()
        else {
            panic!("kind")
        };
        assert!(spec.build().unwrap().1.is_some());
        let ProblemFile::Nlp(spec) =
            ProblemFile::parse(r#"{"kind": "nlp", "builtin": "halfplane-qp", "n": 2}"#).unwrap()
        else {
            panic!("kind")
        };
        assert!(spec.build().is_err());
    }

    #[test]
    fn ocp_builtin_and_tables() {
        let ProblemFile::Ocp(spec) = ProblemFile::parse(r#"{"kind": "ocp", "builtin": "clipped-tracking"}"#).unwrap()
        else {
            panic!("kind")
        };
        assert_eq!(spec.build().unwrap().n(), 1);
        let text = r#"{"kind": "ocp", "n": 1, "m": 1,
            "cost": [[0.5, [2, 0]], [-1.0, [1, 0]], [0.5, [0, 0]], [0.5, [0, 2]]],
            "dynamics": [[[1.0, [0, 1]]]],
            "control_box": {"lower": [-0.6], "upper": [0.6]}}"#;
        let ProblemFile::Ocp(spec) = ProblemFile::parse(text).unwrap() else {
            panic!("kind")
        };
        assert_eq!(spec.build().unwrap().u_box().upper, vec![0.6]);
    }
}
