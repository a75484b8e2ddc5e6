//! Small generalized equations with known answers, shared by the gallery, the CLI
//! builtins and the integration tests.

use crate::geq::{GeneralizedEquation, SetPart, SmoothMap};
use crate::numerics::{smallest_singular_value, DenseMatrix};
use crate::polyhedral::BoxSet;
use crate::regularity::{graphical_derivative_outer_norm, AffineMap};
use crate::rng::{gaussian_vector, substream};

fn scalar(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> SmoothMap {
    SmoothMap::new(1, 1, move |x| vec![f(x[0])])
}

fn scalar_c1(
    f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    df: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> SmoothMap {
    scalar(f).with_jacobian(move |x| DenseMatrix::from_diag(&[df(x[0])]))
}

fn ge(f: SmoothMap, c: SetPart, xbar: Vec<f64>) -> GeneralizedEquation {
    GeneralizedEquation::new(f, c, Some(xbar)).expect("fixture reference point solves the GE")
}

fn signed_sqrt(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

/// F(x) = {−x, x} at 0 for 0.
pub fn minus_x_x() -> GeneralizedEquation {
    let sel = SetPart::FiniteSelection(vec![scalar(|x| -x), scalar(|x| x)]);
    ge(SmoothMap::zero(1, 1), sel, vec![0.0])
}

/// gph F = {(1/k, 0) : 1 ≤ k ≤ k_max} ∪ {(0, 0)}.
pub fn isolated_points_graph(k_max: usize) -> GeneralizedEquation {
    let mut pts: Vec<(Vec<f64>, Vec<f64>)> = (1..=k_max).map(|k| (vec![1.0 / k as f64], vec![0.0])).collect();
    pts.push((vec![0.0], vec![0.0]));
    ge(SmoothMap::zero(1, 1), SetPart::ExplicitGraph(pts), vec![0.0])
}

/// f(x) = x³ at 0.
pub fn cube() -> GeneralizedEquation {
    ge(scalar_c1(|x| x * x * x, |x| 3.0 * x * x), SetPart::ZeroMap, vec![0.0])
}

/// G(x) = {1 + x², 2x} at 0 for 0.
pub fn sum_counterexample_g() -> GeneralizedEquation {
    let sel = SetPart::FiniteSelection(vec![scalar(|x| 1.0 + x * x), scalar(|x| 2.0 * x)]);
    ge(SmoothMap::zero(1, 1), sel, vec![0.0])
}

/// The set-valued perturbation g(x) = {−1, −x} at 0 for 0.
pub fn sum_counterexample_perturbation() -> GeneralizedEquation {
    let sel = SetPart::FiniteSelection(vec![scalar(|_| -1.0), scalar(|x| -x)]);
    ge(SmoothMap::zero(1, 1), sel, vec![0.0])
}

/// (g + G)(x) = {x², 1 − x + x², 2x − 1, x}.
pub fn sum_counterexample() -> GeneralizedEquation {
    let sel = SetPart::FiniteSelection(vec![
        scalar(|x| x * x),
        scalar(|x| 1.0 - x + x * x),
        scalar(|x| 2.0 * x - 1.0),
        scalar(|x| x),
    ]);
    ge(SmoothMap::zero(1, 1), sel, vec![0.0])
}

/// A = diag(1, 1/2, …, 1/n).
pub fn harmonic_diagonal(n: usize) -> DenseMatrix {
    let d: Vec<f64> = (1..=n).map(|k| 1.0 / k as f64).collect();
    DenseMatrix::from_diag(&d)
}

/// The KKT map of `min x₁² + x₂²` s.t. `x₁ + x₂ ≥ 1` in z = (x, y), at (1/2, 1/2, 1).
pub fn halfplane_kkt() -> GeneralizedEquation {
    let m = DenseMatrix::from_rows(&[vec![2.0, 0.0, -1.0], vec![0.0, 2.0, -1.0], vec![1.0, 1.0, 0.0]], 3).expect("3x3");
    ge(
        SmoothMap::affine(m, vec![0.0, 0.0, -1.0]),
        SetPart::KktCone { s: 2, m: 3 },
        vec![0.5, 0.5, 1.0],
    )
}

/// A generalized equation with a known exact modulus (ℓ₂ norms).
pub struct KnownModulus {
    pub label: &'static str,
    pub ge: GeneralizedEquation,
    pub modulus: f64,
}

pub fn known_moduli() -> Vec<KnownModulus> {
    let linear = |a: DenseMatrix| {
        let n = a.cols();
        ge(SmoothMap::linear(a), SetPart::ZeroMap, vec![0.0; n])
    };
    vec![
        KnownModulus {
            label: "minus-x-x",
            ge: minus_x_x(),
            modulus: 1.0,
        },
        KnownModulus {
            label: "identity-2",
            ge: linear(DenseMatrix::identity(2)),
            modulus: 1.0,
        },
        KnownModulus {
            label: "diag-1-third",
            ge: linear(DenseMatrix::from_diag(&[1.0, 1.0 / 3.0])),
            modulus: 3.0,
        },
        KnownModulus {
            label: "two-x-plus-normal-cone",
            ge: ge(
                SmoothMap::linear(DenseMatrix::from_diag(&[2.0])),
                SetPart::BoxNormalCone(BoxSet::nonneg(1)),
                vec![0.0],
            ),
            modulus: 0.5,
        },
        KnownModulus {
            label: "sum-g",
            ge: sum_counterexample_g(),
            modulus: 0.5,
        },
        KnownModulus {
            label: "shear-3",
            ge: linear(DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 0.5]], 2).expect("2x2")),
            modulus: 2.0,
        },
    ]
}

/// A solver fixture with a known solution and a start inside its convergence region.
pub struct NewtonFixture {
    pub label: &'static str,
    pub ge: GeneralizedEquation,
    pub start: Vec<f64>,
}

/// Smooth (single-valued or KKT) fixtures whose solutions are strongly subregular.
pub fn newton_fixtures() -> Vec<NewtonFixture> {
    let quadratic = ge(scalar_c1(|x| x * x - 1.0, |x| 2.0 * x), SetPart::ZeroMap, vec![1.0]);
    let circle_line = ge(
        SmoothMap::new(2, 2, |x| vec![x[0] * x[0] + x[1] * x[1] - 2.0, x[0] - x[1]]).with_jacobian(|x| {
            DenseMatrix::from_rows(&[vec![2.0 * x[0], 2.0 * x[1]], vec![1.0, -1.0]], 2).expect("2x2")
        }),
        SetPart::ZeroMap,
        vec![1.0, 1.0],
    );
    let ncp = ge(
        SmoothMap::new(2, 2, |x| vec![x[0] - 1.0 + x[1] * x[1], x[1] + x[0] * x[1]]),
        SetPart::BoxNormalCone(BoxSet::nonneg(2)),
        vec![1.0, 0.0],
    );
    let disk = ge(
        SmoothMap::new(3, 3, |v| {
            vec![
                1.0 + 2.0 * v[2] * v[0],
                1.0 + 2.0 * v[2] * v[1],
                2.0 - v[0] * v[0] - v[1] * v[1],
            ]
        }),
        SetPart::KktCone { s: 0, m: 1 },
        vec![-1.0, -1.0, 0.5],
    );
    let exp = ge(scalar_c1(|x| x.exp() - 1.0, f64::exp), SetPart::ZeroMap, vec![0.0]);
    vec![
        NewtonFixture {
            label: "x^2-1",
            ge: quadratic,
            start: vec![2.0],
        },
        NewtonFixture {
            label: "circle-line",
            ge: circle_line,
            start: vec![1.6, 0.7],
        },
        NewtonFixture {
            label: "ncp",
            ge: ncp,
            start: vec![1.3, 0.2],
        },
        NewtonFixture {
            label: "disk-kkt",
            ge: disk,
            start: vec![-0.8, -1.1, 0.7],
        },
        NewtonFixture {
            label: "exp-1",
            ge: exp,
            start: vec![1.0],
        },
    ]
}

/// Box-constrained variational inequalities for the semismooth method.
pub fn box_vi_fixtures() -> Vec<NewtonFixture> {
    let ncp = newton_fixtures()
        .into_iter()
        .find(|f| f.label == "ncp")
        .expect("ncp fixture");
    // x₁ sits at its lower bound −1; x₂ solves x₂ + x₂³/5 = 3/5.
    let x2 = {
        let mut t = 0.5f64;
        for _ in 0..60 {
            t -= (t + 0.2 * t.powi(3) - 0.6) / (1.0 + 0.6 * t * t);
        }
        t
    };
    let boxed = ge(
        SmoothMap::new(2, 2, |x| {
            vec![x[0] + 2.0 + x[1] * x[1], x[1] + 0.2 * x[1].powi(3) - 0.5 + 0.1 * x[0]]
        }),
        SetPart::BoxNormalCone(BoxSet::new(vec![-1.0; 2], vec![1.0; 2]).expect("box")),
        vec![-1.0, x2],
    );
    // x₂ = 0 is at its bound with f₂ = 1; x₁ = ln 2 is interior.
    let exp_bound = ge(
        SmoothMap::new(2, 2, |x| vec![x[0].exp() - 2.0 + x[1] * x[1], x[1] + 1.0 + x[0] * x[1]]),
        SetPart::BoxNormalCone(BoxSet::nonneg(2)),
        vec![std::f64::consts::LN_2, 0.0],
    );
    vec![
        NewtonFixture {
            start: vec![1.4, 0.3],
            ..ncp
        },
        NewtonFixture {
            label: "box-cubic",
            ge: boxed,
            start: vec![0.5, 0.9],
        },
        NewtonFixture {
            label: "exp-bound",
            ge: exp_bound,
            start: vec![1.0, 0.3],
        },
    ]
}

/// An instance of the perturbation bound: G with known modulus κ and a perturbation g
/// that is γ-calm at x̄ with constant µ, where γ = 1/q.
pub struct PerturbationInstance {
    pub label: String,
    pub kappa: f64,
    pub mu: f64,
    pub q: f64,
    /// The sum g + G as a generalized equation at x̄ = 0.
    pub sum: GeneralizedEquation,
}

fn linear_instances(out: &mut Vec<PerturbationInstance>) {
    // Scalar G(x) = a x with g(x) = −µ x (the bound is attained) or µ sin x.
    for (i, &(a, frac)) in [(1.0, 0.4), (2.0, 0.5), (0.5, 0.9), (4.0, 0.25)].iter().enumerate() {
        let kappa = 1.0 / a;
        let mu = frac / kappa;
        out.push(PerturbationInstance {
            label: format!("scalar-tight-{i}"),
            kappa,
            mu,
            q: 1.0,
            sum: ge(
                scalar_c1(move |x| (a - mu) * x, move |_| a - mu),
                SetPart::ZeroMap,
                vec![0.0],
            ),
        });
        out.push(PerturbationInstance {
            label: format!("scalar-sin-{i}"),
            kappa,
            mu,
            q: 1.0,
            sum: ge(
                scalar_c1(move |x| a * x + mu * x.sin(), move |x| a + mu * x.cos()),
                SetPart::ZeroMap,
                vec![0.0],
            ),
        });
    }
    // Scalar G(x) = a x + N_{R₊}(x).
    for (i, &(a, frac)) in [(1.0, 0.5), (3.0, 0.3)].iter().enumerate() {
        let kappa = 1.0 / a;
        let mu = frac / kappa;
        out.push(PerturbationInstance {
            label: format!("scalar-cone-{i}"),
            kappa,
            mu,
            q: 1.0,
            sum: ge(
                scalar_c1(move |x| a * x - mu * x.sin(), move |x| a - mu * x.cos()),
                SetPart::BoxNormalCone(BoxSet::nonneg(1)),
                vec![0.0],
            ),
        });
    }
    // Planar G(x) = A x with seeded A; g is either the worst rank-one shift −µ u vᵀ x or
    // µ·(sin x₂, sin x₁), whose Lipschitz constant is µ.
    for i in 0..4u64 {
        let mut rng = substream(0x9e7, i);
        let entries = gaussian_vector(&mut rng, 4);
        let a = DenseMatrix::from_row_major(2, 2, entries)
            .expect("2x2")
            .add(&DenseMatrix::identity(2).scale(1.5));
        let s = smallest_singular_value(&a).expect("2x2 SVD");
        let kappa = 1.0 / s.value;
        let mu = 0.6 * s.value;
        let worst = a.sub(&DenseMatrix::outer(&s.left, &s.right).scale(mu));
        out.push(PerturbationInstance {
            label: format!("planar-rank-one-{i}"),
            kappa,
            mu,
            q: 1.0,
            sum: ge(SmoothMap::linear(worst), SetPart::ZeroMap, vec![0.0; 2]),
        });
        let a2 = a.clone();
        let f = SmoothMap::new(2, 2, move |x| {
            let ax = a2.mul_vec(x);
            vec![ax[0] + mu * x[1].sin(), ax[1] + mu * x[0].sin()]
        });
        out.push(PerturbationInstance {
            label: format!("planar-sin-{i}"),
            kappa,
            mu,
            q: 1.0,
            sum: ge(f, SetPart::ZeroMap, vec![0.0; 2]),
        });
    }
    // Planar G(x) = A x + N_{R²₊}(x) with κ from the exact polyhedral outer norm.
    for i in 0..2u64 {
        let mut rng = substream(0x9e8, i);
        let entries = gaussian_vector(&mut rng, 4);
        let a = DenseMatrix::from_row_major(2, 2, entries)
            .expect("2x2")
            .add(&DenseMatrix::identity(2).scale(2.0));
        let c = SetPart::BoxNormalCone(BoxSet::nonneg(2));
        let h = AffineMap::linearization(a.clone(), &[0.0; 2], &[0.0; 2]);
        let kappa = graphical_derivative_outer_norm(&h, &c, &[0.0; 2], &[0.0; 2]).expect("polyhedral outer norm");
        let mu = 0.5 / kappa;
        let f = SmoothMap::new(2, 2, move |x| {
            let ax = a.mul_vec(x);
            vec![ax[0] - mu * x[0].sin(), ax[1] - mu * x[1].sin()]
        });
        out.push(PerturbationInstance {
            label: format!("planar-cone-{i}"),
            kappa,
            mu,
            q: 1.0,
            sum: ge(f, c, vec![0.0; 2]),
        });
    }
}

/// Twenty instances with q = 1 followed by five with q = 2.
pub fn perturbation_instances() -> Vec<PerturbationInstance> {
    let mut out = Vec::new();
    linear_instances(&mut out);
    // G(x) = a·sgn(x)|x|^{1/2} is strongly 2-subregular with κ = 1/a²; g is ½-calm with
    // constant µ.
    for (i, &(a, mu, kind)) in [
        (1.0, 0.5, 0u8),
        (2.0, 0.5, 1),
        (1.5, 1.0, 2),
        (1.0, 0.8, 0),
        (3.0, 2.0, 2),
    ]
    .iter()
    .enumerate()
    {
        let f = move |x: f64| {
            let s = signed_sqrt(x);
            match kind {
                0 => (a - mu) * s,
                1 => (a + mu) * s,
                _ => a * s + mu * s * (5.0 * x).cos(),
            }
        };
        out.push(PerturbationInstance {
            label: format!("sqrt-{i}"),
            kappa: 1.0 / (a * a),
            mu,
            q: 2.0,
            sum: ge(scalar(f), SetPart::ZeroMap, vec![0.0]),
        });
    }
    out
}
