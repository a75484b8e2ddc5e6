use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_indices, linearized_kkt, CriticalConeData, IndexSets, KktPoint, NlpProblem, KKT_TOL};
use crate::combinatorics::Patterns;
use crate::error::{cap, Result};
use crate::numerics::vector::{dist2, norm2};
use crate::numerics::{lstsq_min_norm, nullspace_basis, DenseMatrix};
use crate::polyhedral::cone_is_trivial;
use crate::regularity::{polyhedral_isolated_point_test, radius_variational};
use crate::rng::{seeded, unit_sphere};

/// SOSC holds iff the cone-quadratic minimum exceeds this.
pub const SOSC_TOL: f64 = 1e-9;
const MAX_CONSTRAINTS: usize = 20;
const MAX_I2: usize = 16;
const WITNESS_RADIUS: f64 = 1e-2;
const WITNESS_SAMPLES: usize = 2000;

/// No nonzero `y` supported on rows `G` with `Gᵀy = 0` and `y_j ≥ 0` for `j ∈ signed`.
fn multiplier_cone_trivial(g: &DenseMatrix, signed: &[usize]) -> bool {
    let null = nullspace_basis(&g.transpose());
    if null.cols() == 0 {
        return true;
    }
    let ineq = null.select_rows(signed).scale(-1.0);
    cone_is_trivial(&ineq, &DenseMatrix::zeros(0, null.cols()))
}

/// Strict MFCQ with `y_{I3} = 0`: `Σ y_i ∇g_i(x̄) = 0`, `y_{I2} ≥ 0` only for `y = 0`.
pub fn strict_mfcq_check(cone: &CriticalConeData, sets: &IndexSets) -> Result<bool> {
    cap("constraint count", MAX_CONSTRAINTS, cone.b_full.rows())?;
    let g = DenseMatrix::vstack(&[&cone.b1, &cone.b2], cone.b_full.cols());
    let signed: Vec<usize> = (sets.i1.len()..sets.i1.len() + sets.i2.len()).collect();
    Ok(multiplier_cone_trivial(&g, &signed))
}

/// The variant with `y_{I3}` unrestricted.
pub fn strict_mfcq_literal(cone: &CriticalConeData, sets: &IndexSets) -> Result<bool> {
    cap("constraint count", MAX_CONSTRAINTS, cone.b_full.rows())?;
    Ok(multiplier_cone_trivial(&cone.b_full, &sets.i2))
}

/// `min {⟨x′, A x′⟩ : x′ ∈ K, ‖x′‖ = 1}`, or `+∞` when `K = {0}`.
pub fn sosc_sigma(cone: &CriticalConeData) -> Result<f64> {
    if cone.k.is_trivial() {
        return Ok(f64::INFINITY);
    }
    Ok(radius_variational(&cone.a_hess, &cone.k)?.sigma)
}

/// True iff `(x, y) = 0` is the only solution of `A x + B1ᵀy₁ + B2ᵀy₂ = 0`, `B1 x = 0`,
/// `B2 x ∈ N_{R₊^{I2}}(y₂)`, checked per complementarity pattern on I2.
pub fn homogeneous_vi_unique_zero(cone: &CriticalConeData, sets: &IndexSets) -> Result<bool> {
    let (k1, k2) = (sets.i1.len(), sets.i2.len());
    cap("weakly active constraints", MAX_I2, k2)?;
    let n = cone.a_hess.rows();
    let d = n + k1 + k2;
    let stationarity = DenseMatrix::hstack(&[&cone.a_hess, &cone.b1.transpose(), &cone.b2.transpose()], n);
    let tangency = DenseMatrix::hstack(&[&cone.b1, &DenseMatrix::zeros(k1, k1 + k2)], k1);
    let b2x = DenseMatrix::hstack(&[&cone.b2, &DenseMatrix::zeros(k2, k1 + k2)], k2);
    let unit = |j: usize, sign: f64| {
        let mut r = vec![0.0; d];
        r[j] = sign;
        r
    };
    let patterns: Vec<Vec<u8>> = Patterns::new(vec![2; k2]).collect();
    let nontrivial = patterns.par_iter().any(|pat| {
        let mut eq = vec![stationarity.clone(), tangency.clone()];
        let mut ineq_rows = Vec::new();
        let mut extra_eq = Vec::new();
        for (i, &digit) in pat.iter().enumerate() {
            let yj = n + k1 + i;
            if digit == 0 {
                ineq_rows.push(unit(yj, -1.0));
                extra_eq.push(b2x.row(i).to_vec());
            } else {
                extra_eq.push(unit(yj, 1.0));
                ineq_rows.push(b2x.row(i).to_vec());
            }
        }
        eq.push(DenseMatrix::from_rows(&extra_eq, d).expect("row length d"));
        let eq_refs: Vec<&DenseMatrix> = eq.iter().collect();
        let eq = DenseMatrix::vstack(&eq_refs, d);
        let ineq = DenseMatrix::from_rows(&ineq_rows, d).expect("row length d");
        !cone_is_trivial(&ineq, &eq)
    });
    Ok(!nontrivial)
}

/// Sampled quadratic growth `g₀(x) ≥ g₀(x̄) + β‖x − x̄‖²` over feasible points with
/// `1e-4 ≤ ‖x − x̄‖ ≤ radius`. Equality constraints are restored by Gauss–Newton steps.
/// Vacuously true when no feasible sample is found.
pub fn local_min_witness(prob: &NlpProblem, pt: &KktPoint, beta: f64, radius: f64, samples: usize, seed: u64) -> bool {
    let n = prob.n();
    let f0 = prob.objective().value(&pt.x);
    let mut rng = seeded(seed);
    let eq: Vec<usize> = (0..prob.s()).collect();
    (0..samples).all(|k| {
        let r = radius * (1e-2f64).powf(k as f64 / samples as f64);
        let dir = unit_sphere(&mut rng, n);
        let mut x: Vec<f64> = pt.x.iter().zip(&dir).map(|(a, b)| a + r * b).collect();
        for _ in 0..20 {
            if eq.is_empty() {
                break;
            }
            let gx: Vec<f64> = eq.iter().map(|&i| prob.constraints()[i].value(&x)).collect();
            if norm2(&gx) <= 1e-14 {
                break;
            }
            let jac = prob.constraint_jacobian(&x).select_rows(&eq);
            let step = lstsq_min_norm(&jac, &gx);
            x.iter_mut().zip(&step).for_each(|(a, b)| *a -= b);
        }
        if !prob.is_feasible(&x, 1e-12) {
            return true;
        }
        let d = dist2(&x, &pt.x);
        prob.objective().value(&x) - f0 >= beta * d * d - 1e-14 * (1.0 + f0.abs())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlpReport {
    pub index_sets: IndexSets,
    pub smf: bool,
    pub smf_literal: bool,
    pub smf_variants_differ: bool,
    #[serde(with = "crate::serde_ext::real")]
    pub sigma: f64,
    pub sosc: bool,
    pub subreg: bool,
    /// Sampled quadratic growth with `β = σ/4` (`β = 1` when K = {0}); not attempted when SOSC fails.
    pub local_min_witness: Option<bool>,
    pub consistent: bool,
    /// Isolated-point test on the linearized KKT map, when within its caps.
    pub linearization_isolated: Option<bool>,
}

/// Strict MFCQ, SOSC and uniqueness for the homogeneous system at a KKT point.
/// Consistency: `smf ∧ sosc` must imply uniqueness, and uniqueness must imply
/// `smf ∧ sosc` whenever the local-minimality witness holds.
pub fn nlp_equivalence(prob: &NlpProblem, pt: &KktPoint) -> Result<NlpReport> {
    let sets = classify_indices(prob, pt, KKT_TOL);
    let cone = CriticalConeData::new(prob, pt, &sets)?;
    let smf = strict_mfcq_check(&cone, &sets)?;
    let smf_literal = strict_mfcq_literal(&cone, &sets)?;
    let sigma = sosc_sigma(&cone)?;
    let sosc = sigma > SOSC_TOL;
    let subreg = homogeneous_vi_unique_zero(&cone, &sets)?;
    let local_min_witness = sosc.then(|| {
        let beta = if sigma.is_finite() { sigma / 4.0 } else { 1.0 };
        local_min_witness(prob, pt, beta, WITNESS_RADIUS, WITNESS_SAMPLES, 0x10ca1)
    });
    let consistent = if smf && sosc {
        subreg
    } else if local_min_witness == Some(true) {
        !subreg
    } else {
        true
    };
    let (h, c) = linearized_kkt(prob, pt);
    let zbar = [pt.x.as_slice(), pt.y.as_slice()].concat();
    let linearization_isolated = polyhedral_isolated_point_test(&h, &c, &zbar, &vec![0.0; zbar.len()]).ok();
    Ok(NlpReport {
        index_sets: sets,
        smf,
        smf_literal,
        smf_variants_differ: smf != smf_literal,
        sigma,
        sosc,
        subreg,
        local_min_witness,
        consistent,
        linearization_isolated,
    })
}
