//! Polynomials and scalar functions with value/gradient/Hessian oracles.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::vector::norm2;
use crate::numerics::DenseMatrix;

/// `coeff · Π x_i^{powers_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// A multivariate polynomial given by its coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub nvars: usize,
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(nvars: usize, terms: Vec<Monomial>) -> Result<Self> {
        for t in &terms {
            if t.powers.len() != nvars {
                return Err(Error::DimensionMismatch(format!(
                    "monomial with {} exponents in a polynomial of {nvars} variables",
                    t.powers.len()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient"));
            }
        }
        Ok(Self { nvars, terms })
    }

    /// Shorthand: terms as `(coeff, powers)` pairs.
    pub fn from_terms(nvars: usize, terms: &[(f64, &[u32])]) -> Self {
        Self::new(
            nvars,
            terms
                .iter()
                .map(|(c, p)| Monomial {
                    coeff: *c,
                    powers: p.to_vec(),
                })
                .collect(),
        )
        .expect("exponent vectors match the variable count")
    }

    /// The affine polynomial `a·x + b`.
    pub fn affine(a: &[f64], b: f64) -> Self {
        let n = a.len();
        let mut terms = vec![Monomial {
            coeff: b,
            powers: vec![0; n],
        }];
        for (i, &ai) in a.iter().enumerate() {
            let mut p = vec![0; n];
            p[i] = 1;
            terms.push(Monomial { coeff: ai, powers: p });
        }
        Self { nvars: n, terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.powers
                        .iter()
                        .zip(x)
                        .map(|(&p, &xi)| xi.powi(p as i32))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.nvars];
        for t in &self.terms {
            for (j, gj) in g.iter_mut().enumerate() {
                let pj = t.powers[j];
                if pj == 0 {
                    continue;
                }
                let mut v = t.coeff * pj as f64;
                for (i, (&p, &xi)) in t.powers.iter().zip(x).enumerate() {
                    let e = if i == j { p - 1 } else { p };
                    v *= xi.powi(e as i32);
                }
                *gj += v;
            }
        }
        g
    }

    pub fn hessian(&self, x: &[f64]) -> DenseMatrix {
        let n = self.nvars;
        let mut h = DenseMatrix::zeros(n, n);
        for t in &self.terms {
            for j in 0..n {
                for k in j..n {
                    let (pj, pk) = (t.powers[j], t.powers[k]);
                    let factor = if j == k {
                        if pj < 2 {
                            continue;
                        }
                        (pj * (pj - 1)) as f64
                    } else {
                        if pj == 0 || pk == 0 {
                            continue;
                        }
                        (pj * pk) as f64
                    };
                    let mut v = t.coeff * factor;
                    for (i, (&p, &xi)) in t.powers.iter().zip(x).enumerate() {
                        let e = if i == j && i == k {
                            p - 2
                        } else if i == j || i == k {
                            p - 1
                        } else {
                            p
                        };
                        v *= xi.powi(e as i32);
                    }
                    h[(j, k)] += v;
                    if j != k {
                        h[(k, j)] += v;
                    }
                }
            }
        }
        h
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type HessFn = dyn Fn(&[f64]) -> DenseMatrix + Send + Sync;

/// A twice-differentiable scalar function. Missing derivative oracles fall back to
/// central differences.
#[derive(Clone)]
pub struct ScalarFunction {
    nvars: usize,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradFn>>,
    hessian: Option<Arc<HessFn>>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("nvars", &self.nvars)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}

pub(crate) fn fd_step(x: &[f64]) -> f64 {
    1e-6 * (1.0 + norm2(x))
}

impl ScalarFunction {
    pub fn new(nvars: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            nvars,
            value: Arc::new(value),
            gradient: None,
            hessian: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(mut self, h: impl Fn(&[f64]) -> DenseMatrix + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        let (a, b, c) = (p.clone(), p.clone(), p);
        Self::new(a.nvars, move |x| a.eval(x))
            .with_gradient(move |x| b.gradient(x))
            .with_hessian(move |x| c.hessian(x))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.gradient {
            Some(g) => g(x),
            None => self.fd_gradient(x),
        }
    }

    pub fn hessian(&self, x: &[f64]) -> DenseMatrix {
        match &self.hessian {
            Some(h) => h(x),
            None => self.fd_hessian(x),
        }
    }

    fn fd_gradient(&self, x: &[f64]) -> Vec<f64> {
        let h = fd_step(x);
        (0..self.nvars)
            .map(|j| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                (self.value(&xp) - self.value(&xm)) / (2.0 * h)
            })
            .collect()
    }

    fn fd_hessian(&self, x: &[f64]) -> DenseMatrix {
        let n = self.nvars;
        let h = if self.gradient.is_some() {
            fd_step(x)
        } else {
            1e-4 * (1.0 + norm2(x))
        };
        let mut m = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let (gp, gm) = (self.gradient(&xp), self.gradient(&xm));
            for i in 0..n {
                m[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        // Symmetrize.
        let t = m.transpose();
        m.add(&t).scale(0.5)
    }

    /// Compares analytic derivative oracles against finite differences at x.
    /// Returns the largest absolute discrepancy (0 when no analytic oracle is present).
    pub fn derivative_check(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        if let Some(g) = &self.gradient {
            let h = 1e-5 * (1.0 + norm2(x));
            let ga = g(x);
            for j in 0..self.nvars {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                let fd = (self.value(&xp) - self.value(&xm)) / (2.0 * h);
                worst = worst.max((fd - ga[j]).abs() / (1.0 + ga[j].abs()));
            }
        }
        if let Some(hf) = &self.hessian {
            let ha = hf(x);
            let h = 1e-5 * (1.0 + norm2(x));
            for j in 0..self.nvars {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                let (gp, gm) = (self.gradient(&xp), self.gradient(&xm));
                for i in 0..self.nvars {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    worst = worst.max((fd - ha[(i, j)]).abs() / (1.0 + ha[(i, j)].abs()));
                }
            }
        }
        worst
    }
}
