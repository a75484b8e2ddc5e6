use std::fmt;
use std::sync::Arc;

use crate::functions::{fd_step, Polynomial};
use crate::numerics::DenseMatrix;

type EvalFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> DenseMatrix + Send + Sync;

/// A smooth map `f : R^dim_in → R^dim_out` with an optional analytic Jacobian.
#[derive(Clone)]
pub struct SmoothMap {
    dim_in: usize,
    dim_out: usize,
    eval: Arc<EvalFn>,
    jacobian: Option<Arc<JacFn>>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SmoothMap(R^{} -> R^{}, analytic_jacobian: {})",
            self.dim_in,
            self.dim_out,
            self.jacobian.is_some()
        )
    }
}

impl SmoothMap {
    pub fn new(dim_in: usize, dim_out: usize, eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            dim_in,
            dim_out,
            eval: Arc::new(eval),
            jacobian: None,
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> DenseMatrix + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    /// `x ↦ A x + b`.
    pub fn affine(a: DenseMatrix, b: Vec<f64>) -> Self {
        assert_eq!(a.rows(), b.len(), "affine map offset length");
        let (m, n) = (a.rows(), a.cols());
        let a2 = a.clone();
        Self::new(n, m, move |x| {
            let mut y = a.mul_vec(x);
            for (yi, bi) in y.iter_mut().zip(&b) {
                *yi += bi;
            }
            y
        })
        .with_jacobian(move |_| a2.clone())
    }

    pub fn linear(a: DenseMatrix) -> Self {
        let m = a.rows();
        Self::affine(a, vec![0.0; m])
    }

    pub fn identity(n: usize) -> Self {
        Self::linear(DenseMatrix::identity(n))
    }

    pub fn zero(dim_in: usize, dim_out: usize) -> Self {
        Self::linear(DenseMatrix::zeros(dim_out, dim_in))
    }

    /// Componentwise polynomial map with exact Jacobian.
    pub fn polynomial(components: Vec<Polynomial>, dim_in: usize) -> Self {
        let c2 = components.clone();
        let m = components.len();
        Self::new(dim_in, m, move |x| components.iter().map(|p| p.eval(x)).collect()).with_jacobian(move |x| {
            let rows: Vec<Vec<f64>> = c2.iter().map(|p| p.gradient(x)).collect();
            DenseMatrix::from_rows(&rows, dim_in).expect("gradient length equals dim_in")
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim_in);
        (self.eval)(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> DenseMatrix {
        match &self.jacobian {
            Some(j) => j(x),
            None => self.fd_jacobian(x),
        }
    }

    /// Central-difference Jacobian with step 1e-6·(1+‖x‖).
    pub fn fd_jacobian(&self, x: &[f64]) -> DenseMatrix {
        let h = fd_step(x);
        let mut jac = DenseMatrix::zeros(self.dim_out, self.dim_in);
        for j in 0..self.dim_in {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (self.eval(&xp), self.eval(&xm));
            for i in 0..self.dim_out {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac
    }

    /// `x ↦ f(x) + g(x)`.
    pub fn sum(&self, other: &SmoothMap) -> SmoothMap {
        assert_eq!((self.dim_in, self.dim_out), (other.dim_in, other.dim_out));
        let (a, b) = (self.clone(), other.clone());
        let (ja, jb) = (self.clone(), other.clone());
        SmoothMap::new(self.dim_in, self.dim_out, move |x| {
            a.eval(x).iter().zip(b.eval(x)).map(|(u, v)| u + v).collect()
        })
        .with_jacobian(move |x| ja.jacobian(x).add(&jb.jacobian(x)))
    }
}
