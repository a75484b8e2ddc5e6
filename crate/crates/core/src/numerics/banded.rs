//! Banded LU factorization with partial pivoting for long block-banded systems.

use crate::error::{Error, Result};

/// A square matrix with `kl` sub-diagonals and `ku` super-diagonals, stored with
/// room for the extra `kl` super-diagonals created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ld,
            data: vec![0.0; ld * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        // A(i, j) lives at row kl + ku + i - j of column j.
        j * self.ld + (self.kl + self.ku + i - j)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i <= j + self.kl && j <= i + self.kl + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry (i, j). Panics if the entry lies outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            i <= j + self.kl && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                *yi += self.get(i, j) * x[j];
            }
        }
        y
    }

    /// Factorizes in place and solves A x = b.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch("band solve right-hand side".into()));
        }
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::Singular);
        }
        let kv = self.kl + self.ku;
        let mut piv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let lower = (j + self.kl).min(n - 1);
            let mut p = j;
            let mut best = self.data[self.idx(j, j)].abs();
            for i in (j + 1)..=lower {
                let v = self.data[self.idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-14 * scale {
                return Err(Error::Singular);
            }
            piv[j] = p;
            ju = ju.max((j + self.ku + (p - j)).min(n - 1));
            if p != j {
                for c in j..=ju {
                    let (a, b) = (self.idx(j, c), self.idx(p, c));
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.idx(j, j)];
            for i in (j + 1)..=lower {
                let k = self.idx(i, j);
                let l = self.data[k] / d;
                self.data[k] = l;
                if l != 0.0 {
                    for c in (j + 1)..=ju {
                        let t = self.data[self.idx(j, c)];
                        let k2 = self.idx(i, c);
                        self.data[k2] -= l * t;
                    }
                }
            }
        }
        let mut x = b.to_vec();
        for j in 0..n {
            x.swap(j, piv[j]);
            let lower = (j + self.kl).min(n - 1);
            for i in (j + 1)..=lower {
                x[i] -= self.data[self.idx(i, j)] * x[j];
            }
        }
        for j in (0..n).rev() {
            let hi = (j + kv).min(n - 1);
            let mut s = x[j];
            for c in (j + 1)..=hi {
                s -= self.data[self.idx(j, c)] * x[c];
            }
            x[j] = s / self.data[self.idx(j, j)];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{solve_linear, DenseMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_solve_on_random_band_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = 5 + trial % 30;
            let (kl, ku) = (1 + trial % 4, 2 + trial % 3);
            let mut band = BandMatrix::zeros(n, kl, ku);
            let mut dense = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    // Small diagonal on purpose so that pivoting is exercised.
                    let v: f64 = rng.random_range(-1.0..1.0) + if i == j { 0.01 } else { 0.0 };
                    band.add(i, j, v);
                    dense[(i, j)] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let xb = band.clone().solve(&b).unwrap();
            let xd = solve_linear(&dense, &b).unwrap();
            let r = band.mul_vec(&xb);
            for i in 0..n {
                assert!((r[i] - b[i]).abs() < 1e-8, "residual trial {trial}");
                assert!((xb[i] - xd[i]).abs() < 1e-6 * (1.0 + xd[i].abs()));
            }
        }
    }

    #[test]
    fn detects_singular_band() {
        let mut band = BandMatrix::zeros(3, 1, 1);
        band.add(0, 0, 1.0);
        band.add(0, 1, 1.0);
        band.add(1, 0, 1.0);
        band.add(1, 1, 1.0);
        band.add(2, 2, 1.0);
        assert_eq!(band.solve(&[1.0, 2.0, 3.0]), Err(Error::Singular));
    }
}
