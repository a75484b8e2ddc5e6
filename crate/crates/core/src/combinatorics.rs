//! Subset enumeration helpers for the exhaustive case analyses.

/// Iterator over the k-element subsets of {0..n} in lexicographic order.
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = if k <= n { Some((0..k).collect()) } else { None };
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in (i + 1)..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// All subsets of {0..n}, ordered by size and then lexicographically.
pub fn subsets_by_size(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..=n).flat_map(move |k| Combinations::new(n, k))
}

/// Iterates over all mixed-radix digit vectors, digit i ranging over `0..radices[i]`.
pub struct Patterns {
    radices: Vec<u8>,
    current: Option<Vec<u8>>,
}

impl Patterns {
    pub fn new(radices: Vec<u8>) -> Self {
        let current = if radices.contains(&0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        Self { radices, current }
    }
}

impl Iterator for Patterns {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        let mut carry = true;
        for (d, &r) in next.iter_mut().zip(&self.radices) {
            if *d + 1 < r {
                *d += 1;
                carry = false;
                break;
            }
            *d = 0;
        }
        self.current = if carry { None } else { Some(next) };
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(Combinations::new(5, 2).count(), 10);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
        assert_eq!(subsets_by_size(4).count(), 16);
        assert_eq!(Patterns::new(vec![3, 3, 3]).count(), 27);
        assert_eq!(Patterns::new(vec![2, 3]).count(), 6);
        assert_eq!(Patterns::new(vec![]).count(), 1);
        let first: Vec<_> = subsets_by_size(3).take(4).collect();
        assert_eq!(first, vec![vec![], vec![0], vec![1], vec![2]]);
    }
}
