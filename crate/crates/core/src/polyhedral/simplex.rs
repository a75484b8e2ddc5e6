//! Dense two-phase simplex with Bland's rule.
//!
//! This is the workhorse for the many small feasibility and optimization LPs in
//! the crate. The exact vertex-enumeration oracle in `lp` is kept separate and
//! the two are cross-checked in tests.

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;

/// `min cᵀx` subject to `ineq·x ≤ b`, `eq·x = f`, `lower ≤ x ≤ upper` (bounds may be infinite).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub n: usize,
    pub objective: Vec<f64>,
    pub ineq: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// A program over `n` free variables with zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            objective: vec![0.0; n],
            ineq: Vec::new(),
            eq: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        debug_assert_eq!(row.len(), self.n);
        self.ineq.push((row, rhs));
        self
    }

    pub fn eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        debug_assert_eq!(row.len(), self.n);
        self.eq.push((row, rhs));
        self
    }

    pub fn bounds(&mut self, j: usize, lo: f64, hi: f64) -> &mut Self {
        self.lower[j] = lo;
        self.upper[j] = hi;
        self
    }

    pub fn minimize(&self) -> LpOutcome {
        solve(self)
    }

    /// Maximizes the objective; the returned value is the maximum.
    pub fn maximize(&self) -> LpOutcome {
        let mut neg = self.clone();
        neg.objective.iter_mut().for_each(|c| *c = -*c);
        match solve(&neg) {
            LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value: -value },
            other => other,
        }
    }

    pub fn is_feasible(&self) -> bool {
        let mut p = self.clone();
        p.objective = vec![0.0; p.n];
        !matches!(solve(&p), LpOutcome::Infeasible)
    }
}

/// How an original variable is expressed through nonnegative standard-form columns.
enum VarMap {
    Shift { offset: f64, col: usize },
    Flip { offset: f64, col: usize },
    Split { pos: usize, neg: usize },
}

fn solve(lp: &LinearProgram) -> LpOutcome {
    let mut maps = Vec::with_capacity(lp.n);
    let mut ncols = 0usize;
    let mut extra_ub: Vec<(usize, f64)> = Vec::new();
    for j in 0..lp.n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo > hi {
            return LpOutcome::Infeasible;
        }
        if lo.is_finite() {
            maps.push(VarMap::Shift { offset: lo, col: ncols });
            if hi.is_finite() {
                extra_ub.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Flip { offset: hi, col: ncols });
            ncols += 1;
        } else {
            maps.push(VarMap::Split {
                pos: ncols,
                neg: ncols + 1,
            });
            ncols += 2;
        }
    }

    // Translate rows: a·x = a·offset + Σ coeffs on standard columns.
    let translate = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; ncols];
        let mut r = rhs;
        for (j, m) in maps.iter().enumerate() {
            let a = row[j];
            if a == 0.0 {
                continue;
            }
            match *m {
                VarMap::Shift { offset, col } => {
                    r -= a * offset;
                    out[col] += a;
                }
                VarMap::Flip { offset, col } => {
                    r -= a * offset;
                    out[col] -= a;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        (out, r)
    };

    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new(); // (coeffs, rhs, has_slack)
    for (a, b) in &lp.ineq {
        let (r, rhs) = translate(a, *b);
        rows.push((r, rhs, true));
    }
    for &(col, ub) in &extra_ub {
        let mut r = vec![0.0; ncols];
        r[col] = 1.0;
        rows.push((r, ub, true));
    }
    for (a, f) in &lp.eq {
        let (r, rhs) = translate(a, *f);
        rows.push((r, rhs, false));
    }
    let mut cost = vec![0.0; ncols];
    for (j, m) in maps.iter().enumerate() {
        let c = lp.objective[j];
        match *m {
            VarMap::Shift { col, .. } => cost[col] += c,
            VarMap::Flip { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    let nrows = rows.len();
    let nslack = rows.iter().filter(|r| r.2).count();
    let art0 = ncols + nslack;
    let total = art0 + nrows;
    let rhs_col = total;
    let mut t = vec![vec![0.0; total + 1]; nrows + 1];
    let mut basis = vec![0usize; nrows];
    let mut s = ncols;
    for (i, (coeffs, rhs, has_slack)) in rows.iter().enumerate() {
        t[i][..ncols].copy_from_slice(coeffs);
        if *has_slack {
            t[i][s] = 1.0;
            s += 1;
        }
        t[i][rhs_col] = *rhs;
        if *rhs < 0.0 {
            for v in t[i].iter_mut() {
                *v = -*v;
            }
        }
        t[i][art0 + i] = 1.0;
        basis[i] = art0 + i;
    }
    let scale = rows.iter().map(|r| r.1.abs()).fold(1.0f64, f64::max);

    // Phase 1: minimize the sum of artificials.
    for j in 0..=total {
        if (art0..total).contains(&j) {
            continue;
        }
        t[nrows][j] = -(0..nrows).map(|i| t[i][j]).sum::<f64>();
    }
    let all = |_: usize| true;
    if run(&mut t, &mut basis, total, &all).is_err() {
        // Phase 1 is bounded below by zero; an unbounded signal indicates numerical trouble.
        return LpOutcome::Infeasible;
    }
    if -t[nrows][rhs_col] > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }
    // Drive artificials out of the basis; drop redundant rows.
    let mut keep = vec![true; nrows];
    for i in 0..nrows {
        if basis[i] >= art0 {
            if let Some(j) = (0..art0).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, j);
            } else {
                keep[i] = false;
            }
        }
    }
    let mut t2: Vec<Vec<f64>> = Vec::new();
    let mut basis2 = Vec::new();
    for i in 0..nrows {
        if keep[i] {
            t2.push(t[i].clone());
            basis2.push(basis[i]);
        }
    }
    let m2 = t2.len();
    let mut obj = vec![0.0; total + 1];
    for j in 0..art0 {
        let cj = if j < ncols { cost[j] } else { 0.0 };
        let cb: f64 = (0..m2)
            .map(|i| {
                let b = basis2[i];
                if b < ncols {
                    cost[b] * t2[i][j]
                } else {
                    0.0
                }
            })
            .sum();
        obj[j] = cj - cb;
    }
    obj[rhs_col] = -(0..m2)
        .map(|i| {
            let b = basis2[i];
            if b < ncols {
                cost[b] * t2[i][rhs_col]
            } else {
                0.0
            }
        })
        .sum::<f64>();
    t2.push(obj);
    let no_art = |j: usize| j < art0;
    if run(&mut t2, &mut basis2, total, &no_art).is_err() {
        return LpOutcome::Unbounded;
    }
    let mut z = vec![0.0; ncols];
    for i in 0..m2 {
        if basis2[i] < ncols {
            z[basis2[i]] = t2[i][rhs_col];
        }
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { offset, col } => offset + z[col],
            VarMap::Flip { offset, col } => offset - z[col],
            VarMap::Split { pos, neg } => z[pos] - z[neg],
        })
        .collect();
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    LpOutcome::Optimal { x, value }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[c];
        if f != 0.0 {
            for (v, pr) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
        }
    }
    basis[r] = c;
}

/// Runs simplex iterations with Bland's rule. `Err(())` signals unboundedness.
fn run(t: &mut [Vec<f64>], basis: &mut [usize], total: usize, allowed: &dyn Fn(usize) -> bool) -> Result<(), ()> {
    let m = t.len() - 1;
    let rhs = total;
    for _ in 0..50_000 {
        let entering = (0..total).find(|&j| allowed(j) && t[m][j] < -COST_EPS && !basis.contains(&j));
        let Some(c) = entering else {
            return Ok(());
        };
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i][c];
            if a > PIVOT_EPS {
                let ratio = t[i][rhs] / a;
                match best {
                    None => best = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-14 || (ratio <= br + 1e-14 && basis[i] < basis[bi]) {
                            best = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, _)) = best else {
            return Err(());
        };
        pivot(t, basis, r, c);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_programs() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.le(vec![-1.0, -1.0], -1.0)
            .bounds(0, 0.0, f64::INFINITY)
            .bounds(1, 0.0, f64::INFINITY);
        let v = lp.minimize().value().unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(lp.maximize(), LpOutcome::Unbounded);

        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.le(vec![1.0], -1.0).le(vec![-1.0], -1.0);
        assert_eq!(lp.minimize(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(3);
        lp.objective = vec![-1.0, -2.0, 0.5];
        lp.eq(vec![1.0, 1.0, 1.0], 1.0);
        for j in 0..3 {
            lp.bounds(j, -1.0, 1.0);
        }
        // Maximize x1 + 2 x2 - x3/2 on the slice: x2 = 1, x3 = -1, x1 = 1.
        let out = lp.minimize();
        let LpOutcome::Optimal { x, value } = out else { panic!() };
        assert!((value + 3.5).abs() < 1e-12, "{x:?}");
    }

    #[test]
    fn degenerate_and_redundant_rows() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, -1.0];
        lp.eq(vec![1.0, 1.0], 1.0).eq(vec![2.0, 2.0], 2.0);
        lp.le(vec![1.0, 0.0], 0.5)
            .le(vec![1.0, 0.0], 0.5)
            .le(vec![0.0, 1.0], 0.5);
        let v = lp.minimize().value().unwrap();
        assert!((v + 1.0).abs() < 1e-12);
    }
}
