use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::numerics::vector::{dist2, dot};
use crate::numerics::DenseMatrix;

fn poly(rows: &[&[f64]], rhs: &[f64]) -> Polyhedron {
    let r: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    Polyhedron::from_inequalities(&r, rhs, rows[0].len()).unwrap()
}

fn simplex_triangle() -> Polyhedron {
    poly(&[&[1.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]], &[1.0, 0.0, 0.0])
}

#[test]
fn box_projection_examples() {
    let b = BoxSet::new(vec![0.0], vec![1.0]).unwrap();
    assert_eq!(project_box(&[0.5], &b), vec![0.5]);
    assert_eq!(project_box(&[0.0], &b), vec![0.0]);
    let b2 = BoxSet::new(vec![0.0; 2], vec![1.0; 2]).unwrap();
    assert_eq!(project_box(&[2.0, -3.0], &b2), vec![1.0, 0.0]);
    assert!(BoxSet::new(vec![1.0], vec![0.0]).is_err());
}

#[test]
fn polyhedron_projection_examples() {
    let p = simplex_triangle();
    assert_eq!(project_polyhedron(&[0.2, 0.3], &p).unwrap(), vec![0.2, 0.3]);
    let half = poly(&[&[1.0, 0.0]], &[1.0]);
    assert_eq!(project_polyhedron(&[2.0, 0.0], &half).unwrap(), vec![1.0, 0.0]);
    let z = project_polyhedron(&[1.0, 1.0], &p).unwrap();
    assert!(dist2(&z, &[0.5, 0.5]) < 1e-12);
    // Grid oracle over the triangle at resolution 1e-3.
    let mut best = f64::INFINITY;
    let steps = 1000;
    for i in 0..=steps {
        for j in 0..=(steps - i) {
            let q = [i as f64 / steps as f64, j as f64 / steps as f64];
            best = best.min(dist2(&q, &[1.0, 1.0]));
        }
    }
    assert!((best - dist2(&z, &[1.0, 1.0])).abs() < 1e-3);
    let empty = poly(&[&[1.0], &[-1.0]], &[-1.0, -1.0]);
    assert_eq!(project_polyhedron(&[0.0], &empty), Err(Error::Infeasible));
}

#[test]
fn projection_with_equalities() {
    let p = Polyhedron::new(
        DenseMatrix::from_rows(&[vec![0.0, 0.0, -1.0]], 3).unwrap(),
        vec![0.0],
        DenseMatrix::from_rows(&[vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]], 3).unwrap(),
        vec![1.0, 2.0],
    )
    .unwrap();
    let z = project_polyhedron(&[0.0, 0.0, -5.0], &p).unwrap();
    assert!(dist2(&z, &[0.5, 0.5, 0.0]) < 1e-12);
}

#[test]
fn normal_cone_examples() {
    let n = normal_cone_at(&Polyhedron::whole_space(2), &[3.0, 4.0]).unwrap();
    assert!(n.is_zero());
    let n = normal_cone_at(&Polyhedron::nonneg_orthant(1), &[0.0]).unwrap();
    assert_eq!(n.generators, vec![vec![-1.0]]);
    let p = simplex_triangle();
    let n = normal_cone_at(&p, &[1.0, 0.0]).unwrap();
    assert_eq!(n.generators, vec![vec![1.0, 1.0], vec![0.0, -1.0]]);
    assert!(normal_cone_at(&p, &[2.0, 0.0]).is_none());
}

fn polarity_holds(p: &Polyhedron, x: &[f64], rng: &mut ChaCha8Rng) -> bool {
    let n = normal_cone_at(p, x).unwrap();
    let t = tangent_cone(p, x).to_polyhedron();
    for _ in 0..100 {
        let g = crate::rng::gaussian_vector(rng, p.dim());
        let dir = project_polyhedron(&g, &t).unwrap();
        for w in &n.generators {
            if dot(w, &dir) > 1e-8 {
                return false;
            }
        }
        for l in &n.lineality {
            if dot(l, &dir).abs() > 1e-8 {
                return false;
            }
        }
    }
    true
}

#[test]
fn critical_cone_examples() {
    let k = critical_cone(&Polyhedron::whole_space(3), &[1.0, 2.0, 3.0], &[0.0; 3]).unwrap();
    assert_eq!((k.num_ineq(), k.eq.rows()), (0, 0));
    let k = critical_cone(&Polyhedron::nonneg_orthant(1), &[0.0], &[0.0]).unwrap();
    assert!(k.contains(&[1.0], 0.0) && !k.contains(&[-1.0], 0.0));
    let k = critical_cone(&Polyhedron::nonneg_orthant(2), &[0.0, 0.0], &[-1.0, 0.0]).unwrap();
    // By definition: d ∈ T (d ≥ 0) and ⟨v, d⟩ = 0, i.e. d1 = 0, d2 ≥ 0.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let first: f64 = if rng.random_bool(0.5) {
            0.0
        } else {
            rng.random_range(-1.0..1.0)
        };
        let d = [first, rng.random_range(-1.0..1.0)];
        // In T_P(x) = R₊² and orthogonal to v = (-1, 0).
        let by_def = d[0] >= 0.0 && d[1] >= 0.0 && d[0] == 0.0;
        assert_eq!(k.contains(&d, 1e-12), by_def);
    }
    assert!(k.contains(&[0.0, 2.0], 0.0));
    assert_eq!(
        critical_cone(&Polyhedron::nonneg_orthant(2), &[0.0, 0.0], &[1.0, 0.0]),
        Err(Error::NotNormal)
    );
}

#[test]
fn face_enumeration_examples() {
    let faces = enumerate_faces(&PolyhedralCone::nonneg_orthant(2)).unwrap();
    assert_eq!(faces.len(), 4);
    let dims: Vec<usize> = faces.iter().map(|f| f.span_basis.cols()).collect();
    assert_eq!(dims.iter().filter(|&&d| d == 1).count(), 2);
    let k = PolyhedralCone::new(
        DenseMatrix::from_rows(&[vec![0.0, -1.0]], 2).unwrap(),
        DenseMatrix::from_rows(&[vec![1.0, 0.0]], 2).unwrap(),
    )
    .unwrap();
    assert_eq!(enumerate_faces(&k).unwrap().len(), 2);
    let redundant = PolyhedralCone::new(
        DenseMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -1.0], vec![-1.0, -1.0]], 2).unwrap(),
        DenseMatrix::zeros(0, 2),
    )
    .unwrap();
    let faces = enumerate_faces(&redundant).unwrap();
    assert_eq!(faces.len(), 4);
    let patterns: Vec<Vec<usize>> = faces.iter().map(|f| f.active.clone()).collect();
    assert!(patterns.contains(&vec![0, 1, 2]));
}

#[test]
fn lp_examples() {
    let p = poly(&[&[1.0], &[-1.0]], &[1.0, 0.0]);
    let s = lp_solve(&[1.0], &p, Sense::Min).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!(s.value.abs() < 1e-15);
    let ray = poly(&[&[-1.0]], &[0.0]);
    assert_eq!(lp_solve(&[1.0], &ray, Sense::Max).unwrap().status, LpStatus::Unbounded);
    let p = poly(&[&[-1.0, -1.0], &[-1.0, 0.0], &[0.0, -1.0]], &[-1.0, 0.0, 0.0]);
    let s = lp_solve(&[1.0, 1.0], &p, Sense::Min).unwrap();
    assert!((s.value - 1.0).abs() < 1e-12);
    let empty = poly(&[&[1.0], &[-1.0]], &[-1.0, -1.0]);
    assert_eq!(
        lp_solve(&[1.0], &empty, Sense::Min).unwrap().status,
        LpStatus::Infeasible
    );
    // A strip has a lineality direction; the objective along it is unbounded.
    let strip = poly(&[&[0.0, 1.0], &[0.0, -1.0]], &[1.0, 1.0]);
    assert_eq!(
        lp_solve(&[1.0, 0.0], &strip, Sense::Min).unwrap().status,
        LpStatus::Unbounded
    );
    let s = lp_solve(&[0.0, 1.0], &strip, Sense::Max).unwrap();
    assert!((s.value - 1.0).abs() < 1e-12);
}

/// Random bounded 2-D polygon containing the origin.
fn random_polygon(rng: &mut ChaCha8Rng) -> Polyhedron {
    let k = rng.random_range(3..8);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..k {
        let t = 2.0 * std::f64::consts::PI * (i as f64 + rng.random_range(0.0..0.8)) / k as f64;
        rows.push(vec![t.cos(), t.sin()]);
        rhs.push(rng.random_range(0.3..1.5));
    }
    Polyhedron::from_inequalities(&rows, &rhs, 2).unwrap()
}

#[test]
fn lp_matches_grid_oracle_in_2d() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let p = random_polygon(&mut rng);
        let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let s = lp_solve(&c, &p, Sense::Min).unwrap();
        if s.status == LpStatus::Unbounded || crate::numerics::vector::norm_inf(&s.x) > 8.0 {
            continue;
        }
        assert_eq!(s.status, LpStatus::Optimal);
        // Oracle: for fixed x1 the feasible x2 form an interval, so the best value
        // phi(x1) is convex; scan a grid for the feasible x1 range, then ternary search.
        let slice = |x1: f64| -> Option<f64> {
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..p.num_ineq() {
                let (a1, a2, b) = (p.ineq[(i, 0)], p.ineq[(i, 1)], p.ineq_rhs[i]);
                let r = b - a1 * x1;
                if a2 > 0.0 {
                    hi = hi.min(r / a2);
                } else if a2 < 0.0 {
                    lo = lo.max(r / a2);
                } else if r < 0.0 {
                    return None;
                }
            }
            if lo > hi {
                return None;
            }
            Some(c[0] * x1 + if c[1] > 0.0 { c[1] * lo } else { c[1] * hi })
        };
        let grid: Vec<f64> = (0..=8000).map(|i| -20.0 + 40.0 * i as f64 / 8000.0).collect();
        let feasible: Vec<f64> = grid.iter().copied().filter(|&t| slice(t).is_some()).collect();
        let edge = |mut inside: f64, mut outside: f64| {
            for _ in 0..100 {
                let mid = 0.5 * (inside + outside);
                if slice(mid).is_some() {
                    inside = mid
                } else {
                    outside = mid
                }
            }
            inside
        };
        let (mut a, mut b) = (feasible[0], *feasible.last().unwrap());
        a = edge(a, a - 0.005);
        b = edge(b, b + 0.005);
        for _ in 0..200 {
            let (m1, m2) = (a + (b - a) / 3.0, b - (b - a) / 3.0);
            if slice(m1).unwrap() <= slice(m2).unwrap() {
                b = m2
            } else {
                a = m1
            }
        }
        let best = (slice(0.5 * (a + b)).unwrap(), [0.5 * (a + b), 0.0]);
        assert!(
            (best.0 - s.value).abs() < 1e-6,
            "{} vs {} at {:?} vs {:?} c={:?} p={:?}",
            best.0,
            s.value,
            best.1,
            s.x,
            c,
            p
        );
    }
}

#[test]
fn vertex_oracle_agrees_with_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..60 {
        let d = 2 + trial % 3;
        let k = d + 1 + trial % 4;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for _ in 0..k {
            rows.push((0..d).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>());
            rhs.push(rng.random_range(-0.2..1.0));
        }
        let p = Polyhedron::from_inequalities(&rows, &rhs, d).unwrap();
        let c: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact = lp_solve(&c, &p, Sense::Min).unwrap();
        let mut lp = LinearProgram::new(d);
        lp.objective = c.clone();
        for (r, b) in rows.iter().zip(&rhs) {
            lp.le(r.clone(), *b);
        }
        match (exact.status, lp.minimize()) {
            (LpStatus::Optimal, LpOutcome::Optimal { value, .. }) => {
                assert!((value - exact.value).abs() < 1e-8, "trial {trial}")
            }
            (LpStatus::Unbounded, LpOutcome::Unbounded) => {}
            (LpStatus::Infeasible, LpOutcome::Infeasible) => {}
            (a, b) => panic!("trial {trial}: oracle {a:?} vs simplex {b:?}"),
        }
    }
}

#[test]
fn lp_cap_is_enforced() {
    let p = Polyhedron::nonneg_orthant(13);
    assert!(matches!(
        lp_solve(&[1.0; 13], &p, Sense::Min),
        Err(Error::CapExceeded { .. })
    ));
}

#[test]
fn cone_triviality() {
    assert!(PolyhedralCone::new(
        DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 1.0], vec![0.0, -1.0]], 2).unwrap(),
        DenseMatrix::zeros(0, 2)
    )
    .unwrap()
    .is_trivial());
    assert!(!PolyhedralCone::nonneg_orthant(2).is_trivial());
    assert!(!PolyhedralCone::whole_space(1).is_trivial());
    let k = PolyhedralCone::new(DenseMatrix::zeros(0, 2), DenseMatrix::identity(2)).unwrap();
    assert!(k.is_trivial());
}

#[test]
fn cone_distance_matches_projection() {
    // Distance to the cone generated by (1,1) and (0,-1).
    let gens = vec![vec![1.0, 1.0], vec![0.0, -1.0]];
    let fit = cone_distance(&[-1.0, 0.5], &gens, &[]).unwrap();
    // Nearest point is the projection onto the ray (1,1)... which is 0 here since ⟨(-1,.5),(1,1)⟩ < 0,
    // or onto the ray (0,-1): also 0. So the distance is the norm.
    assert!((fit.distance - (1.25f64).sqrt()).abs() < 1e-12);
    let fit = cone_distance(&[2.0, 3.0], &gens, &[]).unwrap();
    assert!((fit.distance - 0.5f64.sqrt()).abs() < 1e-12);
    let fit = cone_distance(&[2.0, 1.0], &gens, &[]).unwrap();
    assert!(fit.distance < 1e-12);
    assert!((fit.lambda[0] - 2.0).abs() < 1e-12 && (fit.lambda[1] - 1.0).abs() < 1e-12);
}

fn random_feasible_polyhedron(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Polyhedron {
    let center: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for _ in 0..k {
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        rhs.push(dot(&a, &center) + rng.random_range(0.0..0.5));
        rows.push(a);
    }
    Polyhedron::from_inequalities(&rows, &rhs, d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), d in 1usize..5, k in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_feasible_polyhedron(&mut rng, d, k);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let z = project_polyhedron(&x, &p).unwrap();
        let zz = project_polyhedron(&z, &p).unwrap();
        prop_assert!(dist2(&z, &zz) <= 1e-12);
        prop_assert!(p.contains(&z, 1e-9));
    }

    #[test]
    fn normal_generators_are_polar_to_tangents(seed in any::<u64>(), d in 1usize..4, k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_feasible_polyhedron(&mut rng, d, k);
        // Boundary points: projections of far-away points.
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let z = project_polyhedron(&x, &p).unwrap();
        let active = p.active_set(&z, ACTIVE_TOL);
        // Snap to exact activity to avoid tolerance noise in the tangent cone.
        prop_assume!(active.iter().all(|&i| (dot(p.ineq.row(i), &z) - p.ineq_rhs[i]).abs() < 1e-12));
        prop_assert!(polarity_holds(&p, &z, &mut rng));
    }

    #[test]
    fn faces_partition_cone_samples(seed in any::<u64>(), d in 2usize..4, k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let cone = PolyhedralCone::new(DenseMatrix::from_rows(&rows, d).unwrap(), DenseMatrix::zeros(0, d)).unwrap();
        let faces = enumerate_faces(&cone).unwrap();
        // Nesting: a larger active set has a smaller span.
        for f in &faces {
            for g in &faces {
                if f.active.iter().all(|i| g.active.contains(i)) {
                    prop_assert!(g.span_basis.cols() <= f.span_basis.cols());
                }
            }
        }
        let poly = cone.to_polyhedron();
        for _ in 0..1000 / 8 {
            let x = crate::rng::gaussian_vector(&mut rng, d);
            let z = project_polyhedron(&x, &poly).unwrap();
            let pattern: Vec<usize> = (0..k).filter(|&i| dot(&rows[i], &z).abs() <= 1e-9).collect();
            let matches = faces.iter().filter(|f| f.active == pattern).count();
            prop_assert_eq!(matches, 1, "pattern {:?} point {:?}", pattern, z);
        }
    }
}
