use choquet_core::lp::{self, Constraints};
use choquet_core::random;
use choquet_core::GenericSpace;
use proptest::prelude::*;
use rand::Rng;

type Space = GenericSpace<f64>;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Rank by Gaussian elimination, kept local so the check does not lean on the
// crate's own linear algebra.
fn rank(mut rows: Vec<Vec<f64>>, tol: f64) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) =
            (r..rows.len()).max_by(|&i, &j| rows[i][c].abs().total_cmp(&rows[j][c].abs()))
        else {
            break;
        };
        if rows[p][c].abs() <= tol {
            continue;
        }
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            let f = rows[i][c] / rows[r][c];
            for k in c..cols {
                rows[i][k] -= f * rows[r][k];
            }
        }
        r += 1;
    }
    r
}

fn polytope(seed: u64) -> Space {
    let mut rng = random::trial_rng(seed, 0);
    let dim = rng.gen_range(1..=4);
    let pairs = rng.gen_range(dim..=12);
    random::polytope_space(&mut rng, dim, pairs)
}

fn same_set(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    let close = |u: &Vec<f64>, v: &Vec<f64>| u.iter().zip(v).all(|(x, y)| (x - y).abs() <= tol);
    a.len() == b.len() && a.iter().all(|u| b.iter().any(|v| close(u, v)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polar_of_polar_is_the_ball(seed in any::<u64>()) {
        let s = polytope(seed);
        let polar = Space::polytope(s.polar_vertices().to_vec()).unwrap();
        prop_assert!(same_set(polar.polar_vertices(), s.primal_vertices(), 1e-9));
    }

    #[test]
    fn polar_vertices_are_tight_on_a_full_rank_set(seed in any::<u64>()) {
        let s = polytope(seed);
        for w in s.polar_vertices() {
            let values: Vec<f64> = s.primal_vertices().iter().map(|v| dot(w, v)).collect();
            let top = values.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert!((top - 1.0).abs() <= 1e-9);
            let tight: Vec<Vec<f64>> = s
                .primal_vertices()
                .iter()
                .zip(&values)
                .filter(|(_, &x)| (x - 1.0).abs() <= 1e-9)
                .map(|(v, _)| v.clone())
                .collect();
            prop_assert_eq!(rank(tight, 1e-9), s.dim());
        }
    }

    #[test]
    fn dual_pairing_is_bounded_by_norms(seed in any::<u64>(), euclid in any::<bool>()) {
        let mut rng = random::trial_rng(seed, 1);
        let s = if euclid { Space::euclidean(rng.gen_range(1..=4)).unwrap() } else { polytope(seed) };
        let x: Vec<f64> = random::gaussian(&mut rng, s.dim());
        let xs: Vec<f64> = random::gaussian(&mut rng, s.dim());
        let bound = s.primal_norm(&x).unwrap() * s.dual_norm(&xs).unwrap();
        prop_assert!(dot(&x, &xs).abs() <= bound + 1e-9 * bound.max(1.0));
        if !euclid {
            let best = s.primal_vertices().iter().map(|v| dot(v, &xs)).fold(f64::MIN, f64::max);
            prop_assert!((best - s.dual_norm(&xs).unwrap()).abs() <= 1e-9 * best.abs().max(1.0));
        }
    }

    #[test]
    fn gauge_is_homogeneous(seed in any::<u64>(), c in -5.0f64..5.0) {
        let s = polytope(seed);
        let mut rng = random::trial_rng(seed, 2);
        let x: Vec<f64> = random::gaussian(&mut rng, s.dim());
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        let lhs = s.primal_norm(&cx).unwrap();
        let rhs = c.abs() * s.primal_norm(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn minimal_face_contains_its_point(seed in any::<u64>()) {
        let s = polytope(seed);
        let mut rng = random::trial_rng(seed, 3);
        let x = if rng.gen_bool(0.5) { random::face_point(&mut rng, &s) } else { random::sphere_point(&mut rng, &s) };
        let face = s.minimal_face(&x).unwrap();
        for p in &face.points {
            let n = s.primal_vertices().iter().map(|v| dot(v, p)).fold(f64::MIN, f64::max);
            prop_assert!((n - 1.0).abs() <= 1e-9);
        }
        let k = face.points.len();
        let mut c = Constraints::new(k);
        c.add_eq(vec![1.0; k], 1.0);
        for i in 0..s.dim() {
            c.add_eq(face.points.iter().map(|p| p[i]).collect(), x[i]);
        }
        prop_assert!(lp::feasible_point(&c).unwrap().is_some());
    }

    #[test]
    fn strict_convexity_gives_singleton_faces(seed in any::<u64>()) {
        let mut rng = random::trial_rng(seed, 4);
        let s = random::space::<f64, _>(&mut rng, 4);
        if !s.is_strictly_convex_dual() {
            prop_assert!(s.is_polytope() && s.dim() >= 2);
            return Ok(());
        }
        for _ in 0..100 {
            let x = random::sphere_point(&mut rng, &s);
            prop_assert!(s.minimal_face(&x).unwrap().is_singleton());
        }
    }
}

#[test]
fn simplexoid_faces_decompose_uniquely() {
    // Octahedron: every facet is a triangle, so barycentric weights are unique.
    let s = Space::hypercube(3).unwrap();
    let mut rng = random::trial_rng(11, 0);
    for _ in 0..50 {
        let x = random::sphere_point(&mut rng, &s);
        let face = s.minimal_face(&x).unwrap();
        let m: Vec<Vec<f64>> = face
            .points
            .iter()
            .map(|p| {
                let mut r = p.clone();
                r.push(1.0);
                r
            })
            .collect();
        assert_eq!(rank(m, 1e-9), face.points.len());
    }
    assert!(s.is_simplexoid_dual());
    assert!(!Space::cross_polytope(3).unwrap().is_simplexoid_dual());
}
