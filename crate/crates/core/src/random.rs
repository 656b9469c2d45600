//! Seeded generators for spaces, measures and test functions.
//!
//! Every generator takes the random source explicitly. [`trial_rng`] gives
//! each trial of a randomized run its own stream, so trials can be replayed
//! or run in any order.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::geometry::Space;
use crate::linalg;
use crate::measures::{Atom, AtomicMeasure, ProbabilityAtoms, VectorMeasure};
use crate::scalar::Scalar;
use crate::transfer::{self, DFunction};

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn gaussian<S: Scalar, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<S> {
    (0..dim)
        .map(|_| S::of(rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

fn nonzero_gaussian<S: Scalar, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<S> {
    loop {
        let g = gaussian(rng, dim);
        if linalg::norm2(&g) > S::of(1e-3) {
            return g;
        }
    }
}

/// Symmetric polytope ball: `pairs` random unit vectors and their negatives,
/// pushed through a random linear map.
pub fn polytope_space<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    pairs: usize,
) -> Space<S> {
    let pairs = pairs.max(dim);
    if dim == 1 {
        let a = S::of(rng.gen_range(0.2..5.0));
        return Space::symmetric_hull(vec![vec![a]]).expect("segment");
    }
    loop {
        let map: Vec<Vec<S>> = (0..dim)
            .map(|i| {
                let mut row: Vec<S> = gaussian(rng, dim);
                row[i] += S::of(2.0);
                row
            })
            .collect();
        let half: Vec<Vec<S>> = (0..pairs)
            .map(|_| {
                let u = nonzero_gaussian::<S, _>(rng, dim);
                let u = linalg::scale(&u, S::one() / linalg::norm2(&u));
                map.iter().map(|row| linalg::dot(row, &u)).collect()
            })
            .collect();
        if let Ok(space) = Space::symmetric_hull(half) {
            return space;
        }
    }
}

/// Random centrally symmetric polygon with `2 * pairs` vertices at most.
pub fn polygon_space<S: Scalar, R: Rng + ?Sized>(rng: &mut R, pairs: usize) -> Space<S> {
    polytope_space(rng, 2, pairs)
}

/// A polytope or Euclidean space of dimension at most `max_dim`.
pub fn space<S: Scalar, R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> Space<S> {
    let dim = rng.gen_range(1..=max_dim);
    if rng.gen_bool(0.3) {
        Space::euclidean(dim).expect("positive dimension")
    } else {
        let pairs = rng.gen_range(dim..=dim + 3);
        polytope_space(rng, dim, pairs)
    }
}

/// Uniformly random direction scaled onto the dual sphere.
pub fn sphere_point<S: Scalar, R: Rng + ?Sized>(rng: &mut R, space: &Space<S>) -> Vec<S> {
    let g = nonzero_gaussian(rng, space.dim());
    let n = space.dual_norm(&g).expect("dimension");
    linalg::scale(&g, S::one() / n)
}

pub fn ball_point<S: Scalar, R: Rng + ?Sized>(rng: &mut R, space: &Space<S>) -> Vec<S> {
    let r = S::of(rng.gen_range(0.0..1.0f64));
    linalg::scale(&sphere_point(rng, space), r)
}

fn dirichlet<S: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, floor: f64) -> Vec<S> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(floor..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| S::of(x / total)).collect()
}

/// A point in the relative interior of a random face of a random dual facet.
/// Euclidean spaces return a sphere point.
pub fn face_point<S: Scalar, R: Rng + ?Sized>(rng: &mut R, space: &Space<S>) -> Vec<S> {
    let Ok(facets) = space.dual_facets() else {
        return sphere_point(rng, space);
    };
    let facet = facets.choose(rng).expect("facets");
    let k = rng.gen_range(1..=facet.len());
    let chosen: Vec<usize> = facet.choose_multiple(rng, k).copied().collect();
    convex_combination(rng, space, &chosen, 0.1)
}

fn convex_combination<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space<S>,
    indices: &[usize],
    floor: f64,
) -> Vec<S> {
    let w = dirichlet::<S, _>(rng, indices.len(), floor);
    let mut x = vec![S::zero(); space.dim()];
    for (&i, &l) in indices.iter().zip(&w) {
        linalg::axpy(&mut x, l, &space.polar_vertices()[i]);
    }
    x
}

/// Largest `s >= 0` with `x + s d` in the dual ball.
fn exit_time<S: Scalar>(space: &Space<S>, x: &[S], d: &[S]) -> S {
    if space.is_polytope() {
        let eps = S::of(1e-10) * linalg::norm2(d);
        space
            .primal_vertices()
            .iter()
            .filter_map(|v| {
                let dv = linalg::dot(d, v);
                (dv > eps).then(|| ((S::one() - linalg::dot(x, v)) / dv).max(S::zero()))
            })
            .fold(S::infinity(), S::min)
    } else {
        let dd = linalg::dot(d, d);
        let xd = linalg::dot(x, d) / dd;
        let disc = (xd * xd + (S::one() - linalg::dot(x, x)) / dd).max(S::zero());
        (-xd + disc.sqrt()).max(S::zero())
    }
}

/// Splits `x` into two points on the line through it along `d`, moving a
/// random fraction of the way to the ball boundary on each side.
fn split_along<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space<S>,
    x: &[S],
    d: &[S],
    to_boundary: bool,
) -> Option<[(Vec<S>, S); 2]> {
    let up = exit_time(space, x, d);
    let down = exit_time(space, x, &linalg::scale(d, -S::one()));
    let scale = linalg::norm2(d);
    if !(up * scale > S::of(1e-6) && down * scale > S::of(1e-6))
        || !up.is_finite()
        || !down.is_finite()
    {
        return None;
    }
    let mut frac = || {
        if to_boundary && rng.gen_bool(0.5) {
            S::one()
        } else {
            S::of(rng.gen_range(0.3..1.0))
        }
    };
    let (sp, sm) = (up * frac(), down * frac());
    let a: Vec<S> = x.iter().zip(d).map(|(&xi, &di)| xi + sp * di).collect();
    let b: Vec<S> = x.iter().zip(d).map(|(&xi, &di)| xi - sm * di).collect();
    let lam = sm / (sp + sm);
    Some([(a, lam), (b, S::one() - lam)])
}

/// Recursive chord splitting of a dual sphere point inside its minimal face.
/// The result is a probability on the same face with barycenter `x`; on
/// Euclidean spaces (singleton faces) it is the Dirac at `x`.
pub fn face_split<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space<S>,
    x: &[S],
    depth: usize,
) -> Result<ProbabilityAtoms<S>> {
    let mut out = Vec::new();
    face_split_into(rng, space, x, S::one(), depth, &mut out)?;
    ProbabilityAtoms::new(out)
}

fn face_split_into<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space<S>,
    x: &[S],
    w: S,
    depth: usize,
    out: &mut Vec<(Vec<S>, S)>,
) -> Result<()> {
    if depth == 0 || !space.is_polytope() || space.polar_vertex_index(x).is_some() {
        out.push((x.to_vec(), w));
        return Ok(());
    }
    let face = space.minimal_face(x)?;
    let mut d = vec![S::zero(); space.dim()];
    for p in &face.points {
        let c = S::of(rng.sample::<f64, _>(StandardNormal));
        linalg::axpy(&mut d, c, &linalg::sub(p, x));
    }
    match split_along(rng, space, x, &d, true) {
        Some(parts) => {
            for (y, l) in parts {
                let next = if rng.gen_bool(0.6) { depth - 1 } else { 0 };
                face_split_into(rng, space, &y, w * l, next, out)?;
            }
            Ok(())
        }
        None => {
            out.push((x.to_vec(), w));
            Ok(())
        }
    }
}

/// Random dilation of `p` inside the dual ball: atoms are split along random
/// chords, recursively up to `depth` times.
pub fn dilate<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space<S>,
    p: &ProbabilityAtoms<S>,
    depth: usize,
) -> Result<ProbabilityAtoms<S>> {
    let mut out = Vec::new();
    for a in p.atoms() {
        dilate_into(rng, space, &a.xstar, a.w, depth, &mut out);
    }
    ProbabilityAtoms::new(out)
}

fn dilate_into<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space<S>,
    x: &[S],
    w: S,
    depth: usize,
    out: &mut Vec<(Vec<S>, S)>,
) {
    if depth == 0 || rng.gen_bool(0.25) {
        out.push((x.to_vec(), w));
        return;
    }
    let d = nonzero_gaussian(rng, space.dim());
    match split_along(rng, space, x, &d, true) {
        Some(parts) => {
            for (y, l) in parts {
                dilate_into(rng, space, &y, w * l, depth - 1, out);
            }
        }
        None => out.push((x.to_vec(), w)),
    }
}

/// Random vector measure over labels `t0..t{n-1}`, `n <= max_labels`. Some
/// entries are zero.
pub fn vector_measure<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space<S>,
    max_labels: usize,
) -> VectorMeasure<S> {
    let n = rng.gen_range(1..=max_labels);
    VectorMeasure::from_entries((0..n).map(|i| {
        let v = if rng.gen_bool(0.15) {
            vec![S::zero(); space.dim()]
        } else {
            let s = S::of(rng.gen_range(0.1..3.0));
            linalg::scale(&sphere_point(rng, space), s)
        };
        (format!("t{i}"), v)
    }))
}

/// A random element of `N(mu)`: every atom of `K mu` is split inside its
/// minimal face.
pub fn n_member<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    mu: &VectorMeasure<S>,
    space: &Space<S>,
    depth: usize,
) -> Result<AtomicMeasure<S>> {
    let k = transfer::transfer_k(mu, space)?;
    let mut atoms = Vec::new();
    for a in k.atoms() {
        let fiber = face_split(rng, space, &a.xstar, depth)?;
        atoms.extend(
            fiber
                .atoms()
                .iter()
                .map(|b| Atom::new(a.t.clone(), b.xstar.clone(), a.w * b.w)),
        );
    }
    AtomicMeasure::new(atoms)
}

/// Random positive atomic measure with at most `max_atoms` atoms spread over
/// at most `max_labels` labels, atoms anywhere in the dual ball.
pub fn positive_measure<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space<S>,
    max_labels: usize,
    max_atoms: usize,
) -> Result<AtomicMeasure<S>> {
    let labels = rng.gen_range(1..=max_labels);
    let n = rng.gen_range(1..=max_atoms);
    AtomicMeasure::new(
        (0..n)
            .map(|_| {
                let t = format!("t{}", rng.gen_range(0..labels));
                Atom::new(t, ball_point(rng, space), S::of(rng.gen_range(0.01..2.0)))
            })
            .collect(),
    )
}

/// Random probability with at most `max_atoms` atoms: a mix of polar
/// vertices, face points, sphere points and interior points.
pub fn probability<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space<S>,
    max_atoms: usize,
) -> Result<ProbabilityAtoms<S>> {
    let n = rng.gen_range(1..=max_atoms);
    let w = dirichlet::<S, _>(rng, n, 0.05);
    let atoms = w
        .into_iter()
        .map(|l| {
            let x = match rng.gen_range(0..4) {
                0 if space.is_polytope() => space
                    .polar_vertices()
                    .choose(rng)
                    .expect("vertices")
                    .clone(),
                1 => face_point(rng, space),
                2 => sphere_point(rng, space),
                _ => ball_point(rng, space),
            };
            (x, l)
        })
        .collect();
    ProbabilityAtoms::new(atoms)
}

/// Random probability that is maximal when `maximal` is set, and otherwise
/// has at least one atom well away from the extreme points.
pub fn fiber<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space<S>,
    max_atoms: usize,
    maximal: bool,
) -> Result<ProbabilityAtoms<S>> {
    let n = rng.gen_range(1..=max_atoms);
    let w = dirichlet::<S, _>(rng, n, 0.05);
    let bad = rng.gen_range(0..n);
    let atoms = w
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let x = if maximal || (i != bad && rng.gen_bool(0.5)) {
                extreme_point(rng, space)
            } else {
                non_extreme_point(rng, space)
            };
            (x, l)
        })
        .collect();
    ProbabilityAtoms::new(atoms)
}

fn extreme_point<S: Scalar, R: Rng + ?Sized>(rng: &mut R, space: &Space<S>) -> Vec<S> {
    if space.is_polytope() {
        space
            .polar_vertices()
            .choose(rng)
            .expect("vertices")
            .clone()
    } else {
        sphere_point(rng, space)
    }
}

fn non_extreme_point<S: Scalar, R: Rng + ?Sized>(rng: &mut R, space: &Space<S>) -> Vec<S> {
    if space.is_polytope() {
        let m = space.polar_vertices().len();
        let k = rng.gen_range(2..=m.min(4));
        let idx: Vec<usize> = (0..m)
            .collect::<Vec<_>>()
            .choose_multiple(rng, k)
            .copied()
            .collect();
        convex_combination(rng, space, &idx, 0.2)
    } else {
        let r = S::of(rng.gen_range(0.0..0.9));
        linalg::scale(&sphere_point(rng, space), r)
    }
}

/// Random `D`-function with 1 to 3 linear pieces per label.
pub fn dfunction<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    labels: &[&str],
    dim: usize,
) -> DFunction<S> {
    let pieces: BTreeMap<String, Vec<Vec<S>>> = labels
        .iter()
        .map(|t| {
            let k = rng.gen_range(1..=3);
            (t.to_string(), (0..k).map(|_| gaussian(rng, dim)).collect())
        })
        .collect();
    DFunction::new(pieces)
}
