//! Choquet order on the dual ball and the induced order on `N(mu)`.
//!
//! The Choquet order between two finitely supported probabilities is decided
//! by the dilation linear program: `p` precedes `q` iff some nonnegative
//! matrix moves every atom of `p` onto the atoms of `q` without changing its
//! barycenter. Sampled convex test functions are only used as a
//! cross-check; they never decide a verdict.
//!
//! On `N(mu)` the order `nu1 <_D nu2` holds iff, label by label, the fiber of
//! `nu2` precedes the fiber of `nu1` in the Choquet order. Note the reversal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Space;
use crate::linalg;
use crate::lp::{self, Constraints, LinearProgram};
use crate::measures::{
    disintegrate, recompose, Atom, AtomicMeasure, DisintegrationKernel, ProbabilityAtoms,
    VectorMeasure, WeightedPoint,
};
use crate::scalar::Scalar;
use crate::transfer::{self, DFunction};

/// Default cap on enumerated minimal measures.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000;

/// Tolerance for comparing integrals of test functions.
pub const INTEGRAL_TOL: f64 = 1e-7;

/// One affine piece `<a, x> + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct AffinePiece<S> {
    pub a: Vec<S>,
    pub c: S,
}

/// Convex piecewise-linear function `x -> max_j (<a_j, x> + c_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct ConvexPL<S> {
    pieces: Vec<AffinePiece<S>>,
}

impl<S: Scalar> ConvexPL<S> {
    pub fn new(pieces: Vec<(Vec<S>, S)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::EmptyFunction);
        }
        let dim = pieces[0].0.len();
        if let Some((a, _)) = pieces.iter().find(|(a, _)| a.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.len(),
            });
        }
        Ok(ConvexPL {
            pieces: pieces
                .into_iter()
                .map(|(a, c)| AffinePiece { a, c })
                .collect(),
        })
    }

    /// Maximum of linear functionals.
    pub fn sublinear(normals: Vec<Vec<S>>) -> Result<Self> {
        Self::new(normals.into_iter().map(|a| (a, S::zero())).collect())
    }

    pub fn affine(a: Vec<S>, c: S) -> Self {
        ConvexPL {
            pieces: vec![AffinePiece { a, c }],
        }
    }

    /// `x -> |x_k|`.
    pub fn abs_coordinate(dim: usize, k: usize) -> Self {
        let mut e = vec![S::zero(); dim];
        e[k] = S::one();
        let m = linalg::scale(&e, -S::one());
        Self::sublinear(vec![e, m]).expect("nonempty")
    }

    /// `x -> max_w (<w, x> - |w|^2 / 2)`: the tangent planes of `|x|^2 / 2` at
    /// the given points. It matches `|x|^2 / 2` at every point of the list, so
    /// its upper envelope over their convex hull exceeds it strictly off the
    /// list.
    pub fn tangent_paraboloid(points: &[Vec<S>]) -> Result<Self> {
        let half = S::of(0.5);
        Self::new(
            points
                .iter()
                .map(|w| (w.clone(), -half * linalg::dot(w, w)))
                .collect(),
        )
    }

    pub fn pieces(&self) -> &[AffinePiece<S>] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].a.len()
    }

    pub fn is_sublinear(&self) -> bool {
        self.pieces.iter().all(|p| p.c == S::zero())
    }

    pub fn eval(&self, x: &[S]) -> S {
        self.pieces
            .iter()
            .map(|p| linalg::dot(&p.a, x) + p.c)
            .fold(S::neg_infinity(), S::max)
    }

    pub fn integrate(&self, p: &ProbabilityAtoms<S>) -> S {
        p.expect(|x| self.eval(x))
    }

    /// The sublinear function agreeing with `self` on the hyperplane
    /// `{y : <y, v> = 1}`: each constant becomes the linear term `c <y, v>`.
    pub fn homogenize(&self, v: &[S]) -> Self {
        ConvexPL {
            pieces: self
                .pieces
                .iter()
                .map(|p| AffinePiece {
                    a: linalg::add(&p.a, &linalg::scale(v, p.c)),
                    c: S::zero(),
                })
                .collect(),
        }
    }
}

/// Certificate for `p < q` in the Choquet order: `matrix[i][j]` is the mass
/// moved from source atom `i` to target atom `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct DilationWitness<S> {
    pub source: Vec<WeightedPoint<S>>,
    pub target: Vec<WeightedPoint<S>>,
    pub matrix: Vec<Vec<S>>,
}

impl<S: Scalar> DilationWitness<S> {
    /// Largest violation among nonnegativity, both marginals and the
    /// per-row barycenter identities.
    pub fn residual(&self) -> S {
        let mut worst = S::zero();
        for (i, row) in self.matrix.iter().enumerate() {
            for &x in row {
                worst = worst.max(-x);
            }
            let s: S = row.iter().copied().sum();
            worst = worst.max((s - self.source[i].w).abs());
            let mut bc = vec![S::zero(); self.source[i].xstar.len()];
            for (j, &x) in row.iter().enumerate() {
                linalg::axpy(&mut bc, x, &self.target[j].xstar);
            }
            let want = linalg::scale(&self.source[i].xstar, self.source[i].w);
            worst = worst.max(linalg::max_abs_diff(&bc, &want));
        }
        for (j, t) in self.target.iter().enumerate() {
            let s: S = self.matrix.iter().map(|r| r[j]).sum();
            worst = worst.max((s - t.w).abs());
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ChoquetVerdict<S> {
    pub holds: bool,
    pub barycenters_match: bool,
    pub witness: Option<DilationWitness<S>>,
}

fn barycenter_tol<S: Scalar>(space: &Space<S>) -> S {
    space.tol() * S::of(10.0)
}

/// Decides `p < q` in the Choquet order with the dilation LP.
pub fn choquet_leq<S: Scalar>(
    p: &ProbabilityAtoms<S>,
    q: &ProbabilityAtoms<S>,
    space: &Space<S>,
) -> Result<ChoquetVerdict<S>> {
    p.validate(space)?;
    q.validate(space)?;
    if linalg::max_abs_diff(&p.barycenter(), &q.barycenter()) > barycenter_tol(space) {
        return Ok(ChoquetVerdict {
            holds: false,
            barycenters_match: false,
            witness: None,
        });
    }
    let (n, m, d) = (p.len(), q.len(), space.dim());
    let var = |i: usize, j: usize| i * m + j;
    let mut c = Constraints::new(n * m);
    for (i, a) in p.atoms().iter().enumerate() {
        let mut row = vec![S::zero(); n * m];
        for j in 0..m {
            row[var(i, j)] = S::one();
        }
        c.add_eq(row, a.w);
        for k in 0..d {
            let mut row = vec![S::zero(); n * m];
            for (j, b) in q.atoms().iter().enumerate() {
                row[var(i, j)] = b.xstar[k];
            }
            c.add_eq(row, a.w * a.xstar[k]);
        }
    }
    for (j, b) in q.atoms().iter().enumerate() {
        let mut row = vec![S::zero(); n * m];
        for i in 0..n {
            row[var(i, j)] = S::one();
        }
        c.add_eq(row, b.w);
    }
    let witness = lp::feasible_point(&c)?.map(|x| DilationWitness {
        source: p.atoms().to_vec(),
        target: q.atoms().to_vec(),
        matrix: (0..n)
            .map(|i| (0..m).map(|j| x[var(i, j)].max(S::zero())).collect())
            .collect(),
    });
    Ok(ChoquetVerdict {
        holds: witness.is_some(),
        barycenters_match: true,
        witness,
    })
}

/// A convex function with `int k dp > int k dq`, read off a Farkas
/// certificate of the infeasible dilation LP. Returns `None` when the LP finds
/// no separation, in particular when `p < q`.
pub fn choquet_falsifier<S: Scalar>(
    p: &ProbabilityAtoms<S>,
    q: &ProbabilityAtoms<S>,
) -> Result<Option<ConvexPL<S>>> {
    let (n, m, d) = (p.len(), q.len(), p.dim());
    // variables: alpha_i, beta_i (d each), gamma_j; all boxed in [-1, 1]
    let nv = n * (d + 1) + m;
    let alpha = |i: usize| i * (d + 1);
    let beta = |i: usize, k: usize| i * (d + 1) + 1 + k;
    let gamma = |j: usize| n * (d + 1) + j;
    let mut c = Constraints::new(nv);
    for v in 0..nv {
        c.bounds(v, Some(-S::one()), Some(S::one()));
    }
    for i in 0..n {
        for (j, b) in q.atoms().iter().enumerate() {
            let mut row = vec![S::zero(); nv];
            row[alpha(i)] = S::one();
            row[gamma(j)] = S::one();
            for k in 0..d {
                row[beta(i, k)] = b.xstar[k];
            }
            c.add_ge(row, S::zero());
        }
    }
    let mut obj = vec![S::zero(); nv];
    for (i, a) in p.atoms().iter().enumerate() {
        obj[alpha(i)] = a.w;
        for k in 0..d {
            obj[beta(i, k)] = a.w * a.xstar[k];
        }
    }
    for (j, b) in q.atoms().iter().enumerate() {
        obj[gamma(j)] = b.w;
    }
    let out = lp::solve(&LinearProgram::minimize(obj, c))?;
    let Some(x) = out.solution else {
        return Ok(None);
    };
    let k = ConvexPL::new(
        (0..n)
            .map(|i| {
                let slope = (0..d).map(|k| -x[beta(i, k)]).collect();
                (slope, -x[alpha(i)])
            })
            .collect(),
    )?;
    let gap = k.integrate(p) - k.integrate(q);
    Ok((gap > S::of(INTEGRAL_TOL)).then_some(k))
}

/// Whether `p` is carried by the extreme points of the dual ball.
pub fn is_maximal<S: Scalar>(p: &ProbabilityAtoms<S>, space: &Space<S>) -> bool {
    p.points().all(|x| is_extreme(x, space))
}

fn is_extreme<S: Scalar>(x: &[S], space: &Space<S>) -> bool {
    if space.is_polytope() {
        space.polar_vertex_index(x).is_some()
    } else {
        space.on_dual_sphere(x)
    }
}

/// Upper envelope `f*` at a point of the dual ball.
///
/// Polytope balls: the exact value, `max sum lambda_j f(w_j)` over
/// probabilities on the polar vertices with barycenter `xstar`. Euclidean
/// ball: `f` itself on the sphere; inside, the best two-point chord
/// decomposition along a fixed direction family, which bounds `f*` from
/// below.
pub fn upper_envelope_at<S: Scalar>(f: &ConvexPL<S>, xstar: &[S], space: &Space<S>) -> Result<S> {
    space.check_dim(xstar)?;
    let norm = space.dual_norm(xstar)?;
    if norm > S::one() + space.tol() {
        return Err(Error::OutsideBall {
            norm: norm.as_f64(),
        });
    }
    if space.is_polytope() {
        let w = space.polar_vertices();
        let mut c = Constraints::new(w.len());
        c.add_eq(vec![S::one(); w.len()], S::one());
        for k in 0..space.dim() {
            c.add_eq(w.iter().map(|v| v[k]).collect(), xstar[k]);
        }
        let obj = w.iter().map(|v| f.eval(v)).collect();
        let out = lp::solve(&LinearProgram::maximize(obj, c))?;
        return out.value.ok_or(Error::OutsideBall {
            norm: norm.as_f64(),
        });
    }
    let here = f.eval(xstar);
    if norm >= S::one() - space.tol() {
        return Ok(here);
    }
    let mut best = here;
    for d in chord_directions(f, space.dim()) {
        let (a, b, lam) = euclidean_chord(xstar, &d);
        best = best.max(lam * f.eval(&a) + (S::one() - lam) * f.eval(&b));
    }
    Ok(best)
}

fn chord_directions<S: Scalar>(f: &ConvexPL<S>, dim: usize) -> Vec<Vec<S>> {
    let mut dirs: Vec<Vec<S>> = (0..dim)
        .map(|k| {
            let mut e = vec![S::zero(); dim];
            e[k] = S::one();
            e
        })
        .collect();
    let ps = f.pieces();
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let d = linalg::sub(&ps[i].a, &ps[j].a);
            if linalg::norm2(&d) > S::of(1e-12) {
                dirs.push(d);
            }
        }
    }
    dirs
}

/// Writes an interior point `x` of the Euclidean ball as `lam * a + (1 - lam) * b`
/// with `a`, `b` the sphere points on the line through `x` along `d`.
fn euclidean_chord<S: Scalar>(x: &[S], d: &[S]) -> (Vec<S>, Vec<S>, S) {
    let dd = linalg::dot(d, d);
    let xd = linalg::dot(x, d) / dd;
    let disc = (xd * xd + (S::one() - linalg::dot(x, x)) / dd)
        .max(S::zero())
        .sqrt();
    let (sp, sm) = (-xd + disc, -xd - disc);
    let a: Vec<S> = x.iter().zip(d).map(|(&xi, &di)| xi + sp * di).collect();
    let b: Vec<S> = x.iter().zip(d).map(|(&xi, &di)| xi + sm * di).collect();
    let lam = -sm / (sp - sm);
    (a, b, lam)
}

/// `int (f* - f) dp` for one test function.
pub fn envelope_gap<S: Scalar>(
    p: &ProbabilityAtoms<S>,
    f: &ConvexPL<S>,
    space: &Space<S>,
) -> Result<S> {
    let mut gap = S::zero();
    for a in p.atoms() {
        gap += a.w * (upper_envelope_at(f, &a.xstar, space)? - f.eval(&a.xstar));
    }
    Ok(gap)
}

/// Test functions that detect every non-extreme atom: coordinate absolute
/// values, plus for polytopes the tangent paraboloid through the polar
/// vertices.
pub fn canonical_convex_family<S: Scalar>(space: &Space<S>) -> Vec<ConvexPL<S>> {
    let d = space.dim();
    let mut fam: Vec<ConvexPL<S>> = (0..d).map(|k| ConvexPL::abs_coordinate(d, k)).collect();
    if space.is_polytope() {
        fam.push(ConvexPL::tangent_paraboloid(space.polar_vertices()).expect("vertices"));
    }
    fam
}

pub fn random_convex_pl<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    sublinear: bool,
) -> ConvexPL<S> {
    let k = rng.gen_range(1..=4);
    let pieces = (0..k)
        .map(|_| {
            let a = (0..dim).map(|_| S::of(rng.gen_range(-1.0..1.0))).collect();
            let c = if sublinear {
                S::zero()
            } else {
                S::of(rng.gen_range(-1.0..1.0))
            };
            (a, c)
        })
        .collect();
    ConvexPL::new(pieces).expect("nonempty")
}

/// Mokobodzki test: `int f dp = int f* dp` for the canonical family and
/// `samples` random convex functions, up to [`INTEGRAL_TOL`].
pub fn mokobodzki_maximal<S: Scalar, R: Rng + ?Sized>(
    p: &ProbabilityAtoms<S>,
    space: &Space<S>,
    samples: usize,
    rng: &mut R,
) -> Result<bool> {
    let tol = S::of(INTEGRAL_TOL);
    for f in canonical_convex_family(space) {
        if envelope_gap(p, &f, space)? > tol {
            return Ok(false);
        }
    }
    for _ in 0..samples {
        let f = random_convex_pl(rng, space.dim(), false);
        if envelope_gap(p, &f, space)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Replaces every non-extreme atom of `p` by a probability on extreme points
/// with the same barycenter. Returns the new measure and the dilation that
/// certifies `p < result`.
///
/// Polytope balls: the atom is written as a basic solution of
/// `sum lambda_j w_j = x` over the vertices of its minimal face (or over all
/// polar vertices for interior atoms), visiting vertices in index order, so at
/// most `dim + 1` vertices are used and the output is deterministic.
/// Euclidean ball: the chord through the atom along the first coordinate axis.
pub fn maximalize_with_witness<S: Scalar>(
    p: &ProbabilityAtoms<S>,
    space: &Space<S>,
) -> Result<(ProbabilityAtoms<S>, DilationWitness<S>)> {
    p.validate(space)?;
    let mut pieces: Vec<Vec<(Vec<S>, S)>> = Vec::with_capacity(p.len());
    for a in p.atoms() {
        pieces.push(extreme_decomposition(&a.xstar, space)?);
    }
    let flat: Vec<(Vec<S>, S)> = p
        .atoms()
        .iter()
        .zip(&pieces)
        .flat_map(|(a, ps)| ps.iter().map(move |(x, l)| (x.clone(), a.w * *l)))
        .collect();
    let target = ProbabilityAtoms::new(flat)?;
    let locate = |x: &[S]| {
        target
            .points()
            .position(|y| linalg::max_abs_diff(x, y) <= S::of(1e-11))
            .expect("merged target atom")
    };
    let mut matrix = vec![vec![S::zero(); target.len()]; p.len()];
    for (i, (a, ps)) in p.atoms().iter().zip(&pieces).enumerate() {
        for (x, l) in ps {
            matrix[i][locate(x)] += a.w * *l;
        }
    }
    let witness = DilationWitness {
        source: p.atoms().to_vec(),
        target: target.atoms().to_vec(),
        matrix,
    };
    Ok((target, witness))
}

pub fn maximalize<S: Scalar>(
    p: &ProbabilityAtoms<S>,
    space: &Space<S>,
) -> Result<ProbabilityAtoms<S>> {
    maximalize_with_witness(p, space).map(|(m, _)| m)
}

/// Convex weights over extreme points with barycenter `x`.
fn extreme_decomposition<S: Scalar>(x: &[S], space: &Space<S>) -> Result<Vec<(Vec<S>, S)>> {
    if is_extreme(x, space) {
        return Ok(vec![(x.to_vec(), S::one())]);
    }
    if !space.is_polytope() {
        let mut d = vec![S::zero(); space.dim()];
        d[0] = S::one();
        let (a, b, lam) = euclidean_chord(x, &d);
        return Ok(vec![(a, lam), (b, S::one() - lam)]);
    }
    let candidates: Vec<Vec<S>> = if space.on_dual_sphere(x) {
        space.minimal_face(x)?.points
    } else {
        space.polar_vertices().to_vec()
    };
    let lam = decompose_over(x, &candidates)?.ok_or(Error::OutsideBall {
        norm: space.dual_norm(x)?.as_f64(),
    })?;
    let mut out: Vec<(Vec<S>, S)> = candidates
        .into_iter()
        .zip(lam)
        .filter(|(_, l)| *l > S::zero())
        .collect();
    let total: S = out.iter().map(|(_, l)| *l).sum();
    for (_, l) in out.iter_mut() {
        *l /= total;
    }
    Ok(out)
}

/// A basic solution `lambda >= 0`, `sum lambda = 1`, `sum lambda_j y_j = x`.
fn decompose_over<S: Scalar>(x: &[S], points: &[Vec<S>]) -> Result<Option<Vec<S>>> {
    let mut c = Constraints::new(points.len());
    c.add_eq(vec![S::one(); points.len()], S::one());
    for k in 0..x.len() {
        c.add_eq(points.iter().map(|v| v[k]).collect(), x[k]);
    }
    lp::feasible_point(&c)
}

/// Attempts to write the sphere point `x` as a probability over `candidates`
/// (points of the ball distinct from `x`). Returns the decomposition when the
/// split LP is feasible.
pub fn try_fiber_split<S: Scalar>(
    space: &Space<S>,
    x: &[S],
    candidates: &[Vec<S>],
) -> Result<Option<ProbabilityAtoms<S>>> {
    space.check_dim(x)?;
    if candidates.is_empty() {
        return Ok(None);
    }
    for y in candidates {
        let n = space.dual_norm(y)?;
        if n > S::one() + space.tol() {
            return Err(Error::OutsideBall { norm: n.as_f64() });
        }
    }
    let Some(lam) = decompose_over(x, candidates)? else {
        return Ok(None);
    };
    let atoms: Vec<(Vec<S>, S)> = candidates
        .iter()
        .cloned()
        .zip(lam)
        .filter(|(_, l)| *l > S::zero())
        .collect();
    let total: S = atoms.iter().map(|(_, l)| *l).sum();
    Ok(Some(ProbabilityAtoms::new(
        atoms.into_iter().map(|(y, l)| (y, l / total)).collect(),
    )?))
}

/// Outcome of a `<_D` comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PrecD {
    Holds,
    /// The two measures have different images under the Hustad map, which
    /// already rules the relation out.
    HustadMismatch {
        label: String,
    },
    /// The fiber of the second measure at `label` does not precede the fiber
    /// of the first in the Choquet order.
    FiberNotDominated {
        label: String,
    },
}

impl PrecD {
    pub fn holds(&self) -> bool {
        matches!(self, PrecD::Holds)
    }
}

/// Decides `nu1 <_D nu2` for two members of a common `N(mu)`.
///
/// Inputs outside `N(mu)` are rejected: the fiberwise criterion is only
/// established there.
pub fn precd<S: Scalar>(
    nu1: &AtomicMeasure<S>,
    nu2: &AtomicMeasure<S>,
    space: &Space<S>,
) -> Result<PrecD> {
    nu1.ensure_positive()?;
    nu2.ensure_positive()?;
    let mu = transfer::hustad(nu1);
    let mu2 = transfer::hustad(nu2);
    let tol = space.tol() * mu.total_variation(space)?.max(S::one());
    if mu.max_abs_diff(&mu2) > tol {
        let label = first_differing_label(&mu, &mu2, tol);
        return Ok(PrecD::HustadMismatch { label });
    }
    for nu in [nu1, nu2] {
        if let Some(why) = transfer::membership_defect(nu, &mu, space) {
            return Err(Error::NotInN(why));
        }
    }
    let k1 = disintegrate(nu1)?;
    let k2 = disintegrate(nu2)?;
    for t in k1.sigma.keys().chain(k2.sigma.keys()) {
        let (Some(f1), Some(f2)) = (k1.kernel(t), k2.kernel(t)) else {
            return Ok(PrecD::FiberNotDominated { label: t.clone() });
        };
        if !choquet_leq(f2, f1, space)?.holds {
            return Ok(PrecD::FiberNotDominated { label: t.clone() });
        }
    }
    Ok(PrecD::Holds)
}

fn first_differing_label<S: Scalar>(a: &VectorMeasure<S>, b: &VectorMeasure<S>, tol: S) -> String {
    a.entries
        .keys()
        .chain(b.entries.keys())
        .find(|t| {
            let one = VectorMeasure::from_entries(a.get(t).map(|v| ((*t).clone(), v.to_vec())));
            let two = VectorMeasure::from_entries(b.get(t).map(|v| ((*t).clone(), v.to_vec())));
            one.max_abs_diff(&two) > tol
        })
        .cloned()
        .unwrap_or_default()
}

/// A primal vector `v` with `<x, v> = 1 >= <y, v>` on the dual ball, for a
/// dual sphere point `x`.
pub fn contact_vector<S: Scalar>(space: &Space<S>, x: &[S]) -> Result<Vec<S>> {
    if !space.on_dual_sphere(x) {
        return Err(Error::NotOnSphere {
            norm: space.dual_norm(x)?.as_f64(),
        });
    }
    if !space.is_polytope() {
        return Ok(linalg::scale(x, S::one() / linalg::norm2(x)));
    }
    Ok(space
        .primal_vertices()
        .iter()
        .max_by(|a, b| linalg::dot(a, x).partial_cmp(&linalg::dot(b, x)).unwrap())
        .expect("vertices")
        .clone())
}

/// For `nu1`, `nu2` in a common `N(mu)` with `nu1 <_D nu2` false, a test
/// function `f` with `int f dnu1 > int f dnu2`, built from a Choquet
/// falsifier of the offending fiber.
pub fn precd_falsifier<S: Scalar>(
    nu1: &AtomicMeasure<S>,
    nu2: &AtomicMeasure<S>,
    space: &Space<S>,
) -> Result<Option<DFunction<S>>> {
    let PrecD::FiberNotDominated { label } = precd(nu1, nu2, space)? else {
        return Ok(None);
    };
    let k1 = disintegrate(nu1)?;
    let k2 = disintegrate(nu2)?;
    let (f1, f2) = (&k1.kernels[&label], &k2.kernels[&label]);
    let Some(k) = choquet_falsifier(f2, f1)? else {
        return Ok(None);
    };
    let v = contact_vector(space, &f1.barycenter())?;
    let h = k.homogenize(&v);
    let zero = vec![S::zero(); space.dim()];
    let mut pieces: std::collections::BTreeMap<String, Vec<Vec<S>>> = k1
        .sigma
        .keys()
        .map(|t| (t.clone(), vec![zero.clone()]))
        .collect();
    pieces.insert(
        label,
        h.pieces()
            .iter()
            .map(|p| linalg::scale(&p.a, -S::one()))
            .collect(),
    );
    Ok(Some(DFunction::new(pieces)))
}

fn require_in_n<S: Scalar>(
    nu: &AtomicMeasure<S>,
    mu: &VectorMeasure<S>,
    space: &Space<S>,
) -> Result<()> {
    match transfer::membership_defect(nu, mu, space) {
        Some(why) => Err(Error::NotInN(why)),
        None => Ok(()),
    }
}

/// Whether `nu` is `<_D`-minimal in `N(mu)`: every fiber is maximal.
pub fn is_minimal<S: Scalar>(
    nu: &AtomicMeasure<S>,
    mu: &VectorMeasure<S>,
    space: &Space<S>,
) -> Result<bool> {
    require_in_n(nu, mu, space)?;
    let k = disintegrate(nu)?;
    Ok(k.kernels.values().all(|p| is_maximal(p, space)))
}

/// A `<_D`-minimal element below `nu` in `N(mu)`, obtained by maximalizing
/// every fiber.
pub fn minimalize<S: Scalar>(
    nu: &AtomicMeasure<S>,
    mu: &VectorMeasure<S>,
    space: &Space<S>,
) -> Result<AtomicMeasure<S>> {
    require_in_n(nu, mu, space)?;
    let k = disintegrate(nu)?;
    let mut kernels = std::collections::BTreeMap::new();
    for (t, p) in &k.kernels {
        kernels.insert(t.clone(), maximalize(p, space)?);
    }
    Ok(recompose(&DisintegrationKernel {
        sigma: k.sigma,
        kernels,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct MinimalEnumeration<S> {
    pub measures: Vec<AtomicMeasure<S>>,
    /// Set when the cap cut the enumeration short.
    pub truncated: bool,
}

type Decomposition<S> = Vec<(Vec<S>, S)>;

/// Extreme `<_D`-minimal measures of `N(mu)`: per label, the vertices of the
/// polytope of maximal probabilities with barycenter `mu(t)/||mu(t)||`, and
/// all combinations across labels, up to `cap` measures.
pub fn enumerate_minimal<S: Scalar>(
    mu: &VectorMeasure<S>,
    space: &Space<S>,
    cap: usize,
) -> Result<MinimalEnumeration<S>> {
    mu.validate(space)?;
    let k = transfer::transfer_k(mu, space)?;
    if !space.is_polytope() {
        return Ok(MinimalEnumeration {
            measures: vec![k],
            truncated: false,
        });
    }
    let mut truncated = false;
    // per label: list of decompositions (points, weights scaled by mass)
    let mut fibers: Vec<(String, S, Vec<Decomposition<S>>)> = Vec::new();
    for a in k.atoms() {
        let face = space.minimal_face(&a.xstar)?;
        let pts = face.points;
        let mut rows = vec![vec![S::one(); pts.len()]];
        let mut rhs = vec![S::one()];
        for d in 0..space.dim() {
            rows.push(pts.iter().map(|w| w[d]).collect());
            rhs.push(a.xstar[d]);
        }
        let e = lp::basic_feasible_solutions(&rows, &rhs, cap, space.tol())?;
        truncated |= e.truncated;
        let decomps = e
            .vertices
            .into_iter()
            .map(|lam| {
                pts.iter()
                    .cloned()
                    .zip(lam)
                    .filter(|(_, l)| *l > S::zero())
                    .collect()
            })
            .collect();
        fibers.push((a.t.clone(), a.w, decomps));
    }
    let mut measures: Vec<Vec<Atom<S>>> = vec![Vec::new()];
    for (t, mass, decomps) in &fibers {
        let mut next = Vec::new();
        'outer: for base in &measures {
            for dec in decomps {
                if next.len() == cap {
                    truncated = true;
                    break 'outer;
                }
                let mut atoms = base.clone();
                atoms.extend(
                    dec.iter()
                        .map(|(x, l)| Atom::new(t.clone(), x.clone(), *mass * *l)),
                );
                next.push(atoms);
            }
        }
        measures = next;
    }
    Ok(MinimalEnumeration {
        measures: measures
            .into_iter()
            .map(AtomicMeasure::new)
            .collect::<Result<_>>()?,
        truncated,
    })
}

/// Sublinear test functions adapted to a pair of probabilities sharing the
/// sphere barycenter `x`: coordinate absolute values and, for every atom `z`
/// and direction `u` (axes and atom differences), the hinge
/// `y -> max(<u, y - z>, 0)` made sublinear along the contact vector of `x`.
pub fn canonical_sublinear_family<S: Scalar>(
    p: &ProbabilityAtoms<S>,
    q: &ProbabilityAtoms<S>,
    space: &Space<S>,
) -> Result<Vec<ConvexPL<S>>> {
    let d = space.dim();
    let v = contact_vector(space, &p.barycenter())?;
    let mut fam: Vec<ConvexPL<S>> = (0..d).map(|k| ConvexPL::abs_coordinate(d, k)).collect();
    let atoms: Vec<&Vec<S>> = p.points().chain(q.points()).collect();
    let mut dirs: Vec<Vec<S>> = Vec::new();
    for k in 0..d {
        let mut e = vec![S::zero(); d];
        e[k] = S::one();
        dirs.push(linalg::scale(&e, -S::one()));
        dirs.push(e);
    }
    for i in 0..atoms.len() {
        for j in 0..atoms.len() {
            let diff = linalg::sub(atoms[i], atoms[j]);
            if linalg::norm2(&diff) > space.tol() {
                dirs.push(diff);
            }
        }
    }
    let zero = vec![S::zero(); d];
    for z in &atoms {
        for u in &dirs {
            let hinge = ConvexPL::new(vec![
                (u.clone(), -linalg::dot(u, z)),
                (zero.clone(), S::zero()),
            ])?;
            fam.push(hinge.homogenize(&v));
        }
    }
    Ok(fam)
}

/// Sampled sublinear comparison: `int f dp <= int f dq` for the canonical
/// sublinear family and `samples` random sublinear functions. Both inputs must
/// share a barycenter on the dual sphere.
pub fn sublinear_order_test<S: Scalar, R: Rng + ?Sized>(
    p: &ProbabilityAtoms<S>,
    q: &ProbabilityAtoms<S>,
    space: &Space<S>,
    samples: usize,
    rng: &mut R,
) -> Result<bool> {
    p.validate(space)?;
    q.validate(space)?;
    let bp = p.barycenter();
    if linalg::max_abs_diff(&bp, &q.barycenter()) > barycenter_tol(space) {
        return Err(Error::BarycenterMismatch);
    }
    if !space.on_dual_sphere(&bp) {
        return Err(Error::NotOnSphere {
            norm: space.dual_norm(&bp)?.as_f64(),
        });
    }
    let tol = S::of(INTEGRAL_TOL);
    for f in canonical_sublinear_family(p, q, space)? {
        if f.integrate(p) > f.integrate(q) + tol {
            return Ok(false);
        }
    }
    for _ in 0..samples {
        let f = random_convex_pl(rng, space.dim(), true);
        if f.integrate(p) > f.integrate(q) + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The order induced by the cone of sublinear functionals on `M(K, E*)`; it
/// reduces to equality.
pub fn prec_b<S: Scalar>(mu1: &VectorMeasure<S>, mu2: &VectorMeasure<S>, space: &Space<S>) -> bool {
    mu1.approx_eq(mu2, space.tol())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Dual ball is the square `[-1,1]^2`.
    fn sq() -> Space<f64> {
        Space::cross_polytope(2).unwrap()
    }

    fn dirac(x: &[f64]) -> ProbabilityAtoms<f64> {
        ProbabilityAtoms::dirac(x.to_vec())
    }

    fn edge() -> ProbabilityAtoms<f64> {
        ProbabilityAtoms::uniform(vec![vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn choquet_examples() {
        let s = sq();
        let v = choquet_leq(&dirac(&[1.0, 0.0]), &edge(), &s).unwrap();
        assert!(v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.matrix.len(), 1);
        assert!((w.matrix[0][0] - 0.5).abs() < 1e-12 && (w.matrix[0][1] - 0.5).abs() < 1e-12);
        assert!(w.residual() < 1e-12);

        let v = choquet_leq(&edge(), &edge(), &s).unwrap();
        assert!(v.holds);
        let w = v.witness.unwrap();
        assert!((w.matrix[0][0] - 0.5).abs() < 1e-12 && w.matrix[0][1].abs() < 1e-12);

        let v = choquet_leq(&dirac(&[1.0, 1.0]), &dirac(&[1.0, -1.0]), &s).unwrap();
        assert!(!v.holds && !v.barycenters_match);
        assert!(!choquet_leq(&edge(), &dirac(&[1.0, 0.0]), &s).unwrap().holds);
    }

    #[test]
    fn falsifier_separates() {
        let k = choquet_falsifier(&edge(), &dirac(&[1.0, 0.0]))
            .unwrap()
            .unwrap();
        assert!(k.integrate(&edge()) > k.integrate(&dirac(&[1.0, 0.0])));
        assert!(choquet_falsifier(&dirac(&[1.0, 0.0]), &edge())
            .unwrap()
            .is_none());
    }

    #[test]
    fn maximality() {
        let s = sq();
        assert!(is_maximal(&dirac(&[1.0, 1.0]), &s));
        assert!(!is_maximal(&dirac(&[1.0, 0.0]), &s));
        let e = Space::<f64>::euclidean(2).unwrap();
        let r = 0.5f64.sqrt();
        assert!(is_maximal(&dirac(&[r, r]), &e));
        assert!(!is_maximal(&dirac(&[0.5, 0.0]), &e));
    }

    #[test]
    fn envelopes() {
        let s = sq();
        let absx = ConvexPL::abs_coordinate(2, 0);
        assert!((upper_envelope_at(&absx, &[0.0, 0.0], &s).unwrap() - 1.0).abs() < 1e-12);
        assert!((upper_envelope_at(&absx, &[1.0, 1.0], &s).unwrap() - 1.0).abs() < 1e-12);
        let aff = ConvexPL::affine(vec![0.3, -2.0], 0.7);
        let x = [0.2, -0.4];
        assert!((upper_envelope_at(&aff, &x, &s).unwrap() - aff.eval(&x)).abs() < 1e-12);
        assert!(matches!(
            upper_envelope_at(&absx, &[1.5, 0.0], &s),
            Err(Error::OutsideBall { .. })
        ));
        let e = Space::<f64>::euclidean(2).unwrap();
        assert_eq!(upper_envelope_at(&absx, &[0.6, 0.8], &e).unwrap(), 0.6);
        assert!((upper_envelope_at(&absx, &[0.0, 0.0], &e).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mokobodzki_examples() {
        let s = sq();
        let mut r = rng();
        assert!(mokobodzki_maximal(&edge(), &s, 20, &mut r).unwrap());
        assert!(!mokobodzki_maximal(&dirac(&[1.0, 0.0]), &s, 20, &mut r).unwrap());
        let absy = ConvexPL::abs_coordinate(2, 1);
        assert!((envelope_gap(&dirac(&[1.0, 0.0]), &absy, &s).unwrap() - 1.0).abs() < 1e-12);
        let e = Space::<f64>::euclidean(3).unwrap();
        assert!(mokobodzki_maximal(&dirac(&[0.0, 0.6, 0.8]), &e, 20, &mut r).unwrap());
        assert!(!mokobodzki_maximal(&dirac(&[0.0, 0.3, 0.4]), &e, 20, &mut r).unwrap());
    }

    #[test]
    fn maximalize_examples() {
        let s = sq();
        let m = maximalize(&dirac(&[1.0, 0.0]), &s).unwrap();
        assert!(m.approx_eq(&edge(), 1e-12));
        let m = maximalize(&edge(), &s).unwrap();
        assert_eq!(m, edge());
        let (m, w) = maximalize_with_witness(&dirac(&[0.0, 0.0]), &s).unwrap();
        assert!(is_maximal(&m, &s));
        assert!(linalg::max_abs_diff(&m.barycenter(), &[0.0, 0.0]) < 1e-12);
        assert!(w.residual() < 1e-12);
        let e = Space::<f64>::euclidean(2).unwrap();
        let m = maximalize(&dirac(&[0.2, 0.3]), &e).unwrap();
        assert!(is_maximal(&m, &e));
        assert!(linalg::max_abs_diff(&m.barycenter(), &[0.2, 0.3]) < 1e-12);
    }

    fn at(t: &str, p: &ProbabilityAtoms<f64>, mass: f64) -> AtomicMeasure<f64> {
        AtomicMeasure::new(
            p.atoms()
                .iter()
                .map(|a| Atom::new(t, a.xstar.clone(), a.w * mass))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn precd_examples() {
        let s = sq();
        let split = at("t", &edge(), 1.0);
        let k = AtomicMeasure::dirac("t", vec![1.0, 0.0]);
        assert!(precd(&split, &k, &s).unwrap().holds());
        assert_eq!(
            precd(&k, &split, &s).unwrap(),
            PrecD::FiberNotDominated { label: "t".into() }
        );
        let other = AtomicMeasure::dirac("t", vec![0.0, 1.0]);
        assert_eq!(
            precd(&k, &other, &s).unwrap(),
            PrecD::HustadMismatch { label: "t".into() }
        );
        let heavy = AtomicMeasure::weighted_dirac("t", vec![0.5, 0.0], 2.0);
        let k2 = AtomicMeasure::dirac("t", vec![1.0, 0.0]);
        assert!(matches!(precd(&heavy, &k2, &s), Err(Error::NotInN(_))));
    }

    #[test]
    fn precd_falsifier_separates() {
        let s = sq();
        let split = at("t", &edge(), 1.0);
        let k = AtomicMeasure::dirac("t", vec![1.0, 0.0]);
        let f = precd_falsifier(&k, &split, &s).unwrap().unwrap();
        assert!(f.integrate(&k).unwrap() > f.integrate(&split).unwrap() + 1e-9);
        assert!(precd_falsifier(&split, &k, &s).unwrap().is_none());
    }

    #[test]
    fn minimal_examples() {
        let s = sq();
        let mu = VectorMeasure::point_mass("t", vec![1.0, 0.0]);
        let split = at("t", &edge(), 1.0);
        let k = AtomicMeasure::dirac("t", vec![1.0, 0.0]);
        assert!(is_minimal(&split, &mu, &s).unwrap());
        assert!(!is_minimal(&k, &mu, &s).unwrap());
        assert!(minimalize(&k, &mu, &s).unwrap().approx_eq(&split, 1e-12));
        assert!(minimalize(&split, &mu, &s)
            .unwrap()
            .approx_eq(&split, 1e-12));
        let e = Space::<f64>::euclidean(2).unwrap();
        let mu_e = VectorMeasure::point_mass("t", vec![0.6, 0.8]);
        let ke = transfer::transfer_k(&mu_e, &e).unwrap();
        assert!(is_minimal(&ke, &mu_e, &e).unwrap());
        assert!(matches!(
            is_minimal(&split, &VectorMeasure::point_mass("t", vec![0.0, 1.0]), &s),
            Err(Error::NotInN(_))
        ));
    }

    #[test]
    fn minimalize_on_cube_facet() {
        let cube = Space::<f64>::cross_polytope(3).unwrap();
        let mu = VectorMeasure::point_mass("t", vec![1.0, 0.0, 0.0]);
        let k = transfer::transfer_k(&mu, &cube).unwrap();
        let m = minimalize(&k, &mu, &cube).unwrap();
        assert!(is_minimal(&m, &mu, &cube).unwrap());
        assert!(precd(&m, &k, &cube).unwrap().holds());
        let fiber = &disintegrate(&m).unwrap().kernels["t"];
        assert!(linalg::max_abs_diff(&fiber.barycenter(), &[1.0, 0.0, 0.0]) < 1e-12);
        assert!(fiber.points().all(|x| x[0] == 1.0));
    }

    #[test]
    fn enumeration_examples() {
        let s = sq();
        let mu = VectorMeasure::point_mass("t", vec![1.0, 0.0]);
        let e = enumerate_minimal(&mu, &s, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(e.measures.len(), 1);

        let cube = Space::<f64>::cross_polytope(3).unwrap();
        let mu = VectorMeasure::point_mass("t", vec![1.0, 0.0, 0.0]);
        let e = enumerate_minimal(&mu, &cube, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(e.measures.len() >= 2);
        let diag1 = AtomicMeasure::new(vec![
            Atom::new("t", vec![1.0, 1.0, 1.0], 0.5),
            Atom::new("t", vec![1.0, -1.0, -1.0], 0.5),
        ])
        .unwrap();
        let diag2 = AtomicMeasure::new(vec![
            Atom::new("t", vec![1.0, 1.0, -1.0], 0.5),
            Atom::new("t", vec![1.0, -1.0, 1.0], 0.5),
        ])
        .unwrap();
        assert!(e.measures.iter().any(|m| m.approx_eq(&diag1, 1e-12)));
        assert!(e.measures.iter().any(|m| m.approx_eq(&diag2, 1e-12)));

        let mu = VectorMeasure::point_mass("t", vec![1.0, 1.0]);
        let e = enumerate_minimal(&mu, &s, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(e.measures, vec![AtomicMeasure::dirac("t", vec![1.0, 1.0])]);

        let capped = enumerate_minimal(
            &VectorMeasure::from_entries([("a", vec![1.0, 0.0, 0.0]), ("b", vec![0.0, 1.0, 0.0])]),
            &cube,
            3,
        )
        .unwrap();
        assert!(capped.truncated);
        assert_eq!(capped.measures.len(), 3);
    }

    #[test]
    fn sublinear_examples() {
        let s = sq();
        let mut r = rng();
        let p = dirac(&[1.0, 0.0]);
        assert!(sublinear_order_test(&p, &edge(), &s, 50, &mut r).unwrap());
        assert!(choquet_leq(&p, &edge(), &s).unwrap().holds);
        assert!(!sublinear_order_test(&edge(), &p, &s, 50, &mut r).unwrap());
        let l1 = ConvexPL::sublinear(vec![
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
        ])
        .unwrap();
        assert_eq!(l1.integrate(&edge()), 2.0);
        assert_eq!(l1.integrate(&p), 1.0);
        assert!(sublinear_order_test(&edge(), &edge(), &s, 50, &mut r).unwrap());
        assert!(matches!(
            sublinear_order_test(&dirac(&[0.5, 0.0]), &dirac(&[0.5, 0.0]), &s, 5, &mut r),
            Err(Error::NotOnSphere { .. })
        ));
        assert_eq!(
            sublinear_order_test(&dirac(&[1.0, 0.0]), &dirac(&[0.0, 1.0]), &s, 5, &mut r),
            Err(Error::BarycenterMismatch)
        );
    }

    #[test]
    fn prec_b_is_equality() {
        let s = sq();
        let mu = VectorMeasure::point_mass("t", vec![1.0, 0.5]);
        assert!(prec_b(&mu, &mu, &s));
        assert!(!prec_b(&mu, &mu.scale(2.0), &s));
        assert!(!prec_b(
            &mu,
            &VectorMeasure::point_mass("u", vec![1.0, 0.5]),
            &s
        ));
    }

    #[test]
    fn fiber_splits() {
        let s = sq();
        let split = try_fiber_split(&s, &[1.0, 0.0], &[vec![1.0, 1.0], vec![1.0, -1.0]])
            .unwrap()
            .unwrap();
        assert!(split.approx_eq(&edge(), 1e-12));
        let e = Space::<f64>::euclidean(2).unwrap();
        let r = 0.5f64.sqrt();
        let none =
            try_fiber_split(&e, &[1.0, 0.0], &[vec![r, r], vec![r, -r], vec![0.5, 0.0]]).unwrap();
        assert!(none.is_none());
    }
}
