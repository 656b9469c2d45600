//! Finite-dimensional real normed spaces described by their unit ball.
//!
//! A [`Space`] is either a centrally symmetric polytope ball, given by its
//! vertices, or the Euclidean ball. The dual ball of a polytope space is the
//! polar polytope `{x* : <x*, v> <= 1 for all vertices v}`; its vertices are
//! the facet normals of the primal ball (scaled to offset 1) and its facets
//! correspond to the primal vertices. Both are computed once at construction.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Combinations};
use crate::lp::{self, Constraints};
use crate::scalar::Scalar;

/// Largest dimension for which brute-force facet enumeration is attempted.
pub const FACET_DIM_BOUND: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BallSpec<S> {
    Polytope { vertices: Vec<Vec<S>> },
    Euclidean,
}

/// A supporting hyperplane `{x : <normal, x> = offset}` of a polytope ball,
/// together with the indices of the ball vertices lying on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet<S> {
    pub normal: Vec<S>,
    pub offset: S,
    pub vertices: Vec<usize>,
}

/// Extreme points of the dual unit ball.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtremeSet<S> {
    Vertices(Vec<Vec<S>>),
    /// Every point of the dual sphere is extreme.
    WholeSphere,
}

/// A face of the dual unit ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Face<S> {
    /// Indices into the polar vertex list; `None` for the Euclidean ball.
    pub vertex_indices: Option<Vec<usize>>,
    pub points: Vec<Vec<S>>,
    pub affine_dim: usize,
}

impl<S> Face<S> {
    pub fn is_singleton(&self) -> bool {
        self.points.len() == 1
    }
}

#[derive(Debug)]
struct PolarData<S> {
    facets: Vec<Facet<S>>,
    /// Facet normals of the primal ball, i.e. the vertices of the dual ball.
    polar_vertices: Vec<Vec<S>>,
    /// For every primal vertex, the polar vertices on the matching dual facet.
    dual_facets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpaceRepr<S> {
    dim: usize,
    ball: BallSpec<S>,
}

/// A finite-dimensional real normed space `E`, identified with `R^dim`, with
/// `E*` paired to it by the dot product.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(
    try_from = "SpaceRepr<S>",
    into = "SpaceRepr<S>",
    bound(serialize = "S: Scalar", deserialize = "S: Scalar")
)]
pub struct Space<S> {
    dim: usize,
    ball: BallSpec<S>,
    tol: S,
    polar: Option<Arc<PolarData<S>>>,
}

impl<S: Scalar> TryFrom<SpaceRepr<S>> for Space<S> {
    type Error = Error;

    fn try_from(r: SpaceRepr<S>) -> Result<Self> {
        Space::new(r.dim, r.ball)
    }
}

impl<S: Scalar> From<Space<S>> for SpaceRepr<S> {
    fn from(s: Space<S>) -> Self {
        SpaceRepr {
            dim: s.dim,
            ball: s.ball,
        }
    }
}

impl<S: PartialEq> PartialEq for Space<S> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.ball == other.ball && self.tol == other.tol
    }
}

impl<S: Scalar> Space<S> {
    pub fn new(dim: usize, ball: BallSpec<S>) -> Result<Self> {
        Self::with_tolerance(dim, ball, S::of(S::DEFAULT_TOL))
    }

    pub fn with_tolerance(dim: usize, ball: BallSpec<S>, tol: S) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DegenerateBall("dimension must be positive".into()));
        }
        let polar = match &ball {
            BallSpec::Euclidean => None,
            BallSpec::Polytope { vertices } => {
                Some(Arc::new(validate_polytope(vertices, dim, tol)?))
            }
        };
        Ok(Space {
            dim,
            ball,
            tol,
            polar,
        })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(dim, BallSpec::Euclidean)
    }

    /// Polytope ball with the given vertex list; the dimension is taken from
    /// the first vertex.
    pub fn polytope(vertices: Vec<Vec<S>>) -> Result<Self> {
        let dim = vertices.first().map_or(0, |v| v.len());
        Self::new(dim, BallSpec::Polytope { vertices })
    }

    /// Polytope ball spanned by `half` and its negation.
    pub fn symmetric_hull(half: Vec<Vec<S>>) -> Result<Self> {
        let mut all = half.clone();
        all.extend(half.into_iter().map(|v| linalg::scale(&v, -S::one())));
        Self::polytope(all)
    }

    /// The cube `[-1, 1]^dim` as primal ball (the dual ball is the
    /// cross-polytope, dual norm l1).
    pub fn hypercube(dim: usize) -> Result<Self> {
        let vertices = (0..1usize << dim)
            .map(|mask| {
                (0..dim)
                    .map(|k| {
                        if mask >> k & 1 == 1 {
                            -S::one()
                        } else {
                            S::one()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(dim, BallSpec::Polytope { vertices })
    }

    /// The cross-polytope `conv{±e_k}` as primal ball (the dual ball is the
    /// cube, dual norm l-infinity).
    pub fn cross_polytope(dim: usize) -> Result<Self> {
        let mut vertices = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            for sign in [S::one(), -S::one()] {
                let mut v = vec![S::zero(); dim];
                v[k] = sign;
                vertices.push(v);
            }
        }
        Self::new(dim, BallSpec::Polytope { vertices })
    }

    /// Same ball with a different geometric tolerance.
    pub fn retolerance(&self, tol: S) -> Result<Self> {
        Self::with_tolerance(self.dim, self.ball.clone(), tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ball(&self) -> &BallSpec<S> {
        &self.ball
    }

    pub fn tol(&self) -> S {
        self.tol
    }

    pub fn is_polytope(&self) -> bool {
        self.polar.is_some()
    }

    pub fn check_dim(&self, v: &[S]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Vertices of the primal ball (empty for the Euclidean ball).
    pub fn primal_vertices(&self) -> &[Vec<S>] {
        match &self.ball {
            BallSpec::Polytope { vertices } => vertices,
            BallSpec::Euclidean => &[],
        }
    }

    /// Vertices of the dual ball (empty for the Euclidean ball).
    pub fn polar_vertices(&self) -> &[Vec<S>] {
        self.polar.as_deref().map_or(&[], |p| &p.polar_vertices)
    }

    /// Gauge of `x` with respect to the unit ball.
    pub fn primal_norm(&self, x: &[S]) -> Result<S> {
        self.check_dim(x)?;
        Ok(match &self.polar {
            None => linalg::norm2(x),
            Some(p) => max_pairing(&p.polar_vertices, x),
        })
    }

    /// Support function of the unit ball at `xstar`.
    pub fn dual_norm(&self, xstar: &[S]) -> Result<S> {
        self.check_dim(xstar)?;
        Ok(self.dual_norm_unchecked(xstar))
    }

    pub(crate) fn dual_norm_unchecked(&self, xstar: &[S]) -> S {
        match &self.ball {
            BallSpec::Euclidean => linalg::norm2(xstar),
            BallSpec::Polytope { vertices } => max_pairing(vertices, xstar),
        }
    }

    pub fn on_dual_sphere(&self, xstar: &[S]) -> bool {
        xstar.len() == self.dim && (self.dual_norm_unchecked(xstar) - S::one()).abs() <= self.tol
    }

    pub fn in_dual_ball(&self, xstar: &[S]) -> bool {
        xstar.len() == self.dim && self.dual_norm_unchecked(xstar) <= S::one() + self.tol
    }

    pub fn dual_ball_extreme_points(&self) -> ExtremeSet<S> {
        match &self.polar {
            None => ExtremeSet::WholeSphere,
            Some(p) => ExtremeSet::Vertices(p.polar_vertices.clone()),
        }
    }

    /// Facets of the primal polytope ball, normalized to offset 1.
    pub fn facets(&self) -> Result<&[Facet<S>]> {
        self.polar
            .as_deref()
            .map(|p| p.facets.as_slice())
            .ok_or(Error::NotPolytope)
    }

    /// Facets of the dual ball as lists of polar vertex indices, one per
    /// primal vertex.
    pub fn dual_facets(&self) -> Result<&[Vec<usize>]> {
        self.polar
            .as_deref()
            .map(|p| p.dual_facets.as_slice())
            .ok_or(Error::NotPolytope)
    }

    /// Index of the polar vertex equal to `xstar` within tolerance.
    pub fn polar_vertex_index(&self, xstar: &[S]) -> Option<usize> {
        self.polar_vertices()
            .iter()
            .position(|w| linalg::max_abs_diff(w, xstar) <= self.tol)
    }

    /// Smallest face of the dual ball containing the sphere point `xstar`.
    pub fn minimal_face(&self, xstar: &[S]) -> Result<Face<S>> {
        self.check_dim(xstar)?;
        let norm = self.dual_norm_unchecked(xstar);
        if (norm - S::one()).abs() > self.tol {
            return Err(Error::NotOnSphere {
                norm: norm.as_f64(),
            });
        }
        let Some(p) = self.polar.as_deref() else {
            return Ok(Face {
                vertex_indices: None,
                points: vec![xstar.to_vec()],
                affine_dim: 0,
            });
        };
        // Primal vertices exposing xstar; the minimal face is the intersection
        // of the corresponding dual facets.
        let active: Vec<&Vec<S>> = self
            .primal_vertices()
            .iter()
            .filter(|v| linalg::dot(v, xstar) >= S::one() - self.tol)
            .collect();
        let indices: Vec<usize> = (0..p.polar_vertices.len())
            .filter(|&j| {
                active
                    .iter()
                    .all(|v| linalg::dot(v, &p.polar_vertices[j]) >= S::one() - self.tol)
            })
            .collect();
        let points: Vec<Vec<S>> = indices
            .iter()
            .map(|&j| p.polar_vertices[j].clone())
            .collect();
        let affine_dim = linalg::affine_dim(&points, self.tol);
        Ok(Face {
            vertex_indices: Some(indices),
            points,
            affine_dim,
        })
    }

    /// Whether every point of the dual sphere is an extreme point of the dual
    /// ball.
    pub fn is_strictly_convex_dual(&self) -> bool {
        match self.ball {
            BallSpec::Euclidean => true,
            BallSpec::Polytope { .. } => self.dim == 1,
        }
    }

    /// Whether every proper face of the dual ball is a simplex. Faces of
    /// simplices are simplices, so only the facets are inspected.
    pub fn is_simplexoid_dual(&self) -> bool {
        let Some(p) = self.polar.as_deref() else {
            return true;
        };
        p.dual_facets.iter().all(|facet| {
            let pts: Vec<Vec<S>> = facet.iter().map(|&j| p.polar_vertices[j].clone()).collect();
            linalg::affine_dim(&pts, self.tol) + 1 == pts.len()
        })
    }
}

fn max_pairing<S: Scalar>(points: &[Vec<S>], x: &[S]) -> S {
    points
        .iter()
        .map(|v| linalg::dot(v, x))
        .fold(S::neg_infinity(), S::max)
}

fn validate_polytope<S: Scalar>(vertices: &[Vec<S>], dim: usize, tol: S) -> Result<PolarData<S>> {
    if vertices.is_empty() {
        return Err(Error::DegenerateBall("no vertices".into()));
    }
    for v in vertices {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        if !linalg::is_finite(v) {
            return Err(Error::NonFinite("ball vertex"));
        }
    }
    for (i, v) in vertices.iter().enumerate() {
        let has_antipode = vertices
            .iter()
            .any(|u| u.iter().zip(v).all(|(&a, &b)| (a + b).abs() <= tol));
        if !has_antipode {
            return Err(Error::NotSymmetric(i));
        }
    }
    if linalg::rank(vertices, tol) < dim {
        return Err(Error::DegenerateBall(
            "vertices do not span the space".into(),
        ));
    }
    for i in 0..vertices.len() {
        if in_hull_of_others(vertices, i)? {
            return Err(Error::RedundantVertex(i));
        }
    }
    let facets = facets(vertices, dim, FACET_DIM_BOUND, tol)?;
    let polar_vertices: Vec<Vec<S>> = facets.iter().map(|f| f.normal.clone()).collect();
    let dual_facets = vertices
        .iter()
        .map(|v| {
            (0..polar_vertices.len())
                .filter(|&j| linalg::dot(v, &polar_vertices[j]) >= S::one() - tol)
                .collect()
        })
        .collect();
    Ok(PolarData {
        facets,
        polar_vertices,
        dual_facets,
    })
}

fn in_hull_of_others<S: Scalar>(vertices: &[Vec<S>], i: usize) -> Result<bool> {
    let others: Vec<&Vec<S>> = vertices
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, v)| v)
        .collect();
    if others.is_empty() {
        return Ok(false);
    }
    let dim = vertices[i].len();
    let mut c = Constraints::new(others.len());
    c.add_eq(vec![S::one(); others.len()], S::one());
    for k in 0..dim {
        c.add_eq(others.iter().map(|v| v[k]).collect(), vertices[i][k]);
    }
    Ok(lp::feasible_point(&c)?.is_some())
}

/// Enumerates the facets of the symmetric polytope `conv(vertices)` by brute
/// force over `dim`-subsets of vertices. Each facet is returned with offset 1;
/// the origin is interior, so no supporting hyperplane passes through it.
pub fn facets<S: Scalar>(
    vertices: &[Vec<S>],
    dim: usize,
    bound: usize,
    tol: S,
) -> Result<Vec<Facet<S>>> {
    if dim > bound {
        return Err(Error::DimensionBound { dim, bound });
    }
    if vertices.len() < dim + 1 || linalg::rank(vertices, tol) < dim {
        return Err(Error::DegenerateBall(
            "vertices are not full-dimensional".into(),
        ));
    }
    let ones = vec![S::one(); dim];
    let mut out: Vec<Facet<S>> = Vec::new();
    for subset in Combinations::new(vertices.len(), dim) {
        // Vertex sets are sorted, so containment is a merge walk.
        if out.iter().any(|f| is_sorted_subset(&subset, &f.vertices)) {
            continue;
        }
        let rows: Vec<Vec<S>> = subset.iter().map(|&i| vertices[i].clone()).collect();
        let Some(normal) = linalg::solve(&rows, &ones, tol) else {
            continue;
        };
        let scale = normal.iter().fold(S::one(), |m, &x| m.max(x.abs()));
        let supporting = vertices
            .iter()
            .all(|v| linalg::dot(v, &normal) <= S::one() + tol * scale);
        if !supporting {
            continue;
        }
        let on: Vec<usize> = (0..vertices.len())
            .filter(|&i| linalg::dot(&vertices[i], &normal) >= S::one() - tol * scale)
            .collect();
        // An ill-conditioned subset can land a hair away from a known facet.
        if out.iter().any(|f| f.vertices == on) {
            continue;
        }
        out.push(Facet {
            normal,
            offset: S::one(),
            vertices: on,
        });
    }
    if out.is_empty() {
        return Err(Error::DegenerateBall("no facets found".into()));
    }
    Ok(out)
}

fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    fn square() -> Space<f64> {
        Space::hypercube(2).unwrap()
    }

    fn diamond() -> Space<f64> {
        Space::cross_polytope(2).unwrap()
    }

    #[test]
    fn primal_norms() {
        assert_eq!(square().primal_norm(&[2.0, 0.0]).unwrap(), 2.0);
        assert_eq!(square().primal_norm(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(diamond().primal_norm(&[0.0, 0.0]).unwrap(), 0.0);
        let e = Space::<f64>::euclidean(2).unwrap();
        assert!((e.primal_norm(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn dual_norms() {
        assert_eq!(square().dual_norm(&[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(diamond().dual_norm(&[1.0, 0.0]).unwrap(), 1.0);
        let e = Space::<f64>::euclidean(2).unwrap();
        assert_eq!(e.dual_norm(&[0.0, -2.0]).unwrap(), 2.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(
            square().dual_norm(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
        assert!(square().primal_norm(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn polar_of_square_and_diamond() {
        let ExtremeSet::Vertices(v) = square().dual_ball_extreme_points() else {
            panic!()
        };
        assert_eq!(
            sorted(v),
            sorted(vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0]
            ])
        );
        let ExtremeSet::Vertices(v) = diamond().dual_ball_extreme_points() else {
            panic!()
        };
        assert_eq!(
            sorted(v),
            sorted(vec![
                vec![1.0, 1.0],
                vec![1.0, -1.0],
                vec![-1.0, 1.0],
                vec![-1.0, -1.0]
            ])
        );
        assert_eq!(
            Space::<f64>::euclidean(3)
                .unwrap()
                .dual_ball_extreme_points(),
            ExtremeSet::WholeSphere
        );
    }

    #[test]
    fn facet_lists() {
        let f = square().facets().unwrap().to_vec();
        assert_eq!(f.len(), 4);
        assert!(f.iter().all(|f| f.offset == 1.0 && f.vertices.len() == 2));
        let oct = Space::<f64>::cross_polytope(3).unwrap();
        let f = oct.facets().unwrap();
        assert_eq!(f.len(), 8);
        for facet in f {
            assert!(facet.normal.iter().all(|x| (x.abs() - 1.0).abs() < 1e-12));
            assert_eq!(facet.vertices.len(), 3);
        }
        let seg = Space::<f64>::polytope(vec![vec![-1.0], vec![1.0]]).unwrap();
        let n = sorted(
            seg.facets()
                .unwrap()
                .iter()
                .map(|f| f.normal.clone())
                .collect(),
        );
        assert_eq!(n, vec![vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn facet_dimension_bound() {
        let v: Vec<Vec<f64>> = (0..7)
            .flat_map(|k| {
                let mut e = vec![0.0; 7];
                e[k] = 1.0;
                let mut m = e.clone();
                m[k] = -1.0;
                [e, m]
            })
            .collect();
        assert_eq!(
            facets(&v, 7, FACET_DIM_BOUND, 1e-9),
            Err(Error::DimensionBound { dim: 7, bound: 6 })
        );
    }

    #[test]
    fn minimal_faces() {
        let f = diamond().minimal_face(&[1.0, 0.0]).unwrap();
        assert_eq!(sorted(f.points), vec![vec![1.0, -1.0], vec![1.0, 1.0]]);
        assert_eq!(f.affine_dim, 1);
        let f = diamond().minimal_face(&[1.0, 1.0]).unwrap();
        assert_eq!(f.points, vec![vec![1.0, 1.0]]);
        assert_eq!(f.affine_dim, 0);
        let e = Space::<f64>::euclidean(2).unwrap();
        let f = e.minimal_face(&[0.0, 1.0]).unwrap();
        assert!(f.is_singleton());
        assert!(matches!(
            diamond().minimal_face(&[0.5, 0.0]),
            Err(Error::NotOnSphere { .. })
        ));
    }

    #[test]
    fn strict_convexity() {
        assert!(Space::<f64>::euclidean(3)
            .unwrap()
            .is_strictly_convex_dual());
        assert!(!square().is_strictly_convex_dual());
        let seg = Space::<f64>::polytope(vec![vec![-1.0], vec![1.0]]).unwrap();
        assert!(seg.is_strictly_convex_dual());
    }

    #[test]
    fn simplexoids() {
        // primal cross-polytope: dual cube with square facets
        assert!(!Space::<f64>::cross_polytope(3)
            .unwrap()
            .is_simplexoid_dual());
        // primal cube: dual octahedron with triangular facets
        assert!(Space::<f64>::hypercube(3).unwrap().is_simplexoid_dual());
        assert!(square().is_simplexoid_dual());
        assert!(diamond().is_simplexoid_dual());
        assert!(Space::<f64>::euclidean(4).unwrap().is_simplexoid_dual());
    }

    #[test]
    fn rejects_bad_balls() {
        assert_eq!(
            Space::polytope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap_err(),
            Error::NotSymmetric(1)
        );
        assert!(matches!(
            Space::polytope(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]),
            Err(Error::DegenerateBall(_))
        ));
        let redundant = vec![
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![0.5, 0.0],
            vec![-0.5, 0.0],
        ];
        assert!(matches!(
            Space::polytope(redundant),
            Err(Error::RedundantVertex(4))
        ));
        assert!(matches!(
            Space::polytope(vec![vec![f64::NAN, 0.0], vec![0.0, 1.0]]),
            Err(Error::NonFinite(_))
        ));
        assert!(Space::<f64>::new(0, BallSpec::Euclidean).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let s = square();
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"type\":\"polytope\""));
        let back: Space<f64> = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        let e: Space<f64> =
            serde_json::from_str(r#"{"dim":3,"ball":{"type":"euclidean"}}"#).unwrap();
        assert_eq!(e.dim(), 3);
        let bad = serde_json::from_str::<Space<f64>>(
            r#"{"dim":2,"ball":{"type":"polytope","vertices":[[1,0],[0,1]]}}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn single_precision_space() {
        let s = Space::<f32>::hypercube(2).unwrap();
        assert_eq!(s.dual_norm(&[1.0, -1.0]).unwrap(), 2.0);
        assert_eq!(s.polar_vertices().len(), 4);
    }
}
