//! From scalar measures on `K x B_{E*}` to vector measures on `K` and back.
//!
//! [`hustad`] sends `nu` to the vector measure `t -> sum w x*` over the atoms
//! at `t`. [`transfer_k`] goes the other way canonically: one atom per
//! support point, normalized onto the dual sphere, with the same total
//! variation. For a positive `nu`, [`tilde`] rebuilds that canonical measure
//! from the fiber barycenters of `nu`, so `tilde(nu) == transfer_k(hustad(nu))`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Space;
use crate::linalg;
use crate::measures::{disintegrate, Atom, AtomicMeasure, VectorMeasure};
use crate::scalar::Scalar;

/// Weak* density `h` of `hustad(nu)` with respect to the base measure
/// `sigma`: `hustad(nu)(t) = sigma(t) * h(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityFunction<S> {
    pub h: BTreeMap<String, Vec<S>>,
    pub sigma: BTreeMap<String, S>,
}

/// `t -> sum_{atoms at t} w * x*`. Signed measures are allowed.
pub fn hustad<S: Scalar>(nu: &AtomicMeasure<S>) -> VectorMeasure<S> {
    let mut entries: BTreeMap<String, Vec<S>> = BTreeMap::new();
    for a in nu.atoms() {
        let e = entries
            .entry(a.t.clone())
            .or_insert_with(|| vec![S::zero(); a.xstar.len()]);
        linalg::axpy(e, a.w, &a.xstar);
    }
    VectorMeasure { entries }
}

/// `h(t)` is the barycenter of the fiber probability at `t`.
pub fn density_h<S: Scalar>(nu: &AtomicMeasure<S>) -> Result<DensityFunction<S>> {
    let k = disintegrate(nu)?;
    let h = k
        .kernels
        .iter()
        .map(|(t, p)| (t.clone(), p.barycenter()))
        .collect();
    Ok(DensityFunction { h, sigma: k.sigma })
}

/// `t -> ||h(t)||`, the density of `|hustad(nu)|` with respect to `sigma`.
pub fn variation_density<S: Scalar>(
    nu: &AtomicMeasure<S>,
    space: &Space<S>,
) -> Result<BTreeMap<String, S>> {
    let d = density_h(nu)?;
    d.h.into_iter()
        .map(|(t, h)| Ok((t, space.dual_norm(&h)?)))
        .collect()
}

/// The measure `(t, h(t)/||h(t)||)` weighted by `||h(t)|| * sigma(t)`. Fibers
/// with `||h(t)||` at or below the geometric tolerance are dropped.
pub fn tilde<S: Scalar>(nu: &AtomicMeasure<S>, space: &Space<S>) -> Result<AtomicMeasure<S>> {
    let d = density_h(nu)?;
    let mut atoms = Vec::with_capacity(d.h.len());
    for (t, h) in d.h {
        let n = space.dual_norm(&h)?;
        if n > space.tol() {
            let w = n * d.sigma[&t];
            atoms.push(Atom::new(t, linalg::scale(&h, S::one() / n), w));
        }
    }
    AtomicMeasure::new(atoms)
}

/// `K mu = sum_t ||mu(t)|| * delta_(t, mu(t)/||mu(t)||)`.
pub fn transfer_k<S: Scalar>(mu: &VectorMeasure<S>, space: &Space<S>) -> Result<AtomicMeasure<S>> {
    let mut atoms = Vec::with_capacity(mu.entries.len());
    for (t, v) in &mu.entries {
        let n = space.dual_norm(v)?;
        if n > space.tol() {
            atoms.push(Atom::new(t.clone(), linalg::scale(v, S::one() / n), n));
        }
    }
    AtomicMeasure::new(atoms)
}

/// Membership in `N(mu)`: positive, `hustad(nu) = mu` and
/// `mass(nu) = ||mu||`. Both equalities are checked to the space tolerance,
/// scaled by `max(1, ||mu||)`.
pub fn is_in_n<S: Scalar>(nu: &AtomicMeasure<S>, mu: &VectorMeasure<S>, space: &Space<S>) -> bool {
    membership_defect(nu, mu, space).is_none()
}

/// Reason `nu` fails to be in `N(mu)`, if any.
pub fn membership_defect<S: Scalar>(
    nu: &AtomicMeasure<S>,
    mu: &VectorMeasure<S>,
    space: &Space<S>,
) -> Option<String> {
    if !nu.is_positive() {
        return Some("measure is not positive".into());
    }
    if let Err(e) = nu.validate(space).and_then(|_| mu.validate(space)) {
        return Some(e.to_string());
    }
    let tv = match mu.total_variation(space) {
        Ok(tv) => tv,
        Err(e) => return Some(e.to_string()),
    };
    let tol = space.tol() * tv.max(S::one());
    let image = hustad(nu);
    let diff = image.max_abs_diff(mu);
    if diff > tol {
        return Some(format!("hustad image differs by {diff}"));
    }
    let m = nu.mass().unwrap_or(S::nan());
    if (m - tv).abs() > tol {
        return Some(format!("mass {m} differs from total variation {tv}"));
    }
    None
}

/// A fiberwise superlinear test function `f(t, x*) = min_j <x*, g_j(t)>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct DFunction<S> {
    pub pieces: BTreeMap<String, Vec<Vec<S>>>,
}

impl<S: Scalar> DFunction<S> {
    pub fn new(pieces: BTreeMap<String, Vec<Vec<S>>>) -> Self {
        DFunction { pieces }
    }

    /// `f(t, x*) = <x*, g(t)>`, a single linear piece per label.
    pub fn linear(g: &BTreeMap<String, Vec<S>>) -> Self {
        DFunction {
            pieces: g
                .iter()
                .map(|(t, v)| (t.clone(), vec![v.clone()]))
                .collect(),
        }
    }

    /// `f(t, x*) = -||x*||` on the given labels, as the minimum of
    /// `<x*, -v>` over the primal ball vertices.
    pub fn neg_dual_norm<'a>(
        space: &Space<S>,
        labels: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        if !space.is_polytope() {
            return Err(Error::NotPolytope);
        }
        let pieces: Vec<Vec<S>> = space
            .primal_vertices()
            .iter()
            .map(|v| linalg::scale(v, -S::one()))
            .collect();
        Ok(DFunction {
            pieces: labels
                .into_iter()
                .map(|t| (t.to_string(), pieces.clone()))
                .collect(),
        })
    }

    pub fn eval(&self, t: &str, xstar: &[S]) -> Result<S> {
        let pieces = self
            .pieces
            .get(t)
            .ok_or_else(|| Error::EmptyPieces(t.to_string()))?;
        if pieces.is_empty() {
            return Err(Error::EmptyPieces(t.to_string()));
        }
        let mut best = S::infinity();
        for g in pieces {
            if g.len() != xstar.len() {
                return Err(Error::DimensionMismatch {
                    expected: xstar.len(),
                    found: g.len(),
                });
            }
            best = best.min(linalg::dot(xstar, g));
        }
        Ok(best)
    }

    /// `int f d nu`.
    pub fn integrate(&self, nu: &AtomicMeasure<S>) -> Result<S> {
        let mut total = S::zero();
        for a in nu.atoms() {
            total += a.w * self.eval(&a.t, &a.xstar)?;
        }
        Ok(total)
    }
}

/// `p_f(mu) = int f d(K mu)`.
pub fn eval_pf<S: Scalar>(f: &DFunction<S>, mu: &VectorMeasure<S>, space: &Space<S>) -> Result<S> {
    f.integrate(&transfer_k(mu, space)?)
}
