//! Discrete measures over a finite point set `K`.
//!
//! * [`VectorMeasure`]: an `E*`-valued measure on `K`, one dual vector per
//!   label.
//! * [`AtomicMeasure`]: a finitely supported scalar measure on
//!   `K x B_{E*}`, a list of `(t, x*, w)` atoms.
//! * [`ProbabilityAtoms`]: a finitely supported probability on `B_{E*}`.
//! * [`DisintegrationKernel`]: the base masses over `K` and one fiber
//!   probability per label.
//!
//! Atoms are kept in canonical form: duplicates (same label, dual vectors
//! equal after rounding to 12 decimals) are merged, zero weights dropped, and
//! the list is sorted by label and then by dual vector.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Space;
use crate::linalg;
use crate::scalar::Scalar;

/// Ordered list of distinct labels standing for the finite compact space `K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct PointSet(Vec<String>);

impl PointSet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::UnknownLabel("empty point set".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::UnknownLabel(format!("duplicate label {l}")));
            }
        }
        Ok(PointSet(labels))
    }

    /// Labels `t0, t1, ...`.
    pub fn numbered(n: usize) -> Self {
        PointSet((0..n).map(|i| format!("t{i}")).collect())
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<String>> for PointSet {
    type Error = Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        PointSet::new(v)
    }
}

impl From<PointSet> for Vec<String> {
    fn from(p: PointSet) -> Self {
        p.0
    }
}

fn round_key<S: Scalar>(x: &[S]) -> Vec<i64> {
    x.iter()
        .map(|v| (v.as_f64() * 1e12).round() as i64)
        .collect()
}

fn cmp_vec<S: Scalar>(a: &[S], b: &[S]) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// An element of `M(K, E*)`: label -> dual vector. Absent labels carry the
/// zero vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct VectorMeasure<S> {
    pub entries: BTreeMap<String, Vec<S>>,
}

impl<S> Default for VectorMeasure<S> {
    fn default() -> Self {
        VectorMeasure {
            entries: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> VectorMeasure<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I, L>(entries: I) -> Self
    where
        I: IntoIterator<Item = (L, Vec<S>)>,
        L: Into<String>,
    {
        VectorMeasure {
            entries: entries.into_iter().map(|(l, v)| (l.into(), v)).collect(),
        }
    }

    /// The measure `eps_t (x) x*`.
    pub fn point_mass(t: impl Into<String>, xstar: Vec<S>) -> Self {
        Self::from_entries([(t.into(), xstar)])
    }

    pub fn get(&self, t: &str) -> Option<&[S]> {
        self.entries.get(t).map(|v| v.as_slice())
    }

    pub fn validate(&self, space: &Space<S>) -> Result<()> {
        for v in self.entries.values() {
            space.check_dim(v)?;
            if !linalg::is_finite(v) {
                return Err(Error::NonFinite("vector measure entry"));
            }
        }
        Ok(())
    }

    /// Labels whose entry is not exactly zero.
    pub fn support(&self) -> impl Iterator<Item = (&String, &Vec<S>)> {
        self.entries
            .iter()
            .filter(|(_, v)| v.iter().any(|x| *x != S::zero()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (t, v) in &other.entries {
            out.entries
                .entry(t.clone())
                .and_modify(|e| *e = linalg::add(e, v))
                .or_insert_with(|| v.clone());
        }
        out
    }

    pub fn scale(&self, c: S) -> Self {
        VectorMeasure {
            entries: self
                .entries
                .iter()
                .map(|(t, v)| (t.clone(), linalg::scale(v, c)))
                .collect(),
        }
    }

    /// Largest coordinate difference over all labels of either measure.
    pub fn max_abs_diff(&self, other: &Self) -> S {
        let mut worst = S::zero();
        for (t, v) in &self.entries {
            let d = match other.entries.get(t) {
                Some(u) => linalg::max_abs_diff(v, u),
                None => v.iter().fold(S::zero(), |m, x| m.max(x.abs())),
            };
            worst = worst.max(d);
        }
        for (t, u) in &other.entries {
            if !self.entries.contains_key(t) {
                worst = worst.max(u.iter().fold(S::zero(), |m, x| m.max(x.abs())));
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &Self, tol: S) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// `sum_t ||mu({t})||_{E*}`.
    pub fn total_variation(&self, space: &Space<S>) -> Result<S> {
        let mut total = S::zero();
        for v in self.entries.values() {
            total += space.dual_norm(v)?;
        }
        Ok(total)
    }

    /// `sum_t <mu(t), f(t)>`.
    pub fn pair(&self, f: &BTreeMap<String, Vec<S>>) -> Result<S> {
        let mut total = S::zero();
        for (t, v) in &self.entries {
            let g = f.get(t).ok_or_else(|| Error::UnknownLabel(t.clone()))?;
            if g.len() != v.len() {
                return Err(Error::DimensionMismatch {
                    expected: v.len(),
                    found: g.len(),
                });
            }
            total += linalg::dot(v, g);
        }
        Ok(total)
    }
}

pub fn total_variation<S: Scalar>(mu: &VectorMeasure<S>, space: &Space<S>) -> Result<S> {
    mu.total_variation(space)
}

pub fn pair<S: Scalar>(mu: &VectorMeasure<S>, f: &BTreeMap<String, Vec<S>>) -> Result<S> {
    mu.pair(f)
}

/// One atom `w * delta_(t, x*)`. Negative `w` only appears in signed
/// measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Atom<S> {
    pub t: String,
    pub xstar: Vec<S>,
    pub w: S,
}

impl<S: Scalar> Atom<S> {
    pub fn new(t: impl Into<String>, xstar: Vec<S>, w: S) -> Self {
        Atom {
            t: t.into(),
            xstar,
            w,
        }
    }
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "S: Scalar"))]
struct AtomsRepr<S> {
    atoms: Vec<Atom<S>>,
}

/// A finitely supported measure on `K x B_{E*}` in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "AtomsRepr<S>",
    bound(serialize = "S: Scalar", deserialize = "S: Scalar")
)]
pub struct AtomicMeasure<S> {
    atoms: Vec<Atom<S>>,
}

impl<S: Scalar> TryFrom<AtomsRepr<S>> for AtomicMeasure<S> {
    type Error = Error;
    fn try_from(r: AtomsRepr<S>) -> Result<Self> {
        AtomicMeasure::new(r.atoms)
    }
}

impl<S> Default for AtomicMeasure<S> {
    fn default() -> Self {
        AtomicMeasure { atoms: Vec::new() }
    }
}

impl<S: Scalar> AtomicMeasure<S> {
    /// Builds the canonical form of `atoms`, merging coinciding `(t, x*)`.
    pub fn new(atoms: Vec<Atom<S>>) -> Result<Self> {
        let mut merged: BTreeMap<(String, Vec<i64>), Atom<S>> = BTreeMap::new();
        for a in atoms {
            if !linalg::is_finite(&a.xstar) || !a.w.is_finite() {
                return Err(Error::NonFinite("atom"));
            }
            merged
                .entry((a.t.clone(), round_key(&a.xstar)))
                .and_modify(|e| e.w += a.w)
                .or_insert(a);
        }
        let mut atoms: Vec<Atom<S>> = merged.into_values().filter(|a| a.w != S::zero()).collect();
        atoms.sort_by(|a, b| a.t.cmp(&b.t).then_with(|| cmp_vec(&a.xstar, &b.xstar)));
        Ok(AtomicMeasure { atoms })
    }

    pub fn dirac(t: impl Into<String>, xstar: Vec<S>) -> Self {
        Self::weighted_dirac(t, xstar, S::one())
    }

    pub fn weighted_dirac(t: impl Into<String>, xstar: Vec<S>, w: S) -> Self {
        AtomicMeasure {
            atoms: vec![Atom::new(t, xstar, w)],
        }
        .renormalized()
    }

    fn renormalized(self) -> Self {
        Self::new(self.atoms).expect("finite atoms")
    }

    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<Atom<S>> {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.atoms.iter().all(|a| a.w > S::zero())
    }

    pub fn ensure_positive(&self) -> Result<()> {
        if self.is_positive() {
            Ok(())
        } else {
            Err(Error::NotPositive)
        }
    }

    /// Labels carrying at least one atom, in order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in &self.atoms {
            if out.last() != Some(&a.t.as_str()) {
                out.push(&a.t);
            }
        }
        out
    }

    /// Checks dimensions and that every atom lies in the dual ball.
    pub fn validate(&self, space: &Space<S>) -> Result<()> {
        for a in &self.atoms {
            let n = space.dual_norm(&a.xstar)?;
            if n > S::one() + space.tol() {
                return Err(Error::OutsideBall { norm: n.as_f64() });
            }
        }
        Ok(())
    }

    /// Total weight of a positive measure.
    pub fn mass(&self) -> Result<S> {
        self.ensure_positive()?;
        Ok(self.atoms.iter().map(|a| a.w).sum())
    }

    /// `sum w * g(t, x*)`.
    pub fn integrate<F>(&self, mut g: F) -> S
    where
        F: FnMut(&str, &[S]) -> S,
    {
        self.atoms.iter().map(|a| a.w * g(&a.t, &a.xstar)).sum()
    }

    pub fn scale(&self, c: S) -> Self {
        AtomicMeasure::new(
            self.atoms
                .iter()
                .map(|a| Atom::new(a.t.clone(), a.xstar.clone(), a.w * c))
                .collect(),
        )
        .expect("finite atoms")
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        AtomicMeasure::new(atoms).expect("finite atoms")
    }

    /// Tolerant equality: a bijection between atoms with equal labels and
    /// dual vectors and weights within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: S) -> bool {
        if self.atoms.len() != other.atoms.len() {
            return false;
        }
        let mut used = vec![false; other.atoms.len()];
        self.atoms.iter().all(|a| {
            let hit = other.atoms.iter().enumerate().position(|(j, b)| {
                !used[j]
                    && a.t == b.t
                    && linalg::max_abs_diff(&a.xstar, &b.xstar) <= tol
                    && (a.w - b.w).abs() <= tol
            });
            match hit {
                Some(j) => {
                    used[j] = true;
                    true
                }
                None => false,
            }
        })
    }
}

pub fn mass<S: Scalar>(nu: &AtomicMeasure<S>) -> Result<S> {
    nu.mass()
}

pub fn integrate<S: Scalar, F: FnMut(&str, &[S]) -> S>(nu: &AtomicMeasure<S>, g: F) -> S {
    nu.integrate(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct WeightedPoint<S> {
    pub xstar: Vec<S>,
    pub w: S,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "S: Scalar"))]
struct ProbRepr<S> {
    atoms: Vec<WeightedPoint<S>>,
}

/// A finitely supported probability on the dual ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "ProbRepr<S>",
    bound(serialize = "S: Scalar", deserialize = "S: Scalar")
)]
pub struct ProbabilityAtoms<S> {
    atoms: Vec<WeightedPoint<S>>,
}

impl<S: Scalar> TryFrom<ProbRepr<S>> for ProbabilityAtoms<S> {
    type Error = Error;
    fn try_from(r: ProbRepr<S>) -> Result<Self> {
        ProbabilityAtoms::new(r.atoms.into_iter().map(|p| (p.xstar, p.w)).collect())
    }
}

impl<S: Scalar> ProbabilityAtoms<S> {
    /// Validates positivity and total mass 1 (within the default tolerance),
    /// merging duplicate points.
    pub fn new(atoms: Vec<(Vec<S>, S)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::NotProbability { sum: 0.0 });
        }
        let dim = atoms[0].0.len();
        let mut merged: BTreeMap<Vec<i64>, WeightedPoint<S>> = BTreeMap::new();
        for (x, w) in atoms {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: x.len(),
                });
            }
            if !linalg::is_finite(&x) || !w.is_finite() {
                return Err(Error::NonFinite("probability atom"));
            }
            if w <= S::zero() {
                return Err(Error::NotPositive);
            }
            merged
                .entry(round_key(&x))
                .and_modify(|e| e.w += w)
                .or_insert(WeightedPoint { xstar: x, w });
        }
        let mut atoms: Vec<WeightedPoint<S>> = merged.into_values().collect();
        atoms.sort_by(|a, b| cmp_vec(&a.xstar, &b.xstar));
        let sum: S = atoms.iter().map(|a| a.w).sum();
        if (sum - S::one()).abs() > S::of(S::DEFAULT_TOL) * S::of(atoms.len() as f64).max(S::one())
        {
            return Err(Error::NotProbability { sum: sum.as_f64() });
        }
        Ok(ProbabilityAtoms { atoms })
    }

    pub fn dirac(x: Vec<S>) -> Self {
        ProbabilityAtoms {
            atoms: vec![WeightedPoint {
                xstar: x,
                w: S::one(),
            }],
        }
    }

    /// Equal weights on the given points.
    pub fn uniform(points: Vec<Vec<S>>) -> Result<Self> {
        let w = S::one() / S::of(points.len() as f64);
        Self::new(points.into_iter().map(|p| (p, w)).collect())
    }

    pub fn atoms(&self) -> &[WeightedPoint<S>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].xstar.len()
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec<S>> {
        self.atoms.iter().map(|a| &a.xstar)
    }

    pub fn weights(&self) -> impl Iterator<Item = S> + '_ {
        self.atoms.iter().map(|a| a.w)
    }

    /// `sum w_i x*_i`.
    pub fn barycenter(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim()];
        for a in &self.atoms {
            linalg::axpy(&mut out, a.w, &a.xstar);
        }
        out
    }

    pub fn expect<F: FnMut(&[S]) -> S>(&self, mut f: F) -> S {
        self.atoms.iter().map(|a| a.w * f(&a.xstar)).sum()
    }

    pub fn validate(&self, space: &Space<S>) -> Result<()> {
        for a in &self.atoms {
            let n = space.dual_norm(&a.xstar)?;
            if n > S::one() + space.tol() {
                return Err(Error::OutsideBall { norm: n.as_f64() });
            }
        }
        Ok(())
    }

    pub fn approx_eq(&self, other: &Self, tol: S) -> bool {
        self.atoms.len() == other.atoms.len()
            && self.atoms.iter().all(|a| {
                other.atoms.iter().any(|b| {
                    linalg::max_abs_diff(&a.xstar, &b.xstar) <= tol && (a.w - b.w).abs() <= tol
                })
            })
    }
}

pub fn barycenter<S: Scalar>(p: &ProbabilityAtoms<S>) -> Vec<S> {
    p.barycenter()
}

/// Base masses `sigma(t)` and fiber probabilities `nu_t` of a positive
/// atomic measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct DisintegrationKernel<S> {
    pub sigma: BTreeMap<String, S>,
    pub kernels: BTreeMap<String, ProbabilityAtoms<S>>,
}

impl<S: Scalar> DisintegrationKernel<S> {
    /// `sum_t sigma(t) * int g(t, .) d nu_t`.
    pub fn integrate<F>(&self, mut g: F) -> S
    where
        F: FnMut(&str, &[S]) -> S,
    {
        self.sigma
            .iter()
            .map(|(t, &s)| s * self.kernels[t].expect(|x| g(t, x)))
            .sum()
    }

    pub fn kernel(&self, t: &str) -> Option<&ProbabilityAtoms<S>> {
        self.kernels.get(t)
    }
}

/// Groups the atoms of a positive measure by label and normalizes each group.
pub fn disintegrate<S: Scalar>(nu: &AtomicMeasure<S>) -> Result<DisintegrationKernel<S>> {
    nu.ensure_positive()?;
    let mut groups: BTreeMap<String, Vec<&Atom<S>>> = BTreeMap::new();
    for a in nu.atoms() {
        groups.entry(a.t.clone()).or_default().push(a);
    }
    let mut sigma = BTreeMap::new();
    let mut kernels = BTreeMap::new();
    for (t, atoms) in groups {
        let s: S = atoms.iter().map(|a| a.w).sum();
        let fiber = ProbabilityAtoms {
            atoms: atoms
                .iter()
                .map(|a| WeightedPoint {
                    xstar: a.xstar.clone(),
                    w: a.w / s,
                })
                .collect(),
        };
        sigma.insert(t.clone(), s);
        kernels.insert(t, fiber);
    }
    Ok(DisintegrationKernel { sigma, kernels })
}

/// Inverse of [`disintegrate`]: the atoms `(t, x*, sigma(t) * p)`.
pub fn recompose<S: Scalar>(kernel: &DisintegrationKernel<S>) -> AtomicMeasure<S> {
    let atoms = kernel
        .sigma
        .iter()
        .flat_map(|(t, &s)| {
            kernel.kernels[t]
                .atoms()
                .iter()
                .map(move |a| Atom::new(t.clone(), a.xstar.clone(), s * a.w))
        })
        .collect();
    AtomicMeasure::new(atoms).expect("finite atoms")
}

/// Builds a kernel from its parts, checking that both maps share a support
/// and that base masses are positive.
pub fn kernel_from_parts<S: Scalar>(
    sigma: BTreeMap<String, S>,
    kernels: BTreeMap<String, ProbabilityAtoms<S>>,
) -> Result<DisintegrationKernel<S>> {
    if sigma.keys().ne(kernels.keys()) {
        return Err(Error::UnknownLabel(
            "sigma and kernel supports differ".into(),
        ));
    }
    if sigma.values().any(|&s| s <= S::zero()) {
        return Err(Error::NotPositive);
    }
    Ok(DisintegrationKernel { sigma, kernels })
}
