//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Programs are stated in a general form (equalities, `<=` rows, per-variable
//! bounds, free variables) and converted to the standard form
//! `A x = b, x >= 0` internally. Instances in this crate are tiny, so the
//! tableau is kept dense and rebuilt for every solve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Combinations};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Linear constraints on `num_vars` variables.
///
/// Every variable defaults to the bound `x >= 0`. Use [`Constraints::bounds`]
/// to change it, with `None` meaning unbounded on that side.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints<S> {
    num_vars: usize,
    eq_rows: Vec<Vec<S>>,
    eq_rhs: Vec<S>,
    le_rows: Vec<Vec<S>>,
    le_rhs: Vec<S>,
    lower: Vec<Option<S>>,
    upper: Vec<Option<S>>,
}

impl<S: Scalar> Constraints<S> {
    pub fn new(num_vars: usize) -> Self {
        Constraints {
            num_vars,
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            le_rows: Vec::new(),
            le_rhs: Vec::new(),
            lower: vec![Some(S::zero()); num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn add_eq(&mut self, row: Vec<S>, rhs: S) -> &mut Self {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn add_le(&mut self, row: Vec<S>, rhs: S) -> &mut Self {
        self.le_rows.push(row);
        self.le_rhs.push(rhs);
        self
    }

    pub fn add_ge(&mut self, row: Vec<S>, rhs: S) -> &mut Self {
        self.add_le(row.into_iter().map(|x| -x).collect(), -rhs)
    }

    pub fn bounds(&mut self, var: usize, lower: Option<S>, upper: Option<S>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn eq(mut self, row: Vec<S>, rhs: S) -> Self {
        self.add_eq(row, rhs);
        self
    }

    pub fn le(mut self, row: Vec<S>, rhs: S) -> Self {
        self.add_le(row, rhs);
        self
    }

    pub fn ge(mut self, row: Vec<S>, rhs: S) -> Self {
        self.add_ge(row, rhs);
        self
    }

    pub fn with_bounds(mut self, var: usize, lower: Option<S>, upper: Option<S>) -> Self {
        self.bounds(var, lower, upper);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        for row in self.eq_rows.iter().chain(&self.le_rows) {
            if row.len() != n {
                return Err(Error::MalformedLp(format!(
                    "row of length {} for {} variables",
                    row.len(),
                    n
                )));
            }
            if !linalg::is_finite(row) {
                return Err(Error::NonFinite("constraint matrix"));
            }
        }
        if !linalg::is_finite(&self.eq_rhs) || !linalg::is_finite(&self.le_rhs) {
            return Err(Error::NonFinite("right-hand side"));
        }
        for j in 0..n {
            let bad = |b: Option<S>| b.is_some_and(|x| x.is_nan());
            if bad(self.lower[j]) || bad(self.upper[j]) {
                return Err(Error::NonFinite("variable bound"));
            }
            if let (Some(l), Some(u)) = (self.lower[j], self.upper[j]) {
                if l > u {
                    return Err(Error::MalformedLp(format!(
                        "variable {j} has lower > upper"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[S]) -> S {
        let mut worst = S::zero();
        for (row, &b) in self.eq_rows.iter().zip(&self.eq_rhs) {
            worst = worst.max((linalg::dot(row, x) - b).abs());
        }
        for (row, &b) in self.le_rows.iter().zip(&self.le_rhs) {
            worst = worst.max(linalg::dot(row, x) - b);
        }
        for (j, &v) in x.iter().enumerate() {
            if let Some(l) = self.lower[j] {
                worst = worst.max(l - v);
            }
            if let Some(u) = self.upper[j] {
                worst = worst.max(v - u);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub sense: Sense,
    pub constraints: Constraints<S>,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn minimize(objective: Vec<S>, constraints: Constraints<S>) -> Self {
        LinearProgram {
            objective,
            sense: Sense::Minimize,
            constraints,
        }
    }

    pub fn maximize(objective: Vec<S>, constraints: Constraints<S>) -> Self {
        LinearProgram {
            objective,
            sense: Sense::Maximize,
            constraints,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome<S> {
    pub status: LpStatus,
    pub solution: Option<Vec<S>>,
    pub value: Option<S>,
}

impl<S> LpOutcome<S> {
    fn bare(status: LpStatus) -> Self {
        LpOutcome {
            status,
            solution: None,
            value: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions<S> {
    /// Feasibility, reduced-cost and minimum pivot threshold.
    pub tol: S,
    /// Entries below this are treated as roundoff and cleared.
    pub pivot_tol: S,
    pub max_iterations: usize,
}

impl<S: Scalar> Default for LpOptions<S> {
    fn default() -> Self {
        LpOptions {
            tol: S::of(S::DEFAULT_TOL),
            pivot_tol: S::of(S::DEFAULT_TOL * 1e-2),
            max_iterations: 100_000,
        }
    }
}

pub fn solve<S: Scalar>(lp: &LinearProgram<S>) -> Result<LpOutcome<S>> {
    solve_with(lp, &LpOptions::default())
}

/// Returns any point satisfying `constraints`, or `None` if there is none.
pub fn feasible_point<S: Scalar>(constraints: &Constraints<S>) -> Result<Option<Vec<S>>> {
    let lp = LinearProgram::minimize(vec![S::zero(); constraints.num_vars], constraints.clone());
    Ok(solve(&lp)?.solution)
}

/// How an original variable maps onto standard-form columns.
struct VarMap<S> {
    pos: usize,
    neg: Option<usize>,
    shift: S,
}

#[derive(Clone, Copy, PartialEq)]
enum RowKind {
    Eq,
    Le,
}

/// Pivots between rebuilds of the tableau from the original rows.
const REINVERT_EVERY: usize = 40;

struct Tableau<S> {
    /// m rows of `ncols + 1` entries, the last being the right-hand side.
    rows: Vec<Vec<S>>,
    basis: Vec<usize>,
    /// Initial rows; `row_ids[i]` is the initial index of current row `i`.
    initial: Vec<Vec<S>>,
    row_ids: Vec<usize>,
    ncols: usize,
    /// Roundoff threshold.
    eps: S,
    /// Reduced-cost and minimum pivot threshold.
    tol: S,
}

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [S]) {
        let p = self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x /= p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != S::zero() {
                for (x, &y) in row.iter_mut().zip(&prow) {
                    *x -= f * y;
                    if x.abs() <= self.eps {
                        *x = S::zero();
                    }
                }
                row[c] = S::zero();
            }
        }
        let f = obj[c];
        if f != S::zero() {
            for (x, &y) in obj.iter_mut().zip(&prow) {
                *x -= f * y;
                if x.abs() <= self.eps {
                    *x = S::zero();
                }
            }
            obj[c] = S::zero();
        }
        self.basis[r] = c;
    }

    /// Recomputes the tableau and reduced costs for the current basis from the
    /// initial rows, discarding accumulated roundoff. Keeps the current
    /// tableau if the basis matrix looks singular.
    fn reinvert(&mut self, cost: &[S], obj: &mut [S]) {
        let mut m: Vec<Vec<S>> = self
            .row_ids
            .iter()
            .map(|&i| self.initial[i].clone())
            .collect();
        let k = m.len();
        for (step, &c) in self.basis.iter().enumerate() {
            let Some(piv) =
                (step..k).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap())
            else {
                return;
            };
            if m[piv][c].abs() <= self.tol {
                return;
            }
            m.swap(step, piv);
            let p = m[step][c];
            for x in m[step].iter_mut() {
                *x /= p;
            }
            let prow = m[step].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != step && row[c] != S::zero() {
                    let f = row[c];
                    for (x, &y) in row.iter_mut().zip(&prow) {
                        *x -= f * y;
                    }
                    row[c] = S::zero();
                }
            }
        }
        let rhs = self.ncols;
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                if x.abs() <= self.eps {
                    *x = S::zero();
                }
            }
            row[rhs] = row[rhs].max(S::zero());
        }
        // row order is unchanged relative to `basis`; only row identities moved
        self.rows = m;
        obj.copy_from_slice(cost);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != S::zero() {
                for (o, &x) in obj.iter_mut().zip(row) {
                    *o -= cb * x;
                }
            }
        }
        for o in obj.iter_mut() {
            if o.abs() <= self.eps {
                *o = S::zero();
            }
        }
    }

    /// Minimizes `cost` starting from the reduced-cost row `obj`. Returns
    /// `Ok(false)` when the program is unbounded.
    fn optimize(
        &mut self,
        cost: &[S],
        obj: &mut [S],
        allowed: &[bool],
        max_iter: usize,
    ) -> Result<bool> {
        let rhs = self.ncols;
        let mut since = 0;
        for _ in 0..max_iter {
            // Bland: lowest-index improving column.
            let Some(c) = (0..self.ncols).find(|&j| allowed[j] && obj[j] < -self.tol) else {
                if since > 0 {
                    self.reinvert(cost, obj);
                    since = 0;
                    continue;
                }
                return Ok(true);
            };
            let mut best: Option<(usize, S)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > self.tol {
                    let ratio = row[rhs].max(S::zero()) / row[c];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= self.eps * (S::one() + br.abs());
                            if (tie && self.basis[i] < self.basis[bi]) || (!tie && ratio < br) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None if since > 0 => {
                    self.reinvert(cost, obj);
                    since = 0;
                }
                None => return Ok(false),
                Some((r, _)) => {
                    self.pivot(r, c, obj);
                    since += 1;
                    if since >= REINVERT_EVERY {
                        self.reinvert(cost, obj);
                        since = 0;
                    }
                }
            }
        }
        Err(Error::IterationLimit)
    }
}

/// Solves after dropping equality rows that are numerically dependent on the
/// others. Near-dependent rows arise whenever the data satisfy an identity
/// only up to rounding, and they make phase 1 pivot on noise. Dropped rows
/// are checked against the returned point; if they do not hold, the full
/// system is solved instead.
pub fn solve_with<S: Scalar>(lp: &LinearProgram<S>, opts: &LpOptions<S>) -> Result<LpOutcome<S>> {
    lp.constraints.validate()?;
    let cons = &lp.constraints;
    let keep = linalg::independent_rows(&cons.eq_rows, opts.tol);
    if keep.len() == cons.eq_rows.len() {
        return solve_standard(lp, opts);
    }
    let mut reduced = lp.clone();
    reduced.constraints.eq_rows = keep.iter().map(|&i| cons.eq_rows[i].clone()).collect();
    reduced.constraints.eq_rhs = keep.iter().map(|&i| cons.eq_rhs[i]).collect();
    let out = solve_standard(&reduced, opts)?;
    let witness = match out.status {
        LpStatus::Infeasible => return Ok(out),
        LpStatus::Optimal => out.solution.clone(),
        LpStatus::Unbounded => {
            let probe = LinearProgram::minimize(
                vec![S::zero(); cons.num_vars],
                reduced.constraints.clone(),
            );
            solve_standard(&probe, opts)?.solution
        }
    };
    let scale = cons.eq_rhs.iter().fold(S::one(), |m, b| m.max(b.abs()));
    let holds = witness.is_some_and(|x| {
        cons.eq_rows
            .iter()
            .zip(&cons.eq_rhs)
            .all(|(row, &b)| (linalg::dot(row, &x) - b).abs() <= opts.tol * S::of(10.0) * scale)
    });
    if holds {
        Ok(out)
    } else {
        solve_standard(lp, opts)
    }
}

fn solve_standard<S: Scalar>(lp: &LinearProgram<S>, opts: &LpOptions<S>) -> Result<LpOutcome<S>> {
    let cons = &lp.constraints;
    let n = cons.num_vars;
    if lp.objective.len() != n {
        return Err(Error::MalformedLp(format!(
            "objective of length {} for {} variables",
            lp.objective.len(),
            n
        )));
    }
    if !linalg::is_finite(&lp.objective) {
        return Err(Error::NonFinite("objective"));
    }

    // Column layout for the structural variables.
    let mut maps = Vec::with_capacity(n);
    let mut nstruct = 0;
    for j in 0..n {
        match cons.lower[j] {
            Some(l) => {
                maps.push(VarMap {
                    pos: nstruct,
                    neg: None,
                    shift: l,
                });
                nstruct += 1;
            }
            None => {
                maps.push(VarMap {
                    pos: nstruct,
                    neg: Some(nstruct + 1),
                    shift: S::zero(),
                });
                nstruct += 2;
            }
        }
    }

    let expand = |row: &[S], rhs: S| -> (Vec<S>, S) {
        let mut out = vec![S::zero(); nstruct];
        let mut b = rhs;
        for (j, &a) in row.iter().enumerate() {
            let m = &maps[j];
            out[m.pos] = a;
            if let Some(q) = m.neg {
                out[q] = -a;
            }
            b -= a * m.shift;
        }
        (out, b)
    };

    let mut std_rows: Vec<(Vec<S>, S, RowKind)> = Vec::new();
    for (row, &b) in cons.eq_rows.iter().zip(&cons.eq_rhs) {
        let (r, b) = expand(row, b);
        std_rows.push((r, b, RowKind::Eq));
    }
    for (row, &b) in cons.le_rows.iter().zip(&cons.le_rhs) {
        let (r, b) = expand(row, b);
        std_rows.push((r, b, RowKind::Le));
    }
    for j in 0..n {
        if let Some(u) = cons.upper[j] {
            let mut unit = vec![S::zero(); n];
            unit[j] = S::one();
            let (r, b) = expand(&unit, u);
            std_rows.push((r, b, RowKind::Le));
        }
    }

    let m = std_rows.len();
    let nslack = std_rows.iter().filter(|r| r.2 == RowKind::Le).count();
    let nart = std_rows
        .iter()
        .filter(|r| r.2 == RowKind::Eq || r.1 < S::zero())
        .count();
    let ncols = nstruct + nslack + nart;
    let rhs_scale = std_rows.iter().fold(S::one(), |acc, r| acc.max(r.1.abs()));
    let feas_tol = opts.tol * rhs_scale;

    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        initial: Vec::new(),
        row_ids: (0..m).collect(),
        ncols,
        eps: opts.pivot_tol,
        tol: opts.tol,
    };
    let mut is_art = vec![false; ncols];
    let (mut next_slack, mut next_art) = (nstruct, nstruct + nslack);
    for (coeffs, b, kind) in std_rows {
        let mut row = vec![S::zero(); ncols + 1];
        row[..nstruct].copy_from_slice(&coeffs);
        row[ncols] = b;
        let flip = b < S::zero();
        if flip {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
        let mut basic = None;
        if kind == RowKind::Le {
            row[next_slack] = if flip { -S::one() } else { S::one() };
            if !flip {
                basic = Some(next_slack);
            }
            next_slack += 1;
        }
        let basic = match basic {
            Some(c) => c,
            None => {
                row[next_art] = S::one();
                is_art[next_art] = true;
                next_art += 1;
                next_art - 1
            }
        };
        tab.rows.push(row);
        tab.basis.push(basic);
    }
    tab.initial = tab.rows.clone();

    // Phase 1: minimize the sum of artificials.
    if nart > 0 {
        let mut obj = vec![S::zero(); ncols + 1];
        for (j, a) in is_art.iter().enumerate() {
            if *a {
                obj[j] = S::one();
            }
        }
        for (i, row) in tab.rows.iter().enumerate() {
            if is_art[tab.basis[i]] {
                for (o, &x) in obj.iter_mut().zip(row) {
                    *o -= x;
                }
            }
        }
        let mut phase1 = vec![S::zero(); ncols + 1];
        for (j, a) in is_art.iter().enumerate() {
            if *a {
                phase1[j] = S::one();
            }
        }
        let allowed = vec![true; ncols];
        tab.optimize(&phase1, &mut obj, &allowed, opts.max_iterations)?;
        if -obj[ncols] > feas_tol {
            return Ok(LpOutcome::bare(LpStatus::Infeasible));
        }
        // Drive remaining (zero-valued) artificials out of the basis, dropping
        // rows that turn out to be redundant.
        let mut i = 0;
        while i < tab.rows.len() {
            if is_art[tab.basis[i]] {
                let col = (0..ncols)
                    .filter(|&j| !is_art[j])
                    .max_by(|&a, &b| {
                        tab.rows[i][a]
                            .abs()
                            .partial_cmp(&tab.rows[i][b].abs())
                            .unwrap()
                    })
                    .filter(|&j| tab.rows[i][j].abs() > tab.eps);
                match col {
                    Some(c) => {
                        tab.pivot(i, c, &mut obj);
                        i += 1;
                    }
                    None => {
                        // the row owning this artificial is the redundant one
                        let art = tab.basis[i];
                        let k = tab
                            .row_ids
                            .iter()
                            .position(|&r| tab.initial[r][art] != S::zero())
                            .expect("artificial belongs to a row");
                        tab.row_ids.remove(k);
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    // Phase 2.
    let mut cost = vec![S::zero(); ncols + 1];
    let sign = match lp.sense {
        Sense::Minimize => S::one(),
        Sense::Maximize => -S::one(),
    };
    for (j, &c) in lp.objective.iter().enumerate() {
        let mp = &maps[j];
        cost[mp.pos] = sign * c;
        if let Some(q) = mp.neg {
            cost[q] = -sign * c;
        }
    }
    let mut obj = cost.clone();
    for (i, row) in tab.rows.iter().enumerate() {
        let cb = cost[tab.basis[i]];
        if cb != S::zero() {
            for (o, &x) in obj.iter_mut().zip(row) {
                *o -= cb * x;
            }
        }
    }
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    if !tab.optimize(&cost, &mut obj, &allowed, opts.max_iterations)? {
        return Ok(LpOutcome::bare(LpStatus::Unbounded));
    }

    let mut xs = vec![S::zero(); ncols];
    for (i, row) in tab.rows.iter().enumerate() {
        let v = row[ncols];
        xs[tab.basis[i]] = if v.abs() <= tab.eps { S::zero() } else { v };
    }
    let x: Vec<S> = maps
        .iter()
        .map(|mp| {
            let mut v = mp.shift + xs[mp.pos];
            if let Some(q) = mp.neg {
                v -= xs[q];
            }
            v
        })
        .collect();
    let value = linalg::dot(&lp.objective, &x);
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        solution: Some(x),
        value: Some(value),
    })
}

/// Vertices of `{x >= 0 : A x = b}` found by enumerating basic solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexEnumeration<S> {
    pub vertices: Vec<Vec<S>>,
    /// Set when more than `cap` distinct vertices exist.
    pub truncated: bool,
}

/// Enumerates the basic feasible solutions of `{x >= 0 : A x = b}` by brute
/// force over column subsets. Redundant rows are removed first; an
/// inconsistent system yields no vertices.
pub fn basic_feasible_solutions<S: Scalar>(
    a: &[Vec<S>],
    b: &[S],
    cap: usize,
    tol: S,
) -> Result<VertexEnumeration<S>> {
    let n = a.first().map_or(0, |r| r.len());
    if a.iter().any(|r| r.len() != n) || a.len() != b.len() {
        return Err(Error::MalformedLp("ragged equality system".into()));
    }
    let mut aug: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(r, &x)| {
            let mut r = r.clone();
            r.push(x);
            r
        })
        .collect();
    let pivots = linalg::rref(&mut aug, n, tol);
    let r = pivots.len();
    let inconsistent = aug[r..].iter().any(|row| row[n].abs() > tol);
    let none = VertexEnumeration {
        vertices: Vec::new(),
        truncated: false,
    };
    if inconsistent {
        return Ok(none);
    }
    let reduced = &aug[..r];
    let mut out: Vec<Vec<S>> = Vec::new();
    let mut truncated = false;
    for cols in Combinations::new(n, r) {
        let sub: Vec<Vec<S>> = reduced
            .iter()
            .map(|row| cols.iter().map(|&c| row[c]).collect())
            .collect();
        let rhs: Vec<S> = reduced.iter().map(|row| row[n]).collect();
        let Some(sol) = linalg::solve(&sub, &rhs, tol) else {
            continue;
        };
        if sol.iter().any(|&v| v < -tol) {
            continue;
        }
        let mut x = vec![S::zero(); n];
        for (&c, &v) in cols.iter().zip(&sol) {
            x[c] = if v < tol { S::zero() } else { v };
        }
        let dup = out
            .iter()
            .any(|y| linalg::max_abs_diff(y, &x) <= tol * S::of(10.0));
        if !dup {
            if out.len() == cap {
                truncated = true;
                break;
            }
            out.push(x);
        }
    }
    Ok(VertexEnumeration {
        vertices: out,
        truncated,
    })
}
