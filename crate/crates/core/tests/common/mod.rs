//! Brute-force reference solver for tiny linear programs.
//!
//! Programs have the form: maximize `c.x` subject to `x >= 0` and rows
//! `a.x (<=|>=|=) b`. The feasible set is pointed, so it is empty, or has an
//! optimal vertex, or has an extreme ray improving the objective. Vertices and
//! extreme rays are found by solving every square subsystem of active
//! constraints.

#![allow(dead_code)]

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct TinyLp {
    pub c: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Rel, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

const FEAS: f64 = 1e-9;

pub fn random_tiny_lp<R: Rng>(rng: &mut R) -> TinyLp {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=10);
    let int = |rng: &mut R, lo: i32, hi: i32| rng.gen_range(lo..=hi) as f64;
    let c = (0..n).map(|_| int(rng, -5, 5)).collect();
    let rows = (0..m)
        .map(|_| {
            let a = (0..n).map(|_| int(rng, -4, 6)).collect();
            let rel = match rng.gen_range(0..10) {
                0..=5 => Rel::Le,
                6..=7 => Rel::Ge,
                _ => Rel::Eq,
            };
            (a, rel, int(rng, -4, 12))
        })
        .collect();
    TinyLp { c, rows }
}

fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv =
            (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..n {
                    m[r][k] -= f * m[col][k];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

fn subsets(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Points of `{x >= 0, rows}` where `n` linearly independent constraints are
/// tight.
fn vertices(n: usize, rows: &[(Vec<f64>, Rel, f64)]) -> Vec<Vec<f64>> {
    let mut all: Vec<(Vec<f64>, f64)> = rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        all.push((e, 0.0));
    }
    let feasible = |x: &[f64]| {
        x.iter().all(|&v| v >= -FEAS)
            && rows.iter().all(|(a, rel, b)| {
                let s: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
                let tol = FEAS * (1.0 + b.abs());
                match rel {
                    Rel::Le => s <= b + tol,
                    Rel::Ge => s >= b - tol,
                    Rel::Eq => (s - b).abs() <= tol,
                }
            })
    };
    let mut out = Vec::new();
    subsets(all.len(), n, &mut |idx| {
        let m = idx.iter().map(|&i| all[i].0.clone()).collect();
        let rhs = idx.iter().map(|&i| all[i].1).collect();
        if let Some(x) = solve_square(m, rhs) {
            if feasible(&x) {
                out.push(x);
            }
        }
    });
    out
}

pub fn reference_solve(lp: &TinyLp) -> Reference {
    let n = lp.c.len();
    let verts = vertices(n, &lp.rows);
    if verts.is_empty() {
        return Reference::Infeasible;
    }
    // extreme rays: vertices of the normalized recession cone
    let mut cone: Vec<(Vec<f64>, Rel, f64)> = lp
        .rows
        .iter()
        .map(|(a, r, _)| (a.clone(), *r, 0.0))
        .collect();
    cone.push((vec![1.0; n], Rel::Eq, 1.0));
    let improving = vertices(n, &cone)
        .iter()
        .any(|d| lp.c.iter().zip(d).map(|(p, q)| p * q).sum::<f64>() > 1e-9);
    if improving {
        return Reference::Unbounded;
    }
    let best = verts
        .iter()
        .map(|x| lp.c.iter().zip(x).map(|(p, q)| p * q).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Reference::Optimal(best)
}
