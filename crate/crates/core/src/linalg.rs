//! Small dense helpers: dot products and Gaussian elimination.

use crate::scalar::Scalar;

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale<S: Scalar>(a: &[S], c: S) -> Vec<S> {
    a.iter().map(|&x| x * c).collect()
}

/// `acc += c * x`
pub fn axpy<S: Scalar>(acc: &mut [S], c: S, x: &[S]) {
    for (a, &v) in acc.iter_mut().zip(x) {
        *a += c * v;
    }
}

pub fn max_abs_diff<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(S::zero(), S::max)
}

pub fn is_finite<S: Scalar>(a: &[S]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Row-reduces `rows` in place to reduced echelon form and returns the pivot
/// columns. Entries with magnitude below `tol` (relative to the largest entry)
/// are treated as zero. Only the first `ncols` columns are used for pivoting,
/// so an augmented right-hand side can ride along.
pub fn rref<S: Scalar>(rows: &mut [Vec<S>], ncols: usize, tol: S) -> Vec<usize> {
    let scale = rows
        .iter()
        .flat_map(|r| r.iter().take(ncols))
        .fold(S::zero(), |m, &x| m.max(x.abs()))
        .max(S::one());
    let eps = tol * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let (best, best_val) = (r..rows.len())
            .map(|i| (i, rows[i][c].abs()))
            .fold((r, S::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_val <= eps {
            continue;
        }
        rows.swap(r, best);
        let p = rows[r][c];
        for x in rows[r].iter_mut() {
            *x /= p;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != S::zero() {
                    for (x, &y) in row.iter_mut().zip(&pivot_row) {
                        *x -= f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Indices of a maximal set of linearly independent rows, chosen greedily in
/// order. A row is kept when its component orthogonal to the kept rows is
/// larger than `tol` times its norm.
pub fn independent_rows<S: Scalar>(rows: &[Vec<S>], tol: S) -> Vec<usize> {
    let mut basis: Vec<Vec<S>> = Vec::new();
    let mut keep = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let n = norm2(row);
        if n == S::zero() {
            continue;
        }
        let mut r = row.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&r, q);
                axpy(&mut r, -c, q);
            }
        }
        let rn = norm2(&r);
        if rn > tol * n {
            basis.push(scale(&r, S::one() / rn));
            keep.push(i);
        }
    }
    keep
}

pub fn rank<S: Scalar>(rows: &[Vec<S>], tol: S) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m = rows.to_vec();
    rref(&mut m, ncols, tol).len()
}

/// Affine dimension of a point set (`-1` is never returned; empty sets give 0).
pub fn affine_dim<S: Scalar>(points: &[Vec<S>], tol: S) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let diffs: Vec<Vec<S>> = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    rank(&diffs, tol)
}

/// Solves the square system `a x = b` by Gauss-Jordan elimination with partial
/// pivoting. Returns `None` when `a` is numerically singular.
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[S], tol: S) -> Option<Vec<S>> {
    let n = b.len();
    let mut m: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    let pivots = rref(&mut m, n, tol);
    if pivots.len() < n {
        return None;
    }
    Some(m.iter().map(|r| r[n]).collect())
}

/// Lexicographic `k`-subsets of `0..n`.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_two_by_two() {
        let a: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        let x = solve(&a, &[4.0, 6.0], 1e-12).unwrap();
        assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn combination_counts() {
        assert_eq!(Combinations::new(5, 2).count(), 10);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
        let all: Vec<_> = Combinations::new(4, 3).collect();
        assert_eq!(all.first().unwrap(), &vec![0, 1, 2]);
        assert_eq!(all.last().unwrap(), &vec![1, 2, 3]);
    }

    #[test]
    fn singular_system() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&a, &[1.0, 2.0], 1e-12).is_none());
        assert_eq!(rank(&a, 1e-12), 1);
    }

    #[test]
    fn affine_dimension_of_square_corners() {
        let pts = vec![
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
        ];
        assert_eq!(affine_dim(&pts, 1e-12), 2);
        assert_eq!(affine_dim(&pts[..2], 1e-12), 1);
        assert_eq!(affine_dim(&pts[..1], 1e-12), 0);
    }
}
