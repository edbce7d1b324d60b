//! Sparse matrices, a banded LU with partial pivoting, and conjugate gradients.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from per-row entry lists; duplicate columns are summed.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseMatrix { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `(lower, upper)` bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.n {
            for (c, _) in self.row(i) {
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }
}

/// LU factorization of a banded matrix with partial pivoting.
///
/// Row `i` stores columns `i − kl ..= i + ku + kl`; the extra `kl` columns on
/// the right absorb fill-in from row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.dim();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            for (c, v) in a.row(i) {
                data[i * width + (c + kl - i)] = v;
            }
        }
        let mut lu = BandLu { n, kl, width, data, pivots: vec![0; n] };
        lu.eliminate(ku)?;
        Ok(lu)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn eliminate(&mut self, ku: usize) -> Result<()> {
        let (n, kl) = (self.n, self.kl);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku + kl).min(n - 1);

            let mut p = k;
            let mut best = self.data[self.at(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(Error::Solver(alloc::format!("singular pivot in column {k}")));
            }
            self.pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.at(k, j), self.at(p, j));
                    self.data.swap(a, b);
                }
            }

            let pivot = self.data[self.at(k, k)];
            let len = last_col - k;
            let src = self.at(k, k + 1);
            for i in k + 1..=last_row {
                let lik = self.data[self.at(i, k)];
                if lik == 0.0 {
                    continue;
                }
                let f = lik / pivot;
                let li = self.at(i, k);
                self.data[li] = f;
                let dst = self.at(i, k + 1);
                // rows are disjoint slices of the same buffer
                let (head, tail) = self.data.split_at_mut(dst);
                let pivot_row = &head[src..src + len];
                for (d, s) in tail[..len].iter_mut().zip(pivot_row) {
                    *d -= f * s;
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl) = (self.n, self.kl);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    x[i] -= self.data[self.at(i, k)] * xk;
                }
            }
        }
        let reach = self.width - kl - 1;
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= self.data[self.at(k, j)] * x[j];
            }
            x[k] = s / self.data[self.at(k, k)];
        }
        x
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradients for a symmetric positive (semi)definite operator.
///
/// `project` is applied to every iterate and search direction; it removes the
/// null-space component when the operator is only semidefinite.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    rhs: &[f64],
    rel_tol: f64,
    max_iter: usize,
    project: impl Fn(&mut [f64]),
) -> Result<(Vec<f64>, CgStats)> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let bnorm = math::sqrt(dot(rhs, rhs));
    if bnorm == 0.0 {
        return Ok((x, CgStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    project(&mut p);
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 0..max_iter {
        let rel = math::sqrt(rr) / bnorm;
        if rel <= rel_tol {
            project(&mut x);
            return Ok((x, CgStats { iterations: it, relative_residual: rel }));
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver(alloc::format!("conjugate gradients broke down at iteration {it}")));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        project(&mut x);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        project(&mut p);
    }
    let rel = math::sqrt(rr) / bnorm;
    if rel <= rel_tol {
        return Ok((x, CgStats { iterations: max_iter, relative_residual: rel }));
    }
    Err(Error::Solver(alloc::format!(
        "conjugate gradients stalled after {max_iter} iterations (relative residual {rel:e})"
    )))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
