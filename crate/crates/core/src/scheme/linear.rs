//! Sparse matrix storage and linear solvers for the Newton systems.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::MatMut;

use super::params::LinearSolverKind;
use crate::{Error, Result};

/// Row-compressed matrix with a fixed, sorted sparsity pattern.
#[derive(Debug, Clone)]
pub(crate) struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
    diag: Vec<usize>,
}

impl CsrMatrix {
    /// Builds the pattern from unsorted, possibly repeated column lists.
    /// Diagonal entries are always included.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for (i, mut cols) in rows.into_iter().enumerate() {
            cols.push(i);
            cols.sort_unstable();
            cols.dedup();
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        let diag = (0..n)
            .map(|i| row_ptr[i] + col_idx[row_ptr[i]..row_ptr[i + 1]].binary_search(&i).unwrap())
            .collect();
        let nnz = col_idx.len();
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
            diag,
        }
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[s..e].binary_search(&c).ok().map(|k| s + k)
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self
            .position(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) outside the sparsity pattern"));
        self.values[k] += v;
    }

    #[cfg(test)]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.position(r, c).map_or(0.0, |k| self.values[k])
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }
}

/// Incomplete LU factorization without fill.
struct Ilu0 {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    fn new(a: &CsrMatrix) -> Self {
        let mut values = a.values.clone();
        let n = a.n;
        let mut marker = vec![usize::MAX; n];
        for i in 0..n {
            let (s, e) = (a.row_ptr[i], a.row_ptr[i + 1]);
            for k in s..e {
                marker[a.col_idx[k]] = k;
            }
            for k in s..a.diag[i] {
                let col = a.col_idx[k];
                let pivot = values[a.diag[col]];
                let l = values[k] / pivot;
                values[k] = l;
                for kk in a.diag[col] + 1..a.row_ptr[col + 1] {
                    let m = marker[a.col_idx[kk]];
                    if m != usize::MAX {
                        values[m] -= l * values[kk];
                    }
                }
            }
            let d = values[a.diag[i]];
            if d.abs() < 1e-300 {
                values[a.diag[i]] = 1e-300_f64.copysign(if d == 0.0 { 1.0 } else { d });
            }
            for k in s..e {
                marker[a.col_idx[k]] = usize::MAX;
            }
        }
        Ilu0 {
            row_ptr: a.row_ptr.clone(),
            col_idx: a.col_idx.clone(),
            values,
            diag: a.diag.clone(),
        }
    }

    fn apply(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let mut s = x[i];
            for k in self.row_ptr[i]..self.diag[i] {
                s -= self.values[k] * x[self.col_idx[k]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in self.diag[i] + 1..self.row_ptr[i + 1] {
                s -= self.values[k] * x[self.col_idx[k]];
            }
            x[i] = s / self.values[self.diag[i]];
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Right-preconditioned restarted GMRES from a zero initial guess.
/// Returns the relative residual reached.
fn gmres(a: &CsrMatrix, m: &Ilu0, b: &[f64], x: &mut [f64], tol: f64, restart: usize, max_iter: usize) -> f64 {
    let n = b.len();
    let bnorm = norm(b);
    x.iter_mut().for_each(|v| *v = 0.0);
    if bnorm == 0.0 {
        return 0.0;
    }
    let mut r = b.to_vec();
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut total = 0;
    let mut rel = 1.0;
    while total < max_iter {
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= tol {
            break;
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut hmat = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_done = 0;
        for j in 0..restart {
            z.copy_from_slice(&v[j]);
            m.apply(&mut z);
            a.matvec(&z, &mut w);
            for i in 0..=j {
                let hij: f64 = w.iter().zip(&v[i]).map(|(a, b)| a * b).sum();
                hmat[i][j] = hij;
                w.iter_mut().zip(&v[i]).for_each(|(a, b)| *a -= hij * b);
            }
            let hn = norm(&w);
            hmat[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * hmat[i][j] + sn[i] * hmat[i + 1][j];
                hmat[i + 1][j] = -sn[i] * hmat[i][j] + cs[i] * hmat[i + 1][j];
                hmat[i][j] = t;
            }
            let d = (hmat[j][j] * hmat[j][j] + hmat[j + 1][j] * hmat[j + 1][j]).sqrt();
            if d == 0.0 {
                k_done = j;
                break;
            }
            cs[j] = hmat[j][j] / d;
            sn[j] = hmat[j + 1][j] / d;
            hmat[j][j] = d;
            hmat[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            k_done = j + 1;
            total += 1;
            rel = g[j + 1].abs() / bnorm;
            if rel <= tol || hn == 0.0 || total >= max_iter {
                break;
            }
            v.push(w.iter().map(|x| x / hn).collect());
        }
        // Back substitution and update x += M⁻¹ V y.
        let mut y = vec![0.0; k_done];
        for i in (0..k_done).rev() {
            let mut s = g[i];
            for l in i + 1..k_done {
                s -= hmat[i][l] * y[l];
            }
            y[i] = s / hmat[i][i];
        }
        z.iter_mut().for_each(|v| *v = 0.0);
        for (yi, vi) in y.iter().zip(&v) {
            z.iter_mut().zip(vi).for_each(|(a, b)| *a += yi * b);
        }
        m.apply(&mut z);
        x.iter_mut().zip(&z).for_each(|(a, b)| *a += b);
        a.matvec(x, &mut w);
        r.iter_mut().zip(b.iter().zip(&w)).for_each(|(ri, (bi, wi))| *ri = bi - wi);
        rel = norm(&r) / bnorm;
        if rel <= tol || k_done == 0 {
            break;
        }
    }
    rel
}

/// Linear solver bound to one sparsity pattern; caches the symbolic
/// factorization for the direct path.
pub(crate) struct LinearSolver {
    kind: LinearSolverKind,
    threshold: usize,
    tol: f64,
    restart: usize,
    symbolic: Option<SymbolicLu<usize>>,
}

impl LinearSolver {
    pub fn new(kind: LinearSolverKind, threshold: usize, tol: f64, restart: usize) -> Self {
        LinearSolver {
            kind,
            threshold,
            tol,
            restart,
            symbolic: None,
        }
    }

    fn use_direct(&self, n: usize) -> bool {
        match self.kind {
            LinearSolverKind::Direct => true,
            LinearSolverKind::Gmres => false,
            LinearSolverKind::Auto => n <= self.threshold,
        }
    }

    /// Solves `a x = b` in place of `b`.
    pub fn solve(&mut self, a: &CsrMatrix, b: &mut [f64]) -> Result<()> {
        if self.use_direct(a.n) {
            self.solve_direct(a, b)
        } else {
            let m = Ilu0::new(a);
            let mut x = vec![0.0; a.n];
            let rel = gmres(a, &m, b, &mut x, self.tol, self.restart, 20 * self.restart);
            if !rel.is_finite() {
                return Err(Error::LinearSolve("GMRES produced a non-finite residual".into()));
            }
            b.copy_from_slice(&x);
            Ok(())
        }
    }

    fn solve_direct(&mut self, a: &CsrMatrix, b: &mut [f64]) -> Result<()> {
        // The CSR arrays of A are the CSC arrays of Aᵀ; factor Aᵀ and solve
        // with its transpose.
        let sym = SymbolicSparseColMatRef::new_checked(a.n, a.n, &a.row_ptr, None, &a.col_idx);
        let at = SparseColMatRef::new(sym, &a.values);
        if self.symbolic.is_none() {
            let s = SymbolicLu::try_new(sym).map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
            self.symbolic = Some(s);
        }
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone().unwrap(), at)
            .map_err(|e| Error::LinearSolve(format!("sparse LU failed: {e:?}")))?;
        let n = b.len();
        lu.solve_transpose_in_place(MatMut::from_column_major_slice_mut(b, n, 1));
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve("direct solve produced non-finite values".into()));
        }
        Ok(())
    }
}
