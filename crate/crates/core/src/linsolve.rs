//! Linear algebra kernels for the two time-stepping schemes.
//!
//! The surface scheme produces one symmetric positive definite sparse matrix
//! per step, shared by the three coordinate right-hand sides; it is solved by
//! Jacobi-preconditioned conjugate gradients. The axisymmetric scheme
//! produces strictly diagonally dominant tridiagonal systems (cyclic for
//! closed generating curves), solved directly.

use crate::error::{Error, Result};

/// Relative residual targeted by [`solve_spd`] unless told otherwise.
pub const DEFAULT_CG_TOL: f64 = 1e-10;

/// Symmetry tolerance used when validating an assembled matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Square sparse matrix in compressed sparse row form.
///
/// Column indices are sorted within each row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an all-zero matrix with the given sparsity pattern. Each row's
    /// column list is sorted and deduplicated.
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            if let Some(&c) = row.last() {
                if c >= n {
                    return Err(Error::Dimension(format!("column {c} in a {n}x{n} matrix")));
                }
            }
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Ok(Self { n, row_ptr, col_idx, values })
    }

    /// Builds a matrix from a dense row-major array, dropping exact zeros
    /// off the diagonal.
    pub fn from_dense(a: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        let pattern = a
            .iter()
            .enumerate()
            .map(|(i, row)| {
                if row.len() != n {
                    return Err(Error::Dimension(format!("row {i} has {} entries", row.len())));
                }
                Ok((0..n).filter(|&j| j == i || row[j] != 0.0).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut m = Self::from_pattern(pattern)?;
        for i in 0..n {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.values[k] = a[i][m.col_idx[k]];
            }
        }
        Ok(m)
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn position(&self, row: usize, col: usize) -> Option<usize> {
        let cols = &self.col_idx[self.row_ptr[row]..self.row_ptr[row + 1]];
        cols.binary_search(&col).ok().map(|k| self.row_ptr[row] + k)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |k| self.values[k])
    }

    /// Adds `value` to entry `(row, col)`, which must be part of the pattern.
    ///
    /// # Panics
    /// When the entry is outside the sparsity pattern.
    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        let k = self
            .position(row, col)
            .unwrap_or_else(|| panic!("entry ({row},{col}) not in sparsity pattern"));
        self.values[k] += value;
    }

    /// Adds `diag[i]` to every diagonal entry.
    pub fn add_diagonal(&mut self, diag: &[f64]) {
        for (i, &d) in diag.iter().enumerate() {
            self.add(i, i, d);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// Quadratic form `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    /// Returns the first pair `(i, j)` whose entries differ by more than
    /// `tol` relative to the largest entry magnitude.
    pub fn check_symmetric(&self, tol: f64) -> Result<()> {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if j <= i {
                    continue;
                }
                let diff = (self.values[k] - self.get(j, i)).abs();
                if diff > tol * scale {
                    return Err(Error::Asymmetric { row: i, col: j, diff });
                }
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row[self.col_idx[k]] = self.values[k];
            }
        }
        a
    }
}

/// A validated symmetric matrix with strictly positive diagonal, the shape
/// of every system the surface scheme assembles.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    matrix: CsrMatrix,
}

impl SparseSystem {
    pub fn new(matrix: CsrMatrix) -> Result<Self> {
        matrix.check_symmetric(SYMMETRY_TOL)?;
        for (row, value) in matrix.diagonal().into_iter().enumerate() {
            if !(value > 0.0) {
                return Err(Error::NonPositiveDiagonal { row, value });
            }
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.n
    }
}

/// Iteration controls for conjugate gradients.
#[derive(Clone, Copy, Debug)]
pub struct CgOptions {
    pub tol: f64,
    /// Defaults to ten times the dimension.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_CG_TOL, max_iter: None }
    }
}

/// Solves `A x = b` to relative residual `tol` with Jacobi-preconditioned
/// conjugate gradients.
pub fn solve_spd(system: &SparseSystem, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let opts = CgOptions { tol, ..CgOptions::default() };
    let mut out = solve_spd_multi(system, &[rhs], opts)?;
    Ok(out.pop().expect("one right-hand side"))
}

/// Solves `A x = b_i` for several right-hand sides sharing the matrix.
pub fn solve_spd_multi(
    system: &SparseSystem,
    rhs: &[&[f64]],
    opts: CgOptions,
) -> Result<Vec<Vec<f64>>> {
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("CG tolerance must be positive, got {}", opts.tol)));
    }
    let n = system.dim();
    let inv_diag: Vec<f64> = system.matrix.diagonal().iter().map(|d| 1.0 / d).collect();
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    rhs.iter()
        .map(|b| {
            if b.len() != n {
                return Err(Error::Dimension(format!("rhs of length {} for dimension {n}", b.len())));
            }
            pcg(&system.matrix, &inv_diag, b, None, opts.tol, max_iter)
        })
        .collect()
}

/// Like [`solve_spd_multi`] but starting each iteration from a guess.
pub fn solve_spd_multi_from(
    system: &SparseSystem,
    rhs: &[&[f64]],
    guesses: &[&[f64]],
    opts: CgOptions,
) -> Result<Vec<Vec<f64>>> {
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("CG tolerance must be positive, got {}", opts.tol)));
    }
    if guesses.len() != rhs.len() {
        return Err(Error::Dimension(format!("{} guesses for {} right-hand sides", guesses.len(), rhs.len())));
    }
    let n = system.dim();
    let inv_diag: Vec<f64> = system.matrix.diagonal().iter().map(|d| 1.0 / d).collect();
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    rhs.iter()
        .zip(guesses)
        .map(|(b, x0)| {
            if b.len() != n || x0.len() != n {
                return Err(Error::Dimension(format!("rhs/guess of length {}/{} for dimension {n}", b.len(), x0.len())));
            }
            pcg(&system.matrix, &inv_diag, b, Some(x0), opts.tol, max_iter)
        })
        .collect()
}

fn pcg(a: &CsrMatrix, inv_diag: &[f64], b: &[f64], x0: Option<&[f64]>, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let b_norm = norm(b);
    let mut x: Vec<f64> = match x0 {
        Some(x0) => x0.to_vec(),
        None => b.iter().zip(inv_diag).map(|(bi, di)| bi * di).collect(),
    };
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut r = a.mul_vec(&x);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut residual = norm(&r) / b_norm;
    let mut iterations = 0;
    while residual > tol {
        if iterations >= max_iter {
            return Err(Error::SolverFailure { iterations, residual });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure { iterations, residual });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        residual = norm(&r) / b_norm;
        iterations += 1;
    }
    Ok(x)
}

/// Largest dimension accepted by [`solve_dense`].
pub const DENSE_MAX_DIM: usize = 200;

/// Gaussian elimination with partial pivoting; the reference solver for
/// small systems.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    if n > DENSE_MAX_DIM {
        return Err(Error::Dimension(format!("dense solve limited to n <= {DENSE_MAX_DIM}, got {n}")));
    }
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension("dense system is not square or rhs mismatched".into()));
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty range");
        if m[pivot][col] == 0.0 {
            return Err(Error::SingularMatrix(col));
        }
        m.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            x[row] -= f * x[col];
        }
    }
    for row in (0..n).rev() {
        let mut acc = x[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

/// Tridiagonal system `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
///
/// In the cyclic case indices wrap: `sub[0]` couples row 0 to `x[n-1]` and
/// `sup[n-1]` couples row `n-1` to `x[0]`. In the open case those two
/// entries must be zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
    pub cyclic: bool,
}

impl TridiagSystem {
    pub fn new(n: usize, cyclic: bool) -> Self {
        Self {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
            rhs: vec![0.0; n],
            cyclic,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Strict row diagonal dominance, the solvability condition for the
    /// axisymmetric step.
    pub fn check_dominance(&self) -> Result<()> {
        for row in 0..self.len() {
            let diag = self.diag[row].abs();
            let off = self.sub[row].abs() + self.sup[row].abs();
            if !(diag > off) {
                return Err(Error::NotDiagonallyDominant { row, diag, off });
            }
        }
        Ok(())
    }

    /// Computes `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.sub[i] * x[i - 1];
                } else if self.cyclic {
                    acc += self.sub[0] * x[n - 1];
                }
                if i + 1 < n {
                    acc += self.sup[i] * x[i + 1];
                } else if self.cyclic {
                    acc += self.sup[n - 1] * x[0];
                }
                acc
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] += self.diag[i];
            if i > 0 {
                a[i][i - 1] += self.sub[i];
            } else if self.cyclic {
                a[0][n - 1] += self.sub[0];
            }
            if i + 1 < n {
                a[i][i + 1] += self.sup[i];
            } else if self.cyclic {
                a[n - 1][0] += self.sup[n - 1];
            }
        }
        a
    }
}

/// Direct solve of a strictly diagonally dominant (cyclic) tridiagonal
/// system. The cyclic case is reduced to two open solves through a
/// Sherman-Morrison rank-one correction.
pub fn solve_tridiagonal(system: &TridiagSystem) -> Result<Vec<f64>> {
    let n = system.len();
    if system.sub.len() != n || system.sup.len() != n || system.rhs.len() != n {
        return Err(Error::Dimension("tridiagonal bands have different lengths".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    system.check_dominance()?;
    if !system.cyclic {
        if system.sub[0] != 0.0 || system.sup[n - 1] != 0.0 {
            return Err(Error::Dimension("open tridiagonal system has corner entries".into()));
        }
        return Ok(thomas(&system.sub, &system.diag, &system.sup, &system.rhs));
    }
    if n < 3 {
        return solve_dense(&system.to_dense(), &system.rhs);
    }

    // A = B + u vᵀ with u = (gamma, 0, .., 0, sup[n-1])ᵀ, v = (1, 0, .., 0, sub[0]/gamma)ᵀ.
    let alpha = system.sup[n - 1];
    let beta = system.sub[0];
    let gamma = -system.diag[0];
    let mut diag = system.diag.clone();
    diag[0] -= gamma;
    diag[n - 1] -= alpha * beta / gamma;
    let mut sub = system.sub.clone();
    sub[0] = 0.0;
    let mut sup = system.sup.clone();
    sup[n - 1] = 0.0;

    let x = thomas(&sub, &diag, &sup, &system.rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(&sub, &diag, &sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut bet = diag[0];
    x[0] = rhs[0] / bet;
    for i in 1..n {
        c[i] = sup[i - 1] / bet;
        bet = diag[i] - sub[i] * c[i];
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / bet;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i + 1] * next;
    }
    x
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
