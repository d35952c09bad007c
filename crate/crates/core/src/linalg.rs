//! Dense complex matrix kernels: SVD, minimum-norm least squares and the
//! complex Schur decomposition.
//!
//! The SVD is a one-sided (Hestenes) Jacobi iteration, which gives small
//! singular values to high relative accuracy. The Schur form comes from a
//! Householder reduction to Hessenberg form followed by single-shift QR
//! sweeps with Wilkinson shifts. Both are deterministic for fixed input.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Default relative cutoff for singular values in least squares.
pub const DEFAULT_RCOND: f64 = 1e-12;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("column lengths differ".into()));
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix difference".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: C64, other: &ComplexMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix axpy".into()));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    /// `q^* self q`.
    pub fn rayleigh(&self, q: &[C64]) -> C64 {
        let mq = self.matvec(q).expect("square matrix and matching vector");
        q.iter().zip(&mq).map(|(a, b)| a.conj() * b).sum()
    }

    /// Frobenius norm of the strictly lower triangle.
    pub fn strict_lower_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..i.min(self.cols) {
                acc += self[(i, j)].norm_sqr();
            }
        }
        acc.sqrt()
    }

    fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Thin singular value decomposition `A = U diag(s) V^*`.
///
/// `U` is `rows x k`, `V` is `cols x k` with `k = min(rows, cols)`; both have
/// orthonormal columns and `s` is nonincreasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    /// `U diag(s) V^*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let us = ComplexMatrix::from_fn(self.u.rows, self.u.cols, |i, j| self.u[(i, j)] * self.s[j]);
        us.matmul(&self.v.adjoint()).expect("conforming factors")
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// Singular value decomposition of a nonempty matrix.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::InvalidShape("SVD of an empty matrix".into()));
    }
    if !a.all_finite() {
        return Err(Error::NonFinite("SVD input"));
    }
    if a.rows >= a.cols {
        jacobi_svd_tall(a)
    } else {
        let t = jacobi_svd_tall(&a.adjoint())?;
        Ok(Svd { u: t.v, s: t.s, v: t.u })
    }
}

/// One-sided Jacobi on the columns of a matrix with `rows >= cols`.
fn jacobi_svd_tall(a: &ComplexMatrix) -> Result<Svd> {
    let (m, n) = (a.rows, a.cols);
    // column-major working copies
    let mut w: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            e
        })
        .collect();
    let tol = f64::EPSILON * (m as f64).sqrt();
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = norm_sqr(&w[p]);
                let beta = norm_sqr(&w[q]);
                let gamma = dot_conj(&w[p], &w[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let sp = phase.conj() * s;
                let sq = phase * s;
                rotate_pair(&mut w, p, q, c, sp, sq);
                rotate_pair(&mut v, p, q, c, sp, sq);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence("Jacobi SVD"));
    }
    let mut s: Vec<f64> = w.iter().map(|col| norm_sqr(col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let smax = s[order[0]];
    let mut u_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut v_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut s_sorted = Vec::with_capacity(n);
    let mut null_slots = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let sj = s[j];
        if sj > smax * f64::EPSILON * 1e-3 && sj > f64::MIN_POSITIVE {
            u_cols.push(w[j].iter().map(|z| z / sj).collect());
        } else {
            u_cols.push(vec![ZERO; m]);
            null_slots.push(slot);
        }
        v_cols.push(v[j].clone());
        s_sorted.push(sj);
    }
    complete_orthonormal(&mut u_cols, &null_slots, m);
    s.clear();
    Ok(Svd { u: ComplexMatrix::from_columns(m, &u_cols)?, s: s_sorted, v: ComplexMatrix::from_columns(n, &v_cols)? })
}

/// `(x_p, x_q) <- (c x_p - sp x_q, sq x_p + c x_q)`.
fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, sp: C64, sq: C64) {
    let (left, right) = cols.split_at_mut(q);
    let (xp, xq) = (&mut left[p], &mut right[0]);
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let (ap, bq) = (*a, *b);
        *a = ap * c - sp * bq;
        *b = sq * ap + bq * c;
    }
}

/// Fills the listed (zero) columns with unit vectors orthogonal to all others.
fn complete_orthonormal(cols: &mut [Vec<C64>], slots: &[usize], m: usize) {
    let mut candidate = 0;
    for &slot in slots {
        while candidate < m {
            let mut x = vec![ZERO; m];
            x[candidate] = ONE;
            candidate += 1;
            for _ in 0..2 {
                for (k, col) in cols.iter().enumerate() {
                    if k == slot {
                        continue;
                    }
                    let proj = dot_conj(col, &x);
                    for (xi, ci) in x.iter_mut().zip(col) {
                        *xi -= proj * ci;
                    }
                }
            }
            let nrm = norm_sqr(&x).sqrt();
            if nrm > 1e-8 {
                cols[slot] = x.iter().map(|z| z / nrm).collect();
                break;
            }
        }
    }
}

/// Pseudoinverse solver: factor once, solve many right-hand sides.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    svd: Svd,
    rank: usize,
    rows: usize,
}

impl PseudoInverse {
    /// Singular values below `rcond * sigma_max` are treated as zero.
    pub fn new(a: &ComplexMatrix, rcond: f64) -> Result<Self> {
        if !(rcond > 0.0 && rcond < 1.0) {
            return Err(Error::InvalidArgument(format!("rcond = {rcond} outside (0, 1)")));
        }
        let svd = svd(a)?;
        let cutoff = rcond * svd.s[0];
        let rank = svd.s.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
        Ok(PseudoInverse { svd, rank, rows: a.rows })
    }

    /// Numerical rank at the chosen cutoff.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.svd.s
    }

    /// Minimum-norm least-squares solution of `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let u = &self.svd.u;
        let v = &self.svd.v;
        let mut x = vec![ZERO; v.rows()];
        for k in 0..self.rank {
            let mut coef = ZERO;
            for (i, bi) in b.iter().enumerate() {
                coef += u[(i, k)].conj() * bi;
            }
            coef /= self.svd.s[k];
            for (j, xj) in x.iter_mut().enumerate() {
                *xj += v[(j, k)] * coef;
            }
        }
        Ok(x)
    }
}

/// `x = A^+ b` with singular values below `rcond * sigma_max` discarded.
pub fn lstsq_min_norm(a: &ComplexMatrix, b: &[C64], rcond: f64) -> Result<Vec<C64>> {
    if a.rows != b.len() {
        return Err(Error::DimensionMismatch(format!("{} rows vs right-hand side of length {}", a.rows, b.len())));
    }
    PseudoInverse::new(a, rcond)?.solve(b)
}

/// Unitary `q` and upper-triangular `t` with `M = Q T Q^*`.
#[derive(Debug, Clone)]
pub struct SchurPair {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
}

impl SchurPair {
    /// Diagonal of `T`, i.e. the eigenvalues in factorization order.
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.rows).map(|i| self.t[(i, i)]).collect()
    }

    /// The `i`-th Schur vector.
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.q.column(i)
    }
}

/// Complex Schur decomposition of a square matrix.
pub fn schur(m: &ComplexMatrix) -> Result<SchurPair> {
    if !m.is_square() || m.rows == 0 {
        return Err(Error::InvalidShape(format!("Schur of a {}x{} matrix", m.rows, m.cols)));
    }
    if !m.all_finite() {
        return Err(Error::NonFinite("Schur input"));
    }
    let n = m.rows;
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);
    hessenberg(&mut h, &mut q);
    hessenberg_qr(&mut h, &mut q)?;
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(SchurPair { q, t: h })
}

/// Householder reduction to upper Hessenberg form, accumulating into `q`.
fn hessenberg(h: &mut ComplexMatrix, q: &mut ComplexMatrix) {
    let n = h.rows;
    for k in 0..n.saturating_sub(2) {
        let mut x: Vec<C64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let alpha = norm_sqr(&x).sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        // v = x + phase*alpha*e1, reflector P = I - 2 v v^*/(v^* v)
        x[0] += phase * alpha;
        let vnorm2 = norm_sqr(&x);
        if vnorm2 == 0.0 {
            continue;
        }
        let scale = 2.0 / vnorm2;
        // H <- P H
        for j in 0..n {
            let mut s = ZERO;
            for (t, vi) in x.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + t, j)];
            }
            s *= scale;
            for (t, vi) in x.iter().enumerate() {
                h[(k + 1 + t, j)] -= vi * s;
            }
        }
        // H <- H P, Q <- Q P
        for mat in [&mut *h, &mut *q] {
            for i in 0..n {
                let mut s = ZERO;
                for (t, vi) in x.iter().enumerate() {
                    s += mat[(i, k + 1 + t)] * vi;
                }
                s *= scale;
                for (t, vi) in x.iter().enumerate() {
                    mat[(i, k + 1 + t)] -= s * vi.conj();
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
}

/// Rotation `[c, s; -conj(s), c]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

/// Shifted QR iteration on a Hessenberg matrix until it is triangular.
fn hessenberg_qr(h: &mut ComplexMatrix, q: &mut ComplexMatrix) -> Result<()> {
    let n = h.rows;
    if n == 1 {
        return Ok(());
    }
    let max_iter = 100 * n;
    let mut total = 0;
    let mut hi = n - 1;
    let mut since_deflation = 0;
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(n);
    while hi > 0 {
        // locate the active block [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].l1_norm();
            let mut diag = h[(lo, lo)].l1_norm() + h[(lo - 1, lo - 1)].l1_norm();
            if diag == 0.0 {
                diag = h.frobenius_norm();
            }
            if sub <= f64::EPSILON * diag {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_iter {
            return Err(Error::NonConvergence("Schur QR iteration"));
        }
        let shift = if since_deflation % 11 == 0 {
            // exceptional shift
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        rots.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rots.push((c, s));
            for j in k..n {
                let (a, b) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            h[(k + 1, k)] = ZERO;
        }
        for (off, &(c, s)) in rots.iter().enumerate() {
            let k = lo + off;
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let (a, b) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let (a, b) = (q[(i, k)], q[(i, k + 1)]);
                q[(i, k)] = a * c + b * s.conj();
                q[(i, k + 1)] = -a * s + b * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}
