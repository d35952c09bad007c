//! Local refinement of rank-r decompositions by damped Gauss-Newton
//! (Levenberg-Marquardt) iterations.
//!
//! Complex unknowns are optimized as real/imaginary coordinate pairs and the
//! complex residual entries are split the same way, so the solver works on an
//! ordinary real least-squares map `R^p -> R^q`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::monomial::{graded_lex, multinomial};
use crate::tensor::{DenseTensor, MultiIndexIter, SymTensor};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOptions {
    pub max_iterations: usize,
    /// Stop when `||J^T r||_inf` falls below this.
    pub gradient_tolerance: f64,
    /// Stop when `||step|| <= tol * (||x|| + tol)`.
    pub step_tolerance: f64,
    /// Stop when `||r||` falls below this.
    pub residual_tolerance: f64,
    /// Initial damping relative to the largest diagonal entry of `J^T J`.
    pub initial_damping: f64,
    /// Objective used for symmetric tensors.
    pub sym_weighting: SymWeighting,
}

/// How the compact entries of a symmetric residual are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymWeighting {
    /// `sqrt(m!/alpha!)` per entry, so the objective is the full-tensor norm.
    #[default]
    Multiplicity,
    /// One unit-weight residual per stored entry (per sorted multi-index).
    Uniform,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_iterations: 200,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-12,
            residual_tolerance: 1e-14,
            initial_damping: 1e-3,
            sym_weighting: SymWeighting::Multiplicity,
        }
    }
}

impl RefineOptions {
    fn validate(&self) -> Result<()> {
        let tols = [self.gradient_tolerance, self.step_tolerance, self.residual_tolerance, self.initial_damping];
        if tols.iter().any(|&t| !(t > 0.0 && t.is_finite())) || self.max_iterations == 0 {
            return Err(Error::InvalidArgument(format!("refinement options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineStatus {
    GradientTolerance,
    StepTolerance,
    ResidualTolerance,
    /// The damping grew without finding a decrease.
    Stalled,
    /// The iteration budget ran out; the best iterate is returned.
    IterationLimit,
}

impl RefineStatus {
    pub fn converged(self) -> bool {
        !matches!(self, RefineStatus::IterationLimit)
    }
}

/// A real least-squares residual map with an analytic Jacobian.
pub trait ResidualMap {
    fn num_params(&self) -> usize;
    fn num_residuals(&self) -> usize;
    fn residuals(&self, x: &[f64], out: &mut [f64]);
    /// Row-major `num_residuals x num_params` Jacobian.
    fn jacobian(&self, x: &[f64], jac: &mut [f64]);
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    /// `||r(x)||_2` at the returned point.
    pub residual: f64,
    pub initial_residual: f64,
    pub iterations: usize,
    pub status: RefineStatus,
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `J^T J` and `J^T r`, skipping zero Jacobian entries.
fn normal_equations(jac: &[f64], r: &[f64], p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; p * p];
    let mut g = vec![0.0; p];
    let mut nz: Vec<(usize, f64)> = Vec::with_capacity(p);
    for (row, &ri) in jac.chunks_exact(p).zip(r) {
        nz.clear();
        nz.extend(row.iter().copied().enumerate().filter(|&(_, v)| v != 0.0));
        for &(i, vi) in &nz {
            g[i] += vi * ri;
            let arow = &mut a[i * p..(i + 1) * p];
            for &(j, vj) in &nz {
                arow[j] += vi * vj;
            }
        }
    }
    (a, g)
}

/// Solves `a x = b` for symmetric positive definite `a` (row-major, `n x n`).
fn cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s.is_nan() || s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    if y.iter().all(|v| v.is_finite()) {
        Some(y)
    } else {
        None
    }
}

/// Levenberg-Marquardt with gain-ratio damping updates.
///
/// Steps are accepted only when they decrease the residual, so the returned
/// residual never exceeds the starting one.
pub fn levenberg_marquardt<M: ResidualMap>(map: &M, x0: &[f64], opts: &RefineOptions) -> Result<LmOutcome> {
    opts.validate()?;
    let p = map.num_params();
    let q = map.num_residuals();
    if x0.len() != p {
        return Err(Error::DimensionMismatch(format!("{} parameters for a map with {p}", x0.len())));
    }
    let mut x = x0.to_vec();
    let mut r = vec![0.0; q];
    map.residuals(&x, &mut r);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("refinement starting point"));
    }
    let mut cost = 0.5 * sq_norm(&r);
    let initial_residual = (2.0 * cost).sqrt();
    let mut jac = vec![0.0; q * p];
    map.jacobian(&x, &mut jac);
    let (mut a, mut g) = normal_equations(&jac, &r, p);
    let max_diag = (0..p).map(|i| a[i * p + i]).fold(0.0, f64::max);
    let mut mu = opts.initial_damping * max_diag.max(f64::MIN_POSITIVE);
    let mut nu = 2.0;
    let mut x_new = vec![0.0; p];
    let mut r_new = vec![0.0; q];
    let mut status = RefineStatus::IterationLimit;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= opts.gradient_tolerance {
            status = RefineStatus::GradientTolerance;
            break;
        }
        if (2.0 * cost).sqrt() <= opts.residual_tolerance {
            status = RefineStatus::ResidualTolerance;
            break;
        }
        iterations += 1;
        let mut damped = a.clone();
        for i in 0..p {
            damped[i * p + i] += mu;
        }
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let Some(h) = cholesky_solve(&damped, p, &neg_g) else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() {
                status = RefineStatus::Stalled;
                break;
            }
            continue;
        };
        let xnorm = sq_norm(&x).sqrt();
        if sq_norm(&h).sqrt() <= opts.step_tolerance * (xnorm + opts.step_tolerance) {
            status = RefineStatus::StepTolerance;
            break;
        }
        for ((xn, xi), hi) in x_new.iter_mut().zip(&x).zip(&h) {
            *xn = xi + hi;
        }
        map.residuals(&x_new, &mut r_new);
        let cost_new = 0.5 * sq_norm(&r_new);
        let predicted: f64 = 0.5 * h.iter().zip(&g).map(|(hi, gi)| hi * (mu * hi - gi)).sum::<f64>();
        let rho = (cost - cost_new) / predicted;
        if cost_new.is_finite() && cost_new < cost && rho > 0.0 {
            core::mem::swap(&mut x, &mut x_new);
            core::mem::swap(&mut r, &mut r_new);
            cost = cost_new;
            map.jacobian(&x, &mut jac);
            (a, g) = normal_equations(&jac, &r, p);
            let t = 2.0 * rho - 1.0;
            mu *= (1.0 / 3.0f64).max(1.0 - t * t * t);
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() || nu > 1e300 {
                status = RefineStatus::Stalled;
                break;
            }
        }
    }
    Ok(LmOutcome { x, residual: (2.0 * cost).sqrt(), initial_residual, iterations, status })
}

fn pack(vectors: &[&[C64]]) -> Vec<f64> {
    vectors.iter().flat_map(|v| v.iter().flat_map(|z| [z.re, z.im])).collect()
}

fn unpack(x: &[f64]) -> Vec<C64> {
    x.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

/// Writes complex derivative `d` of a residual pair into the real Jacobian:
/// the real parameter column gets `(Re d, Im d)`, the imaginary one `(-Im d, Re d)`.
#[inline]
fn put_complex(jac: &mut [f64], p: usize, row: usize, param: usize, d: C64) {
    jac[2 * row * p + 2 * param] = d.re;
    jac[(2 * row + 1) * p + 2 * param] = d.im;
    jac[2 * row * p + 2 * param + 1] = -d.im;
    jac[(2 * row + 1) * p + 2 * param + 1] = d.re;
}

/// Residual map of `sum_i u_i^{⊗m} - F` over compact entries, weighted by
/// `sqrt(m!/alpha!)` for the full-tensor norm or uniformly.
pub struct SymResidual<'a> {
    target: &'a SymTensor,
    rank: usize,
    /// `alpha'` (with the leading exponent `m - |alpha|`) for each stored entry.
    exponents: Vec<Vec<u32>>,
    sqrt_weights: Vec<f64>,
}

impl<'a> SymResidual<'a> {
    pub fn new(target: &'a SymTensor, rank: usize, weighting: SymWeighting) -> Self {
        let m = target.order() as u32;
        let powers = graded_lex(target.nvars(), target.order());
        let exponents = powers
            .iter()
            .map(|a| core::iter::once(m - a.degree()).chain(a.exponents().iter().copied()).collect())
            .collect();
        let sqrt_weights = match weighting {
            SymWeighting::Multiplicity => powers.iter().map(|a| multinomial(m, a.exponents()).sqrt()).collect(),
            SymWeighting::Uniform => vec![1.0; powers.len()],
        };
        SymResidual { target, rank, exponents, sqrt_weights }
    }

    fn power_table(&self, u: &[C64]) -> Vec<Vec<C64>> {
        let m = self.target.order();
        u.iter()
            .map(|&z| {
                let mut row = Vec::with_capacity(m + 1);
                let mut acc = C64::new(1.0, 0.0);
                for _ in 0..=m {
                    row.push(acc);
                    acc *= z;
                }
                row
            })
            .collect()
    }
}

impl ResidualMap for SymResidual<'_> {
    fn num_params(&self) -> usize {
        2 * self.rank * self.target.dim()
    }

    fn num_residuals(&self) -> usize {
        2 * self.exponents.len()
    }

    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        let n = self.target.dim();
        let u = unpack(x);
        let tables: Vec<Vec<Vec<C64>>> = u.chunks_exact(n).map(|ui| self.power_table(ui)).collect();
        for (a, (exps, f)) in self.exponents.iter().zip(self.target.entries()).enumerate() {
            let mut value = C64::new(0.0, 0.0);
            for table in &tables {
                let mut term = C64::new(1.0, 0.0);
                for (k, &e) in exps.iter().enumerate() {
                    term *= table[k][e as usize];
                }
                value += term;
            }
            let d = (value - f) * self.sqrt_weights[a];
            out[2 * a] = d.re;
            out[2 * a + 1] = d.im;
        }
    }

    fn jacobian(&self, x: &[f64], jac: &mut [f64]) {
        let n = self.target.dim();
        let p = self.num_params();
        let u = unpack(x);
        jac.iter_mut().for_each(|v| *v = 0.0);
        let tables: Vec<Vec<Vec<C64>>> = u.chunks_exact(n).map(|ui| self.power_table(ui)).collect();
        for (a, exps) in self.exponents.iter().enumerate() {
            let w = self.sqrt_weights[a];
            for (i, table) in tables.iter().enumerate() {
                for k in 0..n {
                    let e = exps[k];
                    if e == 0 {
                        continue;
                    }
                    let mut d = C64::new(e as f64 * w, 0.0) * table[k][e as usize - 1];
                    for (l, &el) in exps.iter().enumerate() {
                        if l != k {
                            d *= table[l][el as usize];
                        }
                    }
                    put_complex(jac, p, a, i * n + k, d);
                }
            }
        }
    }
}

/// Residual map of `sum_s u^{s,1} ⊗ ... ⊗ u^{s,m} - F` over all entries.
pub struct NsResidual<'a> {
    target: &'a DenseTensor,
    rank: usize,
    /// Offset of mode `j` inside one term's parameter block (complex units).
    mode_offsets: Vec<usize>,
    term_len: usize,
}

impl<'a> NsResidual<'a> {
    pub fn new(target: &'a DenseTensor, rank: usize) -> Self {
        let mut mode_offsets = Vec::with_capacity(target.order());
        let mut acc = 0;
        for &d in target.dims() {
            mode_offsets.push(acc);
            acc += d;
        }
        NsResidual { target, rank, mode_offsets, term_len: acc }
    }
}

impl ResidualMap for NsResidual<'_> {
    fn num_params(&self) -> usize {
        2 * self.rank * self.term_len
    }

    fn num_residuals(&self) -> usize {
        2 * self.target.len()
    }

    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        let u = unpack(x);
        let mut model = DenseTensor::zeros(self.target.dims()).expect("valid dims");
        for term in u.chunks_exact(self.term_len) {
            let factors: Vec<&[C64]> =
                self.target.dims().iter().zip(&self.mode_offsets).map(|(&d, &off)| &term[off..off + d]).collect();
            model.add_outer(C64::new(1.0, 0.0), &factors).expect("matching factors");
        }
        for (e, (xv, fv)) in model.data().iter().zip(self.target.data()).enumerate() {
            let d = xv - fv;
            out[2 * e] = d.re;
            out[2 * e + 1] = d.im;
        }
    }

    fn jacobian(&self, x: &[f64], jac: &mut [f64]) {
        let u = unpack(x);
        let p = self.num_params();
        let m = self.target.order();
        jac.iter_mut().for_each(|v| *v = 0.0);
        let mut prefix = vec![C64::new(1.0, 0.0); m + 1];
        let mut suffix = vec![C64::new(1.0, 0.0); m + 1];
        for (e, idx) in MultiIndexIter::new(self.target.dims()).enumerate() {
            for (s, term) in u.chunks_exact(self.term_len).enumerate() {
                for j in 0..m {
                    prefix[j + 1] = prefix[j] * term[self.mode_offsets[j] + idx[j]];
                }
                for j in (0..m).rev() {
                    suffix[j] = suffix[j + 1] * term[self.mode_offsets[j] + idx[j]];
                }
                for j in 0..m {
                    let d = prefix[j] * suffix[j + 1];
                    put_complex(jac, p, e, s * self.term_len + self.mode_offsets[j] + idx[j], d);
                }
            }
        }
    }
}

/// Result of refining a symmetric decomposition.
#[derive(Debug, Clone)]
pub struct SymRefinement {
    pub vectors: Vec<Vec<C64>>,
    pub residual: f64,
    pub initial_residual: f64,
    pub iterations: usize,
    pub status: RefineStatus,
}

/// Locally minimizes `||sum_i u_i^{⊗m} - F||` from the given vectors.
pub fn refine_sym(target: &SymTensor, start: &[Vec<C64>], opts: &RefineOptions) -> Result<SymRefinement> {
    let n = target.dim();
    if start.is_empty() || start.iter().any(|u| u.len() != n) {
        return Err(Error::DimensionMismatch(format!("starting vectors must be {n}-dimensional")));
    }
    let map = SymResidual::new(target, start.len(), opts.sym_weighting);
    let refs: Vec<&[C64]> = start.iter().map(|v| v.as_slice()).collect();
    let out = levenberg_marquardt(&map, &pack(&refs), opts)?;
    let flat = unpack(&out.x);
    Ok(SymRefinement {
        vectors: flat.chunks_exact(n).map(|c| c.to_vec()).collect(),
        residual: out.residual,
        initial_residual: out.initial_residual,
        iterations: out.iterations,
        status: out.status,
    })
}

/// Result of refining a nonsymmetric decomposition.
#[derive(Debug, Clone)]
pub struct NsRefinement {
    /// `tuples[s][j]` is the mode-`j` vector of term `s`.
    pub tuples: Vec<Vec<Vec<C64>>>,
    pub residual: f64,
    pub initial_residual: f64,
    pub iterations: usize,
    pub status: RefineStatus,
}

/// Locally minimizes `||sum_s u^{s,1} ⊗ ... ⊗ u^{s,m} - F||` from the given tuples.
pub fn refine_nonsym(target: &DenseTensor, start: &[Vec<Vec<C64>>], opts: &RefineOptions) -> Result<NsRefinement> {
    let dims = target.dims();
    if start.is_empty() || start.iter().any(|t| t.len() != dims.len() || t.iter().zip(dims).any(|(v, &d)| v.len() != d))
    {
        return Err(Error::DimensionMismatch(format!("starting tuples must match dims {dims:?}")));
    }
    let map = NsResidual::new(target, start.len());
    let refs: Vec<&[C64]> = start.iter().flat_map(|t| t.iter().map(|v| v.as_slice())).collect();
    let out = levenberg_marquardt(&map, &pack(&refs), opts)?;
    let flat = unpack(&out.x);
    let tuples = flat
        .chunks_exact(map.term_len)
        .map(|term| dims.iter().zip(&map.mode_offsets).map(|(&d, &off)| term[off..off + d].to_vec()).collect())
        .collect();
    Ok(NsRefinement {
        tuples,
        residual: out.residual,
        initial_residual: out.initial_residual,
        iterations: out.iterations,
        status: out.status,
    })
}
