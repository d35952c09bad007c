//! Symmetric rank-r approximation through generating matrices.
//!
//! Given `F` in `S^m(C^n)` the driver fits a generating matrix `G` column by
//! column, reads the points `v_i = (1, v_i1, ..., v_in̄)` off the companion
//! matrices `M_{x_k}(G)`, fits coefficients `lambda_i` against `F` and
//! optionally refines `u_i = lambda_i^{1/m} v_i` with Levenberg-Marquardt.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::extract::{joint_values, ExtractionDiagnostics};
use crate::linalg::{lstsq_min_norm, ComplexMatrix, PseudoInverse};
use crate::monomial::{count_up_to, first_monomials, graded_lex, multinomial, PowerVector};
use crate::options::{ApproxOptions, CoordinateChange};
use crate::random::{generic_weights, random_unitary, rng_from_seed};
use crate::refine::{refine_sym, RefineStatus};
use crate::tensor::{power_monomial, SymTensor};
use crate::C64;

/// Seed offset separating the coordinate-change draw from the Schur weights.
const COORDINATE_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

/// The monomial sets indexing a symmetric generating matrix: `b0` holds the
/// first `r` monomials and `b1` their one-step multiples outside `b0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasisPair {
    pub b0: Vec<PowerVector>,
    pub b1: Vec<PowerVector>,
}

impl MonomialBasisPair {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n < 2 || r == 0 {
            return Err(Error::InvalidArgument(format!("bases need n >= 2 and r >= 1, got n = {n}, r = {r}")));
        }
        let nvars = n - 1;
        let b0 = first_monomials(nvars, r);
        let mut b1: Vec<PowerVector> = b0
            .iter()
            .flat_map(|b| (0..nvars).map(move |k| b.times_var(k)))
            .filter(|p| p.graded_lex_rank() >= r)
            .collect();
        b1.sort();
        b1.dedup();
        Ok(MonomialBasisPair { b0, b1 })
    }

    pub fn nvars(&self) -> usize {
        self.b0[0].nvars()
    }

    /// Largest degree in `b0`.
    pub fn degree(&self) -> u32 {
        self.b0.last().map_or(0, |b| b.degree())
    }

    /// Position of `alpha` in `b0`, if present.
    pub fn b0_position(&self, alpha: &PowerVector) -> Option<usize> {
        let pos = alpha.graded_lex_rank();
        (pos < self.b0.len()).then_some(pos)
    }

    pub fn b1_position(&self, alpha: &PowerVector) -> Option<usize> {
        self.b1.binary_search(alpha).ok()
    }
}

/// `build_bases(n, r)`.
pub fn build_bases(n: usize, r: usize) -> Result<MonomialBasisPair> {
    MonomialBasisPair::new(n, r)
}

/// Generating matrix with rows indexed by `b0` and columns by `b1`.
#[derive(Debug, Clone)]
pub struct SymGenMatrix {
    pub g: ComplexMatrix,
    pub bases: MonomialBasisPair,
}

fn check_feasible(n: usize, m: usize, r: usize) -> Result<MonomialBasisPair> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("order {m} < 2")));
    }
    let bases = MonomialBasisPair::new(n, r)?;
    let nvars = n - 1;
    if r > count_up_to(nvars, m) {
        return Err(Error::RankTooLarge(format!(
            "r = {r} exceeds the {} monomials of degree <= {m}",
            count_up_to(nvars, m)
        )));
    }
    if bases.degree() as usize + 1 > m {
        let alpha = bases.b1.last().expect("nonempty b1");
        return Err(Error::RankTooLarge(format!(
            "r = {r} puts {alpha:?} of degree {} > m = {m} into b1",
            alpha.degree()
        )));
    }
    for alpha in &bases.b1 {
        let rows = count_up_to(nvars, m - alpha.degree() as usize);
        if rows < r {
            return Err(Error::RankTooLarge(format!("system for {alpha:?} has {rows} rows < r = {r}")));
        }
    }
    Ok(bases)
}

/// Design matrix shared by every column of degree `deg`: rows `gamma` of
/// degree at most `m - deg`, columns `beta` in `b0`, entries `F_{beta+gamma}`.
fn design_matrix(f: &SymTensor, deg: usize, b0: &[PowerVector]) -> Result<ComplexMatrix> {
    let gammas = graded_lex(f.nvars(), f.order() - deg);
    let mut a = ComplexMatrix::zeros(gammas.len(), b0.len());
    for (i, gamma) in gammas.iter().enumerate() {
        for (j, beta) in b0.iter().enumerate() {
            a[(i, j)] = f.get_sum(beta, gamma)?;
        }
    }
    Ok(a)
}

fn rhs(f: &SymTensor, alpha: &PowerVector) -> Result<Vec<C64>> {
    graded_lex(f.nvars(), f.order() - alpha.degree() as usize).iter().map(|gamma| f.get_sum(alpha, gamma)).collect()
}

/// The linear system `A[F, alpha] g = b[F, alpha]` for one column of `G`.
pub fn assemble_system(f: &SymTensor, alpha: &PowerVector, b0: &[PowerVector]) -> Result<(ComplexMatrix, Vec<C64>)> {
    let m = f.order();
    if alpha.nvars() != f.nvars() || alpha.degree() as usize > m {
        return Err(Error::IndexOutOfRange(format!("column {alpha:?} for n = {}, m = {m}", f.dim())));
    }
    if let Some(beta) = b0.iter().find(|b| b.nvars() != f.nvars() || b.degree() > alpha.degree()) {
        return Err(Error::IndexOutOfRange(format!("row monomial {beta:?} against column {alpha:?}")));
    }
    Ok((design_matrix(f, alpha.degree() as usize, b0)?, rhs(f, alpha)?))
}

/// Least-squares generating matrix; columns sharing a degree share one
/// factorization.
pub fn solve_generating_matrix(f: &SymTensor, r: usize, rcond: f64) -> Result<SymGenMatrix> {
    let bases = check_feasible(f.dim(), f.order(), r)?;
    let mut g = ComplexMatrix::zeros(r, bases.b1.len());
    let mut current: Option<(u32, PseudoInverse)> = None;
    for (col, alpha) in bases.b1.iter().enumerate() {
        let deg = alpha.degree();
        if current.as_ref().is_none_or(|(d, _)| *d != deg) {
            let a = design_matrix(f, deg as usize, &bases.b0)?;
            current = Some((deg, PseudoInverse::new(&a, rcond)?));
        }
        let (_, pinv) = current.as_ref().expect("factored above");
        let x = pinv.solve(&rhs(f, alpha)?)?;
        for (row, v) in x.into_iter().enumerate() {
            g[(row, col)] = v;
        }
    }
    Ok(SymGenMatrix { g, bases })
}

/// Multiplication matrix by the variable `x_var` (1-based) modulo `G`.
pub fn companion_matrix(gm: &SymGenMatrix, var: usize) -> Result<ComplexMatrix> {
    let bases = &gm.bases;
    if var == 0 || var > bases.nvars() {
        return Err(Error::IndexOutOfRange(format!("variable x{var} of {}", bases.nvars())));
    }
    let r = bases.b0.len();
    let mut mat = ComplexMatrix::zeros(r, r);
    for (col, nu) in bases.b0.iter().enumerate() {
        let shifted = nu.times_var(var - 1);
        if let Some(row) = bases.b0_position(&shifted) {
            mat[(row, col)] = C64::new(1.0, 0.0);
        } else {
            let g_col = bases.b1_position(&shifted).expect("b1 contains every shift leaving b0");
            for row in 0..r {
                mat[(row, col)] = gm.g[(row, g_col)];
            }
        }
    }
    Ok(mat)
}

/// Points `(1, q^* M_{x_1} q, ..., q^* M_{x_n̄} q)` for each Schur vector `q`
/// of `sum_k xi_k M_{x_k}(G)`.
pub fn extract_points(gm: &SymGenMatrix, xi: &[f64]) -> Result<(Vec<Vec<C64>>, ExtractionDiagnostics)> {
    let nvars = gm.bases.nvars();
    if xi.len() != nvars {
        return Err(Error::DimensionMismatch(format!("{} weights for {nvars} variables", xi.len())));
    }
    let sum: f64 = xi.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("weights sum to {sum}, expected 1")));
    }
    let family = (1..=nvars).map(|k| companion_matrix(gm, k)).collect::<Result<Vec<_>>>()?;
    let (values, diagnostics) = joint_values(&family, xi)?;
    let points = values.into_iter().map(|vals| core::iter::once(C64::new(1.0, 0.0)).chain(vals).collect()).collect();
    Ok((points, diagnostics))
}

/// Coefficients minimizing `||sum_i lambda_i v_i^{⊗m} - F||` in the
/// full-tensor norm.
pub fn solve_coefficients(f: &SymTensor, points: &[Vec<C64>], rcond: f64) -> Result<Vec<C64>> {
    let n = f.dim();
    let m = f.order();
    if points.is_empty() || points.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!("points must be nonempty {n}-vectors")));
    }
    let powers = f.powers();
    let mut a = ComplexMatrix::zeros(powers.len(), points.len());
    let mut b = Vec::with_capacity(powers.len());
    for (row, (alpha, fa)) in powers.iter().zip(f.entries()).enumerate() {
        let w = multinomial(m as u32, alpha.exponents()).sqrt();
        for (col, v) in points.iter().enumerate() {
            a[(row, col)] = power_monomial(v, alpha, m) * w;
        }
        b.push(fa * w);
    }
    lstsq_min_norm(&a, &b, rcond)
}

/// Closed-form rank-1 approximation `lambda v^{⊗m}` with `v_0 = 1`.
pub fn rank1_closed_form(f: &SymTensor) -> Result<(C64, Vec<C64>)> {
    let m = f.order();
    if m < 2 || f.dim() < 2 {
        return Err(Error::InvalidArgument(format!(
            "closed form needs m >= 2 and n >= 2, got n = {}, m = {m}",
            f.dim()
        )));
    }
    let gammas = graded_lex(f.nvars(), m - 1);
    let a: Vec<C64> = gammas.iter().map(|g| f.get(g)).collect::<Result<_>>()?;
    let aa: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if aa == 0.0 {
        return Err(Error::DegenerateSlice(String::from("entries of degree < m all vanish")));
    }
    let mut v = vec![C64::new(1.0, 0.0)];
    for k in 0..f.nvars() {
        let ab: C64 =
            gammas.iter().zip(&a).map(|(g, ai)| Ok(ai.conj() * f.get(&g.times_var(k))?)).sum::<Result<C64>>()?;
        v.push(ab / aa);
    }
    let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let proj: C64 = f
        .powers()
        .iter()
        .zip(f.entries())
        .map(|(alpha, fa)| power_monomial(&v, alpha, m).conj() * fa * multinomial(m as u32, alpha.exponents()))
        .sum();
    Ok((proj / vv.powi(m as i32), v))
}

/// Refined decomposition produced by the optional last stage.
#[derive(Debug, Clone)]
pub struct SymRefined {
    pub vectors: Vec<Vec<C64>>,
    pub x_opt: SymTensor,
    pub residual_opt: f64,
    pub iterations: usize,
    pub status: RefineStatus,
}

#[derive(Debug, Clone)]
pub struct SymApproxResult {
    /// Recovered points; the leading coordinate is 1 unless a change of
    /// coordinates was applied.
    pub points: Vec<Vec<C64>>,
    pub coefficients: Vec<C64>,
    /// `lambda_i^{1/m} v_i` on the principal branch.
    pub vectors: Vec<Vec<C64>>,
    pub x_gp: SymTensor,
    pub residual_gp: f64,
    pub refined: Option<SymRefined>,
    pub diagnostics: ExtractionDiagnostics,
    /// Seed of the Schur weights (and of the coordinate change, if any).
    pub seed: u64,
    pub coordinates_changed: bool,
}

impl SymApproxResult {
    /// Residual of the best available decomposition.
    pub fn residual(&self) -> f64 {
        self.refined.as_ref().map_or(self.residual_gp, |r| r.residual_opt)
    }

    /// Vectors `u_i` of the best available decomposition `sum_i u_i^{⊗m}`.
    pub fn best_vectors(&self) -> &[Vec<C64>] {
        self.refined.as_ref().map_or(&self.vectors, |r| &r.vectors)
    }

    pub fn best_tensor(&self) -> &SymTensor {
        self.refined.as_ref().map_or(&self.x_gp, |r| &r.x_opt)
    }
}

/// Applies `v -> P v` to every mode: `F' = F ×_1 P ... ×_m P`.
fn transform_sym(f: &SymTensor, p: &ComplexMatrix) -> Result<SymTensor> {
    let mut dense = f.to_dense();
    for mode in 0..f.order() {
        dense = dense.mode_multiply(mode, p)?;
    }
    SymTensor::from_dense(&dense)
}

struct Stage {
    points: Vec<Vec<C64>>,
    coefficients: Vec<C64>,
    diagnostics: ExtractionDiagnostics,
}

fn generating_stage(f: &SymTensor, r: usize, opts: &ApproxOptions) -> Result<Stage> {
    let gm = solve_generating_matrix(f, r, opts.rcond)?;
    let xi = generic_weights(&mut rng_from_seed(opts.seed), f.nvars());
    let (points, diagnostics) = extract_points(&gm, &xi)?;
    let coefficients = solve_coefficients(f, &points, opts.rcond)?;
    if coefficients.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("coefficients"));
    }
    Ok(Stage { points, coefficients, diagnostics })
}

fn changed_stage(f: &SymTensor, r: usize, opts: &ApproxOptions) -> Result<Stage> {
    let p = random_unitary(&mut rng_from_seed(opts.seed ^ COORDINATE_SEED_OFFSET), f.dim());
    let stage = generating_stage(&transform_sym(f, &p)?, r, opts)?;
    let ph = p.adjoint();
    let points = stage.points.iter().map(|v| ph.matvec(v)).collect::<Result<Vec<_>>>()?;
    Ok(Stage { points, ..stage })
}

/// Rank-r approximation of a symmetric tensor.
pub fn approx_sym(f: &SymTensor, r: usize, opts: &ApproxOptions) -> Result<SymApproxResult> {
    check_feasible(f.dim(), f.order(), r)?;
    let m = f.order();
    let (stage, coordinates_changed) = match opts.coordinate_change {
        CoordinateChange::Never => (generating_stage(f, r, opts)?, false),
        CoordinateChange::Always => (changed_stage(f, r, opts)?, true),
        CoordinateChange::OnFailure => match generating_stage(f, r, opts) {
            Ok(s) => (s, false),
            Err(e) if e.is_precondition() => return Err(e),
            Err(_) => (changed_stage(f, r, opts)?, true),
        },
    };
    let Stage { points, coefficients, diagnostics } = stage;
    let mut x_gp = SymTensor::zeros(f.dim(), m)?;
    for (lambda, v) in coefficients.iter().zip(&points) {
        x_gp.add_power(*lambda, v)?;
    }
    let residual_gp = f.distance(&x_gp)?;
    let root = 1.0 / m as f64;
    let vectors: Vec<Vec<C64>> = coefficients
        .iter()
        .zip(&points)
        .map(|(lambda, v)| {
            let s = if lambda.is_zero() { C64::zero() } else { lambda.powf(root) };
            v.iter().map(|z| z * s).collect()
        })
        .collect();

    let refined = match &opts.refine {
        Some(ropts) if residual_gp > opts.skip_refine_below * f.norm() => {
            let out = refine_sym(f, &vectors, ropts)?;
            let mut x_opt = SymTensor::zeros(f.dim(), m)?;
            for u in &out.vectors {
                x_opt.add_power(C64::new(1.0, 0.0), u)?;
            }
            let residual_opt = f.distance(&x_opt)?;
            Some(SymRefined {
                vectors: out.vectors,
                x_opt,
                residual_opt,
                iterations: out.iterations,
                status: out.status,
            })
        }
        _ => None,
    };

    Ok(SymApproxResult {
        points,
        coefficients,
        vectors,
        x_gp,
        residual_gp,
        refined,
        diagnostics,
        seed: opts.seed,
        coordinates_changed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::sym_power;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pv(e: &[u32]) -> PowerVector {
        PowerVector::new(e.to_vec())
    }

    #[test]
    fn bases_for_three_variables() {
        let b = build_bases(3, 3).unwrap();
        assert_eq!(b.b0, vec![pv(&[0, 0]), pv(&[1, 0]), pv(&[0, 1])]);
        assert_eq!(b.b1, vec![pv(&[2, 0]), pv(&[1, 1]), pv(&[0, 2])]);
        let b = build_bases(2, 1).unwrap();
        assert_eq!((b.b0, b.b1), (vec![pv(&[0])], vec![pv(&[1])]));
    }

    #[test]
    fn partial_degree_layer_keeps_rest_of_layer_in_b1() {
        let b = build_bases(4, 2).unwrap();
        assert_eq!(b.b0, vec![pv(&[0, 0, 0]), pv(&[1, 0, 0])]);
        assert_eq!(b.b1, vec![pv(&[0, 1, 0]), pv(&[0, 0, 1]), pv(&[2, 0, 0]), pv(&[1, 1, 0]), pv(&[1, 0, 1])]);
    }

    #[test]
    fn rank_one_system_is_consistent() {
        let cc = c(0.5, -2.0);
        let f = sym_power(&[c(1.0, 0.0), cc], 3).unwrap();
        let (a, b) = assemble_system(&f, &pv(&[1]), &[pv(&[0])]).unwrap();
        assert_eq!((a.rows(), a.cols()), (3, 1));
        for i in 0..3 {
            assert!((b[i] - cc * a[(i, 0)]).norm() < 1e-14);
        }
        let g = solve_generating_matrix(&f, 1, 1e-12).unwrap();
        assert!((g.g[(0, 0)] - cc).norm() < 1e-13);
    }

    #[test]
    fn system_shape() {
        let f = SymTensor::from_fn(3, 3, |a| c(a.graded_lex_rank() as f64, 1.0)).unwrap();
        let b = build_bases(3, 3).unwrap();
        let (a, rhs) = assemble_system(&f, &pv(&[2, 0]), &b.b0).unwrap();
        assert_eq!((a.rows(), a.cols(), rhs.len()), (3, 3, 3));
    }

    #[test]
    fn companion_shift_columns() {
        let f = SymTensor::from_fn(3, 3, |a| c(1.0 + a.graded_lex_rank() as f64, 0.0)).unwrap();
        let gm = solve_generating_matrix(&f, 3, 1e-12).unwrap();
        let m1 = companion_matrix(&gm, 1).unwrap();
        // x1 * 1 = x1 is the second element of b0.
        assert_eq!(m1.column(0), vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        // x1 * x1 lies in b1 and copies the first column of G.
        assert_eq!(m1.column(1), gm.g.column(0));
    }

    #[test]
    fn zero_tensor_gives_zero_generating_matrix() {
        let f = SymTensor::zeros(4, 3).unwrap();
        let gm = solve_generating_matrix(&f, 2, 1e-12).unwrap();
        assert!(gm.g.data().iter().all(|z| z.is_zero()));
    }

    #[test]
    fn scalar_extraction() {
        let f = sym_power(&[c(1.0, 0.0), c(2.0, 0.0)], 3).unwrap().scale(c(3.0, 0.0));
        let gm = solve_generating_matrix(&f, 1, 1e-12).unwrap();
        let (pts, _) = extract_points(&gm, &[1.0]).unwrap();
        assert!((pts[0][1] - c(2.0, 0.0)).norm() < 1e-13);
        let lambda = solve_coefficients(&f, &pts, 1e-12).unwrap();
        assert!((lambda[0] - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn closed_form_rank_one() {
        let v = vec![c(1.0, 0.0), c(1.0, 1.0)];
        let f = sym_power(&v, 3).unwrap().scale(c(2.0, 0.0));
        let (lambda, w) = rank1_closed_form(&f).unwrap();
        assert!((lambda - c(2.0, 0.0)).norm() < 1e-12);
        assert!((w[1] - v[1]).norm() < 1e-12);
    }

    #[test]
    fn closed_form_degenerate_slice() {
        let f = sym_power(&[c(0.0, 0.0), c(1.0, 0.0)], 3).unwrap();
        assert!(matches!(rank1_closed_form(&f), Err(Error::DegenerateSlice(_))));
    }

    #[test]
    fn rejects_rank_past_degree_bound() {
        // n = 3, m = 2: r = 3 needs degree-2 columns paired with nothing.
        let f = SymTensor::zeros(3, 2).unwrap();
        assert!(matches!(approx_sym(&f, 3, &ApproxOptions::default()), Err(Error::RankTooLarge(_))));
        // n = 2, m = 3: r = 2 leaves 2 rows for the degree-2 column.
        let f = SymTensor::zeros(2, 3).unwrap();
        assert!(approx_sym(&f, 2, &ApproxOptions::default()).is_ok());
        let f = SymTensor::zeros(2, 3).unwrap();
        assert!(matches!(approx_sym(&f, 3, &ApproxOptions::default()), Err(Error::RankTooLarge(_))));
    }

    #[test]
    fn vanishing_leading_coordinate_recovers_with_coordinate_change() {
        let u1 = vec![c(0.0, 0.0), c(1.0, 0.5), c(-0.3, 1.0)];
        let u2 = vec![c(1.0, 0.0), c(0.2, -0.7), c(0.9, 0.1)];
        let mut f = sym_power(&u1, 3).unwrap();
        f.add_power(c(1.0, 0.0), &u2).unwrap();
        let opts = ApproxOptions { coordinate_change: CoordinateChange::Always, ..ApproxOptions::without_refine() };
        let out = approx_sym(&f, 2, &opts).unwrap();
        assert!(out.coordinates_changed);
        assert!(out.residual_gp < 1e-10 * f.norm(), "{}", out.residual_gp);
    }
}
