//! Nonsymmetric rank-r approximation through generating matrices.
//!
//! Modes are reordered so the first one is the largest. Modes 2..m of every
//! term are read off the matrices `M^{j,k}` built from a least-squares
//! generating matrix; the first mode then follows from one linear least
//! squares problem per slice `F(i, :, ..., :)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::extract::{joint_values, ExtractionDiagnostics};
use crate::linalg::{ComplexMatrix, PseudoInverse};
use crate::options::{ApproxOptions, CoordinateChange};
use crate::random::{generic_weights, random_unitary, rng_from_seed};
use crate::refine::{refine_nonsym, RefineStatus};
use crate::tensor::{DenseTensor, MultiIndexIter};
use crate::C64;

const COORDINATE_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

/// One rank-1 term `v^1 ⊗ ... ⊗ v^m`, one vector per mode.
pub type Tuple = Vec<Vec<C64>>;

/// Moves the first largest mode to the front, keeping the others in order.
///
/// Returns the permuted tensor and `perm` with `perm[new] = old`.
pub fn mode_permute(f: &DenseTensor) -> Result<(DenseTensor, Vec<usize>)> {
    let dims = f.dims();
    let lead = (0..dims.len()).fold(0, |best, t| if dims[t] > dims[best] { t } else { best });
    let perm: Vec<usize> = core::iter::once(lead).chain((0..dims.len()).filter(|&t| t != lead)).collect();
    Ok((f.permute_modes(&perm)?, perm))
}

/// The index set of generating-matrix columns: triples `(i, j, k)` with
/// `i < r`, `j` a mode other than the first (0-based) and `1 <= k < n_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSetJ {
    rank: usize,
    dims: Vec<usize>,
    /// Column of `(0, j, 1)` for each mode `j >= 1`; entry 0 unused.
    offsets: Vec<usize>,
    len: usize,
}

impl IndexSetJ {
    pub fn new(dims: &[usize], rank: usize) -> Self {
        let mut offsets = vec![0; dims.len()];
        let mut acc = 0;
        for j in 1..dims.len() {
            offsets[j] = acc;
            acc += rank * (dims[j] - 1);
        }
        IndexSetJ { rank, dims: dims.to_vec(), offsets, len: acc }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Column of `(i, j, k)`: `j` outer, `k` middle, `i` inner.
    pub fn column(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.rank && j >= 1 && (1..self.dims[j]).contains(&k));
        self.offsets[j] + (k - 1) * self.rank + i
    }

    /// All triples in column order.
    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.len);
        for j in 1..self.dims.len() {
            for k in 1..self.dims[j] {
                for i in 0..self.rank {
                    out.push((i, j, k));
                }
            }
        }
        out
    }

    /// `(j, k)` pairs in the order used for the Schur weights.
    pub fn mode_pairs(&self) -> Vec<(usize, usize)> {
        (1..self.dims.len()).flat_map(|j| (1..self.dims[j]).map(move |k| (j, k))).collect()
    }
}

/// Generating matrix with rows `l < r` and columns indexed by [`IndexSetJ`].
#[derive(Debug, Clone)]
pub struct NsGenMatrix {
    pub g: ComplexMatrix,
    pub index: IndexSetJ,
}

fn check_order(f: &DenseTensor) -> Result<()> {
    if f.order() < 3 {
        return Err(Error::InvalidArgument(format!("nonsymmetric driver needs order >= 3, got {}", f.order())));
    }
    Ok(())
}

fn check_rank(f: &DenseTensor, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument(String::from("rank 0")));
    }
    if r > f.dims()[0] {
        return Err(Error::RankTooLarge(format!("r = {r} exceeds the first dimension {}", f.dims()[0])));
    }
    Ok(())
}

/// Fills the full multi-index for row `mu` (over modes other than 0 and `j`).
fn other_modes(order: usize, j: usize) -> Vec<usize> {
    (1..order).filter(|&t| t != j).collect()
}

/// `A[F, j]` and the right-hand sides `b[F, (i, j, k)]` as columns, ordered
/// `k` outer and `i` inner.
pub fn assemble_system_ns(f: &DenseTensor, j: usize, r: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_order(f)?;
    check_rank(f, r)?;
    let dims = f.dims();
    if j == 0 || j >= dims.len() {
        return Err(Error::IndexOutOfRange(format!("mode {j} of {}", dims.len())));
    }
    let rest = other_modes(dims.len(), j);
    let rest_dims: Vec<usize> = rest.iter().map(|&t| dims[t]).collect();
    let rows: usize = rest_dims.iter().product();
    let nbar = dims[j] - 1;
    let mut a = ComplexMatrix::zeros(rows, r);
    let mut b = ComplexMatrix::zeros(rows, r * nbar);
    let mut idx = vec![0; dims.len()];
    for (row, mu) in MultiIndexIter::new(&rest_dims).enumerate() {
        for (&t, &v) in rest.iter().zip(&mu) {
            idx[t] = v;
        }
        idx[j] = 0;
        for l in 0..r {
            idx[0] = l;
            a[(row, l)] = f.get(&idx);
        }
        for k in 1..=nbar {
            idx[j] = k;
            for i in 0..r {
                idx[0] = i;
                b[(row, (k - 1) * r + i)] = f.get(&idx);
            }
        }
    }
    Ok((a, b))
}

/// Least-squares generating matrix; one factorization per mode `j`.
pub fn solve_generating_matrix_ns(f: &DenseTensor, r: usize, rcond: f64) -> Result<NsGenMatrix> {
    check_order(f)?;
    check_rank(f, r)?;
    let index = IndexSetJ::new(f.dims(), r);
    let mut g = ComplexMatrix::zeros(r, index.len());
    for j in 1..f.order() {
        let (a, b) = assemble_system_ns(f, j, r)?;
        let pinv = PseudoInverse::new(&a, rcond)?;
        for c in 0..b.cols() {
            let x = pinv.solve(&b.column(c))?;
            let col = index.offsets[j] + c;
            for (l, v) in x.into_iter().enumerate() {
                g[(l, col)] = v;
            }
        }
    }
    Ok(NsGenMatrix { g, index })
}

/// `M^{j,k}` with row `i`, column `l` equal to `G(l, (i, j, k))`.
pub fn build_mjk(gm: &NsGenMatrix, j: usize, k: usize) -> Result<ComplexMatrix> {
    let idx = &gm.index;
    if j == 0 || j >= idx.dims.len() || k == 0 || k >= idx.dims[j] {
        return Err(Error::IndexOutOfRange(format!("pair ({j}, {k}) for dims {:?}", idx.dims)));
    }
    let r = idx.rank;
    Ok(ComplexMatrix::from_fn(r, r, |i, l| gm.g[(l, idx.column(i, j, k))]))
}

/// Vectors `v^{s,j} = (1, q_s^* M^{j,1} q_s, ...)` for modes `j >= 1`, from
/// the Schur vectors `q_s` of `sum xi_{j,k} M^{j,k}`.
///
/// `result[s][j - 1]` is the mode-`j` vector of term `s`.
pub fn extract_modes(gm: &NsGenMatrix, xi: &[f64]) -> Result<(Vec<Vec<Vec<C64>>>, ExtractionDiagnostics)> {
    let pairs = gm.index.mode_pairs();
    if xi.len() != pairs.len() {
        return Err(Error::DimensionMismatch(format!("{} weights for {} mode pairs", xi.len(), pairs.len())));
    }
    let sum: f64 = xi.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("weights sum to {sum}, expected 1")));
    }
    let family = pairs.iter().map(|&(j, k)| build_mjk(gm, j, k)).collect::<Result<Vec<_>>>()?;
    let (values, diagnostics) = joint_values(&family, xi)?;
    let dims = &gm.index.dims;
    let modes = values
        .into_iter()
        .map(|vals| {
            let mut it = vals.into_iter();
            (1..dims.len())
                .map(|j| core::iter::once(C64::new(1.0, 0.0)).chain(it.by_ref().take(dims[j] - 1)).collect())
                .collect()
        })
        .collect();
    Ok((modes, diagnostics))
}

/// First-mode vectors minimizing `||sum_s z_s ⊗ v^{s,2} ⊗ ... ⊗ v^{s,m} - F||`.
///
/// `modes[s]` holds the vectors of modes `2..m` for term `s`.
pub fn solve_first_mode(f: &DenseTensor, modes: &[Vec<Vec<C64>>], rcond: f64) -> Result<Vec<Vec<C64>>> {
    let dims = f.dims();
    if modes.is_empty()
        || modes.iter().any(|t| t.len() + 1 != dims.len() || t.iter().zip(&dims[1..]).any(|(v, &d)| v.len() != d))
    {
        return Err(Error::DimensionMismatch(format!("mode vectors do not match dims {dims:?}")));
    }
    let slice_len: usize = dims[1..].iter().product();
    let design = ComplexMatrix::from_fn(slice_len, modes.len(), |_, _| C64::new(0.0, 0.0));
    let mut design = design;
    for (row, idx) in MultiIndexIter::new(&dims[1..]).enumerate() {
        for (s, tuple) in modes.iter().enumerate() {
            design[(row, s)] = tuple.iter().zip(&idx).map(|(v, &i)| v[i]).product();
        }
    }
    let pinv = PseudoInverse::new(&design, rcond)?;
    let mut z = vec![vec![C64::new(0.0, 0.0); dims[0]]; modes.len()];
    for (i, slice) in f.data().chunks_exact(slice_len).enumerate() {
        for (s, v) in pinv.solve(slice)?.into_iter().enumerate() {
            z[s][i] = v;
        }
    }
    Ok(z)
}

/// Closed-form rank-1 approximation in the given mode order; every mode
/// after the first is normalized to a leading 1.
pub fn rank1_closed_form_ns(f: &DenseTensor) -> Result<Tuple> {
    check_order(f)?;
    let dims = f.dims();
    let m = dims.len();
    let mut tuple: Tuple = vec![Vec::new(); m];
    for j in 1..m {
        let rest = other_modes(m, j);
        let rest_dims: Vec<usize> = rest.iter().map(|&t| dims[t]).collect();
        let mut idx = vec![0; m];
        let mut den = 0.0;
        let mut num = vec![C64::new(0.0, 0.0); dims[j]];
        for mu in MultiIndexIter::new(&rest_dims) {
            for (&t, &v) in rest.iter().zip(&mu) {
                idx[t] = v;
            }
            idx[0] = 0;
            idx[j] = 0;
            let a = f.get(&idx);
            den += a.norm_sqr();
            for (k, nk) in num.iter_mut().enumerate().skip(1) {
                idx[j] = k;
                *nk += a.conj() * f.get(&idx);
            }
        }
        if den == 0.0 {
            return Err(Error::DegenerateSlice(format!("slice for mode {} vanishes", j + 1)));
        }
        tuple[j] = core::iter::once(C64::new(1.0, 0.0)).chain(num.into_iter().skip(1).map(|z| z / den)).collect();
    }
    let scale: f64 = tuple[1..].iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>()).product();
    let slice_len: usize = dims[1..].iter().product();
    let weights: Vec<C64> = MultiIndexIter::new(&dims[1..])
        .map(|idx| tuple[1..].iter().zip(&idx).map(|(v, &i)| v[i]).product::<C64>().conj())
        .collect();
    tuple[0] = f
        .data()
        .chunks_exact(slice_len)
        .map(|slice| slice.iter().zip(&weights).map(|(a, w)| a * w).sum::<C64>() / scale)
        .collect();
    Ok(tuple)
}

/// Sum of the outer products of the given tuples.
pub fn reconstruct(dims: &[usize], tuples: &[Tuple]) -> Result<DenseTensor> {
    let mut x = DenseTensor::zeros(dims)?;
    for t in tuples {
        let refs: Vec<&[C64]> = t.iter().map(|v| v.as_slice()).collect();
        x.add_outer(C64::new(1.0, 0.0), &refs)?;
    }
    Ok(x)
}

#[derive(Debug, Clone)]
pub struct NsRefined {
    pub tuples: Vec<Tuple>,
    pub x_opt: DenseTensor,
    pub residual_opt: f64,
    pub iterations: usize,
    pub status: RefineStatus,
}

#[derive(Debug, Clone)]
pub struct NsApproxResult {
    /// Terms in the caller's mode order. Modes other than the leading one
    /// (after reordering) start with 1 unless coordinates were changed.
    pub tuples: Vec<Tuple>,
    pub x_gp: DenseTensor,
    pub residual_gp: f64,
    pub refined: Option<NsRefined>,
    pub diagnostics: ExtractionDiagnostics,
    /// Mode reordering used internally, `perm[new] = old`.
    pub permutation: Vec<usize>,
    pub seed: u64,
    pub coordinates_changed: bool,
}

impl NsApproxResult {
    pub fn residual(&self) -> f64 {
        self.refined.as_ref().map_or(self.residual_gp, |r| r.residual_opt)
    }

    pub fn best_tuples(&self) -> &[Tuple] {
        self.refined.as_ref().map_or(&self.tuples, |r| &r.tuples)
    }

    pub fn best_tensor(&self) -> &DenseTensor {
        self.refined.as_ref().map_or(&self.x_gp, |r| &r.x_opt)
    }
}

struct Stage {
    tuples: Vec<Tuple>,
    diagnostics: ExtractionDiagnostics,
}

fn generating_stage(f: &DenseTensor, r: usize, opts: &ApproxOptions) -> Result<Stage> {
    let gm = solve_generating_matrix_ns(f, r, opts.rcond)?;
    let xi = generic_weights(&mut rng_from_seed(opts.seed), gm.index.mode_pairs().len());
    let (modes, diagnostics) = extract_modes(&gm, &xi)?;
    let first = solve_first_mode(f, &modes, opts.rcond)?;
    let tuples: Vec<Tuple> =
        first.into_iter().zip(modes).map(|(z, rest)| core::iter::once(z).chain(rest).collect()).collect();
    if tuples.iter().flatten().flatten().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("recovered tuples"));
    }
    Ok(Stage { tuples, diagnostics })
}

fn changed_stage(f: &DenseTensor, r: usize, opts: &ApproxOptions) -> Result<Stage> {
    let mut rng = rng_from_seed(opts.seed ^ COORDINATE_SEED_OFFSET);
    let ps: Vec<ComplexMatrix> = f.dims().iter().map(|&d| random_unitary(&mut rng, d)).collect();
    let mut g = f.clone();
    for (mode, p) in ps.iter().enumerate() {
        g = g.mode_multiply(mode, p)?;
    }
    let stage = generating_stage(&g, r, opts)?;
    let adjoints: Vec<ComplexMatrix> = ps.iter().map(|p| p.adjoint()).collect();
    let tuples = stage
        .tuples
        .iter()
        .map(|t| t.iter().zip(&adjoints).map(|(v, ph)| ph.matvec(v)).collect::<Result<Tuple>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Stage { tuples, ..stage })
}

/// Rank-r approximation of a nonsymmetric tensor of order at least 3.
pub fn approx_nonsym(f: &DenseTensor, r: usize, opts: &ApproxOptions) -> Result<NsApproxResult> {
    check_order(f)?;
    let (fp, perm) = mode_permute(f)?;
    check_rank(&fp, r)?;
    let (stage, coordinates_changed) = match opts.coordinate_change {
        CoordinateChange::Never => (generating_stage(&fp, r, opts)?, false),
        CoordinateChange::Always => (changed_stage(&fp, r, opts)?, true),
        CoordinateChange::OnFailure => match generating_stage(&fp, r, opts) {
            Ok(s) => (s, false),
            Err(e) if e.is_precondition() => return Err(e),
            Err(_) => (changed_stage(&fp, r, opts)?, true),
        },
    };
    let tuples: Vec<Tuple> = stage
        .tuples
        .into_iter()
        .map(|t| {
            let mut back = vec![Vec::new(); t.len()];
            for (new, v) in t.into_iter().enumerate() {
                back[perm[new]] = v;
            }
            back
        })
        .collect();
    let x_gp = reconstruct(f.dims(), &tuples)?;
    let residual_gp = f.distance(&x_gp)?;

    let refined = match &opts.refine {
        Some(ropts) if residual_gp > opts.skip_refine_below * f.norm() => {
            let out = refine_nonsym(f, &tuples, ropts)?;
            let x_opt = reconstruct(f.dims(), &out.tuples)?;
            let residual_opt = f.distance(&x_opt)?;
            Some(NsRefined { tuples: out.tuples, x_opt, residual_opt, iterations: out.iterations, status: out.status })
        }
        _ => None,
    };

    Ok(NsApproxResult {
        tuples,
        x_gp,
        residual_gp,
        refined,
        diagnostics: stage.diagnostics,
        permutation: perm,
        seed: opts.seed,
        coordinates_changed,
    })
}
