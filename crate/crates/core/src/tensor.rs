//! Dense and compact-symmetric complex tensors.
//!
//! All indices are zero-based. For a dense tensor of shape `(n_1, ..., n_m)`
//! the multi-index `(i_1, ..., i_m)` with `0 <= i_j < n_j` is also read as the
//! multi-linear monomial `x_{1,i_1} ... x_{m,i_m}` (index `0` is the constant
//! `x_{j,0} = 1`). A symmetric tensor of order `m` on `C^n` stores one entry
//! per power vector `alpha` in `N^{n-1}_m`: the multi-index `(i_1, ..., i_m)`
//! addresses the monomial `x_{i_1} ... x_{i_m}` with `x_0 = 1`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::monomial::{count_up_to, graded_lex, graded_lex_rank, multinomial, PowerVector};
use crate::C64;

/// Row-major iterator over all multi-indices of a shape.
#[derive(Debug, Clone)]
pub struct MultiIndexIter {
    dims: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl MultiIndexIter {
    pub fn new(dims: &[usize]) -> Self {
        MultiIndexIter { dims: dims.to_vec(), current: vec![0; dims.len()], done: dims.contains(&0) }
    }
}

impl Iterator for MultiIndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut pos = self.dims.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.current[pos] += 1;
            if self.current[pos] < self.dims[pos] {
                break;
            }
            self.current[pos] = 0;
        }
        Some(out)
    }
}

/// Multi-linear monomial `x_{1,i_1} ... x_{m,i_m}`; index `0` is the constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiLinearMonomial(pub Vec<usize>);

impl MultiLinearMonomial {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// True when the monomial is constant in every mode outside `modes`
    /// (zero-based), i.e. it belongs to `M_modes`.
    pub fn supported_on(&self, modes: &[usize]) -> bool {
        self.0.iter().enumerate().all(|(j, &i)| i == 0 || modes.contains(&j))
    }
}

/// Order-`m` complex tensor with explicit dimensions, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidShape("tensor order must be at least 1".into()));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidShape(format!("zero dimension in {dims:?}")));
    }
    Ok(dims.iter().product())
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(Error::InvalidShape(format!("{} entries for dims {dims:?} (expected {len})", data.len())));
        }
        Ok(DenseTensor { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(DenseTensor { dims: dims.to_vec(), data: vec![C64::new(0.0, 0.0); len] })
    }

    /// Builds a tensor by evaluating `f` at every zero-based multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        check_dims(dims)?;
        let data = MultiIndexIter::new(dims).map(|idx| f(&idx)).collect();
        Ok(DenseTensor { dims: dims.to_vec(), data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for j in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.dims[j + 1];
        }
        strides
    }

    pub fn offset(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.dims.len() {
            return Err(Error::IndexOutOfRange(format!(
                "multi-index of length {} for order {}",
                idx.len(),
                self.dims.len()
            )));
        }
        let mut off = 0;
        for (&i, &n) in idx.iter().zip(&self.dims) {
            if i >= n {
                return Err(Error::IndexOutOfRange(format!("{idx:?} for dims {:?}", self.dims)));
            }
            off = off * n + i;
        }
        Ok(off)
    }

    /// Entry at a zero-based multi-index. Panics when out of range.
    pub fn get(&self, idx: &[usize]) -> C64 {
        match self.offset(idx) {
            Ok(off) => self.data[off],
            Err(e) => panic!("{e}"),
        }
    }

    pub fn set(&mut self, idx: &[usize], value: C64) -> Result<()> {
        let off = self.offset(idx)?;
        self.data[off] = value;
        Ok(())
    }

    pub fn monomial(&self, mono: &MultiLinearMonomial) -> Result<C64> {
        Ok(self.data[self.offset(&mono.0)?])
    }

    /// Frobenius norm over all entries.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(DenseTensor { dims: self.dims.clone(), data })
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(DenseTensor { dims: self.dims.clone(), data })
    }

    /// `||self - other||` without allocating the difference.
    pub fn distance(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    pub fn scale(&self, c: C64) -> DenseTensor {
        DenseTensor { dims: self.dims.clone(), data: self.data.iter().map(|z| z * c).collect() }
    }

    /// Adds `c * (u^1 ⊗ ... ⊗ u^m)` in place.
    pub fn add_outer(&mut self, c: C64, vectors: &[&[C64]]) -> Result<()> {
        if vectors.len() != self.dims.len() || vectors.iter().zip(&self.dims).any(|(v, &n)| v.len() != n) {
            return Err(Error::DimensionMismatch("outer-product factors vs tensor dims".into()));
        }
        let mut pos = 0;
        add_outer_rec(&mut self.data, &mut pos, vectors, c);
        Ok(())
    }

    /// Tensor whose mode `t` is mode `perm[t]` of `self`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<DenseTensor> {
        let m = self.dims.len();
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || core::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of {m} modes")));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let old_strides = self.strides();
        let strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let data = MultiIndexIter::new(&new_dims)
            .map(|idx| self.data[idx.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>()])
            .collect();
        Ok(DenseTensor { dims: new_dims, data })
    }

    /// Mode-`mode` product: `T'[.., i, ..] = sum_k mat[i, k] T[.., k, ..]`.
    pub fn mode_multiply(&self, mode: usize, mat: &ComplexMatrix) -> Result<DenseTensor> {
        if mode >= self.dims.len() || mat.cols() != self.dims[mode] {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on mode {mode} of dims {:?}",
                mat.rows(),
                mat.cols(),
                self.dims
            )));
        }
        let outer: usize = self.dims[..mode].iter().product();
        let inner: usize = self.dims[mode + 1..].iter().product();
        let (nk, ni) = (self.dims[mode], mat.rows());
        let mut dims = self.dims.clone();
        dims[mode] = ni;
        let mut data = vec![C64::new(0.0, 0.0); outer * ni * inner];
        for o in 0..outer {
            for i in 0..ni {
                let dst = &mut data[(o * ni + i) * inner..(o * ni + i + 1) * inner];
                for k in 0..nk {
                    let a = mat[(i, k)];
                    let src = &self.data[(o * nk + k) * inner..(o * nk + k + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += a * s;
                    }
                }
            }
        }
        Ok(DenseTensor { dims, data })
    }

    /// `sum_mu p_mu F_mu` over multi-linear monomials.
    pub fn pair(&self, poly: &[(MultiLinearMonomial, C64)]) -> Result<C64> {
        poly.iter().try_fold(C64::new(0.0, 0.0), |acc, (mono, c)| Ok(acc + c * self.monomial(mono)?))
    }
}

fn add_outer_rec(data: &mut [C64], pos: &mut usize, vectors: &[&[C64]], c: C64) {
    match vectors {
        [last] => {
            for &x in last.iter() {
                data[*pos] += c * x;
                *pos += 1;
            }
        }
        [first, rest @ ..] => {
            for &x in first.iter() {
                add_outer_rec(data, pos, rest, c * x);
            }
        }
        [] => {}
    }
}

/// `u^1 ⊗ ... ⊗ u^m`.
pub fn outer_product(vectors: &[&[C64]]) -> Result<DenseTensor> {
    if vectors.is_empty() {
        return Err(Error::InvalidArgument("outer product of an empty vector list".into()));
    }
    let dims: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
    let mut t = DenseTensor::zeros(&dims)?;
    t.add_outer(C64::new(1.0, 0.0), vectors)?;
    Ok(t)
}

/// Power vector (in `n - 1` variables) of the zero-based multi-index `idx`.
pub fn multiindex_to_power(idx: &[usize], n: usize) -> Result<PowerVector> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut alpha = vec![0u32; n - 1];
    for &i in idx {
        if i >= n {
            return Err(Error::IndexOutOfRange(format!("{idx:?} with n = {n}")));
        }
        if i > 0 {
            alpha[i - 1] += 1;
        }
    }
    Ok(PowerVector::new(alpha))
}

/// All zero-based multi-indices of length `order` mapping to `alpha`,
/// lexicographically ordered. Their count is `multinomial(order, alpha)`.
pub fn power_to_multiindices(alpha: &PowerVector, order: usize) -> Result<Vec<Vec<usize>>> {
    let deg = alpha.degree() as usize;
    if deg > order {
        return Err(Error::IndexOutOfRange(format!("|{alpha:?}| > {order}")));
    }
    let mut counts: Vec<usize> =
        core::iter::once(order - deg).chain(alpha.exponents().iter().map(|&a| a as usize)).collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(order);
    multiset_perms(&mut counts, order, &mut current, &mut out);
    Ok(out)
}

fn multiset_perms(counts: &mut [usize], left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if left == 0 {
        out.push(current.clone());
        return;
    }
    for v in 0..counts.len() {
        if counts[v] > 0 {
            counts[v] -= 1;
            current.push(v);
            multiset_perms(counts, left - 1, current, out);
            current.pop();
            counts[v] += 1;
        }
    }
}

/// Symmetric tensor in `S^m(C^n)` stored as one entry per power vector.
///
/// Entries are kept in graded-lex order over `N^{n-1}_m`, so the entry for
/// `alpha` sits at `alpha.graded_lex_rank()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    n: usize,
    m: usize,
    data: Vec<C64>,
}

impl SymTensor {
    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidShape(format!("symmetric tensor with n = {n}, m = {m}")));
        }
        Ok(SymTensor { n, m, data: vec![C64::new(0.0, 0.0); count_up_to(n - 1, m)] })
    }

    /// Wraps compact entries listed in graded-lex order.
    pub fn from_entries(n: usize, m: usize, data: Vec<C64>) -> Result<Self> {
        let t = Self::zeros(n, m)?;
        if data.len() != t.data.len() {
            return Err(Error::InvalidShape(format!(
                "{} compact entries for n = {n}, m = {m} (expected {})",
                data.len(),
                t.data.len()
            )));
        }
        Ok(SymTensor { n, m, data })
    }

    /// Builds the tensor from a function of the power vector.
    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(&PowerVector) -> C64) -> Result<Self> {
        Self::zeros(n, m)?;
        let data = graded_lex(n - 1, m).iter().map(&mut f).collect();
        Ok(SymTensor { n, m, data })
    }

    /// Builds the tensor from a function of a representative (sorted)
    /// zero-based multi-index.
    pub fn from_index_fn(n: usize, m: usize, mut f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        Self::from_fn(n, m, |alpha| f(&representative(alpha, m)))
    }

    /// Compresses a dense cubical tensor, reading each orbit at its sorted index.
    pub fn from_dense(t: &DenseTensor) -> Result<Self> {
        let n = t.dims()[0];
        if t.dims().iter().any(|&d| d != n) {
            return Err(Error::InvalidShape(format!("non-cubical dims {:?}", t.dims())));
        }
        Self::from_index_fn(n, t.order(), |idx| t.get(idx))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// Number of variables `n - 1`.
    pub fn nvars(&self) -> usize {
        self.n - 1
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Power vectors of the stored entries, in storage order.
    pub fn powers(&self) -> Vec<PowerVector> {
        graded_lex(self.n - 1, self.m)
    }

    fn position(&self, alpha: &[u32]) -> Result<usize> {
        let deg: u32 = alpha.iter().sum();
        if alpha.len() != self.n - 1 || deg as usize > self.m {
            return Err(Error::IndexOutOfRange(format!("power {alpha:?} for n = {}, m = {}", self.n, self.m)));
        }
        Ok(graded_lex_rank(alpha))
    }

    /// `F_alpha`.
    pub fn get(&self, alpha: &PowerVector) -> Result<C64> {
        Ok(self.data[self.position(alpha.exponents())?])
    }

    /// `F_{beta + gamma}` without materialising the sum.
    pub fn get_sum(&self, beta: &PowerVector, gamma: &PowerVector) -> Result<C64> {
        self.get(&beta.add(gamma))
    }

    pub fn set(&mut self, alpha: &PowerVector, value: C64) -> Result<()> {
        let pos = self.position(alpha.exponents())?;
        self.data[pos] = value;
        Ok(())
    }

    /// Entry at a zero-based multi-index of length `m`.
    pub fn get_index(&self, idx: &[usize]) -> Result<C64> {
        if idx.len() != self.m {
            return Err(Error::IndexOutOfRange(format!("multi-index {idx:?} for order {}", self.m)));
        }
        self.get(&multiindex_to_power(idx, self.n)?)
    }

    /// Multiplicity weights `m!/alpha!` in storage order.
    pub fn weights(&self) -> Vec<f64> {
        self.powers().iter().map(|a| multinomial(self.m as u32, a.exponents())).collect()
    }

    /// Norm of the full `n^m` tensor.
    pub fn norm(&self) -> f64 {
        self.weighted_sq_sum(&self.data).sqrt()
    }

    fn weighted_sq_sum(&self, data: &[C64]) -> f64 {
        self.weights().iter().zip(data).map(|(w, z)| w * z.norm_sqr()).sum()
    }

    /// `||self - other||` in the full-tensor norm.
    pub fn distance(&self, other: &SymTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        let diff: Vec<C64> = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(self.weighted_sq_sum(&diff).sqrt())
    }

    fn check_same_shape(&self, other: &SymTensor) -> Result<()> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::DimensionMismatch(format!(
                "S^{}(C^{}) vs S^{}(C^{})",
                self.m, self.n, other.m, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SymTensor) -> Result<SymTensor> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(SymTensor { n: self.n, m: self.m, data })
    }

    pub fn sub(&self, other: &SymTensor) -> Result<SymTensor> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(SymTensor { n: self.n, m: self.m, data })
    }

    pub fn scale(&self, c: C64) -> SymTensor {
        SymTensor { n: self.n, m: self.m, data: self.data.iter().map(|z| z * c).collect() }
    }

    /// Adds `c * v^{⊗m}` in place.
    pub fn add_power(&mut self, c: C64, v: &[C64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!("vector of length {} for n = {}", v.len(), self.n)));
        }
        for (z, alpha) in self.data.iter_mut().zip(graded_lex(self.n - 1, self.m)) {
            *z += c * power_monomial(v, &alpha, self.m);
        }
        Ok(())
    }

    /// Expands to the full `n^m` dense tensor.
    pub fn to_dense(&self) -> DenseTensor {
        let dims = vec![self.n; self.m];
        DenseTensor::from_fn(&dims, |idx| self.get_index(idx).expect("index within the symmetric tensor"))
            .expect("valid shape")
    }

    /// `sum_alpha p_alpha F_alpha`.
    pub fn pair(&self, poly: &[(PowerVector, C64)]) -> Result<C64> {
        poly.iter().try_fold(C64::new(0.0, 0.0), |acc, (alpha, c)| Ok(acc + c * self.get(alpha)?))
    }
}

/// Sorted zero-based multi-index representing `alpha` in order `m`.
pub fn representative(alpha: &PowerVector, m: usize) -> Vec<usize> {
    let mut idx = vec![0; m - alpha.degree() as usize];
    for (k, &a) in alpha.exponents().iter().enumerate() {
        idx.extend(core::iter::repeat_n(k + 1, a as usize));
    }
    idx
}

/// `prod_k v_k^{alpha'_k}` where `alpha'` prefixes `alpha` with `m - |alpha|`.
pub fn power_monomial(v: &[C64], alpha: &PowerVector, m: usize) -> C64 {
    let mut acc = powi(v[0], m as u32 - alpha.degree());
    for (k, &a) in alpha.exponents().iter().enumerate() {
        if a > 0 {
            acc *= powi(v[k + 1], a);
        }
    }
    acc
}

pub(crate) fn powi(z: C64, e: u32) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for _ in 0..e {
        acc *= z;
    }
    acc
}

/// `v^{⊗m}` as a compact symmetric tensor.
pub fn sym_power(v: &[C64], m: usize) -> Result<SymTensor> {
    let mut t = SymTensor::zeros(v.len(), m)?;
    t.add_power(C64::new(1.0, 0.0), v)?;
    Ok(t)
}
