//! Power vectors of monomials in `x_1, ..., x_k` and their graded
//! lexicographic enumeration (`x_1 > x_2 > ... > x_k`).
//!
//! Monomials of lower degree come first; within one degree a larger exponent
//! of an earlier variable comes first, giving `1, x1, x2, x1^2, x1 x2, x2^2, ...`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// Exponent vector `alpha` of the monomial `x^alpha = x_1^{a_1} ... x_k^{a_k}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PowerVector(Vec<u32>);

impl PowerVector {
    pub fn new(exponents: Vec<u32>) -> Self {
        PowerVector(exponents)
    }

    /// The constant monomial `1` in `nvars` variables.
    pub fn zero(nvars: usize) -> Self {
        PowerVector(vec![0; nvars])
    }

    /// The variable `x_{var+1}` (zero-based `var`).
    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        PowerVector(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|alpha|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Exponents of the product `x^self * x^other`.
    pub fn add(&self, other: &PowerVector) -> PowerVector {
        debug_assert_eq!(self.0.len(), other.0.len());
        PowerVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `x_{var+1} * x^self`.
    pub fn times_var(&self, var: usize) -> PowerVector {
        let mut e = self.0.clone();
        e[var] += 1;
        PowerVector(e)
    }

    /// Position of this monomial in the infinite graded-lex listing.
    ///
    /// The position does not depend on any degree cap, so it is also the
    /// position inside `N^k_d` for every `d >= |alpha|`.
    pub fn graded_lex_rank(&self) -> usize {
        graded_lex_rank(&self.0)
    }
}

/// Graded-lex position of the exponent vector `exps`.
pub fn graded_lex_rank(exps: &[u32]) -> usize {
    let k = exps.len();
    let d = exps.iter().sum::<u32>() as usize;
    if k == 0 {
        return 0;
    }
    let mut pos = if d == 0 { 0 } else { count_up_to(k, d - 1) };
    let mut remaining = d;
    for (var, &a) in exps.iter().enumerate().take(k - 1) {
        let a = a as usize;
        let free = k - var - 1;
        for e in (a + 1)..=remaining {
            pos += count_exact(free, remaining - e);
        }
        remaining -= a;
    }
    pos
}

impl PartialOrd for PowerVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PowerVector {
    /// Graded-lex order: `Less` means "listed earlier".
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.degree().cmp(&other.degree()))
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl fmt::Debug for PowerVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<u32>> for PowerVector {
    fn from(v: Vec<u32>) -> Self {
        PowerVector(v)
    }
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of monomials of degree exactly `deg` in `nvars` variables.
pub fn count_exact(nvars: usize, deg: usize) -> usize {
    if nvars == 0 {
        return usize::from(deg == 0);
    }
    binomial(nvars + deg - 1, deg)
}

/// `|N^nvars_deg|`, the number of monomials of degree at most `deg`.
pub fn count_up_to(nvars: usize, deg: usize) -> usize {
    binomial(nvars + deg, deg)
}

/// All monomials of degree exactly `deg`, graded-lex ordered.
pub fn monomials_of_degree(nvars: usize, deg: usize) -> Vec<PowerVector> {
    let mut out = Vec::with_capacity(count_exact(nvars, deg));
    if nvars == 0 {
        if deg == 0 {
            out.push(PowerVector(Vec::new()));
        }
        return out;
    }
    let mut current = vec![0u32; nvars];
    fill_degree(&mut current, 0, deg as u32, &mut out);
    out
}

fn fill_degree(current: &mut [u32], var: usize, remaining: u32, out: &mut Vec<PowerVector>) {
    if var + 1 == current.len() {
        current[var] = remaining;
        out.push(PowerVector(current.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e;
        fill_degree(current, var + 1, remaining - e, out);
    }
    current[var] = 0;
}

/// `N^nvars_max_deg` listed in graded-lex order.
pub fn graded_lex(nvars: usize, max_deg: usize) -> Vec<PowerVector> {
    let mut out = Vec::with_capacity(count_up_to(nvars, max_deg));
    for d in 0..=max_deg {
        out.extend(monomials_of_degree(nvars, d));
    }
    out
}

/// The first `count` monomials of the graded-lex listing.
pub fn first_monomials(nvars: usize, count: usize) -> Vec<PowerVector> {
    let mut out = Vec::with_capacity(count);
    let mut d = 0;
    while out.len() < count {
        let layer = monomials_of_degree(nvars, d);
        if layer.is_empty() {
            break;
        }
        out.extend(layer.into_iter().take(count - out.len()));
        d += 1;
    }
    out
}

/// Number of multi-indices of length `order` mapping to `alpha`:
/// `m! / (alpha_0! alpha_1! ... )` with `alpha_0 = m - |alpha|`.
pub fn multinomial(order: u32, alpha: &[u32]) -> f64 {
    let deg: u32 = alpha.iter().sum();
    debug_assert!(deg <= order);
    let mut acc: u128 = 1;
    let mut placed = order - deg;
    for &a in alpha {
        placed += a;
        acc *= binomial(placed as usize, a as usize) as u128;
    }
    acc as f64
}
