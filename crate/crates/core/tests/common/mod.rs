//! Instance generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use gentensor_core::tensor::sym_power;
use gentensor_core::{ComplexMatrix, DenseTensor, SymTensor, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gauss_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| gauss(rng)).collect()
}

pub fn gauss_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gauss(rng))
}

/// `sum_i u_i^{⊗m}` for Gaussian `u_i`.
pub fn random_sym<R: Rng>(rng: &mut R, n: usize, m: usize, r: usize) -> (SymTensor, Vec<Vec<C64>>) {
    let us: Vec<Vec<C64>> = (0..r).map(|_| gauss_vec(rng, n)).collect();
    let mut f = SymTensor::zeros(n, m).unwrap();
    for u in &us {
        f.add_power(C64::new(1.0, 0.0), u).unwrap();
    }
    (f, us)
}

/// `sum_s u^{s,1} ⊗ ... ⊗ u^{s,m}` for Gaussian vectors.
pub fn random_ns<R: Rng>(rng: &mut R, dims: &[usize], r: usize) -> (DenseTensor, Vec<Vec<Vec<C64>>>) {
    let tuples: Vec<Vec<Vec<C64>>> = (0..r).map(|_| dims.iter().map(|&d| gauss_vec(rng, d)).collect()).collect();
    (outer_sum(dims, &tuples), tuples)
}

pub fn outer_sum(dims: &[usize], tuples: &[Vec<Vec<C64>>]) -> DenseTensor {
    let mut f = DenseTensor::zeros(dims).unwrap();
    for t in tuples {
        let refs: Vec<&[C64]> = t.iter().map(|v| v.as_slice()).collect();
        f.add_outer(C64::new(1.0, 0.0), &refs).unwrap();
    }
    f
}

pub fn sym_term(u: &[C64], m: usize) -> SymTensor {
    sym_power(u, m).unwrap()
}

/// Dense expansion computed straight from the definition, entry by entry.
pub fn brute_dense(f: &SymTensor) -> Vec<C64> {
    let n = f.dim();
    let m = f.order();
    let total = n.pow(m as u32);
    (0..total)
        .map(|mut flat| {
            let mut idx = vec![0; m];
            for slot in idx.iter_mut().rev() {
                *slot = flat % n;
                flat /= n;
            }
            f.get_index(&idx).unwrap()
        })
        .collect()
}

/// Solves the normal equations `A^* A x = A^* b` by Gaussian elimination
/// with partial pivoting.
pub fn normal_equations(a: &ComplexMatrix, b: &[C64]) -> Vec<C64> {
    let n = a.cols();
    let ah = a.adjoint();
    let ata = ah.matmul(a).unwrap();
    let atb = ah.matvec(b).unwrap();
    let mut aug: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut row: Vec<C64> = (0..n).map(|j| ata[(i, j)]).collect();
            row.push(atb[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| aug[x][col].norm().partial_cmp(&aug[y][col].norm()).unwrap()).unwrap();
        aug.swap(col, piv);
        for row in 0..n {
            if row != col {
                let factor = aug[row][col] / aug[col][col];
                let pivot_row = aug[col].clone();
                for (dst, v) in aug[row][col..].iter_mut().zip(&pivot_row[col..]) {
                    *dst -= factor * v;
                }
            }
        }
    }
    (0..n).map(|i| aug[i][n] / aug[i][i]).collect()
}

/// Characteristic polynomial coefficients (monic, highest degree first) by
/// the Faddeev-LeVerrier recursion.
pub fn char_poly(a: &ComplexMatrix) -> Vec<C64> {
    let n = a.rows();
    let eye = ComplexMatrix::identity(n);
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    let mut mk = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        mk = a.matmul(&mk).unwrap();
        mk.axpy(coeffs[k - 1], &eye).unwrap();
        let amk = a.matmul(&mk).unwrap();
        let tr: C64 = (0..n).map(|i| amk[(i, i)]).sum();
        coeffs.push(-tr / k as f64);
    }
    coeffs
}

/// Roots of a monic polynomial by Durand-Kerner iteration.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let eval = |z: C64| coeffs.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let radius = 1.0 + coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = C64::new(0.4, 0.9);
    let mut roots: Vec<C64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..5000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = C64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    roots
}

/// Largest distance of an optimal-ish (greedy) matching of two multisets.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Matches recovered rank-1 terms to reference terms, returning the largest
/// term distance.
pub fn term_matching<T>(found: &[T], expected: &[T], dist: impl Fn(&T, &T) -> f64) -> f64 {
    assert_eq!(found.len(), expected.len());
    let mut used = vec![false; expected.len()];
    let mut worst: f64 = 0.0;
    for f in found {
        let (j, d) = expected
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, e)| (j, dist(f, e)))
            .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
