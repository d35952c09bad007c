//! Seeded draws used by the drivers: generic Schur weights and random
//! unitary changes of coordinates.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;

use crate::linalg::ComplexMatrix;
use crate::C64;

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` weights drawn uniformly from `(0, 1)` and scaled to sum to one.
pub(crate) fn generic_weights<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..count)
        .map(|_| loop {
            let x: f64 = rng.random();
            if x > 0.0 {
                break x;
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

/// Random unitary matrix: Gram-Schmidt on uniformly drawn complex columns.
pub(crate) fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut x: Vec<C64> =
            (0..n).map(|_| C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)).collect();
        for _ in 0..2 {
            for col in &cols {
                let proj: C64 = col.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
                for (xi, ci) in x.iter_mut().zip(col) {
                    *xi -= proj * ci;
                }
            }
        }
        let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-6 {
            cols.push(x.into_iter().map(|z| z / nrm).collect());
        }
    }
    ComplexMatrix::from_columns(n, &cols).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_positive_and_normalized() {
        let mut rng = rng_from_seed(7);
        let w = generic_weights(&mut rng, 5);
        assert!(w.iter().all(|&x| x > 0.0));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let again = generic_weights(&mut rng_from_seed(7), 5);
        assert_eq!(w, again);
    }

    #[test]
    fn unitary_is_unitary() {
        let q = random_unitary(&mut rng_from_seed(3), 6);
        let qq = q.adjoint().matmul(&q).unwrap();
        assert!(qq.sub(&ComplexMatrix::identity(6)).unwrap().frobenius_norm() < 1e-13);
    }
}
