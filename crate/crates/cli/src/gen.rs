//! Random instances and the named example tensor families.

use gentensor_core::tensor::sym_power;
use gentensor_core::{DenseTensor, SymTensor, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{CliError, Result};
use crate::tensor::Tensor;

/// A planted rank-r tensor `r`, noise `e` and their sum `f`.
#[derive(Debug, Clone)]
pub struct Instance<T> {
    pub f: T,
    pub r: T,
    pub e: T,
}

fn gauss(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn check_args(r: usize, eps: f64) -> Result<()> {
    if r == 0 {
        return Err(CliError::Usage(String::from("rank must be at least 1")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(CliError::Usage(format!("noise level {eps} must be finite and nonnegative")));
    }
    Ok(())
}

/// Sum of `r` symmetric powers of complex Gaussian vectors plus symmetric
/// noise of norm exactly `eps`. Noise is drawn per stored entry.
pub fn gen_random_sym(n: usize, m: usize, r: usize, eps: f64, seed: u64) -> Result<Instance<SymTensor>> {
    check_args(r, eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted = SymTensor::zeros(n, m)?;
    for _ in 0..r {
        let u: Vec<C64> = (0..n).map(|_| gauss(&mut rng)).collect();
        planted.add_power(C64::new(1.0, 0.0), &u)?;
    }
    let mut noise = SymTensor::zeros(n, m)?;
    if eps > 0.0 {
        noise.entries_mut().iter_mut().for_each(|z| *z = gauss(&mut rng));
        let scale = eps / noise.norm();
        noise = noise.scale(C64::new(scale, 0.0));
    }
    Ok(Instance { f: planted.add(&noise)?, r: planted, e: noise })
}

/// Nonsymmetric analogue of [`gen_random_sym`] with Gaussian mode vectors.
pub fn gen_random_ns(dims: &[usize], r: usize, eps: f64, seed: u64) -> Result<Instance<DenseTensor>> {
    check_args(r, eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted = DenseTensor::zeros(dims)?;
    for _ in 0..r {
        let vs: Vec<Vec<C64>> = dims.iter().map(|&d| (0..d).map(|_| gauss(&mut rng)).collect()).collect();
        let refs: Vec<&[C64]> = vs.iter().map(|v| v.as_slice()).collect();
        planted.add_outer(C64::new(1.0, 0.0), &refs)?;
    }
    let mut noise = DenseTensor::zeros(dims)?;
    if eps > 0.0 {
        noise.data_mut().iter_mut().for_each(|z| *z = gauss(&mut rng));
        let scale = eps / noise.norm();
        noise = noise.scale(C64::new(scale, 0.0));
    }
    Ok(Instance { f: planted.add(&noise)?, r: planted, e: noise })
}

/// `||F - X|| / ||E||`.
pub fn relerr(f: &Tensor, x_opt: &Tensor, e: &Tensor) -> Result<f64> {
    let noise = e.norm();
    if noise == 0.0 {
        return Err(CliError::Usage(String::from("relative error is undefined for zero noise")));
    }
    Ok(f.distance(x_opt)? / noise)
}

/// One named family: its symmetric order or default dense shape.
#[derive(Debug, Clone, Copy)]
pub struct Family {
    pub name: &'static str,
    pub symmetric: bool,
    pub default_dims: &'static [usize],
    entry: fn(&[f64]) -> f64,
}

impl Family {
    pub fn order(&self) -> usize {
        self.default_dims.len()
    }
}

fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

// Entry formulas take the 1-based indices as floats.
pub const FAMILIES: &[Family] = &[
    Family { name: "sin3", symmetric: true, default_dims: &[6; 3], entry: |i| i.iter().sum::<f64>().sin() },
    Family { name: "recip3", symmetric: true, default_dims: &[10; 3], entry: |i| 1.0 / i.iter().sum::<f64>() },
    Family { name: "exp4", symmetric: true, default_dims: &[5; 4], entry: |i| (-i.iter().product::<f64>()).exp() },
    Family { name: "log4", symmetric: true, default_dims: &[5; 4], entry: |i| i.iter().sum::<f64>().ln() },
    Family {
        name: "sqrt5",
        symmetric: true,
        default_dims: &[4; 5],
        entry: |i| i.iter().map(|x| x * x).sum::<f64>().sqrt(),
    },
    Family {
        name: "logexp6",
        symmetric: true,
        default_dims: &[4; 6],
        entry: |i| (i.iter().product::<f64>() + i.iter().sum::<f64>().exp()).ln(),
    },
    Family {
        name: "expsum3",
        symmetric: false,
        default_dims: &[7, 6, 5],
        entry: |i| 1.0 / (i[0].exp() + (i[1] * i[1]).exp() + i[2].powi(3).exp()),
    },
    Family { name: "cos3", symmetric: false, default_dims: &[5, 4, 4], entry: |i| (i[0] - i[1] - i[2]).cos() },
    Family {
        name: "recip4",
        symmetric: false,
        default_dims: &[8, 7, 6, 5],
        entry: |i| 1.0 / (1.0 + i[0] + 2.0 * i[1] + 3.0 * i[2] + 4.0 * i[3]),
    },
    Family {
        name: "coscross4",
        symmetric: false,
        default_dims: &[5, 5, 4, 4],
        entry: |i| (i[0] + i[1] - i[2] - i[3]).cos() - 1e-3 * i.iter().product::<f64>().sin(),
    },
    Family {
        name: "arctan5",
        symmetric: false,
        default_dims: &[9, 8, 7, 6, 5],
        entry: |i| (i[0] * i[1].powi(2) * i[2].powi(3) * i[3].powi(4) * i[4].powi(5)).atan(),
    },
    Family {
        name: "logexp6ns",
        symmetric: false,
        default_dims: &[5, 5, 5, 4, 4, 4],
        entry: |i| log1p_exp(i[0] * i[1] * i[2] + i[3] * i[4] * i[5]),
    },
];

pub fn family(name: &str) -> Result<&'static Family> {
    FAMILIES.iter().find(|f| f.name == name).ok_or_else(|| {
        let names: Vec<&str> = FAMILIES.iter().map(|f| f.name).collect();
        CliError::Usage(format!("unknown tensor family {name}; expected one of {}", names.join(", ")))
    })
}

/// Builds a named example tensor. `dims` overrides the default size: a single
/// `n` (or `m` equal values) for symmetric families, one size per mode otherwise.
pub fn paper_tensor(name: &str, dims: Option<&[usize]>) -> Result<Tensor> {
    let fam = family(name)?;
    let m = fam.order();
    let dims: Vec<usize> = match dims {
        None => fam.default_dims.to_vec(),
        Some(d) if fam.symmetric && (d.len() == 1 || (d.len() == m && d.iter().all(|&x| x == d[0]))) => vec![d[0]; m],
        Some(d) if !fam.symmetric && d.len() == m => d.to_vec(),
        Some(d) => return Err(CliError::Usage(format!("{name} has order {m}; sizes {d:?} do not fit"))),
    };
    let eval = |idx: &[usize]| {
        let one_based: Vec<f64> = idx.iter().map(|&i| (i + 1) as f64).collect();
        C64::new((fam.entry)(&one_based), 0.0)
    };
    Ok(if fam.symmetric {
        Tensor::Sym(SymTensor::from_index_fn(dims[0], m, eval)?)
    } else {
        Tensor::Dense(DenseTensor::from_fn(&dims, eval)?)
    })
}

/// `sum_i u_i^{⊗m}` for the given vectors.
pub fn sym_from_vectors(vectors: &[Vec<C64>], m: usize) -> Result<SymTensor> {
    let n = vectors.first().map_or(0, |v| v.len());
    let mut t = SymTensor::zeros(n, m)?;
    for v in vectors {
        t = t.add(&sym_power(v, m)?)?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_instances_equal_the_planted_tensor() {
        let g = gen_random_sym(4, 3, 2, 0.0, 1).unwrap();
        assert_eq!(g.f, g.r);
        let g = gen_random_ns(&[3, 3, 2], 2, 0.0, 1).unwrap();
        assert_eq!(g.f, g.r);
    }

    #[test]
    fn noise_has_the_requested_norm() {
        for eps in [1e-1, 1e-3] {
            let g = gen_random_sym(5, 3, 2, eps, 7).unwrap();
            assert!((g.f.distance(&g.r).unwrap() - eps).abs() <= 1e-12);
            let g = gen_random_ns(&[4, 3, 3], 2, eps, 7).unwrap();
            assert!((g.f.distance(&g.r).unwrap() - eps).abs() <= 1e-12);
        }
    }

    #[test]
    fn generation_is_repeatable() {
        let a = gen_random_sym(5, 4, 3, 1e-2, 99).unwrap();
        let b = gen_random_sym(5, 4, 3, 1e-2, 99).unwrap();
        assert!(a
            .f
            .entries()
            .iter()
            .zip(b.f.entries())
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
        let a = gen_random_ns(&[3, 4, 5], 2, 1e-2, 99).unwrap();
        let b = gen_random_ns(&[3, 4, 5], 2, 1e-2, 99).unwrap();
        assert_eq!(a.f, b.f);
        assert_ne!(a.f, gen_random_ns(&[3, 4, 5], 2, 1e-2, 100).unwrap().f);
    }

    #[test]
    fn relerr_edge_values() {
        let g = gen_random_ns(&[3, 3, 3], 2, 1e-2, 3).unwrap();
        let (f, r, e) = (Tensor::Dense(g.f), Tensor::Dense(g.r), Tensor::Dense(g.e));
        assert!((relerr(&f, &r, &e).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(relerr(&f, &f, &e).unwrap(), 0.0);
        let zero = Tensor::Dense(DenseTensor::zeros(&[3, 3, 3]).unwrap());
        assert!(relerr(&f, &r, &zero).is_err());
    }

    #[test]
    fn family_entries() {
        let sin = paper_tensor("sin3", None).unwrap().into_dense();
        assert_eq!(sin.dims(), &[6, 6, 6]);
        assert!((sin.get(&[0, 0, 0]).re - 3f64.sin()).abs() < 1e-15);
        assert!((sin.get(&[0, 1, 0]).re - 4f64.sin()).abs() < 1e-15);
        let rec = paper_tensor("recip3", None).unwrap().into_dense();
        assert!((rec.get(&[0, 0, 0]).re - 1.0 / 3.0).abs() < 1e-15);
        let cos = paper_tensor("cos3", None).unwrap().into_dense();
        assert!((cos.get(&[0, 0, 0]).re - 0.5403023058681398).abs() < 1e-15);
        assert!((cos.get(&[4, 0, 3]).re - 0f64.cos()).abs() < 1e-15);
        let le = paper_tensor("logexp6ns", None).unwrap().into_dense();
        let x: f64 = 5.0 * 5.0 * 5.0 + 4.0 * 4.0 * 4.0;
        assert!((le.get(&[4, 4, 4, 3, 3, 3]).re - (1.0 + x.exp()).ln()).abs() < 1e-12 * x);
        assert_eq!(paper_tensor("sin3", Some(&[4])).unwrap().dims(), vec![4, 4, 4]);
        assert!(paper_tensor("cos3", Some(&[4, 4])).is_err());
        assert!(paper_tensor("nope", None).is_err());
        for fam in FAMILIES {
            let t = paper_tensor(fam.name, None).unwrap();
            assert!(t.norm().is_finite() && t.norm() > 0.0, "{}", fam.name);
        }
    }
}
