mod common;

use common::*;
use gentensor_core::rank::{catalecticant_ns, catalecticant_sym, spectrum, Split, DEFAULT_FLOOR, DEFAULT_GAP_FACTOR};
use gentensor_core::refine::{refine_nonsym, refine_sym, NsResidual, ResidualMap, SymResidual};
use gentensor_core::{estimate_rank, DenseTensor, RefineOptions, SymTensor, SymWeighting, C64};
use proptest::prelude::*;
use rand::Rng;

/// Largest entrywise gap between the analytic Jacobian and central differences.
fn jacobian_gap<M: ResidualMap>(map: &M, x: &[f64]) -> f64 {
    let (p, q) = (map.num_params(), map.num_residuals());
    let mut jac = vec![0.0; p * q];
    map.jacobian(x, &mut jac);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let (mut plus, mut minus) = (vec![0.0; q], vec![0.0; q]);
    for k in 0..p {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        map.residuals(&xp, &mut plus);
        map.residuals(&xm, &mut minus);
        for row in 0..q {
            let fd = (plus[row] - minus[row]) / (2.0 * h);
            worst = worst.max((fd - jac[row * p + k]).abs() / (1.0 + fd.abs()));
        }
    }
    worst
}

fn random_params<R: Rng>(g: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| gauss(g).re).collect()
}

fn residual_norm<M: ResidualMap>(map: &M, x: &[f64]) -> f64 {
    let mut out = vec![0.0; map.num_residuals()];
    map.residuals(x, &mut out);
    out.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn unpack(x: &[f64]) -> Vec<C64> {
    x.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

#[test]
fn weighted_sym_residual_is_the_full_tensor_norm() {
    let mut g = rng(31);
    let f = SymTensor::from_fn(3, 3, |_| gauss(&mut g)).unwrap();
    let x = random_params(&mut g, 2 * 2 * 3);
    let u = unpack(&x);
    let mut model = SymTensor::zeros(3, 3).unwrap();
    for v in u.chunks_exact(3) {
        model.add_power(C64::new(1.0, 0.0), v).unwrap();
    }
    let diff: f64 =
        brute_dense(&model).iter().zip(brute_dense(&f)).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let weighted = residual_norm(&SymResidual::new(&f, 2, SymWeighting::Multiplicity), &x);
    assert!((weighted - diff).abs() <= 1e-12 * diff);
    let compact: f64 = model.entries().iter().zip(f.entries()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let uniform = residual_norm(&SymResidual::new(&f, 2, SymWeighting::Uniform), &x);
    assert!((uniform - compact).abs() <= 1e-12 * compact);
}

#[test]
fn refinement_from_a_perturbed_exact_start_converges() {
    let mut g = rng(8);
    let (f, us) = random_sym(&mut g, 4, 3, 2);
    let start: Vec<Vec<C64>> = us.iter().map(|u| u.iter().map(|z| z + gauss(&mut g) * 1e-3).collect()).collect();
    let out = refine_sym(&f, &start, &RefineOptions::default()).unwrap();
    assert!(out.residual <= 1e-8 * f.norm(), "{:?}", out.status);
    assert!(out.residual <= out.initial_residual);

    let (t, tuples) = random_ns(&mut g, &[4, 3, 3], 2);
    let start: Vec<Vec<Vec<C64>>> = tuples
        .iter()
        .map(|tu| tu.iter().map(|v| v.iter().map(|z| z + gauss(&mut g) * 1e-3).collect()).collect())
        .collect();
    let out = refine_nonsym(&t, &start, &RefineOptions::default()).unwrap();
    assert!(out.residual <= 1e-8 * t.norm(), "{:?}", out.status);
}

#[test]
fn refinement_rejects_mismatched_starts() {
    let f = SymTensor::zeros(3, 3).unwrap();
    assert!(refine_sym(&f, &[], &RefineOptions::default()).is_err());
    assert!(refine_sym(&f, &[vec![C64::new(1.0, 0.0); 2]], &RefineOptions::default()).is_err());
    let t = DenseTensor::zeros(&[2, 2, 2]).unwrap();
    let bad = vec![vec![vec![C64::new(1.0, 0.0); 2]; 2]];
    assert!(refine_nonsym(&t, &bad, &RefineOptions::default()).is_err());
}

#[test]
fn catalecticant_reveals_generic_rank() {
    // n = 4, m = 4: the flattening is 10 x 10.
    for trial in 0..20u64 {
        let r = 1 + trial as usize % 8;
        let (f, _) = random_sym(&mut rng(900 + trial), 4, 4, r);
        let report = spectrum(&catalecticant_sym(&f).unwrap(), DEFAULT_GAP_FACTOR, DEFAULT_FLOOR).unwrap();
        assert_eq!(report.shape, Some((10, 10)));
        assert_eq!(report.suggested_rank, Some(r), "trial {trial}: {:?}", report.singular_values);
    }
    for trial in 0..20u64 {
        // The default flattening is 15 x 12, so ranks up to 4 stay below full.
        let r = 1 + trial as usize % 4;
        let (f, _) = random_ns(&mut rng(1900 + trial), &[5, 4, 3, 3], r);
        let report = spectrum(&catalecticant_ns(&f, None).unwrap(), DEFAULT_GAP_FACTOR, DEFAULT_FLOOR).unwrap();
        assert_eq!(report.shape, Some((15, 12)));
        assert_eq!(report.suggested_rank, Some(r), "trial {trial}: {:?}", report.singular_values);
    }
}

#[test]
fn flattenings_follow_the_entries() {
    let mut g = rng(4);
    let f = DenseTensor::from_fn(&[2, 3, 2], |_| gauss(&mut g)).unwrap();
    let split: Split = "1,3|2".parse().unwrap();
    let mat = catalecticant_ns(&f, Some(&split)).unwrap();
    assert_eq!((mat.rows(), mat.cols()), (4, 3));
    for i in 0..2 {
        for k in 0..2 {
            for j in 0..3 {
                assert_eq!(mat[(i * 2 + k, j)], f.get(&[i, j, k]));
            }
        }
    }
    assert_eq!(split.to_string(), "1,3|2");
    assert!("1|1".parse::<Split>().is_err());
}

#[test]
fn rank_estimate_edge_cases() {
    assert_eq!(estimate_rank(&[5.0], 100.0, 1e-10).unwrap().suggested_rank, Some(1));
    assert_eq!(estimate_rank(&[0.0, 0.0], 100.0, 1e-10).unwrap().suggested_rank, None);
    assert_eq!(estimate_rank(&[1.0, 0.9, 0.8], 100.0, 1e-10).unwrap().suggested_rank, None);
    let r = estimate_rank(&[3.0, 2.0, 0.0, 0.0], 100.0, 1e-10).unwrap();
    assert_eq!(r.suggested_rank, Some(2));
    assert_eq!(r.gap_ratios, vec![1.5, f64::INFINITY, 1.0]);
    assert!(estimate_rank(&[], 100.0, 1e-10).is_err());
    assert!(estimate_rank(&[1.0, 2.0], 100.0, 1e-10).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn sym_jacobian_matches_finite_differences(seed in any::<u64>(), n in 2usize..=4, uniform in any::<bool>()) {
        let mut g = rng(seed);
        let f = SymTensor::from_fn(n, 3, |_| gauss(&mut g)).unwrap();
        let weighting = if uniform { SymWeighting::Uniform } else { SymWeighting::Multiplicity };
        let map = SymResidual::new(&f, 2, weighting);
        let x = random_params(&mut g, map.num_params());
        prop_assert!(jacobian_gap(&map, &x) <= 1e-6);
    }

    #[test]
    fn ns_jacobian_matches_finite_differences(seed in any::<u64>(), a in 2usize..=4, b in 2usize..=4, c in 2usize..=4) {
        let mut g = rng(seed);
        let f = DenseTensor::from_fn(&[a, b, c], |_| gauss(&mut g)).unwrap();
        let map = NsResidual::new(&f, 2);
        let x = random_params(&mut g, map.num_params());
        prop_assert!(jacobian_gap(&map, &x) <= 1e-6);
    }

    #[test]
    fn catalecticant_is_additive(seed in any::<u64>(), n in 2usize..=4, m in 2usize..=4) {
        let mut g = rng(seed);
        let f = SymTensor::from_fn(n, m, |_| gauss(&mut g)).unwrap();
        let h = SymTensor::from_fn(n, m, |_| gauss(&mut g)).unwrap();
        let lhs = catalecticant_sym(&f.add(&h).unwrap()).unwrap();
        let mut rhs = catalecticant_sym(&f).unwrap();
        rhs.axpy(C64::new(1.0, 0.0), &catalecticant_sym(&h).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().frobenius_norm() <= 1e-14 * (1.0 + lhs.frobenius_norm()));
    }

    #[test]
    fn sym_refinement_is_monotone(seed in any::<u64>()) {
        let mut g = rng(seed);
        let f = SymTensor::from_fn(3, 3, |_| gauss(&mut g)).unwrap();
        let start: Vec<Vec<C64>> = (0..2).map(|_| gauss_vec(&mut g, 3)).collect();
        let out = refine_sym(&f, &start, &RefineOptions { max_iterations: 50, ..RefineOptions::default() }).unwrap();
        prop_assert!(out.residual <= out.initial_residual);
    }
}
