mod common;

use common::*;
use gentensor_core::nonsym::{
    assemble_system_ns, build_mjk, extract_modes, mode_permute, rank1_closed_form_ns, solve_first_mode,
    solve_generating_matrix_ns, Tuple,
};
use gentensor_core::tensor::outer_product;
use gentensor_core::{approx_nonsym, ApproxOptions, DenseTensor, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn term(t: &Tuple) -> DenseTensor {
    let refs: Vec<&[C64]> = t.iter().map(|v| v.as_slice()).collect();
    outer_product(&refs).unwrap()
}

#[test]
fn permutation_entries_follow_the_modes() {
    let mut g = rng(3);
    let f = DenseTensor::from_fn(&[3, 4, 2], |_| gauss(&mut g)).unwrap();
    let (p, perm) = mode_permute(&f).unwrap();
    assert_eq!(perm, vec![1, 0, 2]);
    for i in 0..4 {
        for j in 0..3 {
            for k in 0..2 {
                assert_eq!(p.get(&[i, j, k]), f.get(&[j, i, k]));
            }
        }
    }
}

#[test]
fn system_entries_match_direct_indexing() {
    let mut g = rng(5);
    let f = DenseTensor::from_fn(&[3, 3, 2], |_| gauss(&mut g)).unwrap();
    let r = 2;
    for j in 1..3 {
        let (a, b) = assemble_system_ns(&f, j, r).unwrap();
        let other = 3 - j; // the remaining mode besides 0 and j
        assert_eq!(a.rows(), f.dims()[other]);
        for mu in 0..f.dims()[other] {
            let mut idx = [0usize; 3];
            idx[other] = mu;
            for l in 0..r {
                idx[0] = l;
                idx[j] = 0;
                assert_eq!(a[(mu, l)], f.get(&idx));
            }
            for k in 1..f.dims()[j] {
                for i in 0..r {
                    idx[0] = i;
                    idx[j] = k;
                    assert_eq!(b[(mu, (k - 1) * r + i)], f.get(&idx));
                }
            }
        }
    }
    assert!(assemble_system_ns(&f, 1, 4).is_err());
}

#[test]
fn eigen_relations_on_exact_instances() {
    let dims = [6, 5, 4];
    let r = 3;
    let (f, tuples) = random_ns(&mut rng(17), &dims, r);
    let gm = solve_generating_matrix_ns(&f, r, 1e-12).unwrap();
    let mut family = Vec::new();
    for j in 1..3 {
        for k in 1..dims[j] {
            let m = build_mjk(&gm, j, k).unwrap();
            for t in &tuples {
                let w: Vec<C64> = t[0][..r].to_vec();
                let mw = m.matvec(&w).unwrap();
                let lam = t[j][k] / t[j][0];
                let err: f64 = mw.iter().zip(&w).map(|(p, q)| (p - lam * q).norm_sqr()).sum::<f64>().sqrt();
                let scale: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!(err <= 1e-8 * scale * (1.0 + lam.norm()), "j={j} k={k}: {err}");
            }
            family.push(m);
        }
    }
    for a in &family {
        for b in &family {
            let d = a.matmul(b).unwrap().sub(&b.matmul(a).unwrap()).unwrap();
            assert!(d.frobenius_norm() <= 1e-8 * a.frobenius_norm() * b.frobenius_norm());
        }
    }
    // The Schur diagonal lists the weighted sums of the normalized entries.
    let pairs: Vec<(usize, usize)> = (1..3).flat_map(|j| (1..dims[j]).map(move |k| (j, k))).collect();
    let xi: Vec<f64> = (1..=pairs.len()).map(|i| i as f64).collect();
    let total: f64 = xi.iter().sum();
    let xi: Vec<f64> = xi.iter().map(|x| x / total).collect();
    let mut combo = gentensor_core::ComplexMatrix::zeros(r, r);
    for (m, &w) in family.iter().zip(&xi) {
        combo.axpy(c(w, 0.0), m).unwrap();
    }
    let eig = gentensor_core::linalg::schur(&combo).unwrap().eigenvalues();
    let expect: Vec<C64> =
        tuples.iter().map(|t| pairs.iter().zip(&xi).map(|(&(j, k), &w)| t[j][k] / t[j][0] * w).sum()).collect();
    assert!(multiset_distance(&eig, &expect) < 1e-8);
}

#[test]
fn rank_one_modes_and_first_mode() {
    let a = vec![c(2.0, 0.0), c(1.0, -1.0), c(0.0, 3.0)];
    let b = vec![c(1.0, 0.0), c(0.5, 0.5)];
    let d = vec![c(1.0, 0.0), c(-1.0, 2.0), c(0.25, 0.0)];
    let f = outer_product(&[&a, &b, &d]).unwrap();
    let gm = solve_generating_matrix_ns(&f, 1, 1e-12).unwrap();
    let (modes, _) = extract_modes(&gm, &[1.0 / 3.0; 3]).unwrap();
    assert!(modes[0][0].iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-12));
    assert!(modes[0][1].iter().zip(&d).all(|(p, q)| (p - q).norm() < 1e-12));
    let z = solve_first_mode(&f, &modes, 1e-12).unwrap();
    assert!(z[0].iter().zip(&a).all(|(p, q)| (p - q).norm() < 1e-12));

    // Duplicate tuples split the first mode evenly.
    let z = solve_first_mode(&f, &[vec![b.clone(), d.clone()], vec![b, d]], 1e-12).unwrap();
    assert!(z[0].iter().zip(&a).all(|(p, q)| (p * 2.0 - q).norm() < 1e-12));
}

#[test]
fn exact_recovery_small_instances() {
    for (seed, (dims, r)) in
        [(vec![5, 4, 4], 3), (vec![10, 10, 10], 5), (vec![6, 5, 4, 3], 4), (vec![8, 3, 3], 3)].into_iter().enumerate()
    {
        let (f, tuples) = random_ns(&mut rng(40 + seed as u64), &dims, r);
        let out = approx_nonsym(&f, r, &ApproxOptions::without_refine()).unwrap();
        assert!(out.residual_gp <= 1e-8 * f.norm(), "{dims:?}: {}", out.residual_gp / f.norm());
        let found: Vec<DenseTensor> = out.tuples.iter().map(term).collect();
        let truth: Vec<DenseTensor> = tuples.iter().map(term).collect();
        assert!(term_matching(&found, &truth, |x, y| x.distance(y).unwrap()) <= 1e-8 * f.norm());
    }
}

#[test]
fn permutation_equivariance() {
    let (f, _) = random_ns(&mut rng(9), &[5, 5, 4], 3);
    let g = f.permute_modes(&[1, 0, 2]).unwrap();
    let out_f = approx_nonsym(&f, 3, &ApproxOptions::without_refine()).unwrap();
    let out_g = approx_nonsym(&g, 3, &ApproxOptions::without_refine()).unwrap();
    let back = out_g.x_gp.permute_modes(&[1, 0, 2]).unwrap();
    assert!(back.distance(&out_f.x_gp).unwrap() <= 1e-8 * f.norm());
}

#[test]
fn closed_form_matches_pipeline_at_rank_one() {
    for seed in 0..20u64 {
        let mut g = rng(300 + seed);
        let m = 3 + seed as usize % 2;
        // First mode largest so both paths use the same mode order.
        let dims: Vec<usize> = (0..m).map(|t| if t == 0 { 5 } else { 2 + (seed as usize + t) % 3 }).collect();
        let f = DenseTensor::from_fn(&dims, |_| gauss(&mut g)).unwrap();
        let closed = rank1_closed_form_ns(&f).unwrap();
        let out = approx_nonsym(&f, 1, &ApproxOptions::without_refine()).unwrap();
        for (p, q) in closed.iter().zip(&out.tuples[0]) {
            for (x, y) in p.iter().zip(q) {
                assert!((x - y).norm() <= 1e-10 * (1.0 + x.norm()), "seed {seed}");
            }
        }
    }
}

#[test]
fn refinement_never_increases_the_residual() {
    for seed in 0..4u64 {
        let mut g = rng(700 + seed);
        let f = DenseTensor::from_fn(&[4, 3, 3], |_| gauss(&mut g)).unwrap();
        for r in 1..=3 {
            let out = approx_nonsym(&f, r, &ApproxOptions::default()).unwrap();
            let refined = out.refined.as_ref().unwrap();
            assert!(refined.residual_opt <= out.residual_gp + 1e-12);
        }
    }
}

#[test]
fn zero_tensor_gives_zero_generating_matrix() {
    let f = DenseTensor::zeros(&[3, 3, 3]).unwrap();
    let gm = solve_generating_matrix_ns(&f, 2, 1e-12).unwrap();
    assert!(gm.g.data().iter().all(|z| z.norm() == 0.0));
}
