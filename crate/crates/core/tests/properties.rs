//! Property tests of structural invariants against brute-force references.

mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use nqs::bm::{BmState, DbmState, RbmState};
use nqs::circuit::{Circuit, DbmCircuitGraph, Gate, InitialState, QubitInit};
use nqs::entanglement::{reduced_density, renyi_entropy, schmidt_rank, Bipartition};
use nqs::exact::{ground_state_exact, kl_divergence, materialize, rayleigh_quotient, DenseState};
use nqs::hamiltonian::{build_j1j2, build_tfim, Boundary};
use nqs::net::{activate, smoothed_step, Activation};
use nqs::tensor::{mps_amplitude, rbm_to_mps, DEFAULT_MAX_BOND};
use nqs::tomo::{density_matrix, PurifiedRbm};
use nqs::vmc::{estimate_energy, sample, Estimator, SamplerOptions};
use nqs::{Convention, NqsState, SpinConfiguration, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn convention(flag: bool) -> Convention {
    if flag {
        Convention::PlusMinusOne
    } else {
        Convention::ZeroOne
    }
}

fn cfg(idx: usize, n: usize, conv: Convention) -> SpinConfiguration {
    SpinConfiguration::from_index(idx, n, conv)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn smoothed_step_is_lipschitz(a in 0.05f64..5.0, x in -6.0f64..6.0, h in 1e-6f64..0.5) {
        let d = (smoothed_step(a, x + h).unwrap() - smoothed_step(a, x).unwrap()).abs();
        prop_assert!(d <= 2.0 / a * h * (1.0 + 1e-12));
    }

    #[test]
    fn logistic_reflection(re in -8.0f64..8.0, im in -3.0f64..3.0) {
        let z = C64::new(re, im);
        if let (Ok(p), Ok(q)) = (activate(Activation::Logistic, z), activate(Activation::Logistic, -z)) {
            prop_assert!((p + q - C64::new(1.0, 0.0)).norm() <= 1e-12 * (1.0 + p.norm() + q.norm()));
        }
    }

    #[test]
    fn union_amplitude_is_product(seed in any::<u64>(), na in 1usize..4, nb in 1usize..4, vc: bool, hc: bool) {
        let mut r = rng(seed);
        let (vc, hc) = (convention(vc), convention(hc));
        let a = RbmState::random(na, 2, 0.5, &mut r).with_conventions(vc, hc);
        let b = RbmState::random(nb, 3, 0.5, &mut r).with_conventions(vc, hc);
        let u = RbmState::disjoint_union(&a, &b).unwrap();
        let ba = BmState::random(na, 2, 0.4, &mut r);
        let bb = BmState::random(nb, 2, 0.4, &mut r);
        let bu = BmState::disjoint_union(&ba, &bb).unwrap();
        let da = DbmState::random(na, 2, 1, 0.4, &mut r);
        let db = DbmState::random(nb, 1, 2, 0.4, &mut r);
        let du = DbmState::disjoint_union(&da, &db).unwrap();
        for ia in 0..1usize << na {
            for ib in 0..1usize << nb {
                let (va, vb) = (bits(ia, na), bits(ib, nb));
                let joint = [va.clone(), vb.clone()].concat();
                prop_assert!(close(rbm_amplitude(&u, &joint), rbm_amplitude(&a, &va) * rbm_amplitude(&b, &vb), 1e-10));
                let v = |bs: &[u8]| SpinConfiguration::new(bs.to_vec(), Convention::ZeroOne);
                prop_assert!(close(bu.amplitude(&v(&joint)).unwrap(), ba.amplitude(&v(&va)).unwrap() * bb.amplitude(&v(&vb)).unwrap(), 1e-10));
                prop_assert!(close(du.amplitude(&v(&joint)).unwrap(), da.amplitude(&v(&va)).unwrap() * db.amplitude(&v(&vb)).unwrap(), 1e-10));
            }
        }
    }

    #[test]
    fn convention_maps_preserve_amplitudes(seed in any::<u64>(), n in 1usize..5, m in 1usize..4, vc: bool, hc: bool) {
        let s = RbmState::random(n, m, 0.5, &mut rng(seed)).with_conventions(convention(vc), convention(hc));
        let (h2, ch) = s.with_hidden_convention(convention(!hc));
        let (v2, cv) = s.with_visible_convention(convention(!vc));
        for i in 0..1usize << n {
            let b = bits(i, n);
            let want = rbm_amplitude(&s, &b);
            prop_assert!(close(ch.exp() * rbm_amplitude(&h2, &b), want, 1e-10));
            prop_assert!(close(cv.exp() * rbm_amplitude(&v2, &b), want, 1e-10));
        }
    }

    #[test]
    fn full_sum_energy_is_rayleigh_quotient(seed in any::<u64>(), n in 2usize..8, periodic: bool, which in 0usize..2) {
        let s = RbmState::random(n, n, 0.4, &mut rng(seed));
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let (h, dense) = if which == 0 {
            (build_tfim(n, 1.0, 0.8, boundary).unwrap(), spin_hamiltonian(&Spin::Tfim { j: 1.0, b: 0.8 }, n, periodic))
        } else {
            (build_j1j2(n, 1.0, 0.0, boundary).unwrap(), spin_hamiltonian(&Spin::J1J2 { j1: 1.0, j2: 0.0 }, n, periodic))
        };
        let e = estimate_energy(&s, &h, &Estimator::FullSum { magnetization: None }, 0).unwrap();
        let want = energy(&dense, &rbm_vector(&s));
        prop_assert!((e.mean.re - want).abs() <= 1e-10 * want.abs().max(1.0));
        prop_assert!(e.mean.im.abs() <= 1e-10 * want.abs().max(1.0));
    }

    #[test]
    fn variational_bound(seed in any::<u64>(), n in 2usize..9) {
        let h = build_tfim(n, 1.0, 1.0, Boundary::Periodic).unwrap();
        let (e0, _) = ground_state_exact(&h).unwrap();
        let s = RbmState::random(n, n, 0.5, &mut rng(seed));
        let q = rayleigh_quotient(&h, &materialize(&s, n).unwrap()).unwrap();
        prop_assert!(e0 <= q + 1e-10);
    }

    #[test]
    fn kl_is_nonnegative(p in proptest::collection::vec(0.01f64..1.0, 6), q in proptest::collection::vec(0.01f64..1.0, 6)) {
        let norm = |x: Vec<f64>| { let s: f64 = x.iter().sum(); x.into_iter().map(|y| y / s).collect::<Vec<_>>() };
        let (p, q) = (norm(p), norm(q));
        prop_assert!(kl_divergence(&p, &q).unwrap().value() >= -1e-15);
        prop_assert!(kl_divergence(&p, &p).unwrap().value().abs() <= 1e-15);
    }

    #[test]
    fn schmidt_rank_bound(seed in any::<u64>(), n in 2usize..9, m in 1usize..6, sparsity in 0.0f64..0.8) {
        let mut r = rng(seed);
        let mut s = RbmState::random(n, m, 1.0, &mut r);
        s.weights_mut().iter_mut().for_each(|w| if r.gen_bool(sparsity) { *w = C64::new(0.0, 0.0) });
        let state = materialize(&s, n).unwrap();
        for k in 1..n {
            let a: Vec<usize> = (0..k).collect();
            let cut = Bipartition::new(n, &a).unwrap();
            let rank = schmidt_rank(&state, &cut, 1e-10).unwrap();
            prop_assert!(rank <= 1 << crossing_units(&s, &a));
        }
    }

    #[test]
    fn mps_is_projectively_exact(seed in any::<u64>(), n in 2usize..9, window in 1usize..4, per in 1usize..3) {
        prop_assume!(window <= n);
        let s = RbmState::random_local(n, window, per, 0.5, &mut rng(seed)).unwrap();
        let conv = rbm_to_mps(&s, DEFAULT_MAX_BOND).unwrap();
        let ratios: Vec<C64> = (0..1usize << n)
            .map(|i| mps_amplitude(&conv.mps, &cfg(i, n, Convention::ZeroOne)).unwrap() / rbm_amplitude(&s, &bits(i, n)))
            .collect();
        for r in &ratios {
            prop_assert!(close(*r, ratios[0], 1e-10));
        }
        for (d, c) in conv.mps.bond_dims().iter().zip(&conv.crossings) {
            prop_assert!(*d <= 1 << c);
        }
    }

    #[test]
    fn circuit_bookkeeping(seed in any::<u64>(), n in 1usize..6, depth in 1usize..8, plus_mask in 0usize..64) {
        let mut r = rng(seed);
        let circuit = Circuit::random(n, depth, &mut r);
        let init: Vec<QubitInit> = (0..n).map(|q| if plus_mask >> q & 1 == 1 { QubitInit::Plus } else { QubitInit::Zero }).collect();
        let zeros = init.iter().filter(|i| **i == QubitInit::Zero).count();
        let g = DbmCircuitGraph::from_circuit(&circuit, &InitialState(init.clone())).unwrap();
        let single = circuit.gates().iter().filter(|g| matches!(g, Gate::H(_) | Gate::Z { .. })).count();
        prop_assert_eq!(g.hidden_units().len(), zeros + circuit.gates().len());
        prop_assert_eq!(g.vertices().len(), n + single);
        let mut expected = 0.5f64.powi(zeros as i32) * std::f64::consts::FRAC_1_SQRT_2.powi((n - zeros) as i32);
        for gate in circuit.gates() {
            match gate {
                Gate::Cz(..) => expected *= std::f64::consts::SQRT_2,
                Gate::CzPhase { .. } => expected *= 0.5,
                _ => {}
            }
        }
        prop_assert!((g.ledger().norm() - expected).abs() <= 1e-12 * expected);
        // amplitudes against an independent product with the final ledger
        let amps = g.amplitudes().unwrap();
        let ratio = amps.amplitudes()[0] / g.raw_amplitudes()[0];
        if g.raw_amplitudes()[0].norm() > 1e-12 {
            prop_assert!(close(ratio, g.ledger(), 1e-10));
        }
    }

    #[test]
    fn entropy_invariant_under_local_unitary(seed in any::<u64>(), n in 2usize..7, alpha in 0.3f64..4.0) {
        let mut r = rng(seed);
        let s = RbmState::random(n, n, 0.8, &mut r);
        let psi = materialize(&s, n).unwrap();
        let k = r.gen_range(1..n);
        let cut = Bipartition::left(n, k).unwrap();
        let before = renyi_entropy(&reduced_density(&psi, &cut).unwrap(), alpha).unwrap();
        // random unitary on site 0, inside A
        let (a, b, c): (f64, f64, f64) = (r.gen_range(0.0..6.3), r.gen_range(0.0..6.3), r.gen_range(0.0..1.57));
        let u = DMatrix::from_row_slice(2, 2, &[
            C64::from_polar(c.cos(), a), C64::from_polar(c.sin(), b),
            -C64::from_polar(c.sin(), -b), C64::from_polar(c.cos(), -a),
        ]);
        let dim = 1usize << n;
        let half = dim / 2;
        let old = psi.amplitudes();
        let rotated = DVector::from_fn(dim, |i, _| {
            let (bit, rest) = (i / half, i % half);
            u[(bit, 0)] * old[rest] + u[(bit, 1)] * old[half + rest]
        });
        let after = renyi_entropy(&reduced_density(&DenseState::new(rotated).unwrap(), &cut).unwrap(), alpha).unwrap();
        prop_assert!((before - after).abs() <= 1e-9);
    }

    #[test]
    fn purified_density_is_valid(seed in any::<u64>(), n in 1usize..4, m in 1usize..4, l in 0usize..3) {
        let p = PurifiedRbm::random(n, m, l, 0.8, &mut rng(seed)).unwrap();
        let rho = density_matrix(&p).unwrap();
        prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() <= 1e-10);
        prop_assert!((&rho - rho.adjoint()).norm() <= 1e-12);
        let min = rho.clone().symmetric_eigenvalues().min();
        prop_assert!(min >= -1e-12);
    }
}

#[test]
fn metropolis_uniform_target_passes_chi_square() {
    // zero parameters give |Psi|^2 uniform over 8 configurations
    let psi = RbmState::zeros(3, 2);
    let n_samples = 100_000;
    let (configs, _) = sample(&psi, n_samples, 17, &SamplerOptions::default()).unwrap();
    let mut counts = [0usize; 8];
    for v in &configs {
        counts[v.index()] += 1;
    }
    let expected = configs.len() as f64 / 8.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99th percentile of chi-square with 7 degrees of freedom
    assert!(chi2 < 18.475, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn sampled_energy_agrees_with_full_sum() {
    for (n, seed) in [(4, 1), (6, 2), (8, 3)] {
        let s = RbmState::random(n, n, 0.3, &mut rng(seed));
        let h = build_tfim(n, 1.0, 1.0, Boundary::Periodic).unwrap();
        let full = estimate_energy(&s, &h, &Estimator::FullSum { magnetization: None }, 0).unwrap();
        let est = Estimator::Sampled { n_samples: 20_000, options: SamplerOptions::default() };
        let sampled = estimate_energy(&s, &h, &est, seed).unwrap();
        let gap = (sampled.mean.re - full.mean.re).abs();
        assert!(gap <= 3.0 * sampled.stderr, "n={n}: gap {gap}, stderr {}", sampled.stderr);
    }
}

#[test]
fn seeded_sampling_is_reproducible() {
    let s = RbmState::random(5, 5, 0.5, &mut rng(4));
    let a = sample(&s, 500, 99, &SamplerOptions::default()).unwrap();
    let b = sample(&s, 500, 99, &SamplerOptions::default()).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1.to_bits(), b.1.to_bits());
}
