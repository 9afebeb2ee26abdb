mod common;

use linsys_quanta::classical::{compute_modes, fit_coefficients, reflexivity_defect, stability_matrix, trajectory};
use linsys_quanta::hermite::{evaluate, generating_oracle, rodrigues_oracle};
use linsys_quanta::linalg::{c, max_abs_c, CMatrix};
use linsys_quanta::packet::{propagate, PacketState};
use linsys_quanta::riccati::{
    integrate_linear_pair, integrate_riccati, k_from_pair, select_modes, GeneralRiccati, LinearPair,
};
use linsys_quanta::states::{build_basis, energy_of, expand_coherent, CoherentState};
use linsys_quanta::{CoefficientVector, HermiteContext, MultiIndex};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn shape(seed: u64, n: usize) -> CMatrix {
    let mut rng = common::rng(seed ^ 0x5eed);
    let b = common::random_matrix(&mut rng, n, 1.0);
    let re = b.transpose() * &b + DMatrix::identity(n, n) * 0.5;
    let im = common::random_symmetric(&mut rng, n, 0.5);
    CMatrix::from_fn(n, n, |i, j| c(re[(i, j)], im[(i, j)]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn modes_come_in_negated_pairs(seed in any::<u64>(), n in 1usize..=4) {
        let nf = common::random_stable(&mut common::rng(seed), n);
        let ms = compute_modes(&nf).unwrap();
        prop_assert_eq!(reflexivity_defect(&stability_matrix(&nf)), 0.0);
        for k in 0..2 * n {
            let partner = ms.pairing[k];
            prop_assert_eq!(ms.pairing[partner], k);
            prop_assert!((ms.freqs[k] + ms.freqs[partner]).norm() <= 1e-9 * ms.freqs[k].norm().max(1.0));
            prop_assert!(ms.residual(k) <= 1e-8);
        }
    }

    #[test]
    fn linear_pair_reproduces_riccati_path(seed in any::<u64>(), n in 1usize..=4) {
        let nf = common::random_stable(&mut common::rng(seed), n);
        let k0 = shape(seed, n);
        let direct = integrate_riccati(&k0, &nf, (0.0, 1.0), 1e-3).unwrap();
        let pair = integrate_linear_pair(&LinearPair::from_shape(&k0, nf.mass), &nf, (0.0, 1.0), 1e-3).unwrap();
        let (_, k1) = direct.last().unwrap();
        let kp = k_from_pair(&pair.last().unwrap().1, nf.mass).unwrap();
        prop_assert!(max_abs_c(&(k1 - kp)) <= 1e-8);
    }

    #[test]
    fn general_riccati_pair_matches_direct_flow(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = common::rng(seed);
        let alpha = c(0.3, -1.0);
        let w = CMatrix::from_fn(n, n, |_, _| c(rand::RngExt::random_range(&mut rng, -0.5..0.5), 0.0));
        let u = common::random_symmetric(&mut rng, n, 1.0).map(|x| c(0.0, x));
        let gr = GeneralRiccati { alpha, w, u };
        let k0 = shape(seed, n) * c(0.3, 0.0);
        let direct = gr.integrate(&k0, 0.5, 1e-3).unwrap();
        let pair = gr.integrate_pair(&k0, 0.5, 1e-3).unwrap();
        prop_assert!(max_abs_c(&(direct - pair)) <= 1e-8);
    }

    #[test]
    fn hermite_recurrence_agrees_with_oracles(
        seed in any::<u64>(),
        n in 1usize..=3,
        x in proptest::collection::vec((-1.5f64..1.5, -0.5f64..0.5), 3),
    ) {
        let mut rng = common::rng(seed);
        let g = common::random_symmetric(&mut rng, n, 2.0);
        let ctx = HermiteContext::real(&g).unwrap();
        let x: Vec<Complex64> = x[..n].iter().map(|&(a, b)| c(a, b)).collect();
        for idx in MultiIndex::up_to_total(n, 5) {
            let rec = evaluate(&ctx, &idx, &x).unwrap();
            let scale = rec.norm().max(1.0);
            prop_assert!((rec - generating_oracle(&ctx, &idx, &x).unwrap()).norm() <= 1e-10 * scale);
            prop_assert!((rec - rodrigues_oracle(&ctx, &idx, &x).unwrap()).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn spectrum_basis_relations_hold(seed in any::<u64>(), n in 1usize..=3) {
        let nf = common::random_stable(&mut common::rng(seed), n);
        let ms = compute_modes(&nf).unwrap();
        let g = select_modes(&ms, nf.mass).unwrap();
        prop_assert!(g.shape.residual <= 1e-8);
        let b = build_basis(&ms, &g.shape.selection, &g.shape.k0, nf.mass, 1.0).unwrap();
        prop_assert!(b.relations.max() <= 1e-8);
        let e0 = energy_of(&b, &MultiIndex::zero(n)).unwrap();
        for i in 0..n {
            let e1 = energy_of(&b, &MultiIndex::unit(n, i)).unwrap();
            prop_assert!((e1 - e0 - b.freqs[i].re).abs() <= 1e-10 * e1.abs().max(1.0));
        }
    }

    #[test]
    fn coherent_center_follows_classical_motion(seed in any::<u64>(), n in 1usize..=3, t in 0.0f64..20.0) {
        let nf = common::random_stable(&mut common::rng(seed), n);
        let ms = compute_modes(&nf).unwrap();
        let g = select_modes(&ms, nf.mass).unwrap();
        let b = build_basis(&ms, &g.shape.selection, &g.shape.k0, nf.mass, 1.0).unwrap();
        let r0 = DVector::from_fn(n, |i, _| 0.4 - 0.3 * i as f64);
        let p0 = DVector::from_fn(n, |i, _| 0.2 * i as f64 - 0.1);
        let lambdas = fit_coefficients(&ms, &r0, &p0).unwrap();
        let cs = CoherentState::new(lambdas.clone(), 0.0);
        let (r, p) = cs.center(&b, t).unwrap();
        let (rc, pc) = trajectory(&ms, &lambdas, t).unwrap();
        prop_assert!((r - rc).amax().max((p - pc).amax()) <= 1e-9);
    }

    #[test]
    fn coherent_coefficients_form_a_ladder(seed in any::<u64>(), t in 0.0f64..5.0) {
        let nf = common::random_stable(&mut common::rng(seed), 2);
        let ms = compute_modes(&nf).unwrap();
        let g = select_modes(&ms, nf.mass).unwrap();
        let b = build_basis(&ms, &g.shape.selection, &g.shape.k0, nf.mass, 1.0).unwrap();
        let cs = CoherentState::new(CoefficientVector::new(vec![c(0.3, 0.1), c(-0.2, 0.25)]), 0.0);
        let coeffs = expand_coherent(&cs, &b, 6, t).unwrap();
        let z = cs.z(&b, t).unwrap();
        for (idx, v) in &coeffs {
            if idx.0[0] == 0 {
                continue;
            }
            let mut lower = idx.clone();
            lower.0[0] -= 1;
            let ratio = v / coeffs[&lower];
            prop_assert!((ratio - z[0] / idx.0[0] as f64).norm() <= 1e-12 * ratio.norm().max(1.0));
        }
    }

    #[test]
    fn packet_norm_is_conserved(seed in any::<u64>(), n in 1usize..=3) {
        let nf = common::random_stable(&mut common::rng(seed), n);
        let s0 = PacketState::new(shape(seed, n), DVector::zeros(n), DVector::from_element(n, 0.5), 1.0, nf.mass).unwrap();
        let path = propagate(&s0, &nf, (0.0, 2.0), 1e-3).unwrap();
        let first = s0.norm_invariant();
        for (_, s) in path.iter().step_by(100) {
            prop_assert!((s.norm_invariant() - first).abs() <= 1e-8 * first);
        }
    }

    #[test]
    fn shape_path_ignores_drive(seed in any::<u64>(), n in 1usize..=3) {
        let base = common::random_stable(&mut common::rng(seed), n);
        let driven = base.clone().with_drive(linsys_quanta::TimeSignal::sinusoid(&vec![0.7; n], 1.1, 0.2)).unwrap();
        let s0 = PacketState::new(shape(seed, n), DVector::zeros(n), DVector::zeros(n), 1.0, base.mass).unwrap();
        let a = propagate(&s0, &base, (0.0, 1.0), 1e-2).unwrap();
        let b = propagate(&s0, &driven, (0.0, 1.0), 1e-2).unwrap();
        for ((_, x), (_, y)) in a.iter().zip(&b) {
            prop_assert!(max_abs_c(&(&x.k - &y.k)) <= 1e-12);
        }
    }
}
