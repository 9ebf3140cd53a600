use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

use coexistence::coexistence::{
    decide_with_solver, efg_to_mn, mn_to_efg, sample_coexistent, sample_coexistent_with_witness,
};
use coexistence::harness::instances::mixed_instance;
use coexistence::hermitian::{conjugate, loewner_leq, orthocomplement, psd_project, CMatrix, Complex64};
use coexistence::preservers::{
    apply_standard, apply_trace_threshold, trace_threshold_inverse, StandardAutomorphismSpec, ThresholdFunction,
    TraceThresholdSpec,
};
use coexistence::random::{random_effect, random_effect_with, random_psd, random_unitary_with, rng_from_seed};
use coexistence::reconstruction::{phase_distance, reconstruct, verify_reconstruction};
use coexistence::strata::{canonical_form, classify_default, freedom_dimension};
use coexistence::{decide, Effect, HermitianMatrix, SolverConfig, StratumLabel, Verdict};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(PROPTEST_SEED), ..ProptestConfig::default() }
}

const PROPTEST_SEED: u64 = 0x5eed;

fn hermitian(seed: u64, n: usize) -> HermitianMatrix {
    let mut rng = rng_from_seed(seed);
    let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    HermitianMatrix::new((&g + g.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

fn effect(seed: u64, n: usize) -> Effect {
    random_effect(n, None, seed).unwrap()
}

fn threshold(power: bool, n: usize) -> TraceThresholdSpec {
    let f = if power { ThresholdFunction::Power { alpha: 2.0 } } else { ThresholdFunction::Identity };
    TraceThresholdSpec::new(f, n).unwrap()
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn eig_reconstructs(seed in any::<u64>(), n in 1usize..=8) {
        let h = hermitian(seed, n);
        let e = h.eig().unwrap();
        prop_assert!(e.reconstruct().distance(&h) <= 1e-10);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn psd_project_is_idempotent(seed in any::<u64>(), n in 1usize..=6) {
        let h = hermitian(seed, n);
        let p = psd_project(&h).unwrap();
        prop_assert!(psd_project(&p).unwrap().distance(&p) <= 1e-12);
        let psd = random_psd(&mut rng_from_seed(seed ^ 1), n, 1.0);
        prop_assert!(psd_project(&psd).unwrap().distance(&psd) <= 1e-12);
    }

    #[test]
    fn effects_stay_in_the_unit_interval(seed in any::<u64>(), n in 1usize..=8) {
        let a = effect(seed, n);
        let sp = a.spectrum().unwrap();
        prop_assert!(sp[0] >= -1e-9 && sp[n - 1] <= 1.0 + 1e-9);
        prop_assert!(orthocomplement(&orthocomplement(&a)).distance(&a) <= 1e-15);
    }

    #[test]
    fn conjugation_keeps_the_spectrum(seed in any::<u64>(), n in 1usize..=8, transpose in any::<bool>()) {
        let a = effect(seed, n);
        let u = random_unitary_with(&mut rng_from_seed(seed ^ 2), n);
        let b = conjugate(&a, &u, transpose).unwrap();
        for (x, y) in a.spectrum().unwrap().iter().zip(b.spectrum().unwrap()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn loewner_order_is_antisymmetric(seed in any::<u64>(), n in 1usize..=5, scale in 0.0f64..1e-8) {
        let a = hermitian(seed, n);
        let b = &a + &(&hermitian(seed ^ 3, n) * scale);
        let tol = 1e-9;
        if loewner_leq(&a, &b, tol).unwrap() && loewner_leq(&b, &a, tol).unwrap() {
            prop_assert!(a.distance(&b) <= n as f64 * tol);
        }
    }

    #[test]
    fn classify_recovers_the_stratum(seed in any::<u64>(), n in 1usize..=8, pq in (0usize..=8, 0usize..=8)) {
        let (p, q) = (pq.0 % (n + 1), pq.1 % (n + 1));
        prop_assume!(p + q <= n);
        let a = random_effect(n, Some(StratumLabel::new(p, q)), seed).unwrap();
        prop_assert_eq!(classify_default(&a).unwrap(), StratumLabel::new(p, q));
        prop_assert_eq!(classify_default(&orthocomplement(&a)).unwrap(), StratumLabel::new(q, p));
    }

    #[test]
    fn freedom_dimension_is_symmetric(n in 1usize..=8, pq in (0usize..=8, 0usize..=8)) {
        let (p, q) = (pq.0 % (n + 1), pq.1 % (n + 1));
        prop_assume!(p + q <= n);
        let d = freedom_dimension(n, p, q).unwrap();
        prop_assert_eq!(d, freedom_dimension(n, q, p).unwrap());
        prop_assert_eq!(d == n * n, p * q == 0);
    }

    #[test]
    fn canonical_form_reconstructs(seed in any::<u64>(), n in 1usize..=8) {
        let a = effect(seed, n);
        let (v, d) = canonical_form(&a).unwrap();
        let back = d.as_hermitian().congruence(v.matrix());
        prop_assert!(back.distance(a.as_hermitian()) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn decide_is_reflexive_and_absorbs_scalars(seed in any::<u64>(), n in 2usize..=5, t in 0.0f64..=1.0) {
        let cfg = SolverConfig::default();
        let a = effect(seed, n);
        prop_assert_eq!(decide(&a, &a, &cfg).unwrap().verdict, Verdict::Coexistent);
        prop_assert_eq!(decide(&a, &orthocomplement(&a), &cfg).unwrap().verdict, Verdict::Coexistent);
        let s = Effect::scalar(n, t);
        prop_assert_eq!(decide(&s, &a, &cfg).unwrap().verdict, Verdict::Coexistent);
        prop_assert_eq!(decide(&a, &s, &cfg).unwrap().verdict, Verdict::Coexistent);
    }

    #[test]
    fn decide_is_symmetric(seed in any::<u64>(), n in 2usize..=5) {
        let cfg = SolverConfig::default();
        let inst = mixed_instance(&mut rng_from_seed(seed), n).unwrap();
        prop_assert_eq!(decide(&inst.a, &inst.b, &cfg).unwrap().verdict, decide(&inst.b, &inst.a, &cfg).unwrap().verdict);
        prop_assert_eq!(
            decide_with_solver(&inst.a, &inst.b, &cfg).unwrap().verdict,
            decide_with_solver(&inst.b, &inst.a, &cfg).unwrap().verdict
        );
    }

    #[test]
    fn decide_is_conjugation_equivariant(seed in any::<u64>(), n in 2usize..=5, transpose in any::<bool>()) {
        let cfg = SolverConfig::default();
        let mut rng = rng_from_seed(seed);
        let inst = mixed_instance(&mut rng, n).unwrap();
        let u = random_unitary_with(&mut rng, n);
        let (ua, ub) = (conjugate(&inst.a, &u, transpose).unwrap(), conjugate(&inst.b, &u, transpose).unwrap());
        let before = decide(&inst.a, &inst.b, &cfg).unwrap().verdict;
        prop_assert_eq!(before, inst.truth);
        prop_assert_eq!(decide(&ua, &ub, &cfg).unwrap().verdict, before);
        let solver_before = decide_with_solver(&inst.a, &inst.b, &cfg).unwrap().verdict;
        let solver_after = decide_with_solver(&ua, &ub, &cfg).unwrap().verdict;
        prop_assert_eq!(solver_before, solver_after);
        prop_assert!(!solver_before.contradicts(inst.truth));
    }

    #[test]
    fn sampled_partners_coexist_and_mix(seed in any::<u64>(), n in 2usize..=4) {
        let cfg = SolverConfig::default();
        let a = effect(seed, n);
        let bs = sample_coexistent(&a, 2, seed ^ 4).unwrap();
        for t in [0.25, 0.5, 0.75] {
            let mix = Effect::new(&(bs[0].as_hermitian() * t) + &(bs[1].as_hermitian() * (1.0 - t))).unwrap();
            prop_assert_ne!(decide(&a, &mix, &cfg).unwrap().verdict, Verdict::NotCoexistent);
        }
    }

    #[test]
    fn certificate_round_trip(seed in any::<u64>(), n in 1usize..=6) {
        let a = effect(seed, n);
        let (b, w) = sample_coexistent_with_witness(&a, 1, seed ^ 5).unwrap().pop().unwrap();
        let (e, f, g) = mn_to_efg(&w.m, &w.n, &a, &b).unwrap();
        let (m, nn) = efg_to_mn(&e, &f, &g, &a, &b).unwrap();
        prop_assert!(m.distance(&w.m) <= 1e-12 && nn.distance(&w.n) <= 1e-12);
    }

    #[test]
    fn trace_threshold_map_properties(seed in any::<u64>(), n in 2usize..=5, power in any::<bool>(), shrink in 0.0f64..=1.0) {
        let spec = threshold(power, n);
        let mut rng = rng_from_seed(seed);
        let raw = random_effect_with(&mut rng, n, None).unwrap();
        // Spread traces over every branch of the map.
        let a = Effect::new(raw.as_hermitian() * shrink).unwrap();
        let image = apply_trace_threshold(&spec, &a).unwrap();
        let perp = apply_trace_threshold(&spec, &orthocomplement(&a)).unwrap();
        prop_assert!(perp.distance(&orthocomplement(&image)) <= 1e-12);
        prop_assert!(trace_threshold_inverse(&spec, &image).unwrap().distance(&a) <= 1e-9);
        let gap = random_psd(&mut rng, n, 1.0);
        let root = orthocomplement(&a).as_hermitian().sqrt_psd().unwrap();
        let b = Effect::new(a.as_hermitian() + &(&gap * 0.5).congruence(root.matrix())).unwrap();
        prop_assert!(loewner_leq(a.as_hermitian(), b.as_hermitian(), 1e-9).unwrap());
        let image_b = apply_trace_threshold(&spec, &b).unwrap();
        prop_assert!(loewner_leq(image.as_hermitian(), image_b.as_hermitian(), 1e-9).unwrap());
    }

    #[test]
    fn perp_twice_is_the_identity(seed in any::<u64>(), n in 1usize..=6) {
        let a = effect(seed, n);
        let spec = StandardAutomorphismSpec { perp: true, ..StandardAutomorphismSpec::identity(n) };
        let twice = apply_standard(&spec, &apply_standard(&spec, &a).unwrap()).unwrap();
        prop_assert!(twice.distance(&a) <= 1e-15);
    }

    #[test]
    fn reconstruction_round_trip(seed in any::<u64>(), n in 2usize..=6, transpose in any::<bool>(), perp in any::<bool>()) {
        let spec = StandardAutomorphismSpec::random(&mut rng_from_seed(seed), n, transpose, perp);
        let fit = reconstruct(&spec, 1e-6).unwrap();
        prop_assert_eq!((fit.antiunitary, fit.perp), (transpose, perp));
        prop_assert!(phase_distance(fit.u.matrix(), spec.u.matrix()) <= 1e-8);
        let corner = fit.u.matrix()[(0, 0)];
        prop_assert!(corner.im == 0.0 && corner.re >= 0.0);
        prop_assert!(verify_reconstruction(&spec, &fit, 200, seed ^ 6).unwrap() <= 1e-7);
    }
}
