//! Property suites: unitarity, support bounds, composition, variance,
//! winding stability, sampler determinism, and parallel-execution
//! reproducibility.

use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use qwalk::bands;
use qwalk::sampling::{sample_counts, sampled_moments};
use qwalk::ssh;
use qwalk::sweep::{run_delta_sweep, DeltaSweepConfig, GridSpec};
use qwalk::{distribution, evolve, moments, CoinState, LatticeState, StepParams};

fn arb_coin() -> impl Strategy<Value = CoinState> {
    (
        -1.0..1.0_f64,
        -1.0..1.0_f64,
        -1.0..1.0_f64,
        -1.0..1.0_f64,
    )
        .prop_filter_map("norm too small", |(ar, ai, br, bi)| {
            CoinState::normalized(Complex64::new(ar, ai), Complex64::new(br, bi)).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_drift_stays_below_tolerance(
        delta in 0.0..(2.0 * PI),
        q in prop::sample::select(vec![0.5_f64, 1.0]),
        coin in arb_coin(),
        n in 1u32..40,
    ) {
        let params = StepParams::new(delta, q).unwrap();
        let states = evolve(&LatticeState::localized(0, &coin), &params, n);
        for s in &states {
            prop_assert!((s.norm_sq() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn support_is_exactly_bounded_by_the_light_cone(
        delta in 0.0..(2.0 * PI),
        q in prop::sample::select(vec![0.5_f64, 1.0]),
        coin in arb_coin(),
        n in 1u32..24,
    ) {
        let params = StepParams::new(delta, q).unwrap();
        let last = evolve(&LatticeState::localized(0, &coin), &params, n).pop().unwrap();
        let d = distribution(&last);
        let bound = params.shift() * i64::from(n);
        for (m, p) in d.iter() {
            if m < -bound || m > bound {
                prop_assert_eq!(p, 0.0);
            }
        }
        // and the stored window itself never exceeds the cone
        prop_assert!(last.min_site() >= -bound);
        prop_assert!(last.max_site() <= bound);
    }

    #[test]
    fn zero_retardation_is_local(coin in arb_coin(), n in 0u32..30) {
        let params = StepParams::with_unit_shift(0.0).unwrap();
        let last = evolve(&LatticeState::localized(0, &coin), &params, n).pop().unwrap();
        let d = distribution(&last);
        prop_assert!((d.probability(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_composes_bitwise(
        delta in 0.0..(2.0 * PI),
        coin in arb_coin(),
        a in 0u32..12,
        b in 0u32..12,
    ) {
        let params = StepParams::with_unit_shift(delta).unwrap();
        let start = LatticeState::localized(0, &coin);
        let direct = evolve(&start, &params, a + b).pop().unwrap();
        let mid = evolve(&start, &params, a).pop().unwrap();
        let resumed = evolve(&mid, &params, b).pop().unwrap();
        prop_assert_eq!(direct, resumed);
    }

    #[test]
    fn distributions_normalize_and_variance_is_nonnegative(
        delta in 0.0..(2.0 * PI),
        coin in arb_coin(),
        n in 1u32..30,
    ) {
        let params = StepParams::with_unit_shift(delta).unwrap();
        let last = evolve(&LatticeState::localized(0, &coin), &params, n).pop().unwrap();
        let d = distribution(&last);
        prop_assert!((d.total() - 1.0).abs() < 1e-10);
        prop_assert!(d.probabilities().iter().all(|&p| p >= 0.0));
        let r = moments(&d, n).unwrap();
        prop_assert!(r.m2 - r.m1 * r.m1 >= -1e-10 * (1.0 + r.m2));
        let cone = (params.shift() * i64::from(n)) as f64;
        prop_assert!(r.m2 <= cone * cone * (1.0 + 1e-12));
    }

    #[test]
    fn winding_matches_the_phase_diagram(delta in 0.0..(2.0 * PI)) {
        let distance = bands::TRANSITIONS
            .iter()
            .map(|t| (delta - t).abs())
            .fold(f64::INFINITY, f64::min);
        prop_assume!(distance > 1e-3);
        let w = bands::winding_number(delta, 1024).unwrap();
        let expected = u32::from(delta > PI / 2.0 && delta < 3.0 * PI / 2.0);
        prop_assert_eq!(w.winding, expected);
        prop_assert!((w.turns.abs() - f64::from(w.winding)).abs() < 1e-6);
    }

    #[test]
    fn velocity_identities_hold_pointwise(
        delta in 0.0..(2.0 * PI),
        k in -PI..PI,
    ) {
        prop_assume!(bands::normalization(delta, k) > 1e-6);
        let v = bands::group_velocity(delta, k).unwrap();
        let (n, _) = bands::bloch_vector(delta, k).unwrap();
        prop_assert!((v - n[2]).abs() < 1e-10);
        prop_assert!((v + n[1]).abs() < 1e-10);
        let h = 1e-5;
        let fd = (bands::quasi_energy(delta, k + h).0 - bands::quasi_energy(delta, k - h).0) / (2.0 * h);
        prop_assert!((v - fd).abs() < 1e-6);
    }

    #[test]
    fn sampler_counts_are_deterministic_and_complete(
        delta in 0.1..(2.0 * PI - 0.1),
        coin in arb_coin(),
        shots in 1u64..4000,
        seed in any::<u64>(),
    ) {
        let params = StepParams::with_unit_shift(delta).unwrap();
        let last = evolve(&LatticeState::localized(0, &coin), &params, 6).pop().unwrap();
        let d = distribution(&last);
        let a = sample_counts(&d, shots, seed);
        let b = sample_counts(&d, shots, seed);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.counts().iter().sum::<u64>(), shots);
        let m = sampled_moments(&a).unwrap();
        prop_assert!(m.m2 >= 0.0);
    }

    #[test]
    fn ssh_evolution_conserves_probability(
        t in 0.2..2.0_f64,
        t_prime in 0.0..2.0_f64,
        tau in 0.0..30.0_f64,
    ) {
        let params = ssh::SshParams::new(t, t_prime).unwrap();
        let cfg = ssh::EvolutionConfig::new(params, tau, CoinState::left()).unwrap();
        let dist = ssh::evolve(&cfg).unwrap();
        prop_assert!((dist.total() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn sweeps_are_bitwise_independent_of_thread_count() {
    let config = DeltaSweepConfig {
        grid: GridSpec::new(0.1, 6.1, 31).unwrap(),
        steps: 20,
        coin: CoinState::right(),
        shots: 200,
        seed: 5,
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_delta_sweep(&config).unwrap());
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| run_delta_sweep(&config).unwrap());
    assert_eq!(single.len(), many.len());
    for (a, b) in single.iter().zip(many.iter()) {
        assert_eq!(a.m1_over_n.to_bits(), b.m1_over_n.to_bits());
        assert_eq!(a.m2_over_n2.to_bits(), b.m2_over_n2.to_bits());
        assert_eq!(a.asym_m2.to_bits(), b.asym_m2.to_bits());
        let (sa, sb) = (a.sampled.unwrap(), b.sampled.unwrap());
        assert_eq!(sa.m1_over_n.to_bits(), sb.m1_over_n.to_bits());
        assert_eq!(sa.m2_over_n2.to_bits(), sb.m2_over_n2.to_bits());
    }
}

#[test]
fn long_walk_norm_drift_at_one_hundred_steps() {
    let coin = CoinState::normalized(Complex64::new(0.4, -0.3), Complex64::new(0.7, 0.2)).unwrap();
    for &q in &[0.5, 1.0] {
        let params = StepParams::new(2.6, q).unwrap();
        let states = evolve(&LatticeState::localized(0, &coin), &params, 100);
        for (i, s) in states.iter().enumerate() {
            assert!(
                (s.norm_sq() - 1.0).abs() < 1e-12,
                "step {i}: norm {}",
                s.norm_sq()
            );
        }
    }
}
