use cardioflux::features::{gravity_relative_power, FeatureOptions};
use cardioflux::synth::{gen_cohort, simulate_features, FitnessModel, SynthConfig};
use proptest::prelude::*;

fn variance(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

#[test]
fn wind_residual_variance_falls_with_slope() {
    let cfg = SynthConfig {
        n_subjects: 6,
        days: 60,
        seed: 3,
        ..SynthConfig::default()
    };
    let cohort = simulate_features(&cfg, &FeatureOptions::default()).unwrap();
    // Slope buckets [0, 3), [3, 6), [6, 9), [9, inf) percent.
    let mut buckets = vec![Vec::new(); 4];
    for w in cohort.iter().flat_map(|s| &s.features.windows).map(|w| w.window) {
        if let (Some(p), Some(vam)) = (w.mean_relative_power, w.vam) {
            let b = ((w.max_slope.max(0.0) / 3.0) as usize).min(3);
            buckets[b].push(p - gravity_relative_power(vam).unwrap());
        }
    }
    assert!(buckets.iter().all(|b| b.len() >= 100), "{:?}", buckets.iter().map(Vec::len).collect::<Vec<_>>());
    let v: Vec<f64> = buckets.iter().map(|b| variance(b)).collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
}

#[test]
fn truth_stays_in_physiological_range() {
    let cfg = SynthConfig {
        n_subjects: 4,
        days: 90,
        ..SynthConfig::default()
    };
    for s in simulate_features(&cfg, &FeatureOptions::default()).unwrap() {
        assert!(s.sim.truth.iter().all(|t| t.vo2max > 20.0 && t.vo2max < 90.0));
    }
}

#[test]
fn generator_is_a_function_of_config_and_seed() {
    let cfg = SynthConfig {
        n_subjects: 2,
        days: 20,
        seed: 19,
        ..SynthConfig::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = gen_cohort(&cfg, a.path()).unwrap();
    let mb = gen_cohort(&cfg, b.path()).unwrap();
    assert_eq!(ma, mb);
    assert!(ma.n_activities > 0);

    let other = gen_cohort(&SynthConfig { seed: 20, ..cfg.clone() }, &a.path().join("x")).unwrap();
    assert_ne!(other.files, ma.files);

    let fa = simulate_features(&cfg, &FeatureOptions::default()).unwrap();
    let fb = simulate_features(&cfg, &FeatureOptions::default()).unwrap();
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.features, y.features);
        assert_eq!(x.sim, y.sim);
    }
}

fn fitness() -> impl Strategy<Value = FitnessModel> {
    (30.0..55.0f64, 0.001..0.006f64, 10.0..80.0f64).prop_map(|(baseline, gain, tau_days)| FitnessModel {
        baseline,
        gain,
        tau_days,
        min_vo2max: 20.0,
        max_vo2max: 90.0,
    })
}

proptest! {
    #[test]
    fn constant_load_fixed_point(m in fitness(), load in 0.0..150.0f64) {
        let fixed = m.steady_state(load);
        prop_assume!(fixed < m.max_vo2max);
        prop_assert!((m.update_fitness(fixed, load) - fixed).abs() < 1e-9);
    }

    #[test]
    fn rest_moves_monotonically_toward_baseline(m in fitness(), start in 20.0..90.0f64) {
        let next = m.update_fitness(start, 0.0);
        prop_assert!((next - m.baseline).abs() <= (start - m.baseline).abs());
        prop_assert!((next - m.baseline) * (start - m.baseline) >= 0.0);
    }

    #[test]
    fn impulse_adds_gain_times_load(m in fitness(), start in 30.0..60.0f64, load in 0.0..200.0f64) {
        let bump = m.update_fitness(start, load) - m.update_fitness(start, 0.0);
        prop_assert!((bump - m.gain * load).abs() < 1e-9);
    }
}
