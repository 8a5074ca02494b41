use proptest::prelude::*;

use entropix_core::returns::log_returns;
use entropix_core::stats::summarize_values;
use entropix_core::synth::{generate, Shock, ShockShape, SynthSpec};

/// 1283 days of 78 bars: just over 10^5 returns.
fn long_path(seed: u64, shocks: Vec<Shock>) -> Vec<f64> {
    let spec = SynthSpec {
        seed,
        n_days: 1283,
        bars_per_day: 78,
        drift: 0.00002,
        volatility: 0.001,
        shocks,
        ..Default::default()
    };
    let (prices, _) = generate(&spec).unwrap();
    log_returns(&prices).unwrap().values().to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn gaussian_path_has_no_excess_kurtosis(seed in any::<u64>()) {
        let r = long_path(seed, vec![]);
        let n = r.len() as f64;
        prop_assert!(n >= 1e5);
        let s = summarize_values(&r).unwrap();
        prop_assert!(s.kurtosis.unwrap().abs() < 0.1, "kurtosis {:?}", s.kurtosis);
        prop_assert!((s.mean - 0.00002).abs() < 4.0 * 0.001 / n.sqrt());
    }

    #[test]
    fn ten_sigma_single_bar_lifts_kurtosis_above_one(seed in any::<u64>(), day in 0usize..1283) {
        let shock = Shock { day, magnitude: 10.0, shape: ShockShape::SingleBar };
        let plain = summarize_values(&long_path(seed, vec![])).unwrap().kurtosis.unwrap();
        let shocked = summarize_values(&long_path(seed, vec![shock])).unwrap().kurtosis.unwrap();
        prop_assert!(shocked > plain, "{shocked} <= {plain}");
        prop_assert!(shocked > 1.0, "excess kurtosis {shocked} (without shock {plain})");
    }
}
