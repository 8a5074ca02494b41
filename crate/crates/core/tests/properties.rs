use chrono::{Duration, NaiveDate, NaiveDateTime};
use proptest::prelude::*;

use entropix_core::cumentropy::{
    build_sequences, detect_events, spectra, spectrum, AnchorMode, DetectorConfig, EntropySpectrum,
    SequenceCount, WindowSequenceSpec,
};
use entropix_core::entropy::{bin_returns, entropy_of_masses, BinningSpec};
use entropix_core::ingest::{
    aggregate_to_daily, dedup_closed_market, parse_csv, serialize_csv, ColumnMap, Frequency,
    PricePoint, PriceSeries,
};
use entropix_core::returns::{log_returns, nominal_returns, ReturnKind, ReturnSeries};
use entropix_core::stats::{pct_difference, summarize_values};

fn t0() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2025, 1, 6)
        .unwrap()
        .and_hms_opt(9, 35, 0)
        .unwrap()
}

fn intraday(closes: &[f64]) -> PriceSeries {
    let pts = closes
        .iter()
        .enumerate()
        .map(|(i, &c)| PricePoint {
            timestamp: t0() + Duration::minutes(5 * i as i64),
            close: c,
        })
        .collect();
    PriceSeries::new("P", Frequency::FiveMinute, pts).unwrap()
}

fn returns_of(values: Vec<f64>) -> ReturnSeries {
    let ts = (0..values.len())
        .map(|i| t0() + Duration::minutes(5 * i as i64))
        .collect();
    ReturnSeries::new("R", ReturnKind::Log, Frequency::FiveMinute, ts, values).unwrap()
}

/// Closes drawn from a small alphabet so that flat runs occur often.
fn runny_closes() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(100.0), Just(100.5), Just(101.0)], 1..80)
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 4..120)
}

fn close_to(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn dedup_is_idempotent(closes in runny_closes(), run in 1usize..8) {
        let s = intraday(&closes);
        let (once, _) = dedup_closed_market(&s, run);
        let (twice, d) = dedup_closed_market(&once, run);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(d.removed, 0);
        prop_assert!(once.len() <= s.len());
    }

    #[test]
    fn daily_aggregate_has_one_row_per_date(n in 1usize..600, step in 1i64..200) {
        let pts = (0..n)
            .map(|i| PricePoint { timestamp: t0() + Duration::minutes(step * i as i64), close: 1.0 + i as f64 })
            .collect();
        let s = PriceSeries::new("P", Frequency::FiveMinute, pts).unwrap();
        let d = aggregate_to_daily(&s).unwrap();
        prop_assert_eq!(d.len(), s.distinct_dates());
    }

    #[test]
    fn csv_round_trip(ticks in prop::collection::vec(1u64..10_000_000_000, 1..60)) {
        let closes: Vec<f64> = ticks.iter().map(|&k| k as f64 / 1e6).collect();
        let s = intraday(&closes);
        let text = serialize_csv(&s);
        let (back, diag) = parse_csv(&text, Frequency::FiveMinute, "P", &ColumnMap::default()).unwrap();
        prop_assert_eq!(diag.dropped, 0);
        prop_assert_eq!(back, s);
    }

    #[test]
    fn nominal_and_log_returns_agree(ticks in prop::collection::vec(1u32..1_000_000, 2..60)) {
        let closes: Vec<f64> = ticks.iter().map(|&k| k as f64 / 100.0).collect();
        let s = intraday(&closes);
        let lr = log_returns(&s).unwrap();
        let nr = nominal_returns(&s).unwrap();
        for (l, n) in lr.values().iter().zip(nr.values()) {
            prop_assert!(close_to(*n, l.exp_m1(), 1e-12), "{} vs {}", n, l.exp_m1());
        }
    }

    #[test]
    fn returns_ignore_time_shift(closes in prop::collection::vec(1.0f64..1000.0, 2..40), shift in 1i64..5000) {
        let s = intraday(&closes);
        let shifted = PriceSeries::new(
            "P",
            Frequency::FiveMinute,
            s.points().iter().map(|p| PricePoint { timestamp: p.timestamp + Duration::minutes(5 * shift), close: p.close }).collect(),
        ).unwrap();
        let (a, b) = (log_returns(&s).unwrap(), log_returns(&shifted).unwrap());
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn pct_difference_is_antisymmetric(a in 1e-6f64..10.0, b in 1e-6f64..10.0) {
        prop_assert_eq!(pct_difference(a, b).unwrap(), -pct_difference(b, a).unwrap());
        prop_assert!(pct_difference(a, b).unwrap().abs() <= 2.0);
    }

    #[test]
    fn summary_ignores_order(xs in sample(), seed in any::<u64>()) {
        let mut ys = xs.clone();
        let n = ys.len();
        let mut st = seed;
        for i in (1..n).rev() {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ys.swap(i, (st >> 33) as usize % (i + 1));
        }
        let a = summarize_values(&xs).unwrap();
        let b = summarize_values(&ys).unwrap();
        prop_assert_eq!((a.min, a.max, a.q1, a.median, a.q3), (b.min, b.max, b.q1, b.median, b.q3));
        prop_assert!(close_to(a.mean, b.mean, 1e-12));
        prop_assert!(close_to(a.variance, b.variance, 1e-10));
        prop_assert!(close_to(a.skewness.unwrap(), b.skewness.unwrap(), 1e-8));
        prop_assert!(close_to(a.kurtosis.unwrap(), b.kurtosis.unwrap(), 1e-8));
    }

    #[test]
    fn shape_moments_are_scale_free(xs in sample(), c in 0.01f64..100.0, shift in -5.0f64..5.0) {
        let a = summarize_values(&xs).unwrap();
        prop_assume!(a.std_dev > 1e-3);
        let ys: Vec<f64> = xs.iter().map(|x| c * x + shift).collect();
        let b = summarize_values(&ys).unwrap();
        prop_assert!(close_to(b.std_dev, c * a.std_dev, 1e-10));
        prop_assert!(close_to(b.skewness.unwrap(), a.skewness.unwrap(), 1e-8));
        prop_assert!(close_to(b.kurtosis.unwrap(), a.kurtosis.unwrap(), 1e-8));
    }

    #[test]
    fn entropy_is_bounded(xs in sample(), n in 1usize..40, lo in -2.0f64..0.0, width in 0.01f64..3.0) {
        for spec in [BinningSpec::per_window(n).unwrap(), BinningSpec::fixed(n, lo, lo + width).unwrap()] {
            let d = bin_returns(&xs, &spec).unwrap();
            let h = d.entropy();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (n as f64).ln() + 1e-12);
            prop_assert_eq!(d.counts().iter().sum::<usize>(), xs.len());
            prop_assert!(close_to(d.masses().iter().sum::<f64>(), 1.0, 1e-12));
        }
    }

    #[test]
    fn entropy_ignores_mass_order(mut w in prop::collection::vec(0.0f64..1.0, 1..30)) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 0.0);
        w.iter_mut().for_each(|x| *x /= total);
        let h = entropy_of_masses(&w);
        let mut r = w.clone();
        r.reverse();
        r.rotate_left(w.len() / 2);
        prop_assert!(close_to(h, entropy_of_masses(&r), 1e-12));
    }

    #[test]
    fn merging_bins_never_raises_entropy(mut w in prop::collection::vec(0.0f64..1.0, 2..30), at in any::<prop::sample::Index>()) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 0.0);
        w.iter_mut().for_each(|x| *x /= total);
        let i = at.index(w.len() - 1);
        let mut merged = w.clone();
        let x = merged.remove(i + 1);
        merged[i] += x;
        prop_assert!(entropy_of_masses(&merged) <= entropy_of_masses(&w) + 1e-12);
    }

    #[test]
    fn per_window_entropy_is_scale_free(xs in sample(), n in 1usize..30, k in -8i32..8, flip in any::<bool>()) {
        let c = if flip { -(2f64.powi(k)) } else { 2f64.powi(k) };
        let spec = BinningSpec::per_window(n).unwrap();
        let h = bin_returns(&xs, &spec).unwrap().entropy();
        let ys: Vec<f64> = xs.iter().map(|x| c * x).collect();
        let hs = bin_returns(&ys, &spec).unwrap().entropy();
        if flip {
            // reflection maps bins onto their mirror images except for values on
            // interior edges, which move to the neighbouring bin
            prop_assert!(hs >= 0.0 && hs <= (n as f64).ln() + 1e-12);
        } else {
            prop_assert!(close_to(h, hs, 1e-12));
        }
    }

    #[test]
    fn sequences_are_nested_and_in_bounds(
        len in 10usize..400, w0 in 2usize..30, dt in 1usize..10, m in 0usize..5, stride in 1usize..40, left in any::<bool>()
    ) {
        let spec = WindowSequenceSpec {
            base_length: w0, increment: dt, steps: m, stride,
            count: SequenceCount::Auto,
            anchor_mode: if left { AnchorMode::GrowLeft } else { AnchorMode::GrowRight },
        };
        match build_sequences(len, &spec) {
            Err(_) => prop_assert!(len < spec.span()),
            Ok(seqs) => {
                prop_assert_eq!(seqs.len(), (len - spec.span()) / stride + 1);
                for seq in &seqs {
                    prop_assert_eq!(seq.len(), m + 1);
                    for (k, w) in seq.iter().enumerate() {
                        prop_assert_eq!(w.len(), w0 + k * dt);
                        prop_assert!(w.end <= len);
                    }
                    for p in seq.windows(2) {
                        prop_assert!(p[1].start <= p[0].start && p[0].end <= p[1].end);
                        if left { prop_assert_eq!(p[0].end, p[1].end) } else { prop_assert_eq!(p[0].start, p[1].start) }
                    }
                }
            }
        }
    }

    #[test]
    fn spectrum_values_are_bounded(xs in prop::collection::vec(-0.01f64..0.01, 60..200), n in 2usize..20) {
        let r = returns_of(xs);
        let spec = WindowSequenceSpec {
            base_length: 10, increment: 7, steps: 3, stride: 9,
            count: SequenceCount::Auto, anchor_mode: AnchorMode::GrowRight,
        };
        for binning in [BinningSpec::per_window(n).unwrap(), BinningSpec::fixed(n, -0.005, 0.005).unwrap()] {
            for seq in build_sequences(r.len(), &spec).unwrap() {
                let sp = spectrum(&r, &seq, &binning).unwrap();
                prop_assert!(sp.values.iter().all(|h| *h >= 0.0 && *h <= (n as f64).ln() + 1e-12));
            }
        }
    }

    #[test]
    fn detector_ignores_affine_rescaling(
        peaks in prop::collection::vec(0.5f64..2.0, 20..80), a in 0.1f64..10.0, b in -1.0f64..1.0
    ) {
        let make = |f: &dyn Fn(f64) -> f64| -> Vec<EntropySpectrum> {
            peaks.iter().enumerate().map(|(j, &p)| EntropySpectrum {
                sequence_index: j,
                anchor_index: j,
                anchor_timestamp: t0() + Duration::minutes(5 * j as i64),
                coverage: j..j + 1,
                window_lens: vec![10, 20],
                values: vec![f(p * 0.5), f(p)],
                n_bins: 8,
            }).collect()
        };
        let base = make(&|x| x);
        let scaled = make(&|x| a * x + b);
        let cfg = DetectorConfig::default();
        let e1 = detect_events(&base, &cfg).unwrap();
        let e2 = detect_events(&scaled, &cfg).unwrap();
        let key = |e: &[entropix_core::cumentropy::EventSignature]| -> Vec<(usize, usize)> {
            e.iter().map(|x| (x.onset_index, x.persistence)).collect()
        };
        prop_assert_eq!(key(&e1), key(&e2));
    }

    #[test]
    fn spectra_are_deterministic(xs in prop::collection::vec(-0.01f64..0.01, 100..300)) {
        let r = returns_of(xs);
        let spec = WindowSequenceSpec {
            base_length: 12, increment: 4, steps: 2, stride: 7,
            count: SequenceCount::Auto, anchor_mode: AnchorMode::GrowRight,
        };
        let binning = BinningSpec::per_window(7).unwrap();
        let a = spectra(&r, &spec, &binning).unwrap();
        let b = spectra(&r, &spec, &binning).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().enumerate().all(|(j, s)| s.sequence_index == j));
    }
}
