//! Cumulative entropy over sliding sequences of expanding windows, and
//! detection of ramp-like entropy excursions.
//!
//! A sequence `j` is a chain of nested windows `T_0 ⊂ T_1 ⊂ … ⊂ T_m` where
//! window `k` holds `w0 + k·Δt` observations. Consecutive sequences are
//! offset by a stride `s`. The entropy of each window forms the sequence's
//! spectrum `H_0 … H_m`.

use std::io::Write;
use std::ops::Range;

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use rayon::prelude::*;

use crate::entropy::{
    bin_returns, entropy_of_counts, median, shannon_entropy, velleman_bins, BinIndexer,
    BinningSpec, RangePolicy, MAD_TO_SIGMA,
};
use crate::error::{Error, Result};
use crate::ingest::{format_timestamp, Frequency};
use crate::returns::{ReturnSeries, WindowSlice};

/// Half-width of the shared detection range, in robust standard deviations.
pub const DETECTION_RANGE_SCALE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AnchorMode {
    /// Windows share their left edge and extend forward in time.
    #[default]
    GrowRight,
    /// Windows share their right edge and extend backward in time.
    GrowLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SequenceCount {
    /// As many sequences as fit in the series.
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowSequenceSpec {
    /// Observations in the smallest window, `w0`.
    pub base_length: usize,
    /// Observations added per step, `Δt`.
    pub increment: usize,
    /// Number of growth steps `m`; a sequence holds `m + 1` windows.
    pub steps: usize,
    /// Offset between the anchors of consecutive sequences.
    pub stride: usize,
    pub count: SequenceCount,
    pub anchor_mode: AnchorMode,
}

impl WindowSequenceSpec {
    /// Defaults for a sampling frequency.
    ///
    /// Intraday sequences tile the session in half-day blocks of 39 bars
    /// (windows of 27, 33 and 39 bars). Non-overlapping sequences keep the
    /// trailing baseline of the detector free of shared observations; with
    /// heavy overlap its MAD collapses and pure noise gets flagged.
    pub fn for_frequency(frequency: Frequency) -> Self {
        match frequency {
            Frequency::FiveMinute => Self {
                base_length: 27,
                increment: 6,
                steps: 2,
                stride: 39,
                count: SequenceCount::Auto,
                anchor_mode: AnchorMode::GrowRight,
            },
            Frequency::Daily => Self {
                base_length: 6,
                increment: 2,
                steps: 2,
                stride: 10,
                count: SequenceCount::Auto,
                anchor_mode: AnchorMode::GrowRight,
            },
        }
    }

    /// Length of the largest window, `w0 + m·Δt`.
    pub fn span(&self) -> usize {
        self.base_length + self.steps * self.increment
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_length < 2 {
            return Err(Error::InvalidSpec("base_length must be at least 2".into()));
        }
        if self.increment == 0 || self.stride == 0 {
            return Err(Error::InvalidSpec(
                "increment and stride must be positive".into(),
            ));
        }
        if self.count == SequenceCount::Fixed(0) {
            return Err(Error::InvalidSpec("sequence count must be positive".into()));
        }
        Ok(())
    }

    /// Number of sequences for a series of `series_length` observations.
    pub fn sequence_count(&self, series_length: usize) -> Result<usize> {
        self.validate()?;
        let span = self.span();
        if series_length < span {
            return Err(Error::SeriesTooShort {
                needed: span,
                got: series_length,
            });
        }
        let fit = (series_length - span) / self.stride + 1;
        match self.count {
            SequenceCount::Auto => Ok(fit),
            SequenceCount::Fixed(m) if m <= fit => Ok(m),
            SequenceCount::Fixed(m) => Err(Error::SeriesTooShort {
                needed: (m - 1) * self.stride + span,
                got: series_length,
            }),
        }
    }
}

/// Enumerates the window slices of every sequence.
pub fn build_sequences(
    series_length: usize,
    spec: &WindowSequenceSpec,
) -> Result<Vec<Vec<WindowSlice>>> {
    let count = spec.sequence_count(series_length)?;
    let span = spec.span();
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let offset = j * spec.stride;
        let seq = (0..=spec.steps)
            .map(|k| {
                let len = spec.base_length + k * spec.increment;
                let (start, end) = match spec.anchor_mode {
                    AnchorMode::GrowRight => (offset, offset + len),
                    AnchorMode::GrowLeft => (offset + span - len, offset + span),
                };
                WindowSlice::new(start, end, format!("seq{j}/k{k}"))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(seq);
    }
    Ok(out)
}

/// Cumulative entropy values `H_0 … H_m` of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySpectrum {
    pub sequence_index: usize,
    /// Index of the shared window edge: first observation for grow-right
    /// sequences, last observation for grow-left ones.
    pub anchor_index: usize,
    pub anchor_timestamp: NaiveDateTime,
    /// Index range of the largest window.
    pub coverage: Range<usize>,
    pub window_lens: Vec<usize>,
    pub values: Vec<f64>,
    pub n_bins: usize,
}

impl EntropySpectrum {
    /// Largest entropy over the sequence's windows.
    pub fn peak(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest step-to-step increase of entropy, if any step exists.
    pub fn max_step(&self) -> Option<f64> {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(None, |acc: Option<f64>, d| {
                Some(acc.map_or(d, |a| a.max(d)))
            })
    }
}

fn nested(inner: &WindowSlice, outer: &WindowSlice) -> bool {
    outer.start <= inner.start && inner.end <= outer.end
}

/// Entropy of every window in `sequence` under one shared bin count.
///
/// With a fixed range and nested windows the histogram is grown in place;
/// otherwise each window is rebinned from scratch.
pub fn spectrum(
    returns: &ReturnSeries,
    sequence: &[WindowSlice],
    spec: &BinningSpec,
) -> Result<EntropySpectrum> {
    let first = sequence.first().ok_or(Error::EmptyWindow)?;
    let last = sequence.last().expect("non-empty");
    for s in sequence {
        s.check(returns.len())?;
    }
    let values_all = returns.values();
    let incremental = matches!(spec.range(), RangePolicy::Fixed { .. })
        && sequence.windows(2).all(|w| nested(&w[0], &w[1]));

    let values = if incremental {
        let RangePolicy::Fixed { lo, hi } = spec.range() else {
            unreachable!()
        };
        let indexer = BinIndexer::new(lo, hi, spec.n_bins());
        let mut counts = vec![0usize; spec.n_bins()];
        let add = |counts: &mut [usize], range: Range<usize>| {
            for &v in &values_all[range] {
                counts[indexer.index(v).0] += 1;
            }
        };
        let mut out = Vec::with_capacity(sequence.len());
        let mut prev: Option<&WindowSlice> = None;
        for s in sequence {
            match prev {
                None => add(&mut counts, s.range()),
                Some(p) => {
                    add(&mut counts, s.start..p.start);
                    add(&mut counts, p.end..s.end);
                }
            }
            out.push(entropy_of_counts(&counts, s.len()));
            prev = Some(s);
        }
        out
    } else {
        sequence
            .iter()
            .map(|s| Ok(shannon_entropy(&bin_returns(&values_all[s.range()], spec)?)))
            .collect::<Result<Vec<_>>>()?
    };

    let anchor_index = if first.start == last.start {
        first.start
    } else {
        last.end - 1
    };
    let coverage = sequence
        .iter()
        .map(|s| s.start)
        .min()
        .unwrap_or(first.start)
        ..sequence.iter().map(|s| s.end).max().unwrap_or(first.end);
    Ok(EntropySpectrum {
        sequence_index: 0,
        anchor_index,
        anchor_timestamp: returns.timestamps()[anchor_index],
        coverage,
        window_lens: sequence.iter().map(WindowSlice::len).collect(),
        values,
        n_bins: spec.n_bins(),
    })
}

/// Spectra of every sequence of `seq_spec`, evaluated in parallel and
/// returned in anchor order.
pub fn spectra(
    returns: &ReturnSeries,
    seq_spec: &WindowSequenceSpec,
    binning: &BinningSpec,
) -> Result<Vec<EntropySpectrum>> {
    let sequences = build_sequences(returns.len(), seq_spec)?;
    sequences
        .par_iter()
        .enumerate()
        .map(|(j, seq)| {
            let mut sp = spectrum(returns, seq, binning)?;
            sp.sequence_index = j;
            Ok(sp)
        })
        .collect()
}

/// Shared binning used for detection: `velleman(w0)` bins over a robust
/// fixed range of the whole series.
pub fn detection_binning(
    returns: &ReturnSeries,
    seq_spec: &WindowSequenceSpec,
) -> Result<BinningSpec> {
    BinningSpec::fixed_robust(
        velleman_bins(seq_spec.base_length),
        returns.values(),
        DETECTION_RANGE_SCALE,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Exceedance threshold in robust standard deviations, `θ`.
    pub threshold: f64,
    /// Consecutive flagged sequences required for an event.
    pub min_persistence: usize,
    /// Trailing sequences forming the baseline, `B`.
    pub baseline: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            threshold: 3.0,
            min_persistence: 2,
            baseline: 12,
        }
    }
}

/// A run of sequences whose peak entropy jumped above the trailing baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSignature {
    pub onset_index: usize,
    pub onset_timestamp: NaiveDateTime,
    /// Observation range of the onset sequence's largest window.
    pub onset_coverage: Range<usize>,
    pub peak_value: f64,
    /// Entropy gain per window step at onset.
    pub ramp_slope: f64,
    pub persistence: usize,
}

/// Per-sequence exceedance `peak_j − median(baseline)` and the robust
/// dispersion of the baseline, for sequences with a full trailing baseline.
fn exceedances(peaks: &[f64], baseline: usize) -> Vec<Option<(f64, f64)>> {
    (0..peaks.len())
        .map(|j| {
            (j >= baseline).then(|| {
                let base = &peaks[j - baseline..j];
                let med = median(base.to_vec());
                let mad = median(base.iter().map(|v| (v - med).abs()).collect());
                (peaks[j] - med, MAD_TO_SIGMA * mad)
            })
        })
        .collect()
}

/// Flags sharp cumulative-entropy increases.
///
/// Sequence `j` is flagged when its peak entropy exceeds the median of the
/// `B` preceding peaks by more than `θ` robust standard deviations (MAD
/// scaled). A run of at least `min_persistence` flagged sequences makes an
/// event with onset at the run's first sequence. A new event must start at
/// least `B` sequences after the previous one ended.
///
/// `ramp_slope` is the largest step-to-step entropy increase inside the
/// onset sequence; when the onset sequence has no increasing step it falls
/// back to the onset exceedance over the baseline median.
pub fn detect_events(
    spectra: &[EntropySpectrum],
    config: &DetectorConfig,
) -> Result<Vec<EventSignature>> {
    if !(config.threshold.is_finite() && config.threshold > 0.0) {
        return Err(Error::InvalidSpec("threshold must be positive".into()));
    }
    if config.min_persistence == 0 || config.baseline == 0 {
        return Err(Error::InvalidSpec(
            "min_persistence and baseline must be positive".into(),
        ));
    }
    let needed = 8.max(2 * config.min_persistence);
    if spectra.len() < needed {
        return Err(Error::InsufficientBaseline {
            needed,
            got: spectra.len(),
        });
    }

    let peaks: Vec<f64> = spectra.iter().map(EntropySpectrum::peak).collect();
    let exc = exceedances(&peaks, config.baseline);
    let flagged: Vec<bool> = exc
        .iter()
        .map(|e| matches!(e, Some((g, disp)) if *g > config.threshold * disp && *g > 1e-12))
        .collect();

    let mut events = Vec::new();
    let mut next_allowed = 0;
    let mut j = 0;
    while j < flagged.len() {
        if !flagged[j] {
            j += 1;
            continue;
        }
        let start = j;
        while j < flagged.len() && flagged[j] {
            j += 1;
        }
        let run = j - start;
        if run < config.min_persistence || start < next_allowed {
            continue;
        }
        let onset = &spectra[start];
        let gain = exc[start].map(|(g, _)| g).unwrap_or_default();
        let ramp_slope = onset.max_step().filter(|d| *d > 0.0).unwrap_or(gain);
        events.push(EventSignature {
            onset_index: onset.sequence_index,
            onset_timestamp: onset.anchor_timestamp,
            onset_coverage: onset.coverage.clone(),
            peak_value: peaks[start..j]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
            ramp_slope,
            persistence: run,
        });
        next_allowed = j + config.baseline;
    }
    Ok(events)
}

pub const SPECTRUM_HEADER: &str = "sequence_index,anchor_timestamp,k,window_len,H";
pub const EVENTS_HEADER: &str = "onset_timestamp,peak_value,ramp_slope,persistence";

pub fn write_spectra_csv<W: Write>(
    spectra: &[EntropySpectrum],
    frequency: Frequency,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{SPECTRUM_HEADER}")?;
    for sp in spectra {
        let ts = format_timestamp(&sp.anchor_timestamp, frequency);
        for (k, (len, h)) in sp.window_lens.iter().zip(&sp.values).enumerate() {
            writeln!(out, "{},{ts},{k},{len},{h:.6}", sp.sequence_index)?;
        }
    }
    Ok(())
}

pub fn write_events_csv<W: Write>(
    events: &[EventSignature],
    frequency: Frequency,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{EVENTS_HEADER}")?;
    for e in events {
        writeln!(
            out,
            "{},{:.6},{:.6},{}",
            format_timestamp(&e.onset_timestamp, frequency),
            e.peak_value,
            e.ramp_slope,
            e.persistence
        )?;
    }
    Ok(())
}

/// Highest peak entropy among sequences anchored on each calendar date.
pub fn daily_peaks(spectra: &[EntropySpectrum]) -> Vec<(NaiveDate, f64)> {
    let mut out: Vec<(NaiveDate, f64)> = Vec::new();
    for sp in spectra {
        let d = sp.anchor_timestamp.date();
        let p = sp.peak();
        match out.last_mut() {
            Some((day, v)) if *day == d => *v = v.max(p),
            _ => out.push((d, p)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonthlyEntropy {
    pub year: i32,
    pub month: u32,
    pub sequences: usize,
    /// Mean over every window entropy of the month's sequences.
    pub mean_h: f64,
    pub max_h: f64,
}

/// Groups spectra by the calendar month of their anchor timestamp.
pub fn monthly_profile(spectra: &[EntropySpectrum]) -> Vec<MonthlyEntropy> {
    let mut out: Vec<(MonthlyEntropy, f64, usize)> = Vec::new();
    for sp in spectra {
        let (y, m) = (sp.anchor_timestamp.year(), sp.anchor_timestamp.month());
        let sum: f64 = sp.values.iter().sum();
        let peak = sp.peak();
        match out.last_mut() {
            Some((e, s, n)) if e.year == y && e.month == m => {
                e.sequences += 1;
                e.max_h = e.max_h.max(peak);
                *s += sum;
                *n += sp.values.len();
            }
            _ => out.push((
                MonthlyEntropy {
                    year: y,
                    month: m,
                    sequences: 1,
                    mean_h: 0.0,
                    max_h: peak,
                },
                sum,
                sp.values.len(),
            )),
        }
    }
    out.into_iter()
        .map(|(mut e, s, n)| {
            e.mean_h = s / n as f64;
            e
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::returns::ReturnKind;
    use chrono::Duration;

    fn series(values: Vec<f64>) -> ReturnSeries {
        let t0 = NaiveDate::from_ymd_opt(2025, 3, 3)
            .unwrap()
            .and_hms_opt(9, 35, 0)
            .unwrap();
        let ts = (0..values.len())
            .map(|i| t0 + Duration::minutes(5 * i as i64))
            .collect();
        ReturnSeries::new("S", ReturnKind::Log, Frequency::FiveMinute, ts, values).unwrap()
    }

    fn spec(w0: usize, dt: usize, m: usize, s: usize) -> WindowSequenceSpec {
        WindowSequenceSpec {
            base_length: w0,
            increment: dt,
            steps: m,
            stride: s,
            count: SequenceCount::Auto,
            anchor_mode: AnchorMode::GrowRight,
        }
    }

    #[test]
    fn enumerates_grow_right_windows() {
        let seqs = build_sequences(30, &spec(10, 5, 2, 5)).unwrap();
        let ranges = |j: usize| seqs[j].iter().map(|s| s.range()).collect::<Vec<_>>();
        assert_eq!(ranges(0), vec![0..10, 0..15, 0..20]);
        assert_eq!(ranges(1), vec![5..15, 5..20, 5..25]);
        assert_eq!(seqs.len(), 3);
    }

    #[test]
    fn grow_left_shares_right_edge() {
        let mut sp = spec(10, 5, 2, 5);
        sp.anchor_mode = AnchorMode::GrowLeft;
        let seqs = build_sequences(30, &sp).unwrap();
        let r: Vec<_> = seqs[1].iter().map(|s| s.range()).collect();
        assert_eq!(r, vec![15..25, 10..25, 5..25]);
    }

    #[test]
    fn single_window_sequences_when_m_is_zero() {
        let seqs = build_sequences(50, &spec(10, 3, 0, 10)).unwrap();
        assert!(seqs.iter().all(|s| s.len() == 1 && s[0].len() == 10));
    }

    #[test]
    fn exact_fit_gives_one_sequence() {
        let seqs = build_sequences(20, &spec(10, 5, 2, 3)).unwrap();
        assert_eq!(seqs.len(), 1);
    }

    #[test]
    fn too_short_series() {
        assert!(matches!(
            build_sequences(19, &spec(10, 5, 2, 3)),
            Err(Error::SeriesTooShort {
                needed: 20,
                got: 19
            })
        ));
        let mut sp = spec(10, 5, 2, 3);
        sp.count = SequenceCount::Fixed(3);
        assert!(matches!(
            build_sequences(25, &sp),
            Err(Error::SeriesTooShort {
                needed: 26,
                got: 25
            })
        ));
    }

    #[test]
    fn invalid_sequence_specs() {
        assert!(build_sequences(100, &spec(1, 5, 2, 3)).is_err());
        assert!(build_sequences(100, &spec(5, 0, 2, 3)).is_err());
        assert!(build_sequences(100, &spec(5, 1, 2, 0)).is_err());
    }

    #[test]
    fn constant_returns_give_zero_spectrum() {
        let r = series(vec![0.001; 40]);
        let seq = &build_sequences(40, &spec(10, 5, 2, 10)).unwrap()[0];
        let sp = spectrum(&r, seq, &BinningSpec::per_window(5).unwrap()).unwrap();
        assert_eq!(sp.values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn spectrum_rises_when_new_bins_fill() {
        // w0 = 4 identical values, then Δt = 4 values each in a new bin.
        let mut v = vec![0.5; 4];
        v.extend([1.5, 2.5, 3.5, 4.5]);
        let r = series(v);
        let seq = &build_sequences(8, &spec(4, 4, 1, 1)).unwrap()[0];
        let sp = spectrum(&r, seq, &BinningSpec::fixed(5, 0.0, 5.0).unwrap()).unwrap();
        assert_eq!(sp.values[0], 0.0);
        // masses (1/2, 1/8, 1/8, 1/8, 1/8): H = ln 2 / 2 + 4 · ln 8 / 8 = 2 ln 2
        approx::assert_abs_diff_eq!(sp.values[1], 2.0 * 2f64.ln(), epsilon = 1e-15);
    }

    fn flat_spectra(n: usize) -> Vec<EntropySpectrum> {
        let t0 = NaiveDate::from_ymd_opt(2025, 3, 3)
            .unwrap()
            .and_hms_opt(9, 35, 0)
            .unwrap();
        (0..n)
            .map(|j| EntropySpectrum {
                sequence_index: j,
                anchor_index: j,
                anchor_timestamp: t0 + Duration::minutes(5 * j as i64),
                coverage: j..j + 3,
                window_lens: vec![2, 3],
                values: vec![1.0, 1.2],
                n_bins: 4,
            })
            .collect()
    }

    #[test]
    fn flat_spectra_have_no_events() {
        let ev = detect_events(&flat_spectra(40), &DetectorConfig::default()).unwrap();
        assert!(ev.is_empty());
    }

    #[test]
    fn too_few_spectra() {
        assert!(matches!(
            detect_events(&flat_spectra(7), &DetectorConfig::default()),
            Err(Error::InsufficientBaseline { needed: 8, got: 7 })
        ));
        let cfg = DetectorConfig {
            min_persistence: 5,
            ..Default::default()
        };
        assert!(matches!(
            detect_events(&flat_spectra(9), &cfg),
            Err(Error::InsufficientBaseline { needed: 10, .. })
        ));
    }

    #[test]
    fn detects_and_separates_bumps() {
        let mut sp = flat_spectra(60);
        for (j, s) in sp.iter_mut().enumerate() {
            // small deterministic jitter so the MAD is non-zero
            s.values[1] += 0.01 * ((j * 7 % 5) as f64 - 2.0);
        }
        for j in [20, 21, 22, 45, 46] {
            sp[j].values = vec![1.0, 2.0];
        }
        let ev = detect_events(&sp, &DetectorConfig::default()).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0].onset_index, 20);
        assert_eq!(ev[0].persistence, 3);
        assert_eq!(ev[0].peak_value, 2.0);
        assert_eq!(ev[0].ramp_slope, 1.0);
        assert_eq!(ev[1].onset_index, 45);
        assert!(ev[0].onset_timestamp < ev[1].onset_timestamp);
    }

    #[test]
    fn single_flag_is_not_persistent() {
        let mut sp = flat_spectra(40);
        for (j, s) in sp.iter_mut().enumerate() {
            s.values[1] += 0.01 * ((j * 3 % 4) as f64);
        }
        sp[25].values = vec![1.0, 2.5];
        assert!(detect_events(&sp, &DetectorConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn daily_and_monthly_grouping() {
        let t0 = NaiveDate::from_ymd_opt(2025, 3, 31)
            .unwrap()
            .and_hms_opt(10, 0, 0)
            .unwrap();
        let mk = |j: usize, ts: NaiveDateTime, vals: Vec<f64>| EntropySpectrum {
            sequence_index: j,
            anchor_index: j,
            anchor_timestamp: ts,
            coverage: 0..1,
            window_lens: vec![1; vals.len()],
            values: vals,
            n_bins: 2,
        };
        let sp = vec![
            mk(0, t0, vec![0.2, 0.4]),
            mk(1, t0 + Duration::hours(2), vec![0.6, 0.1]),
            mk(2, t0 + Duration::days(1), vec![0.3, 0.5]),
        ];
        let days = daily_peaks(&sp);
        assert_eq!(days.len(), 2);
        assert_eq!(days[0].1, 0.6);
        let months = monthly_profile(&sp);
        assert_eq!(months.len(), 2);
        assert_eq!(
            (months[0].year, months[0].month, months[0].sequences),
            (2025, 3, 2)
        );
        approx::assert_abs_diff_eq!(months[0].mean_h, 1.3 / 4.0, epsilon = 1e-15);
        assert_eq!(months[1].max_h, 0.5);
    }
}
