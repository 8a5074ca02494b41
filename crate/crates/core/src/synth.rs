//! Seeded geometric Brownian motion paths with injected shock days.
//!
//! Log-price increments are `μ + σ·z` with `z` standard normal. The random
//! stream is ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`) and normals
//! come from the ziggurat sampler of `rand_distr::StandardNormal`; both are
//! portable, so a spec reproduces the same path on every platform. All
//! normals are drawn before shocks are applied, so adding or removing a shock
//! never changes the underlying draws.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ingest::{format_timestamp, Frequency, PricePoint, PriceSeries, DATETIME_FORMAT};

/// Minutes between consecutive intraday bars.
pub const BAR_MINUTES: i64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShockShape {
    /// Adds `magnitude · σ` to the increment of the day's middle bar.
    SingleBar,
    /// Multiplies every increment of the day by `magnitude`.
    DispersedDay,
}

impl fmt::Display for ShockShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShockShape::SingleBar => "single_bar",
            ShockShape::DispersedDay => "dispersed_day",
        })
    }
}

impl FromStr for ShockShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "single_bar" | "singlebar" | "bar" => Ok(ShockShape::SingleBar),
            "dispersed_day" | "dispersedday" | "day" => Ok(ShockShape::DispersedDay),
            other => Err(Error::InvalidSpec(format!("unknown shock shape `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shock {
    pub day: usize,
    pub magnitude: f64,
    pub shape: ShockShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub instrument_id: String,
    pub seed: u64,
    pub n_days: usize,
    pub bars_per_day: usize,
    /// Drift per bar.
    pub drift: f64,
    /// Volatility per bar.
    pub volatility: f64,
    pub shocks: Vec<Shock>,
    /// First trading day; weekends are skipped.
    pub start_date: NaiveDate,
    /// Session open; bar `i` closes at `open + (i + 1) · 5 min`.
    pub session_open: NaiveTime,
    pub initial_price: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            instrument_id: "SYNTH".to_string(),
            seed: 0,
            n_days: 20,
            bars_per_day: 78,
            drift: 0.0,
            volatility: 0.001,
            shocks: Vec::new(),
            start_date: NaiveDate::from_ymd_opt(2025, 1, 2).expect("valid date"),
            session_open: NaiveTime::from_hms_opt(9, 30, 0).expect("valid time"),
            initial_price: 100.0,
        }
    }
}

impl SynthSpec {
    pub fn frequency(&self) -> Frequency {
        if self.bars_per_day == 1 {
            Frequency::Daily
        } else {
            Frequency::FiveMinute
        }
    }

    fn shocked_bar(&self, day: usize) -> usize {
        day * self.bars_per_day + self.bars_per_day / 2
    }

    fn validate(&self) -> Result<()> {
        if self.n_days == 0 || self.bars_per_day == 0 {
            return Err(Error::InvalidSpec(
                "n_days and bars_per_day must be positive".into(),
            ));
        }
        if self.bars_per_day > 1 && BAR_MINUTES * self.bars_per_day as i64 >= 24 * 60 {
            return Err(Error::InvalidSpec("too many bars for one day".into()));
        }
        if !(self.volatility.is_finite() && self.volatility >= 0.0) {
            return Err(Error::InvalidSpec(
                "volatility must be finite and non-negative".into(),
            ));
        }
        if !(self.drift.is_finite() && self.initial_price.is_finite() && self.initial_price > 0.0) {
            return Err(Error::InvalidSpec(
                "drift and initial price must be finite, price positive".into(),
            ));
        }
        for s in &self.shocks {
            if s.day >= self.n_days {
                return Err(Error::InvalidSpec(format!("shock day {} >= n_days", s.day)));
            }
            if !s.magnitude.is_finite() {
                return Err(Error::InvalidSpec("shock magnitude must be finite".into()));
            }
            let no_increment = match s.shape {
                ShockShape::SingleBar => self.shocked_bar(s.day) == 0,
                ShockShape::DispersedDay => s.day == 0 && self.bars_per_day == 1,
            };
            if no_increment {
                return Err(Error::InvalidSpec(
                    "shock on the very first bar has no increment".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Trading days starting at `start` (or the next weekday), skipping weekends.
pub fn trading_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectionRecord {
    /// Timestamp of the first shocked bar.
    pub timestamp: NaiveDateTime,
    /// Timestamp of the last shocked bar.
    pub end_timestamp: NaiveDateTime,
    pub magnitude_sigma: f64,
    pub shape: ShockShape,
    /// Inclusive bar index range whose increments were altered.
    pub first_bar: usize,
    pub last_bar: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InjectionLog {
    pub records: Vec<InjectionRecord>,
    frequency: Option<Frequency>,
}

impl InjectionLog {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let freq = self.frequency.unwrap_or(Frequency::FiveMinute);
        writeln!(out, "timestamp,magnitude_sigma,shape")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:.6},{}",
                format_timestamp(&r.timestamp, freq),
                r.magnitude_sigma,
                r.shape
            )?;
        }
        Ok(())
    }
}

/// Raw per-bar log increments before and after shock injection.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    /// `μ + σ·z` for bars `1..`; index 0 is bar 1.
    pub base: Vec<f64>,
    pub shocked: Vec<f64>,
}

fn increments(spec: &SynthSpec) -> Increments {
    let n_bars = spec.n_days * spec.bars_per_day;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let base: Vec<f64> = (1..n_bars)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            spec.drift + spec.volatility * z
        })
        .collect();
    let mut shocked = base.clone();
    for s in &spec.shocks {
        match s.shape {
            ShockShape::SingleBar => {
                shocked[spec.shocked_bar(s.day) - 1] += s.magnitude * spec.volatility;
            }
            ShockShape::DispersedDay => {
                let first = (s.day * spec.bars_per_day).max(1);
                let last = (s.day + 1) * spec.bars_per_day - 1;
                for bar in first..=last {
                    shocked[bar - 1] *= s.magnitude;
                }
            }
        }
    }
    Increments { base, shocked }
}

/// Draws the increments of `spec` without building a price series.
pub fn draw_increments(spec: &SynthSpec) -> Result<Increments> {
    spec.validate()?;
    Ok(increments(spec))
}

fn bar_timestamps(spec: &SynthSpec) -> Vec<NaiveDateTime> {
    let days = trading_days(spec.start_date, spec.n_days);
    let mut out = Vec::with_capacity(spec.n_days * spec.bars_per_day);
    for d in days {
        if spec.bars_per_day == 1 {
            out.push(d.and_time(NaiveTime::MIN));
        } else {
            let open = d.and_time(spec.session_open);
            for i in 0..spec.bars_per_day {
                out.push(open + Duration::minutes(BAR_MINUTES * (i as i64 + 1)));
            }
        }
    }
    out
}

/// Generates the price path and the log of injected shocks.
pub fn generate(spec: &SynthSpec) -> Result<(PriceSeries, InjectionLog)> {
    spec.validate()?;
    let inc = increments(spec);
    let stamps = bar_timestamps(spec);

    let mut points = Vec::with_capacity(stamps.len());
    let mut log_price = spec.initial_price.ln();
    points.push(PricePoint {
        timestamp: stamps[0],
        close: spec.initial_price,
    });
    for (ts, d) in stamps[1..].iter().zip(&inc.shocked) {
        log_price += d;
        points.push(PricePoint {
            timestamp: *ts,
            close: log_price.exp(),
        });
    }
    let series = PriceSeries::new(spec.instrument_id.clone(), spec.frequency(), points)?;

    let records = spec
        .shocks
        .iter()
        .map(|s| {
            let (first, last) = match s.shape {
                ShockShape::SingleBar => {
                    let b = spec.shocked_bar(s.day);
                    (b, b)
                }
                ShockShape::DispersedDay => (
                    (s.day * spec.bars_per_day).max(1),
                    (s.day + 1) * spec.bars_per_day - 1,
                ),
            };
            InjectionRecord {
                timestamp: stamps[first],
                end_timestamp: stamps[last],
                magnitude_sigma: s.magnitude,
                shape: s.shape,
                first_bar: first,
                last_bar: last,
            }
        })
        .collect();
    Ok((
        series,
        InjectionLog {
            records,
            frequency: Some(spec.frequency()),
        },
    ))
}

/// Parses an injection log CSV written by [`InjectionLog::write_csv`].
pub fn read_injection_csv(text: &str) -> Result<Vec<(NaiveDateTime, f64, ShockShape)>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let ts_text = row.get(0).unwrap_or_default();
        let ts = NaiveDateTime::parse_from_str(ts_text, DATETIME_FORMAT)
            .or_else(|_| {
                NaiveDate::parse_from_str(ts_text, crate::ingest::DATE_FORMAT)
                    .map(|d| d.and_time(NaiveTime::MIN))
            })
            .map_err(|_| Error::InvalidSpec(format!("bad timestamp `{ts_text}`")))?;
        let mag: f64 = row
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|_| Error::InvalidSpec("bad magnitude".into()))?;
        out.push((ts, mag, row.get(2).unwrap_or_default().parse()?));
    }
    Ok(out)
}
