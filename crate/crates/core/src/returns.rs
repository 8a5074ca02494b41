//! Return series and trading-day windows.

use std::fmt;
use std::ops::Range;

use chrono::{NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};
use crate::ingest::{Frequency, PriceSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReturnKind {
    /// `p[t+1] / p[t] - 1`
    Nominal,
    /// `ln(p[t+1] / p[t])`
    Log,
}

impl fmt::Display for ReturnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReturnKind::Nominal => "nominal",
            ReturnKind::Log => "log",
        })
    }
}

/// Ordered returns; each value carries the timestamp of the later price of
/// its pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    instrument_id: String,
    kind: ReturnKind,
    frequency: Frequency,
    timestamps: Vec<NaiveDateTime>,
    values: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(
        instrument_id: impl Into<String>,
        kind: ReturnKind,
        frequency: Frequency,
        timestamps: Vec<NaiveDateTime>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::InvalidSpec(format!(
                "{} timestamps for {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpec(format!(
                "timestamps not strictly increasing at position {}",
                i + 1
            )));
        }
        Ok(Self {
            instrument_id: instrument_id.into(),
            kind,
            frequency,
            timestamps,
            values,
        })
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn kind(&self) -> ReturnKind {
        self.kind
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values covered by `slice`. The slice must lie within the series.
    pub fn window(&self, slice: &WindowSlice) -> Result<&[f64]> {
        slice.check(self.len())?;
        Ok(&self.values[slice.range()])
    }
}

/// Half-open index range `[start, end)` into a return series.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WindowSlice {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl WindowSlice {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Result<Self> {
        if start >= end {
            return Err(Error::InvalidSpec(format!("empty window [{start}, {end})")));
        }
        Ok(Self {
            start,
            end,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }

    /// Verifies that the slice fits a series of `series_len` values.
    pub fn check(&self, series_len: usize) -> Result<()> {
        if self.start >= self.end || self.end > series_len {
            return Err(Error::OutOfRange(format!(
                "window [{}, {}) does not fit a series of length {series_len}",
                self.start, self.end
            )));
        }
        Ok(())
    }
}

fn returns_with<F>(series: &PriceSeries, kind: ReturnKind, f: F) -> Result<ReturnSeries>
where
    F: Fn(f64, f64) -> f64,
{
    if series.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: series.len(),
        });
    }
    let pts = series.points();
    let values = pts.windows(2).map(|w| f(w[0].close, w[1].close)).collect();
    let timestamps = pts[1..].iter().map(|p| p.timestamp).collect();
    ReturnSeries::new(
        series.instrument_id(),
        kind,
        series.frequency(),
        timestamps,
        values,
    )
}

pub fn log_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    returns_with(series, ReturnKind::Log, |a, b| (b / a).ln())
}

pub fn nominal_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    returns_with(series, ReturnKind::Nominal, |a, b| b / a - 1.0)
}

pub fn returns(series: &PriceSeries, kind: ReturnKind) -> Result<ReturnSeries> {
    match kind {
        ReturnKind::Log => log_returns(series),
        ReturnKind::Nominal => nominal_returns(series),
    }
}

/// A window resolved from trading-day counts, possibly shorter than asked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSelection {
    pub slice: WindowSlice,
    pub requested_days: usize,
    pub found_days: usize,
}

impl WindowSelection {
    pub fn is_truncated(&self) -> bool {
        self.found_days < self.requested_days
    }

    pub fn warning(&self) -> Option<String> {
        self.is_truncated().then(|| {
            format!(
                "window `{}` truncated: {} of {} trading days available",
                self.slice.label, self.found_days, self.requested_days
            )
        })
    }
}

/// Selects the first `trading_days` distinct calendar dates at or after
/// `start_date`. Intraday series get every bar of those dates.
pub fn slice_window(
    series: &ReturnSeries,
    start_date: NaiveDate,
    trading_days: usize,
) -> Result<WindowSelection> {
    if trading_days == 0 {
        return Err(Error::InvalidSpec("trading_days must be positive".into()));
    }
    let ts = series.timestamps();
    let start = ts
        .iter()
        .position(|t| t.date() >= start_date)
        .ok_or_else(|| Error::OutOfRange(format!("no data on or after {start_date}")))?;

    let mut found = 0;
    let mut end = start;
    let mut current = None;
    while end < ts.len() {
        let d = ts[end].date();
        if current != Some(d) {
            if found == trading_days {
                break;
            }
            found += 1;
            current = Some(d);
        }
        end += 1;
    }
    Ok(WindowSelection {
        slice: WindowSlice::new(start, end, format!("from {start_date}"))?,
        requested_days: trading_days,
        found_days: found,
    })
}

/// Selects the last `trading_days` distinct calendar dates strictly before
/// `end_date`.
pub fn slice_window_before(
    series: &ReturnSeries,
    end_date: NaiveDate,
    trading_days: usize,
) -> Result<WindowSelection> {
    if trading_days == 0 {
        return Err(Error::InvalidSpec("trading_days must be positive".into()));
    }
    let ts = series.timestamps();
    let end = ts.partition_point(|t| t.date() < end_date);
    if end == 0 {
        return Err(Error::OutOfRange(format!("no data before {end_date}")));
    }
    let mut found = 0;
    let mut start = end;
    let mut current = None;
    while start > 0 {
        let d = ts[start - 1].date();
        if current != Some(d) {
            if found == trading_days {
                break;
            }
            found += 1;
            current = Some(d);
        }
        start -= 1;
    }
    Ok(WindowSelection {
        slice: WindowSlice::new(start, end, format!("before {end_date}"))?,
        requested_days: trading_days,
        found_days: found,
    })
}

/// Slice covering every observation dated within `[from, to]` inclusive.
pub fn date_range(series: &ReturnSeries, from: NaiveDate, to: NaiveDate) -> Result<WindowSlice> {
    let ts = series.timestamps();
    let start = ts.partition_point(|t| t.date() < from);
    let end = ts.partition_point(|t| t.date() <= to);
    if start >= end {
        return Err(Error::OutOfRange(format!(
            "no data between {from} and {to}"
        )));
    }
    WindowSlice::new(start, end, format!("{from}..{to}"))
}
