//! CSV ingestion and cleaning of raw close-price data.
//!
//! Two timestamp shapes are accepted: `YYYY-MM-DD` for daily data and
//! `YYYY-MM-DD HH:MM:SS` for intraday bars. Some providers write the time
//! with hyphens (`HH-MM-SS`); that variant is normalized on parse. Rows with
//! unparseable timestamps, missing prices or non-positive prices are dropped
//! and counted, never interpolated.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};

use crate::error::{Error, Result};

pub const DATE_FORMAT: &str = "%Y-%m-%d";
pub const DATETIME_FORMAT: &str = "%Y-%m-%d %H:%M:%S";
const DATETIME_HYPHEN_FORMAT: &str = "%Y-%m-%d %H-%M-%S";

/// Default run length (in bars) above which repeated closes are treated as
/// closed-market filler. Six 5-minute bars is half an hour.
pub const DEFAULT_CLOSED_MARKET_RUN: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frequency {
    Daily,
    FiveMinute,
}

impl Frequency {
    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::Daily => "daily",
            Frequency::FiveMinute => "5min",
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "daily" | "1d" | "d" => Ok(Frequency::Daily),
            "5min" | "5m" | "five-minute" | "fiveminute" => Ok(Frequency::FiveMinute),
            other => Err(Error::InvalidSpec(format!("unknown frequency `{other}`"))),
        }
    }
}

/// One unparsed row as read from a provider file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub timestamp_text: String,
    pub price_text: String,
    /// Provider label; informational only.
    pub source_tag: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePoint {
    pub timestamp: NaiveDateTime,
    pub close: f64,
}

/// Timestamped close prices for one instrument at one sampling frequency.
///
/// Timestamps are strictly increasing and every close is finite and positive.
/// Daily series carry midnight timestamps only.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    instrument_id: String,
    frequency: Frequency,
    points: Vec<PricePoint>,
}

impl PriceSeries {
    pub fn new(
        instrument_id: impl Into<String>,
        frequency: Frequency,
        points: Vec<PricePoint>,
    ) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.close.is_finite() || p.close <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "close at position {i} is not a finite positive number"
                )));
            }
            if frequency == Frequency::Daily && p.timestamp.time() != NaiveTime::MIN {
                return Err(Error::InvalidSpec(format!(
                    "daily point at position {i} carries a time of day"
                )));
            }
        }
        if let Some(i) = points
            .windows(2)
            .position(|w| w[0].timestamp >= w[1].timestamp)
        {
            return Err(Error::InvalidSpec(format!(
                "timestamps not strictly increasing at position {}",
                i + 1
            )));
        }
        Ok(Self {
            instrument_id: instrument_id.into(),
            frequency,
            points,
        })
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn points(&self) -> &[PricePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn closes(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.close)
    }

    /// Number of distinct calendar dates present in the series.
    pub fn distinct_dates(&self) -> usize {
        let mut n = 0;
        let mut last = None;
        for p in &self.points {
            let d = p.timestamp.date();
            if last != Some(d) {
                n += 1;
                last = Some(d);
            }
        }
        n
    }
}

/// Column names used to locate the timestamp and close fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub datetime: String,
    pub close: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            datetime: "timestamp".to_string(),
            close: "close".to_string(),
        }
    }
}

impl ColumnMap {
    pub fn new(datetime: impl Into<String>, close: impl Into<String>) -> Self {
        Self {
            datetime: datetime.into(),
            close: close.into(),
        }
    }
}

/// Counts of rows rejected while parsing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestDiagnostics {
    pub rows_read: usize,
    /// Rows rejected for a bad timestamp or a missing/invalid price.
    pub dropped: usize,
    pub bad_timestamp: usize,
    pub bad_price: usize,
    /// Rows sharing a timestamp with a later row; the later row wins.
    pub duplicate_timestamps: usize,
}

/// Reads `raw_text` as a headered comma-delimited file and extracts the
/// mapped columns. Header matching is case-insensitive.
pub fn read_records(
    raw_text: &str,
    columns: &ColumnMap,
    source_tag: &str,
) -> Result<Vec<RawRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(raw_text.as_bytes());
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let dt_idx = find(&columns.datetime)?;
    let close_idx = find(&columns.close)?;

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        out.push(RawRecord {
            timestamp_text: row.get(dt_idx).unwrap_or_default().to_string(),
            price_text: row.get(close_idx).unwrap_or_default().to_string(),
            source_tag: source_tag.to_string(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StampKind {
    Date,
    DateTime,
}

fn parse_timestamp(text: &str) -> Option<(NaiveDateTime, StampKind)> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Ok(d) = NaiveDate::parse_from_str(text, DATE_FORMAT) {
        return Some((d.and_time(NaiveTime::MIN), StampKind::Date));
    }
    NaiveDateTime::parse_from_str(text, DATETIME_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(text, DATETIME_HYPHEN_FORMAT))
        .ok()
        .map(|t| (t, StampKind::DateTime))
}

fn parse_price(text: &str) -> Option<f64> {
    let v: f64 = text.trim().parse().ok()?;
    (v.is_finite() && v > 0.0).then_some(v)
}

/// Parses a headered CSV into a sorted, cleaned [`PriceSeries`].
pub fn parse_csv(
    raw_text: &str,
    frequency: Frequency,
    instrument_id: &str,
    columns: &ColumnMap,
) -> Result<(PriceSeries, IngestDiagnostics)> {
    let records = read_records(raw_text, columns, instrument_id)?;
    parse_records(&records, frequency, instrument_id)
}

/// Normalizes already-extracted records. See [`parse_csv`].
pub fn parse_records(
    records: &[RawRecord],
    frequency: Frequency,
    instrument_id: &str,
) -> Result<(PriceSeries, IngestDiagnostics)> {
    let mut diag = IngestDiagnostics {
        rows_read: records.len(),
        ..Default::default()
    };
    let mut rows: Vec<(NaiveDateTime, StampKind, f64)> = Vec::with_capacity(records.len());
    for rec in records {
        let Some((ts, kind)) = parse_timestamp(&rec.timestamp_text) else {
            diag.bad_timestamp += 1;
            continue;
        };
        let Some(close) = parse_price(&rec.price_text) else {
            diag.bad_price += 1;
            continue;
        };
        rows.push((ts, kind, close));
    }
    diag.dropped = diag.bad_timestamp + diag.bad_price;
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }

    let has_date = rows.iter().any(|r| r.1 == StampKind::Date);
    let has_time = rows.iter().any(|r| r.1 == StampKind::DateTime);
    match frequency {
        Frequency::Daily => {
            if has_date && has_time {
                return Err(Error::AmbiguousTimestampFormat(
                    "daily input mixes date-only and date-time rows".into(),
                ));
            }
        }
        Frequency::FiveMinute => {
            if has_date {
                return Err(Error::AmbiguousTimestampFormat(
                    "intraday input contains date-only rows".into(),
                ));
            }
        }
    }

    // Stable sort keeps input order among equal timestamps.
    rows.sort_by_key(|r| r.0);

    let mut points: Vec<PricePoint> = Vec::with_capacity(rows.len());
    for (ts, kind, close) in rows {
        let timestamp = if frequency == Frequency::Daily && kind == StampKind::DateTime {
            ts.date().and_time(NaiveTime::MIN)
        } else {
            ts
        };
        match points.last_mut() {
            Some(last) if last.timestamp == timestamp => {
                if frequency == Frequency::Daily && kind == StampKind::DateTime {
                    return Err(Error::AmbiguousTimestampFormat(format!(
                        "several intraday rows on {} in daily input",
                        timestamp.date()
                    )));
                }
                diag.duplicate_timestamps += 1;
                last.close = close;
            }
            _ => points.push(PricePoint { timestamp, close }),
        }
    }

    let series = PriceSeries::new(instrument_id, frequency, points)?;
    Ok((series, diag))
}

/// Formats a timestamp in the normalized shape for `frequency`.
pub fn format_timestamp(ts: &NaiveDateTime, frequency: Frequency) -> String {
    match frequency {
        Frequency::Daily => ts.format(DATE_FORMAT).to_string(),
        Frequency::FiveMinute => ts.format(DATETIME_FORMAT).to_string(),
    }
}

/// Writes the normalized `timestamp,close` form with six-decimal closes.
pub fn write_csv<W: Write>(series: &PriceSeries, mut out: W) -> std::io::Result<()> {
    writeln!(out, "timestamp,close")?;
    for p in series.points() {
        writeln!(
            out,
            "{},{:.6}",
            format_timestamp(&p.timestamp, series.frequency()),
            p.close
        )?;
    }
    Ok(())
}

pub fn serialize_csv(series: &PriceSeries) -> String {
    let mut buf = Vec::with_capacity(series.len() * 32);
    write_csv(series, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("normalized CSV is ASCII")
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DedupDiagnostics {
    pub removed: usize,
    pub warning: Option<String>,
}

/// Truncates runs of identical consecutive closes longer than `max_run`
/// points down to their first point.
///
/// Providers often repeat the last traded value while the market is closed;
/// such runs carry no return information and would pile mass into the zero
/// return bin. Daily series are returned unchanged with a warning.
pub fn dedup_closed_market(
    series: &PriceSeries,
    max_run: usize,
) -> (PriceSeries, DedupDiagnostics) {
    if series.frequency() == Frequency::Daily {
        return (
            series.clone(),
            DedupDiagnostics {
                removed: 0,
                warning: Some("closed-market dedup skipped for daily series".into()),
            },
        );
    }
    let pts = series.points();
    let mut kept = Vec::with_capacity(pts.len());
    let mut i = 0;
    while i < pts.len() {
        let mut j = i + 1;
        while j < pts.len() && pts[j].close == pts[i].close {
            j += 1;
        }
        if j - i > max_run {
            kept.push(pts[i]);
        } else {
            kept.extend_from_slice(&pts[i..j]);
        }
        i = j;
    }
    let removed = pts.len() - kept.len();
    let out = PriceSeries {
        instrument_id: series.instrument_id.clone(),
        frequency: series.frequency,
        points: kept,
    };
    (
        out,
        DedupDiagnostics {
            removed,
            warning: None,
        },
    )
}

/// Collapses an intraday series to one point per calendar date holding the
/// last close of that date.
pub fn aggregate_to_daily(series: &PriceSeries) -> Result<PriceSeries> {
    if series.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut points: Vec<PricePoint> = Vec::new();
    for p in series.points() {
        let day = p.timestamp.date().and_time(NaiveTime::MIN);
        match points.last_mut() {
            Some(last) if last.timestamp == day => last.close = p.close,
            _ => points.push(PricePoint {
                timestamp: day,
                close: p.close,
            }),
        }
    }
    PriceSeries::new(series.instrument_id(), Frequency::Daily, points)
}
