//! Batch pipeline behind the `entropix` binary: normalization of price files,
//! before/after window comparison, cumulative-entropy spectra with event
//! detection, PMF snapshots and synthetic fixtures.

pub mod config;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use entropix_core::cumentropy::{
    daily_peaks, detect_events, detection_binning, monthly_profile, spectra, write_events_csv,
    write_spectra_csv, EntropySpectrum, EventSignature,
};
use entropix_core::entropy::{bin_returns, velleman_bins, BinnedDistribution, BinningSpec};
use entropix_core::ingest::{
    dedup_closed_market, parse_csv, write_csv, ColumnMap, Frequency, IngestDiagnostics,
    PriceSeries, DEFAULT_CLOSED_MARKET_RUN,
};
use entropix_core::returns::{
    date_range, returns, slice_window, slice_window_before, ReturnSeries, WindowSlice,
};
use entropix_core::stats::{
    compare_windows, summarize, write_summary_row, Metric, SummaryStats, SUMMARY_HEADER,
};
use entropix_core::synth::{generate, Shock, ShockShape, SynthSpec};

pub use config::{Instrument, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INSUFFICIENT: i32 = 3;

pub const COMPARE_HEADER: &str =
    "instrument,entropy_before,entropy_after,entropy_pct_diff,std_before,std_after,std_pct_diff";
pub const INGEST_SUMMARY_HEADER: &str =
    "instrument,rows_read,kept,dropped,bad_timestamp,bad_price,duplicate_timestamps,dedup_removed";
pub const MONTHLY_HEADER: &str = "year,month,sequences,mean_H,max_H";
pub const DAILY_MAX_HEADER: &str = "date,max_H";

#[derive(Debug, Parser)]
#[command(
    name = "entropix",
    version,
    about = "Entropy diagnostics for market price series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize raw price CSVs into `timestamp,close` files.
    Ingest(IngestArgs),
    /// Compare entropy and standard deviation before and after an anchor date.
    Compare(CompareArgs),
    /// Cumulative-entropy spectra, detected events and monthly profiles.
    Spectrum(SpectrumArgs),
    /// Return PMFs of one day and of that day plus the preceding days.
    Pmf(PmfArgs),
    /// Generate a seeded synthetic price series with optional shocks.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run manifest.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Name of the timestamp column.
    #[arg(long)]
    pub dt_col: Option<String>,
    /// Name of the close-price column.
    #[arg(long)]
    pub close_col: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Price CSV files; the file stem becomes the instrument id. Used instead
    /// of the manifest's instrument list when given.
    #[arg(value_name = "CSV")]
    pub inputs: Vec<PathBuf>,
    /// Sampling frequency of positional inputs: `daily` or `5min`.
    #[arg(long, default_value = "5min")]
    pub frequency: Frequency,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// Anchor date `YYYY-MM-DD`; the after window starts on it.
    #[arg(long)]
    pub anchor: Option<String>,
    /// Window length in trading days.
    #[arg(long)]
    pub days: Option<usize>,
    /// Entropy bin count (default: Velleman rule on the before window).
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// Bin count of the shared detection binning.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Detection threshold in robust standard deviations.
    #[arg(long)]
    pub theta: Option<f64>,
    /// First date to analyse, `YYYY-MM-DD`.
    #[arg(long)]
    pub from: Option<String>,
    /// Last date to analyse, `YYYY-MM-DD`.
    #[arg(long)]
    pub to: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PmfArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// The single day, `YYYY-MM-DD`.
    #[arg(long)]
    pub day: String,
    /// Trading days preceding `day` that join it in the span.
    #[arg(long, default_value_t = 14)]
    pub span_days: usize,
    /// Bin count (default: Velleman rule on the day's returns).
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "SYNTH")]
    pub id: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub days: usize,
    /// Bars per trading day; 1 produces a daily series.
    #[arg(long, default_value_t = 78)]
    pub bars_per_day: usize,
    /// Per-bar log drift.
    #[arg(long, default_value_t = 0.0)]
    pub drift: f64,
    /// Per-bar log volatility.
    #[arg(long, default_value_t = 0.001)]
    pub sigma: f64,
    /// Shock as `DAY:MAGNITUDE:SHAPE`, shape `single_bar` or `dispersed_day`.
    /// May be repeated.
    #[arg(long = "shock", value_parser = parse_shock)]
    pub shocks: Vec<Shock>,
}

fn parse_shock(s: &str) -> std::result::Result<Shock, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [day, mag, shape] = parts.as_slice() else {
        return Err(format!("expected DAY:MAGNITUDE:SHAPE, got `{s}`"));
    };
    Ok(Shock {
        day: day.parse().map_err(|e| format!("bad day `{day}`: {e}"))?,
        magnitude: mag
            .parse()
            .map_err(|e| format!("bad magnitude `{mag}`: {e}"))?,
        shape: shape.parse::<ShockShape>().map_err(|e| e.to_string())?,
    })
}

/// Exit code for a failed command: 3 when data is too short, 2 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use entropix_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::TooShort { .. } | E::SeriesTooShort { .. } | E::InsufficientBaseline { .. } => {
                    EXIT_INSUFFICIENT
                }
                _ => EXIT_INPUT,
            };
        }
    }
    EXIT_INPUT
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Spectrum(a) => cmd_spectrum(&a),
        Command::Pmf(a) => cmd_pmf(&a),
        Command::Synth(a) => cmd_synth(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// Manifest merged with the flags shared by every command.
struct RunContext {
    cfg: RunConfig,
    out: PathBuf,
    columns: ColumnMap,
}

fn context(common: &CommonArgs) -> Result<RunContext> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if common.dt_col.is_some() {
        cfg.dt_col = common.dt_col.clone();
    }
    if common.close_col.is_some() {
        cfg.close_col = common.close_col.clone();
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let columns = cfg.columns();
    Ok(RunContext { cfg, out, columns })
}

fn instruments(ctx: &RunContext, input: &InputArgs) -> Result<Vec<Instrument>> {
    let list = if input.inputs.is_empty() {
        ctx.cfg.instruments()?
    } else {
        input
            .inputs
            .iter()
            .map(|p| {
                let id = p
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .ok_or_else(|| anyhow!("cannot derive an id from {}", p.display()))?;
                Ok(Instrument {
                    id: id.to_string(),
                    path: p.clone(),
                    frequency: input.frequency,
                })
            })
            .collect::<Result<_>>()?
    };
    if list.is_empty() {
        bail!("no instruments: pass CSV files or a --config with [[instruments]]");
    }
    Ok(list)
}

/// A parsed and deduplicated instrument.
pub struct Loaded {
    pub series: PriceSeries,
    pub diagnostics: IngestDiagnostics,
    pub dedup_removed: usize,
    pub warnings: Vec<String>,
}

/// Reads, parses and deduplicates one price file.
pub fn load_instrument(
    inst: &Instrument,
    columns: &ColumnMap,
    max_flat_run: usize,
) -> Result<Loaded> {
    let text = fs::read_to_string(&inst.path)
        .with_context(|| format!("reading {}", inst.path.display()))?;
    let (series, diagnostics) = parse_csv(&text, inst.frequency, &inst.id, columns)
        .with_context(|| format!("parsing {}", inst.path.display()))?;
    let (series, dedup) = dedup_closed_market(&series, max_flat_run);
    let mut warnings: Vec<String> = dedup.warning.into_iter().collect();
    if diagnostics.dropped > 0 {
        warnings.push(format!(
            "{}: dropped {} malformed rows",
            inst.id, diagnostics.dropped
        ));
    }
    Ok(Loaded {
        series,
        diagnostics,
        dedup_removed: dedup.removed,
        warnings,
    })
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn fmt6(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn max_run(ctx: &RunContext) -> usize {
    ctx.cfg.max_flat_run.unwrap_or(DEFAULT_CLOSED_MARKET_RUN)
}

fn load_returns(ctx: &RunContext, inst: &Instrument) -> Result<(ReturnSeries, Vec<String>)> {
    let loaded = load_instrument(inst, &ctx.columns, max_run(ctx))?;
    let r = returns(&loaded.series, ctx.cfg.return_kind()?)?;
    Ok((r, loaded.warnings))
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<i32> {
    let ctx = context(&args.common)?;
    let insts = instruments(&ctx, &args.input)?;
    let run = max_run(&ctx);
    let loaded: Vec<Result<Loaded>> = insts
        .par_iter()
        .map(|i| load_instrument(i, &ctx.columns, run))
        .collect();

    let failures: Vec<String> = insts
        .iter()
        .zip(&loaded)
        .filter_map(|(i, l)| l.as_ref().err().map(|e| format!("{}: {e:#}", i.id)))
        .collect();
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("error: {f}");
        }
        return Ok(EXIT_INPUT);
    }

    fs::create_dir_all(&ctx.out).with_context(|| format!("creating {}", ctx.out.display()))?;
    let loaded: Vec<Loaded> = loaded.into_iter().collect::<Result<_>>()?;
    loaded
        .par_iter()
        .map(|l| {
            let path = ctx.out.join(format!("{}.csv", l.series.instrument_id()));
            let mut w = create(&path)?;
            write_csv(&l.series, &mut w)?;
            w.flush()?;
            Ok(())
        })
        .collect::<Result<()>>()?;

    let mut summary = create(&ctx.out.join("ingest_summary.csv"))?;
    writeln!(summary, "{INGEST_SUMMARY_HEADER}")?;
    for l in &loaded {
        let d = &l.diagnostics;
        let id = l.series.instrument_id();
        for w in &l.warnings {
            eprintln!("warning: {w}");
        }
        println!(
            "{id}: rows={} kept={} dropped={} dedup_removed={}",
            d.rows_read,
            l.series.len(),
            d.dropped,
            l.dedup_removed
        );
        writeln!(
            summary,
            "{id},{},{},{},{},{},{},{}",
            d.rows_read,
            l.series.len(),
            d.dropped,
            d.bad_timestamp,
            d.bad_price,
            d.duplicate_timestamps,
            l.dedup_removed
        )?;
    }
    summary.flush()?;
    Ok(EXIT_OK)
}

/// One instrument's before/after comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub instrument: String,
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub entropy_pct: Option<f64>,
    pub std_before: f64,
    pub std_after: f64,
    pub std_pct: Option<f64>,
    pub before: SummaryStats,
    pub after: SummaryStats,
}

/// Compares the `days` trading days before `anchor` with the `days` trading
/// days starting on it. Both windows share one per-window bin count.
pub fn compare_instrument(
    r: &ReturnSeries,
    anchor: NaiveDate,
    days: usize,
    bins: Option<usize>,
) -> Result<(CompareRow, Vec<String>)> {
    let before = slice_window_before(r, anchor, days)?;
    let after = slice_window(r, anchor, days)?;
    let warnings = before
        .warning()
        .into_iter()
        .chain(after.warning())
        .collect();
    let n = bins.unwrap_or_else(|| velleman_bins(before.slice.len()));
    let binning = BinningSpec::per_window(n)?;
    let (b, a) = (&before.slice, &after.slice);
    let ent = compare_windows(r, b, a, Metric::Entropy(binning))?;
    let std = compare_windows(r, b, a, Metric::StdDev)?;
    Ok((
        CompareRow {
            instrument: r.instrument_id().to_string(),
            entropy_before: ent.before,
            entropy_after: ent.after,
            entropy_pct: ent.pct_difference,
            std_before: std.before,
            std_after: std.after,
            std_pct: std.pct_difference,
            before: summarize(r, b)?,
            after: summarize(r, a)?,
        },
        warnings,
    ))
}

pub fn cmd_compare(args: &CompareArgs) -> Result<i32> {
    let ctx = context(&args.common)?;
    let insts = instruments(&ctx, &args.input)?;
    let anchor = match &args.anchor {
        Some(a) => config::parse_date(a)?,
        None => ctx
            .cfg
            .anchor_date()?
            .ok_or_else(|| anyhow!("no anchor date: pass --anchor or set `anchor`"))?,
    };
    let days = args
        .days
        .or(ctx.cfg.trading_days)
        .ok_or_else(|| anyhow!("no window length: pass --days or set `trading_days`"))?;
    if days == 0 {
        bail!("window length must be positive");
    }
    let bins = args.bins.or(ctx.cfg.bins);

    let results: Vec<Result<(CompareRow, Vec<String>)>> = insts
        .par_iter()
        .map(|inst| {
            let (r, mut warnings) = load_returns(&ctx, inst)?;
            let (row, w) = compare_instrument(&r, anchor, days, bins)?;
            warnings.extend(w);
            Ok((row, warnings))
        })
        .collect();

    let mut codes = Vec::new();
    let mut rows = Vec::new();
    for (inst, res) in insts.iter().zip(results) {
        match res {
            Ok((row, warnings)) => {
                for w in warnings {
                    eprintln!("warning: {}: {w}", inst.id);
                }
                rows.push(row);
            }
            Err(e) => {
                eprintln!("error: {}: {e:#}", inst.id);
                codes.push(exit_code(&e));
            }
        }
    }
    if rows.is_empty() {
        return Ok(codes.into_iter().min().unwrap_or(EXIT_INPUT));
    }

    fs::create_dir_all(&ctx.out)?;
    let mut out = create(&ctx.out.join("compare.csv"))?;
    writeln!(out, "{COMPARE_HEADER}")?;
    let pct = |v: Option<f64>| fmt6(v.map(|x| 100.0 * x));
    for r in &rows {
        writeln!(
            out,
            "{},{:.6},{:.6},{},{:.6},{:.6},{}",
            r.instrument,
            r.entropy_before,
            r.entropy_after,
            pct(r.entropy_pct),
            r.std_before,
            r.std_after,
            pct(r.std_pct)
        )?;
    }
    out.flush()?;

    let mut summary = create(&ctx.out.join("summary.csv"))?;
    writeln!(summary, "{SUMMARY_HEADER}")?;
    for r in &rows {
        write_summary_row(&mut summary, &r.instrument, "before", &r.before)?;
        write_summary_row(&mut summary, &r.instrument, "after", &r.after)?;
    }
    summary.flush()?;
    println!("compared {} of {} instruments", rows.len(), insts.len());
    Ok(EXIT_OK)
}

/// Spectra and events of one instrument.
pub struct SpectrumReport {
    pub spectra: Vec<EntropySpectrum>,
    pub events: Vec<EventSignature>,
}

/// Returns dated `from..=to`; open ends keep the whole series.
pub fn restrict_dates(
    r: ReturnSeries,
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
) -> Result<ReturnSeries> {
    if from.is_none() && to.is_none() {
        return Ok(r);
    }
    let w = date_range(
        &r,
        from.unwrap_or(NaiveDate::MIN),
        to.unwrap_or(NaiveDate::MAX),
    )?;
    Ok(ReturnSeries::new(
        r.instrument_id(),
        r.kind(),
        r.frequency(),
        r.timestamps()[w.range()].to_vec(),
        r.values()[w.range()].to_vec(),
    )?)
}

fn spectrum_report(
    ctx: &RunContext,
    args: &SpectrumArgs,
    r: &ReturnSeries,
) -> Result<SpectrumReport> {
    let seq = ctx.cfg.sequence_spec(r.frequency())?;
    let mut binning = detection_binning(r, &seq)?;
    if let Some(n) = args.bins.or(ctx.cfg.bins) {
        binning = binning.with_bins(n)?;
    }
    let sp = spectra(r, &seq, &binning)?;
    let mut det = ctx.cfg.detector();
    if let Some(t) = args.theta {
        det.threshold = t;
    }
    let events = detect_events(&sp, &det)?;
    Ok(SpectrumReport {
        spectra: sp,
        events,
    })
}

fn write_spectrum_files(out: &Path, id: &str, freq: Frequency, rep: &SpectrumReport) -> Result<()> {
    let mut w = create(&out.join(format!("{id}_spectrum.csv")))?;
    write_spectra_csv(&rep.spectra, freq, &mut w)?;
    w.flush()?;

    let mut w = create(&out.join(format!("{id}_events.csv")))?;
    write_events_csv(&rep.events, freq, &mut w)?;
    w.flush()?;

    let mut w = create(&out.join(format!("{id}_monthly.csv")))?;
    writeln!(w, "{MONTHLY_HEADER}")?;
    for m in monthly_profile(&rep.spectra) {
        writeln!(
            w,
            "{},{},{},{:.6},{:.6}",
            m.year, m.month, m.sequences, m.mean_h, m.max_h
        )?;
    }
    w.flush()?;

    let mut w = create(&out.join(format!("{id}_daily_max.csv")))?;
    writeln!(w, "{DAILY_MAX_HEADER}")?;
    for (d, h) in daily_peaks(&rep.spectra) {
        writeln!(w, "{},{h:.6}", d.format("%Y-%m-%d"))?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<i32> {
    let ctx = context(&args.common)?;
    let insts = instruments(&ctx, &args.input)?;
    let from = args.from.as_deref().map(config::parse_date).transpose()?;
    let to = args.to.as_deref().map(config::parse_date).transpose()?;
    fs::create_dir_all(&ctx.out)?;

    let results: Vec<Result<(usize, usize, Vec<String>)>> = insts
        .par_iter()
        .map(|inst| {
            let (r, warnings) = load_returns(&ctx, inst)?;
            let r = restrict_dates(r, from, to)?;
            let rep = spectrum_report(&ctx, args, &r)?;
            write_spectrum_files(&ctx.out, &inst.id, r.frequency(), &rep)?;
            Ok((rep.spectra.len(), rep.events.len(), warnings))
        })
        .collect();

    let mut code = EXIT_OK;
    for (inst, res) in insts.iter().zip(results) {
        match res {
            Ok((n, e, warnings)) => {
                for w in warnings {
                    eprintln!("warning: {w}");
                }
                println!("{}: sequences={n} events={e}", inst.id);
            }
            Err(e) => {
                eprintln!("error: {}: {e:#}", inst.id);
                if code == EXIT_OK {
                    code = exit_code(&e);
                }
            }
        }
    }
    Ok(code)
}

/// Return distributions of one day and of a span ending with it, binned
/// identically so their masses are comparable.
pub struct PmfSnapshot {
    pub day: BinnedDistribution,
    pub span: BinnedDistribution,
    pub day_slice: WindowSlice,
    pub span_slice: WindowSlice,
}

/// Bins the returns of `day` and of `day` plus the `span_days` preceding
/// trading days over the span's extent. The bin count defaults to the
/// Velleman rule on the day's returns.
pub fn pmf_snapshot(
    r: &ReturnSeries,
    day: NaiveDate,
    span_days: usize,
    bins: Option<usize>,
) -> Result<PmfSnapshot> {
    let day_sel = slice_window(r, day, 1)?;
    let first = r.timestamps()[day_sel.slice.start].date();
    if first != day {
        return Err(entropix_core::Error::OutOfRange(format!("no data on {day}")).into());
    }
    let span_start = if span_days == 0 {
        day_sel.slice.start
    } else {
        let before = slice_window_before(r, day, span_days)?;
        if before.is_truncated() {
            return Err(entropix_core::Error::OutOfRange(format!(
                "only {} of {span_days} trading days before {day}",
                before.found_days
            ))
            .into());
        }
        before.slice.start
    };
    let day_slice = day_sel.slice;
    let span_slice = WindowSlice::new(
        span_start,
        day_slice.end,
        format!("{span_days} days to {day}"),
    )?;
    let span_values = r.window(&span_slice)?;
    let day_values = r.window(&day_slice)?;
    let n = bins.unwrap_or_else(|| velleman_bins(day_values.len()));
    let spec = BinningSpec::fixed_from_extent(n, span_values)?;
    Ok(PmfSnapshot {
        day: bin_returns(day_values, &spec)?,
        span: bin_returns(span_values, &spec)?,
        day_slice,
        span_slice,
    })
}

pub fn cmd_pmf(args: &PmfArgs) -> Result<i32> {
    let ctx = context(&args.common)?;
    let insts = instruments(&ctx, &args.input)?;
    let day = config::parse_date(&args.day)?;
    let bins = args.bins.or(ctx.cfg.bins);
    fs::create_dir_all(&ctx.out)?;
    for inst in &insts {
        let (r, warnings) = load_returns(&ctx, inst)?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        let snap = pmf_snapshot(&r, day, args.span_days, bins).with_context(|| inst.id.clone())?;
        for (suffix, dist) in [("day", &snap.day), ("span", &snap.span)] {
            let mut w = create(&ctx.out.join(format!("{}_pmf_{suffix}.csv", inst.id)))?;
            dist.write_csv(&mut w)?;
            w.flush()?;
        }
        println!(
            "{}: H_day={:.6} H_span={:.6} bins={}",
            inst.id,
            snap.day.entropy(),
            snap.span.entropy(),
            snap.day.n_bins()
        );
    }
    Ok(EXIT_OK)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<i32> {
    let ctx = context(&args.common)?;
    let spec = SynthSpec {
        instrument_id: args.id.clone(),
        seed: args.seed,
        n_days: args.days,
        bars_per_day: args.bars_per_day,
        drift: args.drift,
        volatility: args.sigma,
        shocks: args.shocks.clone(),
        ..Default::default()
    };
    let (series, log) = generate(&spec)?;
    fs::create_dir_all(&ctx.out)?;
    let mut w = create(&ctx.out.join(format!("{}.csv", args.id)))?;
    write_csv(&series, &mut w)?;
    w.flush()?;
    let mut w = create(&ctx.out.join(format!("{}_injections.csv", args.id)))?;
    log.write_csv(&mut w)?;
    w.flush()?;
    println!(
        "{}: bars={} shocks={}",
        args.id,
        series.len(),
        log.records.len()
    );
    Ok(EXIT_OK)
}
