//! Descriptive statistics of return windows and before/after comparisons.

use std::fmt;
use std::io::Write;

use crate::entropy::{window_entropy, BinningSpec};
use crate::error::{Error, Result};
use crate::returns::{ReturnSeries, WindowSlice};

/// Summary of one return window.
///
/// Variance uses the `N - 1` denominator. Skewness is the adjusted
/// Fisher–Pearson coefficient `G1` and kurtosis is the bias-corrected excess
/// kurtosis `G2`; they need at least 3 and 4 observations respectively and are
/// `None` below that. Quartiles interpolate linearly between order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_values(values: &[f64]) -> Result<SummaryStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(i));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / (nf - 1.0);
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);

    let skewness = (n >= 3).then(|| {
        if m2 == 0.0 {
            0.0
        } else {
            let g1 = m3 / m2.powf(1.5);
            g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0)
        }
    });
    let kurtosis = (n >= 4).then(|| {
        if m2 == 0.0 {
            0.0
        } else {
            let g2 = m4 / (m2 * m2) - 3.0;
            ((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0))
        }
    });

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(SummaryStats {
        count: n,
        mean,
        variance,
        std_dev: variance.sqrt(),
        min: sorted[0],
        max: sorted[n - 1],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        skewness,
        kurtosis,
    })
}

pub fn summarize(returns: &ReturnSeries, slice: &WindowSlice) -> Result<SummaryStats> {
    summarize_values(returns.window(slice)?)
}

/// Symmetric percentage difference `(after - before) / ((before + after) / 2)`
/// as a signed fraction.
pub fn pct_difference(before: f64, after: f64) -> Result<f64> {
    let denom = (before + after) / 2.0;
    if denom == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok((after - before) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Entropy(BinningSpec),
    StdDev,
    Kurtosis,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Entropy(_) => "entropy",
            Metric::StdDev => "std_dev",
            Metric::Kurtosis => "kurtosis",
        }
    }

    pub fn evaluate(&self, returns: &ReturnSeries, slice: &WindowSlice) -> Result<f64> {
        match self {
            Metric::Entropy(spec) => window_entropy(returns, slice, spec),
            Metric::StdDev => Ok(summarize(returns, slice)?.std_dev),
            Metric::Kurtosis => summarize(returns, slice)?.kurtosis.ok_or(Error::TooShort {
                needed: 4,
                got: slice.len(),
            }),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeforeAfterComparison {
    pub metric_name: String,
    pub before: f64,
    pub after: f64,
    /// `None` when `before + after == 0`.
    pub pct_difference: Option<f64>,
}

pub fn compare_windows(
    returns: &ReturnSeries,
    before: &WindowSlice,
    after: &WindowSlice,
    metric: Metric,
) -> Result<BeforeAfterComparison> {
    let b = metric.evaluate(returns, before)?;
    let a = metric.evaluate(returns, after)?;
    Ok(BeforeAfterComparison {
        metric_name: metric.name().to_string(),
        before: b,
        after: a,
        pct_difference: pct_difference(b, a).ok(),
    })
}

/// Column order of the summary-statistics report.
pub const SUMMARY_HEADER: &str =
    "instrument,window,returns,mean,minimum,maximum,skewness,kurtosis,variance,std_dev,q1,median,q3";

/// Writes one summary row; undefined moments are left empty.
pub fn write_summary_row<W: Write>(
    mut out: W,
    instrument: &str,
    window: &str,
    s: &SummaryStats,
) -> std::io::Result<()> {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    writeln!(
        out,
        "{instrument},{window},{},{:.6e},{:.6},{:.6},{},{},{:.6e},{:.6},{:.6},{:.6},{:.6}",
        s.count,
        s.mean,
        s.min,
        s.max,
        opt(s.skewness),
        opt(s.kurtosis),
        s.variance,
        s.std_dev,
        s.q1,
        s.median,
        s.q3
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Frequency;
    use crate::returns::ReturnKind;
    use approx::assert_abs_diff_eq;
    use chrono::{Duration, NaiveDate};

    fn series(values: Vec<f64>) -> ReturnSeries {
        let t0 = NaiveDate::from_ymd_opt(2025, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        let ts = (0..values.len())
            .map(|i| t0 + Duration::days(i as i64))
            .collect();
        ReturnSeries::new("S", ReturnKind::Log, Frequency::Daily, ts, values).unwrap()
    }

    #[test]
    fn mean_variance_of_one_two_three() {
        let s = summarize_values(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.variance, 1.0);
        assert_eq!(s.std_dev, 1.0);
        assert_eq!(s.kurtosis, None);
        assert_eq!(s.skewness, Some(0.0));
    }

    #[test]
    fn symmetric_values_have_zero_skew() {
        let s = summarize_values(&[-1.0, 1.0, -1.0, 1.0, -1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(s.skewness.unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn matches_reference_moments() {
        let xs = [1.0, 2.0, 3.0, 4.0, 10.0];
        let s = summarize_values(&xs).unwrap();
        let n = 5.0;
        let d: Vec<f64> = xs.iter().map(|x| x - 4.0).collect();
        let m2 = d.iter().map(|v| v * v).sum::<f64>() / n;
        let m3 = d.iter().map(|v| v * v * v).sum::<f64>() / n;
        let m4 = d.iter().map(|v| v.powi(4)).sum::<f64>() / n;
        let g1 = m3 / m2.powf(1.5) * (20f64).sqrt() / 3.0;
        let g2 = ((n + 1.0) * (m4 / (m2 * m2) - 3.0) + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
        assert_abs_diff_eq!(s.skewness.unwrap(), g1, epsilon = 1e-12);
        assert_abs_diff_eq!(s.kurtosis.unwrap(), g2, epsilon = 1e-12);
        // scipy.stats.skew / kurtosis with bias=False
        assert_abs_diff_eq!(s.skewness.unwrap(), 1.697_056_274_847_714, epsilon = 1e-12);
        assert_abs_diff_eq!(s.kurtosis.unwrap(), 3.152, epsilon = 1e-12);
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
    }

    #[test]
    fn quartiles_interpolate() {
        let s = summarize_values(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (1.75, 2.5, 3.25));
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            summarize_values(&[1.0]),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn pct_difference_examples() {
        assert_abs_diff_eq!(
            pct_difference(1.465, 1.099).unwrap(),
            -0.285_491_419_656_786_3,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pct_difference(1.177, 1.161).unwrap(),
            -0.013_686_911_890_504_7,
            epsilon = 1e-12
        );
        assert_eq!(pct_difference(0.7, 0.7).unwrap(), 0.0);
        assert!(matches!(
            pct_difference(1.0, -1.0),
            Err(Error::DegenerateDenominator)
        ));
    }

    #[test]
    fn identical_slices_compare_to_zero() {
        let r = series(vec![0.1, -0.2, 0.3, 0.05, -0.1, 0.2]);
        let w = WindowSlice::new(0, 6, "all").unwrap();
        let c = compare_windows(&r, &w, &w, Metric::StdDev).unwrap();
        assert_eq!(c.pct_difference, Some(0.0));
    }

    #[test]
    fn entropy_metric_uniform_vs_constant() {
        let mut v: Vec<f64> = (0..4).map(|i| i as f64).collect();
        v.extend([5.0; 4]);
        let r = series(v);
        let before = WindowSlice::new(0, 4, "b").unwrap();
        let after = WindowSlice::new(4, 8, "a").unwrap();
        let spec = BinningSpec::per_window(4).unwrap();
        let c = compare_windows(&r, &before, &after, Metric::Entropy(spec)).unwrap();
        assert_abs_diff_eq!(c.before, 4f64.ln(), epsilon = 1e-15);
        assert_eq!(c.after, 0.0);
        assert_eq!(c.pct_difference, Some(-2.0));
    }
}
