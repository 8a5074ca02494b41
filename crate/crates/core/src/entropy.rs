//! Binned Shannon entropy of return windows.
//!
//! Returns in a window are histogrammed over `n` evenly spaced bins and the
//! entropy `H = -Σ p_i ln p_i` of the bin masses is reported in nats. Bins
//! are half-open `[lo + iΔx, lo + (i+1)Δx)` except the last, which is closed
//! so that the window maximum is always counted.

use std::io::Write;

use crate::error::{Error, Result};
use crate::returns::{ReturnSeries, WindowSlice};

/// Scale factor turning a median absolute deviation into a normal-consistent
/// standard deviation estimate.
pub const MAD_TO_SIGMA: f64 = 1.482_602_218_505_602;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangePolicy {
    /// Each window is binned over its own `[min, max]`.
    PerWindow,
    /// All windows share `[lo, hi]`; values outside are clamped into the end bins.
    Fixed { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningSpec {
    n_bins: usize,
    range: RangePolicy,
}

impl BinningSpec {
    pub fn new(n_bins: usize, range: RangePolicy) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::InvalidSpec("n_bins must be at least 1".into()));
        }
        if let RangePolicy::Fixed { lo, hi } = range {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidSpec(format!(
                    "fixed range requires finite lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { n_bins, range })
    }

    pub fn per_window(n_bins: usize) -> Result<Self> {
        Self::new(n_bins, RangePolicy::PerWindow)
    }

    pub fn fixed(n_bins: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(n_bins, RangePolicy::Fixed { lo, hi })
    }

    /// Fixed range spanning the extent of `values`. A constant sample gets a
    /// unit-width range centred on its value.
    pub fn fixed_from_extent(n_bins: usize, values: &[f64]) -> Result<Self> {
        let (lo, hi) = extent(values)?;
        if hi > lo {
            Self::fixed(n_bins, lo, hi)
        } else {
            Self::fixed(n_bins, lo - 0.5, lo + 0.5)
        }
    }

    /// Fixed range `median ± scale · σ̂` where `σ̂` is the normal-consistent
    /// MAD of `values`. Falls back to the sample extent when the MAD is zero.
    pub fn fixed_robust(n_bins: usize, values: &[f64], scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "robust range scale must be positive, got {scale}"
            )));
        }
        extent(values)?;
        let med = median(values.to_vec());
        let mad = median(values.iter().map(|v| (v - med).abs()).collect());
        let half = scale * MAD_TO_SIGMA * mad;
        if half > 0.0 {
            Self::fixed(n_bins, med - half, med + half)
        } else {
            Self::fixed_from_extent(n_bins, values)
        }
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn range(&self) -> RangePolicy {
        self.range
    }

    /// Bin width `Δx` for a fixed range; `None` when ranging per window.
    pub fn bin_width(&self) -> Option<f64> {
        match self.range {
            RangePolicy::Fixed { lo, hi } => Some((hi - lo) / self.n_bins as f64),
            RangePolicy::PerWindow => None,
        }
    }

    pub fn with_bins(self, n_bins: usize) -> Result<Self> {
        Self::new(n_bins, self.range)
    }
}

fn extent(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue(i));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

pub(crate) fn median(mut v: Vec<f64>) -> f64 {
    debug_assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Maps values to bin indices for one concrete `[lo, hi]` and bin count.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BinIndexer {
    lo: f64,
    hi: f64,
    width: f64,
    n: usize,
}

impl BinIndexer {
    pub(crate) fn new(lo: f64, hi: f64, n: usize) -> Self {
        Self {
            lo,
            hi,
            width: (hi - lo) / n as f64,
            n,
        }
    }

    /// Bin index of `x` and whether it had to be clamped.
    #[inline]
    pub(crate) fn index(&self, x: f64) -> (usize, bool) {
        if x < self.lo {
            return (0, true);
        }
        let clamped = x > self.hi;
        if self.n == 1 {
            return (0, clamped);
        }
        let mut pos = (((x - self.lo) / self.width) as usize).min(self.n - 1);
        // the division can land one bin off for values on an edge
        if pos > 0 && x < self.edge(pos) {
            pos -= 1;
        } else if pos + 1 < self.n && x >= self.edge(pos + 1) {
            pos += 1;
        }
        (pos, clamped)
    }

    /// Lower edge of bin `i`, `lo + i·(hi - lo)/n`.
    #[inline]
    pub(crate) fn edge(&self, i: usize) -> f64 {
        bin_edge(self.lo, self.hi, self.n, i)
    }
}

#[inline]
fn bin_edge(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if i == n {
        hi
    } else {
        lo + i as f64 * (hi - lo) / n as f64
    }
}

/// Interval probability masses of a sample over evenly spaced bins.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDistribution {
    lo: f64,
    hi: f64,
    counts: Vec<usize>,
    masses: Vec<f64>,
    support_count: usize,
    clamped: usize,
}

impl BinnedDistribution {
    pub(crate) fn from_counts(lo: f64, hi: f64, counts: Vec<usize>, clamped: usize) -> Self {
        let support_count: usize = counts.iter().sum();
        debug_assert!(support_count > 0);
        let total = support_count as f64;
        let masses = counts.iter().map(|&c| c as f64 / total).collect();
        Self {
            lo,
            hi,
            counts,
            masses,
            support_count,
            clamped,
        }
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of observations `N` behind the masses.
    pub fn support_count(&self) -> usize {
        self.support_count
    }

    /// Values that fell outside a fixed range and were clamped into an end bin.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// `(bin_lo, bin_hi)` for every bin.
    pub fn edges(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.counts.len();
        (0..n).map(move |i| {
            (
                bin_edge(self.lo, self.hi, n, i),
                bin_edge(self.lo, self.hi, n, i + 1),
            )
        })
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(self)
    }

    /// Writes the `bin_lo,bin_hi,mass` snapshot form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bin_lo,bin_hi,mass")?;
        for ((lo, hi), m) in self.edges().zip(&self.masses) {
            writeln!(out, "{lo:.6},{hi:.6},{m:.6}")?;
        }
        Ok(())
    }
}

/// Bin count `ceil(2·√N)`, evaluated exactly in integers.
pub fn velleman_bins(sample_count: usize) -> usize {
    let target = 4 * sample_count.max(1) as u128;
    let mut k = (target as f64).sqrt() as u128;
    while k * k > target {
        k -= 1;
    }
    while k * k < target {
        k += 1;
    }
    (k as usize).max(1)
}

/// Histograms `values` under `spec`.
///
/// With per-window ranging an all-equal sample collapses to a single bin of
/// mass one. With a fixed range, out-of-range values are clamped into the
/// nearest end bin and reported by [`BinnedDistribution::clamped`].
pub fn bin_returns(values: &[f64], spec: &BinningSpec) -> Result<BinnedDistribution> {
    let (vmin, vmax) = extent(values)?;
    let (lo, hi, n) = match spec.range() {
        RangePolicy::PerWindow if vmax > vmin => (vmin, vmax, spec.n_bins()),
        RangePolicy::PerWindow => (vmin, vmax, 1),
        RangePolicy::Fixed { lo, hi } => (lo, hi, spec.n_bins()),
    };
    let indexer = BinIndexer::new(lo, hi, n);
    let mut counts = vec![0usize; n];
    let mut clamped = 0;
    for &v in values {
        let (i, c) = indexer.index(v);
        counts[i] += 1;
        clamped += c as usize;
    }
    Ok(BinnedDistribution::from_counts(lo, hi, counts, clamped))
}

/// `-Σ p ln p` over `masses`, with `0 · ln 0 = 0`.
pub fn entropy_of_masses(masses: &[f64]) -> f64 {
    let h: f64 = masses
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    // Rounding can leave -0.0 or a tiny negative for a single unit mass.
    h.max(0.0)
}

pub(crate) fn entropy_of_counts(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    h.max(0.0)
}

/// Shannon entropy of a binned distribution in nats.
pub fn shannon_entropy(dist: &BinnedDistribution) -> f64 {
    entropy_of_masses(dist.masses())
}

/// Entropy of the returns covered by `slice`.
pub fn window_entropy(
    returns: &ReturnSeries,
    slice: &WindowSlice,
    spec: &BinningSpec,
) -> Result<f64> {
    let values = returns.window(slice)?;
    Ok(shannon_entropy(&bin_returns(values, spec)?))
}
