//! Run manifest loaded from TOML. Command-line flags override its values.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use serde::Deserialize;

use entropix_core::cumentropy::{AnchorMode, DetectorConfig, SequenceCount, WindowSequenceSpec};
use entropix_core::ingest::{ColumnMap, Frequency, DATE_FORMAT};
use entropix_core::returns::ReturnKind;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub instruments: Vec<InstrumentConfig>,
    pub out: Option<PathBuf>,
    /// Event date separating the before and after windows, `YYYY-MM-DD`.
    pub anchor: Option<String>,
    /// Length of each comparison window in trading days.
    pub trading_days: Option<usize>,
    pub bins: Option<usize>,
    /// `log` (default) or `nominal`.
    pub returns: Option<String>,
    pub dt_col: Option<String>,
    pub close_col: Option<String>,
    pub max_flat_run: Option<usize>,
    #[serde(default)]
    pub sequence: SequenceOverrides,
    #[serde(default)]
    pub detector: DetectorOverrides,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentConfig {
    pub id: String,
    pub path: PathBuf,
    #[serde(default = "default_frequency")]
    pub frequency: String,
}

fn default_frequency() -> String {
    Frequency::FiveMinute.as_str().to_string()
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceOverrides {
    pub base_length: Option<usize>,
    pub increment: Option<usize>,
    pub steps: Option<usize>,
    pub stride: Option<usize>,
    pub count: Option<usize>,
    /// `grow_right` or `grow_left`.
    pub anchor_mode: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorOverrides {
    pub theta: Option<f64>,
    pub persistence: Option<usize>,
    pub baseline: Option<usize>,
}

/// An instrument resolved to a concrete file and frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    pub id: String,
    pub path: PathBuf,
    pub frequency: Frequency,
}

impl RunConfig {
    /// Reads a manifest; relative instrument paths are taken relative to the
    /// manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for inst in &mut cfg.instruments {
            if inst.path.is_relative() {
                inst.path = base.join(&inst.path);
            }
        }
        if let Some(out) = &cfg.out {
            if out.is_relative() {
                cfg.out = Some(base.join(out));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = &self.anchor {
            parse_date(a)?;
        }
        if self.trading_days == Some(0) || self.bins == Some(0) {
            bail!("trading_days and bins must be positive");
        }
        for inst in &self.instruments {
            inst.frequency.parse::<Frequency>()?;
        }
        self.return_kind()?;
        self.sequence_spec(Frequency::FiveMinute)?.validate()?;
        Ok(())
    }

    pub fn instruments(&self) -> Result<Vec<Instrument>> {
        self.instruments
            .iter()
            .map(|i| {
                Ok(Instrument {
                    id: i.id.clone(),
                    path: i.path.clone(),
                    frequency: i.frequency.parse()?,
                })
            })
            .collect()
    }

    pub fn columns(&self) -> ColumnMap {
        let d = ColumnMap::default();
        ColumnMap::new(
            self.dt_col.clone().unwrap_or(d.datetime),
            self.close_col.clone().unwrap_or(d.close),
        )
    }

    pub fn return_kind(&self) -> Result<ReturnKind> {
        match self
            .returns
            .as_deref()
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            None | Some("log") => Ok(ReturnKind::Log),
            Some("nominal") => Ok(ReturnKind::Nominal),
            Some(other) => bail!("unknown return kind `{other}`"),
        }
    }

    pub fn anchor_date(&self) -> Result<Option<NaiveDate>> {
        self.anchor.as_deref().map(parse_date).transpose()
    }

    /// Frequency defaults with the manifest's overrides applied.
    pub fn sequence_spec(&self, frequency: Frequency) -> Result<WindowSequenceSpec> {
        let mut spec = WindowSequenceSpec::for_frequency(frequency);
        let o = &self.sequence;
        if let Some(v) = o.base_length {
            spec.base_length = v;
        }
        if let Some(v) = o.increment {
            spec.increment = v;
        }
        if let Some(v) = o.steps {
            spec.steps = v;
        }
        if let Some(v) = o.stride {
            spec.stride = v;
        }
        if let Some(v) = o.count {
            spec.count = SequenceCount::Fixed(v);
        }
        if let Some(m) = &o.anchor_mode {
            spec.anchor_mode = match m.to_ascii_lowercase().replace('-', "_").as_str() {
                "grow_right" => AnchorMode::GrowRight,
                "grow_left" => AnchorMode::GrowLeft,
                other => bail!("unknown anchor_mode `{other}`"),
            };
        }
        Ok(spec)
    }

    pub fn detector(&self) -> DetectorConfig {
        let mut d = DetectorConfig::default();
        if let Some(v) = self.detector.theta {
            d.threshold = v;
        }
        if let Some(v) = self.detector.persistence {
            d.min_persistence = v;
        }
        if let Some(v) = self.detector.baseline {
            d.baseline = v;
        }
        d
    }
}

pub fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT).with_context(|| format!("invalid date `{s}`"))
}
