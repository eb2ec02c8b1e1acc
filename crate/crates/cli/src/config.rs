//! Run configuration: the JSON file accepted by `--config`, merged with
//! command-line flags. The merged value is what gets embedded in every
//! output header, so feeding it back through `--config` reproduces a run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::ValueEnum;
use jpa_core::classical_oracle::OracleConfig;
use jpa_core::linear::linspace;
use jpa_core::saturation::{EnvelopeModel, SimConfig};
use jpa_core::{DeviceParams, JpaError, Order};
use serde::{Deserialize, Serialize};

/// Inclusive evenly spaced grid, written `lo,hi,points` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        Grid { lo, hi, points }
    }

    pub fn validate(&self, field: &'static str) -> Result<(), JpaError> {
        let bad = |reason: String| Err(JpaError::Validation { field, reason });
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return bad(format!(
                "bounds must be finite, got {}..{}",
                self.lo, self.hi
            ));
        }
        if self.points == 0 {
            return bad("grid is empty".into());
        }
        if self.points > 1 && self.hi <= self.lo {
            return bad(format!("need lo < hi, got {}..{}", self.lo, self.hi));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.points)
    }

    /// Log-spaced values; both ends must be positive.
    pub fn log_values(&self, field: &'static str) -> Result<Vec<f64>, JpaError> {
        self.validate(field)?;
        if self.lo <= 0.0 {
            return Err(JpaError::Validation {
                field,
                reason: format!("log grid needs lo > 0, got {}", self.lo),
            });
        }
        Ok(jpa_core::saturation::logspace(
            self.lo,
            self.hi,
            self.points,
        ))
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [lo, hi, points] = parts.as_slice() else {
            return Err(format!("expected lo,hi,points, got {s:?}"));
        };
        let num = |x: &str| x.parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        Ok(Grid {
            lo: num(lo)?,
            hi: num(hi)?,
            points: points.parse().map_err(|e| format!("{points:?}: {e}"))?,
        })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.lo, self.hi, self.points)
    }
}

/// Reference operating point for `match-power`, written `order=1,r=0.99`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub order: Order,
    pub r: f64,
}

impl FromStr for TargetSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut order = None;
        let mut r = None;
        for part in s.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value in {part:?}"))?;
            match key.trim() {
                "order" => order = Some(value.trim().parse::<Order>().map_err(|e| e.to_string())?),
                "r" => r = Some(value.trim().parse::<f64>().map_err(|e| format!("r: {e}"))?),
                other => return Err(format!("unknown key {other:?}; expected order or r")),
            }
        }
        Ok(TargetSpec {
            order: order.ok_or("missing order=")?,
            r: r.ok_or("missing r=")?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Hold the pump at the small-signal max-gain frequency.
    #[default]
    Fixed,
    /// Re-maximize over the pump-frequency grid at every amplitude.
    Remaximize,
}

/// Everything a run can be configured with. Each subcommand reads the
/// fields it needs; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceParams>,
    /// Quality factors overriding `device.q` (lingain).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<Order>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<Grid>,
    /// Fixed pump frequency (saturation, dynrange).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_fixed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_from: Option<TargetSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<EnvelopeModel>>,
    /// Input amplitudes in units of the pump input amplitude, log-spaced.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<Protocol>,
    /// Values of `omega0 / (K Q)` (dynrange).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| invalid("config", format!("{}: {e}", path.display())))
    }
}

pub fn load_device(path: &Path) -> anyhow::Result<DeviceParams> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading device {}", path.display()))?;
    let device: DeviceParams = serde_json::from_str(&text)
        .map_err(|e| invalid("device", format!("{}: {e}", path.display())))?;
    device.validate()?;
    Ok(device)
}

pub fn invalid(field: &'static str, reason: impl Into<String>) -> anyhow::Error {
    JpaError::Validation {
        field,
        reason: reason.into(),
    }
    .into()
}

/// Command-line value if given, else the config value, else `default`.
pub fn pick<T: Clone>(flag: Option<T>, config: &mut Option<T>, default: impl FnOnce() -> T) -> T {
    let value = flag.or_else(|| config.clone()).unwrap_or_else(default);
    *config = Some(value.clone());
    value
}

pub fn require_positive(field: &'static str, v: f64) -> anyhow::Result<f64> {
    if !(v.is_finite() && v > 0.0) {
        bail!(invalid(field, format!("must be finite and > 0, got {v}")));
    }
    Ok(v)
}
