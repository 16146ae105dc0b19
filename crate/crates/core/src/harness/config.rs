//! Run configuration, deserialized from the sections `grid`, `scheme`,
//! `initial`, `forcing`, `constants`, `run` and `output`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::{ConstantsOverrides, ConstantsSet, Monitor};
use crate::error::{invalid, Result};
use crate::forcing::ForcingSpec;
use crate::grid::Grid;
use crate::initial::InitialData;
use crate::stepper::SchemeConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub scheme: SchemeConfig,
    pub initial: InitialData,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub constants: ConstantsOverrides,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub monitor: Monitor,
    /// Write a snapshot every this many steps; 0 disables snapshots.
    #[serde(default)]
    pub snapshot_every: u64,
    #[serde(default)]
    pub seed: u64,
    /// Keep stepping past the horizon of a short-time monitor. The bound
    /// is then no longer checked.
    #[serde(default)]
    pub allow_over_horizon: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Directory for `series.csv`, `report.json` and snapshots. Nothing is
    /// written when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// How the number of steps was specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    Steps(u64),
    EndTime(f64),
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n)
    }

    pub fn constants(&self) -> Result<ConstantsSet> {
        self.constants.resolve()
    }

    pub fn stop_rule(&self) -> Result<StopRule> {
        match (self.run.n_steps, self.run.t_end) {
            (Some(n), None) => Ok(StopRule::Steps(n)),
            (None, Some(t)) if t >= 0.0 && t.is_finite() => Ok(StopRule::EndTime(t)),
            (None, Some(t)) => Err(invalid(format!("t_end must be non-negative and finite, got {t}"))),
            _ => Err(invalid("exactly one of run.n_steps and run.t_end must be given")),
        }
    }

    /// Number of steps: `t_end / k` rounded to the nearest integer when it
    /// is within 1e-9 relative of one, else rounded up.
    pub fn n_steps(&self) -> Result<u64> {
        match self.stop_rule()? {
            StopRule::Steps(n) => Ok(n),
            StopRule::EndTime(t) => {
                let r = t / self.scheme.k;
                let nearest = r.round();
                let n = if (r - nearest).abs() <= 1e-9 * nearest.max(1.0) { nearest } else { r.ceil() };
                Ok(n as u64)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.scheme.validate()?;
        self.constants()?;
        self.n_steps()?;
        Ok(())
    }
}
