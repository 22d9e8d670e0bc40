use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use logipure::codes::{CodeDefinition, LogicalTarget};
use logipure::emr::{AqResetPolicy, XYSetup};
use logipure::measurement::{MeasurementSetting, Outcome};
use logipure::table1::Table1Calibration;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fig2,
    Fig3,
    Fig4,
    Table1,
    Purify,
    Decompose,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Table1 => "table1",
            Experiment::Purify => "purify",
            Experiment::Decompose => "decompose",
        }
    }
}

/// Inclusive, evenly spaced axis. A single point sits at `min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Range {
    pub const fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.max } else { self.min + step * i as f64 })
            .collect()
    }

    fn validate(&self, name: &str) -> anyhow::Result<()> {
        ensure!(self.points >= 1, "grid.{name}: at least one point required");
        ensure!(
            self.min.is_finite() && self.max.is_finite() && self.min <= self.max,
            "grid.{name}: need finite min <= max, got [{}, {}]",
            self.min,
            self.max
        );
        ensure!(self.points == 1 || self.min < self.max, "grid.{name}: several points on an empty interval");
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub a: Range,
    pub t: Range,
    pub beta: Range,
    pub j_s: Range,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            a: Range::new(0.0, PI, 50),
            t: Range::new(0.0, 10.0, 50),
            beta: Range::new(0.0, 3.0, 60),
            j_s: Range::new(0.1, 3.0, 60),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub g: f64,
    /// Auxiliary energy; resonant with the summed code gaps when absent.
    pub e_a: Option<f64>,
    pub theta: f64,
    pub phi: f64,
    /// Number of identical codes.
    pub codes: usize,
    pub beta: f64,
    pub f_targets: Vec<f64>,
    pub max_rounds: usize,
    pub aq_reset: AqResetPolicy,
    /// Measurement direction and outcome for single-trajectory runs.
    pub a: f64,
    pub b: f64,
    pub k: Outcome,
    pub t: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            g: 1.0,
            e_a: None,
            theta: PI / 3.0,
            phi: 0.0,
            codes: 1,
            beta: 0.1,
            f_targets: vec![0.66, 0.9],
            max_rounds: 200,
            aq_reset: AqResetPolicy::Keep,
            a: PI / 2.0,
            b: 0.0,
            k: Outcome::Plus,
            t: PI / 4.0,
        }
    }
}

impl ProtocolConfig {
    pub fn target(&self) -> anyhow::Result<LogicalTarget> {
        LogicalTarget::new(self.theta, self.phi).context("protocol.theta/phi")
    }

    pub fn setting(&self) -> anyhow::Result<MeasurementSetting> {
        MeasurementSetting::new(self.a, self.b, self.k).context("protocol.a/b")
    }

    fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.g.is_finite() && self.g > 0.0, "protocol.g must be positive, got {}", self.g);
        if let Some(e) = self.e_a {
            ensure!(e.is_finite() && e >= 0.0, "protocol.e_a must be non-negative, got {e}");
        }
        ensure!((1..=3).contains(&self.codes), "protocol.codes must be 1..=3, got {}", self.codes);
        ensure!(self.beta.is_finite() && self.beta >= 0.0, "protocol.beta must be non-negative, got {}", self.beta);
        ensure!(!self.f_targets.is_empty(), "protocol.f_targets is empty");
        for &f in &self.f_targets {
            ensure!(f > 0.0 && f <= 1.0, "protocol.f_targets entry {f} outside (0, 1]");
        }
        ensure!((1..=100_000).contains(&self.max_rounds), "protocol.max_rounds must be 1..=100000");
        ensure!(self.t.is_finite() && self.t > 0.0, "protocol.t must be positive, got {}", self.t);
        self.target()?;
        self.setting()?;
        Ok(())
    }
}

/// Heisenberg chain with XY-coupled auxiliary qubits, for `purify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XYPurify {
    pub setup: XYSetup,
    #[serde(default = "unit")]
    pub j_s: f64,
    /// One setting per auxiliary qubit.
    pub settings: Vec<MeasurementSetting>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Table1Options {
    /// 1-based row indices; empty selects every row.
    pub rows: Vec<usize>,
    pub calibration: Table1Calibration,
    /// Auxiliary energies to scan for each selected row, besides the calibrated one.
    pub scan_energies: Vec<f64>,
}

impl Default for Table1Options {
    fn default() -> Self {
        Self { rows: vec![1, 2, 3, 4, 5, 6, 7, 9, 11], calibration: Table1Calibration::default(), scan_energies: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// When present, must agree with the subcommand.
    pub experiment: Option<Experiment>,
    pub code: CodeDefinition,
    pub grid: GridConfig,
    pub protocol: ProtocolConfig,
    pub xy: Option<XYPurify>,
    pub table1: Table1Options,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            code: CodeDefinition::repetition(),
            grid: GridConfig::default(),
            protocol: ProtocolConfig::default(),
            xy: None,
            table1: Table1Options::default(),
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("parsing config JSON")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.grid.a.validate("a")?;
        self.grid.t.validate("t")?;
        self.grid.beta.validate("beta")?;
        self.grid.j_s.validate("j_s")?;
        ensure!(self.grid.a.min >= 0.0 && self.grid.a.max <= PI, "grid.a must lie in [0, pi]");
        ensure!(self.grid.t.min >= 0.0, "grid.t must be non-negative");
        ensure!(self.grid.beta.min >= 0.0, "grid.beta must be non-negative");
        ensure!(self.grid.j_s.min > 0.0, "grid.j_s must be positive");
        self.protocol.validate()?;
        if let Some(xy) = &self.xy {
            xy.setup.validate().context("xy.setup")?;
            ensure!(
                xy.settings.len() == xy.setup.attachments.len(),
                "xy.settings needs one entry per auxiliary qubit"
            );
            for s in &xy.settings {
                s.validate().context("xy.settings")?;
            }
            ensure!(xy.j_s.is_finite() && xy.j_s > 0.0, "xy.j_s must be positive");
        }
        let n_rows = logipure::table1::printed_rows().len();
        for &r in &self.table1.rows {
            ensure!((1..=n_rows).contains(&r), "table1.rows entry {r} outside 1..={n_rows}");
        }
        ensure!(self.table1.calibration.max_rounds >= 1, "table1.calibration.max_rounds must be positive");
        Ok(())
    }

    /// Resolves the subcommand against the `experiment` field.
    pub fn check_experiment(&self, requested: Experiment) -> anyhow::Result<()> {
        match self.experiment {
            Some(e) if e != requested => {
                bail!("config is for experiment {} but {} was requested", e.name(), requested.name())
            }
            _ => Ok(()),
        }
    }

    /// Single-line JSON for embedding in output headers.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
