//! The JSON run report. Field order is fixed by declaration order, so
//! identical runs serialize identically apart from `timing`.

use std::collections::BTreeMap;
use std::path::Path;

use hbt_core::FringeFitF64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub config: BTreeMap<String, String>,
    pub arms: Vec<ArmReport>,
    /// Checks that involve more than one arm.
    pub comparisons: Vec<Comparison>,
    pub seed: u64,
    pub timing: Timing,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.comparisons
            .iter()
            .chain(self.arms.iter().flat_map(|a| &a.comparisons))
            .all(|c| c.pass)
    }

    pub fn arm(&self, name: &str) -> Option<&ArmReport> {
        self.arms.iter().find(|a| a.name == name)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::malformed(path, e))
    }
}

/// One simulated system within a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub name: String,
    /// `independent-packets`, `entangled-pair` or `classical-waves`.
    pub model: String,
    pub exchange: Option<String>,
    pub parameters: BTreeMap<String, f64>,
    pub analytic: Analytic,
    pub mc: Option<McResult>,
    /// Monte Carlo against closed form.
    pub comparisons: Vec<Comparison>,
    pub curve: Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analytic {
    pub fringe_period: Option<f64>,
    pub fringe_wavenumber: Option<f64>,
    /// Rate `a` of the Gaussian envelope `e^{-a Δx²}` of the exchange term.
    pub envelope_rate: Option<f64>,
    pub visibility: f64,
    pub total_probability: Option<f64>,
    pub entanglement: Option<Entanglement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entanglement {
    pub ratio: f64,
    pub regime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub samples: u64,
    pub proposals: u64,
    pub acceptance_rate: f64,
    pub bins: usize,
    pub range: [f64; 2],
    pub underflow: u64,
    pub overflow: u64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// `analytic` or `blind` starting point.
    pub start: String,
    pub period: f64,
    pub visibility: f64,
    pub contrast: f64,
    pub amplitude: f64,
    pub envelope_rate: f64,
    pub envelope_scale: f64,
    pub cosh_rate: f64,
    pub wavenumber: f64,
    pub residual_rms: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub iterations: usize,
    pub starts: usize,
}

impl FitResult {
    pub fn new(start: &str, f: &FringeFitF64) -> Self {
        FitResult {
            start: start.to_string(),
            period: f.period,
            visibility: f.visibility,
            contrast: f.contrast,
            amplitude: f.amplitude,
            envelope_rate: f.envelope_rate,
            envelope_scale: f.envelope_scale,
            cosh_rate: f.cosh_rate,
            wavenumber: f.wavenumber,
            residual_rms: f.residual_rms,
            chi_square: f.chi_square,
            degrees_of_freedom: f.degrees_of_freedom,
            iterations: f.iterations,
            starts: f.starts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonKind {
    /// `|value - reference| / |reference| ≤ tolerance`
    Relative,
    /// `|value - reference| ≤ tolerance`
    Absolute,
    /// `value ≥ reference`
    AtLeast,
    /// `value ≤ reference`
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub kind: ComparisonKind,
    pub value: f64,
    pub reference: f64,
    pub delta: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Comparison {
    pub fn relative(name: &str, value: f64, reference: f64, tolerance: f64) -> Self {
        let diff = (value - reference).abs();
        let delta = if reference == 0.0 {
            diff
        } else {
            diff / reference.abs()
        };
        Self::with(
            name,
            ComparisonKind::Relative,
            value,
            reference,
            delta,
            tolerance,
            delta <= tolerance,
        )
    }

    pub fn absolute(name: &str, value: f64, reference: f64, tolerance: f64) -> Self {
        let delta = (value - reference).abs();
        Self::with(
            name,
            ComparisonKind::Absolute,
            value,
            reference,
            delta,
            tolerance,
            delta <= tolerance,
        )
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        let delta = value - bound;
        Self::with(
            name,
            ComparisonKind::AtLeast,
            value,
            bound,
            delta,
            0.0,
            delta >= 0.0,
        )
    }

    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        let delta = value - bound;
        Self::with(
            name,
            ComparisonKind::AtMost,
            value,
            bound,
            delta,
            0.0,
            delta <= 0.0,
        )
    }

    fn with(
        name: &str,
        kind: ComparisonKind,
        value: f64,
        reference: f64,
        delta: f64,
        tolerance: f64,
        pass: bool,
    ) -> Self {
        Comparison {
            name: name.to_string(),
            kind,
            value,
            reference,
            delta,
            tolerance,
            pass,
        }
    }
}

/// Wall-clock seconds; the only part of a report that varies between
/// identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub analytic_seconds: f64,
    pub mc_seconds: f64,
    pub total_seconds: f64,
}
