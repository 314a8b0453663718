//! Scenario configuration: a flat `key = value` map assembled from a preset,
//! an optional file and command-line overrides, then validated into typed
//! parameters before anything is computed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hbt_core::coincidence::{DEFAULT_BINS, MIN_BINS};
use hbt_core::{
    ClassicalParams, EprParams, Exchange, PacketParams, PhaseMode, PropagationInput, SamplerConfig,
};

use crate::error::{usage_from, CliError, Result};
use crate::presets;

pub const DEFAULT_SCAN_MIN: f64 = -200.0;
pub const DEFAULT_SCAN_MAX: f64 = 200.0;
pub const DEFAULT_SCAN_POINTS: usize = 401;
pub const DEFAULT_QUANTUM_SAMPLES: u64 = 1_000_000;
/// Phase draws per scan point for the classical Monte Carlo.
pub const DEFAULT_CLASSICAL_SAMPLES: u64 = 10_000;
pub const DEFAULT_OUTPUT_DIR: &str = "hbt-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    ClassicalHbt,
    IndependentBosons,
    IndependentFermions,
    EntangledEpr,
    GhoshMandel,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::ClassicalHbt,
        Scenario::IndependentBosons,
        Scenario::IndependentFermions,
        Scenario::EntangledEpr,
        Scenario::GhoshMandel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ClassicalHbt => "classical-hbt",
            Scenario::IndependentBosons => "independent-bosons",
            Scenario::IndependentFermions => "independent-fermions",
            Scenario::EntangledEpr => "entangled-epr",
            Scenario::GhoshMandel => "ghosh-mandel",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanVariable {
    /// `x₁ - x₂` with the pair centred on `scan.center`.
    Dx,
    /// `x₂` with `x₁` held at `scan.x1`.
    X2,
}

impl ScanVariable {
    pub fn name(self) -> &'static str {
        match self {
            ScanVariable::Dx => "dx",
            ScanVariable::X2 => "x2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub variable: ScanVariable,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    /// `scan.center` for a Δx scan, `scan.x1` for an x₂ scan.
    pub anchor: f64,
}

impl ScanSpec {
    /// Evenly spaced values from `min` to `max` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        let last = self.points - 1;
        let step = (self.max - self.min) / last as f64;
        (0..self.points)
            .map(|j| {
                if j == last {
                    self.max
                } else {
                    self.min + step * j as f64
                }
            })
            .collect()
    }

    /// Detector positions `(x₁, x₂)` for one scan value.
    pub fn positions(&self, v: f64) -> (f64, f64) {
        match self.variable {
            ScanVariable::Dx => (self.anchor + 0.5 * v, self.anchor - 0.5 * v),
            ScanVariable::X2 => (self.anchor, v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitChoice {
    /// Start from the analytic marginal of the scenario.
    Analytic,
    /// Start from the histogram alone.
    Blind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSpec {
    pub samples: u64,
    pub bins: usize,
    /// Half-width of the histogram range; the model default when absent.
    pub half_range: Option<f64>,
    pub max_rejection_factor: f64,
    pub fit: FitChoice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub directory: PathBuf,
    pub csv: bool,
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Physics {
    Classical(ClassicalParams<f64>),
    Packets(PacketParams<f64>),
    Epr(EprParams<f64>),
    GhoshMandel {
        unentangled: PacketParams<f64>,
        entangled: EprParams<f64>,
    },
}

/// A validated scenario ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub physics: Physics,
    pub scan: ScanSpec,
    pub mc: Option<McSpec>,
    pub seed: u64,
    pub output: OutputSpec,
    /// Every key that took part, including defaults, as text.
    pub echo: BTreeMap<String, String>,
}

impl ScenarioConfig {
    pub fn sampler(&self) -> Option<SamplerConfig<f64>> {
        self.mc.map(|mc| SamplerConfig {
            max_rejection_factor: mc.max_rejection_factor,
            ..SamplerConfig::new(mc.samples, self.seed)
        })
    }
}

/// Layered `key = value` settings; later layers replace earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigBuilder {
    values: BTreeMap<String, String>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn preset(&mut self, name: &str) -> Result<&mut Self> {
        let preset = presets::find(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown preset `{name}`; available: {}",
                presets::names().join(", ")
            ))
        })?;
        for (k, v) in preset.values {
            self.insert(k, v);
        }
        Ok(self)
    }

    pub fn file(&mut self, path: &Path) -> Result<&mut Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.text(&text, &path.display().to_string())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn text(&mut self, text: &str, origin: &str) -> Result<&mut Self> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_assignment(line).ok_or_else(|| {
                CliError::Usage(format!(
                    "{origin}:{}: expected `key = value`, got `{line}`",
                    n + 1
                ))
            })?;
            self.insert(k, v);
        }
        Ok(self)
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<&mut Self> {
        let (k, v) = split_assignment(assignment).ok_or_else(|| {
            CliError::Usage(format!("--set expects key=value, got `{assignment}`"))
        })?;
        self.insert(k, v);
        Ok(self)
    }

    pub fn insert(&mut self, key: &str, value: &str) -> &mut Self {
        self.values
            .insert(key.trim().to_string(), value.trim().to_string());
        self
    }

    pub fn build(&self) -> Result<ScenarioConfig> {
        let mut f = Fields::new(&self.values);
        let scenario = f.required("scenario", "a scenario name", |s| s.parse().ok())?;
        let seed = f.count_or("seed", 0, parse_count)?;
        let physics = match scenario {
            Scenario::ClassicalHbt => Physics::Classical(classical(&mut f)?),
            Scenario::IndependentBosons => Physics::Packets(packets(&mut f, Exchange::Boson)?),
            Scenario::IndependentFermions => Physics::Packets(packets(&mut f, Exchange::Fermion)?),
            Scenario::EntangledEpr => Physics::Epr(entangled(&mut f)?),
            Scenario::GhoshMandel => ghosh_mandel(&mut f)?,
        };
        let scan = scan(&mut f)?;
        let mc = mc(&mut f, scenario)?;
        let output = output(&mut f)?;
        f.finish(scenario)?;
        Ok(ScenarioConfig {
            scenario,
            physics,
            scan,
            mc,
            seed,
            output,
            echo: f.echo,
        })
    }
}

fn split_assignment(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    (!k.is_empty()).then_some((k, v.trim()))
}

/// Reads keys from the layered map while recording which ones were used.
struct Fields<'a> {
    values: &'a BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

impl<'a> Fields<'a> {
    fn new(values: &'a BTreeMap<String, String>) -> Self {
        Fields {
            values,
            echo: BTreeMap::new(),
        }
    }

    fn get<T>(
        &mut self,
        key: &str,
        expected: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>> {
        let Some(raw) = self.values.get(key) else {
            return Ok(None);
        };
        self.echo.insert(key.to_string(), raw.clone());
        parse(raw).map(Some).ok_or_else(|| {
            CliError::Usage(format!("invalid `{key}`: expected {expected}, got `{raw}`"))
        })
    }

    fn required<T>(
        &mut self,
        key: &str,
        expected: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<T> {
        self.get(key, expected, parse)?
            .ok_or_else(|| CliError::Usage(format!("missing required field `{key}`")))
    }

    fn count_or<T: fmt::Display>(
        &mut self,
        key: &str,
        default: T,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<T> {
        match self.get(key, "a non-negative integer", parse)? {
            Some(v) => Ok(v),
            None => {
                self.echo.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    fn real(&mut self, key: &str) -> Result<Option<f64>> {
        self.get(key, "a number", parse_real)
    }

    fn required_real(&mut self, key: &str) -> Result<f64> {
        self.required(key, "a number", parse_real)
    }

    fn real_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.real(key)? {
            Some(v) => Ok(v),
            None => {
                self.echo.insert(key.to_string(), format!("{default}"));
                Ok(default)
            }
        }
    }

    fn exchange(&mut self) -> Result<Exchange> {
        let parse = |s: &str| match s {
            "boson" | "+1" | "1" => Some(Exchange::Boson),
            "fermion" | "-1" => Some(Exchange::Fermion),
            _ => None,
        };
        match self.get("exchange", "`boson` or `fermion`", parse)? {
            Some(e) => Ok(e),
            None => {
                self.echo.insert("exchange".into(), "boson".into());
                Ok(Exchange::Boson)
            }
        }
    }

    /// Every supplied key must have been read by the scenario.
    fn finish(&self, scenario: Scenario) -> Result<()> {
        let unused: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !self.echo.contains_key(*k))
            .map(String::as_str)
            .collect();
        if unused.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "field{} {} not used by scenario `{scenario}`",
                if unused.len() == 1 { "" } else { "s" },
                unused
                    .iter()
                    .map(|k| format!("`{k}`"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| !v.is_nan())
}

/// Non-negative integer, also accepting exact floating forms such as `1e6`.
fn parse_count(s: &str) -> Option<u64> {
    s.parse::<u64>().ok().or_else(|| {
        let v: f64 = s.parse().ok()?;
        (v >= 0.0 && v.fract() == 0.0 && v <= 9_007_199_254_740_992.0).then_some(v as u64)
    })
}

/// One of `delta`, `time`, or `wavelength` with `distance`.
fn propagation(f: &mut Fields) -> Result<Option<PropagationInput<f64>>> {
    let delta = f.real("delta")?;
    let time = f.real("time")?;
    let wavelength = f.real("wavelength")?;
    let distance = f.real("distance")?;
    let input = match (delta, time, wavelength, distance) {
        (None, None, None, None) => return Ok(None),
        (Some(d), None, None, None) => PropagationInput::Spread(d),
        (None, Some(t), None, None) => {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(CliError::Usage(format!(
                    "invalid `time`: must be finite and non-negative, got {t}"
                )));
            }
            PropagationInput::Time(t)
        }
        (None, None, Some(wavelength), Some(distance)) => PropagationInput::Optical {
            wavelength,
            distance,
        },
        (None, None, Some(_), None) => {
            return Err(CliError::Usage("`wavelength` requires `distance`".into()))
        }
        (None, None, None, Some(_)) => {
            return Err(CliError::Usage("`distance` requires `wavelength`".into()))
        }
        _ => return Err(CliError::Usage(
            "conflicting fields: give only one of `delta`, `time`, or `wavelength` with `distance`"
                .into(),
        )),
    };
    input.spread().map_err(usage_from)?;
    Ok(Some(input))
}

fn required_propagation(f: &mut Fields) -> Result<PropagationInput<f64>> {
    propagation(f)?.ok_or_else(|| {
        CliError::Usage(
            "missing propagation: set `delta`, `time`, or `wavelength` with `distance`".into(),
        )
    })
}

fn packets(f: &mut Fields, exchange: Exchange) -> Result<PacketParams<f64>> {
    let epsilon = f.required_real("epsilon")?;
    let x0 = f.required_real("x0")?;
    let propagation = required_propagation(f)?;
    PacketParams::new(epsilon, x0, exchange, propagation).map_err(usage_from)
}

fn entangled(f: &mut Fields) -> Result<EprParams<f64>> {
    let sigma = f.required_real("sigma")?;
    let omega = f.required_real("omega")?;
    let x0 = f.required_real("x0")?;
    let exchange = f.exchange()?;
    let delta_e = f.real("delta_e")?;
    match (delta_e, propagation(f)?) {
        (Some(d), None) => EprParams::new(sigma, omega, x0, exchange, d),
        (None, Some(p)) => EprParams::with_propagation(sigma, omega, x0, exchange, p),
        (None, None) => {
            return Err(CliError::Usage(
                "missing propagation: set `delta_e`, `delta`, `time`, or `wavelength` with `distance`".into(),
            ))
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "conflicting fields: `delta_e` cannot be combined with `delta`, `time`, `wavelength` or `distance`"
                    .into(),
            ))
        }
    }
    .map_err(usage_from)
}

fn ghosh_mandel(f: &mut Fields) -> Result<Physics> {
    let epsilon = f.required_real("epsilon")?;
    let sigma = f.required_real("sigma")?;
    let omega = f.required_real("omega")?;
    let x0 = f.required_real("x0")?;
    let exchange = f.exchange()?;
    let propagation = required_propagation(f)?;
    Ok(Physics::GhoshMandel {
        unentangled: PacketParams::new(epsilon, x0, exchange, propagation).map_err(usage_from)?,
        entangled: EprParams::with_propagation(sigma, omega, x0, exchange, propagation)
            .map_err(usage_from)?,
    })
}

fn classical(f: &mut Fields) -> Result<ClassicalParams<f64>> {
    let alpha = f.required_real("alpha")?;
    let beta = f.required_real("beta")?;
    let k = match (f.real("k")?, f.real("wavelength")?) {
        (Some(k), None) => k,
        (None, Some(lambda)) => {
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(CliError::Usage(format!(
                    "invalid `wavelength`: must be positive, got {lambda}"
                )));
            }
            std::f64::consts::TAU / lambda
        }
        (None, None) => {
            return Err(CliError::Usage(
                "missing required field `k` (or `wavelength`)".into(),
            ))
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "conflicting fields: give only one of `k` and `wavelength`".into(),
            ))
        }
    };
    let separation = f.required_real("source_separation")?;
    let distance = f.required_real("screen_distance")?;
    let phase = match f.get("phase", "`random` or a phase in radians", |s| match s {
        "random" => Some(PhaseMode::RandomUniform),
        other => parse_real(other).map(PhaseMode::Fixed),
    })? {
        Some(p) => p,
        None => {
            f.echo.insert("phase".into(), "random".into());
            PhaseMode::RandomUniform
        }
    };
    ClassicalParams::new(alpha, beta, k, separation, distance, phase).map_err(usage_from)
}

fn scan(f: &mut Fields) -> Result<ScanSpec> {
    let variable = match f.get("scan.variable", "`dx` or `x2`", |s| match s {
        "dx" => Some(ScanVariable::Dx),
        "x2" => Some(ScanVariable::X2),
        _ => None,
    })? {
        Some(v) => v,
        None => {
            f.echo.insert("scan.variable".into(), "dx".into());
            ScanVariable::Dx
        }
    };
    let min = f.real_or("scan.min", DEFAULT_SCAN_MIN)?;
    let max = f.real_or("scan.max", DEFAULT_SCAN_MAX)?;
    let points = f.count_or("scan.points", DEFAULT_SCAN_POINTS, |s| {
        parse_count(s).map(|n| n as usize)
    })?;
    let anchor = match variable {
        ScanVariable::Dx => f.real_or("scan.center", 0.0)?,
        ScanVariable::X2 => f.real_or("scan.x1", 0.0)?,
    };
    if points < 2 {
        return Err(CliError::Usage(format!(
            "invalid `scan.points`: must be at least 2, got {points}"
        )));
    }
    if !min.is_finite() || !max.is_finite() || !(min < max) {
        return Err(CliError::Usage(format!(
            "invalid `scan.min`/`scan.max`: need finite min < max, got {min} and {max}"
        )));
    }
    if !anchor.is_finite() {
        return Err(CliError::Usage(
            "invalid scan anchor: must be finite".into(),
        ));
    }
    Ok(ScanSpec {
        variable,
        min,
        max,
        points,
        anchor,
    })
}

fn mc(f: &mut Fields, scenario: Scenario) -> Result<Option<McSpec>> {
    let default = match scenario {
        Scenario::ClassicalHbt => DEFAULT_CLASSICAL_SAMPLES,
        _ => DEFAULT_QUANTUM_SAMPLES,
    };
    let samples = f.count_or("mc.samples", default, parse_count)?;
    if scenario == Scenario::ClassicalHbt {
        return Ok((samples > 0).then_some(McSpec {
            samples,
            bins: 0,
            half_range: None,
            max_rejection_factor: 0.0,
            fit: FitChoice::Analytic,
        }));
    }
    let bins = f.count_or("mc.bins", DEFAULT_BINS, |s| {
        parse_count(s).map(|n| n as usize)
    })?;
    if bins < MIN_BINS {
        return Err(CliError::Usage(format!(
            "invalid `mc.bins`: must be at least {MIN_BINS}, got {bins}"
        )));
    }
    let half_range = f.real("mc.range")?;
    if let Some(r) = half_range {
        if !(r > 0.0) || !r.is_finite() {
            return Err(CliError::Usage(format!(
                "invalid `mc.range`: must be positive, got {r}"
            )));
        }
    }
    let max_rejection_factor = f.real_or("mc.max_rejection_factor", 2.0)?;
    let fit = match f.get("fit.model", "`analytic` or `blind`", |s| match s {
        "analytic" => Some(FitChoice::Analytic),
        "blind" => Some(FitChoice::Blind),
        _ => None,
    })? {
        Some(m) => m,
        None => {
            f.echo.insert("fit.model".into(), "analytic".into());
            FitChoice::Analytic
        }
    };
    if samples == 0 {
        return Ok(None);
    }
    let spec = McSpec {
        samples,
        bins,
        half_range,
        max_rejection_factor,
        fit,
    };
    SamplerConfig {
        max_rejection_factor,
        ..SamplerConfig::new(samples, 0)
    }
    .validate()
    .map_err(|e| match usage_from(e) {
        CliError::Usage(m) => {
            CliError::Usage(m.replace("`max_rejection_factor`", "`mc.max_rejection_factor`"))
        }
        other => other,
    })?;
    Ok(Some(spec))
}

fn output(f: &mut Fields) -> Result<OutputSpec> {
    let directory = f
        .get("output.directory", "a path", |s| {
            (!s.is_empty()).then(|| PathBuf::from(s))
        })?
        .unwrap_or_else(|| {
            f.echo
                .insert("output.directory".into(), DEFAULT_OUTPUT_DIR.into());
            PathBuf::from(DEFAULT_OUTPUT_DIR)
        });
    let formats = f
        .get(
            "output.formats",
            "a comma-separated subset of `csv,json`",
            |s| {
                let mut csv = false;
                let mut json = false;
                for part in s.split(',').map(str::trim) {
                    match part {
                        "csv" => csv = true,
                        "json" => json = true,
                        _ => return None,
                    }
                }
                (csv || json).then_some((csv, json))
            },
        )?
        .unwrap_or_else(|| {
            f.echo.insert("output.formats".into(), "csv,json".into());
            (true, true)
        });
    Ok(OutputSpec {
        directory,
        csv: formats.0,
        json: formats.1,
    })
}
