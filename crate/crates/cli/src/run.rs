//! Runs one scenario: analytic curves over the scan, optional Monte Carlo
//! with a fringe fit, and the checks that tie the two together.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use hbt_core::coincidence::default_range;
use hbt_core::{
    fit_fringes, sample_pairs, ClassicalParams, CoincidenceModel, EprParams, Exchange, FringeModel,
    PacketParams, PhaseMode,
};

use crate::config::{FitChoice, Physics, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::report::{
    Analytic, ArmReport, Comparison, Entanglement, FitResult, McResult, RunReport, Timing,
};
use crate::table::Table;

/// Relative tolerance on a fitted or cross-scenario fringe period.
pub const PERIOD_TOLERANCE: f64 = 0.02;
/// Absolute tolerance on a fitted visibility against its closed form.
pub const VISIBILITY_TOLERANCE: f64 = 0.1;
/// Lowest fitted visibility accepted as a full-contrast quantum fringe.
pub const QUANTUM_VISIBILITY_FLOOR: f64 = 0.9;
/// Upper bound on the visibility of classical intensity correlations.
pub const CLASSICAL_VISIBILITY_BOUND: f64 = 0.5;
/// Largest tolerated |z| between classical Monte Carlo and closed form.
pub const MAX_Z_SCORE: f64 = 5.0;
/// Standard errors allowed between observed and expected acceptance.
pub const ACCEPTANCE_SIGMAS: f64 = 5.0;

pub struct RunOutput {
    pub report: RunReport,
    /// Histogram tables by arm name.
    pub coincidences: Vec<(String, Table)>,
}

struct ArmOutput {
    report: ArmReport,
    coincidence: Option<Table>,
}

/// Computes everything for `cfg` without touching the file system.
pub fn simulate(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let mut timing = Timing {
        analytic_seconds: 0.0,
        mc_seconds: 0.0,
        total_seconds: 0.0,
    };
    let name = cfg.scenario.name();
    let (arms, comparisons) = match cfg.physics {
        Physics::Classical(p) => (vec![classical_arm(name, &p, cfg, &mut timing)?], Vec::new()),
        Physics::Packets(p) => (vec![packet_arm(name, &p, cfg, &mut timing)?], Vec::new()),
        Physics::Epr(e) => (vec![epr_arm(name, &e, cfg, &mut timing)?], Vec::new()),
        Physics::GhoshMandel {
            unentangled,
            entangled,
        } => {
            let a = packet_arm("unentangled", &unentangled, cfg, &mut timing)?;
            let b = epr_arm("entangled", &entangled, cfg, &mut timing)?;
            let comparisons = cross_comparisons(&a.report, &b.report);
            (vec![a, b], comparisons)
        }
    };
    timing.total_seconds = started.elapsed().as_secs_f64();
    let coincidences = arms
        .iter()
        .filter_map(|a| a.coincidence.clone().map(|t| (a.report.name.clone(), t)))
        .collect();
    Ok(RunOutput {
        report: RunReport {
            scenario: name.to_string(),
            config: cfg.echo.clone(),
            arms: arms.into_iter().map(|a| a.report).collect(),
            comparisons,
            seed: cfg.seed,
            timing,
        },
        coincidences,
    })
}

/// Simulates and writes the requested files; returns their paths.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(RunOutput, Vec<PathBuf>)> {
    let out = simulate(cfg)?;
    let dir = &cfg.output.directory;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    if cfg.output.csv {
        for arm in &out.report.arms {
            let path = dir.join(format!("curve_{}.csv", arm.name));
            arm.curve.write_csv(&path)?;
            files.push(path);
        }
        for (name, table) in &out.coincidences {
            let path = dir.join(format!("coincidence_{name}.csv"));
            table.write_csv(&path)?;
            files.push(path);
        }
    }
    if cfg.output.json {
        let path = dir.join("report.json");
        out.report.write(&path)?;
        files.push(path);
    }
    Ok((out, files))
}

fn exchange_name(e: Exchange) -> String {
    match e {
        Exchange::Boson => "boson",
        Exchange::Fermion => "fermion",
    }
    .to_string()
}

fn packet_arm(
    name: &str,
    p: &PacketParams<f64>,
    cfg: &ScenarioConfig,
    timing: &mut Timing,
) -> Result<ArmOutput> {
    let parameters = BTreeMap::from([
        ("epsilon".to_string(), p.epsilon()),
        ("x0".to_string(), p.x0()),
        ("delta".to_string(), p.delta()),
    ]);
    let analytic = Analytic {
        fringe_period: p.fringe_period().ok(),
        fringe_wavenumber: Some(p.fringe_wavenumber()),
        envelope_rate: Some(p.envelope_rate()),
        visibility: 1.0,
        total_probability: Some(p.total_probability()),
        entanglement: None,
    };
    quantum_arm(
        name,
        "independent-packets",
        p,
        parameters,
        analytic,
        FringeModel::Qhbt(*p),
        cfg,
        timing,
    )
}

fn epr_arm(
    name: &str,
    e: &EprParams<f64>,
    cfg: &ScenarioConfig,
    timing: &mut Timing,
) -> Result<ArmOutput> {
    let parameters = BTreeMap::from([
        ("sigma".to_string(), e.sigma()),
        ("omega".to_string(), e.omega()),
        ("x0".to_string(), e.x0()),
        ("delta_e".to_string(), e.delta_e()),
    ]);
    let diagnostic = e.entanglement_diagnostic();
    let analytic = Analytic {
        fringe_period: e.fringe_period().ok(),
        fringe_wavenumber: Some(e.fringe_wavenumber()),
        envelope_rate: Some(e.envelope_rate()),
        visibility: 1.0,
        total_probability: Some(e.total_probability()),
        entanglement: Some(Entanglement {
            ratio: diagnostic.ratio,
            regime: format!("{:?}", diagnostic.regime),
        }),
    };
    quantum_arm(
        name,
        "entangled-pair",
        e,
        parameters,
        analytic,
        FringeModel::Ehbt(*e),
        cfg,
        timing,
    )
}

#[allow(clippy::too_many_arguments)]
fn quantum_arm<M: CoincidenceModel<f64>>(
    name: &str,
    model_name: &str,
    model: &M,
    parameters: BTreeMap<String, f64>,
    analytic: Analytic,
    warm: FringeModel<f64>,
    cfg: &ScenarioConfig,
    timing: &mut Timing,
) -> Result<ArmOutput> {
    let started = Instant::now();
    let grid = cfg.scan.grid();
    let positions: Vec<(f64, f64)> = grid.iter().map(|&v| cfg.scan.positions(v)).collect();
    let shape = model.marginal();
    let mut curve = Table::new(cfg.scan.variable.name(), grid);
    curve.push(
        "pdf_analytic",
        positions
            .iter()
            .map(|&(a, b)| model.density(a, b))
            .collect(),
    );
    curve.push(
        "direct_analytic",
        positions
            .iter()
            .map(|&(a, b)| model.direct_density(a, b))
            .collect(),
    );
    curve.push(
        "marginal_analytic",
        positions.iter().map(|&(a, b)| shape.eval(a - b)).collect(),
    );
    timing.analytic_seconds += started.elapsed().as_secs_f64();

    let mut report = ArmReport {
        name: name.to_string(),
        model: model_name.to_string(),
        exchange: Some(exchange_name(model.exchange())),
        parameters,
        analytic,
        mc: None,
        comparisons: Vec::new(),
        curve,
    };
    let (Some(mc), Some(sampler)) = (cfg.mc, cfg.sampler()) else {
        return Ok(ArmOutput {
            report,
            coincidence: None,
        });
    };

    let started = Instant::now();
    let set = sample_pairs(model, &sampler)?;
    let range = mc
        .half_range
        .map(|r| (-r, r))
        .unwrap_or_else(|| default_range(model));
    let h = set.histogram_dx(mc.bins, range)?;
    drop(set);
    let (start, fit_model) = match mc.fit {
        FitChoice::Analytic => ("analytic", warm),
        FitChoice::Blind => ("blind", FringeModel::Blind),
    };
    let fit = fit_fringes(&h, &fit_model)?;
    timing.mc_seconds += started.elapsed().as_secs_f64();

    let mut table = Table::new("dx", h.bin_centers());
    table.push("bin_lo", h.bin_edges[..h.bins()].to_vec());
    table.push("bin_hi", h.bin_edges[1..].to_vec());
    table.push("count_mc", h.counts.iter().map(|&c| c as f64).collect());
    table.push("expected_count", h.expected_counts(model));
    table.push("fit_curve", fit.expected_counts(&h));

    if let Some(period) = report.analytic.fringe_period {
        report.comparisons.push(Comparison::relative(
            "fit_period",
            fit.period,
            period,
            PERIOD_TOLERANCE,
        ));
    }
    report.comparisons.push(Comparison::absolute(
        "fit_visibility",
        fit.visibility,
        report.analytic.visibility,
        VISIBILITY_TOLERANCE,
    ));
    let expected_rate = model.total_probability() / sampler.max_rejection_factor;
    let rate_error = (expected_rate * (1.0 - expected_rate) / h.proposals as f64).sqrt();
    report.comparisons.push(Comparison::absolute(
        "acceptance_rate",
        h.acceptance_rate(),
        expected_rate,
        ACCEPTANCE_SIGMAS * rate_error,
    ));
    report.mc = Some(McResult {
        samples: h.n_samples(),
        proposals: h.proposals,
        acceptance_rate: h.acceptance_rate(),
        bins: h.bins(),
        range: [range.0, range.1],
        underflow: h.underflow,
        overflow: h.overflow,
        fit: FitResult::new(start, &fit),
    });
    Ok(ArmOutput {
        report,
        coincidence: Some(table),
    })
}

fn classical_arm(
    name: &str,
    p: &ClassicalParams<f64>,
    cfg: &ScenarioConfig,
    timing: &mut Timing,
) -> Result<ArmOutput> {
    let started = Instant::now();
    let mut parameters = BTreeMap::from([
        ("alpha".to_string(), p.alpha()),
        ("beta".to_string(), p.beta()),
        ("k".to_string(), p.k()),
        ("source_separation".to_string(), p.source_separation()),
        ("screen_distance".to_string(), p.screen_distance()),
    ]);
    if let PhaseMode::Fixed(phi) = p.phase() {
        parameters.insert("phase".to_string(), phi);
    }
    let visibility = p.classical_visibility()?;
    // the far-field argument is linear in x₁ - x₂
    let wavenumber = (p.far_field_argument(1.0, 0.0) - p.far_field_argument(0.0, 0.0)).abs();
    let analytic = Analytic {
        fringe_period: (wavenumber > 0.0).then(|| std::f64::consts::TAU / wavenumber),
        fringe_wavenumber: Some(wavenumber),
        envelope_rate: None,
        visibility,
        total_probability: None,
        entanglement: None,
    };

    let grid = cfg.scan.grid();
    let positions: Vec<(f64, f64)> = grid.iter().map(|&v| cfg.scan.positions(v)).collect();
    let analytic_curve: Vec<f64> = positions
        .iter()
        .map(|&(a, b)| p.correlation_analytic(a, b))
        .collect();
    let mut curve = Table::new(cfg.scan.variable.name(), grid);
    curve.push("correlation_analytic", analytic_curve.clone());
    curve.push(
        "intensity_product",
        positions
            .iter()
            .map(|&(a, b)| p.intensity_for_mode(a) * p.intensity_for_mode(b))
            .collect(),
    );
    timing.analytic_seconds += started.elapsed().as_secs_f64();

    let mut comparisons = vec![Comparison::at_most(
        "visibility_bound",
        visibility,
        CLASSICAL_VISIBILITY_BOUND,
    )];
    if let Some(mc) = cfg.mc {
        let started = Instant::now();
        let estimates = positions
            .iter()
            .map(|&(a, b)| p.correlation_mc(a, b, mc.samples, cfg.seed))
            .collect::<hbt_core::Result<Vec<_>>>()?;
        timing.mc_seconds += started.elapsed().as_secs_f64();
        let max_z = estimates
            .iter()
            .zip(&analytic_curve)
            .filter(|(e, _)| e.std_error > 0.0)
            .map(|(e, a)| ((e.mean - a) / e.std_error).abs())
            .fold(0.0, f64::max);
        comparisons.push(Comparison::at_most("mc_max_abs_z", max_z, MAX_Z_SCORE));
        curve.push("correlation_mc", estimates.iter().map(|e| e.mean).collect());
        curve.push("std_error", estimates.iter().map(|e| e.std_error).collect());
    }
    Ok(ArmOutput {
        report: ArmReport {
            name: name.to_string(),
            model: "classical-waves".to_string(),
            exchange: None,
            parameters,
            analytic,
            mc: None,
            comparisons,
            curve,
        },
        coincidence: None,
    })
}

/// Entangled against unentangled: same fringe period, full contrast in both.
/// Uses fitted values when Monte Carlo ran, closed forms otherwise.
fn cross_comparisons(unentangled: &ArmReport, entangled: &ArmReport) -> Vec<Comparison> {
    let period = |a: &ArmReport| {
        a.mc.as_ref()
            .map(|m| m.fit.period)
            .or(a.analytic.fringe_period)
    };
    let visibility = |a: &ArmReport| {
        a.mc.as_ref()
            .map_or(a.analytic.visibility, |m| m.fit.visibility)
    };
    let mut out = Vec::new();
    if let (Some(e), Some(u)) = (period(entangled), period(unentangled)) {
        out.push(Comparison::relative(
            "period_entangled_vs_unentangled",
            e,
            u,
            PERIOD_TOLERANCE,
        ));
    }
    out.push(Comparison::at_least(
        "visibility_unentangled",
        visibility(unentangled),
        QUANTUM_VISIBILITY_FLOOR,
    ));
    out.push(Comparison::at_least(
        "visibility_entangled",
        visibility(entangled),
        QUANTUM_VISIBILITY_FLOOR,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigBuilder;

    fn config(preset: &str, sets: &[&str]) -> ScenarioConfig {
        let mut b = ConfigBuilder::new();
        b.preset(preset).unwrap();
        for s in sets {
            b.set(s).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn analytic_curves_without_monte_carlo() {
        let out = simulate(&config("independent-fermions", &["mc.samples=0"])).unwrap();
        let arm = &out.report.arms[0];
        assert!(arm.mc.is_none() && out.coincidences.is_empty());
        let pdf = arm.curve.column("pdf_analytic").unwrap();
        assert_eq!(pdf[200], 0.0);
        assert!(arm.curve.column("marginal_analytic").unwrap()[200].abs() < 1e-15);
    }

    #[test]
    fn small_monte_carlo_run_passes_its_checks() {
        let out = simulate(&config(
            "independent-bosons",
            &["mc.samples=200000", "seed=3"],
        ))
        .unwrap();
        let arm = &out.report.arms[0];
        assert!(
            arm.comparisons.iter().all(|c| c.pass),
            "{:?}",
            arm.comparisons
        );
        let table = &out.coincidences[0].1;
        let counts: f64 = table.column("count_mc").unwrap().iter().sum();
        let mc = arm.mc.as_ref().unwrap();
        assert_eq!(counts as u64 + mc.underflow + mc.overflow, mc.samples);
    }

    #[test]
    fn classical_run_respects_the_bound_and_statistics() {
        let out = simulate(&config(
            "classical-hbt",
            &["mc.samples=2000", "scan.points=41"],
        ))
        .unwrap();
        assert!(
            out.report.all_pass(),
            "{:?}",
            out.report.arms[0].comparisons
        );
        let arm = &out.report.arms[0];
        assert_eq!(arm.analytic.visibility, 0.5);
        let period = arm.analytic.fringe_period.unwrap();
        assert!((period - std::f64::consts::TAU * 100.0 / 10.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_phase_sets_the_single_shot_product() {
        let out = simulate(&config(
            "classical-hbt",
            &["phase=0.3", "mc.samples=100", "scan.points=11"],
        ))
        .unwrap();
        let arm = &out.report.arms[0];
        assert!(out.report.all_pass(), "{:?}", arm.comparisons);
        let Physics::Classical(p) = config("classical-hbt", &["phase=0.3"]).physics else {
            panic!()
        };
        let product = arm.curve.column("intensity_product").unwrap();
        for (j, &v) in arm.curve.grid.iter().enumerate() {
            let (x1, x2) = (0.5 * v, -0.5 * v);
            assert_eq!(product[j], p.intensity(x1, 0.3) * p.intensity(x2, 0.3));
        }
    }
}
