//! Compares two run reports on a shared scan grid.
//!
//! Reports whose physics settings agree must reproduce each other's curves
//! to `curve_tolerance`. When the physics differs the curves are expected
//! to differ: their deviation is reported but does not fail the comparison.
//! Fringe period and visibility are checked in both cases.

use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::report::{ArmReport, Comparison, RunReport};
use crate::run::{PERIOD_TOLERANCE, VISIBILITY_TOLERANCE};

/// Keys that change how a scenario is sampled or stored but not its physics.
const NON_PHYSICS_PREFIXES: [&str; 5] = ["seed", "mc.", "fit.", "output.", "scan."];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub curve_tolerance: f64,
    pub period_tolerance: f64,
    pub visibility_tolerance: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            curve_tolerance: 1e-9,
            period_tolerance: PERIOD_TOLERANCE,
            visibility_tolerance: VISIBILITY_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    SamePhysics,
    ExpectedDifferent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    ExpectedDifferent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDelta {
    pub column: String,
    /// `max |a - b| / max(|a|, |b|)` over the grid.
    pub max_relative_difference: f64,
    pub max_absolute_difference: f64,
    pub tolerance: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmComparison {
    pub arm_a: String,
    pub arm_b: String,
    pub curves: Vec<CurveDelta>,
    /// Fitted values when both arms ran Monte Carlo, closed forms otherwise.
    pub parameters: Vec<Comparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub report_a: String,
    pub report_b: String,
    pub relation: Relation,
    pub arms: Vec<ArmComparison>,
    pub pass: bool,
}

pub fn compare_files(a: &Path, b: &Path, options: &CompareOptions) -> Result<CompareSummary> {
    let ra = RunReport::read(a)?;
    let rb = RunReport::read(b)?;
    let mut summary = compare_reports(&ra, &rb, options)?;
    summary.report_a = a.display().to_string();
    summary.report_b = b.display().to_string();
    Ok(summary)
}

pub fn compare_reports(
    a: &RunReport,
    b: &RunReport,
    options: &CompareOptions,
) -> Result<CompareSummary> {
    let physics = |r: &RunReport| -> Vec<(String, String)> {
        r.config
            .iter()
            .filter(|(k, _)| !NON_PHYSICS_PREFIXES.iter().any(|p| k.starts_with(p)))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    };
    let relation = if physics(a) == physics(b) {
        Relation::SamePhysics
    } else {
        Relation::ExpectedDifferent
    };
    let arms = pair_arms(a, b)?
        .into_iter()
        .map(|(x, y)| compare_arms(x, y, relation, options))
        .collect::<Result<Vec<_>>>()?;
    let pass = arms.iter().all(|arm| {
        arm.curves.iter().all(|c| c.status != Status::Fail) && arm.parameters.iter().all(|p| p.pass)
    });
    Ok(CompareSummary {
        report_a: String::new(),
        report_b: String::new(),
        relation,
        arms,
        pass,
    })
}

/// Arms match by name, or by position when the names differ.
fn pair_arms<'a>(
    a: &'a RunReport,
    b: &'a RunReport,
) -> Result<Vec<(&'a ArmReport, &'a ArmReport)>> {
    if a.arms.len() != b.arms.len() {
        return Err(CliError::Usage(format!(
            "reports have {} and {} arms",
            a.arms.len(),
            b.arms.len()
        )));
    }
    if a.arms.iter().all(|x| b.arm(&x.name).is_some()) {
        Ok(a.arms
            .iter()
            .map(|x| (x, b.arm(&x.name).unwrap()))
            .collect())
    } else {
        Ok(a.arms.iter().zip(&b.arms).collect())
    }
}

fn compare_arms(
    a: &ArmReport,
    b: &ArmReport,
    relation: Relation,
    options: &CompareOptions,
) -> Result<ArmComparison> {
    let (ga, gb) = (&a.curve, &b.curve);
    let grids_match = ga.variable == gb.variable
        && ga.grid.len() == gb.grid.len()
        && ga
            .grid
            .iter()
            .zip(&gb.grid)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0));
    if !grids_match {
        return Err(CliError::Usage(format!(
            "scan grids differ: {} with {} points against {} with {} points",
            ga.variable,
            ga.grid.len(),
            gb.variable,
            gb.grid.len()
        )));
    }
    let curves: Vec<CurveDelta> = ga
        .columns
        .iter()
        .filter_map(|ca| gb.column(&ca.name).map(|vb| (ca, vb)))
        .map(|(ca, vb)| {
            let (mut rel, mut abs) = (0.0_f64, 0.0_f64);
            for (x, y) in ca.values.iter().zip(vb) {
                let d = (x - y).abs();
                let scale = x.abs().max(y.abs());
                abs = abs.max(d);
                if scale > 0.0 {
                    rel = rel.max(d / scale);
                }
            }
            let status = match relation {
                Relation::SamePhysics if rel <= options.curve_tolerance => Status::Pass,
                Relation::SamePhysics => Status::Fail,
                Relation::ExpectedDifferent => Status::ExpectedDifferent,
            };
            CurveDelta {
                column: ca.name.clone(),
                max_relative_difference: rel,
                max_absolute_difference: abs,
                tolerance: options.curve_tolerance,
                status,
            }
        })
        .collect();
    if curves.is_empty() {
        return Err(CliError::Usage(format!(
            "arms `{}` and `{}` share no curve columns",
            a.name, b.name
        )));
    }

    let both_fit = a.mc.is_some() && b.mc.is_some();
    let period = |r: &ArmReport| {
        if both_fit {
            r.mc.as_ref().map(|m| m.fit.period)
        } else {
            r.analytic.fringe_period
        }
    };
    let visibility = |r: &ArmReport| {
        if both_fit {
            r.mc.as_ref().unwrap().fit.visibility
        } else {
            r.analytic.visibility
        }
    };
    let mut parameters = Vec::new();
    if let (Some(pa), Some(pb)) = (period(a), period(b)) {
        parameters.push(Comparison::relative(
            "period",
            pb,
            pa,
            options.period_tolerance,
        ));
    }
    parameters.push(Comparison::absolute(
        "visibility",
        visibility(b),
        visibility(a),
        options.visibility_tolerance,
    ));
    Ok(ArmComparison {
        arm_a: a.name.clone(),
        arm_b: b.name.clone(),
        curves,
        parameters,
    })
}

fn status_word(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

impl CompareSummary {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let relation = match self.relation {
            Relation::SamePhysics => "same physics",
            Relation::ExpectedDifferent => "different physics; curve differences expected",
        };
        writeln!(
            out,
            "compare {} against {}: {relation}",
            self.report_a, self.report_b
        )
        .unwrap();
        for arm in &self.arms {
            writeln!(out, "arm {} / {}", arm.arm_a, arm.arm_b).unwrap();
            for c in &arm.curves {
                let status = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::ExpectedDifferent => "expected-different",
                };
                writeln!(
                    out,
                    "  curve {:<22} max rel {:.3e}  max abs {:.3e}  tol {:.1e}  {status}",
                    c.column, c.max_relative_difference, c.max_absolute_difference, c.tolerance
                )
                .unwrap();
            }
            for p in &arm.parameters {
                writeln!(
                    out,
                    "  {:<28} {:.6} vs {:.6}  delta {:.3e}  tol {:.1e}  {}",
                    p.name,
                    p.reference,
                    p.value,
                    p.delta,
                    p.tolerance,
                    status_word(p.pass)
                )
                .unwrap();
            }
        }
        writeln!(out, "result: {}", if self.pass { "PASS" } else { "FAIL" }).unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigBuilder;
    use crate::run::simulate;

    fn report(preset: &str, sets: &[&str]) -> RunReport {
        let mut b = ConfigBuilder::new();
        b.preset(preset).unwrap();
        b.set("mc.samples=0").unwrap();
        for s in sets {
            b.set(s).unwrap();
        }
        simulate(&b.build().unwrap()).unwrap().report
    }

    #[test]
    fn a_report_matches_itself() {
        let r = report("ghosh-mandel", &[]);
        let s = compare_reports(&r, &r, &CompareOptions::default()).unwrap();
        assert!(s.pass);
        assert_eq!(s.relation, Relation::SamePhysics);
        for arm in &s.arms {
            assert!(arm.curves.iter().all(|c| c.max_absolute_difference == 0.0));
            assert!(arm.parameters.iter().all(|p| p.delta == 0.0));
        }
    }

    #[test]
    fn bosons_and_fermions_differ_as_expected() {
        let s = compare_reports(
            &report("independent-bosons", &[]),
            &report("independent-fermions", &[]),
            &CompareOptions::default(),
        )
        .unwrap();
        assert_eq!(s.relation, Relation::ExpectedDifferent);
        let pdf = s.arms[0]
            .curves
            .iter()
            .find(|c| c.column == "pdf_analytic")
            .unwrap();
        assert!(pdf.max_absolute_difference > 0.0);
        assert_eq!(pdf.status, Status::ExpectedDifferent);
        assert!(s.pass);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = report("independent-bosons", &[]);
        let b = report("independent-bosons", &["scan.points=101"]);
        assert!(matches!(
            compare_reports(&a, &b, &CompareOptions::default()),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn same_physics_with_changed_curve_fails() {
        let a = report("independent-bosons", &[]);
        let mut b = a.clone();
        b.arms[0].curve.columns[0].values[10] *= 1.0 + 1e-6;
        let s = compare_reports(&a, &b, &CompareOptions::default()).unwrap();
        assert!(!s.pass);
        assert!(s.to_text().contains("FAIL"));
    }
}
