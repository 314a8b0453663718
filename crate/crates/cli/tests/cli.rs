use std::path::Path;
use std::process::{Command, Output};

use hbt_cli::report::RunReport;
use hbt_cli::table::Table;

fn hbt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbt"))
        .args(args)
        .output()
        .unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = hbt(args);
    assert!(
        out.status.success(),
        "{args:?}: {}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fermion_curve_vanishes_at_coincidence() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "run",
        "--preset",
        "independent-fermions",
        "--samples",
        "0",
        "--out",
        path(dir.path()),
    ]);
    let curve = Table::read_csv(&dir.path().join("curve_independent-fermions.csv")).unwrap();
    let j = curve.grid.iter().position(|&x| x == 0.0).unwrap();
    assert!(curve.column("pdf_analytic").unwrap()[j] < 1e-12);
    assert!(curve.column("marginal_analytic").unwrap()[j] < 1e-12);
    assert!(curve
        .column("pdf_analytic")
        .unwrap()
        .iter()
        .any(|&v| v > 1e-6));
}

#[test]
fn product_state_pair_reproduces_independent_bosons() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok(&[
        "run",
        "--preset",
        "independent-bosons",
        "--samples",
        "0",
        "--out",
        path(&a),
    ]);
    // 1/σ² = 4Ω² = 2ε² and δ = 2Δ for ε = 1, Δ = 100
    let root_half = format!("sigma={}", std::f64::consts::FRAC_1_SQRT_2);
    let omega = format!("omega={}", std::f64::consts::FRAC_1_SQRT_2);
    run_ok(&[
        "run",
        "--preset",
        "entangled-epr",
        "--set",
        &root_half,
        "--set",
        &omega,
        "--set",
        "delta_e=200",
        "--samples",
        "0",
        "--out",
        path(&b),
    ]);
    let bosons = Table::read_csv(&a.join("curve_independent-bosons.csv")).unwrap();
    let pair = Table::read_csv(&b.join("curve_entangled-epr.csv")).unwrap();
    assert_eq!(bosons.grid, pair.grid);
    let report = RunReport::read(&b.join("report.json")).unwrap();
    assert_eq!(
        report.arms[0]
            .analytic
            .entanglement
            .as_ref()
            .unwrap()
            .regime,
        "Product"
    );
    for column in ["pdf_analytic", "marginal_analytic"] {
        for (x, y) in bosons
            .column(column)
            .unwrap()
            .iter()
            .zip(pair.column(column).unwrap())
        {
            assert!(
                (x - y).abs() <= 1e-9 * x.abs().max(y.abs()),
                "{column}: {x} vs {y}"
            );
        }
    }
}

#[test]
fn presets_are_listed_and_all_run() {
    let out = run_ok(&["presets"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("independent-bosons"));
    assert!(text.contains("ghosh-mandel"));
    let dir = tempfile::tempdir().unwrap();
    for name in hbt_cli::presets::names() {
        assert!(text.contains(name));
        let out_dir = dir.path().join(name);
        run_ok(&[
            "run",
            "--preset",
            name,
            "--samples",
            "0",
            "--out",
            path(&out_dir),
        ]);
    }
}

#[test]
fn ghosh_mandel_shows_the_same_fringes_with_and_without_entanglement() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "run",
        "--preset",
        "ghosh-mandel",
        "--seed",
        "11",
        "--out",
        path(dir.path()),
    ]);
    let report = RunReport::read(&dir.path().join("report.json")).unwrap();
    assert!(report.all_pass());
    let fit = |arm: &str| report.arm(arm).unwrap().mc.as_ref().unwrap().fit.clone();
    let (u, e) = (fit("unentangled"), fit("entangled"));
    assert!(u.visibility > 0.9 && e.visibility > 0.9, "{u:?} {e:?}");
    assert!((u.period - e.period).abs() < 0.02 * u.period);
    let names: Vec<&str> = report.comparisons.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "period_entangled_vs_unentangled",
            "visibility_unentangled",
            "visibility_entangled"
        ]
    );
    for c in &report.comparisons {
        assert!(c.value.is_finite() && c.reference.is_finite() && c.tolerance.is_finite());
    }
    assert_eq!(
        report
            .arm("entangled")
            .unwrap()
            .analytic
            .entanglement
            .as_ref()
            .unwrap()
            .regime,
        "StrongEntangled"
    );
}

#[test]
fn identical_runs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--preset",
        "entangled-epr",
        "--seed",
        "5",
        "--samples",
        "200000",
        "--format",
        "json",
        "--out",
        path(dir.path()),
    ];
    let without_timing = || {
        run_ok(&args);
        let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
        let cut = text.find("\"timing\"").unwrap();
        text[..cut].to_string()
    };
    let first = without_timing();
    assert_eq!(first, without_timing());
    assert!(!dir.path().join("curve_entangled-epr.csv").exists());

    run_ok(&[
        "run",
        "--preset",
        "entangled-epr",
        "--seed",
        "6",
        "--samples",
        "200000",
        "--format",
        "json",
        "--out",
        path(dir.path()),
    ]);
    let other = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert_ne!(first, other[..other.find("\"timing\"").unwrap()]);
}

#[test]
fn csv_files_parse_back_to_the_reported_series() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "run",
        "--preset",
        "independent-bosons",
        "--samples",
        "100000",
        "--out",
        path(dir.path()),
    ]);
    let report = RunReport::read(&dir.path().join("report.json")).unwrap();
    let curve = Table::read_csv(&dir.path().join("curve_independent-bosons.csv")).unwrap();
    assert_eq!(curve, report.arms[0].curve);
    let bits = |t: &Table| -> Vec<u64> {
        t.grid
            .iter()
            .chain(t.columns.iter().flat_map(|c| &c.values))
            .map(|v| v.to_bits())
            .collect()
    };
    assert_eq!(bits(&curve), bits(&report.arms[0].curve));

    let hist = Table::read_csv(&dir.path().join("coincidence_independent-bosons.csv")).unwrap();
    let names: Vec<&str> = hist.columns.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "bin_lo",
            "bin_hi",
            "count_mc",
            "expected_count",
            "fit_curve"
        ]
    );
    let mc = report.arms[0].mc.as_ref().unwrap();
    let counted: f64 = hist.column("count_mc").unwrap().iter().sum();
    assert_eq!(counted as u64 + mc.underflow + mc.overflow, 100_000);
    assert_eq!(hist.grid.len(), mc.bins);
}

#[test]
fn config_file_and_overrides_layer_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.conf");
    std::fs::write(
        &cfg,
        "# optical input\nscenario = independent-bosons\nepsilon = 1\nx0 = 3\nwavelength = 0.5\ndistance = 400\nscan.points = 11\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "run",
        "--config",
        path(&cfg),
        "--set",
        "x0=2",
        "--samples",
        "0",
        "--out",
        path(&out_dir),
    ]);
    let report = RunReport::read(&out_dir.join("report.json")).unwrap();
    let p = &report.arms[0].parameters;
    assert_eq!(p["x0"], 2.0);
    assert!((p["delta"] - 200.0 / std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(report.arms[0].curve.grid.len(), 11);
}

#[test]
fn usage_and_physics_errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());

    let bad = hbt(&[
        "run",
        "--preset",
        "independent-bosons",
        "--set",
        "x0=-1",
        "--out",
        out,
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("`x0`"));

    let unused = hbt(&[
        "run",
        "--preset",
        "independent-bosons",
        "--set",
        "omega=1",
        "--out",
        out,
    ]);
    assert_eq!(unused.status.code(), Some(2));
    assert!(stderr(&unused).contains("`omega`"));

    let missing = hbt(&["run", "--config", "/nonexistent/hbt.conf"]);
    assert_eq!(missing.status.code(), Some(2));

    assert_eq!(
        hbt(&["run", "--preset", "no-such-preset"]).status.code(),
        Some(2)
    );
    assert_eq!(hbt(&["frobnicate"]).status.code(), Some(2));

    // coincident fermion sources leave almost nothing to accept
    let envelope = hbt(&[
        "run",
        "--preset",
        "independent-fermions",
        "--set",
        "x0=0.01",
        "--samples",
        "10000",
        "--out",
        out,
    ]);
    assert_eq!(envelope.status.code(), Some(1));
    assert!(stderr(&envelope).contains("envelope"));
}

#[test]
fn compare_reports_from_separate_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |preset: &str, extra: &[&str]| {
        let out_dir = dir.path().join(preset);
        let mut args = vec![
            "run",
            "--preset",
            preset,
            "--seed",
            "21",
            "--out",
            path(&out_dir),
        ];
        args.extend_from_slice(extra);
        run_ok(&args);
        out_dir.join("report.json")
    };
    let bosons = run("independent-bosons", &[]);
    let fermions = run("independent-fermions", &[]);
    let epr = run("entangled-epr", &[]);
    let coarse = {
        let out_dir = dir.path().join("coarse");
        run_ok(&[
            "run",
            "--preset",
            "independent-bosons",
            "--samples",
            "0",
            "--set",
            "scan.points=101",
            "--out",
            path(&out_dir),
        ]);
        out_dir.join("report.json")
    };

    let same = run_ok(&["compare", path(&bosons), path(&bosons), "--format", "json"]);
    let summary: serde_json::Value = serde_json::from_slice(&same.stdout).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["relation"], "same-physics");
    for arm in summary["arms"].as_array().unwrap() {
        for c in arm["curves"].as_array().unwrap() {
            assert_eq!(c["max_absolute_difference"], 0.0);
        }
        for p in arm["parameters"].as_array().unwrap() {
            assert_eq!(p["delta"], 0.0);
        }
    }

    let differ = run_ok(&["compare", path(&bosons), path(&fermions)]);
    let text = String::from_utf8(differ.stdout).unwrap();
    assert!(text.contains("expected-different"), "{text}");
    assert!(text.contains("result: PASS"), "{text}");

    let strong = run_ok(&["compare", path(&bosons), path(&epr), "--format", "json"]);
    let summary: serde_json::Value = serde_json::from_slice(&strong.stdout).unwrap();
    let period = summary["arms"][0]["parameters"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == "period")
        .unwrap()
        .clone();
    assert_eq!(period["pass"], true);
    assert!(period["delta"].as_f64().unwrap() < 0.02);

    let mismatch = hbt(&["compare", path(&bosons), path(&coarse)]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(stderr(&mismatch).contains("grid"));

    let strict = hbt(&[
        "compare",
        path(&bosons),
        path(&epr),
        "--period-tol",
        "1e-12",
    ]);
    assert_eq!(strict.status.code(), Some(1));
}
