use std::fs;
use std::process::Command;

fn popsize(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_popsize")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn datasets_lists_every_builtin() {
    let (code, out, _) = popsize(&["datasets", "--format", "csv"]);
    assert_eq!(code, 0);
    for name in ["ld_all", "ld_north", "ld_south", "ld_east", "ld_west", "hav"] {
        assert!(out.contains(name));
    }
}

#[test]
fn fit_is_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let base = ["fit", "--data", "hav", "--iters", "20000", "--seed", "4", "--format", "svg", "--output"];
    let run = |out: &std::path::Path| {
        let mut args = base.to_vec();
        args.push(out.to_str().unwrap());
        assert_eq!(popsize(&args).0, 0);
    };
    run(&a);
    run(&b);
    for f in ["summary.json", "chain.csv", "hist_N.csv", "hist_N.svg", "hist_alpha4.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert!(summary["summary"]["population"]["median"].as_f64().unwrap() > 271.0);

    let manifest = a.join("manifest.json");
    let (code, replayed, _) = popsize(&["replay", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(replayed.as_bytes(), fs::read(a.join("summary.json")).unwrap().as_slice());
}

#[test]
fn estimate_reports_failures_inline() {
    let (code, out, _) = popsize(&["estimate", "--data", "ld_all", "--methods", "sc,independent", "--bootstrap", "200"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[1]["ci_low"].as_f64().unwrap() < 855.4);

    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.csv");
    fs::write(&zero, "x111,x110,x101,x011,x100,x010,x001\n5,0,4,3,10,8,9\n").unwrap();
    let (code, out, _) = popsize(&["estimate", "--data", zero.to_str().unwrap(), "--methods", "llm,sc"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"error\""));
}

#[test]
fn exit_codes_distinguish_validation_errors() {
    assert_eq!(popsize(&["estimate", "--data", "nowhere"]).0, 2);
    assert_eq!(popsize(&["fit", "--data", "hav", "--iters", "100", "--burnin", "200"]).0, 2);
    assert_eq!(popsize(&["estimate", "--data", "hav", "--bootstrap", "50"]).0, 2);
    assert_eq!(popsize(&["fit", "--data", "hav", "--prior", "informative"]).0, 2);
    assert_eq!(popsize(&["simulate", "--preset", "P9:delta1:N200"]).0, 2);
}

#[test]
fn simulate_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let (code, stdout, err) = popsize(&[
        "simulate", "--preset", "P2:delta3:N200", "--reps", "3", "--iters", "4000", "--bootstrap", "100",
        "--estimators", "thbm,independent", "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.starts_with("scenario,estimator"));
    assert!(out.join("report.json").exists() && out.join("report.csv").exists() && out.join("manifest.json").exists());
    let (_, list, _) = popsize(&["simulate", "--list"]);
    for p in ["P1", "P2", "P3", "P4", "P5", "P6"] {
        assert!(list.lines().any(|l| l.starts_with(&format!("{p}:"))));
    }
}

#[test]
fn report_sums_strata() {
    let (code, out, _) = popsize(&[
        "report", "--data", "ld_north,ld_south", "--iters", "20000", "--format", "csv", "--require-ir",
    ]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l.starts_with("sum_of_strata")));
    assert_eq!(popsize(&["report", "--data", "hav", "--iters", "5000", "--require-ir"]).0, 2);
}
