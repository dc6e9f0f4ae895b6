use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vbi(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vbi"));
    cmd.current_dir(dir).env_remove("VBI_OUT_DIR").args(args);
    if let Some(text) = config {
        let path = dir.join("run.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const SMALL_SWEEP: &str = "[theory]\npair_count = 5\nfrequency_count = 12\n";

#[test]
fn theory_sweep_writes_the_documented_header() {
    let tmp = tempfile::tempdir().unwrap();
    let o = vbi(tmp.path(), &["theory-sweep", "--out", "sweep"], Some(SMALL_SWEEP));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&tmp.path().join("sweep/sweep.csv"));
    assert_eq!(rows[0].join(","), "alpha,beta,gamma,coupled,uncoupled,oracle,error_pct");
    // Pairs with α ≤ β + 1 are skipped, so only whole pairs of 12 frequencies remain.
    assert!(rows.len() > 12 && (rows.len() - 1).is_multiple_of(12));
    // The last pair is the most flexible bridge.
    for r in &rows[rows.len() - 12..] {
        let err: f64 = r[6].parse().unwrap();
        assert!(err.is_nan() || err < 0.1, "{r:?}");
    }
    assert!(tmp.path().join("sweep/manifest.toml").exists());
}

#[test]
fn reversed_range_is_a_config_error_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let o = vbi(tmp.path(), &["theory-sweep", "--out", "x"], Some("[theory]\nfrequency_range = [100.0, 0.1]\n"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("frequency_range"), "{}", stderr(&o));
}

#[test]
fn unknown_vehicle_preset_lists_the_presets() {
    let tmp = tempfile::tempdir().unwrap();
    let o = vbi(tmp.path(), &["compare", "--out", "x"], Some("[compare]\nvehicles = [\"bus\"]\n"));
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("bus") && e.contains("commercial") && e.contains("truck"), "{e}");
}

#[test]
fn unknown_key_and_bad_toml_exit_with_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = vbi(tmp.path(), &["validate"], Some("[bridge]\nlength = 3\n"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("length"));
    let o = vbi(tmp.path(), &["validate"], Some("[bridge\n"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn non_reference_span_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = vbi(tmp.path(), &["simulate"], Some("[bridge]\nspan = 42.0\n"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("span"));
}

#[test]
fn missing_subcommand_and_bad_flag_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(vbi(tmp.path(), &[], None).status.code(), Some(1));
    assert_eq!(vbi(tmp.path(), &["validate", "--bogus"], None).status.code(), Some(1));
    assert_eq!(vbi(tmp.path(), &["--help"], None).status.code(), Some(0));
}

#[test]
fn default_config_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let o = vbi(tmp.path(), &["--print-default-config"], None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for section in ["[bridge]", "[vehicle]", "[traffic]", "[roughness]", "[simulation]", "[theory]"] {
        assert!(text.contains(section), "{section}");
    }
    // Feeding the dump back in must be accepted.
    let o = vbi(tmp.path(), &["theory-sweep", "--out", "d"], Some(&text));
    assert!(o.status.success(), "{}", stderr(&o));
}

const SMALL_GRID: &str = "\
[bridge]
node_spacing = 1.0

[compare]
spans = [15.0, 200.0]
n_vehicles = [0, 50]
vehicles = [\"commercial\"]
";

#[test]
fn compare_grid_is_ordered_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = vbi(tmp.path(), &["compare", "--out", "a", "--jobs", "2", "--emit-traces"], Some(SMALL_GRID));
    assert!(a.status.success(), "{}", stderr(&a));
    let b = vbi(tmp.path(), &["compare", "--out", "b", "--jobs", "1"], Some(SMALL_GRID));
    assert!(b.status.success(), "{}", stderr(&b));

    let rows = csv_rows(&tmp.path().join("a/compare.csv"));
    assert_eq!(rows.len(), 5);
    let col = |name: &str| rows[0].iter().position(|h| h == name).unwrap();
    let (span, n, mse) = (col("span"), col("n_vehicles"), col("mse_time"));
    let cells: Vec<(String, String)> = rows[1..].iter().map(|r| (r[span].clone(), r[n].clone())).collect();
    assert_eq!(cells, [("15.0", "0"), ("200.0", "0"), ("15.0", "50"), ("200.0", "50")].map(|(a, b)| (a.into(), b.into())));

    // Everything but the wall times must match byte for byte.
    let timing = [col("coupled_seconds"), col("decoupled_seconds")];
    let strip = |rows: Vec<Vec<String>>| -> Vec<Vec<String>> {
        rows.into_iter()
            .map(|r| r.into_iter().enumerate().filter(|(i, _)| !timing.contains(i)).map(|(_, v)| v).collect())
            .collect()
    };
    assert_eq!(strip(rows.clone()), strip(csv_rows(&tmp.path().join("b/compare.csv"))));

    assert!(rows[1..].iter().all(|r| r[mse].parse::<f64>().unwrap() >= 0.0));

    let trace = tmp.path().join("a/traces/commercial_15m_n0_coupled_bridge.csv");
    let text = fs::read_to_string(trace).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("t,u_midspan"));
    assert!(!tmp.path().join("b/traces").exists());
}

#[test]
fn simulate_writes_traces_and_a_rerunnable_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[bridge]\nspan = 15.0\nnode_spacing = 0.5\n";
    let o = vbi(tmp.path(), &["simulate", "--out", "s", "--seed", "7", "--strict-paper-mode"], Some(cfg));
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = tmp.path().join("s");
    for f in ["coupled_bridge.csv", "coupled_vehicle.csv", "coupled_contact.csv", "decoupled_bridge.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let manifest = fs::read_to_string(dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("command = \"simulate\""));
    assert!(manifest.contains("seeds = [7, 8]"));
    let effective = fs::read_to_string(dir.join("config.toml")).unwrap();
    assert!(effective.contains("strict_paper_mode = true"));

    // Re-running from the recorded config reproduces the histories exactly.
    let again = Command::new(env!("CARGO_BIN_EXE_vbi"))
        .current_dir(tmp.path())
        .env_remove("VBI_OUT_DIR")
        .args(["simulate", "--out", "r", "--config"])
        .arg(dir.join("config.toml"))
        .output()
        .unwrap();
    assert!(again.status.success(), "{}", stderr(&again));
    for f in ["coupled_bridge.csv", "decoupled_vehicle.csv", "coupled_contact.csv"] {
        assert_eq!(fs::read(dir.join(f)).unwrap(), fs::read(tmp.path().join("r").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_vbi"))
        .current_dir(tmp.path())
        .env("VBI_OUT_DIR", tmp.path().join("from-env"))
        .args(["theory-sweep", "--config"])
        .arg({
            let p = tmp.path().join("t.toml");
            fs::write(&p, SMALL_SWEEP).unwrap();
            p
        })
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("from-env/sweep.csv").exists());
}

#[test]
fn validate_fails_when_the_steel_is_too_heavy() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = vbi(tmp.path(), &["validate", "--out", "ok"], Some("[validate]\nnode_spacing = 0.5\n"));
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("truck") && l.contains("0.6900")), "{stdout}");

    let heavy = vbi(tmp.path(), &["validate", "--out", "heavy"], Some("[validate]\nnode_spacing = 0.5\nmass_density = 11775.0\n"));
    assert_eq!(heavy.status.code(), Some(2));
    let out = String::from_utf8_lossy(&heavy.stdout);
    assert!(out.lines().any(|l| l.starts_with("bridge 15 m") && l.ends_with("FAIL")), "{out}");
}

#[test]
fn benchmark_records_every_span_and_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[benchmark]\nspans = [15.0, 30.0]\nn_vehicles = 5\nnode_spacing = 1.0\n";
    let o = vbi(tmp.path(), &["benchmark", "--out", "b"], Some(cfg));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&tmp.path().join("b/benchmark.csv"));
    assert_eq!(rows[0].join(","), "span,dof_count,coupled_seconds,decoupled_seconds,speedup,strict_mode");
    assert_eq!(rows.len(), 1 + 2 * 2);
}
