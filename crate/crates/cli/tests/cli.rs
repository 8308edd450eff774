use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_superarray"));
    cmd.env_remove("SUPERARRAY_SPEED_OF_SOUND");
    cmd
}

fn base_config(dir: &Path) -> Value {
    json!({
        "schema_version": 1,
        "problem": { "elements": 7, "min_spacing_m": 0.02, "aperture_m": 0.15 },
        "idp": { "order": 2, "alpha": [0.309, 0.484, 0.207] },
        "grid": {
            "f_lo_hz": 200.0, "f_hi_hz": 8000.0, "f_step_hz": 800.0,
            "theta_s_lo_deg": 0.0, "theta_s_hi_deg": 180.0, "theta_s_step_deg": 30.0,
            "eval_angle_count": 360
        },
        "ga": { "population_size": 8, "generations": 4, "seed": 3 },
        "io": { "output_dir": dir, "checkpoint_interval": 1 }
    })
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn lsa_ii() -> Value {
    Value::Array(
        (0..7)
            .map(|m| json!({ "position_m": 0.02 * m as f64, "directivity": if m % 2 == 0 { 1.0 } else { 0.0 } }))
            .collect(),
    )
}

struct Fixture {
    dir: TempDir,
    config: PathBuf,
    geometry: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let config = write_json(dir.path(), "config.json", &base_config(dir.path()));
    let geometry = write_json(dir.path(), "lsa_ii.json", &lsa_ii());
    Fixture {
        dir,
        config,
        geometry,
    }
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn design_matches_sweep_row() {
    let f = fixture();
    let out = run(bin()
        .args(["design", "--theta-s", "60", "--freq", "1000", "--config"])
        .arg(&f.config)
        .arg("--geometry")
        .arg(&f.geometry));
    assert!(out.status.success(), "{}", stderr(&out));
    let line = String::from_utf8(out.stdout).unwrap();
    let metric = |key: &str| -> String {
        line.split_whitespace()
            .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
            .unwrap()
            .to_string()
    };

    let out = run(bin()
        .args(["sweep", "--axis", "freq", "--theta-s", "60", "--config"])
        .arg(&f.config)
        .arg("--geometry")
        .arg(&f.geometry));
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(f.dir.path().join("sweep_freq.csv")).unwrap();
    let row = csv
        .lines()
        .find(|l| l.starts_with("1000.00000,"))
        .expect("1 kHz row");
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[1], metric("df_db"));
    assert_eq!(cols[2], metric("wng_db"));
    assert_eq!(cols[3], metric("approx_error"));

    let filter: Value =
        serde_json::from_str(&std::fs::read_to_string(f.dir.path().join("filter.json")).unwrap())
            .unwrap();
    let taps = filter["filter"].as_array().unwrap();
    assert_eq!(taps.len(), 7);
    assert_eq!(taps[0].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_csv_layout_and_reproducibility() {
    let f = fixture();
    let sweep = |out: &Path| {
        let o = run(bin()
            .args(["sweep", "--axis", "steering", "--config"])
            .arg(&f.config)
            .arg("--geometry")
            .arg(&f.geometry)
            .arg("--out")
            .arg(out));
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let a = sweep(&f.dir.path().join("a.csv"));
    let b = sweep(&f.dir.path().join("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# fingerprint="));
    let header = lines.find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "axis_value,df_db,wng_db,approx_error,flag");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[0].starts_with("0,") && rows[6].starts_with("180.000000,"));
}

#[test]
fn alpha_not_summing_to_one_is_a_config_error() {
    let f = fixture();
    let mut cfg = base_config(f.dir.path());
    cfg["idp"]["alpha"] = json!([0.3, 0.484, 0.207]);
    let path = write_json(f.dir.path(), "bad.json", &cfg);
    let out = run(bin()
        .args(["design", "--theta-s", "60", "--freq", "1000", "--config"])
        .arg(&path)
        .arg("--geometry")
        .arg(&f.geometry));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("idp.alpha"), "{}", stderr(&out));
}

#[test]
fn alpha_within_tolerance_is_accepted() {
    let f = fixture();
    let mut cfg = base_config(f.dir.path());
    cfg["idp"]["alpha"] = json!([0.309, 0.484, 0.2070000000005]);
    let path = write_json(f.dir.path(), "near.json", &cfg);
    let out = run(bin()
        .args(["design", "--theta-s", "60", "--freq", "1000", "--config"])
        .arg(&path)
        .arg("--geometry")
        .arg(&f.geometry));
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn type_errors_name_the_field() {
    let f = fixture();
    let mut cfg = base_config(f.dir.path());
    cfg["grid"]["f_step_hz"] = json!("fast");
    let path = write_json(f.dir.path(), "typo.json", &cfg);
    let out = run(bin()
        .args(["sweep", "--axis", "steering", "--config"])
        .arg(&path)
        .arg("--geometry")
        .arg(&f.geometry));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("grid.f_step_hz"), "{}", stderr(&out));

    let mut cfg = base_config(f.dir.path());
    cfg["schema_version"] = json!(9);
    let path = write_json(f.dir.path(), "future.json", &cfg);
    let out = run(bin()
        .args(["sweep", "--axis", "steering", "--config"])
        .arg(&path)
        .arg("--geometry")
        .arg(&f.geometry));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("schema_version"));
}

#[test]
fn too_few_elements_is_a_solver_error() {
    let f = fixture();
    let five: Value = Value::Array(
        (0..5)
            .map(|m| json!({ "position_m": 0.02 * m as f64, "directivity": 0.5 }))
            .collect(),
    );
    let geometry = write_json(f.dir.path(), "five.json", &five);
    let out = run(bin()
        .args(["design", "--theta-s", "60", "--freq", "1000", "--config"])
        .arg(&f.config)
        .arg("--geometry")
        .arg(&geometry));
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("at least 6"), "{}", stderr(&out));
}

#[test]
fn unknown_axis_is_rejected() {
    let f = fixture();
    let out = run(bin()
        .args(["sweep", "--axis", "angle", "--config"])
        .arg(&f.config)
        .arg("--geometry")
        .arg(&f.geometry));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_reports_ties_and_winners() {
    let f = fixture();
    let copy = write_json(f.dir.path(), "copy.json", &lsa_ii());
    let out = run(bin()
        .args(["compare", "--config"])
        .arg(&f.config)
        .arg("--geometry")
        .arg(&f.geometry)
        .arg("--geometry")
        .arg(&copy));
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("tie between lsa_ii, copy"));

    let out = run(bin()
        .args(["compare", "--baseline", "uniform-omni", "--config"])
        .arg(&f.config)
        .arg("--geometry")
        .arg(&f.geometry));
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(stdout.contains("uniform-omni has the lowest"), "{stdout}");
    let csv = std::fs::read_to_string(f.dir.path().join("comparison.csv")).unwrap();
    assert!(csv.contains("label,overall_error,mean_df_db,mean_wng_db\nlsa_ii,"));
}

#[test]
fn compare_rejects_infeasible_geometry() {
    let f = fixture();
    let crowded = json!([
        { "position_m": 0.0, "directivity": 1.0 },
        { "position_m": 0.01, "directivity": 0.0 },
        { "position_m": 0.04, "directivity": 1.0 },
        { "position_m": 0.06, "directivity": 0.0 },
        { "position_m": 0.08, "directivity": 1.0 },
        { "position_m": 0.10, "directivity": 0.0 },
        { "position_m": 0.12, "directivity": 1.0 }
    ]);
    let path = write_json(f.dir.path(), "crowded.json", &crowded);
    let out = run(bin()
        .args(["compare", "--config"])
        .arg(&f.config)
        .arg("--geometry")
        .arg(&f.geometry)
        .arg("--geometry")
        .arg(&path));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("minimum spacing"), "{}", stderr(&out));
}

#[test]
fn speed_of_sound_override_changes_results() {
    let f = fixture();
    let design = |env: Option<&str>| {
        let mut cmd = bin();
        if let Some(c) = env {
            cmd.env("SUPERARRAY_SPEED_OF_SOUND", c);
        }
        let out = run(cmd
            .args(["design", "--theta-s", "60", "--freq", "1000", "--config"])
            .arg(&f.config)
            .arg("--geometry")
            .arg(&f.geometry));
        (
            out.status.code(),
            String::from_utf8_lossy(&out.stdout).into_owned(),
        )
    };
    let (code, default) = design(None);
    assert_eq!(code, Some(0));
    let (code, same) = design(Some("343"));
    assert_eq!((code, same.as_str()), (Some(0), default.as_str()));
    let (code, faster) = design(Some("686"));
    assert_eq!(code, Some(0));
    assert_ne!(faster, default);
    let (code, _) = design(Some("fast"));
    assert_eq!(code, Some(2));
}

#[test]
fn optimize_writes_outputs_and_resumes() {
    let f = fixture();
    let optimize = |extra: &[&str]| {
        let out = run(bin()
            .args(["optimize", "--baseline", "lsa-ii", "--config"])
            .arg(&f.config)
            .args(extra));
        assert!(out.status.success(), "{}", stderr(&out));
    };
    optimize(&[]);
    let history = std::fs::read_to_string(f.dir.path().join("history.csv")).unwrap();
    assert!(history.contains("generation,best,mean,median\n0,"));
    assert_eq!(history.lines().count(), 2 + 4);
    let result: Value =
        serde_json::from_str(&std::fs::read_to_string(f.dir.path().join("result.json")).unwrap())
            .unwrap();
    assert_eq!(result["finished"], json!(true));
    let best = std::fs::read_to_string(f.dir.path().join("best_geometry.json")).unwrap();
    assert_eq!(
        serde_json::from_str::<Value>(&best)
            .unwrap()
            .as_array()
            .unwrap()
            .len(),
        7
    );

    optimize(&["--stop-after", "2"]);
    let ckpt = f.dir.path().join("checkpoint.json");
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&ckpt).unwrap()).unwrap();
    for key in [
        "schema_version",
        "generation",
        "rng_state",
        "population",
        "history",
    ] {
        assert!(saved.get(key).is_some(), "checkpoint lacks {key}");
    }
    optimize(&["--resume", ckpt.to_str().unwrap()]);
    assert_eq!(
        std::fs::read_to_string(f.dir.path().join("history.csv")).unwrap(),
        history
    );
}

#[test]
fn incompatible_checkpoints_exit_4() {
    let f = fixture();
    let out = run(bin()
        .args(["optimize", "--stop-after", "1", "--config"])
        .arg(&f.config));
    assert!(out.status.success(), "{}", stderr(&out));
    let ckpt = f.dir.path().join("checkpoint.json");
    let mut saved: Value = serde_json::from_str(&std::fs::read_to_string(&ckpt).unwrap()).unwrap();

    let resume = |path: &Path, seed: &str| {
        run(bin()
            .args(["optimize", "--seed", seed, "--resume"])
            .arg(path)
            .arg("--config")
            .arg(&f.config))
    };
    assert_eq!(resume(&ckpt, "4").status.code(), Some(4));

    saved["schema_version"] = json!(99);
    let old = write_json(f.dir.path(), "old.json", &saved);
    let out = resume(&old, "3");
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("schema_version"));

    assert_eq!(
        resume(&f.dir.path().join("missing.json"), "3")
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn filter_bank_covers_the_grid() {
    let f = fixture();
    let bank = f.dir.path().join("bank.json");
    let out = run(bin()
        .args([
            "--threads",
            "2",
            "design",
            "--theta-s",
            "30",
            "--freq",
            "500",
            "--config",
        ])
        .arg(&f.config)
        .arg("--geometry")
        .arg(&f.geometry)
        .arg("--bank")
        .arg(&bank));
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(bank).unwrap()).unwrap();
    let (nf, ns) = (
        v["frequencies_hz"].as_array().unwrap().len(),
        v["steerings_deg"].as_array().unwrap().len(),
    );
    assert_eq!((nf, ns), (10, 7));
    assert_eq!(v["filters"].as_array().unwrap().len(), nf * ns);
}
