//! End-to-end tests of the command-line interface: exit codes, file outputs,
//! schema validity of the JSON summaries, byte-level reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyapprox"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polyapprox-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

// ---------------------------------------------------------------------------
// Minimal JSON Schema validator (draft-07 subset used by our schema file).
// ---------------------------------------------------------------------------

fn validate(schema: &Value, value: &Value) -> Result<(), String> {
    if let Some(one_of) = schema.get("oneOf").and_then(Value::as_array) {
        let hits: Vec<_> = one_of.iter().filter(|s| validate(s, value).is_ok()).collect();
        return match hits.len() {
            1 => Ok(()),
            n => Err(format!("oneOf matched {n} branches")),
        };
    }
    if let Some(c) = schema.get("const") {
        if c != value {
            return Err(format!("expected const {c}, got {value}"));
        }
    }
    if let Some(e) = schema.get("enum").and_then(Value::as_array) {
        if !e.contains(value) {
            return Err(format!("{value} not in enum"));
        }
    }
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
            "boolean" => value.is_boolean(),
            other => return Err(format!("unsupported type {other}")),
        };
        if !ok {
            return Err(format!("expected {ty}, got {value}"));
        }
    }
    if let Some(req) = schema.get("required").and_then(Value::as_array) {
        for key in req {
            let key = key.as_str().unwrap();
            if value.get(key).is_none() {
                return Err(format!("missing required key {key}"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        for (key, sub) in props {
            if let Some(v) = value.get(key) {
                validate(sub, v).map_err(|e| format!("{key}: {e}"))?;
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate(items, v).map_err(|e| format!("[{i}]: {e}"))?;
            }
            if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
                if (arr.len() as u64) < min {
                    return Err("too few items".into());
                }
            }
            if let Some(max) = schema.get("maxItems").and_then(Value::as_u64) {
                if (arr.len() as u64) > max {
                    return Err("too many items".into());
                }
            }
        }
    }
    if let Some(min) = schema.get("minimum") {
        let (a, b) = (value.as_f64(), min.as_f64());
        if let (Some(a), Some(b)) = (a, b) {
            if a < b {
                return Err(format!("{a} below minimum {b}"));
            }
        }
    }
    if let Some(max) = schema.get("maximum") {
        let (a, b) = (value.as_f64(), max.as_f64());
        if let (Some(a), Some(b)) = (a, b) {
            if a > b {
                return Err(format!("{a} above maximum {b}"));
            }
        }
    }
    Ok(())
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/summary.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid_summary(path: &Path) {
    let value: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    if let Err(e) = validate(&schema(), &value) {
        panic!("{} does not validate: {e}", path.display());
    }
}

// ---------------------------------------------------------------------------

#[test]
fn inscribe_writes_outputs_and_validates() {
    let dir = tempdir("inscribe");
    let out = run(&[
        "inscribe",
        "--body", "ellipse:a=2,b=1",
        "--density", "opt:volume",
        "--j", "2",
        "--n", "16:128",
        "--trials", "100",
        "--seed", "7",
        "--no-timestamp",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.trim().lines().collect();
    // Header + one row per schedule point (16, 32, 64, 128).
    assert_eq!(lines.len(), 5, "{csv}");
    assert!(lines[0].starts_with("body,density,side,j,N"));
    assert!(dir.join("rate_fits.csv").exists());
    assert_valid_summary(&dir.join("summary.json"));
}

#[test]
fn missing_body_flag_exits_2_and_names_it() {
    let out = run(&["inscribe", "--n", "16:32", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--body"), "stderr: {stderr}");
}

#[test]
fn bad_grammar_exits_2() {
    let out = run(&[
        "inscribe",
        "--body", "cube:r=1",
        "--n", "16:32",
        "--trials", "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "inscribe",
        "--body", "ball:r=1",
        "--density", "opt:banana",
        "--n", "16:32",
        "--trials", "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rigidity_verdicts_and_schema() {
    let dir = tempdir("rigidity");
    let out = run(&[
        "rigidity",
        "--body", "ball:r=1",
        "--j1", "1",
        "--j2", "2",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("rigidity.json")).unwrap()).unwrap();
    assert_eq!(summary["ball_consistent"], Value::Bool(true));
    assert_valid_summary(&dir.join("rigidity.json"));

    let out = run(&[
        "rigidity",
        "--body", "ellipse:a=2,b=1",
        "--j1", "1",
        "--j2", "2",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("rigidity.json")).unwrap()).unwrap();
    assert_eq!(summary["ball_consistent"], Value::Bool(false));
    assert_valid_summary(&dir.join("rigidity.json"));

    // Equal indices violate the two-distinct-indices hypothesis.
    let out = run(&[
        "rigidity",
        "--body", "ball:r=1",
        "--j1", "2",
        "--j2", "2",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn density_tabulates_equal_values_on_ball() {
    let out = run(&[
        "density",
        "--body", "ball:r=1",
        "--kind", "opt:meanwidth",
        "--grid", "16",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let values: Vec<f64> = stdout
        .trim()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 16);
    for v in &values {
        assert!((v - values[0]).abs() <= 1e-15);
    }
}

#[test]
fn bestpoly_writes_off_and_histogram() {
    let dir = tempdir("bestpoly");
    let out = run(&[
        "bestpoly",
        "--body", "ellipse:a=2,b=1",
        "--n", "16",
        "--objective", "area",
        "--grid", "256",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let off = std::fs::read_to_string(dir.join("bestpoly.off")).unwrap();
    assert!(off.starts_with("OFF\n16 1 16\n"));
    let hist = std::fs::read_to_string(dir.join("bestpoly_histogram.csv")).unwrap();
    assert_eq!(hist.trim().lines().count(), 65); // header + 64 bins
    // Resolution guard: grid below 8 N.
    let out = run(&[
        "bestpoly",
        "--body", "ellipse:a=2,b=1",
        "--n", "64",
        "--objective", "area",
        "--grid", "256",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let d1 = tempdir("det1");
    let d2 = tempdir("det2");
    let args = |dir: &Path, workers: &str| {
        vec![
            "circumscribe".to_string(),
            "--body".into(), "ball:r=1".into(),
            "--density".into(), "uniform".into(),
            "--n".into(), "16:64".into(),
            "--trials".into(), "150".into(),
            "--seed".into(), "11".into(),
            "--workers".into(), workers.into(),
            "--no-timestamp".into(),
            "--out-dir".into(), dir.to_str().unwrap().into(),
        ]
    };
    let o1 = bin().args(args(&d1, "1")).output().unwrap();
    let o2 = bin().args(args(&d2, "4")).output().unwrap();
    assert!(o1.status.success() && o2.status.success());
    let a = std::fs::read(d1.join("results.csv")).unwrap();
    let b = std::fs::read(d2.join("results.csv")).unwrap();
    assert_eq!(a, b);
    let a = std::fs::read(d1.join("summary.json")).unwrap();
    let b = std::fs::read(d2.join("summary.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn timestamp_header_present_by_default() {
    let dir = tempdir("ts");
    let out = run(&[
        "inscribe",
        "--body", "ball:r=1",
        "--n", "16:32",
        "--trials", "100",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    assert!(csv.starts_with("# generated unix:"), "{csv}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempdir("config");
    let config = dir.join("run.toml");
    std::fs::write(
        &config,
        "body = \"ball:r=1\"\nn = \"16:32\"\ntrials = 100\nseed = 3\n",
    )
    .unwrap();
    let out = run(&[
        "inscribe",
        "--config", config.to_str().unwrap(),
        "--trials", "120",
        "--no-timestamp",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    // The flag overrides the file: 120 trials, no misses.
    assert!(csv.contains(",120,0,"), "{csv}");
}

#[test]
fn fixtures_check_passes_on_committed_file() {
    let out = run(&["fixtures"]);
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("within tolerance"));
}
