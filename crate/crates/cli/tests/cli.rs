//! End-to-end tests against the compiled binary.

use std::process::{Command, Output};

fn kronwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kronwalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn simulate_smallest_input() {
    let out = kronwalk(&["simulate", "--M", "2", "--j", "1"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("peak_time"));
    assert!(text.contains("peak_probability"));
}

#[test]
fn simulate_first_order_peak() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("run.json");
    let out = kronwalk(&[
        "simulate",
        "--M",
        "256",
        "--j",
        "1",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let summary = std::fs::read_to_string(&json).unwrap();
    let peak: f64 = extract(&summary, "peak_time");
    let prob: f64 = extract(&summary, "peak_probability");
    let predicted: f64 = extract(&summary, "predicted_time");
    assert!((peak - 25.13).abs() < 0.13, "peak_time {peak}");
    assert!(prob >= 0.999);
    assert!((predicted - std::f64::consts::PI * 8.0).abs() < 1e-9);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let csv = dir.path().join(format!("{run}.csv"));
        let json = dir.path().join(format!("{run}.json"));
        let out = kronwalk(&[
            "simulate",
            "--M",
            "8",
            "--j",
            "2",
            "--samples",
            "64",
            "--csv",
            csv.to_str().unwrap(),
            "--json",
            json.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
        outputs.push((std::fs::read(&csv).unwrap(), std::fs::read(&json).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1], "identical configs must produce identical bytes");
}

#[test]
fn simulate_full_mode_capacity_message() {
    let out = kronwalk(&["simulate", "--M", "256", "--j", "2", "--mode", "full"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("--mode reduced"), "{err}");
}

#[test]
fn analyze_emits_rates() {
    let out = kronwalk(&["analyze", "--M", "4", "--j", "6"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("\"gamma_formula\": \"practical_Mminus1_pow_j\""));
    let gamma: f64 = extract(&text, "gamma");
    assert!((gamma - 1.0 / 729.0).abs() < 1e-15);

    // The singular j = 3, M = 3 case falls back and says so.
    let out = kronwalk(&["analyze", "--M", "3", "--j", "3"]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("gamma_note"));
}

#[test]
fn reduce_partition_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("cells.json");
    let out = kronwalk(&["reduce", "--M", "4", "--j", "3", "--json", json.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("cells = 4"));
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(text.starts_with("{\"cells\": [[0]"));

    let out = kronwalk(&["reduce", "--M", "4", "--j", "3", "--census"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!(csv.starts_with("class,count,mutual_neighbors\n"));
    // Every row must keep exactly three columns.
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').count(), 3, "{line}");
    }
}

#[test]
fn verify_all_passes() {
    let out = kronwalk(&["verify", "all"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("srg:"));
    assert!(text.contains("census:"));
    assert!(text.contains("quotient:"));
    assert!(text.contains("diameter:"));
    assert!(text.contains(", 0 failed"));
}

#[test]
fn verify_unknown_suite_is_usage_error() {
    let out = kronwalk(&["verify", "spectra"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_one_file_pair_per_m() {
    let dir = tempfile::tempdir().unwrap();
    let out = kronwalk(&[
        "sweep",
        "--M",
        "4,8",
        "--j",
        "2",
        "--samples",
        "32",
        "--workers",
        "2",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    for m in [4, 8] {
        assert!(dir.path().join(format!("M{m}_j2.csv")).exists());
        assert!(dir.path().join(format!("M{m}_j2.json")).exists());
    }
}

/// Pulls a numeric field out of the flat JSON summaries.
fn extract(json: &str, key: &str) -> f64 {
    let pat = format!("\"{key}\": ");
    let start = json.find(&pat).unwrap_or_else(|| panic!("{key} missing in {json}")) + pat.len();
    let rest = &json[start..];
    let end = rest.find([',', '}']).unwrap();
    rest[..end].trim().parse().unwrap()
}
