//! Black-box checks of the `ohm` binary: listings, the run/report round
//! trip, overrides, and the exit-code contract (0 ok, 2 config, 3 io).

use std::path::Path;
use std::process::{Command, Output};

fn ohm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ohm"))
        .args(args)
        .output()
        .expect("the binary spawns")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn listings_cover_the_catalog_and_the_registry() {
    let out = ohm(&["list-benchmarks"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("F1"));
    assert!(text.contains("Sphere"));
    assert!(text.contains("RotateShiftAckley"));

    let out = ohm(&["list-optimizers"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for key in [
        "pso",
        "ica",
        "ohmpso",
        "ohmica-st",
        "gd",
        "gpso",
        "ohmpso-gd",
    ] {
        assert!(text.contains(key), "missing {key} in: {text}");
    }
}

#[test]
fn config_errors_exit_with_2_and_io_errors_with_3() {
    let out = ohm(&["run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error:"));

    let out = ohm(&["run", "--preset", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown preset"));

    let out = ohm(&["run", "--preset", "desk", "--format", "yaml"]);
    assert_eq!(out.status.code(), Some(2));

    let out = ohm(&["run", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(3));

    let out = ohm(&["report", "--input", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("experiment.json");
    std::fs::write(
        &path,
        r#"{
            "problems": [
                {"kind": "benchmark", "id": "Sphere", "dim": 3, "nfe": 400},
                {"kind": "benchmark", "id": "Ackley", "dim": 3, "nfe": 400}
            ],
            "optimizers": [{"name": "pso"}, {"name": "ica"}],
            "runs_per_cell": 2,
            "master_seed": 5
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn run_and_report_round_trip_through_a_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");

    for csv in [&csv_a, &csv_b] {
        let out = ohm(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            csv.to_str().unwrap(),
            "--no-wall-ms",
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }

    let a = std::fs::read(&csv_a).unwrap();
    let b = std::fs::read(&csv_b).unwrap();
    assert_eq!(a, b, "same config, same bytes");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("problem,dim,nfe,optimizer,run,error,wall_ms\n"));
    // 2 problems x 2 optimizers x 2 runs plus the header.
    assert_eq!(text.lines().count(), 9);

    let out = ohm(&["report", "--input", csv_a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("| problem |"));
    assert!(text.contains("Sphere-d3"));
    assert!(text.contains("mean rank"));
}

#[test]
fn preset_overrides_flow_into_the_run() {
    let out = ohm(&[
        "run",
        "--preset",
        "multimodal",
        "--runs",
        "1",
        "--nfe",
        "500",
        "--seed",
        "3",
        "--format",
        "markdown",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for cell in ["Ackley-d3", "Schwefel-d3", "ohmica-st", "mean rank"] {
        assert!(text.contains(cell), "missing {cell} in: {text}");
    }
}
