use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn xlmimo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xlmimo")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const SMALL: [&str; 4] = ["--set", "scenario.num_antennas=16", "--set", "scenario.num_users=12"];

fn config_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn run_prints_one_block_per_mode() {
    let o = xlmimo(
        &[
            &["run"],
            &SMALL[..],
            &["--set", "scheduler.modes=[\"ISP\",\"PERFECT\"]"],
        ]
        .concat(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.matches("sum_se").count(), 2);
    assert!(text.contains("[ISP]") && text.contains("[PERFECT]"));
}

#[test]
fn same_seed_gives_identical_stdout() {
    let args = [&["run", "--seed", "7"], &SMALL[..]].concat();
    let a = xlmimo(&args);
    let b = xlmimo(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = xlmimo(&[&["run", "--seed", "8"], &SMALL[..]].concat());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn unknown_key_is_a_usage_error_naming_the_key() {
    let o = xlmimo(&["run", "--set", "scenario.num_userz=3"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("num_userz"), "{}", stderr(&o));
    let o = xlmimo(&["run", "--set", "scenario.num_users=\"many\""]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_invocations_exit_two() {
    assert_eq!(code(&xlmimo(&[])), 2);
    assert_eq!(code(&xlmimo(&["frobnicate"])), 2);
    assert_eq!(code(&xlmimo(&["run", "--config", "/nonexistent/x.toml"])), 2);
}

#[test]
fn config_errors_carry_field_or_line_context() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "seed = 1\n[scenario]\nnum_users = \"x\"\n").unwrap();
    let o = xlmimo(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("scenario.num_users"), "{}", stderr(&o));
    std::fs::write(&path, "seed = 1\n[scenario]\nnum_users = = 3\n").unwrap();
    let o = xlmimo(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn sweep_writes_two_files_per_variant_and_keeps_stdout_quiet() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a").join("b");
    let o = xlmimo(&[
        "sweep",
        "--config",
        &config_path("fig3.toml"),
        "--set",
        "scenario.num_antennas=12",
        "--set",
        "scenario.num_users=10",
        "--set",
        "sweep.realizations=2",
        "--set",
        "sweep.snr_db=[10.0]",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("realization"));
    for label in ["cost30", "cost50", "cost70"] {
        assert!(out.join(format!("raw_{label}.csv")).is_file());
        assert!(out.join(format!("aggregate_{label}.csv")).is_file());
    }
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 6);
}

#[test]
fn sweep_with_no_modes_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = xlmimo(&[
        "sweep",
        "--set",
        "scheduler.modes=[]",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(i.to_string());
        let args = [
            &[
                "sweep",
                "--threads",
                threads,
                "--set",
                "sweep.realizations=4",
                "--out",
                out.to_str().unwrap(),
            ],
            &SMALL[..],
        ]
        .concat();
        let o = xlmimo(&args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        bytes.push(std::fs::read(out.join("raw.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn correlation_validation_passes_at_desk_scale() {
    let start = Instant::now();
    let o = xlmimo(&["validate-correlation", "--set", "scenario.num_antennas=64"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("max |error|/beta"));
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn correlation_fault_injection_fails() {
    let o = xlmimo(&[
        "validate-correlation",
        "--set",
        "scenario.num_antennas=16",
        "--inject-fault",
        "1e-3",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL"));
    assert!(stdout(&o).contains("m="));
}

#[test]
fn far_field_grid_passes() {
    let o = xlmimo(&[
        "validate-correlation",
        "--set",
        "scenario.num_antennas=64",
        "--radii",
        "1e6",
        "--pair-stride",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn gain_validation_passes_and_is_fast_for_one_user() {
    let o = xlmimo(&[
        "validate-gains",
        "--set",
        "scenario.num_antennas=64",
        "--set",
        "scenario.num_users=8",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let start = Instant::now();
    let o = xlmimo(&[
        "validate-gains",
        "--set",
        "scenario.num_antennas=64",
        "--set",
        "scenario.num_users=1",
    ]);
    assert_eq!(code(&o), 0);
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn miscalibrated_covariance_fails_gain_validation() {
    let o = xlmimo(&[
        "validate-gains",
        "--set",
        "scenario.num_antennas=32",
        "--set",
        "scenario.num_users=4",
        "--miscalibrate",
        "1.5",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL: users"));
}

#[test]
fn dump_scenario_writes_json_and_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let o = xlmimo(
        &[
            &[
                "dump-scenario",
                "--correlation",
                "2",
                "--out",
                dir.path().to_str().unwrap(),
            ],
            &SMALL[..],
        ]
        .concat(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("scenario.json")).unwrap()).unwrap();
    assert_eq!(json["users"].as_array().unwrap().len(), 12);
    let csv = std::fs::read_to_string(dir.path().join("correlation_2.csv")).unwrap();
    assert!(csv.lines().count() >= 16);
}
