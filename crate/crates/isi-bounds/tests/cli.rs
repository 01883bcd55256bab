//! End-to-end checks of the command-line binary: grid arithmetic, output
//! determinism, round-trip precision, and exit codes.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isi-bounds"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

#[test]
fn bounds_grid_arithmetic_yields_the_documented_row_count() {
    let csv = stdout_of(&["bounds", "--channel", "dicode", "--snr", "-10:14:0.5", "--m", "0,4"]);
    let rows: Vec<&str> = csv.trim_end().lines().collect();
    // header + 49 grid points x 2 cluster counts
    assert_eq!(rows.len(), 1 + 98);
    assert_eq!(
        rows[0],
        "snr_db,M,R,phi,rho_max,sigma_rho,F_SLC,F_l,F_u1,F_u2,C_SLC,C_L1,C_L2"
    );
}

#[test]
fn identity_bounds_collapse_and_match_the_memoryless_value() {
    let csv = stdout_of(&["bounds", "--channel", "identity", "--snr", "0", "--m", "0"]);
    let row = csv.lines().nth(1).expect("one data row");
    let cols: Vec<f64> = row.split(',').map(|t| t.parse().unwrap()).collect();
    let (c_slc, c_l1, c_l2) = (cols[10], cols[11], cols[12]);
    assert!((c_l1 - c_slc).abs() < 1e-12);
    assert!((c_l2 - c_slc).abs() < 1e-12);
    assert!((c_slc - 0.48594415413293524).abs() < 1e-9);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["bounds", "--channel", "epr4", "--snr", "-2:2:1", "--m", "0,2"];
    assert_eq!(stdout_of(&args), stdout_of(&args));

    let sir_args = ["sir", "--channel", "dicode", "--snr", "0:2:1", "--symbols", "40000"];
    assert_eq!(stdout_of(&sir_args), stdout_of(&sir_args));
}

#[test]
fn thread_cap_does_not_change_the_numbers() {
    let args = ["bounds", "--channel", "lowpass7", "--snr", "0:4:1", "--m", "0,2"];
    let default = stdout_of(&args);
    let capped = bin()
        .args(args)
        .env("ISI_BOUNDS_THREADS", "1")
        .output()
        .expect("binary runs");
    assert!(capped.status.success());
    assert_eq!(default.as_bytes(), &capped.stdout[..]);
}

#[test]
fn csv_fields_round_trip_at_twelve_significant_digits() {
    let csv = stdout_of(&["bounds", "--channel", "cauchy11", "--snr", "3:5:1", "--m", "2"]);
    for row in csv.trim_end().lines().skip(1) {
        for (i, field) in row.split(',').enumerate() {
            if i == 1 {
                let m: usize = field.parse().expect("integer cluster count");
                assert_eq!(m.to_string(), field);
            } else {
                let v: f64 = field.parse().expect("numeric field");
                assert_eq!(format!("{v:.11e}"), field, "field drifts on re-parse");
            }
        }
    }
}

#[test]
fn file_channels_match_the_equivalent_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("two_tap.ch");
    std::fs::write(
        &spec,
        "alphabet bpsk\ntaps 0.7071067811865476 0.7071067811865476\n",
    )
    .unwrap();
    let from_file = stdout_of(&["bounds", "--file", spec.to_str().unwrap(), "--snr", "0:4:2", "--m", "0,1"]);
    let builtin = stdout_of(&["bounds", "--channel", "dicode", "--snr", "0:4:2", "--m", "0,1"]);
    assert_eq!(from_file, builtin);
}

#[test]
fn out_flag_writes_the_same_csv_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let piped = stdout_of(&["bounds", "--channel", "dicode", "--snr", "0:2:1", "--m", "0"]);
    let status = bin()
        .args(["bounds", "--channel", "dicode", "--snr", "0:2:1", "--m", "0"])
        .args(["--out", path.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), piped);
}

#[test]
fn sir_emits_header_seed_and_plausible_rate() {
    let csv = stdout_of(&["sir", "--channel", "identity", "--snr", "0", "--symbols", "100000", "--seed", "7"]);
    let mut lines = csv.trim_end().lines();
    assert_eq!(lines.next().unwrap(), "snr_db,sir_bits,stderr_bits,n_symbols,seed");
    let cols: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rate: f64 = cols[1].parse().unwrap();
    let stderr: f64 = cols[2].parse().unwrap();
    assert!((rate - 0.486).abs() < 0.02, "rate {rate} far from 0.486");
    assert!(stderr > 0.0 && stderr < 0.02);
    assert_eq!(cols[3], "100000");
    assert_eq!(cols[4], "7");
}

#[test]
fn channels_verb_lists_all_builtins() {
    let listing = stdout_of(&["channels"]);
    for name in ["identity", "dicode", "epr4", "lowpass7", "cauchy11", "dicode-complex"] {
        assert!(listing.contains(name), "missing {name}");
    }
}

#[test]
fn usage_errors_exit_with_code_two() {
    for args in [
        &["bounds", "--channel", "nonsense"][..],
        &["bounds", "--channel", "dicode", "--snr", "5:1:1"][..],
        &["bounds", "--channel", "dicode", "--snr", "0", "--m", "-3"][..],
        &["figure", "11"][..],
        &["bounds", "--channel", "dicode", "--file", "also.ch"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?} should be a usage error");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn malformed_channel_files_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ch");
    std::fs::write(&bad, "alphabet bpsk\ntaps 0.5 oops\n").unwrap();
    let out = run(&["bounds", "--file", bad.to_str().unwrap(), "--snr", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("absent.ch");
    let out = run(&["bounds", "--file", missing.to_str().unwrap(), "--snr", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_requests_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    // 22 taps exceed the trellis memory cap, so simulation must refuse
    let taps: Vec<String> = (0..22).map(|_| "0.2132007163556104".into()).collect();
    let long = dir.path().join("long.ch");
    std::fs::write(&long, format!("alphabet bpsk\ntaps {}\n", taps.join(" "))).unwrap();
    let out = run(&["sir", "--file", long.to_str().unwrap(), "--snr", "0", "--symbols", "1000"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

#[test]
fn figure_writes_the_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "figure",
        "4",
        "--symbols",
        "20000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for name in ["figure4_rates.csv", "figure4_gaps.csv", "figure4.gp"] {
        let path = dir.path().join(name);
        assert!(path.exists(), "missing {name}");
        assert!(std::fs::metadata(&path).unwrap().len() > 0);
    }
    let gp = std::fs::read_to_string(dir.path().join("figure4.gp")).unwrap();
    assert!(gp.contains("figure4_rates.csv") && gp.contains("figure4_gaps.csv"));
    // relocatable: the script must reference its data by relative name only
    assert!(!gp.contains(dir.path().to_str().unwrap()));
}
