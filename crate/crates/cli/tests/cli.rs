use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use sectorkit_cli::{parse_machine, parse_spec, render_report, run_command, CliError, Command as Cmd, Flags, Format};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sectorkit")).args(args).current_dir(corpus()).output().expect("binary runs")
}

/// Numbers agree to 1e-12; everything else exactly.
fn assert_close(actual: &Value, expected: &Value, path: &str) {
    match (actual, expected) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{path}: {a} vs {b}");
        }
        (Value::Array(a), Value::Array(b)) => {
            assert_eq!(a.len(), b.len(), "{path}: length");
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                assert_close(x, y, &format!("{path}[{i}]"));
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>(), "{path}: keys");
            for (k, v) in a {
                assert_close(v, &b[k], &format!("{path}.{k}"));
            }
        }
        _ => assert_eq!(actual, expected, "{path}"),
    }
}

const REGRESSION: &[(&str, &[&str])] = &[
    ("m2_m3_sectors.sectors.json", &["sectors", "m2_m3_sectors.json"]),
    ("m2_m3_sectors.gns.json", &["gns", "m2_m3_sectors.json"]),
    ("qubit_measurement.measure.json", &["measure", "--samples", "10000", "--seed", "7", "qubit_measurement.json"]),
    ("qubit_measurement.crossed.json", &["crossed", "qubit_measurement.json"]),
    ("z2_ssb_swap.symmetry.json", &["symmetry", "z2_ssb_swap.json"]),
    ("z2_ssb_swap.crossed.json", &["crossed", "z2_ssb_swap.json"]),
    ("dhr_z3.symmetry.json", &["symmetry", "dhr_z3.json"]),
    ("modular_diag.modular.json", &["modular", "modular_diag.json"]),
    (
        "corpus.verify.json",
        &[
            "verify",
            "dhr_z3.json",
            "m2_m3_sectors.json",
            "modular_diag.json",
            "qubit_measurement.json",
            "z2_ssb_swap.json",
            "z2xz2_group.json",
        ],
    ),
];

#[test]
fn corpus_matches_expected_reports() {
    for (expected, args) in REGRESSION {
        let mut full = args.to_vec();
        full.extend(["--format", "machine"]);
        let out = run(&full);
        assert_eq!(out.status.code(), Some(0), "{expected}: {}", String::from_utf8_lossy(&out.stderr));
        let actual: Value = serde_json::from_slice(&out.stdout).unwrap();
        let text = std::fs::read_to_string(corpus().join("expected").join(expected)).unwrap();
        assert_close(&actual, &serde_json::from_str(&text).unwrap(), expected);
    }
}

#[test]
fn machine_output_is_byte_stable_and_round_trips() {
    for (_, args) in REGRESSION {
        let mut full = args.to_vec();
        full.extend(["--format", "machine"]);
        let first = run(&full).stdout;
        assert_eq!(first, run(&full).stdout);
        let text = String::from_utf8(first).unwrap();
        let report = parse_machine(&text).unwrap();
        assert_eq!(render_report(&report, Format::Machine), text);
    }
}

#[test]
fn sector_example_table() {
    let text = std::fs::read_to_string(corpus().join("m2_m3_sectors.json")).unwrap();
    let spec = parse_spec(&text, "m2_m3_sectors.json", 1e-9).unwrap();
    let report = run_command(Cmd::Sectors, &[spec], &Flags::default()).unwrap();
    let rows = report.results["m2_m3_sectors"]["sectors"].as_array().unwrap();
    let table: Vec<(u64, u64, f64)> =
        rows.iter().map(|r| (r["sector"].as_u64().unwrap(), r["dim"].as_u64().unwrap(), r["weight"].as_f64().unwrap())).collect();
    assert_eq!(table.len(), 2);
    assert_eq!((table[0].0, table[0].1), (1, 2));
    assert_eq!((table[1].0, table[1].1), (2, 3));
    assert!((table[0].2 - 0.3).abs() < 1e-12 && (table[1].2 - 0.7).abs() < 1e-12);
}

#[test]
fn qubit_measurement_is_fair() {
    let out = run(&["measure", "--format", "machine", "qubit_measurement.json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for row in v["results"]["qubit_measurement"]["outcomes"].as_array().unwrap() {
        assert!((row["probability"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn human_format_is_default() {
    let out = run(&["sectors", "m2_m3_sectors.json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("sectors (schema 1)\n"));
    assert!(text.contains("2 checks, 0 failed"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["verify", "--tol", "1e-17", "z2xz2_group.json"]).status.code(), Some(1));
    assert_eq!(run(&["modular", "--tol", "1e-20", "modular_diag.json"]).status.code(), Some(3));
    assert_eq!(run(&["measure", "m2_m3_sectors.json"]).status.code(), Some(2));
    assert_eq!(run(&["sectors", "missing.json"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"schema_version":1,"kind":"algebra","payload":{"ambient_dim":2,"generators":[[[[0,0],[1,0,0]],[[1,0],[0,0]]]]}}"#,
    )
    .unwrap();
    let out = run(&["sectors", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("payload.generators[0][0][1]"));
}

#[test]
fn flip_generator_example() {
    let text = r#"{"schema_version":1,"kind":"algebra","payload":{"ambient_dim":2,"generators":[[[[0,0],[1,0]],[[1,0],[0,0]]]]}}"#;
    let spec = parse_spec(text, "flip.json", 1e-9).unwrap();
    let report = run_command(Cmd::Sectors, &[spec], &Flags::default()).unwrap();
    let r = &report.results["flip.json"];
    assert_eq!(r["algebra_dim"], 2);
    assert_eq!(r["is_commutative"], true);
    assert_eq!(r["center_dim"], 2);
}

#[test]
fn arity_errors() {
    assert!(matches!(run_command(Cmd::Verify, &[], &Flags::default()), Err(CliError::Arity(_))));
    let text = r#"{"schema_version":1,"kind":"group","payload":{"cyclic_orders":[3]}}"#;
    let spec = parse_spec(text, "g.json", 1e-9).unwrap();
    assert!(matches!(run_command(Cmd::Sectors, &[spec], &Flags::default()), Err(CliError::Arity(_))));
}
