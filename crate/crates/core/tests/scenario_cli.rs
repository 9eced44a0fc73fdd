mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use common::*;
use proptest::prelude::*;
use ueda::cli::{run, EXIT_ERROR, EXIT_OBSTRUCTED, EXIT_OK};
use ueda::germ::FlatFactor;
use ueda::scalar::{cx, set_mp_digits, MpReal};
use ueda::scenario::{fingerprint, parse_scenario, scrambled, serialize_scenario, Scenario};
use ueda::series::{JetShape, ModeWindow};
use ueda::Error;

const SHAPE: JetShape = JetShape { nw: 3, nz: 2 };
const WIN: ModeWindow = ModeWindow { min: -6, max: 6 };

fn ueda(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ueda").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_tmp(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn serialization_round_trips(seed in 0u64..100_000, kt in 0i64..4, ks in 0i64..3, tol in 1e-12f64..1e-6) {
        let g = scrambled(seed, 1e-1, c64(2.0, 0.5), FlatFactor::root_of_unity(kt, 4), FlatFactor::root_of_unity(ks, 3), SHAPE, WIN).unwrap();
        let sc = Scenario { germ: g, tol };
        let text = serialize_scenario(&sc);
        let back: Scenario<f64> = parse_scenario(&text).unwrap();
        prop_assert_eq!(&back, &sc);
        prop_assert_eq!(serialize_scenario(&back), text);
        prop_assert_eq!(fingerprint(&back.germ), fingerprint(&sc.germ));
    }
}

#[test]
fn high_precision_serialization_round_trips() {
    set_mp_digits(50);
    for seed in 0..3u64 {
        let g = scrambled::<MpReal>(seed, 1e-1, cx(2.0, 0.0), FlatFactor::root_of_unity(1, 4), FlatFactor::one(), SHAPE, WIN)
            .unwrap();
        let sc = Scenario::new(g);
        let text = serialize_scenario(&sc);
        assert!(text.contains("precision 50"));
        let back: Scenario<MpReal> = parse_scenario(&text).unwrap();
        assert_eq!(back, sc);
    }
}

#[test]
fn parse_examples() {
    let sc: Scenario<f64> = parse_scenario("rho 2 0\norders 3 1\ng 2 0 1 1 0\n").unwrap();
    assert_eq!(sc.germ.g.get(2, 0).coeff(1), c64(1.0, 0.0));
    assert_eq!(sc.germ.shape(), JetShape::new(3, 1));

    let bad = parse_scenario::<f64>("orders 3 1\ng 2 0 1 abc 0\n");
    assert!(matches!(bad, Err(Error::Parse { line: 2, col: 9, .. })), "{bad:?}");
    // a g entry in row 1 is not allowed
    assert!(matches!(parse_scenario::<f64>("g 1 1 0 1 0\n"), Err(Error::Invalid(_))));
    assert!(matches!(parse_scenario::<f64>("rho 2 0\nrho 3 0\n"), Err(Error::Parse { line: 2, .. })));
    assert!(matches!(parse_scenario::<f64>("g 2 0 0 1 0\ng 2 0 0 1 0\n"), Err(Error::Parse { line: 2, .. })));
    // |ρ| ≤ 1 is rejected
    assert!(matches!(parse_scenario::<f64>("rho 0.5 0\n"), Err(Error::Invalid(_))));
    assert!(parse_scenario::<f64>("# nothing\n\n").unwrap().germ.g.is_zero());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, lin, _) = ueda(&["fixture", "linear"]);
    assert_eq!(code, EXIT_OK);
    let lin = write_tmp(dir.path(), "lin.txt", &lin);
    assert_eq!(ueda(&["check", &lin]).0, EXIT_OK);
    assert_eq!(ueda(&["flatten", &lin]).0, EXIT_OK);

    let (_, obs, _) = ueda(&["fixture", "obstructed", "--n", "2", "--m", "1"]);
    let obs = write_tmp(dir.path(), "obs.txt", &obs);
    assert_eq!(ueda(&["check", &obs]).0, EXIT_OBSTRUCTED);
    assert_eq!(ueda(&["flatten", &obs]).0, EXIT_OBSTRUCTED);

    let (code, _, err) = ueda(&["check", "/nonexistent/scenario"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.starts_with("error:"));
    assert_eq!(ueda(&["frobnicate"]).0, EXIT_ERROR);
    assert_eq!(ueda(&["majorant", "--K", "-1", "--R", "1", "--M", "1"]).0, EXIT_ERROR);
    assert_eq!(ueda(&["fixture", "obstructed", "--t", "1/2", "--n", "1"]).0, EXIT_ERROR);
    let garbled = write_tmp(dir.path(), "bad.txt", "rho two\n");
    let (code, _, err) = ueda(&["check", &garbled]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("line 1"), "{err}");

    let (_, scr, _) = ueda(&["fixture", "scrambled", "--seed", "4", "--t", "1/4"]);
    let scr = write_tmp(dir.path(), "scr.txt", &scr);
    assert_eq!(ueda(&["flatten", &scr, "--certify", "auto"]).0, EXIT_OK);
    let (code, out, _) = ueda(&["flatten", &scr, "--certify", "2", "4", "1e-12"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(out.contains("M too small"));
}

#[test]
fn majorant_command() {
    let (code, out, _) = ueda(&["--out", "machine", "majorant", "--K", "2", "--R", "1", "--M", "1"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let first = &v["majorant"]["coefficients"][0];
    assert_eq!((first["nu"].as_u64(), first["mu"].as_u64()), (Some(2), Some(0)));
    assert_eq!(first["A"].as_f64(), Some(2.0));
}

#[test]
fn precision_flag_and_file_declaration() {
    let dir = tempfile::tempdir().unwrap();
    let (_, obs, _) = ueda(&["--precision", "40", "fixture", "obstructed", "--c", "0.1"]);
    assert!(obs.contains("precision 40"));
    let obs = write_tmp(dir.path(), "obs.txt", &obs);
    let (code, out, _) = ueda(&["--out", "machine", "check", &obs]);
    assert_eq!(code, EXIT_OBSTRUCTED);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    // decimal strings in high precision
    assert!(v["first_obstruction"]["value"][0].as_str().unwrap().starts_with("1.0000000000"));
    let (code, out, _) = ueda(&["--out", "machine", "--precision", "double", "check", &obs]);
    assert_eq!(code, EXIT_OBSTRUCTED);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["first_obstruction"]["value"][0].as_f64(), Some(0.1));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (_, scr, _) = ueda(&["fixture", "scrambled", "--seed", "11", "--t", "1/3", "--s", "1/2"]);
    assert_eq!(ueda(&["fixture", "scrambled", "--seed", "11", "--t", "1/3", "--s", "1/2"]).1, scr);
    let scr = write_tmp(dir.path(), "scr.txt", &scr);
    for out in ["text", "machine"] {
        let a = ueda(&["--out", out, "flatten", &scr, "--certify", "auto"]);
        let b = ueda(&["--out", out, "flatten", &scr, "--certify", "auto"]);
        assert_eq!(a, b);
    }
}

#[test]
fn stdin_input() {
    let (_, lin, _) = ueda(&["fixture", "linear"]);
    let mut child = Command::new(env!("CARGO_BIN_EXE_ueda"))
        .args(["check", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(lin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
}

#[test]
fn golden_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (_, lin, _) = ueda(&["fixture", "linear", "--order-w", "3", "--order-z", "2"]);
    assert_eq!(lin, std::fs::read_to_string(golden("linear.scenario")).unwrap());
    let (_, obs, _) = ueda(&["fixture", "obstructed", "--order-w", "3", "--order-z", "2", "--mode-window", "4"]);
    let obs = write_tmp(dir.path(), "obs.txt", &obs);
    let bin = env!("CARGO_BIN_EXE_ueda");
    let cases: [(&[&str], &str); 3] = [
        (&["check", &obs], "check_obstructed.txt"),
        (&["--out", "machine", "flatten", &obs], "flatten_obstructed.json"),
        (&["--out", "machine", "--order-w", "3", "--order-z", "1", "majorant", "--K", "2", "--R", "1", "--M", "1"], "majorant.json"),
    ];
    for (args, file) in cases {
        let out = Command::new(bin).args(args).output().unwrap();
        let text = String::from_utf8(out.stdout).unwrap();
        let text = text.replace(obs.as_str(), "<scenario>");
        assert_eq!(text, std::fs::read_to_string(golden(file)).unwrap(), "{file}");
    }
}
