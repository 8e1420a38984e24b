use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use readop::cli::RunReport;
use readop::GrowthSequence;

fn readop(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_readop"))
        .args(args)
        .current_dir(dir)
        .env_remove("READOP_MAX_BITS")
        .env_remove("READOP_EVAL_BITS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn with_small(dir: &Path) {
    GrowthSequence::from_interleaved(&[2, 3, 6, 7]).unwrap().save(&dir.join("d.json")).unwrap();
}

#[test]
fn verify_passes_and_reloads() {
    let dir = tempfile::tempdir().unwrap();
    with_small(dir.path());
    let o = readop(&["verify", "--d", "d.json", "--block", "2", "--out-dir", "out"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = RunReport::load(&dir.path().join("out/verify.json")).unwrap();
    assert_eq!(r.n, Some(26));
    assert!(r.stage("partition").unwrap().verdict.is_pass());
    assert!(r.stage("tminus_support_degenerate").is_some());
    assert_eq!(RunReport::from_json(&r.to_json().unwrap()).unwrap(), r);
}

#[test]
fn verify_is_deterministic_across_output_directories() {
    let dir = tempfile::tempdir().unwrap();
    with_small(dir.path());
    for out in ["x", "y"] {
        let o = readop(&["verify", "--d", "d.json", "--n", "12", "--out-dir", out], dir.path());
        assert_eq!(code(&o), 0);
    }
    let x = fs::read(dir.path().join("x/verify.json")).unwrap();
    let y = fs::read(dir.path().join("y/verify.json")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn certify_fails_on_the_small_sequence() {
    let dir = tempfile::tempdir().unwrap();
    with_small(dir.path());
    let o = readop(&["certify", "--d", "d.json", "--levels", "2"], dir.path());
    assert_eq!(code(&o), 4);
    assert!(dir.path().join("nuclear_certificate.json").exists());
    let r = RunReport::load(&dir.path().join("certify.json")).unwrap();
    assert!(!r.stage("nuclear_certificate").unwrap().verdict.is_pass());
}

#[test]
fn generated_sequence_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = readop(&["gen-d", "--levels", "2", "--out", "d.json"], dir.path());
    assert_eq!(code(&o), 0);
    let again = readop(&["gen-d", "--levels", "2"], dir.path());
    let printed = String::from_utf8(again.stdout).unwrap();
    assert!(printed.contains("714012"), "{printed}");
    let o = readop(&["certify", "--d", "d.json", "--levels", "2", "--columns", "600"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn spectrum_writes_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    with_small(dir.path());
    let o = readop(&["spectrum", "--d", "d.json", "--block", "1", "--which", "modulus"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["spectrum_modulus.json", "eigenvector_modulus.csv", "powers_modulus.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let o = readop(&["report", "--out", "all.json", "spectrum_modulus.json"], dir.path());
    assert_eq!(code(&o), 0);
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    with_small(dir.path());
    // usage
    assert_eq!(code(&readop(&["verify", "--d", "d.json"], dir.path())), 2);
    assert_eq!(code(&readop(&["verify", "--d", "d.json", "--generate", "2", "--n", "3"], dir.path())), 2);
    assert_eq!(code(&readop(&["gen-d", "--levels", "2", "--seed", "0"], dir.path())), 2);
    assert_eq!(code(&readop(&["verify", "--d", "missing.json", "--n", "3"], dir.path())), 2);
    // invalid sequence
    fs::write(dir.path().join("bad.json"), r#"{"a": [3], "b": [2]}"#).unwrap();
    assert_eq!(code(&readop(&["verify", "--d", "bad.json", "--n", "3"], dir.path())), 3);
    fs::write(dir.path().join("junk.json"), "not json").unwrap();
    assert_eq!(code(&readop(&["verify", "--d", "junk.json", "--n", "3"], dir.path())), 3);
}
