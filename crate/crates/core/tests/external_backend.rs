#![cfg(unix)]

use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aspsubcount::counter::{
    external_projected_count, subtractive_count, subtractive_count_with, BackendConfig,
    BackendError, CountError, CountOptions,
};
use aspsubcount::generate::{random_program, RandomProgramConfig};
use aspsubcount::parse_program;

const BIN: &str = env!("CARGO_BIN_EXE_aspsubcount");
const GUARDED_CYCLE: &str = include_str!("fixtures/guarded_cycle.lp");

fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

/// An external counter that delegates to the built-in one in a child process.
fn self_counter(dir: &Path) -> PathBuf {
    script(dir, "selfmc", &format!("exec '{BIN}' mc \"$1\""))
}

fn cnf_file(dir: &Path) -> PathBuf {
    let p = dir.join("f.cnf");
    std::fs::write(&p, "p cnf 2 1\n1 2 0\n").unwrap();
    p
}

#[test]
fn external_process_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let ext = BackendConfig::external(self_counter(dir.path()), vec!["{file}".into()]);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut programs = vec![parse_program(GUARDED_CYCLE).unwrap()];
    for i in 0..12 {
        let cfg = RandomProgramConfig {
            force_loop: i % 2 == 0,
            ..RandomProgramConfig::default()
        };
        programs.push(random_program(&mut rng, &cfg));
    }
    for p in &programs {
        let a = subtractive_count(p, &BackendConfig::builtin()).unwrap();
        let b = subtractive_count(p, &ext).unwrap();
        assert_eq!((&a.overcount, &a.surplus), (&b.overcount, &b.surplus));
        assert!(b.backend.starts_with("external:"));
        let opts = CountOptions {
            phi1_projected: true,
            tight_shortcut: false,
            ..CountOptions::default()
        };
        let c = subtractive_count_with(p, &ext, &opts).unwrap();
        assert_eq!(c.answer_sets, a.answer_sets);
    }
}

#[test]
fn output_formats() {
    let dir = tempfile::tempdir().unwrap();
    let f = cnf_file(dir.path());
    for (name, body, want) in [
        (
            "a",
            "echo 'c s exact arb int 12345678901234567890'",
            "12345678901234567890",
        ),
        ("b", "echo 's SATISFIABLE'; echo 's mc 3'; exit 10", "3"),
        ("c", "echo 'c noise'; echo 17", "17"),
    ] {
        let cfg = BackendConfig::external(script(dir.path(), name, body), vec!["{file}".into()]);
        let n = external_projected_count(&f, &cfg).unwrap();
        assert_eq!(n, want.parse::<BigUint>().unwrap());
    }
}

#[test]
fn failures_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let f = cnf_file(dir.path());
    let cfg = |name: &str, body: &str| {
        BackendConfig::external(script(dir.path(), name, body), vec!["{file}".into()])
    };
    assert!(matches!(
        external_projected_count(&f, &cfg("bad", "echo oops >&2; exit 1")),
        Err(BackendError::Failed { .. })
    ));
    assert!(matches!(
        external_projected_count(&f, &cfg("junk", "echo 'no number here'")),
        Err(BackendError::Unparseable { .. })
    ));
    let slow = cfg("slow", "sleep 5; echo 1").with_timeout(Some(Duration::from_millis(200)));
    assert!(matches!(
        external_projected_count(&f, &slow),
        Err(BackendError::Timeout(_))
    ));
    let missing = BackendConfig::external(dir.path().join("absent"), vec![]);
    assert!(matches!(
        external_projected_count(&f, &missing),
        Err(BackendError::Spawn { .. })
    ));
}

#[test]
fn surplus_above_overcount_is_an_integrity_error() {
    let dir = tempfile::tempdir().unwrap();
    let liar = script(
        dir.path(),
        "liar",
        "if grep -q '^c p show' \"$1\"; then echo 's mc 9'; else echo 's mc 1'; fi",
    );
    let p = parse_program(GUARDED_CYCLE).unwrap();
    let err = subtractive_count(&p, &BackendConfig::external(&liar, vec!["{file}".into()]));
    assert!(matches!(err, Err(CountError::Integrity { .. })));

    let prog = dir.path().join("p.lp");
    std::fs::write(&prog, GUARDED_CYCLE).unwrap();
    let o = Command::new(BIN)
        .args(["count", prog.to_str().unwrap()])
        .env("ASPSUBCOUNT_BACKEND", format!("exec:{}", liar.display()))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn cli_timeout_and_env_backend() {
    let dir = tempfile::tempdir().unwrap();
    let prog = dir.path().join("p.lp");
    std::fs::write(&prog, GUARDED_CYCLE).unwrap();
    let slow = script(dir.path(), "slow", "sleep 5; echo 1");
    let o = Command::new(BIN)
        .args(["count", prog.to_str().unwrap(), "--timeout", "0.2"])
        .args(["--backend", &format!("exec:{}", slow.display())])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(BIN)
        .args(["count", prog.to_str().unwrap(), "--json"])
        .env(
            "ASPSUBCOUNT_BACKEND",
            self_counter(dir.path()).to_str().unwrap(),
        )
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["answer_sets"], "1");
    assert!(v["backend"].as_str().unwrap().starts_with("external:"));
}
