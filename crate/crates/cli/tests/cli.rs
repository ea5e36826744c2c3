use std::io::Write;
use std::process::{Command, Output};

fn semisym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semisym")).args(args).output().unwrap()
}

#[test]
fn selftest_is_byte_identical_across_runs() {
    let a = semisym(&["selftest", "--seed", "7", "--format", "machine"]);
    let b = semisym(&["selftest", "--seed", "7", "--format", "machine"]);
    assert_eq!(a.stdout, b.stdout);
    let out = String::from_utf8(a.stdout).unwrap();
    assert!(out.starts_with("SELFTEST seed=7 points=16\n"));
    assert_eq!(out.lines().filter(|l| l.starts_with("CRITERION ")).count(), 8);
    let failed = out.lines().filter(|l| l.starts_with("CRITERION ") && l.ends_with("status=FAIL")).count();
    assert_eq!(a.status.code(), Some(if failed == 0 { 0 } else { 1 }));
}

#[test]
fn bad_config_exits_two_with_line_number() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(
        f,
        "[manifold]\ndimension = 2\n\n[metric]\ndiagonal = [\"1\", \"1\"]\n\n[vector_field]\ncomponents = [\"1\"]\n"
    )
    .unwrap();
    let o = semisym(&["analyze", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 8"), "{err}");
}

#[test]
fn missing_config_exits_two() {
    let o = semisym(&["analyze", "/nonexistent/semisym.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn de_sitter_fluid_builtin() {
    let o = semisym(&[
        "builtin",
        "desitter-flat",
        "--fluid",
        "sigma=1,p=-1,lambda=3,k=1",
        "--format",
        "machine",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("VERDICT phantom_barrier value=true"));
    assert!(out.ends_with("exit=0\n"));
}

#[test]
fn unknown_builtin_exits_two() {
    let o = semisym(&["builtin", "schwarzschild"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn builtin_params_and_overrides() {
    let o = semisym(&[
        "builtin", "flrw", "--param", "f=t", "--param", "pt=t/(1+t^2/2)", "--points", "3", "--seed", "11",
        "--format", "machine",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("RUN name=flrw dim=4 points=3 seed=11 "));
    assert!(out.contains("VERDICT concircular value=true"));
}
