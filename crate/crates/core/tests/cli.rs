//! End-to-end runs of the `hgsolve` binary.

use std::path::Path;
use std::process::{Command, Output};

use hamilton_green::io::{read_field, read_series};

fn hgsolve(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgsolve"))
        .current_dir(dir)
        .env("HG_THREADS", "1")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn phantom_forward_adjoint_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = hgsolve(dir, &["phantom", "--grid", "32x64", "--dx", "0.8e-3", "--sensors", "sensors.txt"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let medium = read_field(&dir.join("medium.hgf")).unwrap();
    assert_eq!((medium.grid.nx, medium.grid.ny), (32, 64));

    let o = hgsolve(dir, &["forward", "--rays", "200", "--sensors", "sensors.txt", "--out", "data.hgs"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let data = read_series(&dir.join("data.hgs")).unwrap();
    assert!(data.iter().all(|s| s.values.len() == 800));
    assert!(data.iter().any(|s| s.values.iter().any(|v| *v != 0.0)));

    let o = hgsolve(dir, &["adjoint", "--rays", "200", "--sensors", "sensors.txt", "--nonneg", "--out", "img.hgf"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let img = read_field(&dir.join("img.hgf")).unwrap();
    assert!(img.values.iter().all(|v| *v >= 0.0));

    let o = hgsolve(dir, &["compare", "data.hgs", "data.hgs"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("rel_l2 0\n"), "{text}");
    assert!(text.contains("ncc 1\n"), "{text}");

    let o = hgsolve(dir, &["--csv", "data.hgs"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("t,s0,"));
    assert_eq!(csv.lines().count(), 801);
}

#[test]
fn dottest_passes_on_a_small_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hgsolve(tmp.path(), &["dottest", "--grid", "48x48", "--dx", "0.25e-3", "--trials", "1", "--T", "6e-6"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_1_and_missing_files_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(hgsolve(tmp.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(hgsolve(tmp.path(), &["forward", "--medium", "absent.hgf"]).status.code(), Some(2));
}
