use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn apsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apsim"))
        .current_dir(dir)
        .arg("run")
        .args(args)
        .output()
        .expect("spawn apsim")
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn report(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn ghz_mc_runs_are_reproducible_across_workers() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let common = ["--protocol", "ghz3", "--engine", "mc", "--mc-trials", "200000", "--seed", "7", "--out", "out"];
    let mut first = common.to_vec();
    first.extend(["--workers", "1"]);
    let mut second = common.to_vec();
    second.extend(["--workers", "4"]);
    let ra = apsim(a.path(), &first);
    let rb = apsim(b.path(), &second);
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stderr));
    assert!(rb.status.success(), "{}", String::from_utf8_lossy(&rb.stderr));
    let (fa, fb) = (files(&a.path().join("out")), files(&b.path().join("out")));
    assert!(fa.len() > 2, "{:?}", fa.keys());
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (name, bytes) in &fa {
        assert!(bytes == &fb[name], "{name} differs");
    }
}

#[test]
fn swap_reports_success_probability() {
    let dir = tempfile::tempdir().unwrap();
    let out = apsim(dir.path(), &["--protocol", "swap", "--tau", "30", "--out", "out"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    let p = r["results"][0]["success_probability"].as_f64().unwrap();
    assert!((p - 0.0018).abs() < 1e-15, "{p}");
}

#[test]
fn pair_without_doubles_reaches_tsirelson() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("pair.toml"),
        "protocol = \"pair\"\ntaus = [0.0]\n\n[source]\ndouble_excitations = false\n",
    )
    .unwrap();
    let out = apsim(dir.path(), &["--config", "pair.toml", "--out", "out"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    for arm in r["results"][0]["arms"].as_array().unwrap() {
        let s = arm["chsh"]["value"].as_f64().unwrap();
        assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9, "{s}");
    }
}

#[test]
fn config_error_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "protocol = \"pair\"\n\n[source]\nchi = -1.0\n").unwrap();
    let out = apsim(dir.path(), &["--config", "bad.toml", "--out", "out"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert_eq!(err["error"]["key"], "source.chi");
    assert_eq!(err["error"]["line"], 4);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = apsim(dir.path(), &["--protocol", "pair", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = apsim(
        dir.path(),
        &["--protocol", "pair", "--tau", "30", "--tau", "230", "--tau", "430", "--emit-curves", "--out", "out"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let f = files(&dir.path().join("out"));
    for name in ["report.json", "phi_vs_tau.csv", "s_vs_tau.csv"] {
        assert!(f.contains_key(name), "missing {name}: {:?}", f.keys());
    }
    let s = String::from_utf8(f["s_vs_tau.csv"].clone()).unwrap();
    let rows: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4, "{s}");
    let r = report(dir.path());
    assert_eq!(r["results"].as_array().unwrap().len(), 3);
}
