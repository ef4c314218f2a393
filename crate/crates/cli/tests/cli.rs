use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn susy(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_susy"))
        .args(args)
        .current_dir(dir)
        .env_remove("SUSY_GRID_N")
        .output()
        .expect("binary runs")
}

fn run_config(dir: &Path, name: &str, json: &str) -> Output {
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, json).unwrap();
    susy(&["run", path.to_str().unwrap()], dir)
}

fn checks(dir: &Path, prefix: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{prefix}.checks.json"))).unwrap()).unwrap()
}

fn record<'a>(c: &'a Value, name: &str) -> &'a Value {
    c["checks"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap_or_else(|| panic!("no {name}"))
}

/// `(level, energy)` pairs of a spectrum file.
fn energies(dir: &Path, prefix: &str) -> Vec<(usize, f64)> {
    let text = fs::read_to_string(dir.join(format!("{prefix}.spectrum.csv"))).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,index_x,index_y,energy,residual"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn list_shows_five_systems_and_custom() {
    let dir = tempfile::tempdir().unwrap();
    let out = susy(&["list"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split(':').next().unwrap()).collect();
    assert_eq!(names, ["mielnik2d", "erf_he", "erf_hf", "erf_hgamma_1d", "painleve_hss", "custom"]);
}

#[test]
fn mielnik2d_passes_ladder_and_integral_checks() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run_config(d, "m", r#"{"system":"mielnik2d","params":{"gamma":1.5},"levels":12,"output":"out/m"}"#);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let c = checks(d, "out/m");
    for name in ["ladder/x", "ladder/y", "integrals", "bracket", "spectrum/y", "riccati/mielnik"] {
        assert_eq!(record(&c, name)["pass"], true, "{name}");
    }
    // Oscillator plus ½ along x, {0, 1, 2, …} along y: level k is k + 1
    // with k + 1 product states.
    let e = energies(d, "out/m");
    for k in 0..12 {
        let members: Vec<f64> = e.iter().filter(|(l, _)| *l == k).map(|(_, e)| *e).collect();
        assert_eq!(members.len(), k + 1);
        assert!(members.iter().all(|v| (v - (k as f64 + 1.0)).abs() < 1e-6));
    }
    let pot = fs::read_to_string(d.join("out/m.potential.csv")).unwrap();
    assert!(pot.starts_with("x,V_x,V_y\n"));
    assert_eq!(pot.lines().count(), 2049);
}

#[test]
fn erf_hgamma_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run_config(d, "e", r#"{"system":"erf_hgamma_1d","params":{"a0":1,"gamma":2},"output":"e"}"#);
    assert_eq!(out.status.code(), Some(0));
    let e = energies(d, "e");
    assert_eq!(e.len(), 12);
    assert!(e[0].1.abs() < 1e-5);
    for (n, (_, v)) in e.iter().enumerate().skip(1) {
        assert!((v - (n as f64 + 2.0) / 2.0).abs() < 1e-5, "level {n}: {v}");
    }
    let c = checks(d, "e");
    assert_eq!(record(&c, "integrals")["pass"], Value::Null);
    // The alternative ladder form is reported without a verdict.
    assert_eq!(record(&c, "ladder/r_printed")["pass"], Value::Null);
    let pot = fs::read_to_string(d.join("e.potential.csv")).unwrap();
    assert!(pot.starts_with("x,V\n"));
}

#[test]
fn painleve_hss_rational_case_passes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run_config(
        d,
        "p",
        r#"{"system":"painleve_hss","params":{"alpha_p4":0,"beta_p4":-2,"gamma":1.5},"output":"p"}"#,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let c = checks(d, "p");
    assert_eq!(c["failed"], 0);
    for name in ["p4_residual", "integrals", "ladder/y", "spectrum/x", "spectrum/y", "bracket"] {
        assert_eq!(record(&c, name)["pass"], true, "{name}");
    }
}

#[test]
fn echoed_config_reproduces_checks_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run_config(d, "r", r#"{"system":"erf_hf","params":{"a0":1,"gamma":2},"levels":10,"output":"r"}"#);
    assert_eq!(out.status.code(), Some(0));
    let first = fs::read(d.join("r.checks.json")).unwrap();
    let spectrum = fs::read(d.join("r.spectrum.csv")).unwrap();
    let echo: Value = serde_json::from_str(&fs::read_to_string(d.join("r.config.json")).unwrap()).unwrap();
    assert_eq!(echo["conventions"]["hbar"], 1.0);
    assert_eq!(echo["params"]["omega"], 1.0);
    let out = susy(&["run", "r.config.json"], d);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(d.join("r.checks.json")).unwrap(), first);
    assert_eq!(fs::read(d.join("r.spectrum.csv")).unwrap(), spectrum);
    let leftovers: Vec<_> = fs::read_dir(d)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn invalid_configs_exit_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases = [
        ("levels", r#"{"system":"mielnik2d","params":{"gamma":1.5},"levels":41,"output":"bad"}"#),
        ("missing", r#"{"system":"erf_he","params":{"gamma":2},"output":"bad"}"#),
        ("singular", r#"{"system":"mielnik2d","params":{"gamma":0.5},"output":"bad"}"#),
        ("erf_singular", r#"{"system":"erf_hgamma_1d","params":{"a0":1,"gamma":0.1},"output":"bad"}"#),
        ("p4", r#"{"system":"painleve_hss","params":{"alpha_p4":1,"beta_p4":-2,"gamma":1.5},"output":"bad"}"#),
        ("unknown", r#"{"system":"hydrogen","output":"bad"}"#),
        ("syntax", r#"{"system":"mielnik2d","#),
        ("hbar", r#"{"system":"mielnik2d","params":{"gamma":1.5},"conventions":{"hbar":2,"hamiltonian":"","factorization":""},"output":"bad"}"#),
    ];
    for (name, json) in cases {
        let out = run_config(d, name, json);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(!d.join("bad.checks.json").exists());
    let out = susy(&["run", "does-not-exist.json"], d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_check_exits_1_and_still_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Too coarse to meet the ladder tolerance.
    let out = run_config(
        d,
        "c",
        r#"{"system":"mielnik2d","params":{"gamma":1.5},"grid":{"x_min":-12,"x_max":12,"n":200},"output":"c"}"#,
    );
    assert_eq!(out.status.code(), Some(1));
    let c = checks(d, "c");
    assert!(c["failed"].as_u64().unwrap() > 0);
    for suffix in ["spectrum.csv", "potential.csv", "config.json"] {
        assert!(d.join(format!("c.{suffix}")).exists());
    }
}

#[test]
fn grid_override_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("g.json"), r#"{"system":"erf_hgamma_1d","params":{"a0":1,"gamma":2},"levels":4,"output":"g"}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_susy"))
        .args(["run", "g.json"])
        .current_dir(d)
        .env("SUSY_GRID_N", "1024")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let echo: Value = serde_json::from_str(&fs::read_to_string(d.join("g.config.json")).unwrap()).unwrap();
    assert_eq!(echo["grid"]["n"], 1024);
    assert_eq!(fs::read_to_string(d.join("g.potential.csv")).unwrap().lines().count(), 1025);
}

#[test]
fn spectrum_command_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("base.json"), r#"{"system":"erf_hgamma_1d","params":{"a0":1,"gamma":0.1},"output":"x"}"#).unwrap();
    let out = susy(
        &["spectrum", "--system", "erf_hgamma_1d", "--levels", "3", "--config", "base.json", "--gamma", "2"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let e: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(e.len(), 3);
    assert!((e[1] - 1.5).abs() < 1e-5 && (e[2] - 2.0).abs() < 1e-5);
    let out = susy(&["spectrum", "--system", "painleve_hss", "--levels", "2", "--alpha-p4", "0", "--beta-p4", "-2", "--gamma", "1.5"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = susy(&["spectrum", "--system", "nope", "--levels", "2"], d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn custom_system_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run_config(
        d,
        "u",
        r#"{"system":"custom","params":{"x":{"family":"harmonic"},"y":{"family":"mielnik","gamma":1.5}},
            "checks":["spectrum","ladder","integrals","bracket"],"output":"u"}"#,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let c = checks(d, "u");
    assert_eq!(record(&c, "integrals")["pass"], true);
    assert_eq!(record(&c, "bracket")["pass"], true);
    assert!(c["checks"].as_array().unwrap().iter().all(|r| r["name"] != "riccati/mielnik"));
}

#[test]
fn custom_higher_resonance_on_a_coarser_grid() {
    // λx = 2, λy = 1 gives order-7 integrals, whose discrete application
    // amplifies round-off with grid refinement; n = 1024 resolves them.
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run_config(
        d,
        "h",
        r#"{"system":"custom","params":{"x":{"family":"harmonic","omega":2},"y":{"family":"mielnik","gamma":1.5}},
            "grid":{"x_min":-12,"x_max":12,"n":1024},"checks":["integrals","bracket"],"output":"h"}"#,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let c = checks(d, "h");
    let i = record(&c, "integrals");
    assert_eq!(i["pass"], true);
    assert!(i["details"].as_str().unwrap().contains("orders K/I1/I2 (2, 7, 7)"));
    assert_eq!(record(&c, "bracket")["pass"], Value::Null);
}
