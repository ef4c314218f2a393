//! Report files. Each file is written next to its destination and then
//! renamed into place, so an interrupted run never leaves a partial file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::runner::{CheckRecord, RunReport, SpectrumRow};
use crate::CliError;

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut s = String::from("level,index_x,index_y,energy,residual\n");
    for r in rows {
        let iy = r.index_y.map(|j| j.to_string()).unwrap_or_default();
        s.push_str(&format!("{},{},{},{},{}\n", r.level, r.index_x, iy, num(r.energy), num(r.residual)));
    }
    s
}

pub fn potential_csv(xs: &[f64], cols: &[Vec<f64>]) -> String {
    let mut s = String::from(if cols.len() == 1 { "x,V\n" } else { "x,V_x,V_y\n" });
    for (i, x) in xs.iter().enumerate() {
        s.push_str(&num(*x));
        for c in cols {
            s.push(',');
            s.push_str(&num(c[i]));
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct ChecksFile<'a> {
    system: &'a str,
    passed: usize,
    failed: usize,
    checks: &'a [CheckRecord],
}

pub fn checks_json(report: &RunReport) -> String {
    let f = ChecksFile {
        system: report.system.name(),
        passed: report.passed(),
        failed: report.failed(),
        checks: &report.checks,
    };
    serde_json::to_string_pretty(&f).expect("check records serialize") + "\n"
}

pub fn config_json(cfg: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(&cfg.resolved()).expect("config serializes") + "\n"
}

fn with_suffix(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}.{suffix}"))
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Writes the four report files and returns their paths.
pub fn write_report(cfg: &ScenarioConfig, report: &RunReport) -> Result<Vec<PathBuf>, CliError> {
    let files = [
        ("spectrum.csv", spectrum_csv(&report.spectrum)),
        ("checks.json", checks_json(report)),
        ("potential.csv", potential_csv(&report.potential.0, &report.potential.1)),
        ("config.json", config_json(cfg)),
    ];
    let mut out = Vec::new();
    for (suffix, text) in files {
        let p = with_suffix(&cfg.output, suffix);
        write_atomic(&p, &text)?;
        out.push(p);
    }
    Ok(out)
}
