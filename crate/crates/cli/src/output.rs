//! Report JSON, CSV tables and curve files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use apsim_core::analysis::{CorrelationEstimate, Expectation};
use apsim_core::engines::write_trial_log;
use apsim_core::protocols::{ExperimentConfig, ProtocolReport};
use apsim_core::source::{phi_of_tau, relative_phase, LevelScheme, SourceParams};
use serde::Serialize;

/// Everything needed to reproduce a run; written into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_path: Option<String>,
    pub config: ExperimentConfig,
    pub engine: String,
    pub seed: u64,
    pub out_dir: String,
    pub outputs: Vec<String>,
    pub tool_version: String,
}

impl RunManifest {
    fn comment(&self) -> String {
        format!("# manifest: {}\n", serde_json::to_string(self).expect("manifest serializes"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiPoint {
    pub tau_ns: f64,
    pub phi_deg: f64,
    /// Phase of the Zeeman-resolved model at the same storage time.
    pub phi_model_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SPoint {
    pub tau_ns: f64,
    pub values: Vec<(String, f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Curves {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_vs_tau: Option<Vec<PhiPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_vs_tau: Option<Vec<SPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub manifest: RunManifest,
    pub protocol: String,
    pub results: Vec<ProtocolReport>,
    pub curves: Curves,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

pub const PHI_STEP_NS: f64 = 5.0;
pub const PHI_MAX_NS: f64 = 500.0;

/// `φ(τ)` on a 5 ns grid over 0–500 ns.
pub fn phi_curve(cfg: &ExperimentConfig) -> apsim_core::Result<Vec<PhiPoint>> {
    let scheme = LevelScheme::new(cfg.source.levels.f_b, cfg.source.levels.f_e2)?;
    let params = SourceParams::from_scheme(cfg.source.chi, &scheme)?;
    let beta = cfg.source.beta();
    let steps = (PHI_MAX_NS / PHI_STEP_NS) as usize;
    (0..=steps)
        .map(|i| {
            let tau_ns = i as f64 * PHI_STEP_NS;
            let tau = tau_ns * 1e-9;
            Ok(PhiPoint {
                tau_ns,
                phi_deg: phi_of_tau(tau, beta)?.to_degrees(),
                phi_model_deg: relative_phase(&params.qubit, beta * tau, cfg.source.retrieval_weighting).to_degrees(),
            })
        })
        .collect()
}

/// Headline statistics per storage time.
pub fn s_curve(results: &[ProtocolReport]) -> Vec<SPoint> {
    results
        .iter()
        .map(|r| SPoint {
            tau_ns: r.tau_ns(),
            values: match r {
                ProtocolReport::Pair(p) => p
                    .arms
                    .iter()
                    .map(|a| (format!("S_{}", a.arm), a.chsh.value, a.chsh.stderr))
                    .collect(),
                ProtocolReport::Swap(s) => vec![("S".into(), s.chsh.value, s.chsh.stderr)],
                ProtocolReport::Ghz3(g) => {
                    let mut v = Vec::new();
                    if let Some(w) = &g.witness {
                        v.push(("W".into(), w.value, w.stderr));
                    }
                    if let Some(m) = &g.mermin {
                        v.push(("S_Me".into(), m.value, m.stderr));
                    }
                    v
                }
            },
        })
        .collect()
}

fn e_row(out: &mut String, tau: f64, block: &str, e: &CorrelationEstimate) {
    let (a, b) = e.settings.map_or((f64::NAN, f64::NAN), |(a, b)| (a.theta, b.theta));
    let c = e.counts;
    let _ = writeln!(
        out,
        "{tau},{block},{a},{b},{},{},{},{},{},{}",
        e.value, e.stderr, c.pp, c.mm, c.pm, c.mp
    );
}

fn x_row(out: &mut String, tau: f64, name: &str, x: &Expectation) {
    let _ = writeln!(out, "{tau},{name},{},{}", x.value, x.stderr);
}

/// Correlation table (pair, swap) or Pauli expectation table (ghz3).
pub fn table_csv(results: &[ProtocolReport]) -> (&'static str, String) {
    let ghz = matches!(results.first(), Some(ProtocolReport::Ghz3(_)));
    let mut out = String::new();
    if ghz {
        out.push_str("tau_ns,observable,value,stderr\n");
    } else {
        out.push_str("tau_ns,block,theta_a,theta_b,E,stderr,c_pp,c_mm,c_pm,c_mp\n");
    }
    for r in results {
        let tau = r.tau_ns();
        match r {
            ProtocolReport::Pair(p) => {
                for a in &p.arms {
                    for e in &a.e_table {
                        e_row(&mut out, tau, &a.arm.to_string(), e);
                    }
                }
            }
            ProtocolReport::Swap(s) => {
                for e in &s.e_table {
                    e_row(&mut out, tau, "AS1_AS2", e);
                }
            }
            ProtocolReport::Ghz3(g) => {
                if let Some(w) = &g.witness {
                    let t = w.terms;
                    x_row(&mut out, tau, "xxx", &t.xxx);
                    x_row(&mut out, tau, "zz23", &t.zz23);
                    x_row(&mut out, tau, "zz34", &t.zz34);
                    x_row(&mut out, tau, "zz24", &t.zz24);
                }
                if let Some(m) = &g.mermin {
                    let t = m.terms;
                    x_row(&mut out, tau, "yyx", &t.yyx);
                    x_row(&mut out, tau, "yxy", &t.yxy);
                    x_row(&mut out, tau, "xyy", &t.xyy);
                }
            }
        }
    }
    (if ghz { "expectations.csv" } else { "e_table.csv" }, out)
}

pub fn phi_csv(points: &[PhiPoint]) -> String {
    let mut out = String::from("tau_ns,phi_deg,phi_model_deg\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.tau_ns, p.phi_deg, p.phi_model_deg);
    }
    out
}

pub fn s_csv(points: &[SPoint]) -> String {
    let mut out = String::from("tau_ns");
    if let Some(first) = points.first() {
        for (name, _, _) in &first.values {
            let _ = write!(out, ",{name},{name}_stderr");
        }
    }
    out.push('\n');
    for p in points {
        out.push_str(&p.tau_ns.to_string());
        for (_, v, s) in &p.values {
            let _ = write!(out, ",{v},{s}");
        }
        out.push('\n');
    }
    out
}

pub fn trial_file_name(tau_ns: f64, block: &str) -> String {
    format!("trials_tau{tau_ns}_{block}.csv")
}

/// Names of the files a run will write, in write order.
pub fn planned_outputs(results: &[ProtocolReport], phi: bool, s_curve: bool) -> Vec<String> {
    let mut v = vec!["report.json".to_string(), table_csv(results).0.to_string()];
    for r in results {
        for log in r.trial_logs() {
            v.push(trial_file_name(r.tau_ns(), &log.name));
        }
    }
    if phi {
        v.push("phi_vs_tau.csv".into());
    }
    if s_curve {
        v.push("s_vs_tau.csv".into());
    }
    v
}

fn write_with_manifest(dir: &Path, name: &str, manifest: &RunManifest, body: &str) -> io::Result<()> {
    let mut text = manifest.comment();
    text.push_str(body);
    fs::write(dir.join(name), text)
}

/// Writes the report and every CSV into `dir`.
pub fn write_all(dir: &Path, report: &Report) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let m = &report.manifest;
    let mut json = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(dir.join("report.json"), json)?;
    if report.results.is_empty() {
        return Ok(());
    }
    let (name, table) = table_csv(&report.results);
    write_with_manifest(dir, name, m, &table)?;
    for r in &report.results {
        for log in r.trial_logs() {
            let mut buf = Vec::new();
            write_trial_log(&mut buf, &log.detectors, &log.outcomes)?;
            let body = String::from_utf8(buf).map_err(io::Error::other)?;
            write_with_manifest(dir, &trial_file_name(r.tau_ns(), &log.name), m, &body)?;
        }
    }
    if let Some(phi) = &report.curves.phi_vs_tau {
        write_with_manifest(dir, "phi_vs_tau.csv", m, &phi_csv(phi))?;
    }
    if let Some(s) = &report.curves.s_vs_tau {
        write_with_manifest(dir, "s_vs_tau.csv", m, &s_csv(s))?;
    }
    Ok(())
}
