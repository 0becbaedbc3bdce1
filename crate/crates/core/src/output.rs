//! Result files: time-series CSV, JSON run manifest and log-log fit files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{emit_config, ExperimentSpec};
use crate::error::{Result, ZrError};
use crate::fit::{linear_fit, FitResult};
use crate::record::{RecordRow, RunRecord, Verdict};

/// Every float is written with 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn s_label(s: f64) -> String {
    format!("{s}")
}

pub fn csv_header(record: &RunRecord) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=4).map(|i| format!("Q{i}")));
    cols.extend(record.s_list.iter().map(|&s| format!("HsB_{}", s_label(s))));
    cols.push("Hpsi1".into());
    cols.push("Hpsi2".into());
    cols.join(",")
}

pub fn record_to_csv(record: &RunRecord) -> String {
    let mut out = csv_header(record);
    out.push('\n');
    for r in &record.rows {
        let mut vals = vec![num(r.t)];
        vals.extend(r.q.iter().map(|&v| num(v)));
        vals.extend(r.hs_b.iter().map(|&v| num(v)));
        vals.push(num(r.h_psi1));
        vals.push(num(r.h_psi2));
        out.push_str(&vals.join(","));
        out.push('\n');
    }
    out
}

/// Parses the CSV written by [`record_to_csv`] back into `(s_list, rows)`.
pub fn parse_csv(text: &str) -> Result<(Vec<f64>, Vec<RecordRow>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| ZrError::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    let bad_header = || ZrError::Parse {
        line: 1,
        message: format!("unexpected header `{header}`"),
    };
    if cols.len() < 7 || cols[..5] != ["t", "Q1", "Q2", "Q3", "Q4"] || cols[cols.len() - 2..] != ["Hpsi1", "Hpsi2"] {
        return Err(bad_header());
    }
    let s_list = cols[5..cols.len() - 2]
        .iter()
        .map(|c| c.strip_prefix("HsB_").and_then(|s| s.parse::<f64>().ok()).ok_or_else(bad_header))
        .collect::<Result<Vec<f64>>>()?;
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| ZrError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        if v.len() != cols.len() {
            return Err(ZrError::Parse {
                line: i + 1,
                message: format!("expected {} fields, found {}", cols.len(), v.len()),
            });
        }
        let ns = s_list.len();
        rows.push(RecordRow {
            t: v[0],
            q: [v[1], v[2], v[3], v[4]],
            hs_b: v[5..5 + ns].to_vec(),
            h_psi1: v[5 + ns],
            h_psi2: v[6 + ns],
        });
    }
    Ok((s_list, rows))
}

/// Gnuplot-ready fit table with a footer comment holding the fitted line.
pub fn fit_to_text(fit: &FitResult) -> String {
    let mut o = String::from("logN,lognorm,fit\n");
    for &(x, y) in &fit.points {
        let _ = writeln!(o, "{},{},{}", num(x), num(y), num(fit.predict(x)));
    }
    let _ = writeln!(
        o,
        "# slope={} intercept={} r2={}",
        num(fit.slope),
        num(fit.intercept),
        num(fit.r_squared)
    );
    o
}

/// Reads a fit file and recomputes the regression from its points.
pub fn parse_fit_text(text: &str) -> Result<(FitResult, FitResult)> {
    let mut points = Vec::new();
    let mut footer = None;
    for (i, line) in text.lines().enumerate().skip(1) {
        let perr = |m: String| ZrError::Parse { line: i + 1, message: m };
        if let Some(rest) = line.strip_prefix('#') {
            let mut f = [f64::NAN; 3];
            for part in rest.split_whitespace() {
                let (k, v) = part.split_once('=').ok_or_else(|| perr(format!("bad footer field `{part}`")))?;
                let v: f64 = v.parse().map_err(|e: std::num::ParseFloatError| perr(e.to_string()))?;
                match k {
                    "slope" => f[0] = v,
                    "intercept" => f[1] = v,
                    "r2" => f[2] = v,
                    _ => return Err(perr(format!("unknown footer key `{k}`"))),
                }
            }
            footer = Some(f);
        } else if !line.trim().is_empty() {
            let v: Vec<f64> = line
                .split(',')
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(e.to_string()))?;
            if v.len() != 3 {
                return Err(perr("expected 3 columns".into()));
            }
            points.push((v[0], v[1]));
        }
    }
    let f = footer.ok_or_else(|| ZrError::Parse {
        line: text.lines().count(),
        message: "missing footer".into(),
    })?;
    let stored = FitResult {
        slope: f[0],
        intercept: f[1],
        r_squared: f[2],
        points: points.clone(),
    };
    Ok((stored, linear_fit(&points)?))
}

fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Fully resolved configuration; feeding it back reproduces the run.
    pub config: String,
    pub spec: ExperimentSpec,
    pub grid_digest: String,
    pub stepper_digest: String,
    pub wall_clock_seconds: f64,
    pub started_unix: u64,
    pub threads: usize,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub scalars: std::collections::BTreeMap<String, f64>,
    pub fits: std::collections::BTreeMap<String, FitSummary>,
    pub notes: Vec<String>,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl RunManifest {
    pub fn new(spec: &ExperimentSpec, record: &RunRecord, wall_clock_seconds: f64, started_unix: u64) -> Self {
        let config = emit_config(spec);
        let section = |name: &str| {
            config
                .split("\n[")
                .find(|s| s.trim_start_matches('[').starts_with(name))
                .unwrap_or("")
                .to_string()
        };
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            grid_digest: digest(&section("grid]")),
            stepper_digest: digest(&section("stepper]")),
            config,
            spec: spec.clone(),
            wall_clock_seconds,
            started_unix,
            threads: crate::experiments::thread_pool().current_num_threads(),
            verdict: record.verdict.clone(),
            exit_code: record.verdict.exit_code(),
            scalars: record.scalars.clone(),
            fits: record
                .fits
                .iter()
                .map(|(k, f)| {
                    (
                        k.clone(),
                        FitSummary {
                            slope: f.slope,
                            intercept: f.intercept,
                            r_squared: f.r_squared,
                            points: f.points.len(),
                        },
                    )
                })
                .collect(),
            notes: record.notes.clone(),
            files: Vec::new(),
        }
    }
}

/// Paths written by [`emit_record`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmittedFiles {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub fits: Vec<PathBuf>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| ZrError::io(path, e))
}

/// Writes `<prefix>.csv`, `<prefix>_fit_<name>.dat` (when enabled) and `<prefix>.json`
/// into the output directory of `spec`.
pub fn emit_record(
    spec: &ExperimentSpec,
    record: &RunRecord,
    wall_clock_seconds: f64,
    started_unix: u64,
) -> Result<EmittedFiles> {
    let dir = Path::new(&spec.output.dir);
    std::fs::create_dir_all(dir).map_err(|e| ZrError::io(dir, e))?;
    let prefix = &spec.output.prefix;
    let mut files = EmittedFiles {
        csv: dir.join(format!("{prefix}.csv")),
        manifest: dir.join(format!("{prefix}.json")),
        fits: Vec::new(),
    };
    write(&files.csv, &record_to_csv(record))?;
    if spec.output.fit_file {
        for (name, fit) in &record.fits {
            let p = dir.join(format!("{prefix}_fit_{name}.dat"));
            write(&p, &fit_to_text(fit))?;
            files.fits.push(p);
        }
    }
    let mut manifest = RunManifest::new(spec, record, wall_clock_seconds, started_unix);
    manifest.files = std::iter::once(&files.csv)
        .chain(&files.fits)
        .map(|p| p.display().to_string())
        .collect();
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| ZrError::Config(format!("manifest serialization: {e}")))?;
    write(&files.manifest, &json)?;
    Ok(files)
}
