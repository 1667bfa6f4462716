//! CSV and JSON emission.
//!
//! Every data file starts with `#` lines holding the status, the units
//! note, the column schema and the resolved config. Floats are written as
//! `{:.10e}` (eleven significant digits), so identical configs give
//! byte-identical files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use twoslit::observables::wigner_negativity;

use crate::simulate::Outcome;
use crate::CliError;

pub const PATTERN_FILE: &str = "pattern.csv";
pub const WIGNER_FILE: &str = "wigner.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const VISIBILITY_FILE: &str = "visibility.csv";
pub const INCOHERENCE_FILE: &str = "visibility_incoherence.csv";
pub const SCREEN_FILE: &str = "screen.csv";
pub const SUMMARY_FILE: &str = "summary.json";

fn f(x: f64) -> String {
    format!("{x:.10e}")
}

struct DataFile {
    path: PathBuf,
    w: BufWriter<File>,
}

impl DataFile {
    fn create(
        dir: &Path,
        name: &str,
        outcome: &Outcome,
        columns: &[&str],
    ) -> Result<Self, CliError> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
        let mut d = DataFile {
            path,
            w: BufWriter::new(file),
        };
        d.line(&format!("# twoslit {}", env!("CARGO_PKG_VERSION")))?;
        d.line(&format!("# status: {}", status(outcome)))?;
        d.line("# units: hbar=1; x, p, t, mass share one consistent unit system")?;
        d.line(&format!("# columns: {}", columns.join(",")))?;
        for (k, v) in outcome.config.to_pairs() {
            d.line(&format!("# config: {k}={v}"))?;
        }
        d.line(&columns.join(","))?;
        Ok(d)
    }

    fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.w, "{s}").map_err(|e| CliError::Io {
            path: self.path.clone(),
            source: e,
        })
    }

    fn row(&mut self, values: &[f64]) -> Result<(), CliError> {
        let s: Vec<String> = values.iter().map(|&v| f(v)).collect();
        self.line(&s.join(","))
    }

    fn finish(mut self) -> Result<PathBuf, CliError> {
        self.w.flush().map_err(|e| CliError::Io {
            path: self.path.clone(),
            source: e,
        })?;
        Ok(self.path)
    }
}

fn status(outcome: &Outcome) -> String {
    match &outcome.abort {
        None => "complete".into(),
        Some(reason) => format!("partial ({reason})"),
    }
}

/// Finite numbers as JSON numbers, anything else as null.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Writes every product present in `outcome` to `dir` and returns the paths.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let cfg = &outcome.config;
    let mut files = Vec::new();
    let mut summary = json!({
        "preset": cfg.preset.name(),
        "status": if outcome.abort.is_some() { "partial" } else { "complete" },
        "partial": outcome.abort.is_some(),
        "warnings": outcome.warnings,
        "decoherence_time": {
            "value": num(outcome.decoherence_time),
            "convention": cfg.gamma_convention.name(),
            "dx": cfg.td_separation(),
        },
    });
    if let Some(reason) = &outcome.abort {
        summary["abort_reason"] = json!(reason.to_string());
    }

    if let Some(record) = &outcome.record {
        let grid = record.snapshots[0].grid;
        if cfg.observables.contains(&crate::Observable::Pattern) {
            let mut d = DataFile::create(dir, PATTERN_FILE, outcome, &["t", "x", "P"])?;
            let last = record.diagonals.len() - 1;
            for (k, diag) in record.diagonals.iter().enumerate() {
                if k % cfg.snapshot_stride.max(1) != 0 && k != last {
                    continue;
                }
                let t = record.diagnostics[k].time;
                for (x, p) in grid.points().zip(diag) {
                    d.row(&[t, x, *p])?;
                }
            }
            files.push(d.finish()?);
        }

        let mut d = DataFile::create(
            dir,
            DIAGNOSTICS_FILE,
            outcome,
            &[
                "t",
                "trace",
                "hermiticity_defect",
                "projection_residue",
                "boundary_mass",
            ],
        )?;
        for s in &record.diagnostics {
            d.row(&[
                s.time,
                s.trace,
                s.hermiticity_defect,
                s.projection_residue,
                s.boundary_mass,
            ])?;
        }
        files.push(d.finish()?);

        let fin = record
            .diagnostics
            .last()
            .expect("at least the initial state");
        summary["run"] = json!({
            "dt": record.dt,
            "steps": record.diagnostics.len() - 1,
            "final_time": fin.time,
            "final_trace": fin.trace,
            "max_trace_error": record.max_trace_error(),
            "max_hermiticity_defect": record.max_hermiticity_defect(),
        });
    }

    if let Some(w) = &outcome.wigner {
        let mut d = DataFile::create(dir, WIGNER_FILE, outcome, &["p", "x", "W"])?;
        for (j, p) in w.p_grid.points().enumerate() {
            for (i, x) in w.x_grid.points().enumerate() {
                d.row(&[p, x, w.values[[i, j]]])?;
            }
        }
        files.push(d.finish()?);
        let (min, negative_volume) = wigner_negativity(w);
        summary["wigner"] = json!({
            "time": w.time,
            "min": min,
            "max": w.max(),
            "min_over_max": min / w.max(),
            "negative_volume": negative_volume,
            "normalization": w.normalization(),
        });
    }

    if let Some(v) = &outcome.visibility {
        let mut d = DataFile::create(
            dir,
            VISIBILITY_FILE,
            outcome,
            &["t", "nu", "p_full", "p11", "p22"],
        )?;
        for k in 0..v.series.times.len() {
            d.row(&[
                v.series.times[k],
                v.series.nu[k],
                v.full[k],
                v.rho11[k],
                v.rho22[k],
            ])?;
        }
        files.push(d.finish()?);
        let (ip, peak) = v.series.peak().expect("non-empty series");
        let samples: Vec<Value> = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0]
            .into_iter()
            .filter(|&t| t <= cfg.t_final)
            .map(|t| {
                let k = v
                    .series
                    .times
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
                    .map(|(k, _)| k)
                    .expect("non-empty series");
                json!({"t": v.series.times[k], "nu": v.series.nu[k]})
            })
            .collect();
        summary["visibility"] = json!({
            "eval_point": v.series.eval_point,
            "peak_time": v.series.times[ip],
            "peak_value": peak,
            "samples": samples,
        });
    }

    if !outcome.incoherence.is_empty() {
        let mut d = DataFile::create(dir, INCOHERENCE_FILE, outcome, &["c", "t", "nu"])?;
        let mut series = Vec::new();
        for (c, s) in &outcome.incoherence {
            for (t, nu) in s.times.iter().zip(&s.nu) {
                d.row(&[*c, *t, *nu])?;
            }
            series.push(json!({
                "c": c,
                "gamma_c": twoslit::bessel_j0(*c)?,
                "nu_first": s.nu[0],
                "nu_last": s.nu[s.nu.len() - 1],
            }));
        }
        files.push(d.finish()?);
        summary["incoherence"] = json!(series);
    }

    if let Some(s) = &outcome.screen {
        let mut d = DataFile::create(
            dir,
            SCREEN_FILE,
            outcome,
            &["x", "isolated", "decohered", "incoherent"],
        )?;
        for k in 0..s.x.len() {
            d.row(&[s.x[k], s.isolated[k], s.decohered[k], s.incoherent[k]])?;
        }
        files.push(d.finish()?);
        let [iso, dec, inc] = s.contrasts();
        let c = |v: Option<f64>| v.map_or(Value::Null, num);
        summary["screen"] = json!({
            "time": s.time,
            "c": s.c,
            "visibility_isolated": c(iso),
            "visibility_decohered": c(dec),
            "visibility_incoherent": c(inc),
        });
    }

    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    summary["files"] = json!(names);
    let path = dir.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n";
    fs::write(&path, text).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })?;
    files.push(path);
    Ok(files)
}
