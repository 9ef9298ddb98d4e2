//! Run artifacts: `timeseries.csv`, `report.json` and `config-echo.toml`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::engine::{DiagnosticsReport, ScenarioConfig, TimeSeries};

use super::scenario::echo_toml;
use super::ShellError;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const REPORT_FILE: &str = "report.json";
pub const ECHO_FILE: &str = "config-echo.toml";

/// Per-inverter column stems, in file order.
pub const INVERTER_COLUMNS: [&str; 16] = [
    "omega_hz", "v_od", "P", "Q", "omega_n", "V_n", "xi_f", "xi_v", "phi_f", "phitilde_f", "Gamma_f", "mu_f", "phi_v",
    "phitilde_v", "Gamma_v", "mu_v",
];

pub const TRAILING_COLUMNS: [&str; 4] = ["e_f_norm", "e_v_norm", "E_f", "E_v"];

/// Header: `t`, then the 16 per-inverter columns for inverter 1, 2, ...,
/// then the four global columns.
pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for i in 1..=n {
        h.extend(INVERTER_COLUMNS.iter().map(|c| format!("{c}_{i}")));
    }
    h.extend(TRAILING_COLUMNS.iter().map(|c| c.to_string()));
    h
}

/// Numeric rows in the same order as [`csv_header`]. `omega_hz` is in Hz,
/// `omega_n` stays in rad/s.
pub fn csv_rows(ts: &TimeSeries) -> Vec<Vec<f64>> {
    let two_pi = 2.0 * std::f64::consts::PI;
    ts.samples
        .iter()
        .map(|s| {
            let mut row = Vec::with_capacity(1 + 16 * ts.n + 4);
            row.push(s.t);
            for i in 0..ts.n {
                row.extend_from_slice(&[
                    s.omega[i] / two_pi,
                    s.v_od[i],
                    s.p[i],
                    s.q[i],
                    s.omega_n[i],
                    s.v_n[i],
                    s.xi_f[i],
                    s.xi_v[i],
                    s.phi_f[i],
                    s.phi_f[i] - s.phi_hat_f[i],
                    s.gamma_f[i],
                    s.mu_f[i],
                    s.phi_v[i],
                    s.phi_v[i] - s.phi_hat_v[i],
                    s.gamma_v[i],
                    s.mu_v[i],
                ]);
            }
            row.extend_from_slice(&[s.e_f_norm, s.e_v_norm, s.energy_f, s.energy_v]);
            row
        })
        .collect()
}

pub fn write_timeseries(ts: &TimeSeries, path: &Path) -> Result<(), ShellError> {
    let file = File::create(path).map_err(|e| ShellError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| ShellError::io(path, e);
    writeln!(w, "{}", csv_header(ts.n).join(",")).map_err(io)?;
    let mut line = String::new();
    for row in csv_rows(ts) {
        line.clear();
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Parsed CSV: header names and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_timeseries(path: &Path) -> Result<CsvTable, ShellError> {
    let file = File::open(path).map_err(|e| ShellError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header: Vec<String> = match lines.next() {
        Some(l) => l.map_err(|e| ShellError::io(path, e))?.split(',').map(str::to_string).collect(),
        None => return Err(ShellError::Csv(format!("{}: empty file", path.display()))),
    };
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(|e| ShellError::io(path, e))?;
        let row: Vec<f64> = line
            .split(',')
            .map(|x| x.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| ShellError::Csv(format!("{}: line {}: {e}", path.display(), k + 2)))?;
        if row.len() != header.len() {
            return Err(ShellError::Csv(format!(
                "{}: line {} has {} fields, header has {}",
                path.display(),
                k + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), ShellError> {
    let file = File::create(path).map_err(|e| ShellError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| ShellError::Csv(format!("{}: {e}", path.display())))?;
    writeln!(w).map_err(|e| ShellError::io(path, e))?;
    w.flush().map_err(|e| ShellError::io(path, e))
}

pub fn write_report(report: &DiagnosticsReport, path: &Path) -> Result<(), ShellError> {
    write_json(report, path)
}

/// Writes the three artifacts of one run into `dir`, creating it if needed.
pub fn write_run(dir: &Path, cfg: &ScenarioConfig, ts: &TimeSeries, report: &DiagnosticsReport) -> Result<Vec<PathBuf>, ShellError> {
    std::fs::create_dir_all(dir).map_err(|e| ShellError::io(dir, e))?;
    let csv = dir.join(TIMESERIES_FILE);
    let json = dir.join(REPORT_FILE);
    let echo = dir.join(ECHO_FILE);
    write_timeseries(ts, &csv)?;
    write_report(report, &json)?;
    std::fs::write(&echo, echo_toml(cfg)?).map_err(|e| ShellError::io(&echo, e))?;
    Ok(vec![csv, json, echo])
}
