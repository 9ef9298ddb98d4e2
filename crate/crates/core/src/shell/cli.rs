//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::attack::check_envelope;
use crate::control::{ControlLoop, ControllerKind};
use crate::engine::{diagnose, run, sweep_beta, DiagnosticsOptions, DiagnosticsReport, ScenarioConfig, SweepRow};

use super::output::{write_json, write_run};
use super::scenario::parse_scenario;
use super::ShellError;

#[derive(Debug, Parser)]
#[command(name = "mgsim", version, about = "Microgrid secondary-control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write timeseries.csv, report.json and config-echo.toml.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        controller: Option<ControllerKind>,
        /// Integration step in seconds.
        #[arg(long)]
        dt: Option<f64>,
        /// Final time in seconds.
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Run once per frequency adaptation gain and tabulate tail containment errors.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated, ascending.
        #[arg(long = "beta-f", value_delimiter = ',', required = true)]
        beta_f: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check graph, envelope, Lyapunov monitor, φ̃ bound and β monotonicity.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run both controllers on the same scenario.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `argv` (including the program name) and executes the command.
///
/// Returns 0 on success, 1 when a run or check fails, 2 on usage errors.
pub fn cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(parsed.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, ShellError> {
    parse_scenario(path)
}

fn run_and_diagnose(cfg: &ScenarioConfig, opts: DiagnosticsOptions) -> Result<(crate::engine::TimeSeries, DiagnosticsReport), ShellError> {
    let ts = run(cfg)?;
    let report = diagnose(&ts, cfg, opts)?;
    Ok((ts, report))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6e}"))
}

#[derive(Serialize)]
struct CompareSide {
    controller: String,
    status: String,
    diverged_at: Option<f64>,
    tail_sup_e_f: Option<f64>,
    tail_sup_e_v: Option<f64>,
    tail_max_frequency_deviation_hz: Option<f64>,
    tail_max_dispersion: Option<f64>,
    monitor_f_violations: Option<usize>,
}

impl From<&DiagnosticsReport> for CompareSide {
    fn from(r: &DiagnosticsReport) -> Self {
        Self {
            controller: r.controller.clone(),
            status: r.status.clone(),
            diverged_at: r.diverged_at,
            tail_sup_e_f: r.tail_sup_e_f,
            tail_sup_e_v: r.tail_sup_e_v,
            tail_max_frequency_deviation_hz: r.tail_max_frequency_deviation_hz,
            tail_max_dispersion: r.tail_max_dispersion,
            monitor_f_violations: r.monitor_f.as_ref().map(|m| m.violations.len()),
        }
    }
}

#[derive(Serialize)]
struct CompareReport {
    schema_version: u32,
    conventional: CompareSide,
    resilient: CompareSide,
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<bool, ShellError> {
    match cmd {
        Command::Run { scenario, out: dir, controller, dt, t_end } => {
            let mut cfg = load(&scenario)?;
            if let Some(c) = controller {
                cfg.controller = c;
            }
            if let Some(dt) = dt {
                cfg.dt = dt;
            }
            if let Some(t) = t_end {
                cfg.t_end = t;
            }
            let (ts, report) = run_and_diagnose(&cfg, DiagnosticsOptions::default())?;
            write_run(&dir, &cfg, &ts, &report)?;
            let _ = writeln!(
                out,
                "{} run {}{} ({} samples) -> {}",
                report.controller,
                report.status,
                report.diverged_at.map_or(String::new(), |t| format!(" at t = {t:.4} s")),
                ts.samples.len(),
                dir.display()
            );
            Ok(true)
        }
        Command::Sweep { scenario, beta_f, out: dir } => {
            let cfg = load(&scenario)?;
            let rows = sweep_beta(&cfg, ControlLoop::Frequency, &beta_f)?;
            std::fs::create_dir_all(&dir).map_err(|e| ShellError::io(&dir, e))?;
            write_sweep_csv(&rows, &dir.join("sweep.csv"))?;
            write_json(&rows, &dir.join("sweep.json"))?;
            let _ = writeln!(out, "beta_f,status,tail_sup_e_f,tail_sup_e_v");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{}", r.beta, r.status, fmt_opt(r.tail_sup_e_f), fmt_opt(r.tail_sup_e_v));
            }
            Ok(true)
        }
        Command::Verify { scenario } => verify(&load(&scenario)?, out),
        Command::Compare { scenario, out: dir } => {
            let cfg = load(&scenario)?;
            let mut res_cfg = cfg.clone();
            res_cfg.controller = ControllerKind::Resilient;
            let mut conv_cfg = cfg;
            conv_cfg.controller = ControllerKind::Conventional;
            let (res_ts, res_report) = run_and_diagnose(&res_cfg, DiagnosticsOptions::default())?;
            let opts = DiagnosticsOptions {
                monitor_bound_f: res_report.monitor_f.as_ref().map(|m| m.bound),
                monitor_bound_v: res_report.monitor_v.as_ref().map(|m| m.bound),
            };
            let (conv_ts, conv_report) = run_and_diagnose(&conv_cfg, opts)?;
            write_run(&dir.join("resilient"), &res_cfg, &res_ts, &res_report)?;
            write_run(&dir.join("conventional"), &conv_cfg, &conv_ts, &conv_report)?;
            let cmp = CompareReport {
                schema_version: crate::engine::REPORT_SCHEMA_VERSION,
                conventional: (&conv_report).into(),
                resilient: (&res_report).into(),
            };
            write_json(&cmp, &dir.join("compare.json"))?;
            let _ = writeln!(out, "{:<14}{:<12}{:>14}{:>16}{:>16}", "controller", "status", "diverged_at", "tail |e_f|", "tail |e_v|");
            for side in [&cmp.conventional, &cmp.resilient] {
                let _ = writeln!(
                    out,
                    "{:<14}{:<12}{:>14}{:>16}{:>16}",
                    side.controller,
                    side.status,
                    side.diverged_at.map_or("-".into(), |t| format!("{t:.4}")),
                    fmt_opt(side.tail_sup_e_f),
                    fmt_opt(side.tail_sup_e_v)
                );
            }
            Ok(true)
        }
    }
}

fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<(), ShellError> {
    let mut text = String::from("beta,status,diverged_at,tail_sup_e_f,tail_sup_e_v\n");
    let cell = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));
    for r in rows {
        text.push_str(&format!(
            "{:.16e},{},{},{},{}\n",
            r.beta,
            r.status,
            cell(r.diverged_at),
            cell(r.tail_sup_e_f),
            cell(r.tail_sup_e_v)
        ));
    }
    std::fs::write(path, text).map_err(|e| ShellError::io(path, e))
}

fn verify(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<bool, ShellError> {
    let mut all = true;
    let mut check = |name: &str, ok: bool, detail: String| {
        all &= ok;
        let _ = writeln!(out, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    };

    let unreachable = cfg.graph.unreachable_followers();
    check("reachability", unreachable.is_empty(), format!("unreachable followers {unreachable:?}"));

    let algebra = cfg.graph.algebra().map_err(crate::engine::EngineError::from)?;
    let pos = algebra.positivity();
    check(
        "containment matrix positivity",
        pos.holds(),
        format!(
            "symmetric = {}, min Re(eig) = {:.6e}, min sym eig = {}",
            pos.symmetric,
            pos.min_real_eigenvalue,
            fmt_opt(pos.min_symmetric_eigenvalue)
        ),
    );

    let env = check_envelope(&cfg.attack, cfg.envelope.gamma, cfg.envelope.rho, cfg.envelope_horizon(), cfg.envelope.samples)
        .unwrap_or(false);
    check(
        "attack envelope",
        env,
        format!(
            "|mu| <= {} exp({} t) on {} samples over {} s",
            cfg.envelope.gamma,
            cfg.envelope.rho,
            cfg.envelope.samples,
            cfg.envelope_horizon()
        ),
    );

    let (_, report) = run_and_diagnose(cfg, DiagnosticsOptions::default())?;
    check("run completes", report.flags.completed, format!("status {}", report.status));
    let a = report.tail_window[0];
    for (suffix, m) in [("f", &report.monitor_f), ("v", &report.monitor_v)] {
        let (ok, detail) = match m {
            Some(m) => (
                report.flags.completed && m.settling_time <= a,
                format!("{} violations, settling time {:.4} s, tail starts {a:.4} s", m.violations.len(), m.settling_time),
            ),
            None => (false, "too few samples".to_string()),
        };
        check(&format!("lyapunov monitor ({suffix})"), ok, detail);
    }
    check(
        "phi tilde nonnegative",
        report.phi_tilde.nonnegative,
        format!("psi_f = {:?}, psi_v = {:?}", report.phi_tilde.psi_f, report.phi_tilde.psi_v),
    );

    if cfg.controller == ControllerKind::Resilient {
        let beta = cfg.gains.frequency.beta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let grid = [beta / 4.0, beta, 2.0 * beta];
        let rows = sweep_beta(cfg, ControlLoop::Frequency, &grid)?;
        let sups: Vec<Option<f64>> = rows.iter().map(|r| r.tail_sup_e_f).collect();
        let monotone = rows.iter().all(|r| r.diverged_at.is_none())
            && sups.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b <= a + 1e-9));
        let detail: Vec<String> = rows.iter().map(|r| format!("{} -> {}", r.beta, fmt_opt(r.tail_sup_e_f))).collect();
        check("beta monotonicity", monotone, detail.join(", "));
    }
    Ok(all)
}
