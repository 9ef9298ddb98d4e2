use serde::Serialize;

use crate::control::ControlLoop;
use crate::linalg::norm2;

use super::config::ScenarioConfig;
use super::diagnostics::{containment_errors, sup_over, tail_window};
use super::sim::run;
use super::EngineError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub status: String,
    pub diverged_at: Option<f64>,
    pub tail_sup_e_f: Option<f64>,
    pub tail_sup_e_v: Option<f64>,
}

/// Runs the scenario once per adaptation gain (applied to every inverter of
/// the chosen loop) and reports tail containment errors.
///
/// Runs execute in parallel; rows come back in the order of `betas`, which
/// must be strictly ascending. Diverged runs stay in the table.
pub fn sweep_beta(cfg: &ScenarioConfig, which: ControlLoop, betas: &[f64]) -> Result<Vec<SweepRow>, EngineError> {
    if betas.is_empty() {
        return Err(EngineError::Invalid("sweep needs at least one beta value".into()));
    }
    if betas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(EngineError::Invalid("beta values must be strictly ascending".into()));
    }
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
        return Err(EngineError::Invalid(format!("beta must be positive, got {b}")));
    }
    cfg.validate()?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(betas.len());
    let mut rows: Vec<Option<Result<SweepRow, EngineError>>> = vec![None; betas.len()];
    std::thread::scope(|scope| {
        for (w, chunk) in rows.chunks_mut(betas.len().div_ceil(workers)).enumerate() {
            let offset = w * betas.len().div_ceil(workers);
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(sweep_one(cfg, which, betas[offset + k]));
                }
            });
        }
    });
    rows.into_iter().map(|r| r.expect("every slot filled")).collect()
}

fn sweep_one(cfg: &ScenarioConfig, which: ControlLoop, beta: f64) -> Result<SweepRow, EngineError> {
    let mut cfg = cfg.clone();
    cfg.gains.loop_gains_mut(which).beta.iter_mut().for_each(|b| *b = beta);
    let ts = run(&cfg)?;
    let (e_f, e_v) = containment_errors(&ts, &cfg.graph, &cfg.leaders.signals(), &cfg.droop)?;
    let times = ts.times();
    let (a, b) = tail_window(times[0], *times.last().expect("non-empty"), &cfg.attack.boundaries());
    let nf: Vec<f64> = e_f.iter().map(|e| norm2(e)).collect();
    let nv: Vec<f64> = e_v.iter().map(|e| norm2(e)).collect();
    Ok(SweepRow {
        beta,
        status: ts.status.label().to_string(),
        diverged_at: ts.status.diverged_at(),
        tail_sup_e_f: sup_over(&times, &nf, a, b),
        tail_sup_e_v: sup_over(&times, &nv, a, b),
    })
}
