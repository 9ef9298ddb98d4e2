use serde::Serialize;

use crate::control::{ControlLoop, LeaderSignals};
use crate::linalg::{norm2, Matrix};
use crate::netgraph::{CommGraph, ContainmentAlgebra};
use crate::plant::DroopParams;

use super::config::ScenarioConfig;
use super::sim::{Sample, TimeSeries};
use super::EngineError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Relative tolerance on `Ė` used by the monitor, as a fraction of `max|Ė|`.
pub const MONITOR_REL_TOL: f64 = 1e-3;
/// Half-width of the voltage containment band check, V.
pub const VOLTAGE_MARGIN: f64 = 1.0;
pub const FREQUENCY_TOL_HZ: f64 = 0.1;
pub const DISPERSION_TOL: f64 = 0.02;

/// `e = x − (ΣΦ)⁻¹ Σ_k Φ_k(1 ⊗ x_k)` with each follower's droop term added
/// to the leader values it perceives.
pub fn containment_error(algebra: &ContainmentAlgebra, x: &[f64], droop: &[f64], leader_values: [f64; 2]) -> Vec<f64> {
    let reference = algebra.containment_reference(leader_values, droop);
    x.iter().zip(reference).map(|(x, r)| x - r).collect()
}

/// Frequency and voltage containment error vectors for every sample.
#[allow(clippy::type_complexity)]
pub fn containment_errors(
    ts: &TimeSeries,
    graph: &CommGraph,
    leaders: &LeaderSignals,
    params: &DroopParams,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), EngineError> {
    let algebra = graph.algebra()?;
    let mut e_f = Vec::with_capacity(ts.samples.len());
    let mut e_v = Vec::with_capacity(ts.samples.len());
    for s in &ts.samples {
        let droop_f: Vec<f64> = s.p.iter().zip(&params.m_p).map(|(p, m)| m * p).collect();
        let droop_v: Vec<f64> = s.q.iter().zip(&params.n_q).map(|(q, m)| m * q).collect();
        e_f.push(containment_error(&algebra, &s.omega_n, &droop_f, leaders.omega_ref));
        e_v.push(containment_error(&algebra, &s.v_n, &droop_v, leaders.v_ref));
    }
    Ok((e_f, e_v))
}

/// `E = ½ ξᵀ (ΣΦ)⁻¹ ξ`.
pub fn lyapunov_energy(xi: &[f64], phi_sum_inverse: &Matrix) -> Result<f64, EngineError> {
    Ok(0.5 * phi_sum_inverse.quadratic_form(xi)?)
}

pub(crate) fn lyapunov_energy_unchecked(xi: &[f64], phi_sum_inverse: &Matrix) -> f64 {
    0.5 * phi_sum_inverse.quadratic_form(xi).expect("sample has graph dimension")
}

fn loop_xi(s: &Sample, which: ControlLoop) -> &[f64] {
    match which {
        ControlLoop::Frequency => &s.xi_f,
        ControlLoop::Voltage => &s.xi_v,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub control_loop: ControlLoop,
    /// `‖ξ‖` above which `Ė ≤ tolerance` is required.
    pub bound: f64,
    pub tolerance: f64,
    /// Central-difference `Ė` per sample (one-sided at the ends).
    pub energy_rate: Vec<f64>,
    /// Times of samples with `‖ξ‖ > bound` and `Ė > tolerance`.
    pub violations: Vec<f64>,
    /// One sample period after the last violation; the first sample time
    /// when there are none.
    pub settling_time: f64,
}

impl MonitorReport {
    pub fn violations_after(&self, t: f64) -> usize {
        self.violations.iter().filter(|v| **v >= t).count()
    }

    /// Fraction of samples with `Ė > 0`.
    pub fn positive_fraction(&self) -> f64 {
        self.energy_rate.iter().filter(|e| **e > 0.0).count() as f64 / self.energy_rate.len() as f64
    }
}

/// Discrete check that the Lyapunov energy decreases whenever `‖ξ‖` is
/// outside its ultimate bound.
///
/// Meaningful only when the sample period is at most ten integration steps.
/// `bound` defaults to the supremum of `‖ξ‖` over the run's tail window.
pub fn lyapunov_monitor(
    ts: &TimeSeries,
    graph: &CommGraph,
    which: ControlLoop,
    bound: Option<f64>,
    boundaries: &[f64],
) -> Result<MonitorReport, EngineError> {
    let len = ts.samples.len();
    if len < 3 {
        return Err(EngineError::TooFewSamples { needed: 3, actual: len });
    }
    if ts.stride > 10 {
        return Err(EngineError::Invalid(format!("sample stride {} exceeds 10 integration steps", ts.stride)));
    }
    let algebra = graph.algebra()?;
    let inv = algebra.phi_sum_inverse();
    let times = ts.times();
    let energy: Vec<f64> = ts.samples.iter().map(|s| lyapunov_energy_unchecked(loop_xi(s, which), inv)).collect();
    let norms: Vec<f64> = ts.samples.iter().map(|s| norm2(loop_xi(s, which))).collect();
    let mut rate = vec![0.0; len];
    rate[0] = (energy[1] - energy[0]) / (times[1] - times[0]);
    rate[len - 1] = (energy[len - 1] - energy[len - 2]) / (times[len - 1] - times[len - 2]);
    for k in 1..len - 1 {
        rate[k] = (energy[k + 1] - energy[k - 1]) / (times[k + 1] - times[k - 1]);
    }
    let max_rate = rate.iter().fold(0.0f64, |m, r| if r.is_finite() { m.max(r.abs()) } else { m });
    let tolerance = MONITOR_REL_TOL * max_rate;
    let bound = match bound {
        Some(b) => b,
        None => {
            let (a, b) = tail_window(times[0], times[len - 1], boundaries);
            sup_over(&times, &norms, a, b).unwrap_or(0.0)
        }
    };
    let violations: Vec<f64> =
        (0..len).filter(|&k| norms[k] > bound && !(rate[k] <= tolerance)).map(|k| times[k]).collect();
    let settling_time = violations.last().map_or(times[0], |t| t + ts.sample_period());
    Ok(MonitorReport { control_loop: which, bound, tolerance, energy_rate: rate, violations, settling_time })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiTildeReport {
    /// `max |φ_f − φ̂_f|` over the final quarter of samples, per inverter.
    pub psi_f: Vec<f64>,
    pub psi_v: Vec<f64>,
    /// `φ − φ̂ ≥ 0` at every sample on both loops.
    pub nonnegative: bool,
}

/// Empirical ultimate bound of the adaptive mismatch `φ̃ = φ − φ̂`.
pub fn phi_tilde_bound(ts: &TimeSeries) -> PhiTildeReport {
    let n = ts.n;
    let len = ts.samples.len();
    let start = (len as f64 * 0.75).floor() as usize;
    let start = start.min(len.saturating_sub(1));
    let mut psi_f = vec![0.0f64; n];
    let mut psi_v = vec![0.0f64; n];
    let mut nonnegative = true;
    for (k, s) in ts.samples.iter().enumerate() {
        for i in 0..n {
            let tf = s.phi_f[i] - s.phi_hat_f[i];
            let tv = s.phi_v[i] - s.phi_hat_v[i];
            if !(tf >= 0.0 && tv >= 0.0) {
                nonnegative = false;
            }
            if k >= start {
                psi_f[i] = psi_f[i].max(tf.abs());
                psi_v[i] = psi_v[i].max(tv.abs());
            }
        }
    }
    PhiTildeReport { psi_f, psi_v, nonnegative }
}

/// `[max(t0 + ¾(t_last − t0), last boundary before t_last), t_last]`.
pub fn tail_window(t0: f64, t_last: f64, boundaries: &[f64]) -> (f64, f64) {
    let quarter = t0 + 0.75 * (t_last - t0);
    let phase = boundaries.iter().copied().filter(|b| *b < t_last && *b > t0).fold(f64::NEG_INFINITY, f64::max);
    (quarter.max(phase), t_last)
}

/// Supremum of `values` over samples with `a ≤ t ≤ b`.
pub fn sup_over(times: &[f64], values: &[f64], a: f64, b: f64) -> Option<f64> {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= a && **t <= b)
        .map(|(_, v)| *v)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| if v > m || v.is_nan() { v } else { m })))
}

/// `max_i |m_Pi P_i − mean| / |mean|` at one sample.
pub fn sharing_dispersion(s: &Sample, params: &DroopParams) -> f64 {
    let scaled: Vec<f64> = s.p.iter().zip(&params.m_p).map(|(p, m)| m * p).collect();
    let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
    scaled.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / mean.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseTail {
    pub start: f64,
    pub end: f64,
    pub tail_start: f64,
    pub sup_e_f: Option<f64>,
    pub sup_e_v: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flags {
    pub completed: bool,
    pub energy_nonnegative: bool,
    pub lyapunov_settles_before_tail_f: bool,
    pub lyapunov_settles_before_tail_v: bool,
    pub phi_tilde_nonnegative: bool,
    pub envelope_holds: bool,
    pub frequency_regulated: bool,
    pub voltage_contained: bool,
    pub power_sharing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub schema_version: u32,
    pub controller: String,
    pub status: String,
    pub diverged_at: Option<f64>,
    pub dt: f64,
    pub sample_period: f64,
    pub tail_window: [f64; 2],
    pub tail_sup_e_f: Option<f64>,
    pub tail_sup_e_v: Option<f64>,
    pub tail_sup_xi_f: Option<f64>,
    pub tail_sup_xi_v: Option<f64>,
    pub tail_max_frequency_deviation_hz: Option<f64>,
    pub tail_min_v_od: Option<f64>,
    pub tail_max_v_od: Option<f64>,
    pub tail_max_dispersion: Option<f64>,
    pub phase_tails: Vec<PhaseTail>,
    pub times: Vec<f64>,
    pub e_f_norm: Vec<f64>,
    pub e_v_norm: Vec<f64>,
    pub energy_f: Vec<f64>,
    pub energy_v: Vec<f64>,
    /// `None` when the run stored fewer than three samples.
    pub monitor_f: Option<MonitorReport>,
    pub monitor_v: Option<MonitorReport>,
    pub phi_tilde: PhiTildeReport,
    pub flags: Flags,
}

/// Optional overrides for the monitor bounds (e.g. to judge one run against
/// another run's measured ultimate bound).
#[derive(Debug, Clone, Copy, Default)]
pub struct DiagnosticsOptions {
    pub monitor_bound_f: Option<f64>,
    pub monitor_bound_v: Option<f64>,
}

fn phases(t0: f64, t_last: f64, boundaries: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts = vec![t0];
    cuts.extend(boundaries.iter().copied().filter(|b| *b > t0 && *b < t_last));
    cuts.push(t_last);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Full set of run diagnostics, computed from the time series alone.
pub fn diagnose(ts: &TimeSeries, cfg: &ScenarioConfig, opts: DiagnosticsOptions) -> Result<DiagnosticsReport, EngineError> {
    let times = ts.times();
    let t0 = times[0];
    let t_last = *times.last().expect("non-empty");
    let boundaries = cfg.attack.boundaries();
    let (a, b) = tail_window(t0, t_last, &boundaries);

    let (e_f, e_v) = containment_errors(ts, &cfg.graph, &cfg.leaders.signals(), &cfg.droop)?;
    let e_f_norm: Vec<f64> = e_f.iter().map(|e| norm2(e)).collect();
    let e_v_norm: Vec<f64> = e_v.iter().map(|e| norm2(e)).collect();
    let algebra = cfg.graph.algebra()?;
    let inv = algebra.phi_sum_inverse();
    let energy_f: Vec<f64> = ts.samples.iter().map(|s| lyapunov_energy_unchecked(&s.xi_f, inv)).collect();
    let energy_v: Vec<f64> = ts.samples.iter().map(|s| lyapunov_energy_unchecked(&s.xi_v, inv)).collect();
    let xi_f_norm: Vec<f64> = ts.samples.iter().map(|s| norm2(&s.xi_f)).collect();
    let xi_v_norm: Vec<f64> = ts.samples.iter().map(|s| norm2(&s.xi_v)).collect();

    let f_dev: Vec<f64> = ts
        .samples
        .iter()
        .map(|s| {
            s.omega
                .iter()
                .map(|w| (w / (2.0 * std::f64::consts::PI) - cfg.leaders.f_ref_hz).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let v_min: Vec<f64> = ts.samples.iter().map(|s| s.v_od.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    let v_max: Vec<f64> = ts.samples.iter().map(|s| s.v_od.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
    let dispersion: Vec<f64> = ts.samples.iter().map(|s| sharing_dispersion(s, &cfg.droop)).collect();
    let neg_v_min: Vec<f64> = v_min.iter().map(|v| -v).collect();

    let monitor = |which, bound| match lyapunov_monitor(ts, &cfg.graph, which, bound, &boundaries) {
        Ok(m) => Ok(Some(m)),
        Err(EngineError::TooFewSamples { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let monitor_f = monitor(ControlLoop::Frequency, opts.monitor_bound_f)?;
    let monitor_v = monitor(ControlLoop::Voltage, opts.monitor_bound_v)?;
    let settles = |m: &Option<MonitorReport>| m.as_ref().is_some_and(|m| m.settling_time <= a);
    let phi_tilde = phi_tilde_bound(ts);

    let phase_tails = phases(t0, t_last, &boundaries)
        .into_iter()
        .map(|(s, e)| {
            let ts_ = s + 0.75 * (e - s);
            PhaseTail {
                start: s,
                end: e,
                tail_start: ts_,
                sup_e_f: sup_over(&times, &e_f_norm, ts_, e),
                sup_e_v: sup_over(&times, &e_v_norm, ts_, e),
            }
        })
        .collect();

    let tail_f_dev = sup_over(&times, &f_dev, a, b);
    let tail_v_min = sup_over(&times, &neg_v_min, a, b).map(|v| -v);
    let tail_v_max = sup_over(&times, &v_max, a, b);
    let tail_disp = sup_over(&times, &dispersion, a, b);
    let completed = ts.status.diverged_at().is_none();
    let flags = Flags {
        completed,
        energy_nonnegative: energy_f.iter().chain(&energy_v).all(|e| *e >= 0.0),
        lyapunov_settles_before_tail_f: completed && settles(&monitor_f),
        lyapunov_settles_before_tail_v: completed && settles(&monitor_v),
        phi_tilde_nonnegative: phi_tilde.nonnegative,
        envelope_holds: cfg.envelope_holds(),
        frequency_regulated: completed && tail_f_dev.is_some_and(|d| d <= FREQUENCY_TOL_HZ),
        voltage_contained: completed
            && tail_v_min.is_some_and(|v| v >= cfg.leaders.v_lower - VOLTAGE_MARGIN)
            && tail_v_max.is_some_and(|v| v <= cfg.leaders.v_upper + VOLTAGE_MARGIN),
        power_sharing: completed && tail_disp.is_some_and(|d| d <= DISPERSION_TOL),
    };

    Ok(DiagnosticsReport {
        schema_version: REPORT_SCHEMA_VERSION,
        controller: ts.controller.to_string(),
        status: ts.status.label().to_string(),
        diverged_at: ts.status.diverged_at(),
        dt: ts.dt,
        sample_period: ts.sample_period(),
        tail_window: [a, b],
        tail_sup_e_f: sup_over(&times, &e_f_norm, a, b),
        tail_sup_e_v: sup_over(&times, &e_v_norm, a, b),
        tail_sup_xi_f: sup_over(&times, &xi_f_norm, a, b),
        tail_sup_xi_v: sup_over(&times, &xi_v_norm, a, b),
        tail_max_frequency_deviation_hz: tail_f_dev,
        tail_min_v_od: tail_v_min,
        tail_max_v_od: tail_v_max,
        tail_max_dispersion: tail_disp,
        phase_tails,
        times,
        e_f_norm,
        e_v_norm,
        energy_f,
        energy_v,
        monitor_f,
        monitor_v,
        phi_tilde,
        flags,
    })
}
