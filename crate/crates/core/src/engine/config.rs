use std::f64::consts::PI;

use crate::attack::{check_envelope, AttackProfile};
use crate::control::{ControllerKind, GainSet, LeaderSignals};
use crate::netgraph::CommGraph;
use crate::plant::{DroopParams, LoadSpec};

use super::EngineError;

pub const DEFAULT_DT: f64 = 5e-5;
pub const DEFAULT_SAMPLE_MS: f64 = 0.5;
pub const DEFAULT_BLOWUP: f64 = 1e7;

/// Leader references in engineering units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderRefs {
    pub f_ref_hz: f64,
    pub v_upper: f64,
    pub v_lower: f64,
}

impl LeaderRefs {
    pub fn omega_ref(&self) -> f64 {
        2.0 * PI * self.f_ref_hz
    }

    pub fn signals(&self) -> LeaderSignals {
        let w = self.omega_ref();
        LeaderSignals { omega_ref: [w, w], v_ref: [self.v_upper, self.v_lower] }
    }
}

/// Exponential bound `|μ(t)| ≤ γ e^{ρ t}` claimed for the attack profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSpec {
    pub gamma: f64,
    pub rho: f64,
    pub samples: usize,
    /// Defaults to the run length when absent.
    pub horizon: Option<f64>,
}

impl Default for EnvelopeSpec {
    fn default() -> Self {
        Self { gamma: 5.0, rho: 0.5, samples: 10_000, horizon: None }
    }
}

/// Initial condition, one entry per inverter.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub delta: Vec<f64>,
    /// Frequency setpoints in Hz.
    pub f_n_hz: Vec<f64>,
    pub v_n: Vec<f64>,
    pub phi_f: Vec<f64>,
    pub phi_hat_f: Vec<f64>,
    pub phi_v: Vec<f64>,
    pub phi_hat_v: Vec<f64>,
}

impl InitialState {
    /// Zero angles, setpoints at the frequency reference and the voltage
    /// midpoint, `φ = 0.1`, `φ̂ = 0`.
    pub fn default_for(n: usize, leaders: &LeaderRefs) -> Self {
        Self {
            delta: vec![0.0; n],
            f_n_hz: vec![leaders.f_ref_hz; n],
            v_n: vec![0.5 * (leaders.v_upper + leaders.v_lower); n],
            phi_f: vec![0.1; n],
            phi_hat_f: vec![0.0; n],
            phi_v: vec![0.1; n],
            phi_hat_v: vec![0.0; n],
        }
    }

    pub(crate) fn fields(&self) -> [(&'static str, &Vec<f64>); 7] {
        [
            ("delta", &self.delta),
            ("f_n_hz", &self.f_n_hz),
            ("v_n", &self.v_n),
            ("phi_f", &self.phi_f),
            ("phi_hat_f", &self.phi_hat_f),
            ("phi_v", &self.phi_v),
            ("phi_hat_v", &self.phi_hat_v),
        ]
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub graph: CommGraph,
    pub droop: DroopParams,
    pub load: LoadSpec,
    pub gains: GainSet,
    pub leaders: LeaderRefs,
    pub attack: AttackProfile,
    pub envelope: EnvelopeSpec,
    pub controller: ControllerKind,
    pub dt: f64,
    pub t_end: f64,
    pub sample_ms: f64,
    pub blowup: f64,
    pub initial: InitialState,
}

impl ScenarioConfig {
    pub fn n(&self) -> usize {
        self.graph.n_followers()
    }

    /// Integration steps between stored samples.
    pub fn stride(&self) -> usize {
        let raw = (self.sample_ms * 1e-3 / self.dt).round();
        let raw = if raw.is_finite() && raw >= 1.0 { raw as usize } else { 1 };
        raw.min(self.n_steps().max(1))
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }

    pub fn envelope_horizon(&self) -> f64 {
        self.envelope.horizon.unwrap_or(self.t_end)
    }

    /// Structural and physical checks performed before any stepping.
    pub fn validate(&self) -> Result<(), EngineError> {
        let n = self.n();
        let bad = |what: &str, detail: String| Err(EngineError::Invalid(format!("{what}: {detail}")));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt_s", format!("must be positive, got {}", self.dt));
        }
        if !(self.t_end > self.dt && self.t_end.is_finite()) {
            return bad("t_end_s", format!("must exceed dt ({}), got {}", self.dt, self.t_end));
        }
        if !(self.sample_ms > 0.0 && self.sample_ms.is_finite()) {
            return bad("sample_ms", format!("must be positive, got {}", self.sample_ms));
        }
        if !(self.blowup > 0.0) {
            return bad("blowup", format!("must be positive, got {}", self.blowup));
        }
        if self.droop.len() != n {
            return bad("droop", format!("has {} inverters, graph has {n}", self.droop.len()));
        }
        if self.attack.n_inverters() != n {
            return bad("attack", format!("covers {} inverters, graph has {n}", self.attack.n_inverters()));
        }
        self.gains.validate(n).map_err(|e| EngineError::Invalid(format!("gains: {e}")))?;
        if !(self.leaders.f_ref_hz > 0.0 && self.leaders.f_ref_hz.is_finite()) {
            return bad("f_ref_hz", format!("must be positive, got {}", self.leaders.f_ref_hz));
        }
        if !(self.leaders.v_upper >= self.leaders.v_lower && self.leaders.v_lower.is_finite() && self.leaders.v_upper.is_finite()) {
            return bad(
                "leaders",
                format!("upper voltage {} must be at least lower voltage {}", self.leaders.v_upper, self.leaders.v_lower),
            );
        }
        if !(self.load.p.is_finite() && self.load.q.is_finite()) {
            return bad("load", "must be finite".into());
        }
        if !(self.envelope.gamma > 0.0 && self.envelope.rho > 0.0 && self.envelope.samples >= 2) {
            return bad("envelope", "gamma and rho must be positive, samples at least 2".into());
        }
        if let Some(h) = self.envelope.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return bad("envelope.horizon_s", format!("must be positive, got {h}"));
            }
        }
        for (name, v) in self.initial.fields() {
            if v.len() != n {
                return bad("initial", format!("{name} has {} entries, expected {n}", v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return bad("initial", format!("{name} must be finite"));
            }
        }
        if !self.graph.check_reachability() {
            return Err(EngineError::Graph(crate::netgraph::GraphError::Unreachable(self.graph.unreachable_followers())));
        }
        self.graph.algebra()?;
        Ok(())
    }

    /// Sampled envelope verdict for the configured `(γ, ρ)`.
    pub fn envelope_holds(&self) -> bool {
        check_envelope(&self.attack, self.envelope.gamma, self.envelope.rho, self.envelope_horizon(), self.envelope.samples)
            .unwrap_or(false)
    }
}
