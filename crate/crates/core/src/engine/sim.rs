use crate::attack::{inject, AttackProfile};
use crate::control::{
    adaptive_derivatives, conventional_input, eta, local_protocol, resilient_input_unchecked, ControlLoop,
    ControllerKind, LeaderSignals,
};
use crate::netgraph::{ContainmentAlgebra, Leader};
use crate::plant::{active_power_into, reactive_power_into};

use super::config::ScenarioConfig;
use super::diagnostics::{containment_error, lyapunov_energy_unchecked};
use super::EngineError;

/// Offsets of the state blocks inside the flat state vector.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub n: usize,
}

impl Layout {
    pub const BLOCKS: usize = 7;

    pub fn len(&self) -> usize {
        Self::BLOCKS * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn delta(&self) -> std::ops::Range<usize> {
        0..self.n
    }
    pub fn omega_n(&self) -> std::ops::Range<usize> {
        self.n..2 * self.n
    }
    pub fn v_n(&self) -> std::ops::Range<usize> {
        2 * self.n..3 * self.n
    }
    pub fn phi_f(&self) -> std::ops::Range<usize> {
        3 * self.n..4 * self.n
    }
    pub fn phi_hat_f(&self) -> std::ops::Range<usize> {
        4 * self.n..5 * self.n
    }
    pub fn phi_v(&self) -> std::ops::Range<usize> {
        5 * self.n..6 * self.n
    }
    pub fn phi_hat_v(&self) -> std::ops::Range<usize> {
        6 * self.n..7 * self.n
    }
}

/// Flat initial state `(δ, ω_n, V_n, φ_f, φ̂_f, φ_v, φ̂_v)`.
pub fn initial_state(cfg: &ScenarioConfig) -> Vec<f64> {
    let init = &cfg.initial;
    let omega: Vec<f64> = init.f_n_hz.iter().map(|f| 2.0 * std::f64::consts::PI * f).collect();
    [&init.delta, &omega, &init.v_n, &init.phi_f, &init.phi_hat_f, &init.phi_v, &init.phi_hat_v]
        .into_iter()
        .flat_map(|v| v.iter().copied())
        .collect()
}

/// One stored sample: full state plus the algebraic and control outputs
/// evaluated at that state.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub delta: Vec<f64>,
    /// rad/s
    pub omega_n: Vec<f64>,
    pub v_n: Vec<f64>,
    pub phi_f: Vec<f64>,
    pub phi_hat_f: Vec<f64>,
    pub phi_v: Vec<f64>,
    pub phi_hat_v: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// rad/s
    pub omega: Vec<f64>,
    pub v_od: Vec<f64>,
    pub xi_f: Vec<f64>,
    pub xi_v: Vec<f64>,
    pub gamma_f: Vec<f64>,
    pub gamma_v: Vec<f64>,
    pub mu_f: Vec<f64>,
    pub mu_v: Vec<f64>,
    pub e_f_norm: f64,
    pub e_v_norm: f64,
    pub energy_f: f64,
    pub energy_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    Diverged { t: f64 },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Diverged { .. } => "diverged",
        }
    }

    pub fn diverged_at(&self) -> Option<f64> {
        match self {
            RunStatus::Completed => None,
            RunStatus::Diverged { t } => Some(*t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub n: usize,
    pub dt: f64,
    pub stride: usize,
    pub controller: ControllerKind,
    pub samples: Vec<Sample>,
    pub status: RunStatus,
}

impl TimeSeries {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn sample_period(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("time series always holds the initial sample")
    }
}

/// Closed-loop right-hand side with preallocated scratch space.
pub(crate) struct System<'a> {
    cfg: &'a ScenarioConfig,
    layout: Layout,
    leaders: LeaderSignals,
    omega0: f64,
    p: Vec<f64>,
    q: Vec<f64>,
    v_od: Vec<f64>,
}

/// Per-inverter outputs captured while evaluating the right-hand side.
#[derive(Debug, Clone, Default)]
pub(crate) struct Outputs {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub omega: Vec<f64>,
    pub v_od: Vec<f64>,
    pub xi_f: Vec<f64>,
    pub xi_v: Vec<f64>,
    pub gamma_f: Vec<f64>,
    pub gamma_v: Vec<f64>,
    pub mu_f: Vec<f64>,
    pub mu_v: Vec<f64>,
}

impl Outputs {
    fn new(n: usize) -> Self {
        let z = vec![0.0; n];
        Self {
            p: z.clone(),
            q: z.clone(),
            omega: z.clone(),
            v_od: z.clone(),
            xi_f: z.clone(),
            xi_v: z.clone(),
            gamma_f: z.clone(),
            gamma_v: z.clone(),
            mu_f: z.clone(),
            mu_v: z,
        }
    }
}

impl<'a> System<'a> {
    pub(crate) fn new(cfg: &'a ScenarioConfig) -> Self {
        let n = cfg.n();
        Self {
            cfg,
            layout: Layout { n },
            leaders: cfg.leaders.signals(),
            omega0: cfg.leaders.omega_ref(),
            p: vec![0.0; n],
            q: vec![0.0; n],
            v_od: vec![0.0; n],
        }
    }

    pub(crate) fn layout(&self) -> Layout {
        self.layout
    }

    /// Fills `out` with the state derivative; when `record` is given, also
    /// stores the intermediate signals.
    pub(crate) fn eval(&mut self, t: f64, s: &[f64], out: &mut [f64], mut record: Option<&mut Outputs>) -> Result<(), EngineError> {
        let cfg = self.cfg;
        let l = self.layout;
        let n = l.n;
        let delta = &s[l.delta()];
        let omega_n = &s[l.omega_n()];
        let v_n = &s[l.v_n()];

        active_power_into(delta, &cfg.droop.b, cfg.load.p, &mut self.p)?;
        reactive_power_into(v_n, &cfg.droop, cfg.load.q, &mut self.q, &mut self.v_od)?;

        let graph = &cfg.graph;
        let upper = graph.pinning(Leader::Upper);
        let lower = graph.pinning(Leader::Lower);
        let resilient = cfg.controller == ControllerKind::Resilient;
        let gf = &cfg.gains.frequency;
        let gv = &cfg.gains.voltage;

        for i in 0..n {
            let pins = [upper[i], lower[i]];
            let neigh = graph.in_neighbors(i);
            let droop_f = cfg.droop.m_p[i] * self.p[i];
            let droop_v = cfg.droop.n_q[i] * self.q[i];
            let xi_f = local_protocol(
                omega_n[i],
                droop_f,
                neigh.iter().map(|&(j, a)| (a, omega_n[j])),
                pins,
                self.leaders.omega_ref,
                gf.c[i],
            );
            let xi_v =
                local_protocol(v_n[i], droop_v, neigh.iter().map(|&(j, a)| (a, v_n[j])), pins, self.leaders.v_ref, gv.c[i]);

            let (u_f, u_v, gamma_f, gamma_v) = if resilient {
                let phi_f = s[l.phi_f().start + i];
                let phi_v = s[l.phi_v().start + i];
                let (u_f, g_f) = resilient_input_unchecked(xi_f, phi_f, eta(t, gf.alpha[i], cfg.gains.eta_form));
                let (u_v, g_v) = resilient_input_unchecked(xi_v, phi_v, eta(t, gv.alpha[i], cfg.gains.eta_form));
                (u_f, u_v, g_f, g_v)
            } else {
                (conventional_input(xi_f), conventional_input(xi_v), 0.0, 0.0)
            };

            let mu_f = attack_value(&cfg.attack, i, ControlLoop::Frequency, t);
            let mu_v = attack_value(&cfg.attack, i, ControlLoop::Voltage, t);
            let omega_i = omega_n[i] - droop_f;

            out[l.delta().start + i] = omega_i - self.omega0;
            out[l.omega_n().start + i] = inject(u_f, mu_f);
            out[l.v_n().start + i] = inject(u_v, mu_v);

            if resilient {
                let (dphi_f, dhat_f) =
                    adaptive_derivatives(xi_f, s[l.phi_f().start + i], s[l.phi_hat_f().start + i], gf.adaptive(i));
                let (dphi_v, dhat_v) =
                    adaptive_derivatives(xi_v, s[l.phi_v().start + i], s[l.phi_hat_v().start + i], gv.adaptive(i));
                out[l.phi_f().start + i] = dphi_f;
                out[l.phi_hat_f().start + i] = dhat_f;
                out[l.phi_v().start + i] = dphi_v;
                out[l.phi_hat_v().start + i] = dhat_v;
            } else {
                out[l.phi_f().start + i] = 0.0;
                out[l.phi_hat_f().start + i] = 0.0;
                out[l.phi_v().start + i] = 0.0;
                out[l.phi_hat_v().start + i] = 0.0;
            }

            if let Some(rec) = record.as_deref_mut() {
                rec.p[i] = self.p[i];
                rec.q[i] = self.q[i];
                rec.omega[i] = omega_i;
                rec.v_od[i] = self.v_od[i];
                rec.xi_f[i] = xi_f;
                rec.xi_v[i] = xi_v;
                rec.gamma_f[i] = gamma_f;
                rec.gamma_v[i] = gamma_v;
                rec.mu_f[i] = mu_f;
                rec.mu_v[i] = mu_v;
            }
        }
        Ok(())
    }
}

#[inline]
fn attack_value(profile: &AttackProfile, i: usize, which: ControlLoop, t: f64) -> f64 {
    profile.evaluate_unchecked(i, which, t)
}

/// Classical fourth-order Runge-Kutta with reusable stage buffers.
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        Self { k1: vec![0.0; len], k2: vec![0.0; len], k3: vec![0.0; len], k4: vec![0.0; len], tmp: vec![0.0; len] }
    }

    /// Advances `y` in place from `t` to `t + dt` for `ẏ = f(t, y)`.
    pub fn step<E, F>(&mut self, mut f: F, y: &mut [f64], t: f64, dt: f64) -> Result<(), E>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
    {
        let half = 0.5 * dt;
        f(t, y, &mut self.k1)?;
        for ((x, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *x = y + half * k;
        }
        f(t + half, &self.tmp, &mut self.k2)?;
        for ((x, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *x = y + half * k;
        }
        f(t + half, &self.tmp, &mut self.k3)?;
        for ((x, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *x = y + dt * k;
        }
        f(t + dt, &self.tmp, &mut self.k4)?;
        let sixth = dt / 6.0;
        for (i, x) in y.iter_mut().enumerate() {
            *x += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

/// One classical fourth-order step of the closed loop.
pub fn step(state: &[f64], t: f64, dt: f64, cfg: &ScenarioConfig) -> Result<Vec<f64>, EngineError> {
    let mut sys = System::new(cfg);
    let len = sys.layout().len();
    if state.len() != len {
        return Err(EngineError::Invalid(format!("state has {} entries, expected {len}", state.len())));
    }
    if let Some(i) = state.iter().position(|x| !x.is_finite()) {
        return Err(EngineError::NonFiniteState { index: i, t });
    }
    let mut s = state.to_vec();
    Rk4::new(len).step(|t, y, out| sys.eval(t, y, out, None), &mut s, t, dt)?;
    Ok(s)
}

fn exceeds(s: &[f64], threshold: f64) -> bool {
    s.iter().any(|x| !(x.abs() <= threshold))
}

struct Sampler<'a> {
    layout: Layout,
    algebra: ContainmentAlgebra,
    cfg: &'a ScenarioConfig,
    outputs: Outputs,
    scratch: Vec<f64>,
}

impl Sampler<'_> {
    fn take(&mut self, sys: &mut System<'_>, t: f64, s: &[f64]) -> Result<Sample, EngineError> {
        sys.eval(t, s, &mut self.scratch, Some(&mut self.outputs))?;
        let l = self.layout;
        let o = &self.outputs;
        let leaders = self.cfg.leaders.signals();
        let droop_f: Vec<f64> = o.p.iter().zip(&self.cfg.droop.m_p).map(|(p, m)| m * p).collect();
        let droop_v: Vec<f64> = o.q.iter().zip(&self.cfg.droop.n_q).map(|(q, m)| m * q).collect();
        let e_f = containment_error(&self.algebra, &s[l.omega_n()], &droop_f, leaders.omega_ref);
        let e_v = containment_error(&self.algebra, &s[l.v_n()], &droop_v, leaders.v_ref);
        let inv = self.algebra.phi_sum_inverse();
        Ok(Sample {
            t,
            delta: s[l.delta()].to_vec(),
            omega_n: s[l.omega_n()].to_vec(),
            v_n: s[l.v_n()].to_vec(),
            phi_f: s[l.phi_f()].to_vec(),
            phi_hat_f: s[l.phi_hat_f()].to_vec(),
            phi_v: s[l.phi_v()].to_vec(),
            phi_hat_v: s[l.phi_hat_v()].to_vec(),
            p: o.p.clone(),
            q: o.q.clone(),
            omega: o.omega.clone(),
            v_od: o.v_od.clone(),
            xi_f: o.xi_f.clone(),
            xi_v: o.xi_v.clone(),
            gamma_f: o.gamma_f.clone(),
            gamma_v: o.gamma_v.clone(),
            mu_f: o.mu_f.clone(),
            mu_v: o.mu_v.clone(),
            e_f_norm: crate::linalg::norm2(&e_f),
            e_v_norm: crate::linalg::norm2(&e_v),
            energy_f: lyapunov_energy_unchecked(&o.xi_f, inv),
            energy_v: lyapunov_energy_unchecked(&o.xi_v, inv),
        })
    }
}

/// Integrates the scenario from `t = 0` to `t_end`.
///
/// A state entry whose magnitude exceeds the blow-up threshold (or becomes
/// non-finite) ends the run with [`RunStatus::Diverged`]; samples up to the
/// last accepted state are kept.
pub fn run(cfg: &ScenarioConfig) -> Result<TimeSeries, EngineError> {
    cfg.validate()?;
    let mut sys = System::new(cfg);
    let layout = sys.layout();
    let mut sampler = Sampler {
        layout,
        algebra: cfg.graph.algebra()?,
        cfg,
        outputs: Outputs::new(layout.n),
        scratch: vec![0.0; layout.len()],
    };
    let mut s = initial_state(cfg);
    let n_steps = cfg.n_steps();
    let stride = cfg.stride();
    let dt = cfg.dt;
    let mut rk = Rk4::new(layout.len());
    let mut samples = Vec::with_capacity(n_steps / stride + 1);
    samples.push(sampler.take(&mut sys, 0.0, &s)?);
    let mut status = RunStatus::Completed;
    for k in 0..n_steps {
        let t = k as f64 * dt;
        rk.step(|t, y, out| sys.eval(t, y, out, None), &mut s, t, dt)?;
        let t_next = (k + 1) as f64 * dt;
        if exceeds(&s, cfg.blowup) {
            status = RunStatus::Diverged { t: t_next };
            break;
        }
        if (k + 1) % stride == 0 {
            samples.push(sampler.take(&mut sys, t_next, &s)?);
        }
    }
    Ok(TimeSeries { n: layout.n, dt, stride, controller: cfg.controller, samples, status })
}
