//! Scenario files: TOML schema, resolution to a validated config, and the
//! resolved echo written next to every run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attack::{AttackProfile, AttackSegment, CustomExpr, SegmentKind};
use crate::control::{ControlLoop, ControllerKind, EtaForm, GainSet, LoopGains};
use crate::engine::{
    EnvelopeSpec, InitialState, LeaderRefs, ScenarioConfig, DEFAULT_BLOWUP, DEFAULT_DT, DEFAULT_SAMPLE_MS,
};
use crate::linalg::Matrix;
use crate::netgraph::CommGraph;
use crate::plant::{DroopParams, LoadSpec};

use super::ShellError;

/// A scalar applied to every inverter, or one value per inverter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerInverter {
    Scalar(f64),
    List(Vec<f64>),
}

impl PerInverter {
    fn resolve(&self, n: usize, key: &str) -> Result<Vec<f64>, ShellError> {
        match self {
            PerInverter::Scalar(v) => Ok(vec![*v; n]),
            PerInverter::List(v) if v.len() == n => Ok(v.clone()),
            PerInverter::List(v) => Err(ShellError::Schema(format!("{key}: expected {n} entries, got {}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub adjacency: Vec<Vec<f64>>,
    pub pinning_upper: Vec<f64>,
    pub pinning_lower: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroopSection {
    pub m_p_rad_per_s_per_w: PerInverter,
    pub n_q_v_per_var: PerInverter,
    pub b_w_per_rad: PerInverter,
    pub q_var_per_v: PerInverter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSection {
    pub p_w: f64,
    pub q_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub c_f: PerInverter,
    pub c_v: PerInverter,
    pub beta_f: PerInverter,
    pub beta_v: PerInverter,
    pub upsilon_f: Option<PerInverter>,
    pub upsilon_v: Option<PerInverter>,
    pub kappa_f: Option<PerInverter>,
    pub kappa_v: Option<PerInverter>,
    pub alpha_f: Option<PerInverter>,
    pub alpha_v: Option<PerInverter>,
    pub eta_form: Option<EtaForm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadersSection {
    pub f_ref_hz: f64,
    pub v_upper_v: f64,
    pub v_lower_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt_s: Option<f64>,
    pub t_end_s: f64,
    pub sample_ms: Option<f64>,
    pub controller: Option<ControllerKind>,
    pub blowup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentEntry {
    /// 1-based inverter index.
    pub inverter: usize,
    pub t_start_s: f64,
    /// Open-ended when absent.
    pub t_end_s: Option<f64>,
    pub kind: String,
    pub value: Option<f64>,
    pub scale: Option<f64>,
    pub rate: Option<f64>,
    pub offset: Option<f64>,
    pub expr: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSection {
    #[serde(default)]
    pub frequency: Vec<SegmentEntry>,
    #[serde(default)]
    pub voltage: Vec<SegmentEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSection {
    pub gamma: Option<f64>,
    pub rho: Option<f64>,
    pub samples: Option<usize>,
    pub horizon_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub delta_rad: Option<PerInverter>,
    pub f_n_hz: Option<PerInverter>,
    pub v_n_v: Option<PerInverter>,
    pub phi_f: Option<PerInverter>,
    pub phi_hat_f: Option<PerInverter>,
    pub phi_v: Option<PerInverter>,
    pub phi_hat_v: Option<PerInverter>,
}

/// On-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub graph: GraphSection,
    pub droop: DroopSection,
    pub load: LoadSection,
    pub gains: GainsSection,
    pub leaders: LeadersSection,
    pub sim: SimSection,
    #[serde(default)]
    pub attack: AttackSection,
    pub envelope: Option<EnvelopeSection>,
    pub initial: Option<InitialSection>,
}

/// Reads, resolves and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<ScenarioConfig, ShellError> {
    let text = std::fs::read_to_string(path).map_err(|e| ShellError::io(path, e))?;
    parse_scenario_str(&text).map_err(|e| match e {
        ShellError::Parse { message, .. } => ShellError::Parse { path: path.display().to_string(), message },
        other => other,
    })
}

pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig, ShellError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| ShellError::Parse { path: "<input>".into(), message: e.to_string() })?;
    resolve(&file)
}

fn opt(v: &Option<PerInverter>, default: f64, n: usize, key: &str) -> Result<Vec<f64>, ShellError> {
    match v {
        Some(v) => v.resolve(n, key),
        None => Ok(vec![default; n]),
    }
}

/// Applies defaults and turns the document into a validated config.
pub fn resolve(file: &ScenarioFile) -> Result<ScenarioConfig, ShellError> {
    let g = &file.graph;
    let adjacency = Matrix::from_rows(&g.adjacency).map_err(|e| ShellError::Schema(format!("graph.adjacency: {e}")))?;
    let graph = CommGraph::new(adjacency, [g.pinning_upper.clone(), g.pinning_lower.clone()])
        .map_err(|e| ShellError::Physics(format!("graph: {e}")))?;
    let n = graph.n_followers();

    let d = &file.droop;
    let droop = DroopParams::new(
        d.m_p_rad_per_s_per_w.resolve(n, "droop.m_p_rad_per_s_per_w")?,
        d.n_q_v_per_var.resolve(n, "droop.n_q_v_per_var")?,
        d.b_w_per_rad.resolve(n, "droop.b_w_per_rad")?,
        d.q_var_per_v.resolve(n, "droop.q_var_per_v")?,
    )
    .map_err(|e| ShellError::Physics(format!("droop: {e}")))?;

    let k = &file.gains;
    let gains = GainSet {
        frequency: LoopGains {
            c: k.c_f.resolve(n, "gains.c_f")?,
            beta: k.beta_f.resolve(n, "gains.beta_f")?,
            upsilon: opt(&k.upsilon_f, 1.0, n, "gains.upsilon_f")?,
            kappa: opt(&k.kappa_f, 1.0, n, "gains.kappa_f")?,
            alpha: opt(&k.alpha_f, 0.01, n, "gains.alpha_f")?,
        },
        voltage: LoopGains {
            c: k.c_v.resolve(n, "gains.c_v")?,
            beta: k.beta_v.resolve(n, "gains.beta_v")?,
            upsilon: opt(&k.upsilon_v, 1.0, n, "gains.upsilon_v")?,
            kappa: opt(&k.kappa_v, 1.0, n, "gains.kappa_v")?,
            alpha: opt(&k.alpha_v, 0.01, n, "gains.alpha_v")?,
        },
        eta_form: k.eta_form.unwrap_or_default(),
    };
    gains.validate(n).map_err(|e| ShellError::Physics(format!("gains: {e}")))?;

    let leaders = LeaderRefs {
        f_ref_hz: file.leaders.f_ref_hz,
        v_upper: file.leaders.v_upper_v,
        v_lower: file.leaders.v_lower_v,
    };

    let mut attack = AttackProfile::zero(n);
    for (which, entries, key) in [
        (ControlLoop::Frequency, &file.attack.frequency, "attack.frequency"),
        (ControlLoop::Voltage, &file.attack.voltage, "attack.voltage"),
    ] {
        let mut sorted: Vec<(usize, &SegmentEntry)> = entries.iter().enumerate().collect();
        sorted.sort_by(|a, b| a.1.inverter.cmp(&b.1.inverter).then(a.1.t_start_s.total_cmp(&b.1.t_start_s)));
        for (idx, e) in sorted {
            let where_ = format!("{key}[{idx}]");
            if e.inverter == 0 || e.inverter > n {
                return Err(ShellError::Schema(format!("{where_}.inverter: {} is outside 1..={n}", e.inverter)));
            }
            let kind = segment_kind(e).map_err(|m| ShellError::Schema(format!("{where_}: {m}")))?;
            let seg = AttackSegment::new(e.t_start_s, e.t_end_s.unwrap_or(f64::INFINITY), kind)
                .map_err(|err| ShellError::Schema(format!("{where_}: {err}")))?;
            attack.push(e.inverter - 1, which, seg).map_err(|err| ShellError::Schema(format!("{where_}: {err}")))?;
        }
    }

    let env_default = EnvelopeSpec::default();
    let envelope = match &file.envelope {
        None => env_default,
        Some(e) => EnvelopeSpec {
            gamma: e.gamma.unwrap_or(env_default.gamma),
            rho: e.rho.unwrap_or(env_default.rho),
            samples: e.samples.unwrap_or(env_default.samples),
            horizon: e.horizon_s,
        },
    };

    let s = &file.sim;
    let base = InitialState::default_for(n, &leaders);
    let initial = match &file.initial {
        None => base,
        Some(i) => InitialState {
            delta: opt(&i.delta_rad, base.delta[0], n, "initial.delta_rad")?,
            f_n_hz: opt(&i.f_n_hz, base.f_n_hz[0], n, "initial.f_n_hz")?,
            v_n: opt(&i.v_n_v, base.v_n[0], n, "initial.v_n_v")?,
            phi_f: opt(&i.phi_f, base.phi_f[0], n, "initial.phi_f")?,
            phi_hat_f: opt(&i.phi_hat_f, base.phi_hat_f[0], n, "initial.phi_hat_f")?,
            phi_v: opt(&i.phi_v, base.phi_v[0], n, "initial.phi_v")?,
            phi_hat_v: opt(&i.phi_hat_v, base.phi_hat_v[0], n, "initial.phi_hat_v")?,
        },
    };

    let cfg = ScenarioConfig {
        graph,
        droop,
        load: LoadSpec { p: file.load.p_w, q: file.load.q_var },
        gains,
        leaders,
        attack,
        envelope,
        controller: s.controller.unwrap_or_default(),
        dt: s.dt_s.unwrap_or(DEFAULT_DT),
        t_end: s.t_end_s,
        sample_ms: s.sample_ms.unwrap_or(DEFAULT_SAMPLE_MS),
        blowup: s.blowup.unwrap_or(DEFAULT_BLOWUP),
        initial,
    };
    cfg.validate().map_err(|e| ShellError::Physics(e.to_string()))?;
    Ok(cfg)
}

fn segment_kind(e: &SegmentEntry) -> Result<SegmentKind, String> {
    let given = [
        ("value", e.value.is_some()),
        ("scale", e.scale.is_some()),
        ("rate", e.rate.is_some()),
        ("offset", e.offset.is_some()),
        ("expr", e.expr.is_some()),
    ];
    let (kind, allowed): (SegmentKind, &[&str]) = match e.kind.as_str() {
        "none" => (SegmentKind::None, &[]),
        "constant" => (SegmentKind::Constant { value: e.value.ok_or("constant segment needs `value`")? }, &["value"]),
        "cubic" => (
            SegmentKind::Cubic { scale: e.scale.ok_or("cubic segment needs `scale`")?, offset: e.offset.unwrap_or(0.0) },
            &["scale", "offset"],
        ),
        "exponential" => (
            SegmentKind::Exponential {
                rate: e.rate.ok_or("exponential segment needs `rate`")?,
                offset: e.offset.unwrap_or(0.0),
            },
            &["rate", "offset"],
        ),
        "expr" => {
            let src = e.expr.as_deref().ok_or("expr segment needs `expr`")?;
            (SegmentKind::Expr(CustomExpr::parse(src).map_err(|err| err.to_string())?), &["expr"])
        }
        other => return Err(format!("unknown kind `{other}` (expected none, constant, cubic, exponential or expr)")),
    };
    if let Some((name, _)) = given.iter().find(|(name, set)| *set && !allowed.contains(name)) {
        return Err(format!("`{name}` is not a parameter of a {} segment", e.kind));
    }
    Ok(kind)
}

fn list(v: &[f64]) -> PerInverter {
    PerInverter::List(v.to_vec())
}

/// Fully resolved document: every default written out explicitly.
pub fn echo(cfg: &ScenarioConfig) -> ScenarioFile {
    let n = cfg.n();
    let graph = &cfg.graph;
    let mut attack = AttackSection::default();
    for which in ControlLoop::BOTH {
        for i in 0..n {
            for seg in cfg.attack.segments(i, which).expect("index in range") {
                let mut e = SegmentEntry {
                    inverter: i + 1,
                    t_start_s: seg.t_start,
                    t_end_s: seg.t_end.is_finite().then_some(seg.t_end),
                    kind: seg.kind.name().to_string(),
                    value: None,
                    scale: None,
                    rate: None,
                    offset: None,
                    expr: None,
                };
                match &seg.kind {
                    SegmentKind::None => {}
                    SegmentKind::Constant { value } => e.value = Some(*value),
                    SegmentKind::Cubic { scale, offset } => {
                        e.scale = Some(*scale);
                        e.offset = Some(*offset);
                    }
                    SegmentKind::Exponential { rate, offset } => {
                        e.rate = Some(*rate);
                        e.offset = Some(*offset);
                    }
                    SegmentKind::Expr(x) => e.expr = Some(x.source().to_string()),
                }
                match which {
                    ControlLoop::Frequency => attack.frequency.push(e),
                    ControlLoop::Voltage => attack.voltage.push(e),
                }
            }
        }
    }
    let gf = &cfg.gains.frequency;
    let gv = &cfg.gains.voltage;
    let init = &cfg.initial;
    ScenarioFile {
        graph: GraphSection {
            adjacency: graph.adjacency().to_rows(),
            pinning_upper: graph.pinning(crate::netgraph::Leader::Upper).to_vec(),
            pinning_lower: graph.pinning(crate::netgraph::Leader::Lower).to_vec(),
        },
        droop: DroopSection {
            m_p_rad_per_s_per_w: list(&cfg.droop.m_p),
            n_q_v_per_var: list(&cfg.droop.n_q),
            b_w_per_rad: list(&cfg.droop.b),
            q_var_per_v: list(&cfg.droop.q),
        },
        load: LoadSection { p_w: cfg.load.p, q_var: cfg.load.q },
        gains: GainsSection {
            c_f: list(&gf.c),
            c_v: list(&gv.c),
            beta_f: list(&gf.beta),
            beta_v: list(&gv.beta),
            upsilon_f: Some(list(&gf.upsilon)),
            upsilon_v: Some(list(&gv.upsilon)),
            kappa_f: Some(list(&gf.kappa)),
            kappa_v: Some(list(&gv.kappa)),
            alpha_f: Some(list(&gf.alpha)),
            alpha_v: Some(list(&gv.alpha)),
            eta_form: Some(cfg.gains.eta_form),
        },
        leaders: LeadersSection {
            f_ref_hz: cfg.leaders.f_ref_hz,
            v_upper_v: cfg.leaders.v_upper,
            v_lower_v: cfg.leaders.v_lower,
        },
        sim: SimSection {
            dt_s: Some(cfg.dt),
            t_end_s: cfg.t_end,
            sample_ms: Some(cfg.sample_ms),
            controller: Some(cfg.controller),
            blowup: Some(cfg.blowup),
        },
        attack,
        envelope: Some(EnvelopeSection {
            gamma: Some(cfg.envelope.gamma),
            rho: Some(cfg.envelope.rho),
            samples: Some(cfg.envelope.samples),
            horizon_s: cfg.envelope.horizon,
        }),
        initial: Some(InitialSection {
            delta_rad: Some(list(&init.delta)),
            f_n_hz: Some(list(&init.f_n_hz)),
            v_n_v: Some(list(&init.v_n)),
            phi_f: Some(list(&init.phi_f)),
            phi_hat_f: Some(list(&init.phi_hat_f)),
            phi_v: Some(list(&init.phi_v)),
            phi_hat_v: Some(list(&init.phi_hat_v)),
        }),
    }
}

/// TOML text of [`echo`].
pub fn echo_toml(cfg: &ScenarioConfig) -> Result<String, ShellError> {
    toml::to_string(&echo(cfg)).map_err(|e| ShellError::Schema(format!("cannot serialize config: {e}")))
}
