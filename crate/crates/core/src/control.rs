//! Secondary-control laws: the cooperative consensus term ξ, the conventional
//! input, and the adaptive attack-resilient input with its compensator states.
//!
//! Every controller is evaluated from one inverter's point of view: its own
//! setpoint and droop term, the setpoints of the neighbours it listens to, and
//! the leaders it is pinned to.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netgraph::{CommGraph, ContainmentAlgebra, Leader};
use crate::plant::DroopParams;

/// Lower clamp for the decaying gate so `|ξ| + η` never reaches zero.
pub const ETA_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("inverter index {index} out of range for {n} inverters")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("gate value must be positive, got {0}")]
    NonPositiveEta(f64),
    #[error("{what}[{index}] = {value} must be strictly positive")]
    NonPositiveGain { what: String, index: usize, value: f64 },
    #[error("length mismatch: {what} has {actual} entries, expected {expected}")]
    LengthMismatch { what: String, expected: usize, actual: usize },
    #[error("upper voltage reference {upper} is below lower reference {lower}")]
    InvertedReferences { upper: f64, lower: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlLoop {
    Frequency,
    Voltage,
}

impl ControlLoop {
    pub const BOTH: [ControlLoop; 2] = [ControlLoop::Frequency, ControlLoop::Voltage];

    pub fn suffix(self) -> &'static str {
        match self {
            ControlLoop::Frequency => "f",
            ControlLoop::Voltage => "v",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Conventional,
    #[default]
    Resilient,
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "conventional" => Ok(ControllerKind::Conventional),
            "resilient" => Ok(ControllerKind::Resilient),
            other => Err(format!("unknown controller `{other}` (expected conventional or resilient)")),
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ControllerKind::Conventional => "conventional",
            ControllerKind::Resilient => "resilient",
        })
    }
}

/// Shape of the decaying gate η(t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EtaForm {
    /// `exp(−α t²)`
    #[default]
    Gaussian,
    /// `exp(−α t)`
    Exponential,
}

/// Gains of one control loop, one entry per inverter.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopGains {
    /// Consensus coupling gain c, 1/s.
    pub c: Vec<f64>,
    /// Adaptation gain β.
    pub beta: Vec<f64>,
    /// Leak gain υ in `λ = υ(φ − φ̂)`.
    pub upsilon: Vec<f64>,
    /// Estimator gain κ.
    pub kappa: Vec<f64>,
    /// Gate decay rate α.
    pub alpha: Vec<f64>,
}

impl LoopGains {
    pub fn uniform(n: usize, c: f64, beta: f64, upsilon: f64, kappa: f64, alpha: f64) -> Self {
        Self {
            c: vec![c; n],
            beta: vec![beta; n],
            upsilon: vec![upsilon; n],
            kappa: vec![kappa; n],
            alpha: vec![alpha; n],
        }
    }

    pub fn adaptive(&self, i: usize) -> AdaptiveGains {
        AdaptiveGains { beta: self.beta[i], upsilon: self.upsilon[i], kappa: self.kappa[i] }
    }

    fn validate(&self, n: usize, suffix: &str) -> Result<(), ControlError> {
        for (name, v) in [
            ("c", &self.c),
            ("beta", &self.beta),
            ("upsilon", &self.upsilon),
            ("kappa", &self.kappa),
            ("alpha", &self.alpha),
        ] {
            let what = format!("{name}_{suffix}");
            if v.len() != n {
                return Err(ControlError::LengthMismatch { what, expected: n, actual: v.len() });
            }
            if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
                return Err(ControlError::NonPositiveGain { what, index: index + 1, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub frequency: LoopGains,
    pub voltage: LoopGains,
    pub eta_form: EtaForm,
}

impl GainSet {
    pub fn validate(&self, n: usize) -> Result<(), ControlError> {
        self.frequency.validate(n, "f")?;
        self.voltage.validate(n, "v")
    }

    pub fn loop_gains(&self, which: ControlLoop) -> &LoopGains {
        match which {
            ControlLoop::Frequency => &self.frequency,
            ControlLoop::Voltage => &self.voltage,
        }
    }

    pub fn loop_gains_mut(&mut self, which: ControlLoop) -> &mut LoopGains {
        match which {
            ControlLoop::Frequency => &mut self.frequency,
            ControlLoop::Voltage => &mut self.voltage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveGains {
    pub beta: f64,
    pub upsilon: f64,
    pub kappa: f64,
}

/// Adaptive compensator state per inverter.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub phi_f: Vec<f64>,
    pub phi_hat_f: Vec<f64>,
    pub phi_v: Vec<f64>,
    pub phi_hat_v: Vec<f64>,
}

/// Reference values issued by the two leaders, `[upper, lower]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderSignals {
    /// rad/s
    pub omega_ref: [f64; 2],
    /// V
    pub v_ref: [f64; 2],
}

impl LeaderSignals {
    pub fn new(omega_ref: [f64; 2], v_ref: [f64; 2]) -> Result<Self, ControlError> {
        if v_ref[0] < v_ref[1] {
            return Err(ControlError::InvertedReferences { upper: v_ref[0], lower: v_ref[1] });
        }
        Ok(Self { omega_ref, v_ref })
    }

    pub fn for_loop(&self, which: ControlLoop) -> [f64; 2] {
        match which {
            ControlLoop::Frequency => self.omega_ref,
            ControlLoop::Voltage => self.v_ref,
        }
    }
}

/// Local cooperative protocol of one inverter:
///
/// `ξ_i = c_i [ Σ_j a_ij (x_j − x_i) + Σ_k g_ik (x_k + d_i − x_i) ]`
///
/// where `neighbors` yields `(a_ij, x_j)` and `d_i` is the inverter's own droop
/// term (`m_Pi P_i` or `n_Qi Q_i`) added to each pinned leader reference.
pub fn local_protocol<I>(own: f64, own_droop: f64, neighbors: I, pins: [f64; 2], leader_values: [f64; 2], gain: f64) -> f64
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut acc: f64 = neighbors.into_iter().map(|(a, xj)| a * (xj - own)).sum();
    for k in 0..2 {
        if pins[k] != 0.0 {
            acc += pins[k] * (leader_values[k] + own_droop - own);
        }
    }
    gain * acc
}

fn check_index(i: usize, n: usize) -> Result<(), ControlError> {
    if i >= n {
        return Err(ControlError::IndexOutOfRange { index: i, n });
    }
    Ok(())
}

fn loop_xi(
    i: usize,
    setpoints: &[f64],
    droop_terms: impl Fn(usize) -> f64,
    graph: &CommGraph,
    gain: f64,
    leader_values: [f64; 2],
) -> f64 {
    let neighbors = graph.in_neighbors(i).iter().map(|&(j, a)| (a, setpoints[j]));
    let pins = [graph.pinning(Leader::Upper)[i], graph.pinning(Leader::Lower)[i]];
    local_protocol(setpoints[i], droop_terms(i), neighbors, pins, leader_values, gain)
}

/// Frequency consensus term of inverter `i` (0-based).
pub fn xi_frequency(
    i: usize,
    omega_n: &[f64],
    p: &[f64],
    graph: &CommGraph,
    gains: &GainSet,
    leaders: &LeaderSignals,
    params: &DroopParams,
) -> Result<f64, ControlError> {
    let n = graph.n_followers();
    check_index(i, n)?;
    check_lengths(n, &[("omega_n", omega_n.len()), ("P", p.len())])?;
    Ok(loop_xi(i, omega_n, |j| params.m_p[j] * p[j], graph, gains.frequency.c[i], leaders.omega_ref))
}

/// Voltage containment term of inverter `i` (0-based).
pub fn xi_voltage(
    i: usize,
    v_n: &[f64],
    q: &[f64],
    graph: &CommGraph,
    gains: &GainSet,
    leaders: &LeaderSignals,
    params: &DroopParams,
) -> Result<f64, ControlError> {
    let n = graph.n_followers();
    check_index(i, n)?;
    check_lengths(n, &[("V_n", v_n.len()), ("Q", q.len())])?;
    Ok(loop_xi(i, v_n, |j| params.n_q[j] * q[j], graph, gains.voltage.c[i], leaders.v_ref))
}

fn check_lengths(n: usize, items: &[(&str, usize)]) -> Result<(), ControlError> {
    for &(what, actual) in items {
        if actual != n {
            return Err(ControlError::LengthMismatch { what: what.to_string(), expected: n, actual });
        }
    }
    Ok(())
}

/// Stacked consensus terms in matrix form:
/// `ξ = −diag(c) Σ_k [Φ_k x − Φ_k(1_N ⊗ x_nk)]`.
///
/// Evaluated as `Φ_k (x − 1 x_k) − G_k d`, which is the same expression by
/// linearity (`ℒ1 = 0`) but avoids cancellation between large setpoints.
pub fn global_xi(algebra: &ContainmentAlgebra, c: &[f64], x: &[f64], droop: &[f64], leader_values: [f64; 2]) -> Vec<f64> {
    let mut acc = vec![0.0; x.len()];
    for leader in Leader::BOTH {
        let value = leader_values[leader.slot()];
        let shifted: Vec<f64> = x.iter().map(|x| x - value).collect();
        let phi_x = algebra.phi(leader).mul_vec(&shifted).expect("state has graph dimension");
        let pin = algebra.pinning(leader);
        for (i, (a, px)) in acc.iter_mut().zip(phi_x).enumerate() {
            *a += px - pin[i] * droop[i];
        }
    }
    acc.iter().zip(c).map(|(a, c)| -c * a).collect()
}

/// Decaying gate η(t); floored at [`ETA_FLOOR`].
pub fn eta(t: f64, alpha: f64, form: EtaForm) -> f64 {
    let exponent = match form {
        EtaForm::Gaussian => alpha * t * t,
        EtaForm::Exponential => alpha * t,
    };
    (-exponent).exp().max(ETA_FLOOR)
}

/// Compensational signal `Γ = ξ e^φ / (|ξ| + η)` and input `u = ξ + Γ`.
pub fn resilient_input(xi: f64, phi: f64, eta_t: f64) -> Result<(f64, f64), ControlError> {
    if !(eta_t > 0.0) {
        return Err(ControlError::NonPositiveEta(eta_t));
    }
    Ok(resilient_input_unchecked(xi, phi, eta_t))
}

#[inline]
pub(crate) fn resilient_input_unchecked(xi: f64, phi: f64, eta_t: f64) -> (f64, f64) {
    if xi == 0.0 {
        return (0.0, 0.0);
    }
    let gamma = xi * phi.exp() / (xi.abs() + eta_t);
    (xi + gamma, gamma)
}

/// Pass-through input of the conventional protocol.
pub fn conventional_input(xi: f64) -> f64 {
    xi
}

/// `φ̇ = β(|ξ| − λ)`, `λ = υ(φ − φ̂)`, `φ̂̇ = κ(φ − φ̂)`.
#[inline]
pub fn adaptive_derivatives(xi: f64, phi: f64, phi_hat: f64, gains: AdaptiveGains) -> (f64, f64) {
    let mismatch = phi - phi_hat;
    let lambda = gains.upsilon * mismatch;
    (gains.beta * (xi.abs() - lambda), gains.kappa * mismatch)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;
    use crate::linalg::Matrix;

    fn bench_graph() -> CommGraph {
        CommGraph::from_rows(
            &[
                vec![0.0, 1.0, 0.0, 1.0],
                vec![1.0, 0.0, 1.0, 0.0],
                vec![0.0, 1.0, 0.0, 1.0],
                vec![1.0, 0.0, 1.0, 0.0],
            ],
            [vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]],
        )
        .unwrap()
    }

    fn bench_params() -> DroopParams {
        DroopParams::new(
            vec![9.4e-5, 9.4e-5, 18.8e-5, 18.8e-5],
            vec![1.3e-3, 1.3e-3, 2.6e-3, 2.6e-3],
            vec![1e4; 4],
            vec![1e3; 4],
        )
        .unwrap()
    }

    fn gains(n: usize, c_f: f64, c_v: f64) -> GainSet {
        GainSet {
            frequency: LoopGains::uniform(n, c_f, 350.0, 1.0, 1.0, 0.01),
            voltage: LoopGains::uniform(n, c_v, 20.0, 1.0, 1.0, 0.01),
            eta_form: EtaForm::Gaussian,
        }
    }

    fn leaders() -> LeaderSignals {
        let w = 2.0 * PI * 60.0;
        LeaderSignals::new([w, w], [350.0, 330.0]).unwrap()
    }

    #[test]
    fn xi_vanishes_at_consensus() {
        let g = bench_graph();
        let w = 2.0 * PI * 60.0;
        for i in 0..4 {
            let xi = xi_frequency(i, &[w; 4], &[0.0; 4], &g, &gains(4, 20.0, 10.0), &leaders(), &bench_params()).unwrap();
            assert_eq!(xi, 0.0);
        }
        // Voltage with both leaders equal to the common setpoint.
        let l = LeaderSignals::new([w, w], [340.0, 340.0]).unwrap();
        for i in 0..4 {
            let xi = xi_voltage(i, &[340.0; 4], &[0.0; 4], &g, &gains(4, 20.0, 10.0), &l, &bench_params()).unwrap();
            assert_eq!(xi, 0.0);
        }
    }

    #[test]
    fn two_node_unpinned() {
        let g = CommGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], [vec![0.0; 2], vec![0.0; 2]]).unwrap();
        let params = DroopParams::new(vec![1e-4; 2], vec![1e-3; 2], vec![1.0; 2], vec![1.0; 2]).unwrap();
        let xi = xi_frequency(0, &[3.0, 7.5], &[100.0, 5.0], &g, &gains(2, 1.0, 1.0), &leaders(), &params).unwrap();
        assert!((xi - 4.5).abs() < 1e-15);
    }

    #[test]
    fn pinned_node_frequency() {
        let g = bench_graph();
        let params = bench_params();
        let l = leaders();
        let p = [12_000.0, 11_000.0, 6_000.0, 7_000.0];
        let wn = [377.9, 377.5, 377.5, 377.5];
        // Neighbours 2 and 4 both equal node 1's neighbours; only node 1's
        // own setpoint differs, so isolate the pinning term by matching them.
        let wn_eq = [377.5, 377.5, 377.5, 377.5];
        let xi = xi_frequency(0, &wn_eq, &p, &g, &gains(4, 20.0, 10.0), &l, &params).unwrap();
        let expected = 20.0 * 1.0 * (l.omega_ref[0] + 9.4e-5 * p[0] - 377.5);
        assert!((xi - expected).abs() < 1e-12);
        let xi = xi_frequency(0, &wn, &p, &g, &gains(4, 20.0, 10.0), &l, &params).unwrap();
        let expected = 20.0 * (2.0 * (377.5 - 377.9) + (l.omega_ref[0] + 9.4e-5 * p[0] - 377.9));
        assert!((xi - expected).abs() < 1e-11);
    }

    #[test]
    fn pinned_node_voltage_lower_leader() {
        let g = bench_graph();
        let params = bench_params();
        let q = [1500.0, 1800.0, 900.0, 1000.0];
        let vn = [338.0; 4];
        let xi = xi_voltage(2, &vn, &q, &g, &gains(4, 20.0, 10.0), &leaders(), &params).unwrap();
        let expected = 10.0 * (330.0 + 2.6e-3 * 900.0 - 338.0);
        assert!((xi - expected).abs() < 1e-12);
    }

    #[test]
    fn antisymmetric_perturbation_gives_antisymmetric_xi() {
        let g = bench_graph();
        let params = bench_params();
        let l = LeaderSignals::new([0.0, 0.0], [0.0, 0.0]).unwrap();
        let base = [0.0; 4];
        let pert = [1.5, -0.5, 0.25, 2.0];
        let neg: Vec<f64> = pert.iter().map(|v| -v).collect();
        for i in 0..4 {
            let up = xi_voltage(i, &pert, &base, &g, &gains(4, 20.0, 10.0), &l, &params).unwrap();
            let down = xi_voltage(i, &neg, &base, &g, &gains(4, 20.0, 10.0), &l, &params).unwrap();
            assert!((up + down).abs() < 1e-12);
        }
    }

    #[test]
    fn xi_index_out_of_range() {
        let err = xi_frequency(4, &[0.0; 4], &[0.0; 4], &bench_graph(), &gains(4, 1.0, 1.0), &leaders(), &bench_params());
        assert_eq!(err, Err(ControlError::IndexOutOfRange { index: 4, n: 4 }));
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(0.0, 0.01, EtaForm::Gaussian), 1.0);
        assert!((eta(10.0, 0.01, EtaForm::Gaussian) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((eta(10.0, 0.01, EtaForm::Gaussian) - 0.367879).abs() < 1e-6);
        assert_eq!(eta(1e6, 0.01, EtaForm::Gaussian), ETA_FLOOR);
        assert!((eta(10.0, 0.1, EtaForm::Exponential) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn resilient_input_cases() {
        assert_eq!(resilient_input(0.0, 3.0, 0.5).unwrap(), (0.0, 0.0));
        let (u, g) = resilient_input(1.0, 0.0, 1.0).unwrap();
        assert!((g - 0.5).abs() < 1e-15 && (u - 1.5).abs() < 1e-15);
        let (_, g) = resilient_input(-2.0, 3.0f64.ln(), 1e-12).unwrap();
        assert!((g + 3.0).abs() < 1e-11);
        assert!(g > -3.0);
        assert_eq!(resilient_input(1.0, 0.0, 0.0), Err(ControlError::NonPositiveEta(0.0)));
        assert!(resilient_input(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn adaptive_derivative_cases() {
        let g = AdaptiveGains { beta: 350.0, upsilon: 1.0, kappa: 1.0 };
        let (dphi, dhat) = adaptive_derivatives(0.1, 0.15, 0.10, g);
        assert!((dphi - 17.5).abs() < 1e-9);
        assert!((dhat - 0.05).abs() < 1e-12);
        // |ξ| = λ balances φ.
        let (dphi, _) = adaptive_derivatives(-0.3, 0.5, 0.2, AdaptiveGains { beta: 7.0, upsilon: 1.0, kappa: 2.0 });
        assert!(dphi.abs() < 1e-12);
        // φ = φ̂ removes the leak.
        let (dphi, dhat) = adaptive_derivatives(0.4, 1.0, 1.0, g);
        assert!((dphi - 140.0).abs() < 1e-12);
        assert_eq!(dhat, 0.0);
    }

    #[test]
    fn conventional_is_passthrough_and_limit_of_resilient() {
        assert_eq!(conventional_input(0.0), 0.0);
        assert_eq!(conventional_input(2.5), 2.5);
        for xi in [2.5, -0.75, 1e-3] {
            let (u, _) = resilient_input(xi, -30.0, 0.3).unwrap();
            assert!(((u - conventional_input(xi)) / xi).abs() < 1e-10);
        }
    }

    #[test]
    fn global_form_on_equal_droop_terms() {
        let g = bench_graph();
        let algebra = g.algebra().unwrap();
        let c = [20.0; 4];
        let x = [377.1, 377.4, 376.8, 377.0];
        let droop = [1.1; 4];
        let l = leaders();
        let global = global_xi(&algebra, &c, &x, &droop, l.omega_ref);
        let p: Vec<f64> = droop.iter().zip(&bench_params().m_p).map(|(d, m)| d / m).collect();
        for i in 0..4 {
            let local = xi_frequency(i, &x, &p, &g, &gains(4, 20.0, 10.0), &l, &bench_params()).unwrap();
            assert!((local - global[i]).abs() < 1e-10, "{local} vs {}", global[i]);
        }
    }

    #[test]
    fn zero_graph_pinned_everywhere_global_form() {
        let g = CommGraph::new(Matrix::zeros(3, 3), [vec![1.0; 3], vec![0.0; 3]]).unwrap();
        let algebra = g.algebra().unwrap();
        let xi = global_xi(&algebra, &[2.0; 3], &[1.0, 2.0, 3.0], &[0.0; 3], [2.0, 0.0]);
        assert_eq!(xi, vec![2.0, 0.0, -2.0]);
    }

    proptest! {
        #[test]
        fn gamma_is_odd_and_bounded(xi in -50.0f64..50.0, phi in -5.0f64..8.0, eta_t in 1e-6f64..2.0) {
            let (_, g_pos) = resilient_input(xi, phi, eta_t).unwrap();
            let (_, g_neg) = resilient_input(-xi, phi, eta_t).unwrap();
            prop_assert!((g_pos + g_neg).abs() <= 1e-12 * g_pos.abs().max(1.0));
            prop_assert!(g_pos.abs() < phi.exp());
            prop_assert!(g_pos.abs() <= phi.exp() * xi.abs() / (xi.abs() + eta_t) * (1.0 + 1e-15));
            if xi != 0.0 {
                prop_assert_eq!(g_pos.signum(), xi.signum());
            }
        }

        #[test]
        fn adaptive_law_lipschitz(
            xi in -10.0f64..10.0,
            a in -5.0f64..5.0, ah in -5.0f64..5.0,
            b in -5.0f64..5.0, bh in -5.0f64..5.0,
            beta in 0.1f64..1000.0, upsilon in 0.1f64..5.0, kappa in 0.1f64..5.0,
        ) {
            let g = AdaptiveGains { beta, upsilon, kappa };
            let (fa, fah) = adaptive_derivatives(xi, a, ah, g);
            let (fb, fbh) = adaptive_derivatives(xi, b, bh, g);
            let lhs = (fa - fb).abs() + (fah - fbh).abs();
            let rhs = (beta * upsilon + kappa) * ((a - b).abs() + (ah - bh).abs());
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-9);
            // Mismatch dynamics: d/dt(φ − φ̂) = β|ξ| − (βυ + κ)(φ − φ̂).
            let tilde_dot = fa - fah;
            let expected = beta * xi.abs() - (beta * upsilon + kappa) * (a - ah);
            prop_assert!((tilde_dot - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }

        #[test]
        fn phi_nondecreasing_when_lambda_nonpositive(xi in -10.0f64..10.0, phi in -3.0f64..3.0, gap in 0.0f64..3.0) {
            // φ ≤ φ̂ makes λ ≤ 0.
            let (dphi, _) = adaptive_derivatives(xi, phi, phi + gap, AdaptiveGains { beta: 350.0, upsilon: 1.0, kappa: 1.0 });
            prop_assert!(dphi >= 0.0);
        }

        #[test]
        fn eta_positive_and_nonincreasing(t in 0.0f64..1e4, dt in 0.0f64..100.0, alpha in 1e-4f64..1.0) {
            let a = eta(t, alpha, EtaForm::Gaussian);
            let b = eta(t + dt, alpha, EtaForm::Gaussian);
            prop_assert!(a > 0.0 && b > 0.0);
            prop_assert!(b <= a);
        }
    }
}
