//! Reduced-order electrical model: `N` droop-controlled inverters feeding one
//! common load bus.
//!
//! Active power follows a lossless DC-style flow through per-inverter
//! susceptances `b_i`; reactive power follows a linear coupling `q_i` between
//! terminal and load-bus voltage. Both algebraic solves are closed-form, so
//! the integrator only ever sees an ODE in the angles and setpoints.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("length mismatch: {what} has {actual} entries, expected {expected}")]
    LengthMismatch { what: &'static str, expected: usize, actual: usize },
    #[error("{what}[{index}] = {value} must be strictly positive and finite")]
    NonPositive { what: &'static str, index: usize, value: f64 },
    #[error("degenerate coupling: {0}")]
    Degenerate(&'static str),
    #[error("no inverters")]
    Empty,
}

/// Droop and network-coupling gains, one entry per inverter.
#[derive(Debug, Clone, PartialEq)]
pub struct DroopParams {
    /// P–ω droop gain, rad/s per W.
    pub m_p: Vec<f64>,
    /// Q–v droop gain, V per var.
    pub n_q: Vec<f64>,
    /// Active coupling susceptance, W per rad.
    pub b: Vec<f64>,
    /// Reactive coupling gain, var per V.
    pub q: Vec<f64>,
}

impl DroopParams {
    pub fn new(m_p: Vec<f64>, n_q: Vec<f64>, b: Vec<f64>, q: Vec<f64>) -> Result<Self, PlantError> {
        let n = m_p.len();
        if n == 0 {
            return Err(PlantError::Empty);
        }
        for (what, v) in [("m_p", &m_p), ("n_q", &n_q), ("b", &b), ("q", &q)] {
            check_len(what, n, v.len())?;
            for (index, &value) in v.iter().enumerate() {
                if !(value.is_finite() && value > 0.0) {
                    return Err(PlantError::NonPositive { what, index: index + 1, value });
                }
            }
        }
        Ok(Self { m_p, n_q, b, q })
    }

    pub fn len(&self) -> usize {
        self.m_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_p.is_empty()
    }

    /// `q_i / (1 + q_i n_Qi)`: effective reactive admittance seen through the droop.
    pub(crate) fn reactive_weight(&self, i: usize) -> f64 {
        self.q[i] / (1.0 + self.q[i] * self.n_q[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadSpec {
    /// Total active demand, W.
    pub p: f64,
    /// Total reactive demand, var.
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    /// Bus angle relative to the nominal rotating frame, rad.
    pub delta: Vec<f64>,
    /// Frequency setpoint ω_ni, rad/s.
    pub omega_n: Vec<f64>,
    /// Voltage setpoint V_ni, V.
    pub v_n: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantOutputs {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Operating frequency ω_i, rad/s.
    pub omega: Vec<f64>,
    pub v_od: Vec<f64>,
    pub delta_l: f64,
    pub v_l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactiveSolution {
    pub q: Vec<f64>,
    pub v_od: Vec<f64>,
    pub v_l: f64,
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<(), PlantError> {
    if expected != actual {
        return Err(PlantError::LengthMismatch { what, expected, actual });
    }
    Ok(())
}

/// `ω_i = ω_ni − m_Pi P_i`
pub fn droop_frequency(params: &DroopParams, omega_n: &[f64], p: &[f64]) -> Result<Vec<f64>, PlantError> {
    check_len("omega_n", params.len(), omega_n.len())?;
    check_len("P", params.len(), p.len())?;
    Ok(omega_n.iter().zip(p).zip(&params.m_p).map(|((w, p), m)| w - m * p).collect())
}

/// `v_odi = V_ni − n_Qi Q_i`
pub fn droop_voltage(params: &DroopParams, v_n: &[f64], q: &[f64]) -> Result<Vec<f64>, PlantError> {
    check_len("V_n", params.len(), v_n.len())?;
    check_len("Q", params.len(), q.len())?;
    Ok(v_n.iter().zip(q).zip(&params.n_q).map(|((v, q), n)| v - n * q).collect())
}

/// Active power injections and the load-bus angle.
///
/// `δ_L = (Σ b_i δ_i − P_L) / Σ b_i`, `P_i = b_i (δ_i − δ_L)`.
pub fn solve_active_power(
    delta: &[f64],
    params: &DroopParams,
    load: &LoadSpec,
) -> Result<(Vec<f64>, f64), PlantError> {
    check_len("delta", params.len(), delta.len())?;
    let mut p = vec![0.0; delta.len()];
    let delta_l = active_power_into(delta, &params.b, load.p, &mut p)?;
    Ok((p, delta_l))
}

pub(crate) fn active_power_into(delta: &[f64], b: &[f64], p_load: f64, p: &mut [f64]) -> Result<f64, PlantError> {
    let b_sum: f64 = b.iter().sum();
    if !(b_sum > 0.0) {
        return Err(PlantError::Degenerate("all active coupling gains are zero"));
    }
    let weighted: f64 = b.iter().zip(delta).map(|(b, d)| b * d).sum();
    let delta_l = (weighted - p_load) / b_sum;
    for ((p, b), d) in p.iter_mut().zip(b).zip(delta) {
        *p = b * (d - delta_l);
    }
    Ok(delta_l)
}

/// Closes `Q_i = q_i (v_odi − V_L)` together with the voltage droop:
/// `Q_i = q_i (V_ni − V_L) / (1 + q_i n_Qi)`, with `V_L` chosen so that
/// `Σ Q_i = Q_L`.
pub fn solve_reactive_power(
    v_n: &[f64],
    params: &DroopParams,
    load: &LoadSpec,
) -> Result<ReactiveSolution, PlantError> {
    check_len("V_n", params.len(), v_n.len())?;
    let mut q = vec![0.0; v_n.len()];
    let mut v_od = vec![0.0; v_n.len()];
    let v_l = reactive_power_into(v_n, params, load.q, &mut q, &mut v_od)?;
    Ok(ReactiveSolution { q, v_od, v_l })
}

pub(crate) fn reactive_power_into(
    v_n: &[f64],
    params: &DroopParams,
    q_load: f64,
    q: &mut [f64],
    v_od: &mut [f64],
) -> Result<f64, PlantError> {
    let mut w_sum = 0.0;
    let mut weighted = 0.0;
    for (i, v) in v_n.iter().enumerate() {
        let w = params.reactive_weight(i);
        w_sum += w;
        weighted += w * v;
    }
    if !(w_sum > 0.0) || !w_sum.is_finite() {
        return Err(PlantError::Degenerate("sum of q_i/(1 + q_i n_Qi) is not positive"));
    }
    let v_l = (weighted - q_load) / w_sum;
    for i in 0..v_n.len() {
        q[i] = params.reactive_weight(i) * (v_n[i] - v_l);
        v_od[i] = v_n[i] - params.n_q[i] * q[i];
    }
    Ok(v_l)
}

/// Full algebraic solve for one plant state.
pub fn evaluate(state: &PlantState, params: &DroopParams, load: &LoadSpec) -> Result<PlantOutputs, PlantError> {
    check_len("omega_n", params.len(), state.omega_n.len())?;
    let (p, delta_l) = solve_active_power(&state.delta, params, load)?;
    let reactive = solve_reactive_power(&state.v_n, params, load)?;
    let omega = droop_frequency(params, &state.omega_n, &p)?;
    Ok(PlantOutputs { p, q: reactive.q, omega, v_od: reactive.v_od, delta_l, v_l: reactive.v_l })
}

/// Angle kinematics in the nominal frame: `δ̇_i = ω_i − ω₀`.
pub fn plant_derivative(outputs: &PlantOutputs, nominal_omega: f64) -> Vec<f64> {
    outputs.omega.iter().map(|w| w - nominal_omega).collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;

    fn bench_params() -> DroopParams {
        DroopParams::new(
            vec![9.4e-5, 9.4e-5, 18.8e-5, 18.8e-5],
            vec![1.3e-3, 1.3e-3, 2.6e-3, 2.6e-3],
            vec![1.0e4; 4],
            vec![1.0e3; 4],
        )
        .unwrap()
    }

    fn uniform(n: usize, b: f64, q: f64) -> DroopParams {
        DroopParams::new(vec![1e-4; n], vec![1e-3; n], vec![b; n], vec![q; n]).unwrap()
    }

    #[test]
    fn no_load_frequency_equals_setpoint() {
        let p = bench_params();
        let wn = vec![2.0 * PI * 60.0; 4];
        assert_eq!(droop_frequency(&p, &wn, &[0.0; 4]).unwrap(), wn);
    }

    #[test]
    fn frequency_droop_with_bench_gain() {
        let p = bench_params();
        let w0 = 2.0 * PI * 60.0;
        let w = droop_frequency(&p, &[w0; 4], &[10_000.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((w[0] - (w0 - 0.94)).abs() < 1e-12);
        // m_P3 = 2 m_P1: half the power gives the same deflection.
        let w = droop_frequency(&p, &[w0; 4], &[10_000.0, 0.0, 5_000.0, 0.0]).unwrap();
        assert!((w[0] - w[2]).abs() < 1e-12);
    }

    #[test]
    fn voltage_droop_cases() {
        let p = bench_params();
        let v = droop_voltage(&p, &[350.0; 4], &[2000.0, 0.0, 0.0, -1000.0]).unwrap();
        assert!((v[0] - 347.4).abs() < 1e-12);
        assert_eq!(v[1], 350.0);
        assert!(v[3] > 350.0);
    }

    #[test]
    fn length_mismatch_reported() {
        let p = bench_params();
        assert!(matches!(
            droop_frequency(&p, &[0.0; 3], &[0.0; 4]),
            Err(PlantError::LengthMismatch { what: "omega_n", .. })
        ));
        assert!(matches!(droop_voltage(&p, &[0.0; 4], &[0.0; 5]), Err(PlantError::LengthMismatch { .. })));
    }

    #[test]
    fn nonpositive_params_rejected() {
        let err = DroopParams::new(vec![1.0, 0.0], vec![1.0; 2], vec![1.0; 2], vec![1.0; 2]).unwrap_err();
        assert_eq!(err, PlantError::NonPositive { what: "m_p", index: 2, value: 0.0 });
    }

    #[test]
    fn equal_angles_no_load() {
        let p = bench_params();
        let (pw, dl) = solve_active_power(&[0.3; 4], &p, &LoadSpec { p: 0.0, q: 0.0 }).unwrap();
        assert!(pw.iter().all(|v| v.abs() < 1e-9));
        assert!((dl - 0.3).abs() < 1e-15);
    }

    #[test]
    fn symmetric_two_inverter_split() {
        let b = 5.0e3;
        let p = uniform(2, b, 1e3);
        let (pw, dl) = solve_active_power(&[0.2, 0.2], &p, &LoadSpec { p: 2.0 * 700.0, q: 0.0 }).unwrap();
        assert!((pw[0] - 700.0).abs() < 1e-9 && (pw[1] - 700.0).abs() < 1e-9);
        assert!((dl - (0.2 - 700.0 / b)).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_b_equal_angles() {
        let p = DroopParams::new(vec![1e-4; 2], vec![1e-3; 2], vec![2.0, 1.0], vec![1.0; 2]).unwrap();
        let (pw, dl) = solve_active_power(&[0.1, 0.1], &p, &LoadSpec { p: 0.0, q: 0.0 }).unwrap();
        assert!((dl - 0.1).abs() < 1e-15);
        assert!(pw.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn reactive_equal_setpoints_no_load() {
        let p = bench_params();
        let sol = solve_reactive_power(&[340.0; 4], &p, &LoadSpec { p: 0.0, q: 0.0 }).unwrap();
        assert!((sol.v_l - 340.0).abs() < 1e-12);
        assert!(sol.q.iter().all(|q| q.abs() < 1e-9));
        assert!(sol.v_od.iter().all(|v| (v - 340.0).abs() < 1e-9));
    }

    #[test]
    fn reactive_identical_inverters_share_equally() {
        let p = uniform(4, 1e4, 1e3);
        let sol = solve_reactive_power(&[345.0; 4], &p, &LoadSpec { p: 0.0, q: 8000.0 }).unwrap();
        for q in &sol.q {
            assert!((q - 2000.0).abs() < 1e-9);
        }
    }

    /// Independent route: solve the defining equations
    /// `Q_i − q_i v_odi + q_i V_L = 0`, `v_odi + n_Qi Q_i = V_ni`, `ΣQ_i = Q_L`
    /// as one dense linear system.
    #[test]
    fn reactive_matches_brute_force_linear_system() {
        let params =
            DroopParams::new(vec![1e-4; 2], vec![1.3e-3, 2.6e-3], vec![1e4; 2], vec![800.0, 1500.0]).unwrap();
        let v_n = [348.0, 333.0];
        let q_load = 3_000.0;
        // Unknowns: Q1, Q2, v1, v2, V_L.
        let a = nalgebra::DMatrix::from_row_slice(
            5,
            5,
            &[
                1.0, 0.0, -800.0, 0.0, 800.0, //
                0.0, 1.0, 0.0, -1500.0, 1500.0, //
                1.3e-3, 0.0, 1.0, 0.0, 0.0, //
                0.0, 2.6e-3, 0.0, 1.0, 0.0, //
                1.0, 1.0, 0.0, 0.0, 0.0,
            ],
        );
        let rhs = nalgebra::DVector::from_row_slice(&[0.0, 0.0, v_n[0], v_n[1], q_load]);
        let x = a.lu().solve(&rhs).unwrap();
        let sol = solve_reactive_power(&v_n, &params, &LoadSpec { p: 0.0, q: q_load }).unwrap();
        assert!((sol.q[0] - x[0]).abs() < 1e-8);
        assert!((sol.q[1] - x[1]).abs() < 1e-8);
        assert!((sol.v_od[0] - x[2]).abs() < 1e-10);
        assert!((sol.v_od[1] - x[3]).abs() < 1e-10);
        assert!((sol.v_l - x[4]).abs() < 1e-10);
    }

    #[test]
    fn derivative_is_frequency_offset() {
        let w0 = 2.0 * PI * 60.0;
        let out = PlantOutputs {
            p: vec![0.0; 2],
            q: vec![0.0; 2],
            omega: vec![w0 + 0.5, w0],
            v_od: vec![0.0; 2],
            delta_l: 0.0,
            v_l: 0.0,
        };
        let d = plant_derivative(&out, w0);
        assert!((d[0] - 0.5).abs() < 1e-12);
        assert_eq!(d[1], 0.0);
    }

    proptest! {
        #[test]
        fn power_balance_holds(
            delta in prop::collection::vec(-1.0f64..1.0, 4),
            v_n in prop::collection::vec(320.0f64..360.0, 4),
            p_load in 0.0f64..80_000.0,
            q_load in -10_000.0f64..20_000.0,
        ) {
            let params = bench_params();
            let load = LoadSpec { p: p_load, q: q_load };
            let out = evaluate(&PlantState { delta, omega_n: vec![377.0; 4], v_n }, &params, &load).unwrap();
            let p_sum: f64 = out.p.iter().sum();
            let q_sum: f64 = out.q.iter().sum();
            prop_assert!((p_sum - p_load).abs() <= 1e-9 * p_load.abs().max(1.0));
            prop_assert!((q_sum - q_load).abs() <= 1e-9 * q_load.abs().max(1.0));
        }

        #[test]
        fn angle_shift_invariance(
            delta in prop::collection::vec(-1.0f64..1.0, 4),
            shift in -3.0f64..3.0,
        ) {
            let params = bench_params();
            let load = LoadSpec { p: 36_000.0, q: 0.0 };
            let (p0, dl0) = solve_active_power(&delta, &params, &load).unwrap();
            let shifted: Vec<f64> = delta.iter().map(|d| d + shift).collect();
            let (p1, dl1) = solve_active_power(&shifted, &params, &load).unwrap();
            for (a, b) in p0.iter().zip(&p1) {
                prop_assert!((a - b).abs() < 1e-6);
            }
            prop_assert!((dl1 - dl0 - shift).abs() < 1e-12);
        }

        #[test]
        fn more_load_lowers_load_angle(
            delta in prop::collection::vec(-1.0f64..1.0, 4),
            p_load in 0.0f64..50_000.0,
            extra in 1.0f64..10_000.0,
        ) {
            let params = bench_params();
            let (_, dl0) = solve_active_power(&delta, &params, &LoadSpec { p: p_load, q: 0.0 }).unwrap();
            let (_, dl1) = solve_active_power(&delta, &params, &LoadSpec { p: p_load + extra, q: 0.0 }).unwrap();
            prop_assert!(dl1 < dl0);
        }
    }
}
