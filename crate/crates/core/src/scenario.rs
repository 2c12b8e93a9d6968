//! Straight-road scenarios: constant-velocity kinematics, angle prediction
//! for beam steering, and per-slot link assembly.
//!
//! Slot `i` sees each vehicle after `i + 1` kinematic steps from its start
//! position. The RSU precoder uses a one-slot angle prediction and the
//! vehicle detector a two-slot prediction, both built from the true angle
//! history by linear extrapolation plus Gaussian error (twice the one-slot
//! standard deviation for the two-slot horizon).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::allocate::{
    alg1_delay_bisection, alg2_complementary, closed_form_equal_payload, epa, oracle_grid_search,
    AllocationResult, Policy, SolverParams,
};
use crate::channel::{ArrayConfig, VehicleState};
use crate::error::{Error, Result};
use crate::latency::{make_link, LinkCoefficients, LinkContext};
use crate::pcrb::{FloorMode, PcrbModel, PcrbThresholds};

/// Predicted angles are kept this far inside (0, pi).
pub const ANGLE_MARGIN: f64 = 1e-6;
/// Grid resolution used when the oracle is run as a policy.
pub const ORACLE_POLICY_STEPS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub angle_rad: f64,
    pub dist_m: f64,
    pub longitudinal_m: f64,
}

/// Angle and range of a vehicle at longitudinal offset `x` from the RSU foot.
pub fn road_geometry(longitudinal_m: f64, rsu_offset_m: f64) -> (f64, f64) {
    let dist = longitudinal_m.hypot(rsu_offset_m);
    ((longitudinal_m / dist).acos(), dist)
}

/// Advances one slot at constant velocity.
pub fn kinematics_step(
    longitudinal_m: f64,
    speed_mps: f64,
    slot_s: f64,
    rsu_offset_m: f64,
) -> Result<KinematicState> {
    if !(rsu_offset_m.is_finite() && rsu_offset_m > 0.0) {
        return Err(Error::domain("RSU offset must be > 0"));
    }
    let x = longitudinal_m + speed_mps * slot_s;
    let (angle_rad, dist_m) = road_geometry(x, rsu_offset_m);
    Ok(KinematicState {
        angle_rad,
        dist_m,
        longitudinal_m: x,
    })
}

/// Extrapolates `horizon` slots past the last entry of `history` with a
/// least-squares line through the last `horizon + 1` angles, then adds
/// Gaussian error of standard deviation `horizon * noise_std_rad`.
pub fn predict_angle<R: Rng + ?Sized>(
    history: &[f64],
    horizon: usize,
    noise_std_rad: f64,
    rng: &mut R,
) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::domain("prediction horizon must be at least 1"));
    }
    if history.len() < horizon + 1 {
        return Err(Error::domain(format!(
            "horizon {horizon} needs {} past angles, got {}",
            horizon + 1,
            history.len()
        )));
    }
    if !(noise_std_rad.is_finite() && noise_std_rad >= 0.0) {
        return Err(Error::domain("noise std must be finite and >= 0"));
    }

    let pts = &history[history.len() - horizon - 1..];
    let n = pts.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = pts.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in pts.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    let target = (n - 1.0) + horizon as f64;
    let trend = y_mean + slope * (target - x_mean);

    let z: f64 = rng.sample(StandardNormal);
    let noisy = trend + z * noise_std_rad * horizon as f64;
    Ok(noisy.clamp(ANGLE_MARGIN, PI - ANGLE_MARGIN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleSpec {
    /// Longitudinal position before the first slot, m.
    pub start_m: f64,
    pub speed_mps: f64,
    pub payload_bits: f64,
    pub model: PcrbModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadScenario {
    pub rsu_offset_m: f64,
    pub slot_s: f64,
    pub n_slots: usize,
    pub vehicles: Vec<VehicleSpec>,
    /// Maximum tolerated delay; `None` falls back to the slot length.
    pub deadline_s: Option<f64>,
    pub p_max: f64,
    pub thresholds: PcrbThresholds,
    pub arrays: ArrayConfig,
    /// One-slot angle prediction error std, rad.
    pub prediction_noise_rad: f64,
    pub seed: u64,
}

impl RoadScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.rsu_offset_m.is_finite() && self.rsu_offset_m > 0.0) {
            return Err(Error::domain("rsu_offset_m must be > 0"));
        }
        if !(self.slot_s.is_finite() && self.slot_s > 0.0) {
            return Err(Error::domain("slot_s must be > 0"));
        }
        if self.n_slots == 0 {
            return Err(Error::domain("n_slots must be >= 1"));
        }
        if self.vehicles.is_empty() {
            return Err(Error::domain("scenario has no vehicles"));
        }
        if let Some(d) = self.deadline_s {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::domain("deadline_s must be > 0"));
            }
        }
        if !(self.p_max.is_finite() && self.p_max > 0.0) {
            return Err(Error::domain("p_max must be > 0"));
        }
        if !(self.prediction_noise_rad.is_finite() && self.prediction_noise_rad >= 0.0) {
            return Err(Error::domain("prediction noise must be >= 0"));
        }
        self.thresholds.validate()?;
        self.arrays.validate()?;
        for (k, v) in self.vehicles.iter().enumerate() {
            if !(v.payload_bits.is_finite() && v.payload_bits > 0.0) {
                return Err(Error::domain(format!("vehicle {k}: payload must be > 0")));
            }
            if !(v.start_m.is_finite() && v.speed_mps.is_finite()) {
                return Err(Error::domain(format!("vehicle {k}: non-finite kinematics")));
            }
            v.model
                .validate()
                .map_err(|e| Error::domain(format!("vehicle {k}: {e}")))?;
        }
        Ok(())
    }

    pub fn deadline(&self) -> f64 {
        self.deadline_s.unwrap_or(self.slot_s)
    }

    pub fn link_context(&self, floor_mode: FloorMode) -> LinkContext {
        LinkContext {
            array: self.arrays,
            thresholds: self.thresholds,
            slot_s: self.slot_s,
            deadline_s: self.deadline(),
            floor_mode,
        }
    }

    /// Same scenario restricted to its first `count` vehicles.
    pub fn with_first_vehicles(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.vehicles.len() {
            return Err(Error::domain(format!(
                "requested {count} vehicles, scenario defines {}",
                self.vehicles.len()
            )));
        }
        let mut s = self.clone();
        s.vehicles.truncate(count);
        Ok(s)
    }
}

/// Longitudinal positions at slots `first..=last`, where slot `i` is reached
/// after `i + 1` steps from the start and negative slots run backwards.
fn trajectory(v: &VehicleSpec, scenario: &RoadScenario, first: i64, last: i64) -> Result<Vec<f64>> {
    let step = v.speed_mps * scenario.slot_s;
    let mut forward = Vec::new();
    let mut x = v.start_m;
    for _ in 0..=last.max(-1) {
        x = kinematics_step(x, v.speed_mps, scenario.slot_s, scenario.rsu_offset_m)?.longitudinal_m;
        forward.push(x);
    }
    // forward[j] holds slot j; slot -1 is the start position.
    let at = |slot: i64| -> f64 {
        if slot >= 0 {
            forward[slot as usize]
        } else {
            v.start_m + (slot + 1) as f64 * step
        }
    };
    Ok((first..=last).map(at).collect())
}

/// One vehicle's view of a slot: true state, beam predictions, link.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleSlot {
    pub state: VehicleState,
    pub longitudinal_m: f64,
    pub tx_angle_est: f64,
    pub rx_angle_est: f64,
    pub model: PcrbModel,
    pub link: LinkCoefficients,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: usize,
    pub vehicles: Vec<VehicleSlot>,
    pub result: AllocationResult,
}

impl SlotRecord {
    pub fn links(&self) -> Vec<LinkCoefficients> {
        self.vehicles.iter().map(|v| v.link).collect()
    }
}

fn slot_rng(seed: u64, slot_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slot_index as u64);
    rng
}

/// Kinematics, predictions and link coefficients of every vehicle in a slot.
pub fn slot_vehicles(
    scenario: &RoadScenario,
    slot_index: usize,
    floor_mode: FloorMode,
) -> Result<Vec<VehicleSlot>> {
    scenario.validate()?;
    if slot_index >= scenario.n_slots {
        return Err(Error::domain(format!(
            "slot {slot_index} out of range (scenario has {})",
            scenario.n_slots
        )));
    }
    let ctx = scenario.link_context(floor_mode);
    let mut rng = slot_rng(scenario.seed, slot_index);
    let i = slot_index as i64;

    scenario
        .vehicles
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let xs = trajectory(v, scenario, i - 4, i)?;
            let angles: Vec<f64> = xs
                .iter()
                .map(|&x| road_geometry(x, scenario.rsu_offset_m).0)
                .collect();
            // angles[j] is slot i - 4 + j; the current slot is the last entry.
            let tx_angle_est =
                predict_angle(&angles[2..4], 1, scenario.prediction_noise_rad, &mut rng)?;
            let rx_angle_est =
                predict_angle(&angles[0..3], 2, scenario.prediction_noise_rad, &mut rng)?;

            let x = xs[4];
            let (angle_rad, dist_m) = road_geometry(x, scenario.rsu_offset_m);
            let alpha = scenario.arrays.alpha_const;
            let state = VehicleState {
                angle_rad,
                dist_m,
                speed_mps: v.speed_mps,
                radar_coeff: Complex64::new(alpha * alpha / (dist_m * dist_m), 0.0),
                payload_bits: v.payload_bits,
            };
            let link = make_link(k, &state, tx_angle_est, rx_angle_est, &v.model, &ctx)
                .map_err(|e| slot_context(e, slot_index))?;
            Ok(VehicleSlot {
                state,
                longitudinal_m: x,
                tx_angle_est,
                rx_angle_est,
                model: v.model,
                link,
            })
        })
        .collect()
}

fn slot_context(err: Error, slot_index: usize) -> Error {
    match err {
        Error::Infeasible { reason, deficit_w } => Error::Infeasible {
            reason: format!("slot {slot_index}: {reason}"),
            deficit_w,
        },
        other => other,
    }
}

/// Runs one allocation policy on already-built links.
pub fn dispatch(
    policy: Policy,
    links: &[LinkCoefficients],
    p_max: f64,
    params: &SolverParams,
) -> Result<AllocationResult> {
    match policy {
        Policy::Epa => epa(links, p_max),
        Policy::ClosedForm => closed_form_equal_payload(links, p_max),
        Policy::Alg1 => alg1_delay_bisection(links, p_max, params),
        Policy::Alg2 => alg2_complementary(links, p_max, params),
        Policy::Oracle => oracle_grid_search(links, p_max, ORACLE_POLICY_STEPS),
    }
}

pub fn run_slot(
    scenario: &RoadScenario,
    slot_index: usize,
    policy: Policy,
    params: &SolverParams,
) -> Result<SlotRecord> {
    let vehicles = slot_vehicles(scenario, slot_index, policy.floor_mode())?;
    let links: Vec<_> = vehicles.iter().map(|v| v.link).collect();
    let result = dispatch(policy, &links, scenario.p_max, params)
        .map_err(|e| slot_context(e, slot_index))?;
    Ok(SlotRecord {
        slot: slot_index,
        vehicles,
        result,
    })
}

pub fn run_scenario(
    scenario: &RoadScenario,
    policy: Policy,
    params: &SolverParams,
) -> Result<Vec<SlotRecord>> {
    (0..scenario.n_slots)
        .map(|i| run_slot(scenario, i, policy, params))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn model() -> PcrbModel {
        PcrbModel {
            b1_sq: [1e-4, 0.0, 0.0, 0.0],
            b2_sq: [0.0, 0.25, 0.0, 0.0],
            eigs: [100.0; 4],
        }
    }

    fn scenario(vehicles: &[(f64, f64, f64)]) -> RoadScenario {
        RoadScenario {
            rsu_offset_m: 4.0,
            slot_s: 0.01,
            n_slots: 3,
            vehicles: vehicles
                .iter()
                .map(|&(start_m, speed_mps, payload_bits)| VehicleSpec {
                    start_m,
                    speed_mps,
                    payload_bits,
                    model: model(),
                })
                .collect(),
            deadline_s: None,
            p_max: 1.0,
            thresholds: PcrbThresholds {
                xi_theta: 5e-5,
                xi_dist: 0.1,
            },
            arrays: ArrayConfig::default(),
            prediction_noise_rad: 0.0,
            seed: 11,
        }
    }

    #[test]
    fn broadside_and_diagonal_geometry() {
        let s = kinematics_step(-1.0, 100.0, 0.01, 4.0).unwrap();
        assert_eq!(s.longitudinal_m, 0.0);
        assert!((s.angle_rad - PI / 2.0).abs() < 1e-15);
        assert_eq!(s.dist_m, 4.0);

        let s = kinematics_step(4.0, 0.0, 0.01, 4.0).unwrap();
        assert!((s.angle_rad - FRAC_PI_4).abs() < 1e-15);
        assert!((s.dist_m - 4.0 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kinematics_step_moves_vehicle() {
        let s = kinematics_step(-50.0, 20.0, 0.01, 4.0).unwrap();
        assert!((s.longitudinal_m + 49.8).abs() < 1e-12);
        assert!((s.dist_m - (49.8f64 * 49.8 + 16.0).sqrt()).abs() < 1e-12);
        assert!(s.angle_rad > PI / 2.0 && s.angle_rad < PI);
        assert!(kinematics_step(0.0, 1.0, 0.01, 0.0).is_err());
    }

    #[test]
    fn prediction_is_exact_on_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            predict_angle(&[1.2, 1.2, 1.2], 2, 0.0, &mut rng).unwrap(),
            1.2
        );
        let p = predict_angle(&[1.0, 1.1, 1.2], 1, 0.0, &mut rng).unwrap();
        assert!((p - 1.3).abs() < 1e-12);
        let p = predict_angle(&[1.0, 1.1, 1.2], 2, 0.0, &mut rng).unwrap();
        assert!((p - 1.4).abs() < 1e-12);
        assert!(predict_angle(&[1.0, 1.1], 2, 0.0, &mut rng).is_err());
    }

    #[test]
    fn prediction_clamped_into_open_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = predict_angle(&[0.2, 0.1], 1, 0.0, &mut rng).unwrap();
        assert_eq!(p, ANGLE_MARGIN);
        let p = predict_angle(&[3.0, 3.1], 1, 0.0, &mut rng).unwrap();
        assert_eq!(p, PI - ANGLE_MARGIN);
    }

    #[test]
    fn prediction_noise_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 10_000;
        let errs: Vec<f64> = (0..n)
            .map(|_| predict_angle(&[1.0, 1.0], 1, 0.01, &mut rng).unwrap() - 1.0)
            .collect();
        let mean = errs.iter().sum::<f64>() / n as f64;
        let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(
            (var.sqrt() - 0.01).abs() < 0.05 * 0.01,
            "std {}",
            var.sqrt()
        );
    }

    #[test]
    fn single_vehicle_gets_full_power() {
        let s = scenario(&[(-20.0, 15.0, 4000.0)]);
        for policy in [
            Policy::Epa,
            Policy::ClosedForm,
            Policy::Alg1,
            Policy::Alg2,
            Policy::Oracle,
        ] {
            let r = run_slot(&s, 0, policy, &SolverParams::default()).unwrap();
            assert!((r.result.powers[0] - 1.0).abs() < 1e-12, "{policy}");
        }
    }

    #[test]
    fn alg1_matches_closed_form_without_noise() {
        let mut s = scenario(&[
            (-30.0, 20.0, 4000.0),
            (-5.0, 15.0, 4000.0),
            (25.0, 25.0, 4000.0),
        ]);
        // Enough budget that no floor binds.
        s.p_max = 4.0;
        let p = SolverParams::default();
        let a = run_slot(&s, 1, Policy::Alg1, &p).unwrap();
        assert!(a
            .result
            .powers
            .iter()
            .zip(a.links())
            .all(|(p, l)| *p > 2.0 * l.power_floor));
        let c = run_slot(&s, 1, Policy::ClosedForm, &p).unwrap();
        for (x, y) in a.result.powers.iter().zip(&c.result.powers) {
            assert!(((x - y) / y).abs() < 1e-6);
        }
    }

    #[test]
    fn slot_states_follow_kinematics() {
        let s = scenario(&[(-30.0, 20.0, 4000.0), (12.0, -10.0, 4000.0)]);
        let r = run_slot(&s, 1, Policy::Epa, &SolverParams::default()).unwrap();
        for (v, spec) in r.vehicles.iter().zip(&s.vehicles) {
            let s0 = kinematics_step(spec.start_m, spec.speed_mps, 0.01, 4.0).unwrap();
            let s1 = kinematics_step(s0.longitudinal_m, spec.speed_mps, 0.01, 4.0).unwrap();
            assert_eq!(v.longitudinal_m, s1.longitudinal_m);
            assert_eq!(v.state.dist_m, s1.dist_m);
            assert_eq!(v.state.angle_rad, s1.angle_rad);
        }
    }

    #[test]
    fn noiseless_predictions_track_truth_closely() {
        let s = scenario(&[(-30.0, 20.0, 4000.0)]);
        let v = &slot_vehicles(&s, 2, FloorMode::Exact).unwrap()[0];
        // Angle curvature per slot squared, by central difference around the current slot.
        let xs = trajectory(&s.vehicles[0], &s, 1, 3).unwrap();
        let th: Vec<f64> = xs.iter().map(|&x| road_geometry(x, 4.0).0).collect();
        let curv = (th[0] - 2.0 * th[1] + th[2]).abs();
        assert!(curv > 0.0);
        // Linear extrapolation of a quadratic: 1x curvature for two points one
        // step ahead, 25/6x for a three-point fit two steps ahead.
        assert!((v.tx_angle_est - v.state.angle_rad).abs() < 1.1 * curv);
        assert!((v.rx_angle_est - v.state.angle_rad).abs() < 1.1 * 25.0 / 6.0 * curv);
    }

    #[test]
    fn reproducible_with_seed() {
        let mut s = scenario(&[(-30.0, 20.0, 4000.0), (10.0, 20.0, 8000.0)]);
        s.prediction_noise_rad = 0.01;
        let p = SolverParams::default();
        let a = run_scenario(&s, Policy::Alg2, &p).unwrap();
        let b = run_scenario(&s, Policy::Alg2, &p).unwrap();
        assert_eq!(a, b);
        s.seed += 1;
        let c = run_scenario(&s, Policy::Alg2, &p).unwrap();
        assert_ne!(a[0].vehicles[0].tx_angle_est, c[0].vehicles[0].tx_angle_est);
    }

    #[test]
    fn slot_out_of_range() {
        let s = scenario(&[(-30.0, 20.0, 4000.0)]);
        assert!(run_slot(&s, 3, Policy::Epa, &SolverParams::default()).is_err());
    }

    #[test]
    fn infeasible_slot_names_slot() {
        let mut s = scenario(&[(-30.0, 20.0, 4000.0), (10.0, 20.0, 4000.0)]);
        s.p_max = 1e-3;
        let err = run_slot(&s, 0, Policy::Alg1, &SolverParams::default()).unwrap_err();
        assert!(err.is_infeasible());
        assert!(err.to_string().contains("slot 0"));
    }
}
