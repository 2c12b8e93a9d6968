//! Shannon rate, transmit delay and the per-vehicle link coefficients that
//! every allocator consumes.
//!
//! Delay is kept in the form `T = a / ln(1 + b p)` with `a = (D / B) ln 2`,
//! which equals `D / R` for the rate `R = B log2(1 + b p)`.

use std::f64::consts::LN_2;

use crate::channel::{comm_channel_gain, ArrayConfig, VehicleState};
use crate::error::{Error, Result};
use crate::pcrb::{power_floor, FloorMode, PcrbModel, PcrbThresholds};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkCoefficients {
    pub vehicle_id: usize,
    /// Payload term `(D / B) ln 2`, seconds.
    pub a_coef: f64,
    /// Effective SNR per watt.
    pub b_coef: f64,
    /// Minimum power this vehicle must receive, watts.
    pub power_floor: f64,
}

impl LinkCoefficients {
    pub fn new(vehicle_id: usize, a_coef: f64, b_coef: f64, power_floor: f64) -> Result<Self> {
        let link = Self {
            vehicle_id,
            a_coef,
            b_coef,
            power_floor,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_coef.is_finite() && self.a_coef > 0.0) {
            return Err(Error::domain(format!(
                "a_coef must be > 0, got {}",
                self.a_coef
            )));
        }
        if !(self.b_coef.is_finite() && self.b_coef > 0.0) {
            return Err(Error::domain(format!(
                "b_coef must be > 0, got {}",
                self.b_coef
            )));
        }
        if !(self.power_floor.is_finite() && self.power_floor >= 0.0) {
            return Err(Error::domain(format!(
                "power floor must be finite and >= 0, got {}",
                self.power_floor
            )));
        }
        Ok(())
    }

    /// Power needed to reach delay `t`: `(exp(a / t) - 1) / b`.
    pub fn power_for_delay(&self, t: f64) -> f64 {
        (self.a_coef / t).exp_m1() / self.b_coef
    }
}

/// Payload coefficient `(D / B) ln 2`.
pub fn payload_coef(payload_bits: f64, bandwidth_hz: f64) -> f64 {
    payload_bits / bandwidth_hz * LN_2
}

/// Achievable rate `B log2(1 + b p)`, bits/s.
pub fn rate(p: f64, b_coef: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(p >= 0.0 && b_coef >= 0.0 && bandwidth_hz >= 0.0) {
        return Err(Error::domain("rate inputs must be >= 0"));
    }
    Ok(bandwidth_hz * (b_coef * p).ln_1p() / LN_2)
}

/// Transmit delay `a / ln(1 + b p)`, seconds. Zero power has no finite delay.
pub fn delay(p: f64, link: &LinkCoefficients) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!(
            "delay needs finite power > 0, got {p}"
        )));
    }
    let snr = link.b_coef * p;
    if !(snr > 0.0) {
        return Err(Error::domain("delay needs a positive SNR"));
    }
    Ok(link.a_coef / snr.ln_1p())
}

/// Power that makes the delay exactly `max_delay_s`.
pub fn deadline_floor(a_coef: f64, b_coef: f64, max_delay_s: f64) -> f64 {
    (a_coef / max_delay_s).exp_m1() / b_coef
}

/// Slot-level quantities shared by every link built in that slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkContext {
    pub array: ArrayConfig,
    pub thresholds: PcrbThresholds,
    pub slot_s: f64,
    pub deadline_s: f64,
    pub floor_mode: FloorMode,
}

impl LinkContext {
    /// Tightest delay any vehicle may see, `min(slot, deadline)`.
    pub fn max_delay_s(&self) -> f64 {
        self.slot_s.min(self.deadline_s)
    }
}

/// Builds the coefficients of one vehicle given the angle estimates used to
/// steer the precoder and the vehicle detector.
pub fn make_link(
    vehicle_id: usize,
    state: &VehicleState,
    tx_angle_est: f64,
    rx_angle_est: f64,
    model: &PcrbModel,
    ctx: &LinkContext,
) -> Result<LinkCoefficients> {
    state.validate()?;
    ctx.array.validate()?;
    ctx.thresholds.validate()?;
    let t_max = ctx.max_delay_s();
    if !(t_max > 0.0) {
        return Err(Error::domain("min(slot, deadline) must be > 0"));
    }

    let a_coef = payload_coef(state.payload_bits, ctx.array.bandwidth_hz);
    let gain = comm_channel_gain(state, tx_angle_est, rx_angle_est, &ctx.array)?;
    let b_coef = gain / ctx.array.noise_comm;
    if !(b_coef > 0.0) {
        return Err(Error::domain(format!(
            "vehicle {vehicle_id}: beam mismatch leaves no effective gain"
        )));
    }

    let p_deadline = deadline_floor(a_coef, b_coef, t_max);
    let p_sensing = power_floor(model, &ctx.thresholds, ctx.floor_mode)?;
    LinkCoefficients::new(vehicle_id, a_coef, b_coef, p_deadline.max(p_sensing))
}
