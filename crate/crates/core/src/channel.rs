//! ULA array responses and link gains between the roadside unit and vehicles.
//!
//! Only squared magnitudes feed the rate expression, so unit-modulus factors
//! (Doppler phasor, carrier phase of the path gain) never enter a power gain.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Antenna counts, RF parameters and noise levels shared by every link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    /// RSU transmit antennas.
    pub n_tx: usize,
    /// RSU receive antennas.
    pub n_rx: usize,
    /// Antennas per vehicle.
    pub n_veh: usize,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// Communication noise variance (linear).
    pub noise_comm: f64,
    /// Radar noise variance (linear).
    pub noise_radar: f64,
    /// Dimensionless path-gain constant of the inverse-distance law.
    #[serde(default = "default_alpha")]
    pub alpha_const: f64,
}

fn default_alpha() -> f64 {
    1.0
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            n_tx: 16,
            n_rx: 16,
            n_veh: 16,
            carrier_hz: 30e9,
            bandwidth_hz: 400e6,
            noise_comm: 0.0025,
            noise_radar: 0.0025,
            alpha_const: 1.0,
        }
    }
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 || self.n_veh == 0 {
            return Err(Error::domain("antenna counts must be at least 1"));
        }
        let positive = [
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_comm", self.noise_comm),
            ("noise_radar", self.noise_radar),
            ("alpha_const", self.alpha_const),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Communication array gain factor squared, N_t * N_v.
    pub fn comm_array_gain(&self) -> f64 {
        (self.n_tx * self.n_veh) as f64
    }

    /// Radar array gain factor squared, N_t * N_r.
    pub fn radar_array_gain(&self) -> f64 {
        (self.n_tx * self.n_rx) as f64
    }
}

/// Position state of one vehicle in one slot, plus its pending payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub angle_rad: f64,
    pub dist_m: f64,
    pub speed_mps: f64,
    pub radar_coeff: Complex64,
    pub payload_bits: f64,
}

impl VehicleState {
    pub fn validate(&self) -> Result<()> {
        check_angle(self.angle_rad)?;
        if !(self.dist_m.is_finite() && self.dist_m > 0.0) {
            return Err(Error::domain(format!(
                "distance must be > 0, got {}",
                self.dist_m
            )));
        }
        if !self.speed_mps.is_finite() {
            return Err(Error::domain("speed must be finite"));
        }
        if !(self.payload_bits.is_finite() && self.payload_bits > 0.0) {
            return Err(Error::domain(format!(
                "payload must be > 0 bits, got {}",
                self.payload_bits
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_angle(angle_rad: f64) -> Result<()> {
    if angle_rad.is_finite() && angle_rad > 0.0 && angle_rad < PI {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "angle must lie in (0, pi), got {angle_rad}"
        )))
    }
}

/// Half-wavelength ULA response, normalized to unit norm.
///
/// Element `m` is `exp(-j*m*pi*cos(angle)) / sqrt(n)`.
pub fn steering_vector(angle_rad: f64, n: usize) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::domain("steering vector needs at least one element"));
    }
    check_angle(angle_rad)?;
    let scale = (1.0 / n as f64).sqrt();
    let step = -PI * angle_rad.cos();
    Ok((0..n)
        .map(|m| Complex64::from_polar(scale, step * m as f64))
        .collect())
}

/// `x^H y` for equal-length vectors.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Large-scale fading factor `alpha_const / d * exp(j*2*pi*f_c*d/c)`.
pub fn large_scale_gain(dist_m: f64, cfg: &ArrayConfig) -> Result<Complex64> {
    if !(dist_m.is_finite() && dist_m > 0.0) {
        return Err(Error::domain(format!("distance must be > 0, got {dist_m}")));
    }
    // Reduce to a fractional cycle count before scaling by 2*pi; d*f_c/c is
    // in the thousands for mmWave ranges.
    let cycles = cfg.carrier_hz * dist_m / SPEED_OF_LIGHT;
    let phase = 2.0 * PI * cycles.fract();
    Ok(Complex64::from_polar(cfg.alpha_const / dist_m, phase))
}

/// Effective power gain `kappa^2 |w^H H_C u|^2` of the matched-filter link.
///
/// The precoder is steered at `tx_angle_est`, the vehicle detector at
/// `rx_angle_est`; the channel itself is evaluated at the true angle.
pub fn comm_channel_gain(
    true_state: &VehicleState,
    tx_angle_est: f64,
    rx_angle_est: f64,
    cfg: &ArrayConfig,
) -> Result<f64> {
    let alpha = large_scale_gain(true_state.dist_m, cfg)?;
    let a_true = steering_vector(true_state.angle_rad, cfg.n_tx)?;
    let v_true = steering_vector(true_state.angle_rad, cfg.n_veh)?;
    let precoder = steering_vector(tx_angle_est, cfg.n_tx)?;
    let detector = steering_vector(rx_angle_est, cfg.n_veh)?;

    // H_C = alpha v(theta) a(theta)^H, so w^H H_C u factors into two inner products.
    let rx_match = inner(&detector, &v_true).norm_sqr();
    let tx_match = inner(&a_true, &precoder).norm_sqr();
    Ok(cfg.comm_array_gain() * alpha.norm_sqr() * rx_match * tx_match)
}

/// One-way Doppler shift seen by the vehicle, Hz.
pub fn doppler_shift_comm(state: &VehicleState, cfg: &ArrayConfig) -> Result<f64> {
    state.validate()?;
    Ok(state.speed_mps * state.angle_rad.cos() * cfg.carrier_hz / SPEED_OF_LIGHT)
}

/// Round-trip Doppler shift of the radar echo, Hz.
pub fn doppler_shift_radar(state: &VehicleState, cfg: &ArrayConfig) -> Result<f64> {
    Ok(2.0 * doppler_shift_comm(state, cfg)?)
}

/// Round-trip echo delay `2d/c`, seconds.
pub fn echo_delay(state: &VehicleState) -> Result<f64> {
    if !(state.dist_m.is_finite() && state.dist_m > 0.0) {
        return Err(Error::domain(format!(
            "distance must be > 0, got {}",
            state.dist_m
        )));
    }
    Ok(2.0 * state.dist_m / SPEED_OF_LIGHT)
}
