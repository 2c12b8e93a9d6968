//! Posterior Cramér-Rao bounds for angle and range, and the per-vehicle
//! power floors implied by PCRB thresholds.
//!
//! With prior Fisher information `J_p` and observed information `p * J_o`
//! (linear in transmit power), the bound matrix is `(p J_o + J_p)^{-1}`.
//! Writing `J_p = S S` with `S` the Hermitian square root and
//! `S^{-1} J_o S^{-1} = U diag(eigs) U^H`, the bound becomes
//! `R (p diag(eigs) + I)^{-1} R^H` with `R = S^{-1} U`. Its first two diagonal
//! entries are the per-parameter sums evaluated by [`pcrb_angle`] and
//! [`pcrb_dist`], with `b1_sq`/`b2_sq` the squared magnitudes of the first two
//! rows of `R`.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix4 = Matrix4<Complex64>;

/// Hermitian asymmetry above this is rejected.
const HERMITIAN_TOL: f64 = 1e-9;
/// Smallest admissible prior eigenvalue.
const PRIOR_MIN_EIG: f64 = 1e-12;
/// Absolute tolerance of the exact-floor bisection, watts.
const FLOOR_TOL_W: f64 = 1e-9;
/// Largest power probed when bracketing the exact floor.
const FLOOR_BRACKET_MAX_W: f64 = (1u64 << 60) as f64;

/// Eigen-form of one vehicle's PCRB as a function of its transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcrbModel {
    pub b1_sq: [f64; 4],
    pub b2_sq: [f64; 4],
    /// Eigenvalues per unit transmit power, sorted descending.
    pub eigs: [f64; 4],
}

impl PcrbModel {
    pub fn new(b1_sq: [f64; 4], b2_sq: [f64; 4], eigs: [f64; 4]) -> Result<Self> {
        let model = Self { b1_sq, b2_sq, eigs };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.b1_sq.iter().chain(&self.b2_sq).chain(&self.eigs);
        if all.clone().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain("PCRB model entries must be finite and >= 0"));
        }
        if !self.eigs.iter().any(|&e| e > 0.0) {
            return Err(Error::domain(
                "PCRB model needs at least one positive eigenvalue",
            ));
        }
        if !self.b1_sq.iter().any(|&b| b > 0.0) || !self.b2_sq.iter().any(|&b| b > 0.0) {
            return Err(Error::domain(
                "PCRB model rows must each have a positive entry",
            ));
        }
        Ok(())
    }
}

/// Upper bounds on the angle (rad^2) and range (m^2) PCRBs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcrbThresholds {
    #[serde(rename = "xi_theta_rad2")]
    pub xi_theta: f64,
    #[serde(rename = "xi_dist_m2")]
    pub xi_dist: f64,
}

impl PcrbThresholds {
    pub fn new(xi_theta: f64, xi_dist: f64) -> Result<Self> {
        let thr = Self { xi_theta, xi_dist };
        thr.validate()?;
        Ok(thr)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi_theta.is_finite() && self.xi_theta > 0.0)
            || !(self.xi_dist.is_finite() && self.xi_dist > 0.0)
        {
            return Err(Error::domain("PCRB thresholds must be finite and > 0"));
        }
        Ok(())
    }
}

/// Which form of the PCRB constraints produces the power floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FloorMode {
    /// Drops the `+1` in each denominator; closed form, conservative.
    Relaxed,
    /// Solves the original constraints numerically.
    Exact,
}

fn row_bound(p: f64, b_sq: &[f64; 4], eigs: &[f64; 4]) -> Result<f64> {
    if !(p >= 0.0) || p.is_infinite() {
        return Err(Error::domain(format!(
            "power must be finite and >= 0, got {p}"
        )));
    }
    Ok(b_sq.iter().zip(eigs).map(|(b, e)| b / (p * e + 1.0)).sum())
}

/// Angle PCRB at transmit power `p`.
pub fn pcrb_angle(p: f64, model: &PcrbModel) -> Result<f64> {
    row_bound(p, &model.b1_sq, &model.eigs)
}

/// Range PCRB at transmit power `p`.
pub fn pcrb_dist(p: f64, model: &PcrbModel) -> Result<f64> {
    row_bound(p, &model.b2_sq, &model.eigs)
}

fn relaxed_row(b_sq: &[f64; 4], eigs: &[f64; 4], xi: f64, label: &str) -> Result<f64> {
    let mut sum = 0.0;
    for (m, (&b, &e)) in b_sq.iter().zip(eigs).enumerate() {
        if b > 0.0 {
            if e <= 0.0 {
                return Err(Error::infeasible(
                    format!("relaxed {label} bound: term {m} has zero eigenvalue"),
                    None,
                ));
            }
            sum += b / e;
        }
    }
    Ok(sum / xi)
}

/// Minimum power meeting the relaxed constraints, `max(p_theta, p_d)`.
pub fn power_floor_relaxed(model: &PcrbModel, thr: &PcrbThresholds) -> Result<f64> {
    let p_theta = relaxed_row(&model.b1_sq, &model.eigs, thr.xi_theta, "angle")?;
    let p_dist = relaxed_row(&model.b2_sq, &model.eigs, thr.xi_dist, "distance")?;
    Ok(p_theta.max(p_dist))
}

/// Smallest power meeting both exact PCRB thresholds, to within 1e-9 W.
///
/// The returned value always satisfies both constraints.
pub fn power_floor_exact(model: &PcrbModel, thr: &PcrbThresholds) -> Result<f64> {
    let meets = |p: f64| -> bool {
        // Both bounds are total on p >= 0.
        pcrb_angle(p, model).unwrap() <= thr.xi_theta && pcrb_dist(p, model).unwrap() <= thr.xi_dist
    };
    if meets(0.0) {
        return Ok(0.0);
    }

    for (b_sq, xi, label) in [
        (&model.b1_sq, thr.xi_theta, "angle"),
        (&model.b2_sq, thr.xi_dist, "distance"),
    ] {
        let limit: f64 = b_sq
            .iter()
            .zip(&model.eigs)
            .filter(|(_, &e)| e <= 0.0)
            .map(|(b, _)| b)
            .sum();
        if limit >= xi && b_sq.iter().sum::<f64>() > xi {
            return Err(Error::infeasible(
                format!("{label} PCRB cannot drop below {limit:.6e} (threshold {xi:.6e})"),
                None,
            ));
        }
    }

    let mut hi = 1.0;
    while !meets(hi) {
        hi *= 2.0;
        if hi > FLOOR_BRACKET_MAX_W {
            return Err(Error::infeasible(
                "PCRB thresholds not met below 2^60 W",
                None,
            ));
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    while hi - lo > FLOOR_TOL_W {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn power_floor(model: &PcrbModel, thr: &PcrbThresholds, mode: FloorMode) -> Result<f64> {
    match mode {
        FloorMode::Relaxed => power_floor_relaxed(model, thr),
        FloorMode::Exact => power_floor_exact(model, thr),
    }
}

fn max_asymmetry(m: &ComplexMatrix4) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn hermitian_part(m: &ComplexMatrix4) -> ComplexMatrix4 {
    (m + m.adjoint()).scale(0.5)
}

/// Reduces a prior/observed Fisher pair to the per-power eigen-form.
///
/// `unit_power_observed_fisher` is the observed information at 1 W; the
/// observed information at power `p` is assumed to be `p` times it.
pub fn build_pcrb_model(
    prior_fisher: &ComplexMatrix4,
    unit_power_observed_fisher: &ComplexMatrix4,
) -> Result<PcrbModel> {
    if max_asymmetry(prior_fisher) > HERMITIAN_TOL {
        return Err(Error::domain("prior Fisher matrix is not Hermitian"));
    }
    if max_asymmetry(unit_power_observed_fisher) > HERMITIAN_TOL {
        return Err(Error::domain("observed Fisher matrix is not Hermitian"));
    }

    let prior = SymmetricEigen::new(hermitian_part(prior_fisher));
    let min_prior = prior.eigenvalues.min();
    if !(min_prior > PRIOR_MIN_EIG) {
        return Err(Error::domain(format!(
            "prior Fisher matrix is not positive definite (min eigenvalue {min_prior:.3e})"
        )));
    }
    let inv_sqrt_diag = prior
        .eigenvalues
        .map(|l| Complex64::new(l.sqrt().recip(), 0.0));
    let s_inv = prior.eigenvectors
        * ComplexMatrix4::from_diagonal(&inv_sqrt_diag)
        * prior.eigenvectors.adjoint();

    let observed = hermitian_part(unit_power_observed_fisher);
    let whitened = hermitian_part(&(s_inv * observed * s_inv));
    let eig = SymmetricEigen::new(whitened);

    let scale = observed.norm().max(1.0) * prior.eigenvalues.max().recip().max(1.0);
    let min_obs = eig.eigenvalues.min();
    if min_obs < -HERMITIAN_TOL * scale {
        return Err(Error::domain(format!(
            "observed Fisher matrix is not positive semidefinite (eigenvalue {min_obs:.3e})"
        )));
    }

    let rows = s_inv * eig.eigenvectors;

    let mut order = [0usize, 1, 2, 3];
    // Stable: equal eigenvalues keep solver order.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut model = PcrbModel {
        b1_sq: [0.0; 4],
        b2_sq: [0.0; 4],
        eigs: [0.0; 4],
    };
    for (slot, &m) in order.iter().enumerate() {
        model.eigs[slot] = eig.eigenvalues[m].max(0.0);
        model.b1_sq[slot] = rows[(0, m)].norm_sqr();
        model.b2_sq[slot] = rows[(1, m)].norm_sqr();
    }
    Ok(model)
}

/// Diagonal prior Fisher information from per-parameter prior standard
/// deviations `[angle, distance, speed, radar coefficient]`.
pub fn diagonal_prior(prior_std: [f64; 4]) -> Result<ComplexMatrix4> {
    if prior_std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::domain(
            "prior standard deviations must be finite and > 0",
        ));
    }
    let diag =
        nalgebra::Vector4::from_iterator(prior_std.iter().map(|s| Complex64::new(s.powi(-2), 0.0)));
    Ok(ComplexMatrix4::from_diagonal(&diag))
}

/// Unit-power observed Fisher information `G^H G` from a sensitivity matrix.
pub fn observed_from_sensitivity(sensitivity: &ComplexMatrix4) -> ComplexMatrix4 {
    sensitivity.adjoint() * sensitivity
}
