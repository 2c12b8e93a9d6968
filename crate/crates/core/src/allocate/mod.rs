//! Power allocation policies for the min-max delay problem.
//!
//! Every policy takes the per-vehicle [`LinkCoefficients`] of one slot and
//! the RSU power budget, and returns an [`AllocationResult`]. The policies
//! are:
//!
//! * [`epa`]: equal split, the baseline;
//! * [`closed_form_equal_payload`]: the exact optimum when all payloads match;
//! * [`alg1_delay_bisection`]: bisection on the common delay;
//! * [`alg2_complementary`]: pairwise power transfers from the fastest to the
//!   slowest vehicle, honouring the exact floors;
//! * [`oracle_grid_search`]: exhaustive simplex scan for verification.

mod bisection;
mod complementary;
mod oracle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bisection::{alg1_delay_bisection, alg1_iteration_bound, alg1_power_boundary, BracketStep};
pub use complementary::{alg2_complementary, alg2_spread_bound};
pub use oracle::oracle_grid_search;

use crate::error::{Error, Result};
use crate::latency::{delay, LinkCoefficients};
use crate::pcrb::FloorMode;

/// Relative slack on budget and floor checks.
pub const BUDGET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Epa,
    ClosedForm,
    Alg1,
    Alg2,
    Oracle,
}

impl Policy {
    pub const ALL: [Policy; 5] = [
        Policy::Epa,
        Policy::ClosedForm,
        Policy::Alg1,
        Policy::Alg2,
        Policy::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Epa => "epa",
            Policy::ClosedForm => "closed_form",
            Policy::Alg1 => "alg1",
            Policy::Alg2 => "alg2",
            Policy::Oracle => "oracle",
        }
    }

    /// Floors each policy is built against. The closed form and Alg. 1 work
    /// on the relaxed PCRB constraints; the rest see the exact ones.
    pub fn floor_mode(self) -> FloorMode {
        match self {
            Policy::ClosedForm | Policy::Alg1 => FloorMode::Relaxed,
            Policy::Epa | Policy::Alg2 | Policy::Oracle => FloorMode::Exact,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s || (s == "closed-form" && *p == Policy::ClosedForm))
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown policy '{s}' (expected epa, closed_form, alg1, alg2 or oracle)"
                ))
            })
    }
}

/// Tolerances and limits for the iterative policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    /// Alg. 1 stops once the delay bracket is this narrow, seconds.
    #[serde(rename = "eps_delay_s")]
    pub eps_delay: f64,
    /// Alg. 2 stops once its transfer step drops to this, watts.
    #[serde(rename = "eps_power_w")]
    pub eps_power: f64,
    /// Initial Alg. 2 transfer step; `None` means `p_max / (2K)`.
    #[serde(rename = "delta_p_init_w")]
    pub delta_p_init: Option<f64>,
    pub max_iters: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            eps_delay: 1e-9,
            eps_power: 1e-9,
            delta_p_init: None,
            max_iters: 1_000_000,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.eps_delay) || !positive(self.eps_power) {
            return Err(Error::domain("solver tolerances must be finite and > 0"));
        }
        if let Some(dp) = self.delta_p_init {
            if !positive(dp) {
                return Err(Error::domain("delta_p_init must be finite and > 0"));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub policy: Policy,
    pub powers: Vec<f64>,
    pub delays: Vec<f64>,
    pub max_delay: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the allocation misses a floor; the powers are still reported.
    pub infeasible_reason: Option<String>,
    /// Alg. 1 only: delay bracket after each iteration, starting at iteration 0.
    pub bracket: Vec<BracketStep>,
}

impl AllocationResult {
    pub(crate) fn from_powers(
        policy: Policy,
        links: &[LinkCoefficients],
        powers: Vec<f64>,
    ) -> Result<Self> {
        let delays = links
            .iter()
            .zip(&powers)
            .map(|(l, &p)| delay(p, l))
            .collect::<Result<Vec<_>>>()?;
        let max_delay = delays.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            policy,
            powers,
            delays,
            max_delay,
            iterations: 0,
            converged: true,
            infeasible_reason: None,
            bracket: Vec::new(),
        })
    }

    pub fn is_feasible(&self) -> bool {
        self.infeasible_reason.is_none()
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn min_delay(&self) -> f64 {
        self.delays.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(max - min) / max` over the per-vehicle delays.
    pub fn delay_spread(&self) -> f64 {
        (self.max_delay - self.min_delay()) / self.max_delay
    }

    /// Re-checks the result invariants against the links it was built from.
    pub fn validate(&self, links: &[LinkCoefficients], p_max: f64) -> Result<()> {
        let k = links.len();
        if self.powers.len() != k || self.delays.len() != k {
            return Err(Error::Contract(format!(
                "{}: result has {} powers for {k} links",
                self.policy,
                self.powers.len()
            )));
        }
        if self.total_power() > p_max * (1.0 + BUDGET_TOL) {
            return Err(Error::Contract(format!(
                "{}: total power {} exceeds budget {p_max}",
                self.policy,
                self.total_power()
            )));
        }
        let max = self
            .delays
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if max != self.max_delay {
            return Err(Error::Contract(format!(
                "{}: max_delay out of sync",
                self.policy
            )));
        }
        if self.is_feasible() {
            if let Some(v) = floor_violation(links, &self.powers) {
                return Err(Error::Contract(format!(
                    "{}: marked feasible but vehicle {v} is below its floor",
                    self.policy
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of comparing the summed floors against the budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub total_floor: f64,
    pub p_max: f64,
    /// `total_floor - p_max` when infeasible, else zero.
    pub deficit: f64,
}

impl Feasibility {
    pub(crate) fn into_error(self, context: &str) -> Error {
        Error::infeasible(
            format!(
                "{context}: floors need {:.6e} W but the budget is {:.6e} W (deficit {:.6e} W)",
                self.total_floor, self.p_max, self.deficit
            ),
            Some(self.deficit),
        )
    }
}

pub(crate) fn validate_inputs(links: &[LinkCoefficients], p_max: f64) -> Result<()> {
    if links.is_empty() {
        return Err(Error::domain("at least one link is required"));
    }
    if !(p_max.is_finite() && p_max > 0.0) {
        return Err(Error::domain(format!(
            "p_max must be finite and > 0, got {p_max}"
        )));
    }
    links.iter().try_for_each(LinkCoefficients::validate)
}

/// Feasible iff the floors fit inside the budget.
pub fn check_feasible(links: &[LinkCoefficients], p_max: f64) -> Result<Feasibility> {
    validate_inputs(links, p_max)?;
    let total_floor: f64 = links.iter().map(|l| l.power_floor).sum();
    let feasible = total_floor <= p_max;
    Ok(Feasibility {
        feasible,
        total_floor,
        p_max,
        deficit: if feasible { 0.0 } else { total_floor - p_max },
    })
}

/// First vehicle whose power is below its floor, if any.
pub(crate) fn floor_violation(links: &[LinkCoefficients], powers: &[f64]) -> Option<usize> {
    links
        .iter()
        .zip(powers)
        .position(|(l, &p)| p < l.power_floor * (1.0 - BUDGET_TOL))
}

/// Equal power split. Floors are reported, never enforced.
pub fn epa(links: &[LinkCoefficients], p_max: f64) -> Result<AllocationResult> {
    validate_inputs(links, p_max)?;
    let share = p_max / links.len() as f64;
    let mut result = AllocationResult::from_powers(Policy::Epa, links, vec![share; links.len()])?;
    if let Some(k) = floor_violation(links, &result.powers) {
        result.infeasible_reason = Some(format!(
            "equal share {share:.6e} W is below the floor {:.6e} W of vehicle {}",
            links[k].power_floor, links[k].vehicle_id
        ));
    }
    Ok(result)
}

/// Optimal allocation when every vehicle carries the same payload:
/// `p_k = p_max / (b_k * sum_j 1/b_j)`, which equalizes `b_k p_k`.
pub fn closed_form_equal_payload(
    links: &[LinkCoefficients],
    p_max: f64,
) -> Result<AllocationResult> {
    validate_inputs(links, p_max)?;
    let (a_min, a_max) = links.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), l| {
        (lo.min(l.a_coef), hi.max(l.a_coef))
    });
    if (a_max - a_min) / a_max >= 1e-12 {
        return Err(Error::Contract(
            "closed form needs equal payloads; use alg1 for unequal payloads".into(),
        ));
    }

    let inv_sum: f64 = links.iter().map(|l| l.b_coef.recip()).sum();
    let powers = links.iter().map(|l| p_max / (l.b_coef * inv_sum)).collect();
    let result = AllocationResult::from_powers(Policy::ClosedForm, links, powers)?;
    if let Some(k) = floor_violation(links, &result.powers) {
        return Err(Error::infeasible(
            format!(
                "closed form gives vehicle {} {:.6e} W, below its floor {:.6e} W; use alg2",
                links[k].vehicle_id, result.powers[k], links[k].power_floor
            ),
            None,
        ));
    }
    Ok(result)
}

/// Common delay of the equal-payload optimum, `a / ln(1 + p_max / sum_k 1/b_k)`.
pub fn closed_form_common_delay(a_coef: f64, links: &[LinkCoefficients], p_max: f64) -> f64 {
    let inv_sum: f64 = links.iter().map(|l| l.b_coef.recip()).sum();
    a_coef / (p_max / inv_sum).ln_1p()
}
