//! Parameter sweeps over one scenario axis.
//!
//! ```toml
//! axis = "n_vehicles"
//! values = [2, 4, 6, 8]
//! policies = ["epa", "alg1", "alg2"]
//! repetitions = 20
//! ```

use dfrc_core::scenario::slot_vehicles;
use dfrc_core::{alg1_power_boundary, run_slot, FloorMode, Policy, ScenarioConfig, SolverParams};
use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Relative tolerance of the Alg. 1 power-boundary bisection.
pub const BOUNDARY_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    PMax,
    NVehicles,
    NTx,
    NRx,
    NVehAntennas,
}

impl Axis {
    fn is_count(self) -> bool {
        !matches!(self, Axis::PMax)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub policies: Vec<Policy>,
    /// Seeds per point, counted up from the scenario seed.
    #[serde(default = "one")]
    pub repetitions: u64,
}

fn one() -> u64 {
    1
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(format!("sweep spec: {msg}")));
        if self.values.is_empty() {
            return bad("values must not be empty".into());
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("values must be strictly ascending".into());
        }
        if self.policies.is_empty() {
            return bad("policies must not be empty".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        for &v in &self.values {
            let ok = if self.axis.is_count() {
                v >= 1.0 && v.fract() == 0.0
            } else {
                v > 0.0
            };
            if !(ok && v.is_finite()) {
                return bad(format!("{v} is not a valid {:?} value", self.axis));
            }
        }
        Ok(())
    }
}

/// Base config with the axis set to `value`.
pub fn apply_axis(
    base: &ScenarioConfig,
    axis: Axis,
    value: f64,
) -> Result<ScenarioConfig, CliError> {
    let mut cfg = base.clone();
    let count = value as usize;
    match axis {
        Axis::PMax => cfg.p_max_w = value,
        Axis::NVehicles => cfg = cfg.with_vehicle_count(count)?,
        Axis::NTx => cfg.array.n_tx = count,
        Axis::NRx => cfg.array.n_rx = count,
        Axis::NVehAntennas => cfg.array.n_veh = count,
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub policy: Policy,
    pub seed: u64,
    /// Empty when the policy returned no allocation.
    pub max_delay_s: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub axis_value: f64,
    /// Largest over the seeds; empty when no finite budget works.
    pub min_p_max_w: Option<f64>,
    pub seeds: u64,
}

/// Runs slot 0 for every value, seed and policy, in that nesting order.
pub fn run_sweep(
    base: &ScenarioConfig,
    spec: &SweepSpec,
    params: &SolverParams,
) -> Result<(Vec<SweepRow>, Vec<BoundaryRow>), CliError> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut boundary = Vec::new();
    for &value in &spec.values {
        let point = apply_axis(base, spec.axis, value)?;
        let mut worst_boundary = Some(0.0f64);
        for rep in 0..spec.repetitions {
            let seed = base.seed + rep;
            let scenario = ScenarioConfig {
                seed,
                ..point.clone()
            }
            .to_scenario()?;

            for &policy in &spec.policies {
                let (max_delay_s, feasible) = match run_slot(&scenario, 0, policy, params) {
                    Ok(record) => {
                        record.result.validate(&record.links(), scenario.p_max)?;
                        (Some(record.result.max_delay), record.result.is_feasible())
                    }
                    Err(e) if e.is_infeasible() => {
                        debug!("{:?}={value} {policy} seed {seed}: {e}", spec.axis);
                        (None, false)
                    }
                    Err(e) => return Err(e.into()),
                };
                rows.push(SweepRow {
                    axis_value: value,
                    policy,
                    seed,
                    max_delay_s,
                    feasible,
                });
            }

            let links: Vec<_> = slot_vehicles(&scenario, 0, FloorMode::Relaxed)?
                .iter()
                .map(|v| v.link)
                .collect();
            worst_boundary = match alg1_power_boundary(&links, params, BOUNDARY_REL_TOL) {
                Ok(p) => worst_boundary.map(|w| w.max(p)),
                Err(e) if e.is_infeasible() => {
                    warn!("{:?}={value} seed {seed}: {e}", spec.axis);
                    None
                }
                Err(e) => return Err(e.into()),
            };
        }
        boundary.push(BoundaryRow {
            axis_value: value,
            min_p_max_w: worst_boundary,
            seeds: spec.repetitions,
        });
    }
    Ok((rows, boundary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let spec = SweepSpec::from_toml_str(
            "axis = \"n_tx\"\nvalues = [8, 16]\npolicies = [\"epa\", \"closed_form\"]\n",
        )
        .unwrap();
        assert_eq!(spec.axis, Axis::NTx);
        assert_eq!(spec.policies, vec![Policy::Epa, Policy::ClosedForm]);
        assert_eq!(spec.repetitions, 1);

        for bad in [
            "axis = \"n_tx\"\nvalues = [16, 8]\npolicies = [\"epa\"]\n",
            "axis = \"n_tx\"\nvalues = [8.5]\npolicies = [\"epa\"]\n",
            "axis = \"p_max\"\nvalues = []\npolicies = [\"epa\"]\n",
            "axis = \"p_max\"\nvalues = [1.0]\npolicies = [\"epa\"]\nrepetitions = 0\n",
            "axis = \"speed\"\nvalues = [1.0]\npolicies = [\"epa\"]\n",
            "axis = \"p_max\"\nvalues = [1.0]\npolicies = [\"greedy\"]\n",
        ] {
            assert!(
                matches!(SweepSpec::from_toml_str(bad), Err(CliError::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn axis_application() {
        let base = ScenarioConfig::road_defaults();
        assert_eq!(apply_axis(&base, Axis::PMax, 2.5).unwrap().p_max_w, 2.5);
        assert_eq!(apply_axis(&base, Axis::NRx, 32.0).unwrap().array.n_rx, 32);
        assert_eq!(
            apply_axis(&base, Axis::NVehAntennas, 8.0)
                .unwrap()
                .array
                .n_veh,
            8
        );
        let six = apply_axis(&base, Axis::NVehicles, 6.0).unwrap();
        assert_eq!(six.vehicle_configs().len(), 6);
    }

    #[test]
    fn rows_are_ordered_and_complete() {
        let spec = SweepSpec {
            axis: Axis::PMax,
            values: vec![1.0, 2.0],
            policies: vec![Policy::Alg2, Policy::Epa],
            repetitions: 3,
        };
        let (rows, boundary) = run_sweep(
            &ScenarioConfig::road_defaults(),
            &spec,
            &SolverParams::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!((rows[0].policy, rows[0].seed), (Policy::Alg2, 0));
        assert_eq!((rows[1].policy, rows[1].seed), (Policy::Epa, 0));
        assert_eq!(rows[2].seed, 1);
        assert_eq!(boundary.len(), 2);
        // The boundary does not depend on the budget being swept.
        assert_eq!(boundary[0].min_p_max_w, boundary[1].min_p_max_w);
    }
}
