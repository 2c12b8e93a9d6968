//! TOML scenario files.
//!
//! Physical quantities carry their unit in the key name. A minimal file:
//!
//! ```toml
//! p_max_w = 1.0
//!
//! [thresholds]
//! xi_theta_rad2 = 5e-5
//! xi_dist_m2 = 0.1
//!
//! [sensing]
//! mode = "direct"
//! b1_sq = [1e-4, 0.0, 0.0, 0.0]
//! b2_sq = [0.0, 0.25, 0.0, 0.0]
//! eigs = [100.0, 100.0, 100.0, 100.0]
//!
//! [[vehicles]]
//! start_m = -30.0
//! speed_mps = 20.0
//! ```
//!
//! See `configs/default.toml` for every key.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::allocate::SolverParams;
use crate::channel::ArrayConfig;
use crate::error::{Error, Result};
use crate::pcrb::{
    build_pcrb_model, diagonal_prior, observed_from_sensitivity, ComplexMatrix4, PcrbModel,
    PcrbThresholds,
};
use crate::scenario::{RoadScenario, VehicleSpec};

/// Payload used when a vehicle does not set one, bits.
pub const DEFAULT_PAYLOAD_BITS: f64 = 4000.0;

/// How a vehicle's PCRB model is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum SensingSpec {
    /// Eigen-form given directly.
    Direct {
        b1_sq: [f64; 4],
        b2_sq: [f64; 4],
        eigs: [f64; 4],
    },
    /// Diagonal prior from standard deviations of `[angle_rad, dist_m,
    /// speed_mps, radar_coeff]` and unit-power observed information `G^T G`.
    Matrix {
        prior_std: [f64; 4],
        sensitivity: [[f64; 4]; 4],
    },
}

impl SensingSpec {
    pub fn model(&self) -> Result<PcrbModel> {
        match *self {
            SensingSpec::Direct { b1_sq, b2_sq, eigs } => PcrbModel::new(b1_sq, b2_sq, eigs),
            SensingSpec::Matrix {
                prior_std,
                sensitivity,
            } => {
                let prior = diagonal_prior(prior_std)?;
                let g = ComplexMatrix4::from_fn(|r, c| Complex64::new(sensitivity[r][c], 0.0));
                let model = build_pcrb_model(&prior, &observed_from_sensitivity(&g))?;
                model.validate()?;
                Ok(model)
            }
        }
    }

    /// Synthetic sensing model used by the bundled scenarios.
    pub fn default_matrix() -> Self {
        SensingSpec::Matrix {
            prior_std: [0.01, 0.5, 1.0, 0.1],
            sensitivity: [
                [1000.0, 0.0, 0.0, 0.0],
                [50.0, 20.0, 0.0, 0.0],
                [0.0, 2.0, 5.0, 0.0],
                [0.0, 0.0, 1.0, 5.0],
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleConfig {
    pub start_m: f64,
    pub speed_mps: f64,
    #[serde(default = "default_payload")]
    pub payload_bits: f64,
    #[serde(default)]
    pub sensing: Option<SensingSpec>,
}

/// Evenly spaced vehicles, generated in order from `start_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetConfig {
    pub count: usize,
    pub start_m: f64,
    pub spacing_m: f64,
    pub speed_mps: f64,
    /// Speed added per vehicle index.
    #[serde(default)]
    pub speed_step_mps: f64,
    #[serde(default = "default_payload")]
    pub payload_bits: f64,
}

fn default_payload() -> f64 {
    DEFAULT_PAYLOAD_BITS
}
fn default_slot() -> f64 {
    0.01
}
fn default_offset() -> f64 {
    4.0
}
fn default_slots() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_slots")]
    pub n_slots: usize,
    #[serde(default = "default_slot")]
    pub slot_s: f64,
    #[serde(default)]
    pub deadline_s: Option<f64>,
    #[serde(default = "default_offset")]
    pub rsu_offset_m: f64,
    pub p_max_w: f64,
    #[serde(default)]
    pub prediction_noise_rad: f64,
    #[serde(default)]
    pub array: ArrayConfig,
    pub thresholds: PcrbThresholds,
    #[serde(default)]
    pub solver: SolverParams,
    /// Sensing model for vehicles that do not set their own.
    #[serde(default)]
    pub sensing: Option<SensingSpec>,
    #[serde(default)]
    pub vehicles: Vec<VehicleConfig>,
    #[serde(default)]
    pub fleet: Option<FleetConfig>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Four vehicles on the default road with the bundled sensing model.
    pub fn road_defaults() -> Self {
        Self {
            seed: 0,
            n_slots: 1,
            slot_s: 0.01,
            deadline_s: None,
            rsu_offset_m: 4.0,
            p_max_w: 1.0,
            prediction_noise_rad: 0.0,
            array: ArrayConfig::default(),
            thresholds: PcrbThresholds {
                xi_theta: 5e-5,
                xi_dist: 0.1,
            },
            solver: SolverParams::default(),
            sensing: Some(SensingSpec::default_matrix()),
            vehicles: Vec::new(),
            fleet: Some(FleetConfig {
                count: 4,
                start_m: -30.0,
                spacing_m: 20.0,
                speed_mps: 15.0,
                speed_step_mps: 2.5,
                payload_bits: DEFAULT_PAYLOAD_BITS,
            }),
        }
    }

    /// Explicit vehicles first, then fleet-generated ones.
    pub fn vehicle_configs(&self) -> Vec<VehicleConfig> {
        let mut out = self.vehicles.clone();
        if let Some(f) = &self.fleet {
            out.extend((0..f.count).map(|i| VehicleConfig {
                start_m: f.start_m + i as f64 * f.spacing_m,
                speed_mps: f.speed_mps + i as f64 * f.speed_step_mps,
                payload_bits: f.payload_bits,
                sensing: None,
            }));
        }
        out
    }

    /// Sets the vehicle count: resizes the fleet when there is one, else
    /// keeps a prefix of the explicit list.
    pub fn with_vehicle_count(&self, count: usize) -> Result<Self> {
        let mut c = self.clone();
        match &mut c.fleet {
            Some(f) if count >= c.vehicles.len() => f.count = count - c.vehicles.len(),
            _ if count <= c.vehicles.len() => {
                c.vehicles.truncate(count);
                c.fleet = None;
            }
            _ => {
                return Err(Error::Config(format!(
                    "cannot build {count} vehicles from {} explicit entries without a [fleet]",
                    c.vehicles.len()
                )))
            }
        }
        Ok(c)
    }

    pub fn to_scenario(&self) -> Result<RoadScenario> {
        let vehicles = self
            .vehicle_configs()
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                let sensing = v
                    .sensing
                    .as_ref()
                    .or(self.sensing.as_ref())
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "vehicle {k} has no sensing model and no [sensing] default"
                        ))
                    })?;
                let model = sensing
                    .model()
                    .map_err(|e| Error::Config(format!("vehicle {k} sensing: {e}")))?;
                Ok(VehicleSpec {
                    start_m: v.start_m,
                    speed_mps: v.speed_mps,
                    payload_bits: v.payload_bits,
                    model,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let scenario = RoadScenario {
            rsu_offset_m: self.rsu_offset_m,
            slot_s: self.slot_s,
            n_slots: self.n_slots,
            vehicles,
            deadline_s: self.deadline_s,
            p_max: self.p_max_w,
            thresholds: self.thresholds,
            arrays: self.array,
            prediction_noise_rad: self.prediction_noise_rad,
            seed: self.seed,
        };
        scenario
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.solver
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
p_max_w = 1.0

[thresholds]
xi_theta_rad2 = 5e-5
xi_dist_m2 = 0.1

[sensing]
mode = "direct"
b1_sq = [1e-4, 0.0, 0.0, 0.0]
b2_sq = [0.0, 0.25, 0.0, 0.0]
eigs = [100.0, 100.0, 100.0, 100.0]

[[vehicles]]
start_m = -30.0
speed_mps = 20.0
"#;

    #[test]
    fn minimal_file_uses_defaults() {
        let c = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        let s = c.to_scenario().unwrap();
        assert_eq!(s.arrays, ArrayConfig::default());
        assert_eq!(s.rsu_offset_m, 4.0);
        assert_eq!(s.slot_s, 0.01);
        assert_eq!(s.deadline(), 0.01);
        assert_eq!(s.vehicles[0].payload_bits, DEFAULT_PAYLOAD_BITS);
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = ScenarioConfig::from_toml_str("p_max_w = 1.0\n[thresholds]\nxi_theta_rad2 = \n")
            .unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");

        let err =
            ScenarioConfig::from_toml_str(&MINIMAL.replace("speed_mps", "speed")).unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = ScenarioConfig::road_defaults();
        let text = c.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), c);
        assert_eq!(c.to_scenario().unwrap().vehicles.len(), 4);
    }

    #[test]
    fn vehicle_count_resizing() {
        let c = ScenarioConfig::road_defaults()
            .with_vehicle_count(7)
            .unwrap();
        assert_eq!(c.to_scenario().unwrap().vehicles.len(), 7);

        let explicit = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        assert!(explicit.with_vehicle_count(2).is_err());
        assert_eq!(explicit.with_vehicle_count(1).unwrap().vehicles.len(), 1);
    }

    #[test]
    fn missing_sensing_is_reported() {
        let text = MINIMAL.replace(
            "[sensing]\nmode = \"direct\"",
            "[unused]\nmode = \"direct\"",
        );
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
        let mut c = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        c.sensing = None;
        assert!(matches!(c.to_scenario(), Err(Error::Config(_))));
    }

    #[test]
    fn default_sensing_model_is_valid() {
        let m = SensingSpec::default_matrix().model().unwrap();
        assert!(m.eigs.iter().all(|&e| e > 0.0));
    }
}
