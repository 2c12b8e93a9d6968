//! Min-max transmit-delay power allocation for a dual-function
//! radar-communication roadside unit serving vehicles on a straight road.
//!
//! The crate covers the link model ([`channel`]), the sensing-accuracy
//! bounds and the power floors they imply ([`pcrb`]), rate and delay
//! ([`latency`]), the allocation policies ([`allocate`]) and multi-slot road
//! scenarios ([`scenario`], [`config`]).

pub mod allocate;
pub mod channel;
pub mod config;
pub mod error;
pub mod latency;
pub mod pcrb;
pub mod scenario;

pub use allocate::{
    alg1_delay_bisection, alg1_iteration_bound, alg1_power_boundary, alg2_complementary,
    alg2_spread_bound, check_feasible, closed_form_equal_payload, epa, oracle_grid_search,
    AllocationResult, BracketStep, Feasibility, Policy, SolverParams,
};
pub use channel::{ArrayConfig, VehicleState, SPEED_OF_LIGHT};
pub use config::{ScenarioConfig, SensingSpec};
pub use error::{Error, Result};
pub use latency::{delay, make_link, rate, LinkCoefficients, LinkContext};
pub use pcrb::{FloorMode, PcrbModel, PcrbThresholds};
pub use scenario::{run_scenario, run_slot, RoadScenario, SlotRecord, VehicleSpec};
