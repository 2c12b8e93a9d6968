//! Benchmark inputs shared by the criterion targets.

use dfrc_core::scenario::slot_vehicles;
use dfrc_core::{FloorMode, LinkCoefficients, ScenarioConfig};

/// Slot-0 links of the default road with `k` vehicles and a budget large
/// enough for every policy.
pub fn default_links(k: usize, mode: FloorMode) -> (Vec<LinkCoefficients>, f64) {
    let cfg = ScenarioConfig {
        p_max_w: 10.0,
        ..ScenarioConfig::road_defaults()
    }
    .with_vehicle_count(k)
    .expect("fleet config");
    let s = cfg.to_scenario().expect("default scenario");
    let links = slot_vehicles(&s, 0, mode)
        .expect("slot 0")
        .iter()
        .map(|v| v.link)
        .collect();
    (links, s.p_max)
}

/// Same links with every payload set to the first one.
pub fn equal_payload_links(k: usize) -> (Vec<LinkCoefficients>, f64) {
    let (mut links, p_max) = default_links(k, FloorMode::Relaxed);
    let a = links[0].a_coef;
    for l in &mut links {
        l.a_coef = a;
        l.power_floor = 0.0;
    }
    (links, p_max)
}
