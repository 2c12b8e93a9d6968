use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use dfrc_core::pcrb::{pcrb_angle, pcrb_dist};
use dfrc_core::{run_slot, Policy, RoadScenario, ScenarioConfig, SlotRecord, SolverParams};
use log::info;
use serde::Serialize;

use crate::sweep::{run_sweep, SweepSpec};
use crate::CliError;

/// Command-line values that override the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub eps_delay: Option<f64>,
    pub eps_power: Option<f64>,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Loads a scenario config and applies the overrides. Every failure here is
/// a config error.
pub fn load_config(path: &Path, ov: &Overrides) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::from_toml_str(&read_text(path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    if let Some(eps) = ov.eps_delay {
        cfg.solver.eps_delay = eps;
    }
    if let Some(eps) = ov.eps_power {
        cfg.solver.eps_power = eps;
    }
    cfg.to_scenario()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

fn writer(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(
            File::create(p)
                .map_err(|e| CliError::Failed(format!("cannot create {}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn infeasible_slot(record: &SlotRecord) -> Option<CliError> {
    record.result.infeasible_reason.as_ref().map(|reason| {
        CliError::Infeasible(format!(
            "slot {}: {} {reason}",
            record.slot, record.result.policy
        ))
    })
}

#[derive(Debug, Serialize)]
struct RunRow {
    slot: usize,
    vehicle: usize,
    power_w: f64,
    delay_s: f64,
    pcrb_theta: f64,
    pcrb_dist: f64,
    max_delay_s: f64,
    iterations: usize,
    converged: bool,
}

fn write_run(
    records: &[SlotRecord],
    scenario: &RoadScenario,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut w = writer(out)?;
    for record in records {
        let r = &record.result;
        r.validate(&record.links(), scenario.p_max)?;
        for (k, v) in record.vehicles.iter().enumerate() {
            w.serialize(RunRow {
                slot: record.slot,
                vehicle: v.link.vehicle_id,
                power_w: r.powers[k],
                delay_s: r.delays[k],
                pcrb_theta: pcrb_angle(r.powers[k], &v.model)?,
                pcrb_dist: pcrb_dist(r.powers[k], &v.model)?,
                max_delay_s: r.max_delay,
                iterations: r.iterations,
                converged: r.converged,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs every slot with one policy and writes one row per slot and vehicle.
/// Nothing is written if any slot is infeasible.
pub fn cmd_run(
    config_path: &Path,
    policy: Policy,
    out: Option<&Path>,
    ov: &Overrides,
) -> Result<(), CliError> {
    let cfg = load_config(config_path, ov)?;
    let scenario = cfg.to_scenario()?;
    let mut records = Vec::with_capacity(scenario.n_slots);
    for slot in 0..scenario.n_slots {
        let record = run_slot(&scenario, slot, policy, &cfg.solver)?;
        if let Some(e) = infeasible_slot(&record) {
            return Err(e);
        }
        info!(
            "slot {slot}: {policy} max delay {:.6e} s",
            record.result.max_delay
        );
        records.push(record);
    }
    write_run(&records, &scenario, out)
}

/// Where the boundary table goes when no path is given: next to the sweep
/// output, with `_boundary` appended to the file stem.
pub fn default_boundary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = out
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    out.with_file_name(format!("{stem}_boundary{ext}"))
}

pub fn cmd_sweep(
    config_path: &Path,
    sweep_path: &Path,
    out: Option<&Path>,
    boundary_out: Option<&Path>,
    ov: &Overrides,
) -> Result<(), CliError> {
    let cfg = load_config(config_path, ov)?;
    let spec = SweepSpec::from_toml_str(&read_text(sweep_path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", sweep_path.display())))?;
    let params: SolverParams = cfg.solver;
    let (rows, boundary) = run_sweep(&cfg, &spec, &params)?;

    let mut w = writer(out)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;

    let boundary_path = boundary_out
        .map(Path::to_path_buf)
        .or_else(|| out.map(default_boundary_path));
    match boundary_path {
        Some(path) => {
            let mut w = writer(Some(&path))?;
            for row in &boundary {
                w.serialize(row)?;
            }
            w.flush()?;
            info!("alg1 power boundary written to {}", path.display());
        }
        None => info!("no --out or --boundary-out; alg1 power boundary not written"),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct TraceRow {
    iteration: usize,
    t_lower_s: f64,
    t_upper_s: f64,
}

/// Writes the Alg. 1 delay bracket of slot 0. If the converged allocation
/// misses a floor the trace is still written and the command reports the
/// slot as infeasible.
pub fn cmd_trace(config_path: &Path, out: Option<&Path>, ov: &Overrides) -> Result<(), CliError> {
    let cfg = load_config(config_path, ov)?;
    let scenario = cfg.to_scenario()?;
    let record = run_slot(&scenario, 0, Policy::Alg1, &cfg.solver)?;
    record.result.validate(&record.links(), scenario.p_max)?;

    let mut w = writer(out)?;
    for step in &record.result.bracket {
        w.serialize(TraceRow {
            iteration: step.iteration,
            t_lower_s: step.t_lower,
            t_upper_s: step.t_upper,
        })?;
    }
    w.flush()?;
    match infeasible_slot(&record) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
