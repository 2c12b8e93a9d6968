use crate::error::{Error, Result};
use crate::latency::{delay, LinkCoefficients};

use super::{check_feasible, AllocationResult, Policy};

const MAX_VEHICLES: usize = 4;
const MIN_STEPS: usize = 100;

/// Exhaustive scan of `{sum p = p_max, p_k >= floor_k}` on a grid that splits
/// the slack above the floors into `grid_steps` equal units. Returns the grid
/// point with the smallest max delay (first in lexicographic order on ties).
pub fn oracle_grid_search(
    links: &[LinkCoefficients],
    p_max: f64,
    grid_steps: usize,
) -> Result<AllocationResult> {
    if links.len() > MAX_VEHICLES {
        return Err(Error::Refused(format!(
            "grid oracle handles at most {MAX_VEHICLES} vehicles, got {}",
            links.len()
        )));
    }
    if grid_steps < MIN_STEPS {
        return Err(Error::domain(format!("grid_steps must be >= {MIN_STEPS}")));
    }
    let feasibility = check_feasible(links, p_max)?;
    if !feasibility.feasible {
        return Err(feasibility.into_error("oracle"));
    }

    let unit = (p_max - feasibility.total_floor) / grid_steps as f64;
    let power_at = |k: usize, n: usize| links[k].power_floor + n as f64 * unit;
    // Delay tables per vehicle; zero power counts as an infinite delay.
    let tables: Vec<Vec<f64>> = (0..links.len())
        .map(|k| {
            (0..=grid_steps)
                .map(|n| delay(power_at(k, n), &links[k]).unwrap_or(f64::INFINITY))
                .collect()
        })
        .collect();

    let mut best_units = vec![0usize; links.len()];
    let mut best = f64::INFINITY;
    let mut units = vec![0usize; links.len()];
    scan(
        &tables,
        0,
        grid_steps,
        f64::NEG_INFINITY,
        &mut units,
        &mut best,
        &mut best_units,
    );
    if !best.is_finite() {
        return Err(Error::infeasible(
            "every grid point leaves a vehicle without power",
            None,
        ));
    }

    let powers = best_units
        .iter()
        .enumerate()
        .map(|(k, &n)| power_at(k, n))
        .collect();
    let mut result = AllocationResult::from_powers(Policy::Oracle, links, powers)?;
    result.iterations = grid_steps;
    Ok(result)
}

fn scan(
    tables: &[Vec<f64>],
    k: usize,
    remaining: usize,
    running_max: f64,
    units: &mut [usize],
    best: &mut f64,
    best_units: &mut [usize],
) {
    if running_max >= *best {
        return;
    }
    if k + 1 == tables.len() {
        units[k] = remaining;
        let m = running_max.max(tables[k][remaining]);
        if m < *best {
            *best = m;
            best_units.copy_from_slice(units);
        }
        return;
    }
    for n in 0..=remaining {
        units[k] = n;
        scan(
            tables,
            k + 1,
            remaining - n,
            running_max.max(tables[k][n]),
            units,
            best,
            best_units,
        );
    }
}
