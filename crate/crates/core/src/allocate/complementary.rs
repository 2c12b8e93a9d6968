//! Complementary pairwise transfers (Alg. 2).
//!
//! Each iteration moves `delta_p` watts from the vehicle with the smallest
//! delay to the one with the largest. A transfer that flips their order is
//! undone and the step halved; the search ends once the step drops to
//! `eps_power`. Transfers never take a donor below its floor.

use crate::error::{Error, Result};
use crate::latency::{delay, LinkCoefficients};

use super::{check_feasible, AllocationResult, Policy, SolverParams};

/// Equal split, with deficient vehicles lifted to their floor and the lift
/// funded pro rata from the others' slack.
fn repaired_start(links: &[LinkCoefficients], p_max: f64) -> Vec<f64> {
    let share = p_max / links.len() as f64;
    let mut powers = vec![share; links.len()];
    let lift: f64 = links.iter().map(|l| (l.power_floor - share).max(0.0)).sum();
    if lift == 0.0 {
        return powers;
    }
    let slack: f64 = links.iter().map(|l| (share - l.power_floor).max(0.0)).sum();
    for (p, l) in powers.iter_mut().zip(links) {
        if l.power_floor >= share {
            *p = l.power_floor;
        } else {
            *p = share - lift * (share - l.power_floor) / slack;
        }
    }
    powers
}

pub fn alg2_complementary(
    links: &[LinkCoefficients],
    p_max: f64,
    params: &SolverParams,
) -> Result<AllocationResult> {
    params.validate()?;
    let feasibility = check_feasible(links, p_max)?;
    if !feasibility.feasible {
        return Err(feasibility.into_error("alg2"));
    }

    let k = links.len();
    let mut powers = repaired_start(links, p_max);
    let mut delays = links
        .iter()
        .zip(&powers)
        .map(|(l, &p)| delay(p, l))
        .collect::<Result<Vec<_>>>()?;
    let mut step = params.delta_p_init.unwrap_or(p_max / (2.0 * k as f64));
    let mut iterations = 0;

    while step > params.eps_power {
        if iterations >= params.max_iters {
            return Err(Error::NotConverged {
                iterations,
                state: format!("transfer step {step:e} W"),
            });
        }
        iterations += 1;

        // Lowest index wins ties in both scans.
        let mut slow = 0;
        for i in 1..k {
            if delays[i] > delays[slow] {
                slow = i;
            }
        }
        let mut donor: Option<usize> = None;
        for i in 0..k {
            if i == slow || powers[i] <= links[i].power_floor {
                continue;
            }
            if donor.is_none_or(|d| delays[i] < delays[d]) {
                donor = Some(i);
            }
        }
        let Some(fast) = donor.filter(|&d| delays[d] < delays[slow]) else {
            // Delays are level, or every faster vehicle sits on its floor.
            break;
        };

        let moved = step.min(powers[fast] - links[fast].power_floor);
        let (old_slow, old_fast) = (powers[slow], powers[fast]);
        powers[slow] += moved;
        powers[fast] -= moved;
        let t_slow = delay(powers[slow], &links[slow])?;
        // A drained donor has no finite delay, which counts as an overshoot.
        let t_fast = if powers[fast] > 0.0 {
            delay(powers[fast], &links[fast])?
        } else {
            f64::INFINITY
        };
        if t_slow < t_fast {
            powers[slow] = old_slow;
            powers[fast] = old_fast;
            step /= 2.0;
        } else {
            delays[slow] = t_slow;
            delays[fast] = t_fast;
        }
    }

    let mut result = AllocationResult::from_powers(Policy::Alg2, links, powers)?;
    result.iterations = iterations;
    Ok(result)
}

/// Relative delay spread left by the transfer granularity when no floor
/// binds: the final rejected step is at most `2 eps_power` and moves each of
/// the two delays by at most `step * T * b / ((1 + b p) ln(1 + b p))`.
pub fn alg2_spread_bound(links: &[LinkCoefficients], powers: &[f64], eps_power: f64) -> f64 {
    let worst = links
        .iter()
        .zip(powers)
        .map(|(l, &p)| {
            let q = (p - 2.0 * eps_power).max(f64::MIN_POSITIVE);
            let x = l.b_coef * q;
            l.b_coef / ((1.0 + x) * x.ln_1p())
        })
        .fold(0.0, f64::max);
    4.0 * eps_power * worst
}
