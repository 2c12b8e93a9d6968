//! Bisection on the common delay (Alg. 1).
//!
//! At the optimum every vehicle sees the same delay `T`, and vehicle `k`
//! needs `(exp(a_k / T) - 1) / b_k` watts to reach it. Total demand falls
//! monotonically in `T`, so the optimum is the `T` where demand meets the
//! budget. The search starts from the bracket spanned by the equal-split
//! delays, which always contains that root.

use crate::error::{Error, Result};
use crate::latency::{delay, LinkCoefficients};

use super::{
    check_feasible, floor_violation, validate_inputs, AllocationResult, Policy, SolverParams,
};

/// Delay bracket after one Alg. 1 iteration. Iteration 0 is the equal-split
/// bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketStep {
    pub iteration: usize,
    pub t_lower: f64,
    pub t_upper: f64,
}

fn demand(links: &[LinkCoefficients], t: f64) -> f64 {
    links.iter().map(|l| l.power_for_delay(t)).sum()
}

/// Upper bound on Alg. 1 iterations for an initial gap, `ceil(log2(gap / eps)) + 1`.
pub fn alg1_iteration_bound(initial_gap: f64, eps_delay: f64) -> usize {
    if initial_gap <= eps_delay {
        return 1;
    }
    (initial_gap / eps_delay).log2().ceil() as usize + 1
}

pub fn alg1_delay_bisection(
    links: &[LinkCoefficients],
    p_max: f64,
    params: &SolverParams,
) -> Result<AllocationResult> {
    params.validate()?;
    let feasibility = check_feasible(links, p_max)?;
    if !feasibility.feasible {
        return Err(feasibility.into_error("alg1"));
    }

    let share = p_max / links.len() as f64;
    let start = links
        .iter()
        .map(|l| delay(share, l))
        .collect::<Result<Vec<_>>>()?;
    let mut t_lower = start.iter().copied().fold(f64::INFINITY, f64::min);
    let mut t_upper = start.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut bracket = vec![BracketStep {
        iteration: 0,
        t_lower,
        t_upper,
    }];
    let mut iterations = 0;
    while t_upper - t_lower > params.eps_delay {
        if iterations >= params.max_iters {
            return Err(Error::NotConverged {
                iterations,
                state: format!("delay bracket [{t_lower:e}, {t_upper:e}] s"),
            });
        }
        let t = 0.5 * (t_lower + t_upper);
        if t <= t_lower || t >= t_upper {
            // Bracket is at float resolution.
            break;
        }
        if demand(links, t) > p_max {
            t_lower = t;
        } else {
            t_upper = t;
        }
        iterations += 1;
        bracket.push(BracketStep {
            iteration: iterations,
            t_lower,
            t_upper,
        });
    }

    // The root of demand(T) = p_max lies inside the final bracket; finish it
    // to float resolution so the output spends the whole budget.
    let (mut lo, mut hi) = (t_lower, t_upper);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if demand(links, mid) > p_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let powers = links.iter().map(|l| l.power_for_delay(hi)).collect();
    let mut result = AllocationResult::from_powers(Policy::Alg1, links, powers)?;
    result.iterations = iterations;
    result.bracket = bracket;
    if let Some(k) = floor_violation(links, &result.powers) {
        result.converged = false;
        result.infeasible_reason = Some(format!(
            "equal-delay allocation gives vehicle {} {:.6e} W, below its floor {:.6e} W; defer to alg2",
            links[k].vehicle_id, result.powers[k], links[k].power_floor
        ));
    }
    Ok(result)
}

/// Smallest budget at which Alg. 1 returns an allocation meeting every floor,
/// found by bisection over `p_max` to relative tolerance `rel_tol`.
pub fn alg1_power_boundary(
    links: &[LinkCoefficients],
    params: &SolverParams,
    rel_tol: f64,
) -> Result<f64> {
    let total_floor: f64 = links.iter().map(|l| l.power_floor).sum();
    validate_inputs(links, total_floor.max(1.0))?;
    if !(rel_tol > 0.0) {
        return Err(Error::domain("rel_tol must be > 0"));
    }
    let works = |p_max: f64| -> Result<bool> {
        match alg1_delay_bisection(links, p_max, params) {
            Ok(r) => Ok(r.is_feasible()),
            Err(e) if e.is_infeasible() => Ok(false),
            Err(e) => Err(e),
        }
    };

    if total_floor == 0.0 {
        // Every positive budget works.
        return Ok(0.0);
    }
    if works(total_floor)? {
        return Ok(total_floor);
    }
    let mut lo = total_floor;
    let mut hi = 2.0 * total_floor;
    while !works(hi)? {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::infeasible(
                "no finite budget satisfies the floors",
                None,
            ));
        }
    }
    while (hi - lo) > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if works(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{closed_form_equal_payload, epa, oracle_grid_search};
    use super::*;
    use proptest::prelude::*;

    fn params() -> SolverParams {
        SolverParams::default()
    }

    #[test]
    fn single_vehicle_takes_everything() {
        let l = links(&[0.3], &[2.0], &[0.0]);
        let r = alg1_delay_bisection(&l, 1.5, &params()).unwrap();
        assert_eq!(r.powers, vec![1.5]);
        assert!((r.max_delay - 0.3 / 4f64.ln()).abs() < 1e-15);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn matches_closed_form_for_equal_payloads() {
        let l = equal_a(&[1.0, 3.0, 0.2, 40.0]);
        let a = alg1_delay_bisection(&l, 2.0, &params()).unwrap();
        let c = closed_form_equal_payload(&l, 2.0).unwrap();
        for (x, y) in a.powers.iter().zip(&c.powers) {
            assert!(((x - y) / y).abs() < 1e-6);
        }
    }

    #[test]
    fn unequal_payloads_match_grid_oracle() {
        let l = links(&[0.8, 1.5, 0.4], &[2.0, 0.7, 5.0], &[0.0; 3]);
        let p = SolverParams {
            eps_delay: 1e-9,
            ..params()
        };
        let r = alg1_delay_bisection(&l, 3.0, &p).unwrap();
        let o = oracle_grid_search(&l, 3.0, 2000).unwrap();
        assert!(r.max_delay <= o.max_delay + 1e-9);
        assert!((o.max_delay - r.max_delay) / r.max_delay < 5e-3);
    }

    #[test]
    fn bracket_is_monotone_and_bounded() {
        let l = links(&[1e-5, 2e-5, 1.5e-5], &[30.0, 400.0, 90.0], &[0.0; 3]);
        let p = SolverParams {
            eps_delay: 1e-12,
            ..params()
        };
        let r = alg1_delay_bisection(&l, 1.0, &p).unwrap();
        let e = epa(&l, 1.0).unwrap();
        assert_eq!(r.bracket[0].t_lower, e.min_delay());
        assert_eq!(r.bracket[0].t_upper, e.max_delay);
        for w in r.bracket.windows(2) {
            assert!(w[1].t_lower >= w[0].t_lower && w[1].t_upper <= w[0].t_upper);
        }
        let last = r.bracket.last().unwrap();
        assert!(last.t_upper - last.t_lower <= p.eps_delay);
        let gap = e.max_delay - e.min_delay();
        assert!(r.iterations <= alg1_iteration_bound(gap, p.eps_delay));
    }

    #[test]
    fn infeasible_budget_is_an_error() {
        let l = links(&[1.0, 1.0], &[1.0, 1.0], &[0.6, 0.6]);
        let err = alg1_delay_bisection(&l, 1.0, &params()).unwrap_err();
        match err {
            Error::Infeasible {
                deficit_w: Some(d), ..
            } => assert!((d - 0.2).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn binding_floor_defers() {
        // Strong link 1 gets little power at the optimum but needs 0.4 W.
        let l = links(&[1.0, 1.0], &[1.0, 10.0], &[0.0, 0.4]);
        let r = alg1_delay_bisection(&l, 1.0, &params()).unwrap();
        assert!(!r.converged);
        assert!(!r.is_feasible());
        assert!(r.validate(&l, 1.0).is_ok());
    }

    #[test]
    fn iteration_cap_reports_bracket() {
        let l = links(&[1e-5, 2e-5], &[30.0, 400.0], &[0.0; 2]);
        let p = SolverParams {
            eps_delay: 1e-15,
            max_iters: 3,
            ..params()
        };
        assert!(matches!(
            alg1_delay_bisection(&l, 1.0, &p),
            Err(Error::NotConverged { iterations: 3, .. })
        ));
    }

    #[test]
    fn boundary_matches_closed_form_threshold() {
        let l = links(&[1.0, 0.5, 2.0], &[1.0, 10.0, 3.0], &[0.2, 0.3, 0.1]);
        let got = alg1_power_boundary(&l, &params(), 1e-10).unwrap();
        // Floors bind first at the largest delay any floor allows.
        let t_star = l
            .iter()
            .map(|x| x.a_coef / (x.b_coef * x.power_floor).ln_1p())
            .fold(f64::INFINITY, f64::min);
        let oracle: f64 = l.iter().map(|x| x.power_for_delay(t_star)).sum();
        assert!(((got - oracle) / oracle).abs() < 1e-8, "{got} vs {oracle}");
        assert!(got >= l.iter().map(|x| x.power_floor).sum::<f64>());
    }

    #[test]
    fn boundary_with_zero_floors() {
        let l = equal_a(&[1.0, 2.0]);
        assert_eq!(alg1_power_boundary(&l, &params(), 1e-9).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn uses_full_budget_and_equalizes(
            a in prop::collection::vec(1e-6..1e-4f64, 1..8),
            seed_b in prop::collection::vec(1.0..1e4f64, 8),
            p_max in 0.05..5.0f64,
        ) {
            let b = &seed_b[..a.len()];
            let l = links(&a, b, &vec![0.0; a.len()]);
            let r = alg1_delay_bisection(&l, p_max, &params()).unwrap();
            prop_assert!(((r.total_power() - p_max) / p_max).abs() <= 1e-9);
            prop_assert!(r.delay_spread() <= 1e-4);
            let e = epa(&l, p_max).unwrap();
            prop_assert!(r.max_delay <= e.max_delay * (1.0 + 1e-12));
        }
    }
}
