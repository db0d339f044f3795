//! Outcomes, censor best responses, critical protocols and the
//! leader-follower equilibrium.
//!
//! The distributor commits to a traffic split first; the censor sees it and
//! blocks the subset of protocols that maximizes its utility. The distributor
//! picks the split whose best response lets the most traffic through.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::enumeration::{enumerate_distributor_strategies, MAX_CENSOR_PROTOCOLS};
use crate::error::{Error, Result};
use crate::model::{
    CensorAction, DistributorStrategy, Equilibrium, Outcome, ProtocolMix, UtilityParams,
};
use crate::utility::{cost_scalar, eval_utility};

/// The censor's utility-maximizing action against a fixed strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse {
    pub action: CensorAction,
    pub outcome: Outcome,
}

/// Aggregates `t` and `f` over the blocked set and scores them.
pub fn compute_outcome(
    mix: &ProtocolMix,
    params: &UtilityParams,
    strategy: &DistributorStrategy,
    action: CensorAction,
) -> Outcome {
    outcome_for_shares(mix, params, strategy.shares(), action)
}

/// As [`compute_outcome`] for an arbitrary share vector, aligned or not.
pub fn outcome_for_shares(
    mix: &ProtocolMix,
    params: &UtilityParams,
    shares: &[u32],
    action: CensorAction,
) -> Outcome {
    debug_assert_eq!(shares.len(), mix.len());
    let (t, f) = blocked_totals(mix, shares, action);
    Outcome {
        t,
        f,
        utility: eval_utility(params, t as f64, f),
    }
}

fn blocked_totals(mix: &ProtocolMix, shares: &[u32], action: CensorAction) -> (u32, f64) {
    let mut t = 0;
    let mut f = 0.0;
    for i in (0..mix.len()).filter(|&i| action.blocks(i)) {
        t += shares[i];
        f += mix.cover(i);
    }
    (t, f)
}

/// Censor preference between two actions: lower cost first, then less
/// collateral damage, fewer blocked protocols, smaller bitmask.
/// `Ordering::Less` means `a` is preferred.
fn censor_order(
    params: &UtilityParams,
    a: (CensorAction, u32, f64),
    b: (CensorAction, u32, f64),
) -> Ordering {
    let cost_a = cost_scalar(params, a.1 as f64, a.2);
    let cost_b = cost_scalar(params, b.1 as f64, b.2);
    cost_a
        .total_cmp(&cost_b)
        .then_with(|| a.2.total_cmp(&b.2))
        .then_with(|| a.0.count().cmp(&b.0.count()))
        .then_with(|| a.0.mask().cmp(&b.0.mask()))
}

/// Exhaustive search over all `2^n` blocking sets.
pub fn censor_best_response(
    mix: &ProtocolMix,
    params: &UtilityParams,
    strategy: &DistributorStrategy,
) -> Result<BestResponse> {
    best_response_for_shares(mix, params, strategy.shares())
}

/// As [`censor_best_response`] for an arbitrary share vector.
pub fn best_response_for_shares(
    mix: &ProtocolMix,
    params: &UtilityParams,
    shares: &[u32],
) -> Result<BestResponse> {
    let n = mix.len();
    if n > MAX_CENSOR_PROTOCOLS {
        return Err(Error::TooManyProtocols {
            count: n,
            cap: MAX_CENSOR_PROTOCOLS,
        });
    }
    if shares.len() != n {
        return Err(Error::Strategy(format!(
            "{} shares for a {n}-protocol mix",
            shares.len()
        )));
    }
    let mut best = (CensorAction::NONE, 0u32, 0.0f64);
    for mask in 1..1u32 << n {
        let action = CensorAction::from_mask(mask);
        let (t, f) = blocked_totals(mix, shares, action);
        let candidate = (action, t, f);
        if censor_order(params, candidate, best) == Ordering::Less {
            best = candidate;
        }
    }
    Ok(BestResponse {
        action: best.0,
        outcome: outcome_for_shares(mix, params, shares, best.0),
    })
}

/// Per-protocol rule: with `C < 0` the cost is linear in the blocked set, so
/// protocol `p` is worth blocking iff `cover[p] < share[p] / D`.
pub fn censor_best_response_separable(
    mix: &ProtocolMix,
    params: &UtilityParams,
    strategy: &DistributorStrategy,
) -> Result<BestResponse> {
    let shares = strategy.shares();
    let action = CensorAction::from_indices(
        (0..mix.len()).filter(|&i| mix.cover(i) < shares[i] as f64 / params.d()),
        mix.len(),
    )?;
    Ok(BestResponse {
        action,
        outcome: compute_outcome(mix, params, strategy, action),
    })
}

/// Protocols the censor would rather leave open even if they carried all
/// distributor traffic: `U(100, cover) < U(0, 0)`.
pub fn find_critical_protocols(mix: &ProtocolMix, params: &UtilityParams) -> Vec<usize> {
    let open = eval_utility(params, 0.0, 0.0);
    (0..mix.len())
        .filter(|&i| eval_utility(params, 100.0, mix.cover(i)) < open)
        .collect()
}

/// Best responses for a list of strategies, in the same order.
pub fn best_responses(
    mix: &ProtocolMix,
    params: &UtilityParams,
    strategies: &[DistributorStrategy],
) -> Result<Vec<BestResponse>> {
    strategies
        .par_iter()
        .map(|s| censor_best_response(mix, params, s))
        .collect()
}

/// Solves the game with the distributor maximizing leaked traffic.
pub fn find_equilibrium(mix: &ProtocolMix, params: &UtilityParams) -> Result<Equilibrium> {
    let eq = find_equilibrium_with(mix, params, |t| f64::from(100 - t))?;
    if cfg!(debug_assertions) && !find_critical_protocols(mix, params).is_empty() {
        assert_eq!(eq.strategy.shares()[0], 100);
        assert_eq!(eq.response, CensorAction::NONE);
    }
    Ok(eq)
}

/// Solves the game with the distributor maximizing `objective(t)`, which
/// should be strictly decreasing in the blocked percentage `t`.
///
/// Ties go to the strategy whose best response blocks less cover traffic,
/// then to the lexicographically greatest share vector.
pub fn find_equilibrium_with<F>(
    mix: &ProtocolMix,
    params: &UtilityParams,
    objective: F,
) -> Result<Equilibrium>
where
    F: Fn(u32) -> f64 + Sync,
{
    let strategies = enumerate_distributor_strategies(mix, params.quantum())?;
    let responses = best_responses(mix, params, &strategies)?;
    let row = select_equilibrium(&strategies, &responses, objective);
    Ok(Equilibrium {
        strategy: strategies[row].clone(),
        response: responses[row].action,
        outcome: responses[row].outcome,
    })
}

/// Index of the leader's choice among `strategies` with their `responses`.
/// The reduction follows a total order, so the result does not depend on
/// how the work is split across threads.
pub fn select_equilibrium<F>(
    strategies: &[DistributorStrategy],
    responses: &[BestResponse],
    objective: F,
) -> usize
where
    F: Fn(u32) -> f64 + Sync,
{
    assert_eq!(strategies.len(), responses.len());
    strategies
        .par_iter()
        .zip(responses.par_iter())
        .enumerate()
        .map(|(i, (s, r))| (i, (s, r, objective(r.outcome.t))))
        .reduce_with(|a, b| {
            if distributor_order(&a.1, &b.1) == Ordering::Less {
                a
            } else {
                b
            }
        })
        .map(|(i, _)| i)
        .expect("strategy space is never empty")
}

/// `Ordering::Less` means the distributor prefers `a`.
fn distributor_order(
    a: &(&DistributorStrategy, &BestResponse, f64),
    b: &(&DistributorStrategy, &BestResponse, f64),
) -> Ordering {
    b.2.total_cmp(&a.2)
        .then_with(|| a.1.outcome.f.total_cmp(&b.1.outcome.f))
        .then_with(|| b.0.shares().cmp(a.0.shares()))
}
