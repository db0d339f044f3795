//! Censor and distributor strategy spaces.
//!
//! The censor may block any subset of the mix. The distributor's shares are
//! quantized and kept cover-aligned: a distribution that puts more traffic on
//! a protocol with less cover is dominated by the one with the two shares
//! swapped, so only non-increasing share vectors are enumerated. Those are
//! exactly the partitions of `100 / quantum` into at most `n` parts.

use crate::error::{Error, Result};
use crate::model::{CensorAction, DistributorStrategy, ProtocolMix};

/// Hard cap on mix size for censor action enumeration (2^20 subsets).
pub const MAX_CENSOR_PROTOCOLS: usize = 20;

/// All `2^n` blocking sets, ascending by bitmask.
pub fn enumerate_censor_actions(mix: &ProtocolMix) -> Result<Vec<CensorAction>> {
    let n = mix.len();
    if n > MAX_CENSOR_PROTOCOLS {
        return Err(Error::TooManyProtocols {
            count: n,
            cap: MAX_CENSOR_PROTOCOLS,
        });
    }
    Ok((0..1u32 << n).map(CensorAction::from_mask).collect())
}

/// True iff `shares` is non-increasing in the mix's canonical order.
pub fn is_cover_aligned(shares: &[u32], mix: &ProtocolMix) -> bool {
    shares.len() == mix.len() && shares.windows(2).all(|w| w[0] >= w[1])
}

/// Every cover-aligned, quantized distribution over the mix, lexicographically
/// descending (the most skewed strategy first).
pub fn enumerate_distributor_strategies(
    mix: &ProtocolMix,
    quantum: u32,
) -> Result<Vec<DistributorStrategy>> {
    distributor_strategies(mix.len(), quantum)
}

/// As [`enumerate_distributor_strategies`] for an `n`-protocol mix.
pub fn distributor_strategies(n: usize, quantum: u32) -> Result<Vec<DistributorStrategy>> {
    let units = units(quantum)?;
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }
    let mut prefix = Vec::with_capacity(n);
    partitions_desc(units, units, n, &mut prefix, &mut |parts| {
        out.push(DistributorStrategy::from_valid(
            parts.iter().map(|&p| p * quantum).collect(),
        ));
    });
    Ok(out)
}

/// Emits partitions of `remaining` into exactly `slots` non-increasing
/// non-negative parts bounded by `cap`, lexicographically descending.
fn partitions_desc(
    remaining: u32,
    cap: u32,
    slots: usize,
    prefix: &mut Vec<u32>,
    emit: &mut impl FnMut(&[u32]),
) {
    if slots == 0 {
        if remaining == 0 {
            emit(prefix);
        }
        return;
    }
    for part in (0..=cap.min(remaining)).rev() {
        // Later parts are at most `part`, so they must be able to cover the rest.
        if (part as u64) * (slots as u64) < remaining as u64 {
            break;
        }
        prefix.push(part);
        partitions_desc(remaining - part, part, slots - 1, prefix, emit);
        prefix.pop();
    }
}

/// Number of cover-aligned strategies, by the partition recurrence
/// `p(m, k) = p(m, k - 1) + p(m - k, k)` with `m = 100 / quantum`.
pub fn count_distributor_strategies(n: usize, quantum: u32) -> Result<u64> {
    let m = units(quantum)? as usize;
    let k_max = n.min(m);
    // table[j] holds p(j, k) for the current k.
    let mut table = vec![0u64; m + 1];
    table[0] = 1;
    for k in 1..=k_max {
        for j in k..=m {
            table[j] += table[j - k];
        }
    }
    Ok(table[m])
}

fn units(quantum: u32) -> Result<u32> {
    if quantum == 0 || 100 % quantum != 0 {
        return Err(Error::param(
            "quantum",
            format!("must be a positive divisor of 100, got {quantum}"),
        ));
    }
    Ok(100 / quantum)
}
