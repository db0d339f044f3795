//! Domain types shared by the solver: the protocol mix, censor parameters,
//! censor actions, distributor strategies and game outcomes.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Header line of the mix-CSV format.
pub const MIX_HEADER: &str = "protocol,cover_share_percent";

/// Mixes above this size get a warning; the censor strategy space is 2^n.
pub const SOFT_PROTOCOL_LIMIT: usize = 20;

const SUM_SLACK: f64 = 1e-9;

/// One impersonable protocol and the percentage of all observed traffic it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub name: String,
    pub cover_share: f64,
}

impl Protocol {
    pub fn new(name: impl Into<String>, cover_share: f64) -> Self {
        Protocol {
            name: name.into(),
            cover_share,
        }
    }
}

/// Protocols in canonical order: cover share descending, ties by name ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolMix {
    protocols: Vec<Protocol>,
}

impl ProtocolMix {
    pub fn new(mut protocols: Vec<Protocol>) -> Result<Self> {
        if protocols.is_empty() {
            return Err(Error::param("mix", "at least one protocol is required"));
        }
        let mut seen = HashSet::new();
        for p in &protocols {
            if p.name.is_empty() {
                return Err(Error::param("mix", "protocol name must be nonempty"));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(Error::param(
                    "mix",
                    format!("duplicate protocol `{}`", p.name),
                ));
            }
            check_cover(p.cover_share).map_err(|reason| {
                Error::param("mix", format!("protocol `{}`: {reason}", p.name))
            })?;
        }
        let total: f64 = protocols.iter().map(|p| p.cover_share).sum();
        if total > 100.0 + SUM_SLACK {
            return Err(Error::param(
                "mix",
                format!("cover shares sum to {total}, above 100"),
            ));
        }
        if protocols.len() > SOFT_PROTOCOL_LIMIT {
            log::warn!(
                "mix has {} protocols; the censor strategy space has 2^{} actions",
                protocols.len(),
                protocols.len()
            );
        }
        protocols.sort_by(|a, b| {
            b.cover_share
                .total_cmp(&a.cover_share)
                .then_with(|| a.name.cmp(&b.name))
        });
        Ok(ProtocolMix { protocols })
    }

    /// The six-protocol mix of a 2014 survey of US Internet traffic.
    pub fn paper() -> Self {
        ProtocolMix::new(vec![
            Protocol::new("YouTube", 13.25),
            Protocol::new("HTTP", 8.47),
            Protocol::new("BitTorrent", 5.03),
            Protocol::new("SSL", 2.63),
            Protocol::new("MPEG", 2.44),
            Protocol::new("AmazonVideo", 2.37),
        ])
        .expect("built-in mix is valid")
    }

    pub fn protocols(&self) -> &[Protocol] {
        &self.protocols
    }

    pub fn len(&self) -> usize {
        self.protocols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.protocols.is_empty()
    }

    pub fn cover(&self, index: usize) -> f64 {
        self.protocols[index].cover_share
    }

    pub fn name(&self, index: usize) -> &str {
        &self.protocols[index].name
    }

    pub fn total_cover(&self) -> f64 {
        self.protocols.iter().map(|p| p.cover_share).sum()
    }
}

fn check_cover(cover: f64) -> std::result::Result<(), String> {
    if !cover.is_finite() || !(0.0..=100.0).contains(&cover) {
        return Err(format!("cover share {cover} outside [0, 100]"));
    }
    Ok(())
}

/// Parses a mix-CSV stream. Blank lines are ignored; every other line after
/// the header must be `name,decimal`.
pub fn load_mix<R: BufRead>(source: R) -> Result<ProtocolMix> {
    let mut lines = source.lines().enumerate();
    match lines.next() {
        Some((_, line)) => {
            let line = line?;
            if line.trim_end_matches('\r') != MIX_HEADER {
                return Err(Error::mix(1, format!("expected header `{MIX_HEADER}`")));
            }
        }
        None => return Err(Error::mix(1, "empty input")),
    }

    let mut protocols: Vec<Protocol> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::mix(
                lineno,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        }
        let name = fields[0].trim();
        if name.is_empty() {
            return Err(Error::mix(lineno, "empty protocol name"));
        }
        if !seen.insert(name.to_string()) {
            return Err(Error::mix(lineno, format!("duplicate protocol `{name}`")));
        }
        let cover = parse_decimal(fields[1].trim())
            .ok_or_else(|| Error::mix(lineno, format!("malformed decimal `{}`", fields[1])))?;
        check_cover(cover).map_err(|reason| Error::mix(lineno, reason))?;
        protocols.push(Protocol::new(name, cover));
    }
    if protocols.is_empty() {
        return Err(Error::mix(1, "mix has no protocols"));
    }
    ProtocolMix::new(protocols)
}

/// Plain decimal: digits, optionally followed by `.` and more digits.
fn parse_decimal(text: &str) -> Option<f64> {
    let (int, frac) = match text.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (text, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || frac.is_some_and(|f| !digits(f)) {
        return None;
    }
    text.parse().ok()
}

/// Writes the mix in canonical order. `load_mix` of the output reproduces the mix.
pub fn write_mix_csv<W: Write>(mix: &ProtocolMix, mut out: W) -> Result<()> {
    writeln!(out, "{MIX_HEADER}")?;
    for p in mix.protocols() {
        writeln!(out, "{},{}", p.name, p.cover_share)?;
    }
    Ok(())
}

/// The constants of the censor utility function plus the distributor quantum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityParams {
    c: f64,
    d: f64,
    quantum: u32,
}

impl UtilityParams {
    /// `c` must be negative, `d` positive, and `quantum` a divisor of 100.
    pub fn new(c: f64, d: f64, quantum: u32) -> Result<Self> {
        if !c.is_finite() || c >= 0.0 {
            return Err(Error::param(
                "c",
                format!("must be finite and < 0, got {c}"),
            ));
        }
        if !d.is_finite() || d <= 0.0 {
            return Err(Error::param(
                "d",
                format!("must be finite and > 0, got {d}"),
            ));
        }
        if quantum == 0 || 100 % quantum != 0 {
            return Err(Error::param(
                "quantum",
                format!("must be a positive divisor of 100, got {quantum}"),
            ));
        }
        Ok(UtilityParams { c, d, quantum })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn quantum(&self) -> u32 {
        self.quantum
    }
}

/// A set of fully blocked protocols, as a bitmask over canonical indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CensorAction(u32);

impl CensorAction {
    pub const NONE: CensorAction = CensorAction(0);

    pub fn from_mask(mask: u32) -> Self {
        CensorAction(mask)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I, n: usize) -> Result<Self> {
        let mut mask = 0u32;
        for i in indices {
            if i >= n || i >= 32 {
                return Err(Error::Action(format!(
                    "protocol index {i} out of range for {n} protocols"
                )));
            }
            mask |= 1 << i;
        }
        Ok(CensorAction(mask))
    }

    /// Every protocol of an `n`-protocol mix.
    pub fn all(n: usize) -> Self {
        debug_assert!(n <= 32);
        CensorAction(if n >= 32 { u32::MAX } else { (1u32 << n) - 1 })
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn blocks(self, index: usize) -> bool {
        index < 32 && self.0 & (1 << index) != 0
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn blocked(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    /// `n` characters; character i is `1` iff protocol i is blocked.
    pub fn bitstring(self, n: usize) -> String {
        (0..n)
            .map(|i| if self.blocks(i) { '1' } else { '0' })
            .collect()
    }
}

/// Integer percentages of distributor traffic per protocol, canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DistributorStrategy {
    shares: Vec<u32>,
}

impl DistributorStrategy {
    /// Validates: multiples of `quantum`, sum 100, non-increasing.
    pub fn new(shares: Vec<u32>, quantum: u32) -> Result<Self> {
        if quantum == 0 {
            return Err(Error::Strategy("quantum must be positive".into()));
        }
        if shares.is_empty() {
            return Err(Error::Strategy("no shares".into()));
        }
        if let Some(s) = shares.iter().find(|&&s| s % quantum != 0) {
            return Err(Error::Strategy(format!(
                "share {s} is not a multiple of {quantum}"
            )));
        }
        let total: u32 = shares.iter().sum();
        if total != 100 {
            return Err(Error::Strategy(format!("shares sum to {total}, not 100")));
        }
        if shares.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Strategy(
                "shares must be non-increasing in cover order".into(),
            ));
        }
        Ok(DistributorStrategy { shares })
    }

    pub(crate) fn from_valid(shares: Vec<u32>) -> Self {
        DistributorStrategy { shares }
    }

    pub fn shares(&self) -> &[u32] {
        &self.shares
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }
}

impl fmt::Display for DistributorStrategy {
    /// `s1/s2/.../sn`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.shares.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Result of one censor action against one distributor strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    /// Percentage of distributor traffic blocked.
    pub t: u32,
    /// Percentage of total traffic that is blocked cover traffic.
    pub f: f64,
    pub utility: f64,
}

impl Outcome {
    /// Distributor traffic passing unblocked.
    pub fn leak(&self) -> u32 {
        100 - self.t
    }
}

/// A solved leader-follower cell of the game.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub strategy: DistributorStrategy,
    pub response: CensorAction,
    pub outcome: Outcome,
}

impl Equilibrium {
    pub fn leak(&self) -> u32 {
        self.outcome.leak()
    }
}
