//! Solver for the censor vs. traffic-distributor blocking game.
//!
//! A distributor spreads circumvention traffic over protocols it can
//! impersonate; a censor, seeing the split, blocks whole protocols to trade
//! caught traffic against collateral damage to cover traffic. This crate
//! enumerates both strategy spaces, computes censor best responses, solves
//! the leader-follower equilibrium and renders the utility grid.

pub mod enumeration;
pub mod error;
pub mod game;
pub mod model;
pub mod report;
pub mod utility;

pub use error::{Error, Result};
pub use model::{
    load_mix, write_mix_csv, CensorAction, DistributorStrategy, Equilibrium, Outcome, Protocol,
    ProtocolMix, UtilityParams,
};
