//! Subgame perfect equilibria of two-firm irreversible investment timing
//! games driven by geometric Brownian motion.
//!
//! Models are reduced to affine revenue streams ([`model`]); closed-form
//! stopping solutions ([`stopping`]) give thresholds and value functions
//! ([`payoff`]); [`equilibrium`] classifies equilibria and decides the
//! existence of joint and sequential ones. The [`oracle`] module checks all
//! of this by brute force on binomial lattices and by Monte Carlo.

pub mod equilibrium;
pub mod error;
pub mod interval;
pub mod model;
pub mod oracle;
pub mod par;
pub mod payoff;
pub mod root;
pub mod stopping;
pub mod sweep;
pub mod threshold;

pub use error::{Error, Result};
pub use model::{
    beta_roots, from_ft, from_grenadier, from_pawlina_kort, from_weeds, AffineStream,
    AffineStreamModel, BetaRoots, Firm, FtParams, GbmParams, GrenadierParams, ModelSpec,
    PawlinaKortParams, WeedsParams,
};
pub use par::Execution;
pub use payoff::{preemption_region, thresholds, Duopoly, PreemptionRegion, ThresholdSet};
pub use stopping::{
    constrained_threshold, perpetuity_value, switch_threshold, two_sided_leader_region,
    SwitchProblem, TwoSidedKind, TwoSidedRegion,
};
pub use threshold::Threshold;
