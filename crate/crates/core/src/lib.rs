//! Tier-based helper selection for cooperative MAC on Poisson node fields.
//!
//! Nodes are scattered as a homogeneous Poisson field and every hop sees
//! log-distance path loss with log-normal shadowing. A source whose direct
//! link to the destination is slow may relay through a helper; helpers are
//! grouped in tiers by the rates of their two hops, and the proposed scheme
//! tries them in tier order, best two-hop success probability first. The
//! conventional baseline picks any beneficial helper at random.
//!
//! The crate provides
//!
//! * the channel and link-rate model ([`channel`], [`protocol`]),
//! * tier-region geometry and Poisson sampling ([`geometry`]),
//! * closed-form upper and lower throughput bounds ([`bounds`]),
//! * a seeded, parallel Monte-Carlo harness ([`monte_carlo`]),
//! * contour grids, figure datasets and CSV/JSON output
//!   ([`contour`], [`figures`], [`output`]),
//! * the `coopmac` command line ([`cli`], [`config`]).
//!
//! Worked, runnable usage lives in the `examples/` directory.

pub mod bounds;
pub mod channel;
pub mod cli;
pub mod config;
pub mod contour;
pub mod error;
pub mod figures;
pub mod geometry;
pub mod monte_carlo;
pub mod output;
pub mod protocol;
pub mod quadrature;
pub mod selftest;

pub use bounds::{
    averaged_bounds, averaged_total_bounds, h_integral, link_bounds_at_distance, tier_bound_pair,
    tier_probabilities, type_ab_throughput, BoundPair, Conditioning, ConditioningKind, Regime,
    TierProbabilityVector,
};
pub use channel::{g_joint, p_success_direct, q_function, shadowing_sample, ChannelParams};
pub use contour::{contour_grid, tier_extremes, ContourGrid, ContourPoint};
pub use error::{Error, Result};
pub use figures::{reproduce_figure, ContourOptions, FigureId};
pub use geometry::{
    classify_helper_tier, lens_area, nn_distance_pdf, sample_ppp, tier_region_areas, NetworkRealization,
    Point2D, RegionAreas, Window,
};
pub use monte_carlo::{estimate_throughput, ExperimentConfig, Scheme, SchemeSelection, SimEstimate};
pub use protocol::{
    classify_link, enumerate_candidates, run_exchange, select_helper_conventional, select_helper_proposed,
    ExchangeMode, HelperCandidate, LinkClass, SelectionOutcome, TierSpec, TransmissionMode,
};
