//! Ordinal maximin-share fair division of indivisible goods.
//!
//! Agents have additive non-negative integer valuations. The crate computes exact and
//! approximate ℓ-out-of-d maximin shares, runs the Lone Divider with ℓ-balanced
//! bundles to guarantee every agent its ℓ-out-of-⌊(ℓ+½)n⌋ share, and provides
//! bag-filling algorithms whose thresholds are computed by simulation.

pub mod covering;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod instance;
pub mod lone_divider;
pub mod matching;
pub mod mms;
pub mod responsive;
pub mod scaling;

pub use covering::{bbfs, bbfs_allocation, cover_opt_exact, cover_share, CoverResult, CoverShare};
pub use error::{Error, Result};
pub use instance::{
    bundle_value, descending_order, order_instance, pad_with_dummies, unorder_allocation, Allocation, Bundle,
    Instance, OrderingMaps,
};
pub use lone_divider::{lone_divider, ordinal_d, solve_ordinal, solve_ordinal_with, ThresholdVector, WitnessMethod};
pub use matching::{envy_free_matching, AcceptabilityGraph};
pub use mms::{greedy_lower_bound, mms_bounds, mms_exact, proportional_share, MmsSolver, MmsWitness};
pub use scaling::{scale_to_mms, ScaledValuation};
