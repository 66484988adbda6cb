//! Cache-aided superposition coding with memory-sharing uncoded placement.
//!
//! Each sublibrary `L_ℓ` gets a share `π_ℓ` of the cache, which fixes how many
//! users `t_ℓ` cache each part of its subfiles. Requested subfiles are
//! grouped so that every group is a single-demand problem, and each group is
//! delivered by XOR messages aimed at its weakest distinct requesters.

pub mod closed_form;
pub mod delivery;
pub mod grouping;
pub mod optimize;
pub mod placement;
pub mod profile;

pub use closed_form::{gamma_closed_form, rho_hat, upper_bound_power};
pub use delivery::{generate_messages, single_demand, MessagePlan, XorMessage};
pub use grouping::{group, GroupDemand};
pub use optimize::{
    optimize_pi, optimize_pi_constructive, refine_allocation, OptimizerSettings, Optimum,
};
pub use placement::{cache_split, place, CacheAllocation, LevelPlacement, PlacementSpec};
pub use profile::{achievable_power_constructive, constructive_power, worst_case_profiles, DemandProfile};
