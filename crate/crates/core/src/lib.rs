//! Memory–power trade-off for cache-aided delivery of correlated files over a
//! degraded Gaussian broadcast channel.
//!
//! The library is split into subfiles `W̄_S`, one per nonempty set `S` of files
//! sharing it. Two achievable schemes are provided next to an
//! uncoded-placement lower bound:
//!
//! * [`superposition`]: memory-sharing uncoded placement with XOR multicast
//!   messages layered by superposition coding;
//! * [`piggyback`]: coded (XOR) placement where cached values index the rows
//!   of each level's codebook.
//!
//! [`oracle`] checks either scheme symbolically over GF(2).

pub mod bounds;
pub mod combinatorics;
pub mod model;
pub mod oracle;
pub mod piggyback;
pub mod power;
pub mod superposition;
pub mod tokens;

pub use bounds::{lower_bound_power, rho_tilde};
pub use model::{
    AlphaProfile, ChannelConfig, CorrelatedLibrary, DemandVector, ModelError, SubfileId,
};
pub use power::{min_superposition_power, rate_feasible, PowerResult};
