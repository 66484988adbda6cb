//! Lower bound on the memory–power function under uncoded placement.

use crate::combinatorics::binomial_f64;
use crate::model::{ChannelConfig, CorrelatedLibrary};
use crate::power::min_superposition_power;

/// Per-user rates `ρ̃_k = max(Σ_{ℓ=0}^{N-k} C(N-k, ℓ) R_{ℓ+1} − M, 0)` for
/// `k = 1..=min(N, K)`.
///
/// `Σ_ℓ C(N-k, ℓ) R_{ℓ+1}` is the rate of everything file `k` holds outside
/// files `1..k-1`.
pub fn rho_tilde(lib: &CorrelatedLibrary, n_users: usize, memory: f64) -> Vec<f64> {
    let n = lib.n_files();
    (1..=n.min(n_users))
        .map(|k| (fresh_rate(lib, k) - memory).max(0.0))
        .collect()
}

/// `Σ_{ℓ=0}^{N-k} C(N-k, ℓ) R_{ℓ+1}`.
pub(crate) fn fresh_rate(lib: &CorrelatedLibrary, k: usize) -> f64 {
    let n = lib.n_files();
    (0..=n - k)
        .map(|l| binomial_f64(n - k, l) * lib.level_rate(l + 1))
        .sum()
}

/// Minimum superposition power for the rates `ρ̃`, zero-padded to `K` users.
pub fn lower_bound_power(lib: &CorrelatedLibrary, ch: &ChannelConfig, memory: f64) -> f64 {
    let rho = rho_tilde(lib, ch.n_users(), memory);
    min_superposition_power(&rho, ch)
        .expect("lower-bound rates are non-negative and fit the channel")
        .total
}
