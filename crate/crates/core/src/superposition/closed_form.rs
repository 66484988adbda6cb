//! Closed-form per-user rates of the superposition scheme.
//!
//! Every group of `(ℓ, r)` has at most `⌈N_e/r⌉ + 1` leaders, `N_e = min(N, K)`.
//! Assuming the leaders are the weakest users gives the per-group rate
//! `γ_{k,ℓ,r}`, and summing over the `C(N−N_e, ℓ−r) C(N_e−1, r−1)` groups of
//! every `(ℓ, r)` gives `ρ̂_k`.

use crate::combinatorics::{binomial, binomial_f64, binomial_ratio_f64};
use crate::model::{ChannelConfig, CorrelatedLibrary};
use crate::power::min_superposition_power;
use crate::tokens::Q;

use super::delivery::overlap_range;
use super::placement::{cache_split, CacheAllocation, PlacementSpec};

/// Whether user `k` (1-based) falls within the leader cap `⌈N_e/r⌉ + 1`.
fn within_cap(k: usize, r: usize, n_files: usize, n_users: usize) -> bool {
    let ne = n_files.min(n_users);
    k <= ne.div_ceil(r) + 1
}

/// `γ_{k,ℓ,r}` for user `k` (1-based), level rate `R_ℓ` and caching parameter `t`:
/// `(C(K−k,t_A)/C(K,t_A)·(t_B−t) + C(K−k,t_B)/C(K,t_B)·(t−t_A))·R_ℓ` inside the
/// leader cap, zero beyond it.
pub fn gamma_closed_form(
    k: usize,
    level_rate: f64,
    r: usize,
    n_files: usize,
    n_users: usize,
    t: f64,
) -> f64 {
    if !within_cap(k, r, n_files, n_users) {
        return 0.0;
    }
    let t_a = t.floor() as usize;
    let t_b = t_a + 1;
    let left = n_users - k;
    let a = binomial_ratio_f64(left, n_users, t_a) * (t_b as f64 - t);
    let b = if t > t_a as f64 {
        binomial_ratio_f64(left, n_users, t_b) * (t - t_a as f64)
    } else {
        0.0
    };
    (a + b) * level_rate
}

/// Exact multipliers of the A and B shares in `γ_{k,ℓ,r}`:
/// `(C(K−k,t_A)/C(K,t_A), C(K−k,t_B)/C(K,t_B))`, zero beyond the leader cap.
pub fn gamma_coefficients(k: usize, r: usize, n_files: usize, n_users: usize, t_a: usize) -> (Q, Q) {
    if !within_cap(k, r, n_files, n_users) {
        return (Q::from_integer(0), Q::from_integer(0));
    }
    let ratio = |t: usize| {
        let den = binomial(n_users, t);
        if den == 0 {
            Q::from_integer(0)
        } else {
            Q::new(binomial(n_users - k, t) as i64, den as i64)
        }
    };
    (ratio(t_a), ratio(t_a + 1))
}

/// Number of groups formed for `(ℓ, r)` when `N_e = min(N, K)` files are requested.
pub fn group_count(n_files: usize, n_users: usize, level: usize, r: usize) -> f64 {
    let ne = n_files.min(n_users);
    binomial_f64(n_files - ne, level - r) * binomial_f64(ne - 1, r - 1)
}

/// `ρ̂_k` for every user under placement `spec`.
pub fn rho_hat(lib: &CorrelatedLibrary, spec: &PlacementSpec) -> Vec<f64> {
    let n = lib.n_files();
    let k_users = spec.n_users;
    let ne = n.min(k_users);
    (1..=k_users)
        .map(|k| {
            let mut acc = 0.0;
            for lp in &spec.levels {
                if lp.rate == 0.0 {
                    continue;
                }
                for r in overlap_range(n, ne, lp.level) {
                    let g = group_count(n, k_users, lp.level, r);
                    acc += g * gamma_closed_form(k, lp.rate, r, n, k_users, lp.t);
                }
            }
            acc
        })
        .collect()
}

/// Closed-form upper bound on the power for cache allocation `pi`.
pub fn upper_bound_power(
    lib: &CorrelatedLibrary,
    ch: &ChannelConfig,
    memory: f64,
    pi: &CacheAllocation,
) -> f64 {
    let spec = cache_split(lib, ch.n_users(), memory, pi);
    upper_bound_power_for(lib, ch, &spec)
}

pub fn upper_bound_power_for(lib: &CorrelatedLibrary, ch: &ChannelConfig, spec: &PlacementSpec) -> f64 {
    min_superposition_power(&rho_hat(lib, spec), ch)
        .expect("closed-form rates are finite and non-negative")
        .total
}
