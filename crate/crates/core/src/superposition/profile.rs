//! Per-user message rates from leader structure alone.
//!
//! Within a group, user `k` receives `C(K−k, t)` messages per class if it is
//! a leader and `C(K−k, t) − C(K−k−e_k, t)` otherwise, `e_k` being the number
//! of leaders stronger than `k`. The rates of a demand therefore depend only
//! on the leader sets of its groups, which do not depend on the placement.

use std::collections::BTreeMap;

use crate::combinatorics::{binomial_f64, bits};
use crate::model::{
    all_demands, sample_worst_case_demands, worst_case_demand_count, worst_case_demand_set,
    ChannelConfig, CorrelatedLibrary, DemandVector, ModelError, MAX_EXHAUSTIVE,
};
use crate::power::min_superposition_power;

use super::delivery::overlap_range;
use super::grouping::{group, requested_with_overlap};
use super::placement::{cache_split, CacheAllocation, PlacementSpec};

/// Largest number of demand vectors evaluated one by one.
pub const DEMAND_BUDGET: u128 = 4096;

const SAMPLE_SEED: u64 = 0x5eed;

/// Leader sets of every group, per sublibrary, with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandProfile {
    n_users: usize,
    /// `levels[ℓ-1]`: `(leader mask, number of groups)` sorted by mask.
    levels: Vec<Vec<(u64, u32)>>,
    /// `counts[ℓ-1][t][k]`: messages user `k` receives from `L_ℓ` per class
    /// with parameter `t`, summed over groups.
    counts: Vec<Vec<Vec<f64>>>,
}

impl DemandProfile {
    /// Leader structure of `demand` over every sublibrary of an `N`-file
    /// library, whatever the level rates.
    pub fn from_demand(n_files: usize, demand: &DemandVector) -> Self {
        let ne = demand.distinct_count();
        let mut levels = Vec::with_capacity(n_files);
        for l in 1..=n_files {
            let sub: Vec<_> = crate::combinatorics::subsets_of_size(n_files, l)
                .map(|m| crate::model::SubfileId::from_mask(m as u32))
                .collect();
            let mut counts: BTreeMap<u64, u32> = BTreeMap::new();
            for r in overlap_range(n_files, ne, l) {
                let w = requested_with_overlap(&sub, demand, r);
                for g in group(&w, demand, r) {
                    *counts.entry(g.leaders()).or_default() += 1;
                }
            }
            levels.push(counts.into_iter().collect());
        }
        Self::from_groups(demand.n_users(), levels)
    }

    fn from_groups(n_users: usize, levels: Vec<Vec<(u64, u32)>>) -> Self {
        let counts = levels
            .iter()
            .map(|groups| {
                (0..=n_users)
                    .map(|t| {
                        (0..n_users)
                            .map(|k| {
                                groups
                                    .iter()
                                    .map(|&(m, mult)| mult as f64 * messages_for_user(k, m, t, n_users))
                                    .sum()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        DemandProfile { n_users, levels, counts }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    /// Groups of sublibrary `level` as `(leader mask, multiplicity)`.
    pub fn groups(&self, level: usize) -> &[(u64, u32)] {
        &self.levels[level - 1]
    }

    /// Message rates `ρ_k` under placement `spec`.
    pub fn rates(&self, spec: &PlacementSpec) -> Vec<f64> {
        let k_users = self.n_users;
        let mut rho = vec![0.0; k_users];
        for (li, by_t) in self.counts.iter().enumerate() {
            let lp = spec.level(li + 1);
            for class in lp.classes() {
                let t = lp.t_of(class);
                if t > k_users {
                    continue;
                }
                let per_message = lp.share(class) / binomial_f64(k_users, t);
                for (r, c) in rho.iter_mut().zip(&by_t[t]) {
                    *r += per_message * c;
                }
            }
        }
        rho
    }

    /// Whether every message count of `self` is at most that of `other`, so
    /// that `self` never needs more power under any placement.
    pub fn dominated_by(&self, other: &DemandProfile) -> bool {
        self.counts
            .iter()
            .flatten()
            .flatten()
            .zip(other.counts.iter().flatten().flatten())
            .all(|(a, b)| a <= b)
    }
}

/// Number of messages user `k` (0-based) receives in one group and class.
pub fn messages_for_user(k: usize, leaders: u64, t: usize, n_users: usize) -> f64 {
    let stronger = n_users - k - 1;
    let all = binomial_f64(stronger, t);
    if leaders >> k & 1 == 1 {
        all
    } else {
        let e = bits(leaders >> (k + 1)).count();
        all - binomial_f64(stronger - e, t)
    }
}

/// Demands over which the worst case is taken: all of `[N]^K` when small,
/// otherwise the worst-case set (sampled when it is still too large).
pub fn demand_sweep(n_files: usize, n_users: usize) -> Result<Vec<DemandVector>, ModelError> {
    let everything = (n_files as u128).checked_pow(n_users as u32);
    if n_files <= MAX_EXHAUSTIVE && n_users <= MAX_EXHAUSTIVE {
        if everything.is_some_and(|c| c <= DEMAND_BUDGET) {
            return Ok(all_demands(n_files, n_users)?.collect());
        }
        if worst_case_demand_count(n_files, n_users) <= DEMAND_BUDGET {
            return Ok(worst_case_demand_set(n_files, n_users)?.collect());
        }
    }
    if n_files > 32 {
        return Err(ModelError::TooLarge { what: "N", value: n_files });
    }
    if n_users > 64 {
        return Err(ModelError::TooLarge { what: "K", value: n_users });
    }
    Ok(sample_worst_case_demands(
        n_files,
        n_users,
        DEMAND_BUDGET as usize,
        SAMPLE_SEED,
    ))
}

type GroupKey = Vec<Vec<(u64, u32)>>;

/// Profiles of the demands in [`demand_sweep`], without duplicates and
/// without profiles dominated by another one.
pub fn worst_case_profiles(n_files: usize, n_users: usize) -> Result<Vec<DemandProfile>, ModelError> {
    let mut keyed: Vec<(GroupKey, DemandProfile)> = demand_sweep(n_files, n_users)?
        .iter()
        .map(|d| {
            let p = DemandProfile::from_demand(n_files, d);
            (p.levels.clone(), p)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    let all: Vec<DemandProfile> = keyed.into_iter().map(|(_, p)| p).collect();
    let mut kept: Vec<DemandProfile> = Vec::new();
    for (i, p) in all.iter().enumerate() {
        // drop p if another profile dominates it; among equal count tables keep the first
        let dominated = all.iter().enumerate().any(|(j, q)| {
            j != i && p.dominated_by(q) && (!q.dominated_by(p) || j < i)
        });
        if !dominated {
            kept.push(p.clone());
        }
    }
    Ok(kept)
}

/// Largest superposition power over the given profiles.
pub fn constructive_power(profiles: &[DemandProfile], spec: &PlacementSpec, ch: &ChannelConfig) -> f64 {
    profiles
        .iter()
        .map(|p| {
            min_superposition_power(&p.rates(spec), ch)
                .expect("message rates are finite and non-negative")
                .total
        })
        .fold(0.0, f64::max)
}

/// Worst-case power of the explicit scheme for cache allocation `pi`.
pub fn achievable_power_constructive(
    lib: &CorrelatedLibrary,
    ch: &ChannelConfig,
    memory: f64,
    pi: &CacheAllocation,
) -> Result<f64, ModelError> {
    let profiles = worst_case_profiles(lib.n_files(), ch.n_users())?;
    let spec = cache_split(lib, ch.n_users(), memory, pi);
    Ok(constructive_power(&profiles, &spec, ch))
}
