//! Coded placement with piggybacked delivery.
//!
//! Every subfile of the top `N_e = min(N, K)` commonness levels is split into a
//! part of rate `M` that enters the caches and a remainder. User `k` caches
//! the XOR of the cached parts of every subfile at level `N − k + 1`.
//! Delivery has one superposition level per distinct request. When the
//! level's target user holds the matching cache, the XOR it caches indexes the
//! row of the codebook: the target decodes only the column, while stronger
//! users decode both and learn the XOR as well.

use thiserror::Error;

use crate::bounds::{fresh_rate, rho_tilde};
use crate::combinatorics::subsets_of_size;
use crate::model::{ChannelConfig, CorrelatedLibrary, DemandVector, SubfileId};
use crate::power::{tight_power, PowerResult};
use crate::tokens::{Basis, SymbolicRate, Token, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PiggybackError {
    #[error("cache size {memory} exceeds the smallest split subfile rate {limit}")]
    NotApplicable { memory: f64, limit: f64 },
    #[error("demand has {got} users, expected {expected}")]
    UserMismatch { expected: usize, got: usize },
}

/// Largest cache size the scheme supports: `min_{ℓ ≥ max(N−K, 1)} R_ℓ`.
pub fn applicability_limit(lib: &CorrelatedLibrary, n_users: usize) -> f64 {
    let n = lib.n_files();
    let first = n.saturating_sub(n_users).max(1);
    (first..=n).map(|l| lib.level_rate(l)).fold(f64::INFINITY, f64::min)
}

pub fn piggyback_applicable(lib: &CorrelatedLibrary, n_users: usize, memory: f64) -> bool {
    memory >= 0.0 && memory <= applicability_limit(lib, n_users)
}

fn check(lib: &CorrelatedLibrary, n_users: usize, memory: f64) -> Result<(), PiggybackError> {
    if piggyback_applicable(lib, n_users, memory) {
        Ok(())
    } else {
        Err(PiggybackError::NotApplicable { memory, limit: applicability_limit(lib, n_users) })
    }
}

/// Whether subfiles of `level` are split (levels `N − N_e + 1 ..= N`).
pub fn is_split_level(n_files: usize, n_users: usize, level: usize) -> bool {
    level + n_files.min(n_users) > n_files
}

/// Tokens making up subfile `s`; zero-rate pieces are omitted.
pub fn subfile_tokens(lib: &CorrelatedLibrary, n_users: usize, memory: f64, s: SubfileId) -> Vec<Token> {
    let l = s.level();
    let rate = lib.level_rate(l);
    if memory > 0.0 && is_split_level(lib.n_files(), n_users, l) {
        let mut out = vec![Token::Cached(s)];
        if rate > memory {
            out.push(Token::Uncached(s));
        }
        out
    } else if rate > 0.0 {
        vec![Token::Whole(s)]
    } else {
        Vec::new()
    }
}

/// Exact size of a token produced by this scheme.
pub fn token_size(token: &Token) -> SymbolicRate {
    let one = Q::from_integer(1);
    match *token {
        Token::Cached(_) => SymbolicRate::of(Basis::Memory, one),
        Token::Uncached(s) => SymbolicRate::of(Basis::Remainder(s.level()), one),
        Token::Whole(s) => SymbolicRate::of(Basis::Level(s.level()), one),
        Token::Part { .. } => panic!("memory-sharing parts do not occur in coded placement"),
    }
}

/// Numeric value of the basis rates used by this scheme.
pub fn basis_value(lib: &CorrelatedLibrary, memory: f64, b: Basis) -> f64 {
    match b {
        Basis::Memory => memory,
        Basis::Remainder(l) => lib.level_rate(l) - memory,
        Basis::Level(l) => lib.level_rate(l),
        Basis::Share { .. } => panic!("class shares do not occur in coded placement"),
    }
}

/// Every token of file `file` (1-based).
pub fn file_tokens(lib: &CorrelatedLibrary, n_users: usize, memory: f64, file: usize) -> Vec<Token> {
    lib.file_subfiles(file)
        .flat_map(|s| subfile_tokens(lib, n_users, memory, s))
        .collect()
}

/// Cache of every user (0-based) as the tokens of one XOR:
/// `Z_k = ⊕_{|S| = N−k+1} W̄^C_S` for `k ≤ N_e`, empty otherwise.
pub fn coded_place(
    lib: &CorrelatedLibrary,
    n_users: usize,
    memory: f64,
) -> Result<Vec<Vec<Token>>, PiggybackError> {
    check(lib, n_users, memory)?;
    let n = lib.n_files();
    let ne = n.min(n_users);
    Ok((0..n_users)
        .map(|k| {
            if k >= ne || memory == 0.0 {
                return Vec::new();
            }
            subsets_of_size(n, n - k)
                .map(|m| Token::Cached(SubfileId::from_mask(m as u32)))
                .collect()
        })
        .collect())
}

/// One superposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMessage {
    /// 1-based level index `i`.
    pub level: usize,
    /// Target user `k_i` (0-based): the weakest user requesting the level's file.
    pub target: usize,
    /// Tokens XORed into the row index; empty when no row is used.
    pub row: Vec<Token>,
    /// Tokens carried by the column codeword, each delivered individually.
    pub column: Vec<Token>,
    pub row_rate: f64,
    pub column_rate: f64,
}

impl LevelMessage {
    pub fn rate(&self) -> f64 {
        self.row_rate + self.column_rate
    }
}

/// Levels for demand `demand`.
///
/// Level `i` serves `d_{k_i}`, the `i`-th distinct request. Its column holds
/// every subfile that contains `d_{k_i}` and none of the earlier files. When
/// `k_i = i` the target caches `Z_i`, which is sent as the row, and the one
/// level-`(N−i+1)` subfile in the column contributes only its remainder.
pub fn build_level_messages(
    lib: &CorrelatedLibrary,
    n_users: usize,
    memory: f64,
    demand: &DemandVector,
) -> Result<Vec<LevelMessage>, PiggybackError> {
    let caches = coded_place(lib, n_users, memory)?;
    if demand.n_users() != n_users {
        return Err(PiggybackError::UserMismatch { expected: n_users, got: demand.n_users() });
    }
    let n = lib.n_files();
    let all = (1u32 << n) - 1;
    let eval = |tokens: &[Token]| -> f64 {
        tokens
            .iter()
            .map(|t| token_size(t).eval(|b| basis_value(lib, memory, b)))
            .sum()
    };
    let mut prev = 0u32;
    let mut levels = Vec::new();
    for (i, &k) in demand.first_requesters().iter().enumerate() {
        let file = demand.of(k);
        let free = all & !prev;
        let top = SubfileId::from_mask(free);
        let row: Vec<Token> = if k == i { caches[k].clone() } else { Vec::new() };
        let mut column = Vec::new();
        for s in lib.subfiles() {
            if s.mask() & prev != 0 || !s.contains(file) {
                continue;
            }
            let tokens = subfile_tokens(lib, n_users, memory, s);
            if s == top && !row.is_empty() {
                column.extend(tokens.into_iter().filter(|t| !matches!(t, Token::Cached(_))));
            } else {
                column.extend(tokens);
            }
        }
        let row_rate = if row.is_empty() { 0.0 } else { memory };
        levels.push(LevelMessage {
            level: i + 1,
            target: k,
            column_rate: eval(&column),
            row,
            column,
            row_rate,
        });
        prev |= 1 << (file - 1);
    }
    Ok(levels)
}

/// Per-level powers making both decoding conditions of every level tight:
/// the column at the target's gain and the full level at the next user's gain.
/// `per_level[i-1]` is the power of level `i`; unused entries are zero.
pub fn level_power_conditions(levels: &[LevelMessage], ch: &ChannelConfig) -> PowerResult {
    let k_users = ch.n_users();
    let g = ch.gains_sq();
    let mut per_level = vec![0.0; k_users.max(levels.len())];
    let mut above = 0.0;
    for lv in levels.iter().rev() {
        let k = lv.target;
        let mut p = tight_power(lv.column_rate, g[k], above);
        if k + 1 < k_users {
            p = p.max(tight_power(lv.rate(), g[k + 1], above));
        }
        per_level[lv.level - 1] = p;
        above += p;
    }
    PowerResult { per_level, total: above }
}

/// Both candidate powers of every level in the closed-form recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct PiggybackBreakdown {
    pub per_level: Vec<f64>,
    /// Power needed by user `k` for `ρ̃_k` at its own gain.
    pub own: Vec<f64>,
    /// Power needed by user `k + 1` for `ρ̃_k + M`; `None` for the strongest user.
    pub next: Vec<Option<f64>>,
    pub total: f64,
}

impl PiggybackBreakdown {
    /// Whether the own-gain term dominates at every level.
    pub fn own_term_dominates(&self) -> bool {
        self.own
            .iter()
            .zip(&self.next)
            .all(|(o, n)| n.is_none_or(|n| *o >= n))
    }
}

/// Closed-form recursion from level `N_e` down.
pub fn piggyback_breakdown(
    lib: &CorrelatedLibrary,
    ch: &ChannelConfig,
    memory: f64,
) -> Result<PiggybackBreakdown, PiggybackError> {
    check(lib, ch.n_users(), memory)?;
    let k_users = ch.n_users();
    let g = ch.gains_sq();
    let rho = rho_tilde(lib, k_users, memory);
    let ne = rho.len();
    let mut per_level = vec![0.0; k_users];
    let mut own = vec![0.0; ne];
    let mut next = vec![None; ne];
    let mut above = 0.0;
    for k in (0..ne).rev() {
        own[k] = tight_power(rho[k], g[k], above);
        if k + 1 < k_users {
            next[k] = Some(tight_power(rho[k] + memory, g[k + 1], above));
        }
        let p = next[k].map_or(own[k], |n: f64| n.max(own[k]));
        per_level[k] = p;
        above += p;
    }
    Ok(PiggybackBreakdown { per_level, own, next, total: above })
}

pub fn piggyback_power(lib: &CorrelatedLibrary, ch: &ChannelConfig, memory: f64) -> Result<f64, PiggybackError> {
    Ok(piggyback_breakdown(lib, ch, memory)?.total)
}

/// Whether the piggyback power coincides with the lower bound, i.e. no
/// level is limited by the stronger user's full-rate condition.
pub fn meets_lower_bound(lib: &CorrelatedLibrary, ch: &ChannelConfig, memory: f64) -> Result<bool, PiggybackError> {
    Ok(piggyback_breakdown(lib, ch, memory)?.own_term_dominates())
}

/// Demand whose first `N_e` users request files `1..N_e` and the rest file 1.
pub fn worst_case_demand(n_files: usize, n_users: usize) -> DemandVector {
    let d = (1..=n_users).map(|k| if k <= n_files { k } else { 1 }).collect();
    DemandVector::new(d, n_files).expect("files are in range")
}

/// Power of the explicit levels on the worst-case demand.
pub fn constructive_power(lib: &CorrelatedLibrary, ch: &ChannelConfig, memory: f64) -> Result<f64, PiggybackError> {
    let d = worst_case_demand(lib.n_files(), ch.n_users());
    let levels = build_level_messages(lib, ch.n_users(), memory, &d)?;
    Ok(level_power_conditions(&levels, ch).total)
}

/// Rate of level `i` with no cache: everything file `d_{k_i}` holds outside
/// the earlier files.
pub fn level_rate(lib: &CorrelatedLibrary, level: usize) -> f64 {
    fresh_rate(lib, level)
}
