//! Correlated library, channel and demand types shared by every scheme.
//!
//! A library of `N` files is described by one rate per commonness level:
//! subfile `W_S` (one for every nonempty `S ⊆ [N]`) is shared exclusively by
//! the files in `S` and carries `R_|S|` bits per channel use. File `i` is the
//! union of all subfiles whose member set contains `i`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::combinatorics::{binomial, binomial_f64, bits};

/// Largest `N` or `K` accepted by operations that enumerate subfiles or demands.
pub const MAX_EXHAUSTIVE: usize = 16;

const ALPHA_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("library must contain at least one file")]
    NoFiles,
    #[error("level rate R_{level} = {value} must be finite and non-negative")]
    InvalidRate { level: usize, value: f64 },
    #[error("channel must have at least one user")]
    NoUsers,
    #[error("squared gain of user {user} is {value}; gains must be finite and positive")]
    InvalidGain { user: usize, value: f64 },
    #[error("squared gains must be sorted weakest first (user {user} is weaker than user {prev})")]
    UnsortedGains { user: usize, prev: usize },
    #[error("demand of user {user} is {file}, outside [1, {n_files}]")]
    DemandOutOfRange { user: usize, file: usize, n_files: usize },
    #[error("alpha_{index} = {value} is outside [0, 1]")]
    InvalidAlpha { index: usize, value: f64 },
    #[error("alpha fractions sum to {sum}, expected 1")]
    AlphaSum { sum: f64 },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{what} = {value} exceeds the exhaustive-enumeration cap of {MAX_EXHAUSTIVE}")]
    TooLarge { what: &'static str, value: usize },
}

/// Identifier of a subfile: the nonempty set of files that share it,
/// stored as a bitmask where bit `i - 1` stands for file `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubfileId(u32);

impl SubfileId {
    pub fn from_mask(mask: u32) -> Self {
        assert!(mask != 0, "subfile member set must be nonempty");
        SubfileId(mask)
    }

    /// Builds the id from 1-based file indices.
    pub fn from_files(files: &[usize]) -> Self {
        let mask = files.iter().fold(0u32, |m, &f| {
            assert!((1..=32).contains(&f), "file index {f} out of range");
            m | 1 << (f - 1)
        });
        Self::from_mask(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    /// Commonness level `|S|`.
    pub fn level(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, file: usize) -> bool {
        file >= 1 && self.0 >> (file - 1) & 1 == 1
    }

    /// Member files, 1-based and ascending.
    pub fn files(self) -> impl Iterator<Item = usize> {
        bits(self.0 as u64).map(|b| b + 1)
    }
}

impl fmt::Display for SubfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, file) in self.files().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{file}")?;
        }
        write!(f, "}}")
    }
}

/// `N` correlated files described by per-level subfile rates `R_1..R_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedLibrary {
    level_rates: Vec<f64>,
}

impl CorrelatedLibrary {
    pub fn new(level_rates: Vec<f64>) -> Result<Self, ModelError> {
        if level_rates.is_empty() {
            return Err(ModelError::NoFiles);
        }
        for (i, &r) in level_rates.iter().enumerate() {
            if !r.is_finite() || r < 0.0 {
                return Err(ModelError::InvalidRate { level: i + 1, value: r });
            }
        }
        Ok(CorrelatedLibrary { level_rates })
    }

    /// Library whose level rates realise the given file-length fractions.
    pub fn from_alpha(alpha: &AlphaProfile, total_rate: f64) -> Result<Self, ModelError> {
        if !total_rate.is_finite() || total_rate < 0.0 {
            return Err(ModelError::InvalidRate { level: 0, value: total_rate });
        }
        let n = alpha.fractions.len();
        let rates = alpha
            .fractions
            .iter()
            .enumerate()
            .map(|(i, &a)| a * total_rate / binomial_f64(n - 1, i))
            .collect();
        Self::new(rates)
    }

    pub fn n_files(&self) -> usize {
        self.level_rates.len()
    }

    pub fn level_rates(&self) -> &[f64] {
        &self.level_rates
    }

    /// Rate `R_ℓ` of every subfile at commonness level `level` (1-based).
    pub fn level_rate(&self, level: usize) -> f64 {
        self.level_rates[level - 1]
    }

    pub fn subfile_rate(&self, s: SubfileId) -> f64 {
        self.level_rate(s.level())
    }

    /// `R = Σ_ℓ C(N-1, ℓ-1) R_ℓ`, identical for every file.
    pub fn file_rate(&self) -> f64 {
        let n = self.n_files();
        self.level_rates
            .iter()
            .enumerate()
            .map(|(i, &r)| binomial_f64(n - 1, i) * r)
            .sum()
    }

    /// File-length fraction carried by each sublibrary. An all-zero library
    /// maps to the private-only profile.
    pub fn alpha(&self) -> AlphaProfile {
        let n = self.n_files();
        let total = self.file_rate();
        let fractions = if total > 0.0 {
            self.level_rates
                .iter()
                .enumerate()
                .map(|(i, &r)| binomial_f64(n - 1, i) * r / total)
                .collect()
        } else {
            let mut f = vec![0.0; n];
            f[0] = 1.0;
            f
        };
        AlphaProfile { fractions }
    }

    /// Same file rate with all mass moved to private subfiles, i.e. each file
    /// treated as an independent sequence.
    pub fn correlation_ignorant(&self) -> Self {
        let mut rates = vec![0.0; self.n_files()];
        rates[0] = self.file_rate();
        CorrelatedLibrary { level_rates: rates }
    }

    /// All subfiles of sublibrary `L_level`, ascending by bitmask.
    pub fn sublibrary(&self, level: usize) -> Vec<SubfileId> {
        let n = self.n_files();
        assert!(n <= MAX_EXHAUSTIVE, "subfile enumeration capped at N = {MAX_EXHAUSTIVE}");
        crate::combinatorics::subsets_of_size(n, level)
            .map(|m| SubfileId::from_mask(m as u32))
            .collect()
    }

    /// All `2^N - 1` subfiles, ascending by bitmask.
    pub fn subfiles(&self) -> impl Iterator<Item = SubfileId> {
        let n = self.n_files();
        assert!(n <= MAX_EXHAUSTIVE, "subfile enumeration capped at N = {MAX_EXHAUSTIVE}");
        (1u32..1 << n).map(SubfileId::from_mask)
    }

    /// Subfiles composing file `file` (1-based).
    pub fn file_subfiles(&self, file: usize) -> impl Iterator<Item = SubfileId> {
        self.subfiles().filter(move |s| s.contains(file))
    }

    /// Number of subfiles in `L_level`.
    pub fn sublibrary_size(&self, level: usize) -> u64 {
        binomial(self.n_files(), level)
    }
}

/// Fraction `α_ℓ = C(N-1, ℓ-1) R_ℓ / R` of each file held in sublibrary `L_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaProfile {
    fractions: Vec<f64>,
}

impl AlphaProfile {
    pub fn new(fractions: Vec<f64>) -> Result<Self, ModelError> {
        if fractions.is_empty() {
            return Err(ModelError::NoFiles);
        }
        for (i, &a) in fractions.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) {
                return Err(ModelError::InvalidAlpha { index: i + 1, value: a });
            }
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(ModelError::AlphaSum { sum });
        }
        Ok(AlphaProfile { fractions })
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }
}

/// Squared channel gains `h_1² ≤ … ≤ h_K²`, weakest user first.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    gains_sq: Vec<f64>,
}

impl ChannelConfig {
    pub fn new(gains_sq: Vec<f64>) -> Result<Self, ModelError> {
        if gains_sq.is_empty() {
            return Err(ModelError::NoUsers);
        }
        for (i, &g) in gains_sq.iter().enumerate() {
            if !g.is_finite() || g <= 0.0 {
                return Err(ModelError::InvalidGain { user: i + 1, value: g });
            }
            if i > 0 && g < gains_sq[i - 1] {
                return Err(ModelError::UnsortedGains { user: i + 1, prev: i });
            }
        }
        Ok(ChannelConfig { gains_sq })
    }

    /// Channel with `1/h_k² = intercept - slope·(k-1)` for `k = 1..=n_users`.
    pub fn linear_inverse_profile(
        n_users: usize,
        intercept: f64,
        slope: f64,
    ) -> Result<Self, ModelError> {
        let gains = (0..n_users)
            .map(|k| 1.0 / (intercept - slope * k as f64))
            .collect();
        Self::new(gains)
    }

    pub fn n_users(&self) -> usize {
        self.gains_sq.len()
    }

    pub fn gains_sq(&self) -> &[f64] {
        &self.gains_sq
    }

    /// Every gain multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, ModelError> {
        Self::new(self.gains_sq.iter().map(|g| g * factor).collect())
    }
}

/// Requested file `d_k ∈ [1, N]` of every user `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DemandVector {
    demands: Vec<usize>,
}

impl DemandVector {
    pub fn new(demands: Vec<usize>, n_files: usize) -> Result<Self, ModelError> {
        if demands.is_empty() {
            return Err(ModelError::NoUsers);
        }
        for (k, &d) in demands.iter().enumerate() {
            if d == 0 || d > n_files {
                return Err(ModelError::DemandOutOfRange { user: k + 1, file: d, n_files });
            }
        }
        Ok(DemandVector { demands })
    }

    pub fn n_users(&self) -> usize {
        self.demands.len()
    }

    /// Demand of user `user` (0-based index).
    pub fn of(&self, user: usize) -> usize {
        self.demands[user]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.demands
    }

    /// Number of distinct requested files `N_e(d)`.
    pub fn distinct_count(&self) -> usize {
        self.files_mask().count_ones() as usize
    }

    /// Set of requested files as a subfile-style bitmask.
    pub fn files_mask(&self) -> u32 {
        self.demands.iter().fold(0, |m, &d| m | 1 << (d - 1))
    }

    /// Bitmask (over 0-based users) of users requesting any file in `files`.
    pub fn users_requesting(&self, files: u32) -> u64 {
        self.demands
            .iter()
            .enumerate()
            .filter(|(_, &d)| files >> (d - 1) & 1 == 1)
            .fold(0, |m, (k, _)| m | 1 << k)
    }

    /// Weakest user requesting each distinct file, ascending: `k_1 < … < k_{N_e}`.
    pub fn first_requesters(&self) -> Vec<usize> {
        let mut seen = 0u32;
        let mut out = Vec::new();
        for (k, &d) in self.demands.iter().enumerate() {
            if seen >> (d - 1) & 1 == 0 {
                seen |= 1 << (d - 1);
                out.push(k);
            }
        }
        out
    }
}

impl fmt::Display for DemandVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.demands.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

pub fn distinct_demand_count(d: &DemandVector) -> usize {
    d.distinct_count()
}

/// `|𝔇_d| = C(N, N_e) · N_e! · N^(K - N_e)`.
pub fn worst_case_demand_count(n_files: usize, n_users: usize) -> u128 {
    let ne = n_files.min(n_users);
    let perms: u128 = (0..ne).map(|i| (n_files - i) as u128).product();
    perms * (n_files as u128).pow((n_users - ne) as u32)
}

/// Every demand vector in `[N]^K`, lexicographic.
pub fn all_demands(
    n_files: usize,
    n_users: usize,
) -> Result<impl Iterator<Item = DemandVector>, ModelError> {
    check_caps(n_files, n_users)?;
    let mut cur = Some(vec![1usize; n_users]);
    Ok(std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut pos = n_users;
        loop {
            if pos == 0 {
                cur = None;
                break;
            }
            pos -= 1;
            if next[pos] < n_files {
                next[pos] += 1;
                cur = Some(next);
                break;
            }
            next[pos] = 1;
        }
        Some(DemandVector { demands: out })
    }))
}

/// Demand vectors whose first `min(N, K)` users request distinct files.
pub fn worst_case_demand_set(
    n_files: usize,
    n_users: usize,
) -> Result<impl Iterator<Item = DemandVector>, ModelError> {
    let ne = n_files.min(n_users);
    Ok(all_demands(n_files, n_users)?.filter(move |d| {
        let head = &d.demands[..ne];
        head.iter()
            .fold(0u32, |m, &f| m | 1 << (f - 1))
            .count_ones() as usize
            == ne
    }))
}

/// `count` members of the worst-case demand set drawn with a seeded
/// generator, for instances too large to enumerate.
pub fn sample_worst_case_demands(
    n_files: usize,
    n_users: usize,
    count: usize,
    seed: u64,
) -> Vec<DemandVector> {
    assert!(n_files <= 32 && n_users <= 64, "demand masks hold at most 32 files and 64 users");
    let ne = n_files.min(n_users);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut files: Vec<usize> = (1..=n_files).collect();
            files.shuffle(&mut rng);
            let mut demands = files[..ne].to_vec();
            demands.extend((ne..n_users).map(|_| rng.gen_range(1..=n_files)));
            DemandVector { demands }
        })
        .collect()
}

fn check_caps(n_files: usize, n_users: usize) -> Result<(), ModelError> {
    if n_files == 0 {
        return Err(ModelError::NoFiles);
    }
    if n_users == 0 {
        return Err(ModelError::NoUsers);
    }
    if n_files > MAX_EXHAUSTIVE {
        return Err(ModelError::TooLarge { what: "N", value: n_files });
    }
    if n_users > MAX_EXHAUSTIVE {
        return Err(ModelError::TooLarge { what: "K", value: n_users });
    }
    Ok(())
}
