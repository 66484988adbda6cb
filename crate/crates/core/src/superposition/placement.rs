//! Memory-sharing uncoded placement.

use crate::combinatorics::{binomial, subsets_of_size};
use crate::model::{CorrelatedLibrary, ModelError, SubfileId};
use crate::tokens::{Basis, PartClass, SymbolicRate, Token, Q};

/// Distance to the nearest integer below which `t_ℓ` is treated as integral.
pub const INTEGRALITY_TOL: f64 = 1e-9;

/// Fraction `π_ℓ` of the cache given to sublibrary `L_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheAllocation {
    pi: Vec<f64>,
}

impl CacheAllocation {
    pub fn new(pi: Vec<f64>) -> Result<Self, ModelError> {
        if pi.is_empty() {
            return Err(ModelError::NoFiles);
        }
        for (i, &p) in pi.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(ModelError::InvalidAlpha { index: i + 1, value: p });
            }
        }
        let sum: f64 = pi.iter().sum();
        if sum > 1.0 + 1e-9 {
            return Err(ModelError::AlphaSum { sum });
        }
        Ok(CacheAllocation { pi })
    }

    /// Whole cache on one sublibrary (1-based level).
    pub fn single(n_files: usize, level: usize) -> Self {
        let mut pi = vec![0.0; n_files];
        pi[level - 1] = 1.0;
        CacheAllocation { pi }
    }

    /// Cache split in proportion to the sublibrary sizes `C(N,ℓ) R_ℓ`.
    pub fn proportional(lib: &CorrelatedLibrary) -> Self {
        let n = lib.n_files();
        let sizes: Vec<f64> = (1..=n)
            .map(|l| lib.sublibrary_size(l) as f64 * lib.level_rate(l))
            .collect();
        let total: f64 = sizes.iter().sum();
        if total == 0.0 {
            return Self::single(n, 1);
        }
        CacheAllocation { pi: sizes.iter().map(|s| s / total).collect() }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pi
    }
}

/// Placement parameters of one sublibrary.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPlacement {
    pub level: usize,
    pub rate: f64,
    /// Real-valued caching parameter `t_ℓ ∈ [0, K]`.
    pub t: f64,
    /// `⌊t_ℓ⌋`; the B class uses `t_a + 1`.
    pub t_a: usize,
}

impl LevelPlacement {
    fn new(level: usize, rate: f64, t: f64, n_users: usize) -> Self {
        let mut t = t.clamp(0.0, n_users as f64);
        if (t - t.round()).abs() < INTEGRALITY_TOL {
            t = t.round();
        }
        LevelPlacement { level, rate, t, t_a: t.floor() as usize }
    }

    pub fn t_b(&self) -> usize {
        self.t_a + 1
    }

    pub fn t_of(&self, class: PartClass) -> usize {
        match class {
            PartClass::A => self.t_a,
            PartClass::B => self.t_b(),
        }
    }

    /// Rate of the class share of each subfile: `(t_B − t)R_ℓ` or `(t − t_A)R_ℓ`.
    pub fn share(&self, class: PartClass) -> f64 {
        match class {
            PartClass::A => (self.t_b() as f64 - self.t) * self.rate,
            PartClass::B => (self.t - self.t_a as f64) * self.rate,
        }
    }

    /// Classes that carry a positive share.
    pub fn classes(&self) -> impl Iterator<Item = PartClass> + '_ {
        [PartClass::A, PartClass::B]
            .into_iter()
            .filter(|&c| self.share(c) > 0.0)
    }

    /// Exact size of one part of the given class: `share / C(K, t_class)`.
    pub fn part_size(&self, class: PartClass, n_users: usize) -> SymbolicRate {
        let parts = binomial(n_users, self.t_of(class));
        SymbolicRate::of(
            Basis::Share { level: self.level, class },
            Q::new(1, parts as i64),
        )
    }
}

/// Placement parameters for every sublibrary.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementSpec {
    pub n_users: usize,
    pub levels: Vec<LevelPlacement>,
}

impl PlacementSpec {
    pub fn n_files(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, level: usize) -> &LevelPlacement {
        &self.levels[level - 1]
    }

    /// Numeric value of a basis rate produced by this placement.
    pub fn basis_value(&self, b: Basis) -> f64 {
        match b {
            Basis::Share { level, class } => self.level(level).share(class),
            Basis::Level(level) => self.level(level).rate,
            Basis::Memory | Basis::Remainder(_) => {
                panic!("basis {b:?} does not belong to a memory-sharing placement")
            }
        }
    }

    pub fn eval(&self, size: &SymbolicRate) -> f64 {
        size.eval(|b| self.basis_value(b))
    }

    /// All parts of a subfile, A class first, holders ascending.
    pub fn parts(&self, s: SubfileId) -> Vec<Token> {
        let lp = self.level(s.level());
        let k = self.n_users;
        let mut out = Vec::new();
        for class in lp.classes() {
            let t = lp.t_of(class);
            if t > k {
                continue;
            }
            out.extend(subsets_of_size(k, t).map(|holders| Token::Part {
                subfile: s,
                class,
                holders,
            }));
        }
        out
    }

    pub fn part_size(&self, class: PartClass, level: usize) -> SymbolicRate {
        self.level(level).part_size(class, self.n_users)
    }
}

/// Caching parameters `t_ℓ = K π_ℓ M / (C(N,ℓ) R_ℓ)`, clamped to `[0, K]`.
///
/// Sublibraries with `R_ℓ = 0` get `t_ℓ = 0`.
pub fn cache_split(
    lib: &CorrelatedLibrary,
    n_users: usize,
    memory: f64,
    pi: &CacheAllocation,
) -> PlacementSpec {
    let n = lib.n_files();
    assert_eq!(pi.as_slice().len(), n, "one cache fraction per sublibrary");
    let levels = (1..=n)
        .map(|l| {
            let rate = lib.level_rate(l);
            let t = if rate > 0.0 {
                n_users as f64 * pi.as_slice()[l - 1] * memory
                    / (lib.sublibrary_size(l) as f64 * rate)
            } else {
                0.0
            };
            LevelPlacement::new(l, rate, t, n_users)
        })
        .collect();
    PlacementSpec { n_users, levels }
}

/// Placement with explicit caching parameters (clamped, snapped).
pub fn placement_from_t(lib: &CorrelatedLibrary, n_users: usize, t: &[f64]) -> PlacementSpec {
    assert_eq!(t.len(), lib.n_files());
    let levels = t
        .iter()
        .enumerate()
        .map(|(i, &ti)| {
            let rate = lib.level_rate(i + 1);
            LevelPlacement::new(i + 1, rate, if rate > 0.0 { ti } else { 0.0 }, n_users)
        })
        .collect();
    PlacementSpec { n_users, levels }
}

/// Tokens cached by each user (0-based), from every sublibrary.
pub fn place(lib: &CorrelatedLibrary, spec: &PlacementSpec) -> Vec<Vec<Token>> {
    let mut caches = vec![Vec::new(); spec.n_users];
    for s in lib.subfiles() {
        for tok in spec.parts(s) {
            if let Token::Part { holders, .. } = tok {
                for u in crate::combinatorics::bits(holders) {
                    caches[u].push(tok);
                }
            }
        }
    }
    caches
}

/// Every part of every subfile of `file` (1-based).
pub fn file_tokens(lib: &CorrelatedLibrary, spec: &PlacementSpec, file: usize) -> Vec<Token> {
    lib.file_subfiles(file).flat_map(|s| spec.parts(s)).collect()
}
