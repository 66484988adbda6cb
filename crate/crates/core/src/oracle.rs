//! Symbolic decodability check over GF(2).
//!
//! Tokens are interned to indices and every cache entry or received message
//! becomes a linear equation (a set of token indices). A user decodes a token
//! iff its unit vector lies in the span of what it knows. Nothing here looks
//! at rate formulas.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::combinatorics::bits;
use crate::model::{all_demands, CorrelatedLibrary, DemandVector, ModelError};
use crate::piggyback::{self, PiggybackError};
use crate::superposition::{self, PlacementSpec};
use crate::tokens::{SymbolicRate, Token};

/// Number of demand vectors checked when `[N]^K` is too large to enumerate.
pub const SAMPLE_SIZE: usize = 4096;

const SAMPLE_SEED: u64 = 0x0_5ac1e;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("XOR mixes tokens of different sizes: {first} and {other}")]
    UnequalSizes { first: Token, other: Token },
    #[error("token {0} has no registered size")]
    UnknownToken(Token),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Piggyback(#[from] PiggybackError),
}

/// Dense indices and sizes of every token in a scheme instance.
#[derive(Debug, Clone, Default)]
pub struct TokenSpace {
    index: HashMap<Token, usize>,
    tokens: Vec<Token>,
    sizes: Vec<SymbolicRate>,
}

impl TokenSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, token: Token, size: SymbolicRate) -> usize {
        if let Some(&i) = self.index.get(&token) {
            return i;
        }
        let i = self.tokens.len();
        self.index.insert(token, i);
        self.tokens.push(token);
        self.sizes.push(size);
        i
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &Token) -> Result<usize, OracleError> {
        self.index.get(token).copied().ok_or(OracleError::UnknownToken(*token))
    }

    pub fn token(&self, id: usize) -> Token {
        self.tokens[id]
    }

    /// Equation for the XOR of `tokens`, checking that their sizes agree.
    pub fn equation(&self, tokens: &[Token]) -> Result<Equation, OracleError> {
        let mut eq = Equation::zero(self.len());
        let mut first: Option<usize> = None;
        for t in tokens {
            let id = self.id(t)?;
            match first {
                None => first = Some(id),
                Some(f) if self.sizes[f] != self.sizes[id] => {
                    return Err(OracleError::UnequalSizes { first: self.tokens[f], other: *t });
                }
                _ => {}
            }
            eq.flip(id);
        }
        Ok(eq)
    }
}

/// Linear equation over GF(2): the XOR of the tokens whose bits are set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation(Vec<u64>);

impl Equation {
    pub fn zero(n_tokens: usize) -> Self {
        Equation(vec![0; n_tokens.div_ceil(64).max(1)])
    }

    pub fn unit(n_tokens: usize, id: usize) -> Self {
        let mut e = Self::zero(n_tokens);
        e.flip(id);
        e
    }

    pub fn flip(&mut self, id: usize) {
        self.0[id / 64] ^= 1 << (id % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn leading(&self) -> Option<usize> {
        self.highest_below(usize::MAX)
    }

    /// Highest set bit strictly below `limit`.
    fn highest_below(&self, limit: usize) -> Option<usize> {
        let (top_word, mask) = if limit >= self.0.len() * 64 {
            (self.0.len() - 1, u64::MAX)
        } else if limit.is_multiple_of(64) {
            if limit == 0 {
                return None;
            }
            (limit / 64 - 1, u64::MAX)
        } else {
            (limit / 64, (1u64 << (limit % 64)) - 1)
        };
        let first = self.0[top_word] & mask;
        if first != 0 {
            return Some(top_word * 64 + 63 - first.leading_zeros() as usize);
        }
        (0..top_word)
            .rev()
            .find(|&i| self.0[i] != 0)
            .map(|i| i * 64 + 63 - self.0[i].leading_zeros() as usize)
    }

    fn xor(&mut self, other: &Equation) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &w)| bits(w).map(move |b| i * 64 + b))
    }
}

/// Span of everything a user knows, kept in echelon form keyed by the
/// leading token of each row.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeState {
    rows: HashMap<usize, Equation>,
}

impl KnowledgeState {
    pub fn new() -> Self {
        Self::default()
    }

    // Clears every set bit that leads a known row, scanning downwards.
    fn reduce(&self, mut eq: Equation) -> Equation {
        let mut pos = eq.highest_below(usize::MAX);
        while let Some(p) = pos {
            if let Some(row) = self.rows.get(&p) {
                eq.xor(row);
            }
            pos = eq.highest_below(p);
        }
        eq
    }

    /// Adds an equation; returns whether it was new information.
    pub fn learn(&mut self, eq: &Equation) -> bool {
        let r = self.reduce(eq.clone());
        match r.leading() {
            Some(lead) => {
                self.rows.insert(lead, r);
                true
            }
            None => false,
        }
    }

    /// Whether `eq` lies in the span of the known equations.
    pub fn knows(&self, eq: &Equation) -> bool {
        self.reduce(eq.clone()).is_zero()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// A transmission decoded by `target` and by every stronger user.
///
/// Stronger users learn `side_info` and `payload`. The target learns
/// `payload` only if it already knows every `side_info` equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Broadcast {
    pub target: usize,
    pub side_info: Vec<Vec<Token>>,
    pub payload: Vec<Vec<Token>>,
}

/// Placement plus delivery for one demand vector.
#[derive(Debug, Clone)]
pub struct DeliveryInstance {
    pub space: TokenSpace,
    /// Per user (0-based): cached equations.
    pub caches: Vec<Vec<Vec<Token>>>,
    /// Ordered weakest target first.
    pub broadcasts: Vec<Broadcast>,
    /// Per user: tokens of the requested file.
    pub wanted: Vec<Vec<Token>>,
}

/// First token a user fails to recover.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub user: usize,
    pub missing: Token,
}

impl DeliveryInstance {
    /// Runs decoding for user `user`; `None` when every wanted token is recovered.
    pub fn decode(&self, user: usize) -> Result<Option<Failure>, OracleError> {
        let n = self.space.len();
        let mut ks = KnowledgeState::new();
        for eq in &self.caches[user] {
            ks.learn(&self.space.equation(eq)?);
        }
        for b in &self.broadcasts {
            if b.target > user {
                continue;
            }
            let side: Vec<Equation> = b
                .side_info
                .iter()
                .map(|e| self.space.equation(e))
                .collect::<Result<_, _>>()?;
            if b.target == user && !side.iter().all(|e| ks.knows(e)) {
                continue;
            }
            if b.target < user {
                for e in &side {
                    ks.learn(e);
                }
            }
            for e in &b.payload {
                ks.learn(&self.space.equation(e)?);
            }
        }
        for t in &self.wanted[user] {
            if !ks.knows(&Equation::unit(n, self.space.id(t)?)) {
                return Ok(Some(Failure { user, missing: *t }));
            }
        }
        Ok(None)
    }

    pub fn can_decode(&self, user: usize) -> Result<bool, OracleError> {
        Ok(self.decode(user)?.is_none())
    }
}

/// Deliberate corruption used to check that the oracle catches broken schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Empty the cache of this user (0-based).
    DropCache(usize),
    /// Remove the first payload equation sent to this target (0-based).
    DropMessage(usize),
}

impl DeliveryInstance {
    pub fn mutate(&mut self, m: Mutation) {
        match m {
            Mutation::DropCache(u) => {
                if let Some(c) = self.caches.get_mut(u) {
                    c.clear();
                }
            }
            Mutation::DropMessage(u) => {
                if let Some(b) = self
                    .broadcasts
                    .iter_mut()
                    .find(|b| b.target == u && !b.payload.is_empty())
                {
                    b.payload.remove(0);
                }
            }
        }
    }
}

/// Superposition scheme instance: uncoded caches, one broadcast per target.
pub fn superposition_instance(
    lib: &CorrelatedLibrary,
    spec: &PlacementSpec,
    demand: &DemandVector,
) -> DeliveryInstance {
    let mut space = TokenSpace::new();
    for s in lib.subfiles() {
        for tok in spec.parts(s) {
            if let Token::Part { class, .. } = tok {
                space.insert(tok, spec.part_size(class, s.level()));
            }
        }
    }
    let caches = superposition::place(lib, spec)
        .into_iter()
        .map(|c| c.into_iter().map(|t| vec![t]).collect())
        .collect();
    let plan = superposition::generate_messages(lib, spec, demand);
    let broadcasts = (0..spec.n_users)
        .map(|k| Broadcast {
            target: k,
            side_info: Vec::new(),
            payload: plan.targeted_at(k).map(|m| m.tokens.clone()).collect(),
        })
        .collect();
    let wanted = demand
        .as_slice()
        .iter()
        .map(|&f| superposition::placement::file_tokens(lib, spec, f))
        .collect();
    DeliveryInstance { space, caches, broadcasts, wanted }
}

/// Piggyback scheme instance: each level's row is side information for its
/// target and a decoded value for stronger users.
pub fn piggyback_instance(
    lib: &CorrelatedLibrary,
    n_users: usize,
    memory: f64,
    demand: &DemandVector,
) -> Result<DeliveryInstance, OracleError> {
    let mut space = TokenSpace::new();
    for s in lib.subfiles() {
        for tok in piggyback::subfile_tokens(lib, n_users, memory, s) {
            space.insert(tok, piggyback::token_size(&tok));
        }
    }
    let caches = piggyback::coded_place(lib, n_users, memory)?
        .into_iter()
        .map(|z| if z.is_empty() { Vec::new() } else { vec![z] })
        .collect();
    let broadcasts = piggyback::build_level_messages(lib, n_users, memory, demand)?
        .into_iter()
        .map(|lv| Broadcast {
            target: lv.target,
            side_info: if lv.row.is_empty() { Vec::new() } else { vec![lv.row] },
            payload: lv.column.into_iter().map(|t| vec![t]).collect(),
        })
        .collect();
    let wanted = demand
        .as_slice()
        .iter()
        .map(|&f| piggyback::file_tokens(lib, n_users, memory, f))
        .collect();
    Ok(DeliveryInstance { space, caches, broadcasts, wanted })
}

/// Which scheme to verify.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    Superposition(PlacementSpec),
    Piggyback { memory: f64 },
}

/// Outcome of a verification sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub demands_checked: usize,
    pub counterexample: Option<(DemandVector, Failure)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "pass ({} demand vectors)", self.demands_checked),
            Some((d, fail)) => write!(
                f,
                "fail: demand {d}, user {} cannot recover {}",
                fail.user + 1,
                fail.missing
            ),
        }
    }
}

/// Demand vectors checked: all of `[N]^K` up to [`SAMPLE_SIZE`], else a
/// seeded uniform sample.
pub fn verification_demands(n_files: usize, n_users: usize) -> Result<Vec<DemandVector>, OracleError> {
    let total = (n_files as u128).checked_pow(n_users as u32);
    if total.is_some_and(|t| t <= SAMPLE_SIZE as u128) {
        return Ok(all_demands(n_files, n_users)?.collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    (0..SAMPLE_SIZE)
        .map(|_| {
            let d = (0..n_users).map(|_| rng.gen_range(1..=n_files)).collect();
            DemandVector::new(d, n_files).map_err(OracleError::from)
        })
        .collect()
}

/// Checks every user of every demand; stops at the first failure.
pub fn verify_scheme(
    scheme: &Scheme,
    lib: &CorrelatedLibrary,
    n_users: usize,
    mutation: Option<Mutation>,
) -> Result<VerifyReport, OracleError> {
    let demands = verification_demands(lib.n_files(), n_users)?;
    let mut checked = 0;
    for d in demands {
        let mut inst = match scheme {
            Scheme::Superposition(spec) => superposition_instance(lib, spec, &d),
            Scheme::Piggyback { memory } => piggyback_instance(lib, n_users, *memory, &d)?,
        };
        if let Some(m) = mutation {
            inst.mutate(m);
        }
        checked += 1;
        for u in 0..n_users {
            if let Some(fail) = inst.decode(u)? {
                return Ok(VerifyReport { demands_checked: checked, counterexample: Some((d, fail)) });
            }
        }
    }
    Ok(VerifyReport { demands_checked: checked, counterexample: None })
}
