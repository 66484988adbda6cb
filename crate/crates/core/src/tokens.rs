//! Symbolic content tokens and their exact sizes.
//!
//! A size is a linear combination, with rational coefficients, of a few real
//! basis rates (for example "the A-class share of level 2"). Equal-size checks
//! and per-user totals are done on the coefficients, so they are exact even
//! though the basis rates themselves are floating point.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use num_rational::Ratio;
use num_traits::Zero;

use crate::model::SubfileId;

pub type Q = Ratio<i64>;

/// Memory-sharing class of a subfile part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartClass {
    A,
    B,
}

impl fmt::Display for PartClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartClass::A => write!(f, "A"),
            PartClass::B => write!(f, "B"),
        }
    }
}

/// Real-valued rate that sizes are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    /// `(t_B − t_ℓ) R_ℓ` for class A, `(t_ℓ − t_A) R_ℓ` for class B.
    Share { level: usize, class: PartClass },
    /// Whole-subfile rate `R_ℓ`.
    Level(usize),
    /// Cache size `M`.
    Memory,
    /// `R_ℓ − M`.
    Remainder(usize),
}

/// Exact size: rational coefficients over [`Basis`] rates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SymbolicRate(BTreeMap<Basis, Q>);

impl SymbolicRate {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn of(basis: Basis, coeff: Q) -> Self {
        let mut m = BTreeMap::new();
        if !coeff.is_zero() {
            m.insert(basis, coeff);
        }
        SymbolicRate(m)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, basis: Basis) -> Q {
        self.0.get(&basis).copied().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Basis, Q)> + '_ {
        self.0.iter().map(|(b, c)| (*b, *c))
    }

    /// Numeric value given the basis rates.
    pub fn eval(&self, value: impl Fn(Basis) -> f64) -> f64 {
        self.0
            .iter()
            .map(|(b, c)| *c.numer() as f64 / *c.denom() as f64 * value(*b))
            .sum()
    }
}

impl AddAssign<&SymbolicRate> for SymbolicRate {
    fn add_assign(&mut self, rhs: &SymbolicRate) {
        for (b, c) in &rhs.0 {
            let e = self.0.entry(*b).or_insert_with(Q::zero);
            *e += *c;
            if e.is_zero() {
                self.0.remove(b);
            }
        }
    }
}

impl Add for &SymbolicRate {
    type Output = SymbolicRate;

    fn add(self, rhs: &SymbolicRate) -> SymbolicRate {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Mul<Q> for &SymbolicRate {
    type Output = SymbolicRate;

    fn mul(self, k: Q) -> SymbolicRate {
        if k.is_zero() {
            return SymbolicRate::zero();
        }
        SymbolicRate(self.0.iter().map(|(b, c)| (*b, *c * k)).collect())
    }
}

/// Atomic piece of content handled by placement and delivery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    /// Memory-sharing part `W̄^class_{S,T}` cached by the users in `holders`
    /// (bitmask over 0-based users).
    Part {
        subfile: SubfileId,
        class: PartClass,
        holders: u64,
    },
    /// A subfile that is never split.
    Whole(SubfileId),
    /// The part of a subfile that enters the coded caches (rate `M`).
    Cached(SubfileId),
    /// The rest of a split subfile (rate `R_ℓ − M`).
    Uncached(SubfileId),
}

impl Token {
    pub fn subfile(&self) -> SubfileId {
        match *self {
            Token::Part { subfile, .. }
            | Token::Whole(subfile)
            | Token::Cached(subfile)
            | Token::Uncached(subfile) => subfile,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Part { subfile, class, holders } => {
                write!(f, "W{class}_{subfile},{{")?;
                for (i, u) in crate::combinatorics::bits(*holders).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", u + 1)?;
                }
                write!(f, "}}")
            }
            Token::Whole(s) => write!(f, "W_{s}"),
            Token::Cached(s) => write!(f, "WC_{s}"),
            Token::Uncached(s) => write!(f, "WU_{s}"),
        }
    }
}
