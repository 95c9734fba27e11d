use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Upper bound on the number of token suits; deck files carry this many cost columns.
pub const MAX_SUITS: usize = 5;

/// Per-suit token counts.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenVector(pub [u8; MAX_SUITS]);

impl TokenVector {
    pub const ZERO: TokenVector = TokenVector([0; MAX_SUITS]);

    pub fn new(counts: [u8; MAX_SUITS]) -> Self {
        TokenVector(counts)
    }

    /// A vector with `count` in each of the first `num_suits` entries.
    pub fn filled(count: u8, num_suits: usize) -> Self {
        let mut v = TokenVector::ZERO;
        for slot in v.0.iter_mut().take(num_suits) {
            *slot = count;
        }
        v
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&c| u32::from(c)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// True when every entry of `self` is at least the matching entry of `other`.
    pub fn covers(&self, other: &TokenVector) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a >= b)
    }

    pub fn checked_sub(&self, other: &TokenVector) -> Option<TokenVector> {
        let mut out = TokenVector::ZERO;
        for i in 0..MAX_SUITS {
            out.0[i] = self.0[i].checked_sub(other.0[i])?;
        }
        Some(out)
    }

    pub fn checked_add(&self, other: &TokenVector) -> Option<TokenVector> {
        let mut out = TokenVector::ZERO;
        for i in 0..MAX_SUITS {
            out.0[i] = self.0[i].checked_add(other.0[i])?;
        }
        Some(out)
    }

    /// Entry-wise `max(self - other, 0)`.
    pub fn saturating_sub(&self, other: &TokenVector) -> TokenVector {
        let mut out = TokenVector::ZERO;
        for i in 0..MAX_SUITS {
            out.0[i] = self.0[i].saturating_sub(other.0[i]);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.0.iter().copied().enumerate()
    }

    /// Suits with a non-zero count, ascending.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.iter().filter(|&(_, c)| c > 0)
    }
}

impl Index<usize> for TokenVector {
    type Output = u8;
    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

impl IndexMut<usize> for TokenVector {
    fn index_mut(&mut self, i: usize) -> &mut u8 {
        &mut self.0[i]
    }
}

impl fmt::Debug for TokenVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Tokens plus jokers moved as a unit: the payment of a buy, or the
/// give-back component of an action that would exceed the holding cap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenBundle {
    pub tokens: TokenVector,
    pub jokers: u8,
}

impl TokenBundle {
    pub const EMPTY: TokenBundle = TokenBundle {
        tokens: TokenVector::ZERO,
        jokers: 0,
    };

    pub fn total(&self) -> u32 {
        self.tokens.total() + u32::from(self.jokers)
    }

    pub fn is_empty(&self) -> bool {
        self.jokers == 0 && self.tokens.is_zero()
    }
}
