use serde::{Deserialize, Serialize};

use super::tokens::{TokenBundle, TokenVector};

/// One player move. Take and reserve actions carry the tokens handed back
/// when the move would push the player above the holding cap; buys carry
/// the exact payment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    TakeDifferent { suits: TokenVector, returns: TokenBundle },
    TakeSame { suit: u8, returns: TokenBundle },
    BuyFaceUp { deck: u8, slot: u8, payment: TokenBundle },
    BuyReserved { hidden: bool, index: u8, payment: TokenBundle },
    ReserveFaceUp { deck: u8, slot: u8, returns: TokenBundle },
    ReserveDeckTop { deck: u8, returns: TokenBundle },
    Pass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    TakeDifferent,
    TakeSame,
    BuyFaceUp,
    BuyReserved,
    ReserveFaceUp,
    ReserveDeckTop,
    Pass,
}

impl ActionKind {
    pub const ALL: [ActionKind; 7] = [
        ActionKind::TakeDifferent,
        ActionKind::TakeSame,
        ActionKind::BuyFaceUp,
        ActionKind::BuyReserved,
        ActionKind::ReserveFaceUp,
        ActionKind::ReserveDeckTop,
        ActionKind::Pass,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::TakeDifferent { .. } => ActionKind::TakeDifferent,
            Action::TakeSame { .. } => ActionKind::TakeSame,
            Action::BuyFaceUp { .. } => ActionKind::BuyFaceUp,
            Action::BuyReserved { .. } => ActionKind::BuyReserved,
            Action::ReserveFaceUp { .. } => ActionKind::ReserveFaceUp,
            Action::ReserveDeckTop { .. } => ActionKind::ReserveDeckTop,
            Action::Pass => ActionKind::Pass,
        }
    }

    pub fn is_buy(&self) -> bool {
        matches!(self, Action::BuyFaceUp { .. } | Action::BuyReserved { .. })
    }
}

/// Small bit set over [`ActionKind`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KindSet(u8);

impl KindSet {
    pub fn insert(&mut self, kind: ActionKind) {
        self.0 |= 1 << kind.index();
    }

    pub fn contains(&self, kind: ActionKind) -> bool {
        self.0 & (1 << kind.index()) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = ActionKind> + '_ {
        ActionKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }
}
