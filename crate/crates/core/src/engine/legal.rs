use super::action::{Action, ActionKind, KindSet};
use super::cards::Card;
use super::params::TAKE_DIFFERENT_COUNT;
use super::state::{GameState, PlayerState};
use super::tokens::{TokenBundle, TokenVector, MAX_SUITS};

impl GameState {
    /// Suits with at least one token on the table.
    pub(crate) fn available_suits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.params.num_suits()).filter(|&s| self.table_tokens[s] > 0)
    }

    /// Number of suits a take-different must pick right now.
    pub(crate) fn take_different_count(&self) -> usize {
        self.available_suits().count().min(TAKE_DIFFERENT_COUNT)
    }

    /// Tokens that must be handed back after gaining `gain` tokens and `gain_jokers` jokers.
    pub(crate) fn excess_after(&self, player: &PlayerState, gain: u32, gain_jokers: u32) -> u32 {
        (player.held() + gain + gain_jokers).saturating_sub(self.params.max_tokens_held)
    }

    pub(crate) fn can_reserve(&self) -> bool {
        self.current().reserved_count() < self.params.max_reserved as usize
    }

    pub(crate) fn reserve_grants_joker(&self) -> bool {
        self.table_jokers > 0
    }

    /// Kinds with at least one legal instantiation. `Pass` is present iff
    /// nothing else is.
    pub fn legal_kinds(&self) -> KindSet {
        let mut kinds = KindSet::default();
        if self.is_terminal() {
            return kinds;
        }
        let pl = self.current();
        if self.available_suits().next().is_some() {
            kinds.insert(ActionKind::TakeDifferent);
        }
        let min_stack = self.params.min_stack_for_take_two;
        if (0..self.params.num_suits()).any(|s| u32::from(self.table_tokens[s]) >= min_stack) {
            kinds.insert(ActionKind::TakeSame);
        }
        if self.face_up.iter().flatten().flatten().any(|c| pl.can_afford(c)) {
            kinds.insert(ActionKind::BuyFaceUp);
        }
        if pl.reserved_visible.iter().chain(&pl.reserved_hidden).any(|c| pl.can_afford(c)) {
            kinds.insert(ActionKind::BuyReserved);
        }
        if self.can_reserve() {
            if self.face_up.iter().flatten().any(Option::is_some) {
                kinds.insert(ActionKind::ReserveFaceUp);
            }
            if self.decks.iter().any(|d| !d.is_empty()) {
                kinds.insert(ActionKind::ReserveDeckTop);
            }
        }
        if kinds.is_empty() {
            kinds.insert(ActionKind::Pass);
        }
        kinds
    }

    /// True iff `action` may be played by the current player now.
    pub fn is_legal(&self, action: &Action) -> bool {
        if self.is_terminal() {
            return false;
        }
        let pl = self.current();
        match *action {
            Action::TakeDifferent { suits, returns } => {
                let n = self.params.num_suits();
                if suits.0.iter().any(|&c| c > 1) || suits.0[n..].iter().any(|&c| c > 0) {
                    return false;
                }
                let count = suits.total() as usize;
                if count == 0 || count != self.take_different_count() {
                    return false;
                }
                if !self.table_tokens.covers(&suits) {
                    return false;
                }
                let after = pl.tokens.checked_add(&suits).expect("token counts fit in u8");
                self.returns_ok(after, pl.jokers, &returns)
            }
            Action::TakeSame { suit, returns } => {
                let suit = suit as usize;
                if suit >= self.params.num_suits()
                    || u32::from(self.table_tokens[suit]) < self.params.min_stack_for_take_two
                {
                    return false;
                }
                let mut after = pl.tokens;
                after[suit] += 2;
                self.returns_ok(after, pl.jokers, &returns)
            }
            Action::BuyFaceUp { deck, slot, payment } => match self.face_up_card(deck as usize, slot as usize) {
                Some(card) => payment_ok(pl, card, &payment),
                None => false,
            },
            Action::BuyReserved { hidden, index, payment } => match pl.reserved(hidden).get(index as usize) {
                Some(card) => payment_ok(pl, card, &payment),
                None => false,
            },
            Action::ReserveFaceUp { deck, slot, returns } => {
                if !self.can_reserve() || self.face_up_card(deck as usize, slot as usize).is_none() {
                    return false;
                }
                self.returns_ok(pl.tokens, pl.jokers + u8::from(self.reserve_grants_joker()), &returns)
            }
            Action::ReserveDeckTop { deck, returns } => {
                if !self.can_reserve() || self.decks.get(deck as usize).is_none_or(|d| d.is_empty()) {
                    return false;
                }
                self.returns_ok(pl.tokens, pl.jokers + u8::from(self.reserve_grants_joker()), &returns)
            }
            Action::Pass => self.legal_kinds().contains(ActionKind::Pass),
        }
    }

    /// Give-back must bring holdings exactly down to the cap, never below it.
    fn returns_ok(&self, after: TokenVector, after_jokers: u8, returns: &TokenBundle) -> bool {
        let held = after.total() + u32::from(after_jokers);
        let excess = held.saturating_sub(self.params.max_tokens_held);
        returns.total() == excess && after.covers(&returns.tokens) && after_jokers >= returns.jokers
    }

    /// Every legal action, including each distinct payment split and give-back.
    /// Exponential in the worst case; meant for tests and small oracles.
    pub fn legal_actions(&self) -> Vec<Action> {
        let mut out = Vec::new();
        if self.is_terminal() {
            return out;
        }
        let pl = self.current();
        let kinds = self.legal_kinds();
        if kinds.contains(ActionKind::Pass) {
            out.push(Action::Pass);
            return out;
        }
        if kinds.contains(ActionKind::TakeDifferent) {
            let avail: Vec<usize> = self.available_suits().collect();
            for subset in subsets(&avail, self.take_different_count()) {
                let mut suits = TokenVector::ZERO;
                for s in subset {
                    suits[s] = 1;
                }
                let after = pl.tokens.checked_add(&suits).expect("fits");
                for returns in give_backs(after, pl.jokers, self.excess_after(pl, suits.total(), 0)) {
                    out.push(Action::TakeDifferent { suits, returns });
                }
            }
        }
        if kinds.contains(ActionKind::TakeSame) {
            for suit in 0..self.params.num_suits() {
                if u32::from(self.table_tokens[suit]) < self.params.min_stack_for_take_two {
                    continue;
                }
                let mut after = pl.tokens;
                after[suit] += 2;
                for returns in give_backs(after, pl.jokers, self.excess_after(pl, 2, 0)) {
                    out.push(Action::TakeSame { suit: suit as u8, returns });
                }
            }
        }
        for (deck, row) in self.face_up.iter().enumerate() {
            for (slot, card) in row.iter().enumerate() {
                let Some(card) = card else { continue };
                for payment in payments(pl, card) {
                    out.push(Action::BuyFaceUp { deck: deck as u8, slot: slot as u8, payment });
                }
            }
        }
        for hidden in [false, true] {
            for (index, card) in pl.reserved(hidden).iter().enumerate() {
                for payment in payments(pl, card) {
                    out.push(Action::BuyReserved { hidden, index: index as u8, payment });
                }
            }
        }
        if self.can_reserve() {
            let joker = u8::from(self.reserve_grants_joker());
            let excess = self.excess_after(pl, 0, u32::from(joker));
            let backs = give_backs(pl.tokens, pl.jokers + joker, excess);
            for (deck, row) in self.face_up.iter().enumerate() {
                for (slot, card) in row.iter().enumerate() {
                    if card.is_some() {
                        for &returns in &backs {
                            out.push(Action::ReserveFaceUp { deck: deck as u8, slot: slot as u8, returns });
                        }
                    }
                }
            }
            for (deck, stack) in self.decks.iter().enumerate() {
                if !stack.is_empty() {
                    for &returns in &backs {
                        out.push(Action::ReserveDeckTop { deck: deck as u8, returns });
                    }
                }
            }
        }
        out
    }
}

pub(crate) fn payment_ok(pl: &PlayerState, card: &Card, payment: &TokenBundle) -> bool {
    let eff = pl.effective_cost(card);
    if !eff.covers(&payment.tokens) || !pl.tokens.covers(&payment.tokens) || payment.jokers > pl.jokers {
        return false;
    }
    eff.total() - payment.tokens.total() == u32::from(payment.jokers)
}

/// All exact payments for `card`.
fn payments(pl: &PlayerState, card: &Card) -> Vec<TokenBundle> {
    let eff = pl.effective_cost(card);
    let mut out = Vec::new();
    let mut current = TokenVector::ZERO;
    fn rec(i: usize, eff: &TokenVector, pl: &PlayerState, current: &mut TokenVector, out: &mut Vec<TokenBundle>) {
        if i == MAX_SUITS {
            let jokers = eff.total() - current.total();
            if jokers <= u32::from(pl.jokers) {
                out.push(TokenBundle { tokens: *current, jokers: jokers as u8 });
            }
            return;
        }
        for n in 0..=eff[i].min(pl.tokens[i]) {
            current[i] = n;
            rec(i + 1, eff, pl, current, out);
        }
        current[i] = 0;
    }
    rec(0, &eff, pl, &mut current, &mut out);
    out
}

/// All bundles of exactly `size` units drawn from `tokens` and `jokers`.
fn give_backs(tokens: TokenVector, jokers: u8, size: u32) -> Vec<TokenBundle> {
    let mut out = Vec::new();
    let mut current = TokenBundle::EMPTY;
    fn rec(i: usize, left: u32, tokens: &TokenVector, jokers: u8, current: &mut TokenBundle, out: &mut Vec<TokenBundle>) {
        if i == MAX_SUITS {
            if left <= u32::from(jokers) {
                current.jokers = left as u8;
                out.push(*current);
                current.jokers = 0;
            }
            return;
        }
        for n in 0..=u32::from(tokens[i]).min(left) {
            current.tokens[i] = n as u8;
            rec(i + 1, left - n, tokens, jokers, current, out);
        }
        current.tokens[i] = 0;
    }
    rec(0, size, &tokens, jokers, &mut current, &mut out);
    out
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn give_back_enumeration_counts() {
        // two units out of {2 of suit 0, 1 joker}: (2,0), (1,+joker)
        let t = TokenVector::new([2, 0, 0, 0, 0]);
        assert_eq!(give_backs(t, 1, 2).len(), 2);
        assert_eq!(give_backs(t, 1, 0), vec![TokenBundle::EMPTY]);
        assert!(give_backs(t, 0, 3).is_empty());
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(&[0, 1, 2, 3, 4], 3).len(), 10);
        assert_eq!(subsets(&[1, 3], 3).len(), 0);
    }
}
