use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::action::{Action, ActionKind};
use super::state::GameState;
use super::tokens::{TokenBundle, TokenVector, MAX_SUITS};

/// Rejection attempts before falling back to enumerating a kind's positions.
const MAX_RETRIES: usize = 16;

impl GameState {
    /// A legal action drawn with a generator seeded by `seed`.
    pub fn sample_action(&self, seed: u64) -> Action {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_action_with(&mut rng)
    }

    /// Picks a legal kind uniformly, then the kind's parameters uniformly.
    /// Returns `Pass` when nothing else is legal (or the game is over).
    pub fn sample_action_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        let kinds = self.legal_kinds();
        if kinds.is_empty() || kinds.contains(ActionKind::Pass) {
            return Action::Pass;
        }
        let pick = rng.gen_range(0..kinds.len());
        let kind = kinds.iter().nth(pick).expect("index within set");
        self.sample_of_kind(kind, rng).expect("kind reported legal")
    }

    /// A legal action of `kind`, or `None` if that kind has no legal instance.
    pub fn sample_of_kind<R: Rng + ?Sized>(&self, kind: ActionKind, rng: &mut R) -> Option<Action> {
        if self.is_terminal() {
            return None;
        }
        let pl = self.current();
        match kind {
            ActionKind::TakeDifferent => {
                let mut avail = [0usize; MAX_SUITS];
                let mut n = 0;
                for s in self.available_suits() {
                    avail[n] = s;
                    n += 1;
                }
                if n == 0 {
                    return None;
                }
                let k = self.take_different_count();
                // partial Fisher-Yates over the available suits
                let mut suits = TokenVector::ZERO;
                for i in 0..k {
                    let j = rng.gen_range(i..n);
                    avail.swap(i, j);
                    suits[avail[i]] = 1;
                }
                let after = pl.tokens.checked_add(&suits).expect("fits");
                let returns = random_give_back(after, pl.jokers, self.excess_after(pl, k as u32, 0), rng);
                Some(Action::TakeDifferent { suits, returns })
            }
            ActionKind::TakeSame => {
                let min = self.params.min_stack_for_take_two;
                let options: Vec<usize> = (0..self.params.num_suits())
                    .filter(|&s| u32::from(self.table_tokens[s]) >= min)
                    .collect();
                if options.is_empty() {
                    return None;
                }
                let suit = options[rng.gen_range(0..options.len())];
                let mut after = pl.tokens;
                after[suit] += 2;
                let returns = random_give_back(after, pl.jokers, self.excess_after(pl, 2, 0), rng);
                Some(Action::TakeSame { suit: suit as u8, returns })
            }
            ActionKind::BuyFaceUp => {
                let (deck, slot) = self.pick_slot(rng, |c| pl.can_afford(c))?;
                let card = self.face_up_card(deck, slot).expect("picked slot holds a card");
                let payment = pl.canonical_payment(card);
                Some(Action::BuyFaceUp { deck: deck as u8, slot: slot as u8, payment })
            }
            ActionKind::BuyReserved => {
                let options: Vec<(bool, usize)> = [false, true]
                    .into_iter()
                    .flat_map(|hidden| {
                        pl.reserved(hidden)
                            .iter()
                            .enumerate()
                            .filter(|(_, c)| pl.can_afford(c))
                            .map(move |(i, _)| (hidden, i))
                    })
                    .collect();
                if options.is_empty() {
                    return None;
                }
                let (hidden, index) = options[rng.gen_range(0..options.len())];
                let payment = pl.canonical_payment(&pl.reserved(hidden)[index]);
                Some(Action::BuyReserved { hidden, index: index as u8, payment })
            }
            ActionKind::ReserveFaceUp => {
                if !self.can_reserve() {
                    return None;
                }
                let (deck, slot) = self.pick_slot(rng, |_| true)?;
                let returns = self.reserve_give_back(rng);
                Some(Action::ReserveFaceUp { deck: deck as u8, slot: slot as u8, returns })
            }
            ActionKind::ReserveDeckTop => {
                if !self.can_reserve() {
                    return None;
                }
                let options: Vec<usize> = (0..self.decks.len()).filter(|&d| !self.decks[d].is_empty()).collect();
                if options.is_empty() {
                    return None;
                }
                let deck = options[rng.gen_range(0..options.len())];
                let returns = self.reserve_give_back(rng);
                Some(Action::ReserveDeckTop { deck: deck as u8, returns })
            }
            ActionKind::Pass => self.legal_kinds().contains(ActionKind::Pass).then_some(Action::Pass),
        }
    }

    fn reserve_give_back<R: Rng + ?Sized>(&self, rng: &mut R) -> TokenBundle {
        let pl = self.current();
        let joker = u8::from(self.reserve_grants_joker());
        random_give_back(pl.tokens, pl.jokers + joker, self.excess_after(pl, 0, u32::from(joker)), rng)
    }

    /// Uniform face-up position satisfying `accept`: rejection first, then enumeration.
    fn pick_slot<R: Rng + ?Sized>(&self, rng: &mut R, accept: impl Fn(&super::Card) -> bool) -> Option<(usize, usize)> {
        let decks = self.face_up.len();
        let slots = self.params.face_up_per_deck();
        for _ in 0..MAX_RETRIES {
            let deck = rng.gen_range(0..decks);
            let slot = rng.gen_range(0..slots);
            if let Some(card) = self.face_up_card(deck, slot) {
                if accept(card) {
                    return Some((deck, slot));
                }
            }
        }
        let options: Vec<(usize, usize)> = (0..decks)
            .flat_map(|d| (0..slots).map(move |s| (d, s)))
            .filter(|&(d, s)| self.face_up_card(d, s).is_some_and(&accept))
            .collect();
        if options.is_empty() {
            None
        } else {
            Some(options[rng.gen_range(0..options.len())])
        }
    }
}

/// Draws `size` units uniformly without replacement from tokens plus jokers.
fn random_give_back<R: Rng + ?Sized>(tokens: TokenVector, jokers: u8, size: u32, rng: &mut R) -> TokenBundle {
    let mut out = TokenBundle::EMPTY;
    if size == 0 {
        return out;
    }
    let mut pool = [0u32; MAX_SUITS + 1];
    for (i, c) in tokens.iter() {
        pool[i] = u32::from(c);
    }
    pool[MAX_SUITS] = u32::from(jokers);
    let mut remaining: u32 = pool.iter().sum();
    for _ in 0..size {
        debug_assert!(remaining > 0);
        let mut r = rng.gen_range(0..remaining);
        let bucket = pool
            .iter()
            .position(|&c| {
                if r < c {
                    true
                } else {
                    r -= c;
                    false
                }
            })
            .expect("r below remaining");
        pool[bucket] -= 1;
        remaining -= 1;
        if bucket == MAX_SUITS {
            out.jokers += 1;
        } else {
            out.tokens[bucket] += 1;
        }
    }
    out
}
