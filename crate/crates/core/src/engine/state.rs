use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::action::Action;
use super::cards::{standard_cards, standard_nobles, Card, Noble};
use super::params::GameParams;
use super::tokens::{TokenBundle, TokenVector};
use super::EngineError;
use crate::events::{AttrKey, Event, EventLogger, EventType, LoggerId, Trigger, Who};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerState {
    pub points: u32,
    pub tokens: TokenVector,
    pub jokers: u8,
    /// Purchased bonus cards per suit.
    pub bonuses: TokenVector,
    pub purchased: Vec<Card>,
    pub reserved_visible: Vec<Card>,
    pub reserved_hidden: Vec<Card>,
    pub nobles: Vec<Noble>,
}

impl PlayerState {
    /// Tokens plus jokers in hand.
    pub fn held(&self) -> u32 {
        self.tokens.total() + u32::from(self.jokers)
    }

    pub fn reserved_count(&self) -> usize {
        self.reserved_visible.len() + self.reserved_hidden.len()
    }

    pub fn reserved(&self, hidden: bool) -> &[Card] {
        if hidden {
            &self.reserved_hidden
        } else {
            &self.reserved_visible
        }
    }

    /// Card cost after the bonus discount.
    pub fn effective_cost(&self, card: &Card) -> TokenVector {
        card.cost.saturating_sub(&self.bonuses)
    }

    /// Jokers needed on top of the player's tokens to buy `card`.
    pub fn shortfall(&self, card: &Card) -> u32 {
        self.effective_cost(card).saturating_sub(&self.tokens).total()
    }

    pub fn can_afford(&self, card: &Card) -> bool {
        self.shortfall(card) <= u32::from(self.jokers)
    }

    /// Pays with suit tokens first and covers the remainder with jokers.
    pub fn canonical_payment(&self, card: &Card) -> TokenBundle {
        let eff = self.effective_cost(card);
        let mut tokens = TokenVector::ZERO;
        for i in 0..eff.0.len() {
            tokens[i] = eff[i].min(self.tokens[i]);
        }
        let jokers = (eff.total() - tokens.total()) as u8;
        TokenBundle { tokens, jokers }
    }

    pub fn meets(&self, noble: &Noble) -> bool {
        self.bonuses.covers(&noble.requirement)
    }
}

/// How a finished game ended. Capped games count as ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Winner(usize),
    Capped,
}

/// Full game state, including cards hidden from some or all players.
#[derive(Debug, Serialize, Deserialize)]
pub struct GameState {
    pub params: GameParams,
    /// Face-down stacks; the top card is the last element.
    pub decks: Vec<Vec<Card>>,
    /// `face_up[deck][slot]`; `None` once the matching deck runs dry.
    pub face_up: Vec<Vec<Option<Card>>>,
    pub nobles: Vec<Noble>,
    pub table_tokens: TokenVector,
    pub table_jokers: u8,
    pub players: Vec<PlayerState>,
    pub tick: u32,
    pub current_player: usize,
    pub outcome: Option<Outcome>,
    #[serde(skip)]
    loggers: Vec<EventLogger>,
}

impl Clone for GameState {
    /// Deep copy without the attached loggers.
    fn clone(&self) -> Self {
        GameState {
            params: self.params,
            decks: self.decks.clone(),
            face_up: self.face_up.clone(),
            nobles: self.nobles.clone(),
            table_tokens: self.table_tokens,
            table_jokers: self.table_jokers,
            players: self.players.clone(),
            tick: self.tick,
            current_player: self.current_player,
            outcome: self.outcome,
            loggers: Vec::new(),
        }
    }

    fn clone_from(&mut self, source: &Self) {
        self.params = source.params;
        self.decks.clone_from(&source.decks);
        self.face_up.clone_from(&source.face_up);
        self.nobles.clone_from(&source.nobles);
        self.table_tokens = source.table_tokens;
        self.table_jokers = source.table_jokers;
        self.players.clone_from(&source.players);
        self.tick = source.tick;
        self.current_player = source.current_player;
        self.outcome = source.outcome;
        self.loggers.clear();
    }
}

impl PartialEq for GameState {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.decks == other.decks
            && self.face_up == other.face_up
            && self.nobles == other.nobles
            && self.table_tokens == other.table_tokens
            && self.table_jokers == other.table_jokers
            && self.players == other.players
            && self.tick == other.tick
            && self.current_player == other.current_player
            && self.outcome == other.outcome
    }
}

impl GameState {
    /// Shuffles each tier with `seed`, reveals the face-up rows and places
    /// `nobleCount` nobles.
    pub fn new_game(params: GameParams, cards: &[Card], nobles: &[Noble], seed: u64) -> Result<Self, EngineError> {
        params.validate()?;
        let num_decks = params.num_decks();
        let num_suits = params.num_suits();
        let mut decks: Vec<Vec<Card>> = vec![Vec::new(); num_decks];
        for card in cards {
            let tier = card.tier as usize;
            if tier >= num_decks {
                return Err(EngineError::Config(format!("card {} has tier {tier} but only {num_decks} decks", card.id)));
            }
            if card.bonus as usize >= num_suits || card.cost.0[num_suits..].iter().any(|&c| c > 0) {
                return Err(EngineError::Config(format!("card {} uses a suit beyond numSuits", card.id)));
            }
            decks[tier].push(*card);
        }
        if let Some(t) = decks.iter().position(|d| d.is_empty()) {
            return Err(EngineError::Config(format!("deck tier {t} is empty")));
        }
        let mut ids: Vec<u16> = cards.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != cards.len() {
            return Err(EngineError::Config("card ids are not unique".into()));
        }
        if nobles.len() < params.noble_count as usize {
            return Err(EngineError::Config(format!(
                "need {} nobles, got {}",
                params.noble_count,
                nobles.len()
            )));
        }
        if nobles.iter().any(|n| n.requirement.0[num_suits..].iter().any(|&c| c > 0)) {
            return Err(EngineError::Config("noble requires a suit beyond numSuits".into()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for deck in decks.iter_mut() {
            deck.shuffle(&mut rng);
        }
        let mut pool = nobles.to_vec();
        pool.shuffle(&mut rng);
        pool.truncate(params.noble_count as usize);

        let face_up = decks
            .iter_mut()
            .map(|deck| (0..params.face_up_per_deck()).map(|_| deck.pop()).collect())
            .collect();

        Ok(GameState {
            params,
            decks,
            face_up,
            nobles: pool,
            table_tokens: TokenVector::filled(params.tokens_per_suit as u8, num_suits),
            table_jokers: params.joker_count as u8,
            players: vec![PlayerState::default(); params.num_players()],
            tick: 0,
            current_player: 0,
            outcome: None,
            loggers: Vec::new(),
        })
    }

    /// Standard rules, cards and nobles for `num_players`.
    pub fn standard(num_players: u32, seed: u64) -> Self {
        GameState::new_game(GameParams::standard(num_players), &standard_cards(), &standard_nobles(), seed)
            .expect("standard setup is valid")
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn winner(&self) -> Result<Outcome, EngineError> {
        self.outcome.ok_or(EngineError::NotTerminal)
    }

    pub fn score(&self, player: usize) -> u32 {
        self.players[player].points
    }

    pub fn current(&self) -> &PlayerState {
        &self.players[self.current_player]
    }

    pub fn face_up_card(&self, deck: usize, slot: usize) -> Option<&Card> {
        self.face_up.get(deck)?.get(slot)?.as_ref()
    }

    /// Applies a legal action, returning the events it raised.
    pub fn apply_action(&mut self, action: Action) -> Result<Vec<Event>, EngineError> {
        let mut out = Vec::new();
        self.apply_action_into(action, &mut out)?;
        Ok(out)
    }

    /// Like [`apply_action`](Self::apply_action) but appends events to `out`.
    pub fn apply_action_into(&mut self, action: Action, out: &mut Vec<Event>) -> Result<(), EngineError> {
        if self.is_terminal() {
            return Err(EngineError::Terminal);
        }
        if !self.is_legal(&action) {
            return Err(EngineError::IllegalAction(action));
        }
        let start = out.len();
        self.apply_unchecked(action, out);
        if !self.loggers.is_empty() {
            for logger in self.loggers.iter_mut() {
                logger.record(&out[start..]);
            }
        }
        Ok(())
    }

    /// Ends the current player's turn without a move. Forward-model only:
    /// planners use it for opponents assumed to stand still.
    pub fn skip_turn(&mut self) -> Result<(), EngineError> {
        if self.is_terminal() {
            return Err(EngineError::Terminal);
        }
        self.end_turn();
        Ok(())
    }

    pub fn attach_logger(&mut self, logger: EventLogger) -> Result<LoggerId, EngineError> {
        if self.loggers.iter().any(|l| l.id() == logger.id()) {
            return Err(EngineError::LoggerAlreadyAttached);
        }
        let id = logger.id();
        self.loggers.push(logger);
        Ok(id)
    }

    pub fn detach_logger(&mut self, id: LoggerId) -> Result<EventLogger, EngineError> {
        let pos = self.loggers.iter().position(|l| l.id() == id).ok_or(EngineError::UnknownLogger)?;
        Ok(self.loggers.remove(pos))
    }

    pub fn logger(&self, id: LoggerId) -> Option<&EventLogger> {
        self.loggers.iter().find(|l| l.id() == id)
    }

    pub fn logger_count(&self) -> usize {
        self.loggers.len()
    }

    /// Reshuffles everything `observer` cannot see: each face-down deck
    /// together with the opponents' hidden reserves of the same tier.
    pub fn determinize<R: Rng>(&mut self, observer: usize, rng: &mut R) {
        let mut pool = Vec::new();
        for tier in 0..self.decks.len() {
            pool.clear();
            pool.extend_from_slice(&self.decks[tier]);
            for (p, player) in self.players.iter().enumerate() {
                if p != observer {
                    pool.extend(player.reserved_hidden.iter().filter(|c| c.tier as usize == tier));
                }
            }
            if pool.len() < 2 {
                continue;
            }
            pool.shuffle(rng);
            let mut it = pool.iter().copied();
            for slot in self.decks[tier].iter_mut() {
                *slot = it.next().expect("pool sized to deck");
            }
            for (p, player) in self.players.iter_mut().enumerate() {
                if p == observer {
                    continue;
                }
                for card in player.reserved_hidden.iter_mut().filter(|c| c.tier as usize == tier) {
                    *card = it.next().expect("pool sized to hidden reserves");
                }
            }
        }
    }

    /// Checks conservation and holding invariants; intended for tests and
    /// instrumented runs.
    pub fn check_invariants(&self) -> Result<(), String> {
        let p = &self.params;
        for suit in 0..p.num_suits() {
            let held: u32 = self.players.iter().map(|pl| u32::from(pl.tokens[suit])).sum();
            if u32::from(self.table_tokens[suit]) + held != p.tokens_per_suit {
                return Err(format!("token conservation broken for suit {suit}"));
            }
        }
        let jokers: u32 = self.players.iter().map(|pl| u32::from(pl.jokers)).sum();
        if u32::from(self.table_jokers) + jokers != p.joker_count {
            return Err("joker conservation broken".into());
        }
        for (i, pl) in self.players.iter().enumerate() {
            if pl.held() > p.max_tokens_held {
                return Err(format!("player {i} holds {} tokens", pl.held()));
            }
            if pl.reserved_count() > p.max_reserved as usize {
                return Err(format!("player {i} has {} reserved cards", pl.reserved_count()));
            }
            let bonuses = pl.purchased.iter().fold(TokenVector::ZERO, |mut acc, c| {
                acc[c.bonus as usize] += 1;
                acc
            });
            if bonuses != pl.bonuses {
                return Err(format!("player {i} bonus counts disagree with purchased cards"));
            }
            let points: u32 = pl.purchased.iter().map(|c| u32::from(c.points)).sum::<u32>()
                + pl.nobles.iter().map(|n| u32::from(n.points)).sum::<u32>();
            if points != pl.points {
                return Err(format!("player {i} points disagree with cards and nobles"));
            }
        }
        if self.face_up.iter().any(|row| row.len() != p.face_up_per_deck()) {
            return Err("face-up row has the wrong number of slots".into());
        }
        Ok(())
    }

    /// Ids of every card in play, sorted; conserved across moves.
    pub fn card_ids(&self) -> Vec<u16> {
        let mut ids: Vec<u16> = self.decks.iter().flatten().map(|c| c.id).collect();
        ids.extend(self.face_up.iter().flatten().flatten().map(|c| c.id));
        for pl in &self.players {
            ids.extend(pl.purchased.iter().map(|c| c.id));
            ids.extend(pl.reserved_visible.iter().map(|c| c.id));
            ids.extend(pl.reserved_hidden.iter().map(|c| c.id));
        }
        ids.sort_unstable();
        ids
    }

    fn apply_unchecked(&mut self, action: Action, out: &mut Vec<Event>) {
        let p = self.current_player;
        let ctx = Emit {
            tick: self.tick,
            who: Who::Player(p as u8),
            trigger: Some(Trigger { player: p as u8, action }),
        };
        match action {
            Action::TakeDifferent { suits, returns } => {
                for (suit, n) in suits.nonzero() {
                    self.take_tokens(p, suit, n, &ctx, out);
                }
                self.give_back(p, &returns, &ctx, out);
            }
            Action::TakeSame { suit, returns } => {
                self.take_tokens(p, suit as usize, 2, &ctx, out);
                self.give_back(p, &returns, &ctx, out);
            }
            Action::BuyFaceUp { deck, slot, payment } => {
                let card = self.face_up[deck as usize][slot as usize].take().expect("legal buy");
                self.pay(p, &payment, &ctx, out);
                self.receive_card(p, card, &ctx, out);
                self.refill(deck as usize, slot as usize, &ctx, out);
            }
            Action::BuyReserved { hidden, index, payment } => {
                let pl = &mut self.players[p];
                let card = if hidden {
                    pl.reserved_hidden.remove(index as usize)
                } else {
                    pl.reserved_visible.remove(index as usize)
                };
                self.pay(p, &payment, &ctx, out);
                self.receive_card(p, card, &ctx, out);
            }
            Action::ReserveFaceUp { deck, slot, returns } => {
                let card = self.face_up[deck as usize][slot as usize].take().expect("legal reserve");
                self.players[p].reserved_visible.push(card);
                out.push(ctx.event(EventType::CardReserve).with(AttrKey::Deck, deck as i32));
                self.refill(deck as usize, slot as usize, &ctx, out);
                self.grant_joker(p, &ctx, out);
                self.give_back(p, &returns, &ctx, out);
            }
            Action::ReserveDeckTop { deck, returns } => {
                let card = self.decks[deck as usize].pop().expect("legal reserve");
                self.players[p].reserved_hidden.push(card);
                out.push(ctx.event(EventType::CardReserveHidden).with(AttrKey::Deck, deck as i32));
                self.grant_joker(p, &ctx, out);
                self.give_back(p, &returns, &ctx, out);
            }
            Action::Pass => {}
        }
        self.award_noble(p, &ctx, out);
        self.end_turn();
    }

    fn take_tokens(&mut self, p: usize, suit: usize, n: u8, ctx: &Emit, out: &mut Vec<Event>) {
        self.table_tokens[suit] -= n;
        self.players[p].tokens[suit] += n;
        out.push(ctx.token_event(EventType::TableTokenDecrease, suit, n));
        out.push(ctx.token_event(EventType::PlayerTokenIncrease, suit, n));
    }

    fn give_back(&mut self, p: usize, bundle: &TokenBundle, ctx: &Emit, out: &mut Vec<Event>) {
        for (suit, n) in bundle.tokens.nonzero() {
            self.players[p].tokens[suit] -= n;
            self.table_tokens[suit] += n;
            out.push(ctx.token_event(EventType::PlayerTokenDecrease, suit, n));
            out.push(ctx.token_event(EventType::TableTokenIncrease, suit, n));
        }
        if bundle.jokers > 0 {
            self.players[p].jokers -= bundle.jokers;
            self.table_jokers += bundle.jokers;
            out.push(ctx.event(EventType::PlayerJokerDecrease).with(AttrKey::Amount, bundle.jokers as i32));
            out.push(ctx.event(EventType::TableJokerIncrease).with(AttrKey::Amount, bundle.jokers as i32));
        }
    }

    fn pay(&mut self, p: usize, payment: &TokenBundle, ctx: &Emit, out: &mut Vec<Event>) {
        self.give_back(p, payment, ctx, out);
    }

    fn grant_joker(&mut self, p: usize, ctx: &Emit, out: &mut Vec<Event>) {
        if self.table_jokers == 0 {
            return;
        }
        self.table_jokers -= 1;
        self.players[p].jokers += 1;
        out.push(ctx.event(EventType::PlayerJokerIncrease).with(AttrKey::Amount, 1));
        out.push(ctx.event(EventType::TableJokerDecrease).with(AttrKey::Amount, 1));
    }

    fn receive_card(&mut self, p: usize, card: Card, ctx: &Emit, out: &mut Vec<Event>) {
        let pl = &mut self.players[p];
        pl.bonuses[card.bonus as usize] += 1;
        pl.points += u32::from(card.points);
        pl.purchased.push(card);
        out.push(ctx.event(EventType::CardBuy).with(AttrKey::Deck, card.tier as i32));
        if card.points > 0 {
            out.push(ctx.event(EventType::PointsFromCard).with(AttrKey::Points, card.points as i32));
        }
    }

    fn refill(&mut self, deck: usize, slot: usize, ctx: &Emit, out: &mut Vec<Event>) {
        if let Some(card) = self.decks[deck].pop() {
            out.push(ctx.event(EventType::CardDraw).with(AttrKey::Deck, deck as i32));
            self.face_up[deck][slot] = Some(card);
            out.push(ctx.event(EventType::CardPlace).with(AttrKey::Deck, deck as i32));
        }
    }

    /// Lowest-index qualifying noble visits the acting player.
    fn award_noble(&mut self, p: usize, ctx: &Emit, out: &mut Vec<Event>) {
        let Some(idx) = self.nobles.iter().position(|n| self.players[p].meets(n)) else {
            return;
        };
        let noble = self.nobles.remove(idx);
        let points = noble.points as i32;
        out.push(ctx.event(EventType::NobleTake).with(AttrKey::Points, points));
        let pl = &mut self.players[p];
        pl.points += u32::from(noble.points);
        pl.nobles.push(noble);
        out.push(ctx.event(EventType::NobleReceive).with(AttrKey::Points, points));
        let mut engine = ctx.event(EventType::PointsFromNoble).with(AttrKey::Points, points);
        engine.who = Who::Engine;
        out.push(engine);
    }

    fn end_turn(&mut self) {
        let n = self.num_players();
        let p = self.current_player;
        self.tick += 1;
        self.current_player = (p + 1) % n;
        let target = self.params.points_to_win;
        if p == n - 1 && self.players.iter().any(|pl| pl.points >= target) {
            let best = (0..n)
                .max_by_key(|&i| {
                    let pl = &self.players[i];
                    (pl.points, std::cmp::Reverse(pl.purchased.len()), std::cmp::Reverse(i))
                })
                .expect("at least one player");
            self.outcome = Some(Outcome::Winner(best));
        } else if self.tick >= self.params.max_turns {
            self.outcome = Some(Outcome::Capped);
        }
    }
}

/// Shared fields of the events raised by one move.
struct Emit {
    tick: u32,
    who: Who,
    trigger: Option<Trigger>,
}

impl Emit {
    fn event(&self, kind: EventType) -> Event {
        Event::new(self.tick, self.who, kind, self.trigger)
    }

    fn token_event(&self, kind: EventType, suit: usize, n: u8) -> Event {
        self.event(kind).with(AttrKey::Suit, suit as i32).with(AttrKey::Amount, n as i32)
    }
}
