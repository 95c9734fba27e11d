use serde::{Deserialize, Serialize};

use super::tokens::MAX_SUITS;
use super::EngineError;

/// Default hard cap on the number of turns (actions across all players) in one game.
pub const DEFAULT_MAX_TURNS: u32 = 500;

/// Number of distinct suits a full "take different" action picks.
pub const TAKE_DIFFERENT_COUNT: usize = 3;

/// Exposed rule parameters. Field names in JSON are camelCase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GameParams {
    pub num_players: u32,
    pub points_to_win: u32,
    pub num_decks: u32,
    pub face_up_per_deck: u32,
    pub tokens_per_suit: u32,
    pub num_suits: u32,
    pub joker_count: u32,
    pub max_tokens_held: u32,
    pub max_reserved: u32,
    pub min_stack_for_take_two: u32,
    pub noble_count: u32,
    #[serde(default = "default_max_turns")]
    pub max_turns: u32,
}

fn default_max_turns() -> u32 {
    DEFAULT_MAX_TURNS
}

impl GameParams {
    /// Standard Splendor setup for two to four players.
    pub fn standard(num_players: u32) -> Self {
        let tokens_per_suit = match num_players {
            2 => 4,
            3 => 5,
            _ => 7,
        };
        GameParams {
            num_players,
            points_to_win: 15,
            num_decks: 3,
            face_up_per_deck: 4,
            tokens_per_suit,
            num_suits: 5,
            joker_count: 5,
            max_tokens_held: 10,
            max_reserved: 3,
            min_stack_for_take_two: 4,
            noble_count: num_players + 1,
            max_turns: DEFAULT_MAX_TURNS,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        let params: GameParams = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::Config(msg));
        if !(2..=4).contains(&self.num_players) {
            return bad(format!("numPlayers must be 2..=4, got {}", self.num_players));
        }
        if self.num_suits == 0 || self.num_suits as usize > MAX_SUITS {
            return bad(format!("numSuits must be 1..={MAX_SUITS}"));
        }
        let positive = [
            ("pointsToWin", self.points_to_win),
            ("numDecks", self.num_decks),
            ("faceUpPerDeck", self.face_up_per_deck),
            ("tokensPerSuit", self.tokens_per_suit),
            ("jokerCount", self.joker_count),
            ("maxTokensHeld", self.max_tokens_held),
            ("maxReserved", self.max_reserved),
            ("minStackForTakeTwo", self.min_stack_for_take_two),
            ("nobleCount", self.noble_count),
            ("maxTurns", self.max_turns),
        ];
        for (name, value) in positive {
            if value == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        // token counts live in u8 cells
        let total_held = self.tokens_per_suit.max(self.joker_count).max(self.max_tokens_held + 3);
        if total_held > u8::MAX as u32 || self.num_decks > u8::MAX as u32 || self.face_up_per_deck > u8::MAX as u32 {
            return bad("token or slot counts exceed 255".into());
        }
        Ok(())
    }

    pub fn num_players(&self) -> usize {
        self.num_players as usize
    }

    pub fn num_suits(&self) -> usize {
        self.num_suits as usize
    }

    pub fn num_decks(&self) -> usize {
        self.num_decks as usize
    }

    pub fn face_up_per_deck(&self) -> usize {
        self.face_up_per_deck as usize
    }
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams::standard(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_params_parse() {
        for (text, players) in [
            (include_str!("../../data/params_2p.json"), 2),
            (include_str!("../../data/params_3p.json"), 3),
            (include_str!("../../data/params_4p.json"), 4),
        ] {
            let p = GameParams::from_json(text).unwrap();
            assert_eq!(p, GameParams::standard(players));
        }
    }

    #[test]
    fn rejects_zero_counts() {
        let mut p = GameParams::standard(2);
        p.face_up_per_deck = 0;
        assert!(p.validate().is_err());
        let mut p = GameParams::standard(2);
        p.num_players = 5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn max_turns_defaults_when_missing() {
        let text = r#"{"numPlayers":2,"pointsToWin":15,"numDecks":3,"faceUpPerDeck":4,
            "tokensPerSuit":4,"numSuits":5,"jokerCount":5,"maxTokensHeld":10,"maxReserved":3,
            "minStackForTakeTwo":4,"nobleCount":3}"#;
        assert_eq!(GameParams::from_json(text).unwrap().max_turns, DEFAULT_MAX_TURNS);
    }
}
