use std::io::Read;

use serde::{Deserialize, Serialize};

use super::tokens::{TokenVector, MAX_SUITS};
use super::EngineError;

const STANDARD_CARDS: &str = include_str!("../../data/cards.csv");
const STANDARD_NOBLES: &str = include_str!("../../data/nobles.csv");

/// A development card. `id` is the row index in the deck file and is unique per game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Card {
    pub id: u16,
    pub tier: u8,
    pub points: u8,
    pub bonus: u8,
    pub cost: TokenVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Noble {
    pub points: u8,
    pub requirement: TokenVector,
}

#[derive(Deserialize)]
struct CardRow {
    tier: u8,
    points: u8,
    bonus: u8,
    cost0: u8,
    cost1: u8,
    cost2: u8,
    cost3: u8,
    cost4: u8,
}

#[derive(Deserialize)]
struct NobleRow {
    points: u8,
    req0: u8,
    req1: u8,
    req2: u8,
    req3: u8,
    req4: u8,
}

/// Reads a deck file with header `tier,points,bonus,cost0..cost4`.
pub fn read_cards<R: Read>(reader: R) -> Result<Vec<Card>, EngineError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut cards = Vec::new();
    for (i, row) in rdr.deserialize::<CardRow>().enumerate() {
        let row = row?;
        if row.bonus as usize >= MAX_SUITS {
            return Err(EngineError::Config(format!("card {i}: bonus suit {} out of range", row.bonus)));
        }
        let id = u16::try_from(i).map_err(|_| EngineError::Config("too many cards".into()))?;
        cards.push(Card {
            id,
            tier: row.tier,
            points: row.points,
            bonus: row.bonus,
            cost: TokenVector::new([row.cost0, row.cost1, row.cost2, row.cost3, row.cost4]),
        });
    }
    Ok(cards)
}

/// Reads a noble file with header `points,req0..req4`.
pub fn read_nobles<R: Read>(reader: R) -> Result<Vec<Noble>, EngineError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut nobles = Vec::new();
    for (i, row) in rdr.deserialize::<NobleRow>().enumerate() {
        let row = row?;
        let requirement = TokenVector::new([row.req0, row.req1, row.req2, row.req3, row.req4]);
        if requirement.is_zero() {
            return Err(EngineError::Config(format!("noble {i} has an empty requirement")));
        }
        nobles.push(Noble { points: row.points, requirement });
    }
    Ok(nobles)
}

/// The 90 standard cards (40/30/20 per tier).
pub fn standard_cards() -> Vec<Card> {
    read_cards(STANDARD_CARDS.as_bytes()).expect("bundled deck file is valid")
}

/// The 10 standard nobles.
pub fn standard_nobles() -> Vec<Noble> {
    read_nobles(STANDARD_NOBLES.as_bytes()).expect("bundled noble file is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_deck_shape() {
        let cards = standard_cards();
        assert_eq!(cards.len(), 90);
        let per_tier: Vec<usize> = (0..3).map(|t| cards.iter().filter(|c| c.tier == t).count()).collect();
        assert_eq!(per_tier, vec![40, 30, 20]);
        // every tier is balanced across bonus suits
        for tier in 0..3u8 {
            for suit in 0..5u8 {
                let n = cards.iter().filter(|c| c.tier == tier && c.bonus == suit).count();
                assert_eq!(n, per_tier[tier as usize] / 5);
            }
        }
        let total_points: u32 = cards.iter().map(|c| u32::from(c.points)).sum();
        assert_eq!(total_points, 5 * (1 + 11 + 16));
    }

    #[test]
    fn standard_nobles_shape() {
        let nobles = standard_nobles();
        assert_eq!(nobles.len(), 10);
        assert!(nobles.iter().all(|n| n.points == 3));
        assert_eq!(nobles.iter().filter(|n| n.requirement.total() == 8).count(), 5);
        assert_eq!(nobles.iter().filter(|n| n.requirement.total() == 9).count(), 5);
    }

    #[test]
    fn malformed_rows_are_errors() {
        let bad = "tier,points,bonus,cost0,cost1,cost2,cost3,cost4\n0,0,7,1,1,1,1,0\n";
        assert!(read_cards(bad.as_bytes()).is_err());
        let bad = "points,req0,req1,req2,req3,req4\n3,0,0,0,0,0\n";
        assert!(read_nobles(bad.as_bytes()).is_err());
        let bad = "tier,points\n0,0\n";
        assert!(read_cards(bad.as_bytes()).is_err());
    }
}
