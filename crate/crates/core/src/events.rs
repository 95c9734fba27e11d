//! State-change events, loggers, type mappings and feature synthesis.
//!
//! Every rule-driven change to a [`GameState`](crate::engine::GameState)
//! raises one [`Event`]. Token events are emitted once per suit touched,
//! with the number of tokens in the `amount` attribute. Raw event type ids
//! are frozen: weight vectors index them.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::engine::Action;

pub const NUM_EVENT_TYPES: usize = 18;

#[derive(Debug, Error)]
pub enum EventError {
    #[error("event type {0} out of range 0..{NUM_EVENT_TYPES}")]
    TypeOutOfRange(i64),
    #[error("invalid type mapping: {0}")]
    BadMapping(String),
    #[error("unknown mapping name {0:?} (expected \"id\" or \"hc\")")]
    UnknownMapping(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Raw event catalogue. Discriminants are the external type ids.
#[repr(u8)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum EventType {
    NobleTake = 0,
    TableTokenIncrease = 1,
    TableTokenDecrease = 2,
    TableJokerIncrease = 3,
    TableJokerDecrease = 4,
    CardDraw = 5,
    CardPlace = 6,
    NoblePlace = 7,
    PlayerTokenIncrease = 8,
    PlayerTokenDecrease = 9,
    PlayerJokerIncrease = 10,
    PlayerJokerDecrease = 11,
    CardReserveHidden = 12,
    CardReserve = 13,
    NobleReceive = 14,
    CardBuy = 15,
    PointsFromCard = 16,
    PointsFromNoble = 17,
}

impl EventType {
    pub const ALL: [EventType; NUM_EVENT_TYPES] = [
        EventType::NobleTake,
        EventType::TableTokenIncrease,
        EventType::TableTokenDecrease,
        EventType::TableJokerIncrease,
        EventType::TableJokerDecrease,
        EventType::CardDraw,
        EventType::CardPlace,
        EventType::NoblePlace,
        EventType::PlayerTokenIncrease,
        EventType::PlayerTokenDecrease,
        EventType::PlayerJokerIncrease,
        EventType::PlayerJokerDecrease,
        EventType::CardReserveHidden,
        EventType::CardReserve,
        EventType::NobleReceive,
        EventType::CardBuy,
        EventType::PointsFromCard,
        EventType::PointsFromNoble,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<EventType> {
        EventType::ALL.get(id).copied()
    }

    /// Attribute keys an event of this type may carry.
    pub fn signature(self) -> &'static [AttrKey] {
        use EventType::*;
        match self {
            TableTokenIncrease | TableTokenDecrease | PlayerTokenIncrease | PlayerTokenDecrease => {
                &[AttrKey::Suit, AttrKey::Amount]
            }
            TableJokerIncrease | TableJokerDecrease | PlayerJokerIncrease | PlayerJokerDecrease => {
                &[AttrKey::Amount]
            }
            CardDraw | CardPlace | CardReserve | CardReserveHidden | CardBuy => &[AttrKey::Deck],
            PointsFromCard | PointsFromNoble => &[AttrKey::Points],
            NobleTake | NoblePlace | NobleReceive => &[AttrKey::Points],
        }
    }
}

impl From<EventType> for u8 {
    fn from(t: EventType) -> u8 {
        t as u8
    }
}

impl TryFrom<u8> for EventType {
    type Error = EventError;
    fn try_from(v: u8) -> Result<Self, EventError> {
        EventType::from_id(v as usize).ok_or(EventError::TypeOutOfRange(v as i64))
    }
}

/// Who raised an event: a player, or the engine's passive rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Who {
    Player(u8),
    Engine,
}

impl Serialize for Who {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Who::Player(p) => s.serialize_u8(*p),
            Who::Engine => s.serialize_str("E"),
        }
    }
}

impl<'de> Deserialize<'de> for Who {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(u8),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(p) => Ok(Who::Player(p)),
            Raw::Tag(t) if t == "E" => Ok(Who::Engine),
            Raw::Tag(t) => Err(de::Error::custom(format!("bad `who` value {t:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationType {
    #[default]
    Instant,
    Delayed,
    Durative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttrKey {
    Suit,
    Amount,
    Points,
    Deck,
}

impl AttrKey {
    fn name(self) -> &'static str {
        match self {
            AttrKey::Suit => "suit",
            AttrKey::Amount => "amount",
            AttrKey::Points => "points",
            AttrKey::Deck => "deck",
        }
    }

    fn from_name(name: &str) -> Option<AttrKey> {
        Some(match name {
            "suit" => AttrKey::Suit,
            "amount" => AttrKey::Amount,
            "points" => AttrKey::Points,
            "deck" => AttrKey::Deck,
            _ => return None,
        })
    }
}

const MAX_ATTRS: usize = 2;

/// Inline attribute map; events never carry more than two attributes.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Attributes {
    len: u8,
    items: [(AttrKey, i32); MAX_ATTRS],
}

impl Default for Attributes {
    fn default() -> Self {
        Attributes { len: 0, items: [(AttrKey::Amount, 0); MAX_ATTRS] }
    }
}

impl Attributes {
    pub fn insert(&mut self, key: AttrKey, value: i32) {
        if let Some(slot) = self.items[..self.len as usize].iter_mut().find(|(k, _)| *k == key) {
            slot.1 = value;
            return;
        }
        assert!((self.len as usize) < MAX_ATTRS, "too many event attributes");
        self.items[self.len as usize] = (key, value);
        self.len += 1;
    }

    pub fn get(&self, key: AttrKey) -> Option<i32> {
        self.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (AttrKey, i32)> + '_ {
        self.items[..self.len as usize].iter().copied()
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl fmt::Debug for Attributes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter().map(|(k, v)| (k.name(), v))).finish()
    }
}

impl Serialize for Attributes {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.len()))?;
        for (k, v) in self.iter() {
            map.serialize_entry(k.name(), &v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Attributes {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct AttrVisitor;
        impl<'de> Visitor<'de> for AttrVisitor {
            type Value = Attributes;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map of event attributes")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Attributes, A::Error> {
                let mut attrs = Attributes::default();
                while let Some((key, value)) = access.next_entry::<String, i32>()? {
                    let key = AttrKey::from_name(&key)
                        .ok_or_else(|| de::Error::custom(format!("unknown attribute {key:?}")))?;
                    if attrs.len() == MAX_ATTRS && attrs.get(key).is_none() {
                        return Err(de::Error::custom("too many attributes"));
                    }
                    attrs.insert(key, value);
                }
                Ok(attrs)
            }
        }
        d.deserialize_map(AttrVisitor)
    }
}

/// The move (and the player making it) that caused an event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trigger {
    pub player: u8,
    pub action: Action,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Event {
    pub tick: u32,
    pub who: Who,
    #[serde(rename = "type")]
    pub kind: EventType,
    pub duration: u32,
    pub duration_type: DurationType,
    pub attributes: Attributes,
    pub trigger: Option<Trigger>,
}

impl Event {
    /// An instant event with no attributes.
    pub fn new(tick: u32, who: Who, kind: EventType, trigger: Option<Trigger>) -> Self {
        Event {
            tick,
            who,
            kind,
            duration: 0,
            duration_type: DurationType::Instant,
            attributes: Attributes::default(),
            trigger,
        }
    }

    pub fn with(mut self, key: AttrKey, value: i32) -> Self {
        self.attributes.insert(key, value);
        self
    }

    pub fn signature(&self) -> &'static [AttrKey] {
        self.kind.signature()
    }

    /// The player an event counts for: its raiser, or for engine events the
    /// player whose move triggered it.
    pub fn attribution(&self) -> Option<usize> {
        match self.who {
            Who::Player(p) => Some(p as usize),
            Who::Engine => self.trigger.map(|t| t.player as usize),
        }
    }
}

#[derive(Serialize)]
struct ExportedEvent<'a> {
    #[serde(flatten)]
    event: &'a Event,
    signature: &'static [AttrKey],
}

/// Writes one JSON object per line, including the derived `signature`.
pub fn write_jsonl<W: Write>(events: &[Event], mut out: W) -> Result<(), EventError> {
    for event in events {
        serde_json::to_writer(&mut out, &ExportedEvent { event, signature: event.signature() })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<Event>, EventError> {
    let mut events = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line)?);
    }
    Ok(events)
}

pub const DISCARD: i8 = -1;

/// Raw type id → feature group, or [`DISCARD`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TypeMapping {
    table: [i8; NUM_EVENT_TYPES],
    group_count: usize,
}

const HAND_CRAFTED: [i8; NUM_EVENT_TYPES] = [-1, -1, -1, -1, -1, -1, -1, -1, 0, -1, 0, -1, 1, 2, 3, -1, 4, 4];

impl TypeMapping {
    /// Each raw type is its own group.
    pub fn identity() -> Self {
        let mut table = [0i8; NUM_EVENT_TYPES];
        for (i, slot) in table.iter_mut().enumerate() {
            *slot = i as i8;
        }
        TypeMapping { table, group_count: NUM_EVENT_TYPES }
    }

    /// Five macro groups: tokens gained, hidden reserve, reserve, noble received, points.
    pub fn hand_crafted() -> Self {
        TypeMapping { table: HAND_CRAFTED, group_count: 5 }
    }

    pub fn named(name: &str) -> Result<Self, EventError> {
        match name {
            "id" => Ok(TypeMapping::identity()),
            "hc" => Ok(TypeMapping::hand_crafted()),
            other => Err(EventError::UnknownMapping(other.to_string())),
        }
    }

    /// Group count is one past the largest group id used.
    pub fn from_table(entries: &[i64]) -> Result<Self, EventError> {
        if entries.len() != NUM_EVENT_TYPES {
            return Err(EventError::BadMapping(format!(
                "expected {NUM_EVENT_TYPES} entries, got {}",
                entries.len()
            )));
        }
        let mut table = [DISCARD; NUM_EVENT_TYPES];
        for (slot, &g) in table.iter_mut().zip(entries) {
            if g < -1 || g >= NUM_EVENT_TYPES as i64 {
                return Err(EventError::BadMapping(format!("group id {g} out of range")));
            }
            *slot = g as i8;
        }
        let group_count = table.iter().map(|&g| (g + 1) as usize).max().unwrap_or(0);
        if group_count == 0 {
            return Err(EventError::BadMapping("mapping discards every event".into()));
        }
        Ok(TypeMapping { table, group_count })
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn table(&self) -> &[i8; NUM_EVENT_TYPES] {
        &self.table
    }

    /// Group for a raw type id; `Ok(None)` means discarded.
    pub fn map_type(&self, raw: usize) -> Result<Option<usize>, EventError> {
        let g = *self.table.get(raw).ok_or(EventError::TypeOutOfRange(raw as i64))?;
        Ok((g >= 0).then_some(g as usize))
    }

    #[inline]
    pub fn group(&self, kind: EventType) -> Option<usize> {
        let g = self.table[kind.id()];
        (g >= 0).then_some(g as usize)
    }

    /// Short name for the built-ins, `None` for custom tables.
    pub fn name(&self) -> Option<&'static str> {
        if *self == TypeMapping::identity() {
            Some("id")
        } else if *self == TypeMapping::hand_crafted() {
            Some("hc")
        } else {
            None
        }
    }
}

impl Serialize for TypeMapping {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.table.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TypeMapping {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let entries = Vec::<i64>::deserialize(d)?;
        TypeMapping::from_table(&entries).map_err(de::Error::custom)
    }
}

/// Counts events per mapped group, keeping only those attributed to `player`.
pub fn synthesize(events: &[Event], player: usize, mapping: &TypeMapping) -> Vec<f64> {
    let mut theta = vec![0.0; mapping.group_count()];
    accumulate(events, player, mapping, &mut theta);
    theta
}

/// Adds the counts of `events` into an existing feature vector.
pub fn accumulate(events: &[Event], player: usize, mapping: &TypeMapping, theta: &mut [f64]) {
    debug_assert_eq!(theta.len(), mapping.group_count());
    for e in events {
        if e.attribution() != Some(player) {
            continue;
        }
        if let Some(g) = mapping.group(e.kind) {
            theta[g] += 1.0;
        }
    }
}

static NEXT_LOGGER_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LoggerId(u64);

/// Receives every event raised by the state it is attached to.
#[derive(Clone, Debug)]
pub struct EventLogger {
    id: LoggerId,
    pub owner: usize,
    pub buffer: Vec<Event>,
}

impl EventLogger {
    pub fn new(owner: usize) -> Self {
        EventLogger {
            id: LoggerId(NEXT_LOGGER_ID.fetch_add(1, Ordering::Relaxed)),
            owner,
            buffer: Vec::new(),
        }
    }

    pub fn id(&self) -> LoggerId {
        self.id
    }

    pub fn record(&mut self, events: &[Event]) {
        self.buffer.extend_from_slice(events);
    }

    pub fn clear(&mut self) {
        self.buffer.clear();
    }

    /// Features of the buffered events for the logger's owner.
    pub fn features(&self, mapping: &TypeMapping) -> Vec<f64> {
        synthesize(&self.buffer, self.owner, mapping)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(kind: EventType, who: Who) -> Event {
        Event::new(0, who, kind, Some(Trigger { player: 0, action: Action::Pass }))
    }

    fn trace(ids: &[usize], player: u8) -> Vec<Event> {
        ids.iter()
            .map(|&id| {
                let kind = EventType::from_id(id).unwrap();
                let who = if kind == EventType::PointsFromNoble { Who::Engine } else { Who::Player(player) };
                Event::new(3, who, kind, Some(Trigger { player, action: Action::Pass }))
            })
            .collect()
    }

    #[test]
    fn map_type_table_one_columns() {
        let hc = TypeMapping::hand_crafted();
        let id = TypeMapping::identity();
        assert_eq!(hc.map_type(16).unwrap(), Some(4));
        assert_eq!(hc.map_type(15).unwrap(), None);
        assert_eq!(id.map_type(13).unwrap(), Some(13));
        assert!(hc.map_type(18).is_err());
        // noble place / take / receive
        assert_eq!([7, 0, 14].map(|t| hc.map_type(t).unwrap()), [None, None, Some(3)]);
        // player joker increase joins player token increase
        assert_eq!(hc.map_type(10).unwrap(), Some(0));
        assert_eq!(hc.map_type(12).unwrap(), Some(1));
        assert_eq!(hc.map_type(17).unwrap(), Some(4));
        assert_eq!(hc.group_count(), 5);
        assert_eq!(id.group_count(), 18);
    }

    #[test]
    fn synthesize_examples() {
        let hc = TypeMapping::hand_crafted();
        assert_eq!(synthesize(&[], 0, &hc), vec![0.0; 5]);
        // buy of a 1-point card
        assert_eq!(synthesize(&trace(&[9, 1, 15, 16, 5, 6], 0), 0, &hc), vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        // face-up reserve with a joker
        assert_eq!(synthesize(&trace(&[13, 5, 6, 10, 4], 0), 0, &hc), vec![1.0, 0.0, 1.0, 0.0, 0.0]);
        // someone else's events do not count
        assert_eq!(synthesize(&trace(&[13, 5, 6, 10, 4], 1), 0, &hc), vec![0.0; 5]);
    }

    #[test]
    fn engine_events_follow_trigger() {
        let e = Event::new(0, Who::Engine, EventType::PointsFromNoble, Some(Trigger { player: 1, action: Action::Pass }));
        assert_eq!(e.attribution(), Some(1));
        let orphan = Event::new(0, Who::Engine, EventType::NoblePlace, None);
        assert_eq!(orphan.attribution(), None);
        let id = TypeMapping::identity();
        assert_eq!(synthesize(&[e], 1, &id)[17], 1.0);
    }

    #[test]
    fn custom_mapping_validation() {
        assert!(TypeMapping::from_table(&[0; 17]).is_err());
        assert!(TypeMapping::from_table(&[-2; 18]).is_err());
        assert!(TypeMapping::from_table(&[-1; 18]).is_err());
        let mut entries = [-1i64; 18];
        entries[16] = 1;
        entries[17] = 1;
        let m = TypeMapping::from_table(&entries).unwrap();
        assert_eq!(m.group_count(), 2);
        let json = serde_json::to_string(&TypeMapping::hand_crafted()).unwrap();
        assert_eq!(json, "[-1,-1,-1,-1,-1,-1,-1,-1,0,-1,0,-1,1,2,3,-1,4,4]");
        let back: TypeMapping = serde_json::from_str(&json).unwrap();
        assert_eq!(back.name(), Some("hc"));
    }

    #[test]
    fn jsonl_export_carries_every_field() {
        let e = ev(EventType::PlayerTokenIncrease, Who::Player(0))
            .with(AttrKey::Suit, 2)
            .with(AttrKey::Amount, 1);
        let n = ev(EventType::PointsFromNoble, Who::Engine).with(AttrKey::Points, 3);
        let mut buf = Vec::new();
        write_jsonl(&[e, n], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        for key in ["tick", "who", "type", "duration", "durationType", "attributes", "signature", "trigger"] {
            assert!(first.get(key).is_some(), "missing {key}");
        }
        assert_eq!(first["type"], 8);
        assert_eq!(first["attributes"]["amount"], 1);
        assert_eq!(first["signature"], serde_json::json!(["suit", "amount"]));
        assert!(text.lines().nth(1).unwrap().contains("\"who\":\"E\""));
        let back = read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, vec![e, n]);
    }

    #[test]
    fn attributes_respect_signature() {
        for kind in EventType::ALL {
            assert!(!kind.signature().is_empty());
        }
        let mut a = Attributes::default();
        a.insert(AttrKey::Amount, 2);
        a.insert(AttrKey::Amount, 3);
        assert_eq!(a.len(), 1);
        assert_eq!(a.get(AttrKey::Amount), Some(3));
    }

    #[test]
    fn logger_ids_are_unique() {
        let a = EventLogger::new(0);
        let b = EventLogger::new(0);
        assert_ne!(a.id(), b.id());
    }
}
