//! Splendor-like forward model with event logging, event-value functions,
//! statistical forward-planning agents and an N-tuple bandit tuner.

pub mod agents;
pub mod engine;
pub mod events;
pub mod ntbea;
pub mod seeds;
pub mod valuefn;
