//! Pressure-field coordination simulator.
//!
//! A decentralized multi-agent coordination engine built around a shared
//! artifact, per-region pressure signals, and temporal decay, instantiated
//! on meeting-room scheduling. Ships five comparable coordination
//! strategies, a seeded experiment harness, and a statistics suite.

pub mod actors;
pub mod engine;
pub mod harness;
pub mod scheduling;
pub mod stats;
pub mod strategies;
