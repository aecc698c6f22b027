use serde::{Deserialize, Serialize};

use crate::actors::{EscalationEvent, EscalationKind, TokenUsage};
use crate::engine::Termination;

pub const RECORD_SCHEMA: &str = "v1";

/// Everything persisted about one trial, one JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub schema: String,
    pub strategy: String,
    pub difficulty: String,
    pub agents: usize,
    pub trial: u64,
    pub seed: u64,
    pub solved: bool,
    pub termination: Termination,
    pub total_ticks: u64,
    /// Global pressure per tick, starting with the initial value
    /// (`len == total_ticks + 1`).
    pub pressure_history: Vec<f64>,
    pub band_escalations: Vec<EscalationStep>,
    pub model_escalations: Vec<EscalationStep>,
    pub final_model: String,
    pub token_usage: TokenUsage,
    pub proposed: u64,
    pub applied: u64,
    pub rejected: u64,
    pub duration_ms: u64,
}

/// One escalation as stored in the record: (tick, from, to).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscalationStep {
    pub tick: u64,
    pub from: String,
    pub to: String,
}

impl TrialRecord {
    pub fn final_pressure(&self) -> f64 {
        *self
            .pressure_history
            .last()
            .expect("pressure history is never empty")
    }

    /// Canonical bytes for reproducibility comparison: the wall-clock
    /// duration is the only non-deterministic field, so it is zeroed.
    pub fn reproducible_bytes(&self) -> Vec<u8> {
        let mut canon = self.clone();
        canon.duration_ms = 0;
        serde_json::to_vec(&canon).expect("record serialization cannot fail")
    }
}

/// Split raw escalation events into the record's band and model lists.
pub fn split_escalations(events: &[EscalationEvent]) -> (Vec<EscalationStep>, Vec<EscalationStep>) {
    let step = |e: &EscalationEvent| EscalationStep {
        tick: e.tick,
        from: e.from.clone(),
        to: e.to.clone(),
    };
    let band = events
        .iter()
        .filter(|e| e.kind == EscalationKind::Band)
        .map(step)
        .collect();
    let model = events
        .iter()
        .filter(|e| e.kind == EscalationKind::Model)
        .map(step)
        .collect();
    (band, model)
}
