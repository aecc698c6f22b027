//! The five coordination strategies as trial runners. They share the
//! problem instance, actors, prompts, parsing, and tick budget; they
//! differ only in region selection, parallelism, and validation policy.

mod baseline;
mod conversation;
mod hierarchical;
mod pressure_field;

use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actors::{
    AlwaysFailActor, EscalationEvent, EscalationState, HeuristicActor, InferenceActor,
    OllamaClient, PheromoneStore, TokenUsage, DEFAULT_TIMEOUT,
};
use crate::engine::{Actor, ConfigError, EngineError, Termination};
use crate::harness::{split_escalations, TrialRecord, RECORD_SCHEMA};
use crate::scheduling::{Problem, SchedulingDomain};

pub use baseline::{run_random, run_sequential};
pub use conversation::{
    run_conversation, CallCounts, ConversationBackend, ConversationConfig, ScriptedBackend,
};
pub use hierarchical::run_hierarchical;
pub use pressure_field::run_pressure_field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    PressureField,
    Conversation,
    Hierarchical,
    Sequential,
    Random,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::PressureField,
        StrategyKind::Conversation,
        StrategyKind::Hierarchical,
        StrategyKind::Sequential,
        StrategyKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::PressureField => "pressure_field",
            StrategyKind::Conversation => "conversation",
            StrategyKind::Hierarchical => "hierarchical",
            StrategyKind::Sequential => "sequential",
            StrategyKind::Random => "random",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown strategy: {s}"))
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum TrialError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// How proposals are produced: the deterministic rule actor, a model
/// endpoint, or a scripted always-fail stand-in for stall testing.
#[derive(Debug, Clone)]
pub enum ActorMode {
    Heuristic { noise: f64 },
    Inference { host: String, models: Vec<String> },
    AlwaysFail,
}

impl ActorMode {
    pub fn label(&self) -> &'static str {
        match self {
            ActorMode::Heuristic { .. } => "heuristic",
            ActorMode::Inference { .. } => "inference",
            ActorMode::AlwaysFail => "always_fail",
        }
    }

    pub fn model_chain(&self) -> Vec<String> {
        match self {
            ActorMode::Inference { models, .. } if !models.is_empty() => models.clone(),
            _ => crate::actors::DEFAULT_MODEL_CHAIN
                .iter()
                .map(|m| m.to_string())
                .collect(),
        }
    }

    /// Per-actor deterministic seed derived from the problem seed.
    pub fn actor_seed(problem_seed: u64, index: usize) -> u64 {
        problem_seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(index as u64 + 1)
    }

    pub(crate) fn build_actors(
        &self,
        count: usize,
        problem_seed: u64,
        escalation: &Arc<Mutex<EscalationState>>,
        pheromones: &Arc<Mutex<PheromoneStore>>,
    ) -> Vec<Box<dyn Actor<SchedulingDomain>>> {
        (0..count)
            .map(|i| -> Box<dyn Actor<SchedulingDomain>> {
                let seed = Self::actor_seed(problem_seed, i);
                match self {
                    ActorMode::Heuristic { noise } => {
                        Box::new(HeuristicActor::with_noise(seed, *noise))
                    }
                    ActorMode::Inference { host, .. } => Box::new(InferenceActor::new(
                        Arc::new(OllamaClient::new(host.clone(), DEFAULT_TIMEOUT)),
                        escalation.clone(),
                        pheromones.clone(),
                        seed,
                    )),
                    ActorMode::AlwaysFail => Box::new(AlwaysFailActor),
                }
            })
            .collect()
    }
}

/// Run one trial with the given strategy. `agents` only affects
/// pressure_field; the baselines are single-actor by design.
pub fn run_strategy(
    kind: StrategyKind,
    problem: Arc<Problem>,
    agents: usize,
    cfg: &crate::engine::EngineConfig,
    mode: &ActorMode,
    sink: &mut dyn crate::engine::TickSink,
) -> Result<TrialRecord, TrialError> {
    let mut record = match kind {
        StrategyKind::PressureField => run_pressure_field(problem, agents, cfg, mode, sink),
        StrategyKind::Conversation => {
            let conv = ConversationConfig::default();
            let mut backend = conversation::backend_for_mode(mode, &problem, &conv);
            run_conversation(problem, cfg, &conv, backend.as_mut(), sink)
        }
        StrategyKind::Hierarchical => run_hierarchical(problem, cfg, mode, sink),
        StrategyKind::Sequential => run_sequential(problem, cfg, mode, sink),
        StrategyKind::Random => run_random(problem, cfg, mode, sink),
    }?;
    // Baselines run one actor internally; the record still reports the
    // grid cell's agent count, which the seed encodes.
    record.agents = agents;
    Ok(record)
}

/// Shared record assembly for all runners.
#[allow(clippy::too_many_arguments)]
pub(crate) fn build_record(
    strategy: StrategyKind,
    problem: &Problem,
    agents: usize,
    solved: bool,
    termination: Termination,
    total_ticks: u64,
    pressure_history: Vec<f64>,
    escalations: &[EscalationEvent],
    final_model: String,
    token_usage: TokenUsage,
    proposed: u64,
    applied: u64,
    rejected: u64,
    started: Instant,
) -> TrialRecord {
    let (band_escalations, model_escalations) = split_escalations(escalations);
    TrialRecord {
        schema: RECORD_SCHEMA.to_string(),
        strategy: strategy.name().to_string(),
        difficulty: problem.difficulty.name().to_string(),
        agents,
        trial: problem.seed / 1000,
        seed: problem.seed,
        solved,
        termination,
        total_ticks,
        pressure_history,
        band_escalations,
        model_escalations,
        final_model,
        token_usage,
        proposed,
        applied,
        rejected,
        duration_ms: started.elapsed().as_millis() as u64,
    }
}
