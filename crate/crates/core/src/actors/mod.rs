//! Patch proposers for the scheduling domain, plus the shared machinery
//! they lean on: sampling-band escalation, pheromone hints, prompt
//! assembly, and directive parsing.

mod escalation;
mod heuristic;
mod inference;
mod pheromones;
mod prompt;
mod scripted;

pub use crate::engine::{ActorFailure, TokenUsage};
pub use escalation::{
    EscalationEvent, EscalationKind, EscalationState, SamplingBand, DEFAULT_MODEL_CHAIN,
    STALL_WINDOW,
};
pub use heuristic::HeuristicActor;
pub use inference::{GenerateResponse, InferenceActor, OllamaClient, DEFAULT_TIMEOUT};
pub use pheromones::{
    Pheromone, PheromoneStore, MAX_HINTS_PER_PROMPT, PHEROMONE_DECAY, PHEROMONE_EVICT_BELOW,
};
pub use prompt::{build_prompt, parse_patch, render_directive, ParseError, SYSTEM_PROMPT};
pub use scripted::AlwaysFailActor;
