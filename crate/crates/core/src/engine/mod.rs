//! Domain-generic pressure-field tick loop.
//!
//! The engine runs the four-phase cycle (decay, proposal, fork-based
//! validation, application + reinforcement) over an [`ArtifactState`] whose
//! region content is opaque. Everything the loop needs to know about the
//! content — pressure, edit application, validity, the solved predicate —
//! is supplied by a [`Domain`] implementation.

mod config;
mod patch;
mod run;
mod state;
mod tick;

pub use config::{ConfigError, EngineConfig};
pub use patch::{
    Actor, ActorFailure, ActorProposal, AppliedPatch, Patch, PatchRejection, Provenance,
    TokenUsage, ValidatedPatch,
};
pub use run::{run_trial, EngineRun, NoControl, RunControl, Termination};
pub use state::{ArtifactState, Domain, EditRejection, Region, RegionAux};
pub use tick::{
    activated_regions, apply_and_reinforce, collect_proposals, decay_phase, global_pressure,
    region_pressures, select_patches, tick, validate_patches, EngineError, NullSink, TickReport,
    TickSink, VecSink,
};
