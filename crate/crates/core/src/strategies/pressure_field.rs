use std::sync::{Arc, Mutex};
use std::time::Instant;

use crate::actors::{EscalationState, PheromoneStore};
use crate::engine::{run_trial, Actor, EngineConfig, RunControl, TickReport, TickSink};
use crate::harness::TrialRecord;
use crate::scheduling::{initial_state, Problem, SchedulingDomain};

use super::{build_record, ActorMode, StrategyKind, TrialError};

/// Between-tick controller for pressure-field runs: feeds the stall
/// detector and, when examples are enabled, the pheromone store.
struct FieldControl {
    escalation: Arc<Mutex<EscalationState>>,
    pheromones: Arc<Mutex<PheromoneStore>>,
    examples_enabled: bool,
}

impl RunControl<SchedulingDomain> for FieldControl {
    fn after_tick(
        &mut self,
        report: &TickReport,
        _actors: &mut [Box<dyn Actor<SchedulingDomain>>],
    ) {
        let velocity = report.pressure_before - report.pressure_after;
        self.escalation
            .lock()
            .expect("escalation lock poisoned")
            .observe(report.tick + 1, velocity);
        if self.examples_enabled {
            self.pheromones
                .lock()
                .expect("pheromone lock poisoned")
                .update(report);
        }
    }
}

/// Run the full pressure-field strategy: `agents` parallel proposers over
/// the engine tick loop, with fork validation and pressure-gated apply.
pub fn run_pressure_field(
    problem: Arc<Problem>,
    agents: usize,
    cfg: &EngineConfig,
    mode: &ActorMode,
    sink: &mut dyn TickSink,
) -> Result<TrialRecord, TrialError> {
    assert!(agents >= 1, "pressure_field needs at least one agent");
    cfg.validate()?;
    let started = Instant::now();

    let domain = SchedulingDomain::new(problem.clone());
    let mut state = initial_state(problem.clone());
    let escalation = Arc::new(Mutex::new(EscalationState::new(mode.model_chain())));
    let pheromones = Arc::new(Mutex::new(PheromoneStore::new()));
    let mut actors = mode.build_actors(agents, problem.seed, &escalation, &pheromones);
    let mut control = FieldControl {
        escalation: escalation.clone(),
        pheromones,
        examples_enabled: cfg.examples_enabled,
    };

    let run = run_trial(&mut state, &mut actors, &domain, cfg, sink, &mut control)?;

    let escalation = escalation.lock().expect("escalation lock poisoned");
    Ok(build_record(
        StrategyKind::PressureField,
        &problem,
        agents,
        run.solved,
        run.termination,
        run.total_ticks,
        run.pressure_history,
        &escalation.events,
        escalation.model().to_string(),
        run.usage,
        run.proposals,
        run.applied,
        run.rejections,
        started,
    ))
}
