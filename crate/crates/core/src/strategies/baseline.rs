use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::actors::{EscalationState, PheromoneStore};
use crate::engine::{
    global_pressure, region_pressures, AppliedPatch, Domain, EngineConfig, PatchRejection,
    Provenance, RegionAux, Termination, TickReport, TickSink, TokenUsage,
};
use crate::harness::TrialRecord;
use crate::scheduling::{initial_state, Problem, SchedulingDomain, BLOCKS};

use super::{build_record, ActorMode, StrategyKind, TrialError};

/// Fixed-order baseline: tick t targets region t mod 20 and applies any
/// domain-valid patch without a pressure check.
pub fn run_sequential(
    problem: Arc<Problem>,
    cfg: &EngineConfig,
    mode: &ActorMode,
    sink: &mut dyn TickSink,
) -> Result<TrialRecord, TrialError> {
    run_unvalidated(
        StrategyKind::Sequential,
        problem,
        cfg,
        mode,
        sink,
        |tick, _| (tick % BLOCKS as u64) as usize,
    )
}

/// Random-selection baseline: uniform region each tick from the trial's
/// seeded generator; same unvalidated apply policy as sequential.
pub fn run_random(
    problem: Arc<Problem>,
    cfg: &EngineConfig,
    mode: &ActorMode,
    sink: &mut dyn TickSink,
) -> Result<TrialRecord, TrialError> {
    run_unvalidated(
        StrategyKind::Random,
        problem,
        cfg,
        mode,
        sink,
        |_, rng| rng.gen_range(0..BLOCKS),
    )
}

fn run_unvalidated(
    kind: StrategyKind,
    problem: Arc<Problem>,
    cfg: &EngineConfig,
    mode: &ActorMode,
    sink: &mut dyn TickSink,
    mut pick_region: impl FnMut(u64, &mut ChaCha8Rng) -> usize,
) -> Result<TrialRecord, TrialError> {
    cfg.validate()?;
    let started = Instant::now();

    let domain = SchedulingDomain::new(problem.clone());
    let mut state = initial_state(problem.clone());
    let escalation = Arc::new(Mutex::new(EscalationState::new(mode.model_chain())));
    let pheromones = Arc::new(Mutex::new(PheromoneStore::new()));
    let mut actors = mode.build_actors(1, problem.seed, &escalation, &pheromones);
    let actor = &mut actors[0];
    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);

    let mut history = vec![global_pressure(&domain, &state)];
    let mut usage = TokenUsage::default();
    let (mut proposed, mut applied, mut rejected) = (0u64, 0u64, 0u64);
    let mut ticks = 0u64;
    let mut termination = Termination::Budget;

    if domain.is_solved(&state) {
        termination = Termination::Solved;
    } else {
        while ticks < cfg.max_ticks {
            let region = pick_region(ticks, &mut rng);
            let before_regions = region_pressures(&domain, &state);
            let pressure_before: f64 =
                before_regions.iter().sum::<f64>() + domain.shared_pressure(&state.shared);

            let view = domain.view(&state, region);
            let aux = RegionAux {
                region_id: region,
                fitness: state.regions[region].fitness,
                confidence: state.regions[region].confidence,
            };
            let mut applied_patches = Vec::new();
            let mut rejections = Vec::new();
            let mut tick_proposals = 0usize;
            let mut no_proposals = 0usize;

            match actor.propose(&view, &aux) {
                Ok(Some(proposal)) => {
                    proposed += 1;
                    tick_proposals = 1;
                    usage.add(proposal.usage);
                    let provenance = Provenance {
                        actor: 0,
                        band: proposal.band,
                        model: proposal.model,
                        proposal_index: 0,
                    };
                    // No pressure gate: any edit the domain accepts lands,
                    // even one that makes the schedule worse.
                    match domain.apply_edit(&mut state, &proposal.edit) {
                        Ok(()) => {
                            applied += 1;
                            let delta =
                                global_pressure(&domain, &state) - pressure_before;
                            applied_patches.push(AppliedPatch {
                                region_id: region,
                                actual_delta: delta,
                                summary: domain.describe_edit(&proposal.edit),
                                provenance,
                            });
                        }
                        Err(rejection) => {
                            rejected += 1;
                            rejections.push(PatchRejection {
                                region_id: region,
                                reason: rejection.code.clone(),
                                summary: Some(domain.describe_edit(&proposal.edit)),
                                provenance: Some(provenance),
                                hint: domain.edit_hint(&proposal.edit, &rejection.code),
                            });
                        }
                    }
                }
                Ok(None) => no_proposals = 1,
                Err(failure) => {
                    rejected += 1;
                    usage.add(failure.usage);
                    rejections.push(PatchRejection {
                        region_id: region,
                        reason: failure.reason,
                        summary: None,
                        provenance: None,
                        hint: None,
                    });
                }
            }

            let after_regions = region_pressures(&domain, &state);
            let pressure_after: f64 =
                after_regions.iter().sum::<f64>() + domain.shared_pressure(&state.shared);
            history.push(pressure_after);
            ticks += 1;
            escalation
                .lock()
                .expect("escalation lock poisoned")
                .observe(ticks, pressure_before - pressure_after);
            sink.on_tick(&TickReport {
                tick: ticks - 1,
                pressure_before,
                pressure_after,
                region_pressures_before: before_regions,
                region_pressures_after: after_regions,
                activated: vec![region],
                proposals: tick_proposals,
                no_proposals,
                applied: applied_patches,
                rejections,
                usage: TokenUsage::default(),
            });

            if domain.is_solved(&state) {
                termination = Termination::Solved;
                break;
            }
        }
    }

    let escalation = escalation.lock().expect("escalation lock poisoned");
    Ok(build_record(
        kind,
        &problem,
        1,
        termination == Termination::Solved,
        termination,
        ticks,
        history,
        &escalation.events,
        escalation.model().to_string(),
        usage,
        proposed,
        applied,
        rejected,
        started,
    ))
}
