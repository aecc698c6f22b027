use std::sync::{Arc, Mutex};
use std::time::Instant;

use crate::actors::{EscalationState, PheromoneStore};
use crate::engine::{
    global_pressure, region_pressures, AppliedPatch, Domain, EngineConfig, PatchRejection,
    Provenance, RegionAux, Termination, TickReport, TickSink, TokenUsage,
};
use crate::harness::TrialRecord;
use crate::scheduling::{initial_state, Problem, SchedulingDomain};

use super::{build_record, ActorMode, StrategyKind, TrialError};

/// Centralized control baseline: one proposal per tick, always on the
/// highest-pressure region (ties to the lowest id), fork-validated and
/// applied only when it reduces pressure. A rejected tick makes no
/// progress.
pub fn run_hierarchical(
    problem: Arc<Problem>,
    cfg: &EngineConfig,
    mode: &ActorMode,
    sink: &mut dyn TickSink,
) -> Result<TrialRecord, TrialError> {
    cfg.validate()?;
    let started = Instant::now();

    let domain = SchedulingDomain::new(problem.clone());
    let mut state = initial_state(problem.clone());
    let escalation = Arc::new(Mutex::new(EscalationState::new(mode.model_chain())));
    let pheromones = Arc::new(Mutex::new(PheromoneStore::new()));
    let mut actors = mode.build_actors(1, problem.seed, &escalation, &pheromones);
    let actor = &mut actors[0];

    let mut history = vec![global_pressure(&domain, &state)];
    let mut usage = TokenUsage::default();
    let (mut proposed, mut applied, mut rejected) = (0u64, 0u64, 0u64);
    let mut ticks = 0u64;
    let mut termination = Termination::Budget;

    if domain.is_solved(&state) {
        termination = Termination::Solved;
    } else {
        while ticks < cfg.max_ticks {
            let before_regions = region_pressures(&domain, &state);
            let pressure_before: f64 =
                before_regions.iter().sum::<f64>() + domain.shared_pressure(&state.shared);
            // Argmax with lowest-id tie-break: strictly-greater comparison
            // keeps the earliest maximum.
            let (region, max_p) = before_regions
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (id, p)| {
                    if p > best.1 {
                        (id, p)
                    } else {
                        best
                    }
                });
            if max_p < cfg.tau_act {
                termination = Termination::Quiescent;
                break;
            }

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
                    let mut fork = state.clone();
                    match domain.apply_edit(&mut fork, &proposal.edit) {
                        Ok(()) => {
                            let delta = global_pressure(&domain, &fork) - pressure_before;
                            if delta < 0.0 {
                                state = fork;
                                applied += 1;
                                applied_patches.push(AppliedPatch {
                                    region_id: region,
                                    actual_delta: delta,
                                    summary: domain.describe_edit(&proposal.edit),
                                    provenance,
                                });
                            } else {
                                rejected += 1;
                                rejections.push(PatchRejection {
                                    region_id: region,
                                    reason: "no_improvement".to_string(),
                                    summary: Some(domain.describe_edit(&proposal.edit)),
                                    provenance: Some(provenance),
                                    hint: domain.edit_hint(&proposal.edit, "no_improvement"),
                                });
                            }
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
        StrategyKind::Hierarchical,
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
