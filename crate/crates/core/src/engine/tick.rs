use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::EngineConfig;
use super::patch::{
    Actor, ActorProposal, AppliedPatch, Patch, PatchRejection, Provenance, TokenUsage,
    ValidatedPatch,
};
use super::state::{ArtifactState, Domain, RegionAux};

/// Instrumentation for one executed tick.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TickReport {
    /// The tick number that was executed (state tick before increment).
    pub tick: u64,
    pub pressure_before: f64,
    pub pressure_after: f64,
    /// Per-region pressures measured at the start of the proposal phase.
    pub region_pressures_before: Vec<f64>,
    /// Per-region pressures after application.
    pub region_pressures_after: Vec<f64>,
    /// Region ids that activated this tick.
    pub activated: Vec<usize>,
    /// Proposals collected across all actors.
    pub proposals: usize,
    /// Actor invocations that returned no proposal (no feasible move).
    pub no_proposals: usize,
    pub applied: Vec<AppliedPatch>,
    pub rejections: Vec<PatchRejection>,
    pub usage: TokenUsage,
}

/// In-process consumer of tick reports; the harness streams trial
/// instrumentation through this.
pub trait TickSink {
    fn on_tick(&mut self, report: &TickReport);
}

pub struct NullSink;

impl TickSink for NullSink {
    fn on_tick(&mut self, _report: &TickReport) {}
}

/// Retains every report; used by tests and the transition analysis.
#[derive(Default)]
pub struct VecSink {
    pub reports: Vec<TickReport>,
}

impl TickSink for VecSink {
    fn on_tick(&mut self, report: &TickReport) {
        self.reports.push(report.clone());
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    /// An edit passed on its fork but failed on the real state. That means
    /// edit application is nondeterministic; the trial must abort.
    #[error("edit failed on real state after passing on fork (region {region}): {reason}")]
    ApplyMismatch { region: usize, reason: String },
}

/// Global pressure: sum of region pressures plus the shared-state term.
pub fn global_pressure<D: Domain>(
    domain: &D,
    state: &ArtifactState<D::Content, D::Shared>,
) -> f64 {
    let regions: f64 = state
        .regions
        .iter()
        .map(|r| domain.region_pressure(&r.content))
        .sum();
    regions + domain.shared_pressure(&state.shared)
}

pub fn region_pressures<D: Domain>(
    domain: &D,
    state: &ArtifactState<D::Content, D::Shared>,
) -> Vec<f64> {
    state
        .regions
        .iter()
        .map(|r| domain.region_pressure(&r.content))
        .collect()
}

/// Phase 1: exponential erosion of fitness and confidence. Identity when
/// the decay toggle is off; never touches content.
pub fn decay_phase<C, S>(state: &mut ArtifactState<C, S>, cfg: &EngineConfig) {
    if !cfg.decay_enabled {
        return;
    }
    let f_factor = (-cfg.lambda_f).exp();
    let g_factor = (-cfg.lambda_g).exp();
    for region in &mut state.regions {
        region.fitness *= f_factor;
        region.confidence *= g_factor;
    }
}

/// Phase 2a: region ids with pressure at or above the activation threshold
/// that are not currently inhibited, in ascending id order.
pub fn activated_regions<C, S>(
    state: &ArtifactState<C, S>,
    pressures: &[f64],
    cfg: &EngineConfig,
) -> Vec<usize> {
    debug_assert_eq!(pressures.len(), state.regions.len());
    state
        .regions
        .iter()
        .zip(pressures)
        .filter(|(region, &p)| {
            p >= cfg.tau_act
                && (!cfg.inhibition_enabled || region.inhibited_until <= state.tick)
        })
        .map(|(region, _)| region.id)
        .collect()
}

/// Phase 2b: invoke every actor for every activated region. Each actor sees
/// only the region's local view and auxiliary state. Failures are recorded,
/// never raised.
pub fn collect_proposals<D: Domain>(
    state: &ArtifactState<D::Content, D::Shared>,
    domain: &D,
    active: &[usize],
    actors: &mut [Box<dyn Actor<D>>],
) -> (Vec<Patch<D::Edit>>, Vec<PatchRejection>, usize, TokenUsage) {
    let mut patches = Vec::new();
    let mut rejections = Vec::new();
    let mut no_proposals = 0usize;
    let mut usage = TokenUsage::default();
    let mut proposal_index = 0usize;

    for &region_id in active {
        let view = domain.view(state, region_id);
        let region = &state.regions[region_id];
        let aux = RegionAux {
            region_id,
            fitness: region.fitness,
            confidence: region.confidence,
        };
        for (actor_id, actor) in actors.iter_mut().enumerate() {
            match actor.propose(&view, &aux) {
                Ok(Some(ActorProposal {
                    edit,
                    predicted_delta,
                    band,
                    model,
                    usage: call_usage,
                })) => {
                    usage.add(call_usage);
                    let claimed_resources = domain.edit_resources(&edit);
                    patches.push(Patch {
                        region_id,
                        edit,
                        predicted_delta,
                        provenance: Provenance {
                            actor: actor_id,
                            band,
                            model,
                            proposal_index,
                        },
                        claimed_resources,
                    });
                    proposal_index += 1;
                }
                Ok(None) => no_proposals += 1,
                Err(failure) => {
                    usage.add(failure.usage);
                    rejections.push(PatchRejection {
                        region_id,
                        reason: failure.reason,
                        summary: None,
                        provenance: Some(Provenance {
                            actor: actor_id,
                            band: None,
                            model: None,
                            proposal_index,
                        }),
                        hint: None,
                    });
                    proposal_index += 1;
                }
            }
        }
    }
    (patches, rejections, no_proposals, usage)
}

/// Phase 3a: validate every patch on an independent clone of the state,
/// at most `fork_width` forks in flight. The result order matches the
/// input order regardless of validation scheduling.
pub fn validate_patches<D: Domain + Sync>(
    state: &ArtifactState<D::Content, D::Shared>,
    patches: Vec<Patch<D::Edit>>,
    domain: &D,
    cfg: &EngineConfig,
) -> Vec<ValidatedPatch<D::Edit>> {
    let pressure_before = global_pressure(domain, state);
    let mut validated = Vec::with_capacity(patches.len());

    if cfg.fork_width <= 1 || patches.len() <= 1 {
        for patch in patches {
            validated.push(validate_one(state, patch, domain, pressure_before));
        }
        return validated;
    }

    let mut patches = patches;
    while !patches.is_empty() {
        let rest = patches.split_off(patches.len().min(cfg.fork_width));
        let chunk = std::mem::replace(&mut patches, rest);
        let results = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .into_iter()
                .map(|patch| {
                    scope.spawn(move || validate_one(state, patch, domain, pressure_before))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("validation fork panicked"))
                .collect::<Vec<_>>()
        });
        validated.extend(results);
    }
    validated
}

fn validate_one<D: Domain>(
    state: &ArtifactState<D::Content, D::Shared>,
    patch: Patch<D::Edit>,
    domain: &D,
    pressure_before: f64,
) -> ValidatedPatch<D::Edit> {
    let mut fork = state.clone();
    match domain.apply_edit(&mut fork, &patch.edit) {
        Ok(()) => {
            let actual_delta = global_pressure(domain, &fork) - pressure_before;
            let valid = actual_delta < 0.0;
            ValidatedPatch {
                patch,
                actual_delta,
                valid,
                reject_reason: (!valid).then(|| "no_improvement".to_string()),
            }
        }
        Err(rejection) => ValidatedPatch {
            patch,
            actual_delta: 0.0,
            valid: false,
            reject_reason: Some(rejection.code),
        },
    }
}

/// Phase 3b: greedy selection of at most `kappa` non-conflicting valid
/// patches, best improvement first. Ties break on (region id, proposal
/// index) so the result is a pure function of the validated set.
pub fn select_patches<E: Clone>(
    validated: &[ValidatedPatch<E>],
    cfg: &EngineConfig,
) -> Vec<ValidatedPatch<E>> {
    let mut candidates: Vec<&ValidatedPatch<E>> = validated.iter().filter(|v| v.valid).collect();
    candidates.sort_by(|a, b| {
        a.actual_delta
            .total_cmp(&b.actual_delta)
            .then(a.patch.region_id.cmp(&b.patch.region_id))
            .then(a.patch.provenance.proposal_index.cmp(&b.patch.provenance.proposal_index))
    });

    let mut selected: Vec<ValidatedPatch<E>> = Vec::new();
    let mut used_regions = std::collections::HashSet::new();
    let mut used_resources = std::collections::HashSet::new();
    for candidate in candidates {
        if selected.len() >= cfg.kappa {
            break;
        }
        if used_regions.contains(&candidate.patch.region_id) {
            continue;
        }
        if candidate
            .patch
            .claimed_resources
            .iter()
            .any(|r| used_resources.contains(r))
        {
            continue;
        }
        used_regions.insert(candidate.patch.region_id);
        used_resources.extend(candidate.patch.claimed_resources.iter().copied());
        selected.push(candidate.clone());
    }
    selected
}

/// Phase 4: apply the selected edits to the real state, boost fitness and
/// confidence (clamped at 1), and mark the regions inhibited.
pub fn apply_and_reinforce<D: Domain>(
    state: &mut ArtifactState<D::Content, D::Shared>,
    selected: &[ValidatedPatch<D::Edit>],
    domain: &D,
    cfg: &EngineConfig,
) -> Result<(), EngineError> {
    for v in selected {
        domain
            .apply_edit(state, &v.patch.edit)
            .map_err(|rejection| EngineError::ApplyMismatch {
                region: v.patch.region_id,
                reason: rejection.to_string(),
            })?;
        let region = &mut state.regions[v.patch.region_id];
        region.fitness = (region.fitness + cfg.delta_f).min(1.0);
        region.confidence = (region.confidence + cfg.delta_g).min(1.0);
        if cfg.inhibition_enabled {
            region.inhibited_until = state.tick + cfg.tau_inh;
        }
    }
    Ok(())
}

/// One full pressure-field tick: decay, activation and proposal, fork
/// validation and selection, application and reinforcement. Global
/// pressure never increases across a tick.
pub fn tick<D: Domain + Sync>(
    state: &mut ArtifactState<D::Content, D::Shared>,
    actors: &mut [Box<dyn Actor<D>>],
    domain: &D,
    cfg: &EngineConfig,
) -> Result<TickReport, EngineError> {
    let tick_no = state.tick;

    decay_phase(state, cfg);

    let pressures = region_pressures(domain, state);
    let pressure_before: f64 =
        pressures.iter().sum::<f64>() + domain.shared_pressure(&state.shared);
    let activated = activated_regions(state, &pressures, cfg);

    let (patches, mut rejections, no_proposals, usage) =
        collect_proposals(state, domain, &activated, actors);
    let proposals = patches.len();

    let validated = validate_patches(state, patches, domain, cfg);
    let selected = select_patches(&validated, cfg);

    for v in &validated {
        if !v.valid {
            let reason = v
                .reject_reason
                .clone()
                .unwrap_or_else(|| "rejected".to_string());
            rejections.push(PatchRejection {
                region_id: v.patch.region_id,
                reason: reason.clone(),
                summary: Some(domain.describe_edit(&v.patch.edit)),
                provenance: Some(v.patch.provenance.clone()),
                hint: domain.edit_hint(&v.patch.edit, &reason),
            });
        }
    }
    // Patches that were valid but lost the conflict scan are not rejections;
    // they simply were not selected this tick.

    apply_and_reinforce(state, &selected, domain, cfg)?;
    state.tick += 1;

    let region_after = region_pressures(domain, state);
    let pressure_after: f64 =
        region_after.iter().sum::<f64>() + domain.shared_pressure(&state.shared);

    let applied = selected
        .iter()
        .map(|v| AppliedPatch {
            region_id: v.patch.region_id,
            actual_delta: v.actual_delta,
            summary: domain.describe_edit(&v.patch.edit),
            provenance: v.patch.provenance.clone(),
        })
        .collect();

    Ok(TickReport {
        tick: tick_no,
        pressure_before,
        pressure_after,
        region_pressures_before: pressures,
        region_pressures_after: region_after,
        activated,
        proposals,
        no_proposals,
        applied,
        rejections,
        usage,
    })
}
