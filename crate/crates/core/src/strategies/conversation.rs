use std::sync::Arc;
use std::time::Instant;

use crate::actors::{
    build_prompt, parse_patch, EscalationEvent, EscalationState, HeuristicActor, OllamaClient,
    TokenUsage, DEFAULT_TIMEOUT,
};
use crate::engine::{
    global_pressure, region_pressures, Actor, AppliedPatch, Domain, EngineConfig, PatchRejection,
    Provenance, RegionAux, Termination, TickReport, TickSink,
};
use crate::harness::TrialRecord;
use crate::scheduling::{
    initial_state, render_block_context, BlockView, Edit, Problem, SchedulingDomain,
};

use super::{build_record, ActorMode, StrategyKind, TrialError};

/// Dialogue shape of the conversation baseline: one coordinator call per
/// tick, then up to `max_turns` proposer/validator exchanges with fixed
/// sampling.
#[derive(Debug, Clone, Copy)]
pub struct ConversationConfig {
    pub max_turns: usize,
    pub temperature: f64,
    pub top_p: f64,
}

impl Default for ConversationConfig {
    fn default() -> Self {
        Self {
            max_turns: 5,
            temperature: 0.3,
            top_p: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CallCounts {
    pub coordinator: u64,
    pub proposer: u64,
    pub validator: u64,
}

impl CallCounts {
    pub fn total(&self) -> u64 {
        self.coordinator + self.proposer + self.validator
    }
}

/// The three dialogue roles, behind one interface so tests can run the
/// conversation loop without a model server.
pub trait ConversationBackend {
    /// Pick a region from the top-pressure candidates (id, pressure).
    /// `None` falls back to the highest-pressure candidate.
    fn coordinate(&mut self, candidates: &[(usize, f64)]) -> (Option<usize>, TokenUsage);

    /// Propose an edit for the chosen region; `None` when the call failed
    /// or produced nothing parseable.
    fn propose(&mut self, view: &BlockView) -> (Option<Edit>, TokenUsage);

    /// Approve or reject a proposal. `measured_delta` is the fork-measured
    /// pressure change, passed for backends that want it; approval is the
    /// apply gate regardless of its sign.
    fn validate(&mut self, view: &BlockView, edit: &Edit, measured_delta: f64)
        -> (bool, TokenUsage);

    fn after_tick(&mut self, _ticks_completed: u64, _velocity: f64) {}

    fn escalation_events(&self) -> Vec<EscalationEvent> {
        Vec::new()
    }

    fn current_model(&self) -> String;

    fn calls(&self) -> CallCounts;
}

/// Conversation-based coordination: per tick, a coordinator picks a hot
/// region, then proposer and validator exchange turns until approval or
/// the turn limit. Approval, not pressure, gates application.
pub fn run_conversation(
    problem: Arc<Problem>,
    cfg: &EngineConfig,
    conv: &ConversationConfig,
    backend: &mut dyn ConversationBackend,
    sink: &mut dyn TickSink,
) -> Result<TrialRecord, TrialError> {
    cfg.validate()?;
    let started = Instant::now();

    let domain = SchedulingDomain::new(problem.clone());
    let mut state = initial_state(problem.clone());

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

            let mut candidates: Vec<(usize, f64)> =
                before_regions.iter().copied().enumerate().collect();
            candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            candidates.truncate(5);
            if candidates.first().is_none_or(|&(_, p)| p < cfg.tau_act) {
                termination = Termination::Quiescent;
                break;
            }

            let (choice, coord_usage) = backend.coordinate(&candidates);
            usage.add(coord_usage);
            let region = choice
                .filter(|r| candidates.iter().any(|&(id, _)| id == *r))
                .unwrap_or(candidates[0].0);

            let view = domain.view(&state, region);
            let mut applied_patches = Vec::new();
            let mut rejections = Vec::new();
            let mut tick_proposals = 0usize;
            let mut no_proposals = 0usize;

            for _turn in 0..conv.max_turns {
                let (edit, propose_usage) = backend.propose(&view);
                usage.add(propose_usage);
                let Some(edit) = edit else {
                    no_proposals += 1;
                    continue;
                };
                proposed += 1;
                tick_proposals += 1;
                let provenance = Provenance {
                    actor: 0,
                    band: None,
                    model: Some(backend.current_model()),
                    proposal_index: 0,
                };
                let mut fork = state.clone();
                match domain.apply_edit(&mut fork, &edit) {
                    Err(rejection) => {
                        rejected += 1;
                        rejections.push(PatchRejection {
                            region_id: region,
                            reason: rejection.code.clone(),
                            summary: Some(domain.describe_edit(&edit)),
                            provenance: Some(provenance),
                            hint: domain.edit_hint(&edit, &rejection.code),
                        });
                    }
                    Ok(()) => {
                        let delta = global_pressure(&domain, &fork) - pressure_before;
                        let (approved, validate_usage) = backend.validate(&view, &edit, delta);
                        usage.add(validate_usage);
                        if approved {
                            state = fork;
                            applied += 1;
                            applied_patches.push(AppliedPatch {
                                region_id: region,
                                actual_delta: delta,
                                summary: domain.describe_edit(&edit),
                                provenance,
                            });
                            break;
                        }
                        rejected += 1;
                        rejections.push(PatchRejection {
                            region_id: region,
                            reason: "not_approved".to_string(),
                            summary: Some(domain.describe_edit(&edit)),
                            provenance: Some(provenance),
                            hint: None,
                        });
                    }
                }
            }

            let after_regions = region_pressures(&domain, &state);
            let pressure_after: f64 =
                after_regions.iter().sum::<f64>() + domain.shared_pressure(&state.shared);
            history.push(pressure_after);
            ticks += 1;
            backend.after_tick(ticks, pressure_before - pressure_after);
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

    Ok(build_record(
        StrategyKind::Conversation,
        &problem,
        1,
        termination == Termination::Solved,
        termination,
        ticks,
        history,
        &backend.escalation_events(),
        backend.current_model(),
        usage,
        proposed,
        applied,
        rejected,
        started,
    ))
}

/// Build the backend matching an actor mode.
pub(crate) fn backend_for_mode(
    mode: &ActorMode,
    problem: &Arc<Problem>,
    conv: &ConversationConfig,
) -> Box<dyn ConversationBackend> {
    let seed = ActorMode::actor_seed(problem.seed, 0);
    match mode {
        ActorMode::Heuristic { noise } => Box::new(ScriptedBackend::new(seed, *noise)),
        ActorMode::AlwaysFail => Box::new(ScriptedBackend::failing(seed)),
        ActorMode::Inference { host, .. } => Box::new(InferenceBackend::new(
            OllamaClient::new(host.clone(), DEFAULT_TIMEOUT),
            problem.clone(),
            mode.model_chain(),
            *conv,
        )),
    }
}

/// Offline stand-in: coordinator takes the hottest candidate, the proposer
/// is the rule-based actor, and the validator approves exactly the
/// pressure-reducing patches. Used by tests; the paper's setup is the
/// inference backend.
pub struct ScriptedBackend {
    proposer: HeuristicActor,
    /// Validator refuses everything; for dialogue-accounting tests.
    pub reject_all: bool,
    fail_proposals: bool,
    counts: CallCounts,
}

impl ScriptedBackend {
    pub fn new(seed: u64, noise: f64) -> Self {
        Self {
            proposer: HeuristicActor::with_noise(seed, noise),
            reject_all: false,
            fail_proposals: false,
            counts: CallCounts::default(),
        }
    }

    pub fn failing(seed: u64) -> Self {
        Self {
            fail_proposals: true,
            ..Self::new(seed, 0.0)
        }
    }
}

impl ConversationBackend for ScriptedBackend {
    fn coordinate(&mut self, candidates: &[(usize, f64)]) -> (Option<usize>, TokenUsage) {
        self.counts.coordinator += 1;
        (candidates.first().map(|&(id, _)| id), TokenUsage::default())
    }

    fn propose(&mut self, view: &BlockView) -> (Option<Edit>, TokenUsage) {
        self.counts.proposer += 1;
        if self.fail_proposals {
            return (None, TokenUsage::default());
        }
        let aux = RegionAux {
            region_id: view.region_id,
            fitness: 0.5,
            confidence: 0.5,
        };
        let edit = self
            .proposer
            .propose(view, &aux)
            .ok()
            .flatten()
            .map(|p| p.edit);
        (edit, TokenUsage::default())
    }

    fn validate(&mut self, _view: &BlockView, _edit: &Edit, delta: f64) -> (bool, TokenUsage) {
        self.counts.validator += 1;
        (!self.reject_all && delta < 0.0, TokenUsage::default())
    }

    fn current_model(&self) -> String {
        "scripted".to_string()
    }

    fn calls(&self) -> CallCounts {
        self.counts
    }
}

/// Model-backed dialogue roles with fixed sampling; the model chain still
/// escalates on stalls so all strategies share escalation triggers.
pub struct InferenceBackend {
    client: OllamaClient,
    domain: SchedulingDomain,
    escalation: EscalationState,
    conv: ConversationConfig,
    counts: CallCounts,
}

impl InferenceBackend {
    pub fn new(
        client: OllamaClient,
        problem: Arc<Problem>,
        models: Vec<String>,
        conv: ConversationConfig,
    ) -> Self {
        Self {
            client,
            domain: SchedulingDomain::new(problem),
            escalation: EscalationState::new(models),
            conv,
            counts: CallCounts::default(),
        }
    }

    fn call(&mut self, prompt: &str) -> (Option<String>, TokenUsage) {
        let model = self.escalation.model().to_string();
        match self
            .client
            .generate(&model, prompt, self.conv.temperature, self.conv.top_p)
        {
            Ok(response) => {
                let usage = TokenUsage {
                    prompt: response.prompt_eval_count,
                    completion: response.eval_count,
                };
                (Some(response.response), usage)
            }
            Err(_) => (None, TokenUsage::default()),
        }
    }
}

impl ConversationBackend for InferenceBackend {
    fn coordinate(&mut self, candidates: &[(usize, f64)]) -> (Option<usize>, TokenUsage) {
        self.counts.coordinator += 1;
        let mut prompt = String::from(
            "These schedule blocks need attention, hottest first:\n",
        );
        for &(id, p) in candidates {
            prompt.push_str(&format!("  Region {id}: pressure {p:.2}\n"));
        }
        prompt.push_str("Reply with the number of the region to work on.");
        let (response, usage) = self.call(&prompt);
        let choice = response.and_then(|text| {
            text.split(|c: char| !c.is_ascii_digit())
                .filter(|s| !s.is_empty())
                .filter_map(|s| s.parse::<usize>().ok())
                .find(|id| candidates.iter().any(|&(c, _)| c == *id))
        });
        (choice, usage)
    }

    fn propose(&mut self, view: &BlockView) -> (Option<Edit>, TokenUsage) {
        self.counts.proposer += 1;
        let prompt = build_prompt(&render_block_context(view), &[]);
        let (response, usage) = self.call(&prompt);
        let edit = response.and_then(|text| parse_patch(&text, view).ok());
        (edit, usage)
    }

    fn validate(&mut self, _view: &BlockView, edit: &Edit, delta: f64) -> (bool, TokenUsage) {
        self.counts.validator += 1;
        let prompt = format!(
            "Proposed schedule change: {}.\nMeasured pressure change: {delta:+.3} \
             (negative is better).\nReply APPROVE or REJECT.",
            self.domain.describe_edit(edit)
        );
        let (response, usage) = self.call(&prompt);
        let approved = response
            .map(|text| {
                let upper = text.to_uppercase();
                upper.contains("APPROVE") && !upper.contains("REJECT")
            })
            .unwrap_or(false);
        (approved, usage)
    }

    fn after_tick(&mut self, ticks_completed: u64, velocity: f64) {
        self.escalation.observe(ticks_completed, velocity);
    }

    fn escalation_events(&self) -> Vec<EscalationEvent> {
        self.escalation.events.clone()
    }

    fn current_model(&self) -> String {
        self.escalation.model().to_string()
    }

    fn calls(&self) -> CallCounts {
        self.counts
    }
}
