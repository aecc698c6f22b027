use serde::{Deserialize, Serialize};

use super::config::EngineConfig;
use super::patch::{Actor, TokenUsage};
use super::state::{ArtifactState, Domain};
use super::tick::{tick, EngineError, TickReport, TickSink};

/// Why a trial stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The domain's solved predicate held.
    Solved,
    /// No region pressure reached the activation threshold: a stable basin.
    /// Pressure depends only on content, so this state persists.
    Quiescent,
    /// The tick budget ran out.
    Budget,
}

/// Hook invoked by the run loop between ticks, with mutable access to the
/// actors. Escalation and pheromone updates live behind this.
pub trait RunControl<D: Domain> {
    fn after_tick(&mut self, report: &TickReport, actors: &mut [Box<dyn Actor<D>>]);
}

pub struct NoControl;

impl<D: Domain> RunControl<D> for NoControl {
    fn after_tick(&mut self, _report: &TickReport, _actors: &mut [Box<dyn Actor<D>>]) {}
}

/// Engine-level outcome of one trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EngineRun {
    pub solved: bool,
    pub termination: Termination,
    pub total_ticks: u64,
    /// Global pressure per tick, including the initial value
    /// (`len == total_ticks + 1`).
    pub pressure_history: Vec<f64>,
    pub proposals: u64,
    pub applied: u64,
    pub rejections: u64,
    pub usage: TokenUsage,
}

/// Run the tick loop until the domain reports solved, the system goes
/// quiescent, or the budget is exhausted.
pub fn run_trial<D: Domain + Sync>(
    state: &mut ArtifactState<D::Content, D::Shared>,
    actors: &mut [Box<dyn Actor<D>>],
    domain: &D,
    cfg: &EngineConfig,
    sink: &mut dyn TickSink,
    control: &mut dyn RunControl<D>,
) -> Result<EngineRun, EngineError> {
    let mut pressure_history = vec![super::tick::global_pressure(domain, state)];
    let mut proposals = 0u64;
    let mut applied = 0u64;
    let mut rejections = 0u64;
    let mut usage = TokenUsage::default();

    if domain.is_solved(state) {
        return Ok(EngineRun {
            solved: true,
            termination: Termination::Solved,
            total_ticks: 0,
            pressure_history,
            proposals,
            applied,
            rejections,
            usage,
        });
    }

    let mut termination = Termination::Budget;
    while state.tick < cfg.max_ticks {
        let report = tick(state, actors, domain, cfg)?;
        pressure_history.push(report.pressure_after);
        proposals += report.proposals as u64;
        applied += report.applied.len() as u64;
        rejections += report.rejections.len() as u64;
        usage.add(report.usage);
        control.after_tick(&report, actors);
        sink.on_tick(&report);

        if domain.is_solved(state) {
            termination = Termination::Solved;
            break;
        }
        // Stable basin: every region pressure below tau_act. Inhibition and
        // decay cannot change pressures, so nothing will ever activate again.
        if report
            .region_pressures_after
            .iter()
            .all(|&p| p < cfg.tau_act)
        {
            termination = Termination::Quiescent;
            break;
        }
    }

    Ok(EngineRun {
        solved: termination == Termination::Solved,
        termination,
        total_ticks: state.tick,
        pressure_history,
        proposals,
        applied,
        rejections,
        usage,
    })
}
