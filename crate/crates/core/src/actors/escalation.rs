use rand::Rng;
use serde::{Deserialize, Serialize};

/// Sampling parameter band for one inference call. Escalation walks the
/// bands in order when pressure stops moving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingBand {
    Exploitation,
    Balanced,
    Exploration,
}

impl SamplingBand {
    pub fn name(self) -> &'static str {
        match self {
            SamplingBand::Exploitation => "exploitation",
            SamplingBand::Balanced => "balanced",
            SamplingBand::Exploration => "exploration",
        }
    }

    pub fn temperature_range(self) -> (f64, f64) {
        match self {
            SamplingBand::Exploitation => (0.15, 0.35),
            SamplingBand::Balanced => (0.35, 0.55),
            SamplingBand::Exploration => (0.55, 0.85),
        }
    }

    pub fn top_p_range(self) -> (f64, f64) {
        match self {
            SamplingBand::Exploitation => (0.80, 0.90),
            SamplingBand::Balanced => (0.85, 0.95),
            SamplingBand::Exploration => (0.90, 0.98),
        }
    }

    pub fn next(self) -> Option<SamplingBand> {
        match self {
            SamplingBand::Exploitation => Some(SamplingBand::Balanced),
            SamplingBand::Balanced => Some(SamplingBand::Exploration),
            SamplingBand::Exploration => None,
        }
    }

    /// Draw (temperature, top_p) uniformly from the band's ranges.
    pub fn sample(self, rng: &mut impl Rng) -> (f64, f64) {
        let (t_lo, t_hi) = self.temperature_range();
        let (p_lo, p_hi) = self.top_p_range();
        (rng.gen_range(t_lo..=t_hi), rng.gen_range(p_lo..=p_hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscalationKind {
    Band,
    Model,
}

/// One escalation step. For band escalations `from`/`to` are band names,
/// for model escalations they are model names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscalationEvent {
    /// Completed ticks when the escalation fired (1-based).
    pub tick: u64,
    pub kind: EscalationKind,
    pub from: String,
    pub to: String,
}

/// Ticks of exactly zero pressure velocity before each escalation step.
pub const STALL_WINDOW: u64 = 7;

pub const DEFAULT_MODEL_CHAIN: [&str; 3] = ["qwen2.5:0.5b", "qwen2.5:1.5b", "qwen2.5:3b"];

/// Stall detector and escalation ladder shared by all agents of one trial.
///
/// Pressure velocity is the per-tick drop in global pressure. Exactly zero
/// velocity counts as a stalled tick; each `STALL_WINDOW` consecutive
/// stalled ticks advance the sampling band, and a stall that outlives the
/// whole band ladder advances the model and resets the band. At the last
/// model and band, escalation stops.
#[derive(Debug, Clone)]
pub struct EscalationState {
    band: SamplingBand,
    models: Vec<String>,
    model_index: usize,
    stalled_ticks: u64,
    pub events: Vec<EscalationEvent>,
}

impl EscalationState {
    pub fn new(models: Vec<String>) -> Self {
        assert!(!models.is_empty(), "escalation needs at least one model");
        Self {
            band: SamplingBand::Exploitation,
            models,
            model_index: 0,
            stalled_ticks: 0,
            events: Vec::new(),
        }
    }

    pub fn band(&self) -> SamplingBand {
        self.band
    }

    pub fn model(&self) -> &str {
        &self.models[self.model_index]
    }

    /// Feed the outcome of one completed tick. `ticks_completed` is 1-based.
    pub fn observe(&mut self, ticks_completed: u64, velocity: f64) {
        if velocity != 0.0 {
            self.stalled_ticks = 0;
            return;
        }
        self.stalled_ticks += 1;
        if self.stalled_ticks < STALL_WINDOW {
            return;
        }
        self.stalled_ticks = 0;
        if let Some(next) = self.band.next() {
            let from = self.band.name().to_string();
            self.band = next;
            self.events.push(EscalationEvent {
                tick: ticks_completed,
                kind: EscalationKind::Band,
                from,
                to: self.band.name().to_string(),
            });
        } else if self.model_index + 1 < self.models.len() {
            let from = self.model().to_string();
            self.model_index += 1;
            self.band = SamplingBand::Exploitation;
            self.events.push(EscalationEvent {
                tick: ticks_completed,
                kind: EscalationKind::Model,
                from,
                to: self.model().to_string(),
            });
        }
    }
}

impl Default for EscalationState {
    fn default() -> Self {
        Self::new(DEFAULT_MODEL_CHAIN.iter().map(|m| m.to_string()).collect())
    }
}
