use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Parameters of the pressure-field tick loop.
///
/// Defaults: per-tick decay rates `lambda_f = 0.1`, `lambda_g = 0.05`,
/// reinforcement boosts `delta_f = 0.3`, `delta_g = 0.2`, activation
/// threshold `tau_act = 0.05` pressure units, inhibition of 2 ticks.
/// `kappa` and `fork_width` default to the agent count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Activation threshold in pressure units.
    pub tau_act: f64,
    /// Per-tick fitness decay rate.
    pub lambda_f: f64,
    /// Per-tick confidence decay rate.
    pub lambda_g: f64,
    /// Fitness boost applied on a successful patch.
    pub delta_f: f64,
    /// Confidence boost applied on a successful patch.
    pub delta_g: f64,
    /// Maximum patches applied per tick.
    pub kappa: usize,
    /// Inhibition duration in ticks after an applied patch.
    pub tau_inh: u64,
    /// Maximum concurrent validation forks.
    pub fork_width: usize,
    /// Tick budget for a trial.
    pub max_ticks: u64,
    pub decay_enabled: bool,
    pub inhibition_enabled: bool,
    pub examples_enabled: bool,
}

impl EngineConfig {
    /// Default configuration for a given agent count: `kappa` and the fork
    /// width both equal the number of agents.
    pub fn for_agents(agents: usize) -> Self {
        Self {
            tau_act: 0.05,
            lambda_f: 0.1,
            lambda_g: 0.05,
            delta_f: 0.3,
            delta_g: 0.2,
            kappa: agents.max(1),
            tau_inh: 2,
            fork_width: agents.max(1),
            max_ticks: 50,
            decay_enabled: true,
            inhibition_enabled: true,
            examples_enabled: true,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lambda_f < 0.0 || self.lambda_g < 0.0 {
            return Err(ConfigError::NegativeDecayRate);
        }
        if self.kappa < 1 {
            return Err(ConfigError::KappaTooSmall);
        }
        if self.fork_width < 1 {
            return Err(ConfigError::ForkWidthTooSmall);
        }
        if !(0.0..=1.0).contains(&self.delta_f) || !(0.0..=1.0).contains(&self.delta_g) {
            return Err(ConfigError::BoostOutOfRange);
        }
        // Stability maintenance: reinforcement must outpace decay over the
        // inhibition window, otherwise a just-patched region can immediately
        // re-activate.
        if self.decay_enabled && self.inhibition_enabled {
            let decay_loss = 1.0 - (-self.lambda_f * self.tau_inh as f64).exp();
            if self.delta_f <= decay_loss {
                return Err(ConfigError::UnstableDecay {
                    delta_f: self.delta_f,
                    required: decay_loss,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("decay rates must be non-negative")]
    NegativeDecayRate,
    #[error("kappa must be at least 1")]
    KappaTooSmall,
    #[error("fork width must be at least 1")]
    ForkWidthTooSmall,
    #[error("reinforcement boosts must lie in [0, 1]")]
    BoostOutOfRange,
    #[error("delta_f = {delta_f} does not exceed decay loss {required} over the inhibition window")]
    UnstableDecay { delta_f: f64, required: f64 },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_satisfy_stability_constraint() {
        let cfg = EngineConfig::for_agents(2);
        assert!(cfg.validate().is_ok());
        // delta_f = 0.3 > 1 - exp(-0.1 * 2) ~= 0.181
        assert!(cfg.delta_f > 1.0 - (-cfg.lambda_f * cfg.tau_inh as f64).exp());
    }

    #[test]
    fn rejects_boost_below_decay_loss() {
        let cfg = EngineConfig {
            delta_f: 0.1,
            ..EngineConfig::for_agents(1)
        };
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::UnstableDecay { .. })
        ));
    }

    #[test]
    fn rejects_zero_kappa() {
        let cfg = EngineConfig {
            kappa: 0,
            ..EngineConfig::for_agents(1)
        };
        assert_eq!(cfg.validate(), Err(ConfigError::KappaTooSmall));
    }
}
