use serde::{Deserialize, Serialize};

use super::state::{Domain, RegionAux};

/// Prompt/completion token counts for one or more inference calls.
/// Zero for scripted actors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt: u64,
    pub completion: u64,
}

impl TokenUsage {
    pub fn add(&mut self, other: TokenUsage) {
        self.prompt += other.prompt;
        self.completion += other.completion;
    }

    pub fn total(&self) -> u64 {
        self.prompt + self.completion
    }
}

/// Where a patch came from: which actor, under which sampling band and
/// model tier, and its index among the tick's proposals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub actor: usize,
    pub band: Option<String>,
    pub model: Option<String>,
    pub proposal_index: usize,
}

/// A proposed assignment change targeting one region.
#[derive(Debug, Clone)]
pub struct Patch<E> {
    pub region_id: usize,
    pub edit: E,
    /// The actor's estimate of the pressure change (negative = improvement).
    pub predicted_delta: f64,
    pub provenance: Provenance,
    /// Domain resource keys touched by the edit; two applied patches must
    /// never share one.
    pub claimed_resources: Vec<u64>,
}

/// Outcome of validating one patch on an independent fork.
#[derive(Debug, Clone)]
pub struct ValidatedPatch<E> {
    pub patch: Patch<E>,
    /// Measured global pressure change on the fork (negative = improvement).
    pub actual_delta: f64,
    /// Domain rules passed and the patch reduces pressure.
    pub valid: bool,
    /// Reason code when invalid: a domain rejection code or
    /// "no_improvement".
    pub reject_reason: Option<String>,
}

/// What one actor returns for one activated region.
#[derive(Debug, Clone)]
pub struct ActorProposal<E> {
    pub edit: E,
    pub predicted_delta: f64,
    pub band: Option<String>,
    pub model: Option<String>,
    pub usage: TokenUsage,
}

/// An actor invocation that produced no usable proposal (parse error,
/// transport error, timeout). Recorded, never raised.
#[derive(Debug, Clone)]
pub struct ActorFailure {
    pub reason: String,
    pub usage: TokenUsage,
}

/// A patch proposer. Implementations observe only the local view and
/// auxiliary state of the region they are invoked for.
pub trait Actor<D: Domain> {
    /// Propose an edit for one activated region, or `Ok(None)` when no
    /// improving move is available.
    fn propose(
        &mut self,
        view: &D::View,
        aux: &RegionAux,
    ) -> Result<Option<ActorProposal<D::Edit>>, ActorFailure>;
}

/// Record of a patch applied during one tick.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppliedPatch {
    pub region_id: usize,
    pub actual_delta: f64,
    pub summary: String,
    pub provenance: Provenance,
}

/// Record of a proposal dropped during one tick, either because the actor
/// failed or because validation rejected the patch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchRejection {
    pub region_id: usize,
    pub reason: String,
    pub summary: Option<String>,
    pub provenance: Option<Provenance>,
    /// Domain-supplied guidance for avoiding this rejection next time.
    pub hint: Option<String>,
}
