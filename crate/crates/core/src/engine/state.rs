use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One region of the shared artifact: opaque content plus the auxiliary
/// state maintained by the tick loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Region<C> {
    pub id: usize,
    pub content: C,
    /// In [0, 1]; decays each tick, boosted on applied patches.
    pub fitness: f64,
    /// In [0, 1]; maintained like fitness but unused in any decision rule.
    pub confidence: f64,
    /// Tick number until which the region refuses new patches.
    pub inhibited_until: u64,
}

/// The shared artifact: a fixed set of regions, domain-global shared state
/// (visible to validation only), and the tick counter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactState<C, S> {
    pub regions: Vec<Region<C>>,
    pub shared: S,
    pub tick: u64,
}

impl<C, S> ArtifactState<C, S> {
    pub fn new(contents: Vec<C>, shared: S) -> Self {
        let regions = contents
            .into_iter()
            .enumerate()
            .map(|(id, content)| Region {
                id,
                content,
                fitness: 0.5,
                confidence: 0.5,
                inhibited_until: 0,
            })
            .collect();
        Self {
            regions,
            shared,
            tick: 0,
        }
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }
}

/// Auxiliary view of a region handed to actors alongside the content view.
#[derive(Debug, Clone, Copy)]
pub struct RegionAux {
    pub region_id: usize,
    pub fitness: f64,
    pub confidence: f64,
}

/// A typed rejection from the domain's edit application.
#[derive(Debug, Clone, Error, PartialEq, Eq, Serialize, Deserialize)]
#[error("edit rejected: {code} ({detail})")]
pub struct EditRejection {
    /// Short machine-readable reason, e.g. "capacity".
    pub code: String,
    pub detail: String,
}

impl EditRejection {
    pub fn new(code: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            detail: detail.into(),
        }
    }
}

/// Everything the engine needs to know about the artifact's content.
///
/// The engine never inspects content directly: pressure, edit semantics,
/// validity rules, and the solved predicate all come through this trait.
pub trait Domain {
    type Content: Clone + Send + Sync;
    type Shared: Clone + Send + Sync;
    type Edit: Clone + Send + Sync;
    /// What an actor is allowed to observe about one region.
    type View;

    /// Pressure of a single region, a function of its content only.
    fn region_pressure(&self, content: &Self::Content) -> f64;

    /// Pressure contribution of the shared state (added to the global total
    /// only, never to any region).
    fn shared_pressure(&self, shared: &Self::Shared) -> f64;

    /// Local observation for one region, handed to actors.
    fn view(&self, state: &ArtifactState<Self::Content, Self::Shared>, region: usize)
        -> Self::View;

    /// Apply an edit, preserving domain invariants or returning a typed
    /// rejection. Must never panic on hostile edits.
    fn apply_edit(
        &self,
        state: &mut ArtifactState<Self::Content, Self::Shared>,
        edit: &Self::Edit,
    ) -> Result<(), EditRejection>;

    fn is_solved(&self, state: &ArtifactState<Self::Content, Self::Shared>) -> bool;

    /// Resource keys claimed by an edit, used for cross-region conflict
    /// detection during selection.
    fn edit_resources(&self, edit: &Self::Edit) -> Vec<u64>;

    /// One-line human-readable description of an edit, used in reports and
    /// pheromone summaries.
    fn describe_edit(&self, edit: &Self::Edit) -> String;

    /// Positively-phrased guidance derived from a rejected edit, surfaced to
    /// actors in later prompts. Default: no guidance.
    fn edit_hint(&self, _edit: &Self::Edit, _reason: &str) -> Option<String> {
        None
    }
}
