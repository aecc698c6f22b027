use crate::engine::{Actor, ActorProposal, RegionAux, TokenUsage};
use crate::scheduling::{BlockView, Edit, SchedulingDomain};

use super::ActorFailure;

/// Actor whose every call fails. Exercises the stall and escalation path
/// without a model server.
pub struct AlwaysFailActor;

impl Actor<SchedulingDomain> for AlwaysFailActor {
    fn propose(
        &mut self,
        _view: &BlockView,
        _aux: &RegionAux,
    ) -> Result<Option<ActorProposal<Edit>>, ActorFailure> {
        Err(ActorFailure {
            reason: "scripted_failure".to_string(),
            usage: TokenUsage::default(),
        })
    }
}
