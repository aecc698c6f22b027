use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::engine::{Actor, ActorProposal, RegionAux, TokenUsage};
use crate::scheduling::{
    BlockView, Edit, Meeting, SchedulingDomain, BLOCK_SLOTS,
};

use super::ActorFailure;

/// Deterministic rule-based proposer: schedule the largest fitting pool
/// meeting into the earliest conflict-free position, otherwise relocate an
/// overlapping meeting within the block.
///
/// `noise` is the probability of instead proposing a uniformly random
/// feasible placement, ignoring attendee conflicts. Noisy proposals stand
/// in for an unreliable model: fork validation filters the bad ones.
pub struct HeuristicActor {
    rng: ChaCha8Rng,
    noise: f64,
}

impl HeuristicActor {
    pub fn new(seed: u64) -> Self {
        Self::with_noise(seed, 0.0)
    }

    pub fn with_noise(seed: u64, noise: f64) -> Self {
        assert!((0.0..=1.0).contains(&noise), "noise must be in [0, 1]");
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise,
        }
    }

    fn random_proposal(&mut self, view: &BlockView) -> Option<Edit> {
        let mut options: Vec<(&Meeting, usize, u8)> = Vec::new();
        for meeting in &view.fitting_unscheduled {
            for (room, offset) in view.feasible_placements(meeting) {
                options.push((meeting, room, offset));
            }
        }
        if options.is_empty() {
            return None;
        }
        let (meeting, room, offset) = options[self.rng.gen_range(0..options.len())];
        Some(Edit::Schedule {
            meeting: meeting.id,
            room,
            day: view.day,
            start_slot: view.base_slot() + offset as usize,
        })
    }

    fn deterministic_proposal(&self, view: &BlockView) -> Option<Edit> {
        // Largest meeting first, lowest id on ties; earliest slot, then
        // lowest room, skipping placements that double-book an attendee.
        let mut pool: Vec<&Meeting> = view.fitting_unscheduled.iter().collect();
        pool.sort_by_key(|m| (std::cmp::Reverse(m.attendees.len()), m.id));
        for meeting in pool {
            let mut placements = view.feasible_placements(meeting);
            placements.sort_by_key(|&(room, offset)| (offset, room));
            for (room, offset) in placements {
                if !view.placement_conflicts(meeting, offset) {
                    return Some(Edit::Schedule {
                        meeting: meeting.id,
                        room,
                        day: view.day,
                        start_slot: view.base_slot() + offset as usize,
                    });
                }
            }
        }
        self.overlap_fix(view)
    }

    /// Relocate the lowest-id double-booked meeting to a conflict-free
    /// position inside the same block.
    fn overlap_fix(&self, view: &BlockView) -> Option<Edit> {
        let mut conflicting: Vec<Meeting> = view
            .entries
            .iter()
            .map(|e| Meeting {
                id: e.meeting,
                duration: e.duration,
                attendees: e.attendees.clone(),
            })
            .filter(|m| {
                let offset = view
                    .entries
                    .iter()
                    .find(|e| e.meeting == m.id)
                    .map(|e| e.offset)
                    .unwrap_or(0);
                view.placement_conflicts(m, offset)
            })
            .collect();
        conflicting.sort_by_key(|m| m.id);

        for meeting in &conflicting {
            let mut placements = view.placements_excluding(meeting);
            placements.sort_by_key(|&(room, offset)| (offset, room));
            for (room, offset) in placements {
                if !view.placement_conflicts(meeting, offset) {
                    return Some(Edit::Move {
                        meeting: meeting.id,
                        room,
                        day: view.day,
                        start_slot: view.base_slot() + offset as usize,
                    });
                }
            }
        }
        None
    }

    fn predicted_delta(view: &BlockView, edit: &Edit) -> f64 {
        // Rough estimate: each newly filled cell closes that much gap
        // ratio. Validation measures the real delta either way.
        let cells = (view.rooms.len() * BLOCK_SLOTS) as f64;
        match edit {
            Edit::Schedule { meeting, .. } => {
                let duration = view
                    .fitting_unscheduled
                    .iter()
                    .find(|m| m.id == *meeting)
                    .map(|m| m.duration)
                    .unwrap_or(1);
                -(duration as f64) / cells
            }
            Edit::Move { .. } | Edit::Swap { .. } => -1.0 / cells,
        }
    }
}

impl Actor<SchedulingDomain> for HeuristicActor {
    fn propose(
        &mut self,
        view: &BlockView,
        _aux: &RegionAux,
    ) -> Result<Option<ActorProposal<Edit>>, ActorFailure> {
        let edit = if self.noise > 0.0 && self.rng.gen_bool(self.noise) {
            self.random_proposal(view)
                .or_else(|| self.deterministic_proposal(view))
        } else {
            self.deterministic_proposal(view)
        };
        Ok(edit.map(|edit| {
            let predicted_delta = Self::predicted_delta(view, &edit);
            ActorProposal {
                edit,
                predicted_delta,
                band: None,
                model: None,
                usage: TokenUsage::default(),
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Domain;
    use crate::scheduling::{initial_state, Difficulty, Problem, Room};
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn aux() -> RegionAux {
        RegionAux {
            region_id: 0,
            fitness: 0.5,
            confidence: 0.5,
        }
    }

    fn domain_with(meetings: Vec<Meeting>) -> SchedulingDomain {
        SchedulingDomain::new(Arc::new(Problem {
            schema: "v1".to_string(),
            seed: 0,
            difficulty: Difficulty::Easy,
            rooms: vec![
                Room {
                    name: "Room A".to_string(),
                    capacity: 10,
                },
                Room {
                    name: "Room B".to_string(),
                    capacity: 6,
                },
            ],
            meetings,
            pre_scheduled: BTreeMap::new(),
        }))
    }

    #[test]
    fn schedules_largest_meeting_earliest() {
        let domain = domain_with(vec![
            Meeting {
                id: 1,
                duration: 2,
                attendees: vec![0, 1],
            },
            Meeting {
                id: 2,
                duration: 2,
                attendees: vec![2, 3, 4],
            },
        ]);
        let state = initial_state(domain.problem.clone());
        let view = domain.view(&state, 0);
        let mut actor = HeuristicActor::new(1);
        let proposal = actor.propose(&view, &aux()).unwrap().unwrap();
        assert_eq!(
            proposal.edit,
            Edit::Schedule {
                meeting: 2,
                room: 0,
                day: 0,
                start_slot: 0,
            }
        );
        assert!(proposal.predicted_delta < 0.0);
    }

    #[test]
    fn relocates_a_double_booked_meeting() {
        let domain = domain_with(vec![
            Meeting {
                id: 1,
                duration: 2,
                attendees: vec![7, 8],
            },
            Meeting {
                id: 2,
                duration: 2,
                attendees: vec![7, 9],
            },
        ]);
        let mut state = initial_state(domain.problem.clone());
        for (id, room) in [(1u32, 0usize), (2, 1)] {
            domain
                .apply_edit(
                    &mut state,
                    &Edit::Schedule {
                        meeting: id,
                        room,
                        day: 0,
                        start_slot: 0,
                    },
                )
                .unwrap();
        }
        let view = domain.view(&state, 0);
        let mut actor = HeuristicActor::new(1);
        let proposal = actor.propose(&view, &aux()).unwrap().unwrap();
        match proposal.edit {
            Edit::Move {
                meeting,
                start_slot,
                ..
            } => {
                assert_eq!(meeting, 1);
                assert!(start_slot >= 2, "still overlapping at slot {start_slot}");
            }
            other => panic!("expected a move, got {other:?}"),
        }
    }

    #[test]
    fn empty_view_yields_no_proposal() {
        let domain = domain_with(vec![]);
        let state = initial_state(domain.problem.clone());
        let view = domain.view(&state, 3);
        let mut actor = HeuristicActor::new(1);
        assert!(actor.propose(&view, &aux()).unwrap().is_none());
    }

    #[test]
    fn noisy_proposals_stay_inside_the_block() {
        let domain = domain_with(vec![
            Meeting {
                id: 1,
                duration: 1,
                attendees: vec![0, 1],
            },
            Meeting {
                id: 2,
                duration: 3,
                attendees: vec![0, 2],
            },
        ]);
        let state = initial_state(domain.problem.clone());
        let view = domain.view(&state, 7);
        let mut actor = HeuristicActor::with_noise(9, 1.0);
        for _ in 0..50 {
            let proposal = actor.propose(&view, &aux()).unwrap().unwrap();
            match proposal.edit {
                Edit::Schedule {
                    day, start_slot, ..
                } => {
                    assert_eq!(day, 1);
                    assert!((12..16).contains(&start_slot));
                }
                other => panic!("unexpected edit {other:?}"),
            }
        }
    }

    #[test]
    fn deterministic_for_equal_seeds() {
        let domain = domain_with(vec![
            Meeting {
                id: 1,
                duration: 2,
                attendees: vec![0, 1],
            },
            Meeting {
                id: 2,
                duration: 2,
                attendees: vec![0, 2],
            },
        ]);
        let state = initial_state(domain.problem.clone());
        let view = domain.view(&state, 0);
        let run = |seed| {
            let mut actor = HeuristicActor::with_noise(seed, 0.7);
            (0..20)
                .map(|_| actor.propose(&view, &aux()).unwrap().unwrap().edit)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));
    }
}
