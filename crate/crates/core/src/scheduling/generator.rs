use std::collections::{BTreeMap, HashSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::problem::{
    Difficulty, Meeting, MeetingId, PersonId, Placement, Problem, Room, BLOCKS_PER_DAY,
    BLOCK_SLOTS, DAYS, SCHEMA_VERSION, SLOTS_PER_DAY,
};

struct Params {
    rooms: usize,
    meetings: usize,
    /// Percent of meetings fixed on the grid at trial start.
    pre_scheduled_pct: usize,
    people: usize,
}

impl Params {
    fn for_difficulty(difficulty: Difficulty) -> Self {
        match difficulty {
            Difficulty::Easy => Params {
                rooms: 3,
                meetings: 20,
                pre_scheduled_pct: 70,
                people: 12,
            },
            Difficulty::Medium => Params {
                rooms: 5,
                meetings: 40,
                pre_scheduled_pct: 50,
                people: 20,
            },
            Difficulty::Hard => Params {
                rooms: 5,
                meetings: 60,
                pre_scheduled_pct: 30,
                people: 24,
            },
        }
    }
}

const BUILD_ATTEMPTS: usize = 50;

/// Generate a scheduling instance. The seed is `trial * 1000 + agents`, so
/// every strategy run on the same cell sees an identical problem.
///
/// A complete conflict-free schedule is constructed first and a fraction of
/// it is then unscheduled, which guarantees the instance is solvable.
pub fn generate_problem(trial: u64, agent_count: u64, difficulty: Difficulty) -> Problem {
    let seed = trial * 1000 + agent_count;
    let params = Params::for_difficulty(difficulty);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let rooms: Vec<Room> = (0..params.rooms)
        .map(|i| Room {
            name: format!("Room {}", (b'A' + i as u8) as char),
            capacity: rng.gen_range(4..=12),
        })
        .collect();
    let max_attendees = (rooms.iter().map(|r| r.capacity).max().unwrap() as usize).min(5);

    let meetings: Vec<Meeting> = (1..=params.meetings)
        .map(|id| {
            let duration = rng.gen_range(1..=BLOCK_SLOTS as u8);
            let count = rng.gen_range(2..=max_attendees);
            let attendees: Vec<PersonId> = rand::seq::index::sample(&mut rng, params.people, count)
                .into_iter()
                .map(|p| p as PersonId)
                .collect();
            Meeting {
                id: id as MeetingId,
                duration,
                attendees,
            }
        })
        .collect();

    let full = (0..BUILD_ATTEMPTS)
        .find_map(|_| try_build_schedule(&mut rng, &rooms, &meetings))
        .unwrap_or_else(|| {
            panic!(
                "failed to build a conflict-free schedule for seed {seed} \
                 ({difficulty}) in {BUILD_ATTEMPTS} attempts"
            )
        });

    let pool_size = params.meetings - params.meetings * params.pre_scheduled_pct / 100;
    let pool: HashSet<usize> = rand::seq::index::sample(&mut rng, params.meetings, pool_size)
        .into_iter()
        .collect();

    let pre_scheduled: BTreeMap<MeetingId, Placement> = meetings
        .iter()
        .enumerate()
        .filter(|(i, _)| !pool.contains(i))
        .map(|(_, m)| (m.id, full[&m.id]))
        .collect();

    Problem {
        schema: SCHEMA_VERSION.to_string(),
        seed,
        difficulty,
        rooms,
        meetings,
        pre_scheduled,
    }
}

/// One attempt at a complete conflict-free schedule: largest meetings
/// first in a randomized tie order, each placed uniformly among its
/// conflict-free positions.
#[allow(clippy::needless_range_loop)]
fn try_build_schedule(
    rng: &mut ChaCha8Rng,
    rooms: &[Room],
    meetings: &[Meeting],
) -> Option<BTreeMap<MeetingId, Placement>> {
    let mut order: Vec<usize> = (0..meetings.len()).collect();
    order.shuffle(rng);
    order.sort_by_key(|&i| std::cmp::Reverse(meetings[i].attendees.len()));

    let mut room_busy = vec![[false; DAYS * SLOTS_PER_DAY]; rooms.len()];
    let mut person_busy: HashSet<(PersonId, usize)> = HashSet::new();
    let mut placed = BTreeMap::new();

    for &i in &order {
        let meeting = &meetings[i];
        let duration = meeting.duration as usize;
        let mut candidates = Vec::new();
        for day in 0..DAYS {
            for block in 0..BLOCKS_PER_DAY {
                for offset in 0..=(BLOCK_SLOTS - duration) {
                    let start = day * SLOTS_PER_DAY + block * BLOCK_SLOTS + offset;
                    let slots = start..start + duration;
                    if meeting
                        .attendees
                        .iter()
                        .any(|&p| slots.clone().any(|s| person_busy.contains(&(p, s))))
                    {
                        continue;
                    }
                    for (room_id, room) in rooms.iter().enumerate() {
                        if (room.capacity as usize) < meeting.attendees.len() {
                            continue;
                        }
                        if slots.clone().all(|s| !room_busy[room_id][s]) {
                            candidates.push((day, block * BLOCK_SLOTS + offset, room_id));
                        }
                    }
                }
            }
        }
        if candidates.is_empty() {
            return None;
        }
        let (day, start_slot, room) = candidates[rng.gen_range(0..candidates.len())];
        let abs = day * SLOTS_PER_DAY + start_slot;
        for s in abs..abs + duration {
            room_busy[room][s] = true;
            for &p in &meeting.attendees {
                person_busy.insert((p, s));
            }
        }
        placed.insert(
            meeting.id,
            Placement {
                room,
                day,
                start_slot,
            },
        );
    }
    Some(placed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduling::{initial_state, sense_block};
    use std::sync::Arc;

    #[test]
    fn deterministic_in_the_seed() {
        let a = generate_problem(5, 2, Difficulty::Easy);
        let b = generate_problem(5, 2, Difficulty::Easy);
        assert_eq!(a.seed, 5002);
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn difficulty_parameters() {
        let easy = generate_problem(1, 1, Difficulty::Easy);
        assert_eq!(easy.rooms.len(), 3);
        assert_eq!(easy.meetings.len(), 20);
        assert_eq!(easy.pre_scheduled.len(), 14);

        let medium = generate_problem(1, 1, Difficulty::Medium);
        assert_eq!(medium.rooms.len(), 5);
        assert_eq!(medium.meetings.len(), 40);
        assert_eq!(medium.pre_scheduled.len(), 20);

        let hard = generate_problem(1, 1, Difficulty::Hard);
        assert_eq!(hard.rooms.len(), 5);
        assert_eq!(hard.meetings.len(), 60);
        assert_eq!(hard.pre_scheduled.len(), 18);
    }

    #[test]
    fn generated_instances_are_well_formed() {
        for trial in 0..5 {
            let p = generate_problem(trial, 2, Difficulty::Medium);
            for room in &p.rooms {
                assert!((4..=12).contains(&room.capacity));
            }
            for m in &p.meetings {
                assert!((1..=4).contains(&m.duration));
                assert!((2..=5).contains(&m.attendees.len()));
                let distinct: HashSet<_> = m.attendees.iter().collect();
                assert_eq!(distinct.len(), m.attendees.len());
                assert!(m.attendees.iter().all(|&a| (a as usize) < 20));
            }
            let state = initial_state(Arc::new(p.clone()));
            for region in &state.regions {
                let signals = sense_block(&region.content, p.rooms.len());
                assert_eq!(signals.overlap_count, 0, "seed {}", p.seed);
            }
            // Pre-scheduled meetings respect capacity and block boundaries.
            for (id, placement) in &p.pre_scheduled {
                let m = p.meeting(*id).unwrap();
                assert!(p.rooms[placement.room].capacity as usize >= m.attendees.len());
                assert!(
                    placement.start_slot % BLOCK_SLOTS + m.duration as usize <= BLOCK_SLOTS,
                    "meeting {id} crosses a block boundary"
                );
            }
        }
    }
}
