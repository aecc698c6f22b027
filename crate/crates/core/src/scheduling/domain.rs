use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{ArtifactState, Domain, EditRejection};

use super::problem::{
    block_of, slot_time, GridSnapshot, Meeting, MeetingId, Placement, Problem, Room, BLOCKS,
    BLOCKS_PER_DAY, BLOCK_SLOTS, DAY_NAMES, SCHEMA_VERSION,
};
use super::render::render_block_context;
use super::sensors::{block_pressure, sense_block, PressureWeights};

/// One meeting placed inside a block. Attendees are copied in so sensing
/// needs nothing outside the block content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub meeting: MeetingId,
    pub room: usize,
    /// Slot offset within the block, 0 to 3.
    pub offset: u8,
    pub duration: u8,
    pub attendees: Vec<super::problem::PersonId>,
}

/// Shared artifact state outside any block: the immutable problem and the
/// pool of unscheduled meetings.
#[derive(Debug, Clone)]
pub struct SchedShared {
    pub problem: Arc<Problem>,
    pub unscheduled: BTreeSet<MeetingId>,
}

pub type SchedulingState = ArtifactState<Vec<BlockEntry>, SchedShared>;

/// An edit proposed against one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Edit {
    /// Take a meeting from the unscheduled pool and place it.
    Schedule {
        meeting: MeetingId,
        room: usize,
        day: usize,
        start_slot: usize,
    },
    /// Relocate an already placed meeting.
    Move {
        meeting: MeetingId,
        room: usize,
        day: usize,
        start_slot: usize,
    },
    /// Exchange the positions of two placed meetings.
    Swap { a: MeetingId, b: MeetingId },
}

impl Edit {
    pub fn meeting_ids(&self) -> Vec<MeetingId> {
        match self {
            Edit::Schedule { meeting, .. } | Edit::Move { meeting, .. } => vec![*meeting],
            Edit::Swap { a, b } => vec![*a, *b],
        }
    }
}

/// The block a placed meeting currently sits in, with its position.
pub fn find_assignment(state: &SchedulingState, meeting: MeetingId) -> Option<(usize, usize, u8)> {
    for region in &state.regions {
        for entry in &region.content {
            if entry.meeting == meeting {
                return Some((region.id, entry.room, entry.offset));
            }
        }
    }
    None
}

/// Build the starting artifact from a problem: pre-scheduled meetings on
/// the grid, everything else in the pool.
pub fn initial_state(problem: Arc<Problem>) -> SchedulingState {
    let mut blocks: Vec<Vec<BlockEntry>> = vec![Vec::new(); BLOCKS];
    let mut unscheduled: BTreeSet<MeetingId> = problem.meetings.iter().map(|m| m.id).collect();

    for (&id, placement) in &problem.pre_scheduled {
        let meeting = problem
            .meeting(id)
            .expect("pre-scheduled meeting missing from problem");
        let block = block_of(placement.day, placement.start_slot);
        blocks[block].push(BlockEntry {
            meeting: id,
            room: placement.room,
            offset: (placement.start_slot % BLOCK_SLOTS) as u8,
            duration: meeting.duration,
            attendees: meeting.attendees.clone(),
        });
        unscheduled.remove(&id);
    }
    for block in &mut blocks {
        block.sort_by_key(|e| e.meeting);
    }

    ArtifactState::new(
        blocks,
        SchedShared {
            problem,
            unscheduled,
        },
    )
}

/// Everything an actor may observe about one block.
#[derive(Debug, Clone)]
pub struct BlockView {
    pub region_id: usize,
    pub day: usize,
    pub block_in_day: usize,
    pub rooms: Vec<Room>,
    pub entries: Vec<BlockEntry>,
    /// Pool meetings with at least one capacity-respecting free placement
    /// in this block, in id order.
    pub fitting_unscheduled: Vec<Meeting>,
}

impl BlockView {
    /// Slot within the day where this block starts.
    pub fn base_slot(&self) -> usize {
        self.block_in_day * BLOCK_SLOTS
    }

    /// "Monday 8:00-10:00" style label.
    pub fn label(&self) -> String {
        format!(
            "{} {}-{}",
            DAY_NAMES[self.day],
            slot_time(self.base_slot()),
            slot_time(self.base_slot() + BLOCK_SLOTS)
        )
    }

    /// All (room, offset) positions where the meeting fits: capacity holds,
    /// the meeting stays inside the block, and every cell is free. Attendee
    /// conflicts are not checked here.
    pub fn feasible_placements(&self, meeting: &Meeting) -> Vec<(usize, u8)> {
        let mut placements = Vec::new();
        for (room_id, room) in self.rooms.iter().enumerate() {
            if (room.capacity as usize) < meeting.attendees.len() {
                continue;
            }
            for offset in 0..=(BLOCK_SLOTS - meeting.duration as usize) {
                if cells_free(&self.entries, room_id, offset as u8, meeting.duration, &[]) {
                    placements.push((room_id, offset as u8));
                }
            }
        }
        placements
    }

    /// Like `feasible_placements`, but for a meeting already in the block:
    /// its own cells count as free.
    pub fn placements_excluding(&self, meeting: &Meeting) -> Vec<(usize, u8)> {
        let exclude = [meeting.id];
        let mut placements = Vec::new();
        for (room_id, room) in self.rooms.iter().enumerate() {
            if (room.capacity as usize) < meeting.attendees.len() {
                continue;
            }
            for offset in 0..=(BLOCK_SLOTS - meeting.duration as usize) {
                if cells_free(
                    &self.entries,
                    room_id,
                    offset as u8,
                    meeting.duration,
                    &exclude,
                ) {
                    placements.push((room_id, offset as u8));
                }
            }
        }
        placements
    }

    /// Whether placing the meeting at (room, offset) double-books any of
    /// its attendees within this block. The meeting itself is ignored if
    /// already present.
    pub fn placement_conflicts(&self, meeting: &Meeting, offset: u8) -> bool {
        let slots = offset..offset + meeting.duration;
        self.entries.iter().any(|entry| {
            entry.meeting != meeting.id
                && overlaps(
                    entry.offset..entry.offset + entry.duration,
                    slots.clone(),
                )
                && entry
                    .attendees
                    .iter()
                    .any(|p| meeting.attendees.contains(p))
        })
    }
}

fn overlaps(a: std::ops::Range<u8>, b: std::ops::Range<u8>) -> bool {
    a.start < b.end && b.start < a.end
}

fn cells_free(
    entries: &[BlockEntry],
    room: usize,
    offset: u8,
    duration: u8,
    exclude: &[MeetingId],
) -> bool {
    entries.iter().all(|entry| {
        entry.room != room
            || exclude.contains(&entry.meeting)
            || !overlaps(
                entry.offset..entry.offset + entry.duration,
                offset..offset + duration,
            )
    })
}

/// Scheduling instantiation of the engine's domain contract.
pub struct SchedulingDomain {
    pub problem: Arc<Problem>,
    pub weights: PressureWeights,
}

impl SchedulingDomain {
    pub fn new(problem: Arc<Problem>) -> Self {
        Self {
            problem,
            weights: PressureWeights::default(),
        }
    }

    pub fn total_pressure(&self, state: &SchedulingState) -> f64 {
        crate::engine::global_pressure(self, state)
    }

    pub fn snapshot(&self, state: &SchedulingState) -> GridSnapshot {
        let mut placed = std::collections::BTreeMap::new();
        for region in &state.regions {
            let day = region.id / BLOCKS_PER_DAY;
            let base = (region.id % BLOCKS_PER_DAY) * BLOCK_SLOTS;
            for entry in &region.content {
                placed.insert(
                    entry.meeting,
                    Placement {
                        room: entry.room,
                        day,
                        start_slot: base + entry.offset as usize,
                    },
                );
            }
        }
        GridSnapshot {
            schema: SCHEMA_VERSION.to_string(),
            placed,
            unscheduled: state.shared.unscheduled.iter().copied().collect(),
        }
    }

    fn placement_target(
        &self,
        meeting: &Meeting,
        room: usize,
        day: usize,
        start_slot: usize,
    ) -> Result<(usize, u8), EditRejection> {
        if room >= self.problem.rooms.len() {
            return Err(EditRejection::new(
                "unknown_room",
                format!("room index {room}"),
            ));
        }
        if day >= super::problem::DAYS || start_slot >= super::problem::SLOTS_PER_DAY {
            return Err(EditRejection::new(
                "slot_out_of_range",
                format!("day {day}, slot {start_slot}"),
            ));
        }
        let offset = (start_slot % BLOCK_SLOTS) as u8;
        if offset as usize + meeting.duration as usize > BLOCK_SLOTS {
            return Err(EditRejection::new(
                "block_boundary",
                format!(
                    "meeting {} ({} slots) cannot start at offset {offset}",
                    meeting.id, meeting.duration
                ),
            ));
        }
        if (self.problem.rooms[room].capacity as usize) < meeting.attendees.len() {
            return Err(EditRejection::new(
                "capacity",
                format!(
                    "{} seats {}, meeting {} has {} attendees",
                    self.problem.rooms[room].name,
                    self.problem.rooms[room].capacity,
                    meeting.id,
                    meeting.attendees.len()
                ),
            ));
        }
        Ok((block_of(day, start_slot), offset))
    }

    fn resolve_meeting(&self, id: MeetingId) -> Result<&Meeting, EditRejection> {
        self.problem
            .meeting(id)
            .ok_or_else(|| EditRejection::new("unknown_meeting", format!("meeting {id}")))
    }
}

impl Domain for SchedulingDomain {
    type Content = Vec<BlockEntry>;
    type Shared = SchedShared;
    type Edit = Edit;
    type View = BlockView;

    fn region_pressure(&self, content: &Self::Content) -> f64 {
        let signals = sense_block(content, self.problem.rooms.len());
        block_pressure(&signals, &self.weights)
    }

    fn shared_pressure(&self, shared: &Self::Shared) -> f64 {
        if shared.problem.meetings.is_empty() {
            return 0.0;
        }
        self.weights.unscheduled * shared.unscheduled.len() as f64
            / shared.problem.meetings.len() as f64
    }

    fn view(&self, state: &SchedulingState, region: usize) -> BlockView {
        let entries = state.regions[region].content.clone();
        let mut view = BlockView {
            region_id: region,
            day: region / BLOCKS_PER_DAY,
            block_in_day: region % BLOCKS_PER_DAY,
            rooms: self.problem.rooms.clone(),
            entries,
            fitting_unscheduled: Vec::new(),
        };
        view.fitting_unscheduled = state
            .shared
            .unscheduled
            .iter()
            .filter_map(|&id| self.problem.meeting(id))
            .filter(|m| !view.feasible_placements(m).is_empty())
            .cloned()
            .collect();
        view
    }

    fn apply_edit(&self, state: &mut SchedulingState, edit: &Edit) -> Result<(), EditRejection> {
        match *edit {
            Edit::Schedule {
                meeting,
                room,
                day,
                start_slot,
            } => {
                let m = self.resolve_meeting(meeting)?;
                if !state.shared.unscheduled.contains(&meeting) {
                    return Err(EditRejection::new(
                        "not_available",
                        format!("meeting {meeting} is not in the unscheduled pool"),
                    ));
                }
                let (block, offset) = self.placement_target(m, room, day, start_slot)?;
                if !cells_free(&state.regions[block].content, room, offset, m.duration, &[]) {
                    return Err(EditRejection::new(
                        "occupied",
                        format!(
                            "{} is busy at {} {}",
                            self.problem.rooms[room].name,
                            DAY_NAMES[day],
                            slot_time(start_slot)
                        ),
                    ));
                }
                let entry = BlockEntry {
                    meeting,
                    room,
                    offset,
                    duration: m.duration,
                    attendees: m.attendees.clone(),
                };
                insert_entry(&mut state.regions[block].content, entry);
                state.shared.unscheduled.remove(&meeting);
                Ok(())
            }
            Edit::Move {
                meeting,
                room,
                day,
                start_slot,
            } => {
                let m = self.resolve_meeting(meeting)?;
                let (old_block, _, _) = find_assignment(state, meeting).ok_or_else(|| {
                    EditRejection::new(
                        "not_available",
                        format!("meeting {meeting} is not on the grid"),
                    )
                })?;
                let (block, offset) = self.placement_target(m, room, day, start_slot)?;
                let exclude = [meeting];
                if !cells_free(
                    &state.regions[block].content,
                    room,
                    offset,
                    m.duration,
                    &exclude,
                ) {
                    return Err(EditRejection::new(
                        "occupied",
                        format!(
                            "{} is busy at {} {}",
                            self.problem.rooms[room].name,
                            DAY_NAMES[day],
                            slot_time(start_slot)
                        ),
                    ));
                }
                state.regions[old_block]
                    .content
                    .retain(|e| e.meeting != meeting);
                let entry = BlockEntry {
                    meeting,
                    room,
                    offset,
                    duration: m.duration,
                    attendees: m.attendees.clone(),
                };
                insert_entry(&mut state.regions[block].content, entry);
                Ok(())
            }
            Edit::Swap { a, b } => {
                if a == b {
                    return Err(EditRejection::new(
                        "not_available",
                        "cannot swap a meeting with itself",
                    ));
                }
                let ma = self.resolve_meeting(a)?.clone();
                let mb = self.resolve_meeting(b)?.clone();
                let (block_a, room_a, offset_a) = find_assignment(state, a).ok_or_else(|| {
                    EditRejection::new("not_available", format!("meeting {a} is not on the grid"))
                })?;
                let (block_b, room_b, offset_b) = find_assignment(state, b).ok_or_else(|| {
                    EditRejection::new("not_available", format!("meeting {b} is not on the grid"))
                })?;

                for (m, room, offset) in [(&ma, room_b, offset_b), (&mb, room_a, offset_a)] {
                    if offset as usize + m.duration as usize > BLOCK_SLOTS {
                        return Err(EditRejection::new(
                            "block_boundary",
                            format!("meeting {} does not fit at offset {offset}", m.id),
                        ));
                    }
                    if (self.problem.rooms[room].capacity as usize) < m.attendees.len() {
                        return Err(EditRejection::new(
                            "capacity",
                            format!(
                                "{} cannot seat meeting {}",
                                self.problem.rooms[room].name, m.id
                            ),
                        ));
                    }
                }

                let exclude = [a, b];
                let mut fork = state.clone();
                fork.regions[block_a].content.retain(|e| e.meeting != a);
                fork.regions[block_b].content.retain(|e| e.meeting != b);
                for (block, m, room, offset) in
                    [(block_b, &ma, room_b, offset_b), (block_a, &mb, room_a, offset_a)]
                {
                    if !cells_free(&fork.regions[block].content, room, offset, m.duration, &exclude)
                    {
                        return Err(EditRejection::new(
                            "occupied",
                            format!("meeting {} would land on a busy cell", m.id),
                        ));
                    }
                    insert_entry(
                        &mut fork.regions[block].content,
                        BlockEntry {
                            meeting: m.id,
                            room,
                            offset,
                            duration: m.duration,
                            attendees: m.attendees.clone(),
                        },
                    );
                }
                *state = fork;
                Ok(())
            }
        }
    }

    fn is_solved(&self, state: &SchedulingState) -> bool {
        state.shared.unscheduled.is_empty()
            && state.regions.iter().all(|r| {
                sense_block(&r.content, self.problem.rooms.len()).overlap_count == 0
            })
    }

    fn edit_resources(&self, edit: &Edit) -> Vec<u64> {
        edit.meeting_ids().into_iter().map(u64::from).collect()
    }

    fn describe_edit(&self, edit: &Edit) -> String {
        let place = |room: usize, day: usize, start_slot: usize| {
            format!(
                "{} at {} {}",
                self.problem
                    .rooms
                    .get(room)
                    .map(|r| r.name.as_str())
                    .unwrap_or("unknown room"),
                DAY_NAMES.get(day).copied().unwrap_or("unknown day"),
                slot_time(start_slot)
            )
        };
        match *edit {
            Edit::Schedule {
                meeting,
                room,
                day,
                start_slot,
            } => format!("Schedule meeting {meeting} in {}", place(room, day, start_slot)),
            Edit::Move {
                meeting,
                room,
                day,
                start_slot,
            } => format!("Move meeting {meeting} to {}", place(room, day, start_slot)),
            Edit::Swap { a, b } => format!("Swap meetings {a} and {b}"),
        }
    }

    fn edit_hint(&self, edit: &Edit, reason: &str) -> Option<String> {
        let room = |idx: usize| {
            self.problem
                .rooms
                .get(idx)
                .map(|r| r.name.clone())
                .unwrap_or_else(|| "another room".to_string())
        };
        match (edit, reason) {
            (Edit::Schedule { room: r, .. } | Edit::Move { room: r, .. }, "capacity") => Some(
                format!("TIP: pick a room larger than {} for big meetings", room(*r)),
            ),
            (Edit::Schedule { room: r, .. } | Edit::Move { room: r, .. }, "occupied") => Some(
                format!("TIP: {} fills up fast, try a different slot or room", room(*r)),
            ),
            (_, "block_boundary") => {
                Some("TIP: start long meetings early in the two-hour block".to_string())
            }
            (_, "no_improvement") => {
                Some("TIP: favor placements that close gaps without double-booking".to_string())
            }
            _ => None,
        }
    }
}

fn insert_entry(entries: &mut Vec<BlockEntry>, entry: BlockEntry) {
    let pos = entries
        .iter()
        .position(|e| e.meeting > entry.meeting)
        .unwrap_or(entries.len());
    entries.insert(pos, entry);
}

impl SchedulingDomain {
    /// Prompt context for one block, as handed to inference actors.
    pub fn render_view(&self, view: &BlockView) -> String {
        render_block_context(view)
    }
}
