use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub type MeetingId = u32;
pub type PersonId = u16;

pub const DAYS: usize = 5;
/// 30-minute slots from 8:00 to 16:00.
pub const SLOTS_PER_DAY: usize = 16;
pub const BLOCK_SLOTS: usize = 4;
pub const BLOCKS_PER_DAY: usize = SLOTS_PER_DAY / BLOCK_SLOTS;
pub const BLOCKS: usize = DAYS * BLOCKS_PER_DAY;

pub const DAY_NAMES: [&str; DAYS] = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"];

/// Block index for a (day, slot-within-day) position.
pub fn block_of(day: usize, start_slot: usize) -> usize {
    day * BLOCKS_PER_DAY + start_slot / BLOCK_SLOTS
}

/// Clock time for a slot index within a day, e.g. slot 4 is "10:00".
pub fn slot_time(slot: usize) -> String {
    let minutes = 8 * 60 + slot * 30;
    format!("{}:{:02}", minutes / 60, minutes % 60)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub fn name(&self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl std::str::FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty: {other}")),
        }
    }
}

impl std::fmt::Display for Difficulty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub name: String,
    pub capacity: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meeting {
    pub id: MeetingId,
    /// Duration in 30-minute slots, 1 to 4.
    pub duration: u8,
    pub attendees: Vec<PersonId>,
}

/// A concrete position for one meeting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub room: usize,
    pub day: usize,
    /// Slot within the day, 0 to 15.
    pub start_slot: usize,
}

/// A generated scheduling instance. Serializes to a versioned JSON schema;
/// generation is deterministic in the seed, so equal seeds give
/// byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub schema: String,
    pub seed: u64,
    pub difficulty: Difficulty,
    pub rooms: Vec<Room>,
    pub meetings: Vec<Meeting>,
    /// Meetings fixed on the grid at trial start; the rest form the
    /// unscheduled pool.
    pub pre_scheduled: BTreeMap<MeetingId, Placement>,
}

impl Problem {
    pub fn meeting(&self, id: MeetingId) -> Option<&Meeting> {
        self.meetings.iter().find(|m| m.id == id)
    }

    pub fn max_capacity(&self) -> u8 {
        self.rooms.iter().map(|r| r.capacity).max().unwrap_or(0)
    }
}

/// Serializable snapshot of the full grid: every currently placed meeting
/// plus the unscheduled pool. Keys are ordered, so equal schedules give
/// byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSnapshot {
    pub schema: String,
    pub placed: BTreeMap<MeetingId, Placement>,
    pub unscheduled: Vec<MeetingId>,
}

pub const SCHEMA_VERSION: &str = "v1";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_layout_covers_the_week() {
        assert_eq!(BLOCKS, 20);
        assert_eq!(block_of(0, 0), 0);
        assert_eq!(block_of(0, 3), 0);
        assert_eq!(block_of(0, 4), 1);
        assert_eq!(block_of(1, 0), 4);
        assert_eq!(block_of(4, 15), 19);
    }

    #[test]
    fn slot_times() {
        assert_eq!(slot_time(0), "8:00");
        assert_eq!(slot_time(1), "8:30");
        assert_eq!(slot_time(4), "10:00");
        assert_eq!(slot_time(15), "15:30");
        assert_eq!(slot_time(16), "16:00");
    }
}
