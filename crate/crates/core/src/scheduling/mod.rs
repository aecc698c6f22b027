//! Meeting-room-scheduling instantiation of the pressure-field engine.
//!
//! A schedule spans 5 days of 30-minute slots from 8:00 to 16:00,
//! partitioned into 20 two-hour block regions (4 per day). Meetings must
//! fit entirely inside one block, which keeps per-region pressure exactly
//! separable.

mod domain;
mod generator;
mod problem;
mod render;
mod sensors;

pub use domain::{
    find_assignment, initial_state, BlockEntry, BlockView, Edit, SchedShared, SchedulingDomain,
    SchedulingState,
};
pub use generator::generate_problem;
pub use problem::{
    block_of, slot_time, Difficulty, GridSnapshot, Meeting, MeetingId, PersonId, Placement,
    Problem, Room, BLOCKS, BLOCKS_PER_DAY, BLOCK_SLOTS, DAYS, DAY_NAMES, SCHEMA_VERSION,
    SLOTS_PER_DAY,
};
pub use render::render_block_context;
pub use sensors::{block_pressure, sense_block, PressureWeights, SignalVector};
