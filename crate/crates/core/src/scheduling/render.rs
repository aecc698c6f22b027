use std::fmt::Write;

use super::domain::BlockView;
use super::problem::slot_time;

/// Render one block as prompt context: the block's time range, the rooms,
/// current assignments, and pool meetings that could fit here.
pub fn render_block_context(view: &BlockView) -> String {
    let mut out = String::new();
    out.push_str("Meeting Room Schedule Optimization.\n");
    out.push_str("Goal: Schedule meetings to minimize gaps and avoid conflicts.\n\n");
    let _ = writeln!(out, "Time Block: {}\n", view.label());

    out.push_str("Rooms:\n");
    for room in &view.rooms {
        let _ = writeln!(out, "  {}: capacity {}", room.name, room.capacity);
    }

    out.push_str("\nCurrent assignments:\n");
    if view.entries.is_empty() {
        out.push_str("  (none)\n");
    } else {
        let base = view.base_slot();
        for entry in &view.entries {
            let start = base + entry.offset as usize;
            let _ = writeln!(
                out,
                "  Meeting {}: {}, {}-{} ({} attendees)",
                entry.meeting,
                view.rooms
                    .get(entry.room)
                    .map(|r| r.name.as_str())
                    .unwrap_or("unknown room"),
                slot_time(start),
                slot_time(start + entry.duration as usize),
                entry.attendees.len()
            );
        }
    }

    out.push_str("\nUnscheduled meetings that could fit in this block:\n");
    if view.fitting_unscheduled.is_empty() {
        out.push_str("  (none)\n");
    } else {
        for meeting in &view.fitting_unscheduled {
            let _ = writeln!(
                out,
                "  Meeting {}: {}min, {} attendees",
                meeting.id,
                meeting.duration as usize * 30,
                meeting.attendees.len()
            );
        }
    }

    out.push_str("\nConstraints:\n");
    out.push_str("- No attendee can be in multiple meetings at the same time\n");
    out.push_str("- Room capacity must fit attendees\n\n");
    out.push_str("Output the schedule for this time block.");
    out
}
