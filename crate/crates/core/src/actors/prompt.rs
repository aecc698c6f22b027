use thiserror::Error;

use crate::scheduling::{BlockView, Edit, MeetingId, DAY_NAMES};

/// System prompt for every inference call, across all strategies.
pub const SYSTEM_PROMPT: &str = "You optimize meeting room schedules. Given a schedule with gaps or conflicts,\n\
propose ONE change: move, swap, or reschedule a meeting to reduce gaps,\n\
overlaps, and utilization variance. Return ONLY your proposed change\n\
in the format: MOVE meeting_id TO room day start_time";

const PROMPT_HEADER: &str =
    "You are a meeting room scheduler. Output schedules in the exact format requested.";

/// Assemble the user prompt: fixed header, the rendered block context, and
/// up to a few pheromone hints.
pub fn build_prompt(context: &str, hints: &[String]) -> String {
    let mut prompt = format!("{PROMPT_HEADER}\n\n{context}");
    if !hints.is_empty() {
        prompt.push_str("\n\nNotes from earlier attempts:\n");
        for hint in hints {
            prompt.push_str(hint);
            prompt.push('\n');
        }
    }
    prompt
}

/// Render an edit in the directive format models are asked to emit.
/// Swaps have no directive form.
pub fn render_directive(edit: &Edit, view: &BlockView) -> Option<String> {
    use crate::scheduling::slot_time;
    match *edit {
        Edit::Schedule {
            meeting,
            room,
            day,
            start_slot,
        }
        | Edit::Move {
            meeting,
            room,
            day,
            start_slot,
        } => Some(format!(
            "MOVE {meeting} TO {} {} {}",
            view.rooms.get(room).map(|r| r.name.as_str())?,
            DAY_NAMES.get(day)?,
            slot_time(start_slot)
        )),
        Edit::Swap { .. } => None,
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("no MOVE directive in the response")]
    NoDirective,
    #[error("malformed MOVE directive: {0}")]
    Malformed(String),
    #[error("unknown meeting {0}")]
    UnknownMeeting(MeetingId),
    #[error("unknown room {0:?}")]
    UnknownRoom(String),
    #[error("unknown day {0:?}")]
    UnknownDay(String),
    #[error("malformed time {0:?}")]
    MalformedTime(String),
}

/// Extract an edit from a model response. The first line containing a MOVE
/// directive wins; everything else is ignored. A meeting from the block's
/// fitting pool becomes a schedule edit, a placed meeting becomes a move.
pub fn parse_patch(response: &str, view: &BlockView) -> Result<Edit, ParseError> {
    let line = response
        .lines()
        .find(|l| {
            let mut tokens = l.split_whitespace();
            tokens.next().is_some_and(|t| t.eq_ignore_ascii_case("move"))
        })
        .ok_or(ParseError::NoDirective)?;

    let tokens: Vec<&str> = line.split_whitespace().collect();
    // MOVE <id> TO <room...> <day> <time>
    if tokens.len() < 6 || !tokens[2].eq_ignore_ascii_case("to") {
        return Err(ParseError::Malformed(line.to_string()));
    }
    let meeting: MeetingId = tokens[1]
        .parse()
        .map_err(|_| ParseError::Malformed(line.to_string()))?;
    let time_token = tokens[tokens.len() - 1];
    let day_token = tokens[tokens.len() - 2];
    let room_name = tokens[3..tokens.len() - 2].join(" ");

    let room = resolve_room(&room_name, view)?;
    let day = DAY_NAMES
        .iter()
        .position(|d| d.eq_ignore_ascii_case(day_token))
        .ok_or_else(|| ParseError::UnknownDay(day_token.to_string()))?;
    let start_slot = parse_time(time_token)?;

    let in_pool = view.fitting_unscheduled.iter().any(|m| m.id == meeting);
    let placed_here = view.entries.iter().any(|e| e.meeting == meeting);
    if !in_pool && !placed_here {
        return Err(ParseError::UnknownMeeting(meeting));
    }
    if in_pool {
        Ok(Edit::Schedule {
            meeting,
            room,
            day,
            start_slot,
        })
    } else {
        Ok(Edit::Move {
            meeting,
            room,
            day,
            start_slot,
        })
    }
}

fn resolve_room(name: &str, view: &BlockView) -> Result<usize, ParseError> {
    let wanted = normalize(name);
    view.rooms
        .iter()
        .position(|r| {
            let full = normalize(&r.name);
            // Accept "Room A", "RoomA", and a bare "A".
            full == wanted || full == format!("room{wanted}")
        })
        .ok_or_else(|| ParseError::UnknownRoom(name.to_string()))
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_ascii_lowercase()
}

fn parse_time(token: &str) -> Result<usize, ParseError> {
    let err = || ParseError::MalformedTime(token.to_string());
    let (h, m) = token.split_once(':').ok_or_else(err)?;
    let h: usize = h.parse().map_err(|_| err())?;
    let m: usize = m.parse().map_err(|_| err())?;
    if !(8..16).contains(&h) || (m != 0 && m != 30) {
        return Err(err());
    }
    Ok((h - 8) * 2 + m / 30)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduling::{BlockEntry, Meeting, Room};

    fn view() -> BlockView {
        BlockView {
            region_id: 6,
            day: 1,
            block_in_day: 2,
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
            entries: vec![BlockEntry {
                meeting: 3,
                room: 1,
                offset: 0,
                duration: 2,
                attendees: vec![1, 2],
            }],
            fitting_unscheduled: vec![Meeting {
                id: 5,
                duration: 2,
                attendees: vec![3, 4],
            }],
        }
    }

    #[test]
    fn parses_a_schedule_directive() {
        let edit = parse_patch("MOVE 5 TO RoomA Tuesday 10:00", &view()).unwrap();
        assert_eq!(
            edit,
            Edit::Schedule {
                meeting: 5,
                room: 0,
                day: 1,
                start_slot: 4,
            }
        );
    }

    #[test]
    fn placed_meetings_parse_as_moves() {
        let edit = parse_patch("MOVE 3 TO Room B Wednesday 8:30", &view()).unwrap();
        assert_eq!(
            edit,
            Edit::Move {
                meeting: 3,
                room: 1,
                day: 2,
                start_slot: 1,
            }
        );
    }

    #[test]
    fn skips_chatter_around_the_directive() {
        let text = "Sure! Here is my suggestion.\nMOVE 5 TO Room B Friday 15:30\nThanks!";
        let edit = parse_patch(text, &view()).unwrap();
        assert_eq!(
            edit,
            Edit::Schedule {
                meeting: 5,
                room: 1,
                day: 4,
                start_slot: 15,
            }
        );
    }

    #[test]
    fn rejects_bad_responses() {
        let v = view();
        assert_eq!(
            parse_patch("I cannot help with that.", &v),
            Err(ParseError::NoDirective)
        );
        assert_eq!(
            parse_patch("MOVE 99 TO RoomA Monday 9:00", &v),
            Err(ParseError::UnknownMeeting(99))
        );
        assert_eq!(
            parse_patch("MOVE 5 TO RoomZ Monday 9:00", &v),
            Err(ParseError::UnknownRoom("RoomZ".to_string()))
        );
        assert_eq!(
            parse_patch("MOVE 5 TO RoomA Someday 9:00", &v),
            Err(ParseError::UnknownDay("Someday".to_string()))
        );
        assert_eq!(
            parse_patch("MOVE 5 TO RoomA Monday 9:15", &v),
            Err(ParseError::MalformedTime("9:15".to_string()))
        );
        assert_eq!(
            parse_patch("MOVE 5 TO RoomA Monday 17:00", &v),
            Err(ParseError::MalformedTime("17:00".to_string()))
        );
        assert!(matches!(
            parse_patch("MOVE 5 TO", &v),
            Err(ParseError::Malformed(_))
        ));
    }

    #[test]
    fn directives_round_trip_through_the_parser() {
        let v = view();
        let edits = [
            Edit::Schedule {
                meeting: 5,
                room: 0,
                day: 1,
                start_slot: 4,
            },
            Edit::Move {
                meeting: 3,
                room: 1,
                day: 4,
                start_slot: 13,
            },
        ];
        for edit in edits {
            let text = render_directive(&edit, &v).unwrap();
            assert_eq!(parse_patch(&text, &v).unwrap(), edit);
        }
        assert_eq!(render_directive(&Edit::Swap { a: 1, b: 2 }, &v), None);
    }

    #[test]
    fn prompt_includes_context_and_hints() {
        let prompt = build_prompt("CONTEXT", &["TIP: one".to_string(), "TIP: two".to_string()]);
        assert!(prompt.starts_with("You are a meeting room scheduler."));
        assert!(prompt.contains("CONTEXT"));
        assert!(prompt.contains("TIP: one\nTIP: two\n"));

        let bare = build_prompt("CONTEXT", &[]);
        assert!(!bare.contains("Notes from earlier attempts"));
    }
}
