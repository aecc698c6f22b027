use serde::{Deserialize, Serialize};

use super::domain::BlockEntry;
use super::problem::{PersonId, BLOCK_SLOTS};

/// Local signals sensed from one block's content, nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalVector {
    /// Fraction of room-slot cells in the block that are empty.
    pub gap_ratio: f64,
    /// Attendee double-bookings: for every (person, slot) pair booked k > 1
    /// times, this counts k - 1.
    pub overlap_count: u32,
    /// Population variance of per-room occupied-slot fractions.
    pub util_var: f64,
}

/// Weights for turning signals into pressure. The unscheduled term applies
/// to the global total only, never to a single block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureWeights {
    pub gaps: f64,
    pub overlaps: f64,
    pub util_var: f64,
    pub unscheduled: f64,
}

impl Default for PressureWeights {
    fn default() -> Self {
        Self {
            gaps: 1.0,
            overlaps: 2.0,
            util_var: 0.5,
            unscheduled: 1.5,
        }
    }
}

/// Sense one block. Occupied cells are counted per distinct (room, slot),
/// so a hostile double-occupancy cannot inflate the count.
#[allow(clippy::needless_range_loop)]
pub fn sense_block(entries: &[BlockEntry], room_count: usize) -> SignalVector {
    let mut cells = vec![[false; BLOCK_SLOTS]; room_count];
    let mut bookings: std::collections::HashMap<(PersonId, usize), u32> =
        std::collections::HashMap::new();

    for entry in entries {
        for offset in entry.offset as usize..(entry.offset + entry.duration) as usize {
            if entry.room < room_count && offset < BLOCK_SLOTS {
                cells[entry.room][offset] = true;
            }
            for &person in &entry.attendees {
                *bookings.entry((person, offset)).or_insert(0) += 1;
            }
        }
    }

    let total_cells = room_count * BLOCK_SLOTS;
    let occupied: usize = cells
        .iter()
        .map(|room| room.iter().filter(|&&c| c).count())
        .sum();
    let gap_ratio = if total_cells == 0 {
        0.0
    } else {
        (total_cells - occupied) as f64 / total_cells as f64
    };

    let overlap_count: u32 = bookings.values().map(|&k| k.saturating_sub(1)).sum();

    let fractions: Vec<f64> = cells
        .iter()
        .map(|room| room.iter().filter(|&&c| c).count() as f64 / BLOCK_SLOTS as f64)
        .collect();
    let util_var = population_variance(&fractions);

    SignalVector {
        gap_ratio,
        overlap_count,
        util_var,
    }
}

fn population_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64
}

/// Pressure of one block from its signals.
pub fn block_pressure(signals: &SignalVector, weights: &PressureWeights) -> f64 {
    weights.gaps * signals.gap_ratio
        + weights.overlaps * signals.overlap_count as f64
        + weights.util_var * signals.util_var
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(
        meeting: u32,
        room: usize,
        offset: u8,
        duration: u8,
        attendees: Vec<PersonId>,
    ) -> BlockEntry {
        BlockEntry {
            meeting,
            room,
            offset,
            duration,
            attendees,
        }
    }

    #[test]
    fn block_pressure_weighting() {
        let signals = SignalVector {
            gap_ratio: 0.5,
            overlap_count: 2,
            util_var: 0.1,
        };
        let p = block_pressure(&signals, &PressureWeights::default());
        assert!((p - 4.55).abs() < 1e-12, "got {p}");
    }

    #[test]
    fn empty_block_signals() {
        let s = sense_block(&[], 3);
        assert_eq!(s.gap_ratio, 1.0);
        assert_eq!(s.overlap_count, 0);
        assert_eq!(s.util_var, 0.0);
    }

    #[test]
    fn util_var_of_full_and_empty_room() {
        let s = sense_block(&[entry(1, 0, 0, 4, vec![1, 2])], 2);
        assert!((s.util_var - 0.25).abs() < 1e-12, "got {}", s.util_var);
        assert_eq!(s.gap_ratio, 0.5);
    }

    #[test]
    fn overlap_counts_extra_bookings_per_person_slot() {
        // Person 7 is in both meetings for two shared slots.
        let entries = vec![
            entry(1, 0, 0, 2, vec![7, 8]),
            entry(2, 1, 0, 2, vec![7, 9]),
        ];
        let s = sense_block(&entries, 2);
        assert_eq!(s.overlap_count, 2);

        // Triple-booked person at one slot counts 2.
        let entries = vec![
            entry(1, 0, 0, 1, vec![7]),
            entry(2, 1, 0, 1, vec![7]),
            entry(3, 2, 0, 1, vec![7]),
        ];
        let s = sense_block(&entries, 3);
        assert_eq!(s.overlap_count, 2);
    }

    #[test]
    fn double_occupied_cell_counts_once() {
        let entries = vec![entry(1, 0, 0, 2, vec![1]), entry(2, 0, 0, 2, vec![2])];
        let s = sense_block(&entries, 1);
        assert_eq!(s.gap_ratio, 0.5);
    }
}
