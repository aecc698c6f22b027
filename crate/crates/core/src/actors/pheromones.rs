use std::collections::HashMap;

use crate::engine::TickReport;

/// One piece of region-scoped guidance left behind by an earlier tick.
#[derive(Debug, Clone)]
pub struct Pheromone {
    pub hint: String,
    pub weight: f64,
    /// True when laid by an applied patch, false when laid by a rejection.
    pub positive: bool,
}

pub const PHEROMONE_DECAY: f64 = 0.95;
pub const PHEROMONE_EVICT_BELOW: f64 = 0.1;
pub const MAX_HINTS_PER_PROMPT: usize = 3;

/// Region-keyed store of prompt hints. Applied patches deposit worked
/// examples; rejections deposit the domain's positively-phrased tips.
/// Weights decay every tick and weak entries evaporate.
#[derive(Debug, Default)]
pub struct PheromoneStore {
    by_region: HashMap<usize, Vec<Pheromone>>,
}

impl PheromoneStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Decay and evict existing entries, then deposit from one tick.
    pub fn update(&mut self, report: &TickReport) {
        for entries in self.by_region.values_mut() {
            for p in entries.iter_mut() {
                p.weight *= PHEROMONE_DECAY;
            }
            entries.retain(|p| p.weight >= PHEROMONE_EVICT_BELOW);
        }
        self.by_region.retain(|_, entries| !entries.is_empty());

        for applied in &report.applied {
            let hint = format!(
                "Example: {} (improved by {:.2})",
                applied.summary,
                -applied.actual_delta
            );
            self.deposit(applied.region_id, hint, true);
        }
        for rejection in &report.rejections {
            if let Some(hint) = &rejection.hint {
                self.deposit(rejection.region_id, hint.clone(), false);
            }
        }
    }

    fn deposit(&mut self, region: usize, hint: String, positive: bool) {
        let entries = self.by_region.entry(region).or_default();
        if let Some(existing) = entries.iter_mut().find(|p| p.hint == hint) {
            existing.weight = 1.0;
            existing.positive = positive;
        } else {
            entries.push(Pheromone {
                hint,
                weight: 1.0,
                positive,
            });
        }
    }

    /// Strongest hints for one region, at most `MAX_HINTS_PER_PROMPT`.
    pub fn hints_for(&self, region: usize) -> Vec<String> {
        let Some(entries) = self.by_region.get(&region) else {
            return Vec::new();
        };
        let mut ranked: Vec<&Pheromone> = entries.iter().collect();
        ranked.sort_by(|a, b| b.weight.total_cmp(&a.weight));
        ranked
            .into_iter()
            .take(MAX_HINTS_PER_PROMPT)
            .map(|p| p.hint.clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.by_region.values().map(|v| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{AppliedPatch, PatchRejection, Provenance, TokenUsage};

    fn report(applied: Vec<AppliedPatch>, rejections: Vec<PatchRejection>) -> TickReport {
        TickReport {
            tick: 0,
            pressure_before: 0.0,
            pressure_after: 0.0,
            region_pressures_before: vec![],
            region_pressures_after: vec![],
            activated: vec![],
            proposals: 0,
            no_proposals: 0,
            applied,
            rejections,
            usage: TokenUsage::default(),
        }
    }

    fn applied(region: usize, summary: &str) -> AppliedPatch {
        AppliedPatch {
            region_id: region,
            actual_delta: -0.45,
            summary: summary.to_string(),
            provenance: Provenance {
                actor: 0,
                band: None,
                model: None,
                proposal_index: 0,
            },
        }
    }

    fn rejected(region: usize, hint: Option<&str>) -> PatchRejection {
        PatchRejection {
            region_id: region,
            reason: "occupied".to_string(),
            summary: None,
            provenance: None,
            hint: hint.map(str::to_string),
        }
    }

    #[test]
    fn deposits_examples_and_tips() {
        let mut store = PheromoneStore::new();
        store.update(&report(
            vec![applied(3, "Schedule meeting 5 in Room A at Tuesday 10:00")],
            vec![rejected(3, Some("TIP: Room B fills up fast"))],
        ));
        let hints = store.hints_for(3);
        assert_eq!(hints.len(), 2);
        assert!(hints[0].contains("improved by 0.45"));
        assert!(hints.iter().any(|h| h.starts_with("TIP:")));
        assert!(store.hints_for(4).is_empty());
    }

    #[test]
    fn decays_and_evicts_weak_entries() {
        let mut store = PheromoneStore::new();
        store.update(&report(vec![applied(0, "x")], vec![]));
        // 1.0 * 0.95^44 is just above the threshold, one more tick is below.
        for _ in 0..44 {
            store.update(&report(vec![], vec![]));
        }
        assert_eq!(store.len(), 1);
        let weight_now = PHEROMONE_DECAY.powi(44);
        assert!(weight_now >= PHEROMONE_EVICT_BELOW);
        store.update(&report(vec![], vec![]));
        assert!(store.is_empty());
    }

    #[test]
    fn borderline_weight_evicts_after_one_decay() {
        let mut store = PheromoneStore::new();
        store.deposit(0, "x".to_string(), true);
        store.by_region.get_mut(&0).unwrap()[0].weight = 0.10;
        store.update(&report(vec![], vec![]));
        // 0.10 * 0.95 = 0.095 < 0.1
        assert!(store.is_empty());
    }

    #[test]
    fn caps_hints_and_refreshes_duplicates() {
        let mut store = PheromoneStore::new();
        for i in 0..5 {
            store.update(&report(vec![applied(1, &format!("edit {i}"))], vec![]));
        }
        assert_eq!(store.hints_for(1).len(), MAX_HINTS_PER_PROMPT);

        store.update(&report(vec![applied(1, "edit 0")], vec![]));
        let entries = &store.by_region[&1];
        assert_eq!(entries.iter().filter(|p| p.hint.contains("edit 0")).count(), 1);
    }
}
