use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::stats::{
    analyze_transitions, chi_square_independence, cohens_h, fisher_exact_2x2, wilson_ci,
};

use super::record::TrialRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: String,
    pub difficulty: String,
    pub n: u64,
    pub solved: u64,
    pub rate: f64,
    pub ci: (f64, f64),
    /// Over solved trials only; absent when nothing solved.
    pub mean_ticks_to_solve: Option<f64>,
    pub mean_final_pressure: f64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// Total tokens divided by solves; absent when nothing solved.
    pub tokens_per_solve: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub aggregate: SummaryRow,
}

fn summarize_group(strategy: &str, difficulty: &str, records: &[&TrialRecord]) -> SummaryRow {
    let n = records.len() as u64;
    let solved = records.iter().filter(|r| r.solved).count() as u64;
    let ci = wilson_ci(solved, n, 0.95).expect("groups are non-empty");
    let solve_ticks: Vec<f64> = records
        .iter()
        .filter(|r| r.solved)
        .map(|r| r.total_ticks as f64)
        .collect();
    let prompt_tokens: u64 = records.iter().map(|r| r.token_usage.prompt).sum();
    let completion_tokens: u64 = records.iter().map(|r| r.token_usage.completion).sum();
    let total_tokens = prompt_tokens + completion_tokens;
    SummaryRow {
        strategy: strategy.to_string(),
        difficulty: difficulty.to_string(),
        n,
        solved,
        rate: solved as f64 / n as f64,
        ci,
        mean_ticks_to_solve: (!solve_ticks.is_empty())
            .then(|| solve_ticks.iter().sum::<f64>() / solve_ticks.len() as f64),
        mean_final_pressure: records.iter().map(|r| r.final_pressure()).sum::<f64>() / n as f64,
        prompt_tokens,
        completion_tokens,
        tokens_per_solve: (solved > 0).then(|| total_tokens as f64 / solved as f64),
    }
}

/// Per (strategy, difficulty) rows plus one aggregate row over everything.
pub fn summarize(records: &[TrialRecord]) -> Summary {
    assert!(!records.is_empty(), "summarize needs at least one record");
    let mut groups: BTreeMap<(String, String), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.strategy.clone(), r.difficulty.clone()))
            .or_default()
            .push(r);
    }
    let rows = groups
        .iter()
        .map(|((s, d), rs)| summarize_group(s, d, rs))
        .collect();
    let all: Vec<&TrialRecord> = records.iter().collect();
    Summary {
        rows,
        aggregate: summarize_group("all", "all", &all),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"))
}

pub fn summary_csv(summary: &Summary) -> String {
    let mut out = String::from(
        "strategy,difficulty,n,solved,rate,ci_low,ci_high,mean_ticks_to_solve,\
         mean_final_pressure,prompt_tokens,completion_tokens,tokens_per_solve\n",
    );
    for row in summary.rows.iter().chain([&summary.aggregate]) {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.4},{:.4},{:.4},{},{:.3},{},{},{}",
            row.strategy,
            row.difficulty,
            row.n,
            row.solved,
            row.rate,
            row.ci.0,
            row.ci.1,
            opt(row.mean_ticks_to_solve),
            row.mean_final_pressure,
            row.prompt_tokens,
            row.completion_tokens,
            opt(row.tokens_per_solve),
        );
    }
    out
}

pub fn summary_table(summary: &Summary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:<10} {:>8} {:>7} {:>16} {:>10} {:>10} {:>14}",
        "strategy", "difficulty", "solved", "rate", "95% CI", "ticks", "pressure", "tokens/solve"
    );
    for row in summary.rows.iter().chain([&summary.aggregate]) {
        let _ = writeln!(
            out,
            "{:<16} {:<10} {:>8} {:>6.1}% {:>16} {:>10} {:>10.2} {:>14}",
            row.strategy,
            row.difficulty,
            format!("{}/{}", row.solved, row.n),
            100.0 * row.rate,
            format!("[{:.1}%, {:.1}%]", 100.0 * row.ci.0, 100.0 * row.ci.1),
            opt(row.mean_ticks_to_solve),
            row.mean_final_pressure,
            opt(row.tokens_per_solve),
        );
    }
    out
}

/// Significance tests and transition accounting over a trial log:
/// per difficulty, an omnibus chi-square across strategies plus pairwise
/// Fisher p-values and Cohen's h effect sizes.
pub fn analysis_report(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    let mut difficulties: Vec<String> = records.iter().map(|r| r.difficulty.clone()).collect();
    difficulties.sort();
    difficulties.dedup();

    for difficulty in &difficulties {
        let subset: Vec<&TrialRecord> =
            records.iter().filter(|r| &r.difficulty == difficulty).collect();
        let mut strategies: Vec<String> = subset.iter().map(|r| r.strategy.clone()).collect();
        strategies.sort();
        strategies.dedup();

        let counts: Vec<(String, u64, u64)> = strategies
            .iter()
            .map(|s| {
                let rs: Vec<&&TrialRecord> =
                    subset.iter().filter(|r| &r.strategy == s).collect();
                let solved = rs.iter().filter(|r| r.solved).count() as u64;
                (s.clone(), solved, rs.len() as u64)
            })
            .collect();

        let _ = writeln!(out, "difficulty: {difficulty}");
        for (s, solved, n) in &counts {
            let _ = writeln!(out, "  {s}: {solved}/{n} solved");
        }

        if counts.len() >= 2 {
            let table: Vec<[u64; 2]> = counts
                .iter()
                .map(|&(_, solved, n)| [solved, n - solved])
                .collect();
            match chi_square_independence(&table) {
                Ok((stat, p)) => {
                    let _ = writeln!(out, "  omnibus chi-square: {stat:.2} (p = {p:.4})");
                }
                Err(e) => {
                    let _ = writeln!(out, "  omnibus chi-square: unavailable ({e})");
                }
            }
            for i in 0..counts.len() {
                for j in (i + 1)..counts.len() {
                    let (ref a_name, a_s, a_n) = counts[i];
                    let (ref b_name, b_s, b_n) = counts[j];
                    let fisher = fisher_exact_2x2(a_s, a_n - a_s, b_s, b_n - b_s);
                    let h = cohens_h(a_s as f64 / a_n as f64, b_s as f64 / b_n as f64);
                    match fisher {
                        Ok(p) => {
                            let _ = writeln!(
                                out,
                                "  {a_name} vs {b_name}: Fisher p = {p:.4}, Cohen's h = {h:.2}"
                            );
                        }
                        Err(e) => {
                            let _ = writeln!(
                                out,
                                "  {a_name} vs {b_name}: Fisher unavailable ({e}), Cohen's h = {h:.2}"
                            );
                        }
                    }
                }
            }
        }

        for s in &strategies {
            let histories: Vec<&[f64]> = subset
                .iter()
                .filter(|r| &r.strategy == s)
                .map(|r| r.pressure_history.as_slice())
                .collect();
            let t = analyze_transitions(histories.iter().copied());
            let _ = writeln!(
                out,
                "  {s} transitions: {} improved, {} degraded, {} unchanged",
                t.improved, t.degraded, t.unchanged
            );
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use crate::actors::TokenUsage;
    use crate::engine::Termination;
    use crate::harness::RECORD_SCHEMA;

    use super::*;

    fn record(strategy: &str, difficulty: &str, seed: u64, solved: bool) -> TrialRecord {
        TrialRecord {
            schema: RECORD_SCHEMA.to_string(),
            strategy: strategy.to_string(),
            difficulty: difficulty.to_string(),
            agents: 2,
            trial: seed / 1000,
            seed,
            solved,
            termination: if solved {
                Termination::Solved
            } else {
                Termination::Budget
            },
            total_ticks: if solved { 10 } else { 50 },
            pressure_history: vec![9.0, if solved { 0.0 } else { 5.0 }],
            band_escalations: vec![],
            model_escalations: vec![],
            final_model: "qwen2.5:0.5b".to_string(),
            token_usage: TokenUsage {
                prompt: 100,
                completion: 50,
            },
            proposed: 12,
            applied: 8,
            rejected: 4,
            duration_ms: 3,
        }
    }

    fn corpus(solved: u64, n: u64) -> Vec<TrialRecord> {
        (0..n)
            .map(|i| record("pressure_field", "easy", i * 1000 + 2, i < solved))
            .collect()
    }

    #[test]
    fn aggregate_rate_and_ci_match_the_reference_table() {
        let summary = summarize(&corpus(131, 270));
        let agg = &summary.aggregate;
        assert_eq!(agg.solved, 131);
        assert!((agg.rate - 0.485).abs() < 0.001);
        assert!((agg.ci.0 - 0.426).abs() < 0.002);
        assert!((agg.ci.1 - 0.545).abs() < 0.002);
    }

    #[test]
    fn zero_solved_reports_absent_means() {
        let summary = summarize(&corpus(0, 10));
        let row = &summary.rows[0];
        assert_eq!(row.mean_ticks_to_solve, None);
        assert_eq!(row.tokens_per_solve, None);
        let csv = summary_csv(&summary);
        assert!(csv.contains("pressure_field,easy,10,0,"));
        let table = summary_table(&summary);
        assert!(table.contains("0/10"));
    }

    #[test]
    fn tokens_per_solve_divides_total_by_solves() {
        let summary = summarize(&corpus(3, 10));
        let row = &summary.rows[0];
        assert_eq!(row.prompt_tokens, 1000);
        assert_eq!(row.completion_tokens, 500);
        assert_eq!(row.tokens_per_solve, Some(500.0));
        assert_eq!(row.mean_ticks_to_solve, Some(10.0));
    }

    #[test]
    fn summarize_groups_by_strategy_and_difficulty() {
        let mut records = corpus(2, 4);
        records.push(record("random", "easy", 7002, false));
        records.push(record("pressure_field", "hard", 8002, true));
        let summary = summarize(&records);
        assert_eq!(summary.rows.len(), 3);
        assert_eq!(summary.aggregate.n, 6);
        let keys: Vec<(String, String)> = summary
            .rows
            .iter()
            .map(|r| (r.strategy.clone(), r.difficulty.clone()))
            .collect();
        assert!(keys.contains(&("pressure_field".into(), "easy".into())));
        assert!(keys.contains(&("pressure_field".into(), "hard".into())));
        assert!(keys.contains(&("random".into(), "easy".into())));
    }

    #[test]
    fn summaries_are_deterministic_over_the_same_log() {
        let records = corpus(5, 12);
        assert_eq!(summary_csv(&summarize(&records)), summary_csv(&summarize(&records)));
    }

    #[test]
    fn analysis_report_covers_pairs_and_transitions() {
        let mut records: Vec<TrialRecord> = (0..20)
            .map(|i| record("pressure_field", "easy", i * 1000 + 2, i < 18))
            .collect();
        records.extend((0..20).map(|i| record("random", "easy", i * 1000 + 2, i < 2)));
        let report = analysis_report(&records);
        assert!(report.contains("pressure_field: 18/20 solved"));
        assert!(report.contains("random: 2/20 solved"));
        assert!(report.contains("pressure_field vs random: Fisher p = "));
        assert!(report.contains("omnibus chi-square"));
        assert!(report.contains("transitions:"));
    }
}
