use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::engine::{EngineConfig, NullSink};
use crate::scheduling::{generate_problem, Difficulty};
use crate::strategies::{run_strategy, ActorMode, StrategyKind};

use super::cli::GridSpec;
use super::record::TrialRecord;

/// The toggle study configurations, in reporting order.
pub const ABLATION_CONFIGS: [(&str, bool, bool, bool); 5] = [
    ("full", true, true, true),
    ("no_decay", false, true, true),
    ("no_inhibition", true, false, true),
    ("no_examples", true, true, false),
    ("baseline", false, false, false),
];

/// One unit of work in a run.
#[derive(Debug, Clone)]
struct Cell {
    strategy: StrategyKind,
    difficulty: Difficulty,
    agents: usize,
    trial: u64,
    /// Overrides the strategy label in the record (ablation configs).
    label: Option<&'static str>,
    decay: bool,
    inhibition: bool,
    examples: bool,
}

#[derive(Debug, Default)]
pub struct RunOutcome {
    pub completed: u64,
    pub failed: u64,
}

/// Serialize one record as a JSONL line and flush so an interrupted run
/// keeps everything written so far.
pub fn write_trial_record(record: &TrialRecord, sink: &mut (dyn Write + Send)) -> std::io::Result<()> {
    serde_json::to_writer(&mut *sink, record)?;
    sink.write_all(b"\n")?;
    sink.flush()
}

/// Read a JSONL trial log back.
pub fn read_records(path: &std::path::Path) -> anyhow::Result<Vec<TrialRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

fn run_cell(cell: &Cell, max_ticks: u64, mode: &ActorMode) -> Result<TrialRecord, String> {
    let problem = Arc::new(generate_problem(cell.trial, cell.agents as u64, cell.difficulty));
    let mut cfg = EngineConfig::for_agents(cell.agents);
    cfg.max_ticks = max_ticks;
    cfg.decay_enabled = cell.decay;
    cfg.inhibition_enabled = cell.inhibition;
    cfg.examples_enabled = cell.examples;
    let mut record =
        run_strategy(cell.strategy, problem, cell.agents, &cfg, mode, &mut NullSink)
            .map_err(|e| e.to_string())?;
    if let Some(label) = cell.label {
        record.strategy = label.to_string();
    }
    Ok(record)
}

/// Run every cell, streaming records to the sink as they complete.
/// Failures are logged and counted, never fatal.
fn run_cells(
    cells: Vec<Cell>,
    max_ticks: u64,
    mode: &ActorMode,
    workers: usize,
    sink: &mut (dyn Write + Send),
) -> anyhow::Result<RunOutcome> {
    let mut outcome = RunOutcome::default();
    if workers <= 1 {
        for cell in &cells {
            match run_cell(cell, max_ticks, mode) {
                Ok(record) => {
                    write_trial_record(&record, sink)?;
                    outcome.completed += 1;
                }
                Err(err) => {
                    eprintln!(
                        "trial failed: {} {} agents={} trial={}: {err}",
                        cell.label.unwrap_or(cell.strategy.name()),
                        cell.difficulty,
                        cell.agents,
                        cell.trial
                    );
                    outcome.failed += 1;
                }
            }
        }
        return Ok(outcome);
    }

    // Worker pool over an atomic cursor; one writer behind a lock. Trial
    // determinism makes completion order irrelevant.
    let next = AtomicUsize::new(0);
    let shared = Mutex::new((sink, &mut outcome));
    std::thread::scope(|scope| -> anyhow::Result<()> {
        let mut handles = Vec::new();
        for _ in 0..workers.min(cells.len()) {
            handles.push(scope.spawn(|| -> anyhow::Result<()> {
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(cell) = cells.get(i) else {
                        return Ok(());
                    };
                    let result = run_cell(cell, max_ticks, mode);
                    let mut guard = shared.lock().expect("writer lock poisoned");
                    let (sink, outcome) = &mut *guard;
                    match result {
                        Ok(record) => {
                            write_trial_record(&record, *sink)?;
                            outcome.completed += 1;
                        }
                        Err(err) => {
                            eprintln!(
                                "trial failed: {} {} agents={} trial={}: {err}",
                                cell.label.unwrap_or(cell.strategy.name()),
                                cell.difficulty,
                                cell.agents,
                                cell.trial
                            );
                            outcome.failed += 1;
                        }
                    }
                }
            }));
        }
        for handle in handles {
            handle.join().expect("worker panicked")?;
        }
        Ok(())
    })?;
    Ok(outcome)
}

/// The main grid: every (strategy, difficulty, agents, trial) cell, with
/// seed = trial * 1000 + agents so strategies within a cell share one
/// problem instance.
pub fn run_grid(spec: &GridSpec, sink: &mut (dyn Write + Send)) -> anyhow::Result<RunOutcome> {
    let mut cells = Vec::new();
    for &difficulty in &spec.difficulties {
        for &agents in &spec.agents {
            for trial in 0..spec.trials {
                for &strategy in &spec.strategies {
                    cells.push(Cell {
                        strategy,
                        difficulty,
                        agents,
                        trial,
                        label: None,
                        decay: true,
                        inhibition: true,
                        examples: true,
                    });
                }
            }
        }
    }
    run_cells(cells, spec.max_ticks, &spec.mode, spec.workers, sink)
}

/// The toggle study: five engine configurations, pressure_field only,
/// records labeled by configuration name.
pub fn run_ablation(spec: &GridSpec, sink: &mut (dyn Write + Send)) -> anyhow::Result<RunOutcome> {
    let difficulty = spec.difficulties[0];
    let agents = spec.agents[0];
    let mut cells = Vec::new();
    for &(label, decay, inhibition, examples) in &ABLATION_CONFIGS {
        for trial in 0..spec.trials {
            cells.push(Cell {
                strategy: StrategyKind::PressureField,
                difficulty,
                agents,
                trial,
                label: Some(label),
                decay,
                inhibition,
                examples,
            });
        }
    }
    run_cells(cells, spec.max_ticks, &spec.mode, spec.workers, sink)
}

#[cfg(test)]
mod tests {
    use std::path::PathBuf;

    use crate::strategies::StrategyKind;

    use super::super::cli::GridSpec;
    use super::*;

    fn spec(trials: u64, strategies: Vec<StrategyKind>) -> GridSpec {
        GridSpec {
            trials,
            strategies,
            agents: vec![2],
            difficulties: vec![Difficulty::Easy],
            max_ticks: 50,
            mode: ActorMode::Heuristic { noise: 0.0 },
            out: PathBuf::from("unused"),
            workers: 1,
        }
    }

    #[test]
    fn grid_record_count_is_the_cross_product() {
        let spec = spec(
            3,
            vec![StrategyKind::PressureField, StrategyKind::Sequential],
        );
        let mut buf = Vec::new();
        let outcome = run_grid(&spec, &mut buf).unwrap();
        assert_eq!(outcome.completed, 6);
        assert_eq!(outcome.failed, 0);
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 6);
    }

    #[test]
    fn grid_seeds_follow_the_trial_formula() {
        let spec = spec(3, vec![StrategyKind::PressureField]);
        let mut file = tempfile::NamedTempFile::new().unwrap();
        run_grid(&spec, file.as_file_mut()).unwrap();
        let records = read_records(file.path()).unwrap();
        let seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![2, 1002, 2002]);
    }

    #[test]
    fn strategies_within_a_cell_share_the_seed() {
        let spec = spec(
            1,
            vec![StrategyKind::PressureField, StrategyKind::Random],
        );
        let mut file = tempfile::NamedTempFile::new().unwrap();
        run_grid(&spec, file.as_file_mut()).unwrap();
        let records = read_records(file.path()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].seed, records[1].seed);
        assert_ne!(records[0].strategy, records[1].strategy);
    }

    #[test]
    fn jsonl_lines_round_trip() {
        let spec = spec(2, vec![StrategyKind::Hierarchical]);
        let mut buf = Vec::new();
        run_grid(&spec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            let record: TrialRecord = serde_json::from_str(line).unwrap();
            let mut again = Vec::new();
            write_trial_record(&record, &mut again).unwrap();
            let back: TrialRecord =
                serde_json::from_str(String::from_utf8(again).unwrap().trim()).unwrap();
            assert_eq!(back, record);
        }
    }

    #[test]
    fn ablation_runs_five_labeled_configs() {
        let spec = spec(2, vec![StrategyKind::PressureField]);
        let mut file = tempfile::NamedTempFile::new().unwrap();
        let outcome = run_ablation(&spec, file.as_file_mut()).unwrap();
        assert_eq!(outcome.completed, 10);
        let records = read_records(file.path()).unwrap();
        let labels: Vec<&str> = records.iter().map(|r| r.strategy.as_str()).collect();
        for (label, _, _, _) in ABLATION_CONFIGS {
            assert_eq!(labels.iter().filter(|&&l| l == label).count(), 2);
        }
    }

    #[test]
    fn parallel_workers_produce_the_same_record_set() {
        let run = |workers| {
            let mut s = spec(
                4,
                vec![StrategyKind::PressureField, StrategyKind::Sequential],
            );
            s.workers = workers;
            let mut file = tempfile::NamedTempFile::new().unwrap();
            run_grid(&s, file.as_file_mut()).unwrap();
            let mut records = read_records(file.path()).unwrap();
            for r in &mut records {
                r.duration_ms = 0;
            }
            records.sort_by_key(|r| (r.strategy.clone(), r.seed));
            records
        };
        assert_eq!(run(1), run(4));
    }
}
