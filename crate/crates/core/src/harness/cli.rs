use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::scheduling::Difficulty;
use crate::strategies::{ActorMode, StrategyKind};

#[derive(Debug, Parser)]
#[command(
    name = "schedule-experiment",
    about = "Meeting-room scheduling experiments for stigmergic multi-agent coordination",
    version
)]
pub struct Cli {
    /// Inference endpoint (Ollama-compatible generate API).
    #[arg(long, global = true, default_value = "http://localhost:11434")]
    pub host: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the strategy x difficulty x agents grid.
    Grid(GridArgs),
    /// Run the five-configuration toggle study (pressure_field only).
    Ablation(AblationArgs),
    /// Agent-count scaling preset: pressure_field at 1, 2, and 4 agents.
    Scaling(ScalingArgs),
    /// Summarize and test existing trial logs.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ActorKind {
    Heuristic,
    Inference,
}

fn positive(s: &str) -> Result<u64, String> {
    let n: u64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if n == 0 {
        return Err("must be at least 1".to_string());
    }
    Ok(n)
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    s.parse()
}

fn parse_difficulty(s: &str) -> Result<Difficulty, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Trials per grid cell.
    #[arg(long, default_value_t = 30, value_parser = positive)]
    pub trials: u64,

    /// Comma-separated strategy list.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_strategy,
        default_values_t = StrategyKind::ALL
    )]
    pub strategies: Vec<StrategyKind>,

    /// Comma-separated agent counts.
    #[arg(long, value_delimiter = ',', value_parser = positive, default_values_t = [2])]
    pub agents: Vec<u64>,

    /// Comma-separated difficulty list.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_difficulty,
        default_values_t = [Difficulty::Easy]
    )]
    pub difficulties: Vec<Difficulty>,

    /// Tick budget per trial.
    #[arg(long, default_value_t = 50, value_parser = positive)]
    pub max_ticks: u64,

    /// Output directory for trial logs and summaries.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,

    /// Proposal source: the deterministic rule actor or a model endpoint.
    #[arg(long, value_enum, default_value_t = ActorKind::Heuristic)]
    pub actor: ActorKind,

    /// Probability that a heuristic proposal is random rather than greedy.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,

    /// Worker threads for running trials.
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub workers: u64,
}

#[derive(Debug, Args)]
pub struct AblationArgs {
    #[arg(long, default_value_t = 30, value_parser = positive)]
    pub trials: u64,

    #[arg(long, default_value_t = 2, value_parser = positive)]
    pub agents: u64,

    #[arg(long, value_parser = parse_difficulty, default_value_t = Difficulty::Easy)]
    pub difficulty: Difficulty,

    #[arg(long, default_value_t = 50, value_parser = positive)]
    pub max_ticks: u64,

    #[arg(long, default_value = "results")]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = ActorKind::Heuristic)]
    pub actor: ActorKind,

    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,

    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub workers: u64,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, default_value_t = 30, value_parser = positive)]
    pub trials: u64,

    #[arg(long, value_delimiter = ',', value_parser = positive, default_values_t = [1, 2, 4])]
    pub agents: Vec<u64>,

    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_difficulty,
        default_values_t = [Difficulty::Easy]
    )]
    pub difficulties: Vec<Difficulty>,

    #[arg(long, default_value_t = 50, value_parser = positive)]
    pub max_ticks: u64,

    #[arg(long, default_value = "results")]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = ActorKind::Heuristic)]
    pub actor: ActorKind,

    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,

    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub workers: u64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Trial logs (JSONL) to analyze together.
    #[arg(required = true)]
    pub logs: Vec<PathBuf>,

    /// Where to write the CSV summary; defaults next to the first log.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// The cross product to run: every (strategy, difficulty, agents, trial)
/// cell, with trial seeds shared across strategies.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub trials: u64,
    pub strategies: Vec<StrategyKind>,
    pub agents: Vec<usize>,
    pub difficulties: Vec<Difficulty>,
    pub max_ticks: u64,
    pub mode: ActorMode,
    pub out: PathBuf,
    pub workers: usize,
}

fn actor_mode(actor: ActorKind, noise: f64, host: &str) -> ActorMode {
    match actor {
        ActorKind::Heuristic => ActorMode::Heuristic { noise },
        ActorKind::Inference => ActorMode::Inference {
            host: host.to_string(),
            models: Vec::new(),
        },
    }
}

impl GridSpec {
    pub fn from_grid(args: &GridArgs, host: &str) -> Self {
        Self {
            trials: args.trials,
            strategies: args.strategies.clone(),
            agents: args.agents.iter().map(|&a| a as usize).collect(),
            difficulties: args.difficulties.clone(),
            max_ticks: args.max_ticks,
            mode: actor_mode(args.actor, args.noise, host),
            out: args.out.clone(),
            workers: args.workers as usize,
        }
    }

    pub fn from_ablation(args: &AblationArgs, host: &str) -> Self {
        Self {
            trials: args.trials,
            strategies: vec![StrategyKind::PressureField],
            agents: vec![args.agents as usize],
            difficulties: vec![args.difficulty],
            max_ticks: args.max_ticks,
            mode: actor_mode(args.actor, args.noise, host),
            out: args.out.clone(),
            workers: args.workers as usize,
        }
    }

    pub fn from_scaling(args: &ScalingArgs, host: &str) -> Self {
        Self {
            trials: args.trials,
            strategies: vec![StrategyKind::PressureField],
            agents: args.agents.iter().map(|&a| a as usize).collect(),
            difficulties: args.difficulties.clone(),
            max_ticks: args.max_ticks,
            mode: actor_mode(args.actor, args.noise, host),
            out: args.out.clone(),
            workers: args.workers as usize,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(argv: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(argv)
    }

    #[test]
    fn scaling_command_from_the_protocol_parses() {
        let cli = parse(&[
            "schedule-experiment",
            "grid",
            "--trials",
            "30",
            "--strategies",
            "pressure_field",
            "--agents",
            "1,2,4",
            "--difficulties",
            "easy",
            "--max-ticks",
            "50",
        ])
        .unwrap();
        let Command::Grid(args) = &cli.command else {
            panic!("expected grid");
        };
        let spec = GridSpec::from_grid(args, &cli.host);
        assert_eq!(spec.trials, 30);
        assert_eq!(spec.strategies, vec![StrategyKind::PressureField]);
        assert_eq!(spec.agents, vec![1, 2, 4]);
        assert_eq!(spec.difficulties, vec![Difficulty::Easy]);
        assert_eq!(spec.max_ticks, 50);
    }

    #[test]
    fn host_is_global_and_defaults() {
        let cli = parse(&["schedule-experiment", "grid"]).unwrap();
        assert_eq!(cli.host, "http://localhost:11434");
        let cli = parse(&[
            "schedule-experiment",
            "--host",
            "http://gpu-box:11434",
            "ablation",
            "--trials",
            "5",
        ])
        .unwrap();
        assert_eq!(cli.host, "http://gpu-box:11434");
    }

    #[test]
    fn zero_agents_is_a_usage_error() {
        assert!(parse(&["schedule-experiment", "grid", "--agents", "0"]).is_err());
        assert!(parse(&["schedule-experiment", "grid", "--agents", "2,0"]).is_err());
        assert!(parse(&["schedule-experiment", "grid", "--trials", "0"]).is_err());
    }

    #[test]
    fn unknown_tokens_are_usage_errors() {
        assert!(parse(&["schedule-experiment", "grid", "--strategies", "swarm"]).is_err());
        assert!(parse(&["schedule-experiment", "grid", "--difficulties", "brutal"]).is_err());
        assert!(parse(&["schedule-experiment", "grid", "--frobnicate"]).is_err());
    }

    #[test]
    fn no_subcommand_is_an_error() {
        assert!(parse(&["schedule-experiment"]).is_err());
    }

    #[test]
    fn grid_defaults_cover_all_strategies() {
        let cli = parse(&["schedule-experiment", "grid"]).unwrap();
        let Command::Grid(args) = &cli.command else {
            panic!("expected grid");
        };
        let spec = GridSpec::from_grid(args, &cli.host);
        assert_eq!(spec.strategies.len(), 5);
        assert_eq!(spec.agents, vec![2]);
        assert!(matches!(spec.mode, ActorMode::Heuristic { noise } if noise == 0.0));
    }
}
