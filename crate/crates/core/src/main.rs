use std::fs::{self, OpenOptions};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use pressure_field::harness::{
    analysis_report, read_records, run_ablation, run_grid, summarize, summary_csv, summary_table,
    AnalyzeArgs, Cli, Command, GridSpec, RunOutcome, TrialRecord,
};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Grid(args) => {
            let spec = GridSpec::from_grid(args, &cli.host);
            execute(&spec, "grid", run_grid)
        }
        Command::Scaling(args) => {
            let spec = GridSpec::from_scaling(args, &cli.host);
            execute(&spec, "scaling", run_grid)
        }
        Command::Ablation(args) => {
            let spec = GridSpec::from_ablation(args, &cli.host);
            execute(&spec, "ablation", run_ablation)
        }
        Command::Analyze(args) => analyze(args),
    }
}

fn execute(
    spec: &GridSpec,
    name: &str,
    runner: fn(&GridSpec, &mut (dyn std::io::Write + Send)) -> anyhow::Result<RunOutcome>,
) -> anyhow::Result<ExitCode> {
    fs::create_dir_all(&spec.out)
        .with_context(|| format!("creating output directory {}", spec.out.display()))?;
    let log_path = spec.out.join(format!("{name}.jsonl"));
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&log_path)
        .with_context(|| format!("opening {}", log_path.display()))?;
    let mut writer = BufWriter::new(file);

    let outcome = runner(spec, &mut writer)?;
    eprintln!(
        "{name}: {} trials completed, {} failed, log at {}",
        outcome.completed,
        outcome.failed,
        log_path.display()
    );

    let records = read_records(&log_path)?;
    if !records.is_empty() {
        report(&records, &spec.out.join(format!("{name}_summary.csv")))?;
    }

    Ok(if outcome.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn analyze(args: &AnalyzeArgs) -> anyhow::Result<ExitCode> {
    let mut records: Vec<TrialRecord> = Vec::new();
    for path in &args.logs {
        records.extend(
            read_records(path).with_context(|| format!("reading {}", path.display()))?,
        );
    }
    anyhow::ensure!(!records.is_empty(), "no records in the given logs");

    let csv_path: PathBuf = args.csv.clone().unwrap_or_else(|| {
        args.logs[0].with_file_name(default_csv_name(&args.logs[0]))
    });
    report(&records, &csv_path)?;
    print!("{}", analysis_report(&records));
    Ok(ExitCode::SUCCESS)
}

fn default_csv_name(log: &Path) -> String {
    let stem = log
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trials");
    format!("{stem}_summary.csv")
}

fn report(records: &[TrialRecord], csv_path: &Path) -> anyhow::Result<()> {
    let summary = summarize(records);
    print!("{}", summary_table(&summary));
    fs::write(csv_path, summary_csv(&summary))
        .with_context(|| format!("writing {}", csv_path.display()))?;
    eprintln!("summary csv: {}", csv_path.display());
    Ok(())
}
