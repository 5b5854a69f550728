use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ppg_rocket_cli::commands::{cmd_ablate, cmd_eval, cmd_features, cmd_synth, cmd_train, ABLATION_CSV};
use ppg_rocket_cli::{CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "ppg-rocket", version, about = "Hypertension screening from PPG windows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Versioned key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// rocket+ridge, rocket+forest, hr+ridge, morph+ridge or morph+forest.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Overrides the config output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus and write train/val/test files.
    Synth,
    /// Fit a pipeline on the training file and report on validation.
    Train,
    /// Score the saved pipeline on the test file.
    Eval,
    /// Learning curve over training fractions.
    Ablate,
    /// Dump morphological features as CSV.
    Features,
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(m) = &cli.method {
        cfg.method = m.parse()?;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<String> {
    let cfg = load_config(cli)?;
    let pretty = |v: &serde_json::Value| serde_json::to_string_pretty(v).expect("json");
    Ok(match cli.command {
        Command::Synth => pretty(&cmd_synth(&cfg)?),
        Command::Train => pretty(&cmd_train(&cfg)?.json),
        Command::Eval => pretty(&cmd_eval(&cfg)?),
        Command::Ablate => {
            let rows = cmd_ablate(&cfg)?;
            let failed = rows.iter().filter(|r| r.result.is_err()).count();
            format!(
                "wrote {} rows ({failed} failed) to {}",
                rows.len(),
                cfg.out_dir.join(ABLATION_CSV).display()
            )
        }
        Command::Features => format!("wrote {}", cmd_features(&cfg)?.display()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            // a closed stdout (e.g. piped into `head`) is not a failure
            let _ = writeln!(std::io::stdout(), "{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
