use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use extremal_cli::{pipeline, CliError, PipelineConfig};

#[derive(Parser)]
#[command(name = "extremal", version, about = "Extremal dependence analysis of market return panels")]
struct Cli {
    /// TOML configuration file; defaults apply to anything it omits.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for intermediates, tables and plot data.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load prices, form log returns and transform margins.
    Ingest,
    /// Write simulated prices to the output directory.
    Simulate,
    /// GPD fits across the quantile grid.
    FitGpd,
    /// Mixture-model threshold suggestions.
    Thresholds,
    /// Conditional extremes fits.
    FitCmev,
    /// Conditional exceedance probabilities.
    Predict,
    /// Point-process fits for every pair and family.
    FitPp,
    /// CMEV versus point-process strength labels.
    Compare,
    /// Summary document from the rendered tables.
    Report,
    /// Every stage in order, plus the manifest.
    Run,
    /// Configuration handling.
    Config {
        /// Print the effective configuration as TOML.
        #[arg(long)]
        dump: bool,
    },
}

fn load(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    match cli.command {
        Command::Ingest => pipeline::ingest(&cfg),
        Command::Simulate => pipeline::simulate(&cfg),
        Command::FitGpd => pipeline::fit_gpd(&cfg),
        Command::Thresholds => pipeline::thresholds(&cfg),
        Command::FitCmev => pipeline::fit_cmev(&cfg),
        Command::Predict => pipeline::predict(&cfg),
        Command::FitPp => pipeline::fit_pp(&cfg),
        Command::Compare => pipeline::compare(&cfg),
        Command::Report => pipeline::report(&cfg),
        Command::Run => {
            let m = pipeline::run_pipeline(&cfg)?;
            println!("wrote {} files to {}", m.files.len() + 1, cfg.out_dir.display());
            Ok(())
        }
        Command::Config { dump } => {
            if dump {
                print!("{}", cfg.to_toml());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
