use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};
use corrcache::oracle::Mutation;
use corrcache_experiments::{emit_csv, run_experiment, verify_command, write_csv, ExperimentConfig};

/// Memory-power curves for cache-aided delivery of correlated files.
#[derive(Debug, Parser)]
#[command(version, group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
struct Cli {
    /// Experiment config (flat TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset: fig3, fig4, fig5, fig6 or three_users.
    #[arg(long)]
    preset: Option<String>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check every sweep point with the decodability oracle instead of
    /// writing curves.
    #[arg(long)]
    verify: bool,
    /// Corrupt the schemes under --verify: `drop-cache:<user>` or
    /// `drop-message:<user>`, users counted from 1.
    #[arg(long, hide = true, value_parser = parse_mutation)]
    mutate: Option<Mutation>,
}

fn parse_mutation(s: &str) -> Result<Mutation, String> {
    let (kind, user) = s.split_once(':').ok_or("expected <kind>:<user>")?;
    let user: usize = user.parse().map_err(|_| format!("bad user `{user}`"))?;
    if user == 0 {
        return Err("users are counted from 1".into());
    }
    match kind {
        "drop-cache" => Ok(Mutation::DropCache(user - 1)),
        "drop-message" => Ok(Mutation::DropMessage(user - 1)),
        _ => Err(format!("unknown mutation `{kind}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => ExperimentConfig::load(path),
        (None, Some(name)) => ExperimentConfig::preset(name),
        (None, None) => unreachable!("clap requires a source"),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    if cli.verify {
        return match verify_command(&cfg, cli.mutate) {
            Ok(outcome) => {
                for line in &outcome.lines {
                    println!("{line}");
                }
                println!("{}", if outcome.passed { "verification passed" } else { "verification FAILED" });
                ExitCode::from(outcome.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }

    let points = match run_experiment(&cfg) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(path) => emit_csv(&points, path),
        None => write_csv(&points, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
