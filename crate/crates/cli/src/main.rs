mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::PoaArgs;
use crate::report::{CliResult, ExitCode, Outcome, Report};

/// Exact certification of stability and efficiency for cardinal marriage
/// markets.
#[derive(Parser)]
#[command(name = "matchcert", version)]
struct Cli {
    /// Print the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the command's artifact here: the constructed market for
    /// `represent`, the CSV table for `poa`, the JSON report otherwise.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Break preference ties deterministically wherever an ordinal reading
    /// is needed.
    #[arg(long, global = true, value_enum)]
    tie_break: Option<TieBreak>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieBreak {
    /// Among equally good partners, prefer the lower index.
    LowerIndex,
}

#[derive(Subcommand)]
enum Command {
    /// Certify which solution concepts a matching satisfies.
    Certify {
        file: PathBuf,
        /// `identity`, `da-men`, `da-women`, or 1-based partners like "1 3 2".
        #[arg(long, short, default_value = "identity")]
        matching: String,
        /// `all` or a comma-separated subset of no-trade,ntu,tu,ex-ante,ex-post.
        #[arg(long, short, default_value = "all")]
        concepts: String,
    },
    /// List all stable matchings, flagging isolated and optimal ones.
    EnumerateStable { file: PathBuf },
    /// Build a cardinal representation of the market's preferences.
    Represent {
        file: PathBuf,
        #[arg(long, value_parser = ["no-trade", "isolated"])]
        mode: String,
        /// Target matching for `no-trade` (same forms as `certify`).
        #[arg(long, short, default_value = "da-men")]
        matching: String,
    },
    /// Welfare gap between stable and transfer-optimal outcomes on the
    /// generated family.
    Poa {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_name = "LIST")]
        n_list: Option<String>,
        #[arg(long, default_value_t = 2)]
        g: u32,
        #[arg(long = "K", default_value = "10")]
        k: String,
        #[arg(long, default_value = "1/100")]
        epsilon: String,
        /// Also write the generated market (single --n only).
        #[arg(long, value_name = "PATH")]
        market: Option<PathBuf>,
    },
    /// Check the implication lattice on seeded random markets.
    AuditImplications {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    let tie_break = cli.tie_break.is_some();
    match &cli.command {
        Command::Certify {
            file,
            matching,
            concepts,
        } => commands::certify(file, matching, concepts, tie_break),
        Command::EnumerateStable { file } => commands::enumerate(file, tie_break),
        Command::Represent { file, mode, matching } => commands::represent(file, mode, matching, tie_break),
        Command::Poa {
            n,
            n_list,
            g,
            k,
            epsilon,
            market,
        } => commands::poa(&PoaArgs {
            n: *n,
            n_list: n_list.clone(),
            g: *g,
            k: k.clone(),
            epsilon: epsilon.clone(),
            market_out: market.clone(),
        }),
        Command::AuditImplications { n, trials, seed } => commands::audit(*n, *trials, *seed),
    }
}

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { ExitCode::Parse as i32 } else { 0 };
            std::process::exit(code);
        }
    };
    let command = &argv[1..];
    let code = match dispatch(&cli) {
        Ok(outcome) => {
            let report = Report {
                command,
                input_digest: Some(&outcome.input_digest),
                notes: &outcome.notes,
                result: Some(&outcome.result),
                error: None,
                exit_status: outcome.exit as i32,
            };
            let json = report.to_json();
            if let Some(path) = &cli.out {
                let body = outcome.artifact.as_deref().unwrap_or(&json);
                if let Err(e) = std::fs::write(path, body) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    std::process::exit(ExitCode::Parse as i32);
                }
            }
            let mut stdout = std::io::stdout().lock();
            let _ = if cli.json {
                stdout.write_all(json.as_bytes())
            } else {
                let mut text = outcome.text.clone();
                for note in &outcome.notes {
                    text.push_str(&format!("note: {note}\n"));
                }
                stdout.write_all(text.as_bytes())
            };
            outcome.exit as i32
        }
        Err(e) => {
            eprintln!("error: {e}");
            if cli.json {
                let report = Report {
                    command,
                    input_digest: None,
                    notes: &[],
                    result: None,
                    error: Some(&e.message),
                    exit_status: e.code as i32,
                };
                print!("{}", report.to_json());
            }
            e.code as i32
        }
    };
    std::process::exit(code);
}
