use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polarcut_cli::commands::{cmd_eval, cmd_phantom, cmd_segment, cmd_summary, EvalArgs};
use polarcut_cli::CliError;

#[derive(Parser)]
#[command(
    name = "polarcut",
    version,
    about = "Seeded 3D segmentation by minimum cuts on a spherical ray graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a volume as described by a JSON job file.
    Segment {
        #[arg(long)]
        config: PathBuf,
        /// Seeds in the job file are voxel indices rather than millimeters.
        #[arg(long)]
        voxel_coords: bool,
    },
    /// Compare a mask against a reference mask.
    Eval {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        r: PathBuf,
        /// Append a case row to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Semi-automatic result for the CSV row (defaults to --a).
        #[arg(long)]
        semi: Option<PathBuf>,
        /// Case id for the CSV row (defaults to the file stem of --a).
        #[arg(long)]
        case: Option<String>,
    },
    /// Summarize a CSV of case rows (min, max, mean, standard deviation).
    Summary {
        #[arg(long)]
        csv: PathBuf,
    },
    /// Write a synthetic volume and its ground-truth mask.
    Phantom {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Answer 409 to segment requests on a busy session instead of
        /// queueing them.
        #[arg(long)]
        no_queue: bool,
    },
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Segment {
            config,
            voxel_coords,
        } => print_json(&cmd_segment(&config, voxel_coords)?),
        Command::Eval {
            a,
            r,
            csv,
            semi,
            case,
        } => {
            let report = cmd_eval(&EvalArgs {
                a: &a,
                r: &r,
                semi: semi.as_deref(),
                csv: csv.as_deref(),
                case: case.as_deref(),
            })?;
            print!("{}", report.to_text());
        }
        Command::Summary { csv } => print!("{}", cmd_summary(&csv)?.to_text()),
        Command::Phantom { spec, out } => print_json(&cmd_phantom(&spec, &out)?),
        Command::Serve {
            host,
            port,
            no_queue,
        } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Usage(e.to_string()))?;
            rt.block_on(polarcut_cli::api::serve(&host, port, !no_queue))
                .map_err(|e| CliError::Usage(format!("server failed: {e}")))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
