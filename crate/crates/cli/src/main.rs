use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use optomech::presets::Preset;
use optomech_cli::output::Format;
use optomech_cli::{run, Command, RunConfig};

#[derive(Parser)]
#[command(
    name = "optomech",
    version,
    about = "Linearized cavity / mirror / sphere optomechanics"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Configuration file.
    #[arg(short, long, global = true)]
    input: Option<PathBuf>,

    /// Directory for output files.
    #[arg(short, long, global = true, default_value = "out")]
    output_dir: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Built-in parameter set: fig2, fig3 or fig4.
    #[arg(long, global = true, value_parser = parse_preset)]
    preset: Option<Preset>,

    /// Worker threads for sweeps; does not change results.
    #[arg(long, global = true, env = "OPTOMECH_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive the dimensionless model from lab parameters.
    Derive,
    /// Classical mean-field steady state(s).
    Steady,
    /// Drift, diffusion, spectrum and stationary covariance.
    Linear,
    /// Power, squeezing or landscape sweep.
    Sweep,
    /// Intracavity field profile and pumping geometries.
    Geometry,
    /// Cross-check the covariance solvers.
    Validate {
        /// Random systems per family (model-built and generic).
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: optomech::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    let (command, cases, seed) = match cli.command {
        Cmd::Derive => (Command::Derive, 0, 0),
        Cmd::Steady => (Command::Steady, 0, 0),
        Cmd::Linear => (Command::Linear, 0, 0),
        Cmd::Sweep => (Command::Sweep, 0, 0),
        Cmd::Geometry => (Command::Geometry, 0, 0),
        Cmd::Validate { cases, seed } => (Command::Validate, cases, seed),
    };
    let rc = RunConfig {
        command,
        input: cli.input,
        output_dir: cli.output_dir,
        format: cli.format,
        preset: cli.preset,
        cases,
        seed,
    };
    match run(&rc) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
