use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phonon_gauge_cli::{
    parse_config, preset_document, run_to_directory, Experiment, Format, OUTPUT_DIR_ENV,
};

#[derive(Parser)]
#[command(
    name = "phonon-gauge",
    version,
    about = "Photon-assisted phonon tunneling simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; `PHONON_GAUGE_OUTPUT_DIR` takes precedence.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Worker threads for sweeps; defaults to the available cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List presets or print one as a configuration document.
    Preset {
        #[arg(long)]
        list: bool,
        /// Preset to print.
        name: Option<String>,
    },
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn simulate(
    config: PathBuf,
    out: Option<PathBuf>,
    format: Option<Format>,
    jobs: Option<usize>,
) -> ExitCode {
    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => return fail(1, format!("cannot read {}: {e}", config.display())),
    };
    let parsed = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            return fail(
                1,
                format!("invalid configuration {}\n{errors}", config.display()),
            )
        }
    };
    let dir = std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .or(out)
        .or_else(|| parsed.directory.clone());
    let Some(dir) = dir else {
        return fail(
            1,
            format!("no output directory: pass --out, set output.directory or {OUTPUT_DIR_ENV}"),
        );
    };
    let format = format.or(parsed.format).unwrap_or_default();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => return fail(2, format!("cannot start worker pool: {e}")),
    };
    match pool.install(|| run_to_directory(&parsed, format, &dir)) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.exit_code(), e),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Simulate {
            config,
            out,
            format,
            jobs,
        } => simulate(config, out, format, jobs),
        Command::Preset { list, name } => match (list, name) {
            (_, Some(name)) => match Experiment::from_name(&name) {
                Some(e) => {
                    print!("{}", preset_document(e));
                    ExitCode::SUCCESS
                }
                None => fail(1, format!("unknown preset \"{name}\"")),
            },
            _ => {
                for e in Experiment::ALL {
                    println!("{:<24}{}", e.name(), e.description());
                }
                ExitCode::SUCCESS
            }
        },
    }
}
