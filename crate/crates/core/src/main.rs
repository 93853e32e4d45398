use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bergman::cli::{self, RunConfig};

/// Weighted Bergman/Besov norm experiments driven by a JSON config.
#[derive(Parser)]
#[command(name = "bergman", version, disable_help_subcommand = true)]
struct Args {
    /// Path to the JSON config, or '-' for stdin.
    #[arg(long)]
    config: String,

    /// Output directory for report.json / rows.csv / plot.svg.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Cap on internal parallelism (0 = let the runtime decide).
    #[arg(long, default_value_t = 0)]
    workers: usize,

    /// Omit timestamps so identical configs produce identical bytes.
    #[arg(long)]
    reproducible: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.workers > 0 {
        // ignore the error if a pool already exists (tests call main twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(args.workers)
            .build_global();
    }
    let config_text = match read_config(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let config = match RunConfig::from_json(&config_text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match cli::run(&config, &args.out, args.reproducible) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}

fn read_config(spec: &str) -> std::io::Result<String> {
    if spec == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        std::fs::read_to_string(spec)
    }
}
