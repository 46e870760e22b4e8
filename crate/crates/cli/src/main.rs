use std::io;
use std::process::ExitCode;

use halpha_cli::{parse_config, run_and_report, CliError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let plan = match parse_config(std::env::args_os()) {
        Ok(plan) => plan,
        Err(CliError::Clap(e)) => e.exit(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if plan.seed_generated {
        eprintln!("no --seed given; using seed {}", plan.config.master_seed);
    }

    match run_and_report(&plan, &mut io::stdout().lock()) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
