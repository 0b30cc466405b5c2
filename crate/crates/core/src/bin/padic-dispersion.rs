use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use padic_dispersion::harness::{execute, exit_code, JobConfig};

fn main() -> ExitCode {
    let cfg = JobConfig::parse();
    match execute(&cfg) {
        Ok(bytes) => {
            if cfg.out.is_none() {
                let mut out = std::io::stdout().lock();
                if out.write_all(&bytes).is_err() {
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
