//! Running a job config programmatically and printing its JSON.

use padic_dispersion::harness::{emit, run, Format, JobConfig};

fn main() {
    let cfg = JobConfig::from_args(["newton", "--prime", "3", "--poly", "x1^2+x2^3"]).expect("valid arguments");
    match run(&cfg) {
        Ok(report) => print!("{}", String::from_utf8_lossy(&emit(&report, Format::Json).unwrap())),
        Err(e) => eprintln!("error: {e}"),
    }
}
