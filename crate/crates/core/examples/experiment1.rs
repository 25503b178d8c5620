//! Zero-drift channels at rates 10, 27 and 50. Outputs go to the directory
//! given as the first argument (default `out/experiment1`).

use std::path::PathBuf;

use poisson_gradflow::experiment::{preset, run_experiment};

fn main() -> poisson_gradflow::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "out/experiment1".into());
    let report = run_experiment(&preset("experiment1")?, &out)?;
    print!("{}", std::fs::read_to_string(out.join("summary.txt"))?);
    println!("lambda_s = {:.2}", report.certificate.lambda_s);
    Ok(())
}
