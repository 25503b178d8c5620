//! Amplifying channels (a = 1) at rates 26 and 51: practical stability with
//! a plateau that shrinks as the rate grows.

use std::path::PathBuf;

use poisson_gradflow::experiment::{preset, run_experiment};

fn main() -> poisson_gradflow::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "out/experiment2".into());
    let report = run_experiment(&preset("experiment2")?, &out)?;
    for run in &report.runs {
        println!("rate {:?}: plateau {:.4e}", run.rate, run.plateau);
    }
    Ok(())
}
