//! Rate certificates for the reference problem under both conventions.

use std::sync::Arc;

use poisson_gradflow::channel::DriftSchedule;
use poisson_gradflow::network::{assemble_distributed_system, uniform_channels};
use poisson_gradflow::problem::reference_problem;
use poisson_gradflow::stability::{certified_decay_rate, sufficient_rates, RateConvention, RateOptions};

fn main() -> poisson_gradflow::Result<()> {
    let problem = Arc::new(reference_problem());
    let lmin = problem.min_eigenvalue();
    for a in [0.0, 1.0] {
        let channels = uniform_channels(3, 50.0, DriftSchedule::Constant(a))?;
        let system = assemble_distributed_system(Arc::clone(&problem), &channels)?;
        let opts = RateOptions::uniform(3, 1.0).with_beta(0.5 * lmin);
        let cert = sufficient_rates(&system, &opts)?;
        println!("drift a = {a}");
        print!("{cert}");
        let bound = opts.clone().with_convention(RateConvention::NormBound);
        match certified_decay_rate(&system, 400.0, &bound)? {
            Some(b) => println!("  rate 400 certifies decay {b:.4} (norm bound)\n"),
            None => println!("  rate 400 certifies no decay (norm bound)\n"),
        }
    }
    Ok(())
}
