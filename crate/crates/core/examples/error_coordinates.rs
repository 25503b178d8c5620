//! The original and optimizer-shifted systems, driven by the same events,
//! produce the same Lyapunov trajectory.

use std::sync::Arc;

use poisson_gradflow::channel::DriftSchedule;
use poisson_gradflow::jump::{generate_streams, integrate_path, PathConfig};
use poisson_gradflow::network::{assemble_distributed_system, assemble_error_system, uniform_channels};
use poisson_gradflow::problem::reference_problem;

fn main() -> poisson_gradflow::Result<()> {
    let problem = Arc::new(reference_problem());
    let channels = uniform_channels(3, 26.0, DriftSchedule::Constant(1.0))?;
    let orig = assemble_distributed_system(Arc::clone(&problem), &channels)?;
    let err = assemble_error_system(problem, &channels)?;
    let cfg = PathConfig::new(0.0, 5.0, 0.01, 1)?;
    let streams = generate_streams(&orig, &cfg)?;
    let x0 = orig.default_initial_state(1.5);
    let a = integrate_path(&orig, &streams, &cfg, &x0)?;
    let b = integrate_path(&err, &streams, &cfg, &err.shift(&x0))?;
    let worst = a
        .states
        .iter()
        .zip(&b.states)
        .map(|(x, s)| (orig.lyapunov(x) - err.lyapunov(s)).abs())
        .fold(0.0, f64::max);
    println!("max |V_orig - V_err| over the path: {worst:.3e}");
    let s = orig.error_coordinates(a.states.last().unwrap());
    println!("final x~ = {:?}", s.x_tilde);
    Ok(())
}
