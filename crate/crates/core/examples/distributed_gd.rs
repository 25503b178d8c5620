//! One sample path of the distributed flow: every agent converges to its
//! block of the optimizer.

use std::sync::Arc;

use poisson_gradflow::channel::DriftSchedule;
use poisson_gradflow::jump::{simulate_path, PathConfig};
use poisson_gradflow::network::{assemble_distributed_system, uniform_channels};
use poisson_gradflow::problem::reference_problem;

fn main() -> poisson_gradflow::Result<()> {
    let rate: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50.0);
    let channels = uniform_channels(3, rate, DriftSchedule::Constant(0.0))?;
    let system = assemble_distributed_system(Arc::new(reference_problem()), &channels)?;
    let x0 = system.default_initial_state(1.5);
    let path = simulate_path(&system, &PathConfig::new(0.0, 10.0, 0.01, 42)?, &x0)?;
    let events: usize = path.events.iter().map(|e| e.len()).sum();
    println!("rate {rate}: {events} channel events");
    for k in (0..path.grid.len()).step_by(200) {
        let x = &path.states[k];
        println!("t = {:5.2}  V = {:.3e}  x = {:?}", path.grid[k], system.lyapunov(x), &x[..6]);
    }
    println!("y* = {:?}", system.y_star());
    Ok(())
}
