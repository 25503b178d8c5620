//! Generator terms at a random point and the quadratic upper bound.

use std::sync::Arc;

use poisson_gradflow::channel::DriftSchedule;
use poisson_gradflow::network::{assemble_distributed_system, uniform_channels};
use poisson_gradflow::problem::reference_problem;
use poisson_gradflow::stability::{assemble_m, gamma_prime, generator_terms, lyapunov_v};

fn main() -> poisson_gradflow::Result<()> {
    let channels = uniform_channels(3, 30.0, DriftSchedule::Constant(0.8))?;
    let system = assemble_distributed_system(Arc::new(reference_problem()), &channels)?;
    let state: Vec<f64> = (0..18).map(|k| ((k * 7 % 5) as f64 - 2.0) * 0.4).collect();
    let s = system.error_coordinates(&state);
    let terms = generator_terms(&system, &s, 0.0);
    println!("V = {:.4}", lyapunov_v(&s));
    for (k, w) in terms.w.iter().enumerate() {
        println!("  W{} = {w:+.4}", k + 1);
    }
    println!("L V = {:.4}", terms.total());
    for rho in [0.1, 1.0, 10.0] {
        let rho = vec![rho; 3];
        let m = assemble_m(&system, &rho, 0.0)?;
        let bound = m.quadratic_form(&s.stacked()) + gamma_prime(&system, &rho);
        println!("rho = {:5.1}: -s^T M s + gamma' = {bound:.4}", rho[0]);
    }
    Ok(())
}
