//! Centralised gradient flow on the reference problem and its decay rate.

use std::sync::Arc;

use poisson_gradflow::jump::{simulate_path, PathConfig};
use poisson_gradflow::montecarlo::fit_decay_rate_series;
use poisson_gradflow::network::NominalFlow;
use poisson_gradflow::problem::reference_problem;

fn main() -> poisson_gradflow::Result<()> {
    let problem = Arc::new(reference_problem());
    let y_star = problem.optimal_solution()?;
    let flow = NominalFlow::new(Arc::clone(&problem));
    let x0: Vec<f64> = y_star.iter().map(|y| y + 0.5).collect();
    let path = simulate_path(&flow, &PathConfig::new(0.0, 10.0, 0.01, 0)?, &x0)?;
    let v: Vec<f64> = path
        .states
        .iter()
        .map(|x| x.iter().zip(y_star.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
        .collect();
    let rate = fit_decay_rate_series(&path.grid, &v, (5.0, 10.0))?;
    println!("y* = {:?}", y_star.as_slice());
    println!("late decay of |x - y*|^2: {rate:.4}; 2 lambda_min(Q) = {:.4}", 2.0 * problem.min_eigenvalue());
    Ok(())
}
