//! Monte-Carlo ensemble of the distributed flow with CSV output on stdout.

use std::sync::Arc;

use poisson_gradflow::channel::DriftSchedule;
use poisson_gradflow::jump::PathConfig;
use poisson_gradflow::montecarlo::{
    fit_decay_rate, plateau_level, run_ensemble, write_trajectories_csv, CsvOptions, EnsembleConfig,
};
use poisson_gradflow::network::{assemble_distributed_system, uniform_channels};
use poisson_gradflow::problem::reference_problem;

fn main() -> poisson_gradflow::Result<()> {
    let channels = uniform_channels(3, 27.0, DriftSchedule::Constant(0.0))?;
    let system = assemble_distributed_system(Arc::new(reference_problem()), &channels)?;
    let x0 = system.default_initial_state(1.5);
    let cfg = EnsembleConfig::new(200, PathConfig::new(0.0, 5.0, 0.05, 0)?, 11)?.with_kept_paths(2);
    let stats = run_ensemble(&system, &x0, &cfg, |_t, x| system.lyapunov(x))?;
    eprintln!("fitted decay on [1, 5]: {:.4}", fit_decay_rate(&stats, (1.0, 5.0))?);
    eprintln!("plateau (last 20%): {:.3e}", plateau_level(&stats, 0.2)?);
    eprintln!("jensen: {:?}", stats.jensen);
    let opts = CsvOptions {
        include_sem: true,
        ..Default::default()
    };
    write_trajectories_csv(std::io::stdout().lock(), &stats, &opts)
}
