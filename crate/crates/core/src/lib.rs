//! Distributed gradient flow over Poisson-sampled communication channels.
//!
//! Each agent runs a gradient flow on its block of a quadratic objective
//! using held copies of the other agents' states; every directed channel
//! refreshes its copy at the events of an independent Poisson process. The
//! crate simulates the resulting jump SDE, analyses it with a quadratic
//! Lyapunov function, certifies sufficient communication rates, and runs
//! seeded Monte-Carlo experiments.
//!
//! ```
//! use std::sync::Arc;
//! use poisson_gradflow::{problem::reference_problem, channel::DriftSchedule};
//! use poisson_gradflow::network::{assemble_distributed_system, uniform_channels};
//! use poisson_gradflow::stability::{sufficient_rates, RateOptions};
//!
//! let problem = Arc::new(reference_problem());
//! let channels = uniform_channels(3, 50.0, DriftSchedule::Constant(0.0)).unwrap();
//! let system = assemble_distributed_system(problem, &channels).unwrap();
//! let cert = sufficient_rates(&system, &RateOptions::uniform(3, 1.0)).unwrap();
//! assert!((cert.lambda_s - 26.56).abs() < 0.01);
//! ```

pub mod channel;
pub mod error;
pub mod experiment;
pub mod jump;
pub mod linalg;
pub mod montecarlo;
pub mod network;
pub mod problem;
pub mod stability;

pub use error::{Error, Result};
