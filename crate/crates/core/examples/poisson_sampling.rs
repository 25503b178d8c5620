//! Exponential inter-arrival sampling of one channel's event times.

use poisson_gradflow::jump::{channel_rng, sample_jump_times, EventStream};

fn main() -> poisson_gradflow::Result<()> {
    let stream = EventStream::generate(7, 0, 10.0, 0.0, 1.0)?;
    println!("rate 10 on [0, 1]: {} events", stream.len());
    for t in &stream.times {
        println!("  t = {t:.4}");
    }

    let mut rng = channel_rng(7, 1);
    let reps = 20_000;
    let total: usize = (0..reps)
        .map(|_| sample_jump_times(1, 10.0, 0.0, 1.0, &mut rng).map(|s| s.len()))
        .sum::<poisson_gradflow::Result<usize>>()?;
    println!("mean count over {reps} replications: {:.4}", total as f64 / reps as f64);
    Ok(())
}
