use poisson_gradflow::jump::{
    channel_rng, integrate_path, sample_jump_times, simulate_path, EventStream, FnSystem, JumpTiming, PathConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn poisson_count_mean_and_variance() {
    let reps = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let counts: Vec<f64> = (0..reps)
        .map(|_| sample_jump_times(0, 10.0, 0.0, 1.0, &mut rng).unwrap().times.len() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (reps - 1) as f64;
    assert!((9.9..=10.1).contains(&mean), "mean {mean}");
    assert!((var - 10.0).abs() < 0.3, "variance {var}");
}

#[test]
fn inter_arrival_times_are_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = sample_jump_times(0, 4.0, 0.0, 5000.0, &mut rng).unwrap();
    let gaps: Vec<f64> = s.times.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!((mean - 0.25).abs() < 0.01, "{mean}");
    // P(gap > 1/rate) = e^{-1}
    let tail = gaps.iter().filter(|g| **g > 0.25).count() as f64 / gaps.len() as f64;
    assert!((tail - (-1.0f64).exp()).abs() < 0.015, "{tail}");
}

#[test]
fn channel_streams_are_independent_of_each_other() {
    let a = EventStream::generate(42, 0, 5.0, 0.0, 10.0).unwrap();
    let b = EventStream::generate(42, 1, 5.0, 0.0, 10.0).unwrap();
    let a2 = EventStream::generate(42, 0, 5.0, 0.0, 10.0).unwrap();
    assert_eq!(a, a2);
    assert_ne!(a.times, b.times);
    let mut r1 = channel_rng(1, 3);
    let mut r2 = channel_rng(1, 3);
    assert_eq!(
        sample_jump_times(3, 1.0, 0.0, 20.0, &mut r1).unwrap(),
        sample_jump_times(3, 1.0, 0.0, 20.0, &mut r2).unwrap()
    );
}

fn decay() -> FnSystem<impl Fn(f64, &[f64], &mut [f64]), impl Fn(usize, f64, &mut [f64])> {
    FnSystem::new(1, vec![], |_t: f64, x: &[f64], dx: &mut [f64]| dx[0] = -x[0], |_c: usize, _t: f64, _x: &mut [f64]| {})
}

#[test]
fn euler_converges_at_first_order() {
    let sys = decay();
    let err = |h: f64| {
        let cfg = PathConfig::new(0.0, 1.0, h, 0).unwrap();
        let p = simulate_path(&sys, &cfg, &[1.0]).unwrap();
        (p.states.last().unwrap()[0] - (-1.0f64).exp()).abs()
    };
    let (e1, e2, e3) = (err(0.01), err(0.005), err(0.0025));
    let o1 = (e1 / e2).log2();
    let o2 = (e2 / e3).log2();
    assert!((o1 - 1.0).abs() < 0.05 && (o2 - 1.0).abs() < 0.05, "{o1} {o2}");
}

#[test]
fn exact_timing_splits_steps_at_events() {
    // x' = 1, jump resets to 0: value at grid point is time since last event
    let sys = FnSystem::new(
        1,
        vec![1.0],
        |_t: f64, _x: &[f64], dx: &mut [f64]| dx[0] = 1.0,
        |_c: usize, _t: f64, x: &mut [f64]| x[0] = 0.0,
    );
    let cfg = PathConfig::new(0.0, 1.0, 0.1, 0).unwrap();
    let s = EventStream::from_times(0, 1.0, 0.0, 1.0, vec![0.25]).unwrap();
    let exact = integrate_path(&sys, &[s.clone()], &cfg, &[0.0]).unwrap();
    assert!((exact.states[3][0] - 0.05).abs() < 1e-12);
    assert!((exact.states[10][0] - 0.75).abs() < 1e-12);
    let grid = integrate_path(&sys, &[s], &cfg.with_timing(JumpTiming::Grid), &[0.0]).unwrap();
    assert!(grid.states[3][0].abs() < 1e-12);
}

#[test]
fn simultaneous_events_apply_in_channel_order() {
    let sys = FnSystem::new(
        1,
        vec![1.0, 1.0],
        |_t: f64, _x: &[f64], dx: &mut [f64]| dx[0] = 0.0,
        |c: usize, _t: f64, x: &mut [f64]| x[0] = x[0] * 10.0 + c as f64 + 1.0,
    );
    let cfg = PathConfig::new(0.0, 1.0, 0.5, 0).unwrap();
    let s0 = EventStream::from_times(0, 1.0, 0.0, 1.0, vec![0.3]).unwrap();
    let s1 = EventStream::from_times(1, 1.0, 0.0, 1.0, vec![0.3]).unwrap();
    // channel 0 first: (0*10+1)*10+2 = 12
    let p = integrate_path(&sys, &[s1, s0], &cfg, &[0.0]).unwrap();
    assert_eq!(p.states.last().unwrap()[0], 12.0);
}

#[test]
fn no_events_reduces_to_ode() {
    let sys = FnSystem::new(
        1,
        vec![1e-9],
        |_t: f64, x: &[f64], dx: &mut [f64]| dx[0] = -x[0],
        |_c: usize, _t: f64, x: &mut [f64]| x[0] = 100.0,
    );
    let cfg = PathConfig::new(0.0, 1.0, 0.01, 3).unwrap();
    let empty = EventStream::from_times(0, 1e-9, 0.0, 1.0, vec![]).unwrap();
    let with_jump = integrate_path(&sys, &[empty], &cfg, &[1.0]).unwrap();
    let ode = simulate_path(&decay(), &cfg, &[1.0]).unwrap();
    assert_eq!(with_jump.states, ode.states);
}

#[test]
fn grid_has_expected_length() {
    let cfg = PathConfig::new(0.0, 10.0, 0.01, 0).unwrap();
    let g = cfg.grid();
    assert_eq!(g.len(), 1001);
    assert_eq!(*g.last().unwrap(), 10.0);
    assert!(PathConfig::new(0.0, 1.0, 0.0, 0).is_err());
    assert!(PathConfig::new(0.0, -1.0, 0.1, 0).is_err());
}
