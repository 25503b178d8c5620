//! Fixed-step integration of ODEs driven by independent Poisson counting
//! processes.
//!
//! A system is a drift vector field plus one jump map per channel. Event
//! times are sampled exactly (exponential inter-arrival gaps) and the Euler
//! step containing an event is split at the event instant, so the jump law is
//! exact and only the continuous flow is discretised.
//!
//! ```
//! use poisson_gradflow::jump::{integrate_path, EventStream, FnSystem, PathConfig};
//!
//! // dz = -z dN with a single event at t = 0.5
//! let sys = FnSystem::new(1, vec![1.0], |_t, _x, dx| dx[0] = 0.0, |_c, _t, x| x[0] = 0.0);
//! let stream = EventStream::from_times(0, 1.0, 0.0, 1.0, vec![0.5]).unwrap();
//! let cfg = PathConfig::new(0.0, 1.0, 0.1, 7).unwrap();
//! let path = integrate_path(&sys, &[stream], &cfg, &[7.0]).unwrap();
//! assert_eq!(path.states[4][0], 7.0);
//! assert_eq!(path.states[5][0], 0.0);
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A system of the form `dx = f(t, x) dt + sum_c g_c(x) dN_c`.
pub trait JumpSystem {
    /// State dimension.
    fn dim(&self) -> usize;

    /// Number of independent Poisson channels.
    fn channel_count(&self) -> usize;

    /// Poisson intensity of `channel`.
    fn channel_rate(&self, channel: usize) -> f64;

    /// Writes `f(t, x)` into `dx`.
    fn drift(&self, t: f64, x: &[f64], dx: &mut [f64]);

    /// Replaces the pre-jump state `x(t-)` by `x(t-) + g_c(x(t-))`.
    fn apply_jump(&self, channel: usize, t: f64, x: &mut [f64]);
}

/// Closure-backed [`JumpSystem`], handy for tests and small scalar models.
pub struct FnSystem<F, G> {
    dim: usize,
    rates: Vec<f64>,
    drift: F,
    jump: G,
}

impl<F, G> FnSystem<F, G>
where
    F: Fn(f64, &[f64], &mut [f64]),
    G: Fn(usize, f64, &mut [f64]),
{
    pub fn new(dim: usize, rates: Vec<f64>, drift: F, jump: G) -> Self {
        Self {
            dim,
            rates,
            drift,
            jump,
        }
    }
}

impl<F, G> JumpSystem for FnSystem<F, G>
where
    F: Fn(f64, &[f64], &mut [f64]),
    G: Fn(usize, f64, &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn channel_count(&self) -> usize {
        self.rates.len()
    }

    fn channel_rate(&self, channel: usize) -> f64 {
        self.rates[channel]
    }

    fn drift(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (self.drift)(t, x, dx)
    }

    fn apply_jump(&self, channel: usize, t: f64, x: &mut [f64]) {
        (self.jump)(channel, t, x)
    }
}

/// How jump instants interact with the integration grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpTiming {
    /// Split the Euler step at each exact event time.
    #[default]
    Exact,
    /// Take the full grid step, then apply every event that fell inside it.
    Grid,
}

/// Event times of one Poisson channel on `(t0, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    pub channel_id: usize,
    pub rate: f64,
    pub t0: f64,
    pub t_end: f64,
    pub times: Vec<f64>,
}

impl EventStream {
    /// Regenerates the stream deterministically from `(seed, channel_id)`.
    ///
    /// Each channel draws from its own ChaCha stream, so adding channels does
    /// not perturb the event times of existing ones.
    pub fn generate(seed: u64, channel_id: usize, rate: f64, t0: f64, t_end: f64) -> Result<Self> {
        let mut rng = channel_rng(seed, channel_id);
        sample_jump_times(channel_id, rate, t0, t_end, &mut rng)
    }

    /// Wraps explicit event times after checking ordering and range.
    pub fn from_times(
        channel_id: usize,
        rate: f64,
        t0: f64,
        t_end: f64,
        times: Vec<f64>,
    ) -> Result<Self> {
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("event times must be strictly increasing"));
        }
        if times.iter().any(|&t| t < t0 || t > t_end) {
            return Err(Error::invalid(format!("event times must lie in [{t0}, {t_end}]")));
        }
        Ok(Self {
            channel_id,
            rate,
            t0,
            t_end,
            times,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// The RNG used for a channel's event times under a given path seed.
pub fn channel_rng(seed: u64, channel_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channel_id as u64);
    rng
}

/// Samples a Poisson process of intensity `rate` on `(t0, t_end]`.
pub fn sample_jump_times<R: Rng + ?Sized>(
    channel_id: usize,
    rate: f64,
    t0: f64,
    t_end: f64,
    rng: &mut R,
) -> Result<EventStream> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid(format!("rate must be positive and finite, got {rate}")));
    }
    if !(t_end > t0) {
        return Err(Error::invalid(format!("empty interval: t_end = {t_end} <= t0 = {t0}")));
    }
    let gap = Exp::new(rate).map_err(|e| Error::invalid(e.to_string()))?;
    let mut times = Vec::with_capacity((rate * (t_end - t0) * 1.2) as usize + 4);
    let mut t = t0;
    loop {
        t += gap.sample(rng);
        if t > t_end {
            break;
        }
        // an exponential draw of exactly zero would repeat a time
        if times.last().is_some_and(|&last| t <= last) || t <= t0 {
            continue;
        }
        times.push(t);
    }
    Ok(EventStream {
        channel_id,
        rate,
        t0,
        t_end,
        times,
    })
}

/// Time span, step and seed of one sample path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub t0: f64,
    pub horizon: f64,
    pub step: f64,
    pub seed: u64,
    #[serde(default)]
    pub timing: JumpTiming,
}

impl PathConfig {
    pub fn new(t0: f64, horizon: f64, step: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            t0,
            horizon,
            step,
            seed,
            timing: JumpTiming::Exact,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_timing(mut self, timing: JumpTiming) -> Self {
        self.timing = timing;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.step > self.horizon {
            return Err(Error::invalid(format!(
                "step {} exceeds horizon {}",
                self.step, self.horizon
            )));
        }
        if !self.t0.is_finite() {
            return Err(Error::invalid("t0 must be finite"));
        }
        Ok(())
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.horizon
    }

    /// Uniform output grid `t0, t0 + h, ...`, closed by `t0 + horizon`.
    pub fn grid(&self) -> Vec<f64> {
        let ratio = self.horizon / self.step;
        let steps = ((ratio - 1e-9).ceil() as usize).max(1);
        let mut grid: Vec<f64> = (0..steps).map(|k| self.t0 + k as f64 * self.step).collect();
        grid.push(self.t_end());
        grid
    }
}

/// A recorded sample path on the output grid (right-continuous values).
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub grid: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub events: Vec<EventStream>,
}

/// Draws one event stream per channel of `system` for the path seed.
pub fn generate_streams<S: JumpSystem + ?Sized>(
    system: &S,
    config: &PathConfig,
) -> Result<Vec<EventStream>> {
    (0..system.channel_count())
        .map(|c| {
            EventStream::generate(config.seed, c, system.channel_rate(c), config.t0, config.t_end())
        })
        .collect()
}

/// Integrates `system` with the given event streams and stores every grid
/// state.
pub fn integrate_path<S: JumpSystem + ?Sized>(
    system: &S,
    streams: &[EventStream],
    config: &PathConfig,
    x0: &[f64],
) -> Result<SamplePath> {
    let mut grid = Vec::new();
    let mut states = Vec::new();
    integrate_with(system, streams, config, x0, |t, x| {
        grid.push(t);
        states.push(x.to_vec());
    })?;
    Ok(SamplePath {
        grid,
        states,
        events: streams.to_vec(),
    })
}

/// Samples streams from `config.seed` and integrates.
pub fn simulate_path<S: JumpSystem + ?Sized>(
    system: &S,
    config: &PathConfig,
    x0: &[f64],
) -> Result<SamplePath> {
    let streams = generate_streams(system, config)?;
    integrate_path(system, &streams, config, x0)
}

/// Integration driver: calls `observe(t, x)` at every grid point, including
/// the initial one.
pub fn integrate_with<S, O>(
    system: &S,
    streams: &[EventStream],
    config: &PathConfig,
    x0: &[f64],
    mut observe: O,
) -> Result<()>
where
    S: JumpSystem + ?Sized,
    O: FnMut(f64, &[f64]),
{
    config.validate()?;
    let dim = system.dim();
    if x0.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, system dimension is {dim}",
            x0.len()
        )));
    }
    let t_end = config.t_end();
    for s in streams {
        if s.channel_id >= system.channel_count() {
            return Err(Error::invalid(format!("stream for unknown channel {}", s.channel_id)));
        }
        if s.times.iter().any(|&t| t < config.t0 || t > t_end) {
            return Err(Error::invalid(format!(
                "channel {} has events outside [{}, {t_end}]",
                s.channel_id, config.t0
            )));
        }
    }

    let events = merge_events(streams);
    let grid = config.grid();

    let mut x = x0.to_vec();
    let mut dx = vec![0.0; dim];
    let mut t = config.t0;
    let mut next = 0usize;

    // events sitting exactly on t0 take effect before the first sample
    while next < events.len() && events[next].0 <= t {
        system.apply_jump(events[next].1, events[next].0, &mut x);
        next += 1;
    }
    check_finite(&x, t)?;
    observe(t, &x);

    for &t_next in &grid[1..] {
        match config.timing {
            JumpTiming::Exact => {
                while next < events.len() && events[next].0 <= t_next {
                    let (te, channel) = events[next];
                    euler_step(system, t, te - t, &mut x, &mut dx);
                    t = te;
                    system.apply_jump(channel, te, &mut x);
                    check_finite(&x, t)?;
                    next += 1;
                }
                euler_step(system, t, t_next - t, &mut x, &mut dx);
            }
            JumpTiming::Grid => {
                euler_step(system, t, t_next - t, &mut x, &mut dx);
                while next < events.len() && events[next].0 <= t_next {
                    system.apply_jump(events[next].1, t_next, &mut x);
                    next += 1;
                }
            }
        }
        t = t_next;
        check_finite(&x, t)?;
        observe(t, &x);
    }
    Ok(())
}

/// All events sorted by time; ties resolved by ascending channel id.
fn merge_events(streams: &[EventStream]) -> Vec<(f64, usize)> {
    let mut events: Vec<(f64, usize)> = streams
        .iter()
        .flat_map(|s| s.times.iter().map(move |&t| (t, s.channel_id)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    events
}

fn euler_step<S: JumpSystem + ?Sized>(system: &S, t: f64, h: f64, x: &mut [f64], dx: &mut [f64]) {
    if h <= 0.0 {
        return;
    }
    system.drift(t, x, dx);
    for (xi, di) in x.iter_mut().zip(dx.iter()) {
        *xi += h * di;
    }
}

fn check_finite(x: &[f64], time: f64) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { time })
    }
}
