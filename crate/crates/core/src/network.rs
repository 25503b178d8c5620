//! Coupled agent/channel system of the distributed gradient flow, the
//! centralised reference flow, and the optimizer-shifted error system.
//!
//! State layout for both the original and error systems: the `d` agent
//! coordinates first (blocks in agent order), then one block of length `d_j`
//! per channel `(j, i)` in ascending `(sender, receiver)` order.

use std::sync::Arc;

use nalgebra::DVector;

use crate::channel::{channel_drift_into, ChannelSpec, ChannelState};
use crate::error::{Error, Result};
use crate::jump::JumpSystem;
use crate::problem::{QuadraticProblem, Topology};

/// Index bookkeeping shared by all network-level types.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    partition: Vec<usize>,
    agent_offsets: Vec<usize>,
    edges: Vec<(usize, usize)>,
    edge_offsets: Vec<usize>,
    // edge_lookup[sender * n + receiver]
    edge_lookup: Vec<Option<usize>>,
}

impl NetworkLayout {
    pub fn new(partition: &[usize], topology: &Topology) -> Self {
        let n = partition.len();
        let mut agent_offsets = vec![0];
        for b in partition {
            agent_offsets.push(agent_offsets.last().unwrap() + b);
        }
        let d = *agent_offsets.last().unwrap();
        let edges: Vec<(usize, usize)> = topology.edges().collect();
        let mut edge_offsets = vec![d];
        let mut edge_lookup = vec![None; n * n];
        for (c, &(j, i)) in edges.iter().enumerate() {
            edge_offsets.push(edge_offsets.last().unwrap() + partition[j]);
            edge_lookup[j * n + i] = Some(c);
        }
        Self {
            partition: partition.to_vec(),
            agent_offsets,
            edges,
            edge_offsets,
            edge_lookup,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.partition.len()
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn agent_dim(&self) -> usize {
        self.agent_offsets[self.agent_count()]
    }

    /// Stacked dimension `d + sum_(j,i) d_j`.
    pub fn total_dim(&self) -> usize {
        *self.edge_offsets.last().unwrap()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, sender: usize, receiver: usize) -> Option<usize> {
        self.edge_lookup[sender * self.agent_count() + receiver]
    }

    pub fn agent_range(&self, i: usize) -> std::ops::Range<usize> {
        self.agent_offsets[i]..self.agent_offsets[i + 1]
    }

    /// Range of channel `c` inside the full stacked state.
    pub fn channel_range(&self, c: usize) -> std::ops::Range<usize> {
        self.edge_offsets[c]..self.edge_offsets[c + 1]
    }

    /// Range of channel `c` inside the stacked copy-error vector `e`.
    pub fn error_range(&self, c: usize) -> std::ops::Range<usize> {
        let d = self.agent_dim();
        self.edge_offsets[c] - d..self.edge_offsets[c + 1] - d
    }

    /// Length of the stacked copy-error vector.
    pub fn error_dim(&self) -> usize {
        self.total_dim() - self.agent_dim()
    }
}

/// Agent states plus one held copy per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub agent_states: Vec<Vec<f64>>,
    pub channel_states: Vec<ChannelState>,
}

impl NetworkState {
    pub fn from_slice(layout: &NetworkLayout, state: &[f64]) -> Result<Self> {
        if state.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "state has length {}, layout expects {}",
                state.len(),
                layout.total_dim()
            )));
        }
        Ok(Self {
            agent_states: (0..layout.agent_count())
                .map(|i| state[layout.agent_range(i)].to_vec())
                .collect(),
            channel_states: (0..layout.edge_count())
                .map(|c| ChannelState::new(state[layout.channel_range(c)].to_vec()))
                .collect(),
        })
    }

    pub fn to_vec(&self, layout: &NetworkLayout) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(layout.total_dim());
        if self.agent_states.len() != layout.agent_count()
            || self.channel_states.len() != layout.edge_count()
        {
            return Err(Error::DimensionMismatch("state does not match layout".into()));
        }
        for (i, x) in self.agent_states.iter().enumerate() {
            if x.len() != layout.partition[i] {
                return Err(Error::DimensionMismatch(format!("agent {i} state length {}", x.len())));
            }
            out.extend_from_slice(x);
        }
        for (c, z) in self.channel_states.iter().enumerate() {
            if z.dim() != layout.partition[layout.edges[c].0] {
                return Err(Error::DimensionMismatch(format!("channel {c} state length {}", z.dim())));
            }
            out.extend_from_slice(&z.value);
        }
        Ok(out)
    }

    /// Every channel holds its sender's current state.
    pub fn synchronized(layout: &NetworkLayout, x: &[f64]) -> Self {
        Self {
            agent_states: (0..layout.agent_count())
                .map(|i| x[layout.agent_range(i)].to_vec())
                .collect(),
            channel_states: layout
                .edges()
                .iter()
                .map(|&(j, _)| ChannelState::new(x[layout.agent_range(j)].to_vec()))
                .collect(),
        }
    }
}

/// Optimizer-shifted coordinates: `x~ = x - y*`, `z~ = z - y*_j`,
/// `e = x~_j - z~`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCoordinates {
    pub x_tilde: Vec<f64>,
    pub z_tilde: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
}

impl ErrorCoordinates {
    /// From a stacked original-coordinate state `(x, z)`.
    pub fn from_state(layout: &NetworkLayout, state: &[f64], y_star: &[f64]) -> Self {
        let d = layout.agent_dim();
        let x_tilde: Vec<f64> = state[..d].iter().zip(y_star).map(|(x, y)| x - y).collect();
        Self::from_shifted(layout, &x_tilde, |c| {
            let (j, _) = layout.edges[c];
            state[layout.channel_range(c)]
                .iter()
                .zip(&y_star[layout.agent_range(j)])
                .map(|(z, y)| z - y)
                .collect()
        })
    }

    /// From a stacked error-system state `(x~, z~)`.
    pub fn from_error_state(layout: &NetworkLayout, state: &[f64]) -> Self {
        let d = layout.agent_dim();
        Self::from_shifted(layout, &state[..d], |c| state[layout.channel_range(c)].to_vec())
    }

    pub fn from_network_state(layout: &NetworkLayout, state: &NetworkState, y_star: &[f64]) -> Result<Self> {
        Ok(Self::from_state(layout, &state.to_vec(layout)?, y_star))
    }

    /// From `(x~, e)`; `z~` is recovered as `x~_j - e`.
    pub fn from_errors(layout: &NetworkLayout, x_tilde: Vec<f64>, e: Vec<Vec<f64>>) -> Self {
        let z_tilde = e
            .iter()
            .enumerate()
            .map(|(c, ec)| {
                let (j, _) = layout.edges[c];
                x_tilde[layout.agent_range(j)].iter().zip(ec).map(|(x, e)| x - e).collect()
            })
            .collect();
        Self { x_tilde, z_tilde, e }
    }

    fn from_shifted(layout: &NetworkLayout, x_tilde: &[f64], z_of: impl Fn(usize) -> Vec<f64>) -> Self {
        let mut z_tilde = Vec::with_capacity(layout.edge_count());
        let mut e = Vec::with_capacity(layout.edge_count());
        for c in 0..layout.edge_count() {
            let (j, _) = layout.edges[c];
            let zc = z_of(c);
            e.push(x_tilde[layout.agent_range(j)].iter().zip(&zc).map(|(x, z)| x - z).collect());
            z_tilde.push(zc);
        }
        Self {
            x_tilde: x_tilde.to_vec(),
            z_tilde,
            e,
        }
    }

    /// Back to original coordinates.
    pub fn to_state(&self, layout: &NetworkLayout, y_star: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.x_tilde.iter().zip(y_star).map(|(x, y)| x + y).collect();
        for (c, z) in self.z_tilde.iter().enumerate() {
            let (j, _) = layout.edges[c];
            out.extend(z.iter().zip(&y_star[layout.agent_range(j)]).map(|(z, y)| z + y));
        }
        out
    }

    pub fn to_network_state(&self, layout: &NetworkLayout, y_star: &[f64]) -> Result<NetworkState> {
        NetworkState::from_slice(layout, &self.to_state(layout, y_star))
    }

    /// Stacked error-system state `(x~, z~)`.
    pub fn to_error_state(&self) -> Vec<f64> {
        let mut out = self.x_tilde.clone();
        for z in &self.z_tilde {
            out.extend_from_slice(z);
        }
        out
    }

    /// Stacked `s = (x~, e)`.
    pub fn stacked(&self) -> DVector<f64> {
        let mut v = self.x_tilde.clone();
        for e in &self.e {
            v.extend_from_slice(e);
        }
        DVector::from_vec(v)
    }

    pub fn from_stacked(layout: &NetworkLayout, s: &DVector<f64>) -> Self {
        let d = layout.agent_dim();
        let x_tilde = s.as_slice()[..d].to_vec();
        let e = (0..layout.edge_count())
            .map(|c| {
                let r = layout.error_range(c);
                s.as_slice()[d + r.start..d + r.end].to_vec()
            })
            .collect();
        Self::from_errors(layout, x_tilde, e)
    }
}

/// `dy = -(Q y + q) dt`.
#[derive(Debug, Clone)]
pub struct NominalFlow {
    problem: Arc<QuadraticProblem>,
    q_rows: Vec<f64>,
}

impl NominalFlow {
    pub fn new(problem: Arc<QuadraticProblem>) -> Self {
        let q_rows = row_major(&problem);
        Self { problem, q_rows }
    }

    pub fn problem(&self) -> &QuadraticProblem {
        &self.problem
    }
}

impl JumpSystem for NominalFlow {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn channel_count(&self) -> usize {
        0
    }

    fn channel_rate(&self, channel: usize) -> f64 {
        panic!("nominal flow has no channel {channel}")
    }

    fn drift(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let d = self.dim();
        let q = self.problem.q_vector();
        for r in 0..d {
            let row = &self.q_rows[r * d..(r + 1) * d];
            let mut acc = 0.0;
            for (qrc, yc) in row.iter().zip(y) {
                acc += qrc * yc;
            }
            dy[r] = -(acc + q[r]);
        }
    }

    fn apply_jump(&self, channel: usize, _t: f64, _x: &mut [f64]) {
        panic!("nominal flow has no channel {channel}")
    }
}

fn row_major(problem: &QuadraticProblem) -> Vec<f64> {
    problem.q_matrix().transpose().as_slice().to_vec()
}

/// Shared pieces of the original and error systems.
#[derive(Debug, Clone)]
struct Coupling {
    problem: Arc<QuadraticProblem>,
    channels: Vec<ChannelSpec>,
    layout: NetworkLayout,
    q_rows: Vec<f64>,
    y_star: Vec<f64>,
}

impl Coupling {
    fn build(problem: Arc<QuadraticProblem>, channels: &[ChannelSpec]) -> Result<Self> {
        let n = problem.agent_count();
        for c in channels {
            c.validate()?;
        }
        let topology = Topology::new(n, channels.iter().map(|c| c.edge))?;
        if topology.edge_count() != channels.len() {
            return Err(Error::invalid("duplicate channel specification"));
        }
        if !topology.is_complete() {
            return Err(Error::IncompleteTopology(format!(
                "{} of {} directed channels specified; the distributed flow needs every (j, i), j != i",
                topology.edge_count(),
                n * n.saturating_sub(1)
            )));
        }
        let layout = NetworkLayout::new(problem.partition(), &topology);
        let mut ordered = channels.to_vec();
        ordered.sort_by_key(|c| c.edge);
        let y_star = problem.optimal_solution()?.as_slice().to_vec();
        let q_rows = row_major(&problem);
        Ok(Self {
            problem,
            channels: ordered,
            layout,
            q_rows,
            y_star,
        })
    }

    /// `out_i = -(sum_k Q_ik w_k + bias_i)` where `w_i = x_i` and
    /// `w_k = z_(k,i)` for `k != i`.
    fn agent_drift(&self, state: &[f64], with_offset: bool, out: &mut [f64]) {
        let d = self.layout.agent_dim();
        let n = self.layout.agent_count();
        let q = self.problem.q_vector();
        for i in 0..n {
            for r in self.layout.agent_range(i) {
                let row = &self.q_rows[r * d..(r + 1) * d];
                let mut acc = 0.0;
                for k in 0..n {
                    let cols = self.layout.agent_range(k);
                    let w = if k == i {
                        &state[cols.clone()]
                    } else {
                        let c = self.layout.edge_index(k, i).expect("complete topology");
                        &state[self.layout.channel_range(c)]
                    };
                    for (qrc, wc) in row[cols].iter().zip(w) {
                        acc += qrc * wc;
                    }
                }
                out[r] = if with_offset { -(acc + q[r]) } else { -acc };
            }
        }
    }

    fn copy_into_channel(&self, channel: usize, x: &mut [f64]) {
        let (j, _) = self.layout.edges[channel];
        let src = self.layout.agent_range(j);
        let dst = self.layout.channel_range(channel);
        x.copy_within(src, dst.start);
    }
}

/// The distributed gradient flow in original coordinates.
#[derive(Debug, Clone)]
pub struct DistributedSystem {
    inner: Coupling,
}

/// Builds the distributed system; requires one channel per ordered pair.
pub fn assemble_distributed_system(
    problem: Arc<QuadraticProblem>,
    channels: &[ChannelSpec],
) -> Result<DistributedSystem> {
    Ok(DistributedSystem {
        inner: Coupling::build(problem, channels)?,
    })
}

/// Builds the error-coordinate system for the same problem and channels.
pub fn assemble_error_system(problem: Arc<QuadraticProblem>, channels: &[ChannelSpec]) -> Result<ErrorSystem> {
    Ok(ErrorSystem {
        inner: Coupling::build(problem, channels)?,
    })
}

macro_rules! common_accessors {
    ($ty:ty) => {
        impl $ty {
            pub fn problem(&self) -> &QuadraticProblem {
                &self.inner.problem
            }

            pub fn problem_arc(&self) -> Arc<QuadraticProblem> {
                Arc::clone(&self.inner.problem)
            }

            /// Channel specs in channel order.
            pub fn channels(&self) -> &[ChannelSpec] {
                &self.inner.channels
            }

            pub fn layout(&self) -> &NetworkLayout {
                &self.inner.layout
            }

            pub fn y_star(&self) -> &[f64] {
                &self.inner.y_star
            }

            /// Copy of the system with every channel rate set to `rate`.
            pub fn with_uniform_rate(&self, rate: f64) -> Result<Self> {
                let mut inner = self.inner.clone();
                for c in &mut inner.channels {
                    c.rate = rate;
                    c.validate()?;
                }
                Ok(Self { inner })
            }
        }
    };
}

common_accessors!(DistributedSystem);
common_accessors!(ErrorSystem);

impl DistributedSystem {
    /// `V = |x - y*|^2 + sum |e|^2` for a stacked original-coordinate state.
    pub fn lyapunov(&self, state: &[f64]) -> f64 {
        let layout = &self.inner.layout;
        let y = &self.inner.y_star;
        let d = layout.agent_dim();
        let mut v: f64 = state[..d].iter().zip(y).map(|(x, y)| (x - y) * (x - y)).sum();
        for (c, &(j, _)) in layout.edges.iter().enumerate() {
            // e = x~_j - z~ = x_j - z
            v += state[layout.agent_range(j)]
                .iter()
                .zip(&state[layout.channel_range(c)])
                .map(|(x, z)| (x - z) * (x - z))
                .sum::<f64>();
        }
        v
    }

    /// Synchronized start with `x~(0)` spread evenly so that `V(0) = v0`.
    pub fn default_initial_state(&self, v0: f64) -> Vec<f64> {
        let layout = &self.inner.layout;
        let d = layout.agent_dim();
        let amp = (v0 / d as f64).sqrt();
        let x: Vec<f64> = self.inner.y_star.iter().map(|y| y + amp).collect();
        NetworkState::synchronized(layout, &x)
            .to_vec(layout)
            .expect("layout-consistent state")
    }

    pub fn error_coordinates(&self, state: &[f64]) -> ErrorCoordinates {
        ErrorCoordinates::from_state(&self.inner.layout, state, &self.inner.y_star)
    }
}

impl JumpSystem for DistributedSystem {
    fn dim(&self) -> usize {
        self.inner.layout.total_dim()
    }

    fn channel_count(&self) -> usize {
        self.inner.channels.len()
    }

    fn channel_rate(&self, channel: usize) -> f64 {
        self.inner.channels[channel].rate
    }

    fn drift(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        self.inner.agent_drift(x, true, dx);
        for (c, spec) in self.inner.channels.iter().enumerate() {
            let r = self.inner.layout.channel_range(c);
            channel_drift_into(spec.drift_at(t), &x[r.clone()], &mut dx[r]);
        }
    }

    fn apply_jump(&self, channel: usize, _t: f64, x: &mut [f64]) {
        self.inner.copy_into_channel(channel, x);
    }
}

/// Error dynamics in `(x~, z~)`: the agent drift loses `q`, the channel drift
/// picks up `a(t) y*_j`.
#[derive(Debug, Clone)]
pub struct ErrorSystem {
    inner: Coupling,
}

impl ErrorSystem {
    pub fn lyapunov(&self, state: &[f64]) -> f64 {
        let layout = &self.inner.layout;
        let d = layout.agent_dim();
        let mut v: f64 = state[..d].iter().map(|x| x * x).sum();
        for (c, &(j, _)) in layout.edges.iter().enumerate() {
            v += state[layout.agent_range(j)]
                .iter()
                .zip(&state[layout.channel_range(c)])
                .map(|(x, z)| (x - z) * (x - z))
                .sum::<f64>();
        }
        v
    }

    /// Shifts an original-coordinate state into error-system coordinates.
    pub fn shift(&self, state: &[f64]) -> Vec<f64> {
        ErrorCoordinates::from_state(&self.inner.layout, state, &self.inner.y_star).to_error_state()
    }

    /// Inverse of [`ErrorSystem::shift`].
    pub fn unshift(&self, error_state: &[f64]) -> Vec<f64> {
        ErrorCoordinates::from_error_state(&self.inner.layout, error_state)
            .to_state(&self.inner.layout, &self.inner.y_star)
    }
}

impl JumpSystem for ErrorSystem {
    fn dim(&self) -> usize {
        self.inner.layout.total_dim()
    }

    fn channel_count(&self) -> usize {
        self.inner.channels.len()
    }

    fn channel_rate(&self, channel: usize) -> f64 {
        self.inner.channels[channel].rate
    }

    fn drift(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        self.inner.agent_drift(x, false, dx);
        let layout = &self.inner.layout;
        for (c, spec) in self.inner.channels.iter().enumerate() {
            let a = spec.drift_at(t);
            let (j, _) = layout.edges[c];
            let ys = &self.inner.y_star[layout.agent_range(j)];
            let r = layout.channel_range(c);
            for ((o, z), y) in dx[r.clone()].iter_mut().zip(&x[r]).zip(ys) {
                *o = a * z + a * y;
            }
        }
    }

    fn apply_jump(&self, channel: usize, _t: f64, x: &mut [f64]) {
        self.inner.copy_into_channel(channel, x);
    }
}

/// Complete graph of identical channels.
pub fn uniform_channels(n: usize, rate: f64, drift: crate::channel::DriftSchedule) -> Result<Vec<ChannelSpec>> {
    Topology::complete(n)
        .edges()
        .map(|e| ChannelSpec::new(e, rate, drift.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::DriftSchedule;
    use crate::jump::{integrate_path, simulate_path, PathConfig};
    use crate::problem::reference_problem;

    fn reference(rate: f64, a: f64) -> DistributedSystem {
        let p = Arc::new(reference_problem());
        let ch = uniform_channels(3, rate, DriftSchedule::Constant(a)).unwrap();
        assemble_distributed_system(p, &ch).unwrap()
    }

    #[test]
    fn reference_dimension_is_18() {
        let sys = reference(10.0, 0.0);
        assert_eq!(sys.layout().edge_count(), 6);
        assert_eq!(sys.dim(), 18);
    }

    #[test]
    fn nominal_drift_vanishes_at_optimum() {
        let p = Arc::new(reference_problem());
        let flow = NominalFlow::new(Arc::clone(&p));
        let y = p.optimal_solution().unwrap();
        let mut dy = vec![0.0; 6];
        flow.drift(0.0, y.as_slice(), &mut dy);
        assert!(dy.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn synchronized_channels_reduce_to_nominal() {
        let sys = reference(10.0, 0.0);
        let p = sys.problem_arc();
        let flow = NominalFlow::new(p);
        let x = [0.3, -1.0, 2.0, 0.5, 0.0, -0.7];
        let state = NetworkState::synchronized(sys.layout(), &x).to_vec(sys.layout()).unwrap();
        let mut dx = vec![0.0; 18];
        sys.drift(0.0, &state, &mut dx);
        let mut dy = vec![0.0; 6];
        flow.drift(0.0, &x, &mut dy);
        for (a, b) in dx[..6].iter().zip(&dy) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn incomplete_topology_rejected() {
        let p = Arc::new(reference_problem());
        let mut ch = uniform_channels(3, 1.0, DriftSchedule::Constant(0.0)).unwrap();
        ch.pop();
        assert!(matches!(
            assemble_distributed_system(p, &ch),
            Err(Error::IncompleteTopology(_))
        ));
    }

    #[test]
    fn single_agent_matches_nominal_bitwise() {
        let base = reference_problem();
        let p = Arc::new(
            QuadraticProblem::new(base.q_matrix().clone(), base.q_vector().clone(), vec![6]).unwrap(),
        );
        let sys = assemble_distributed_system(Arc::clone(&p), &[]).unwrap();
        assert_eq!(sys.dim(), 6);
        let flow = NominalFlow::new(p);
        let cfg = PathConfig::new(0.0, 2.0, 0.01, 3).unwrap();
        let x0 = [1.0, 2.0, -1.0, 0.0, 0.5, 3.0];
        let a = integrate_path(&sys, &[], &cfg, &x0).unwrap();
        let b = integrate_path(&flow, &[], &cfg, &x0).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn equilibrium_maps_to_origin() {
        let sys = reference(5.0, 0.0);
        let y = sys.y_star().to_vec();
        let state = NetworkState::synchronized(sys.layout(), &y).to_vec(sys.layout()).unwrap();
        let ec = sys.error_coordinates(&state);
        assert!(ec.stacked().amax() < 1e-12);
        assert!(sys.lyapunov(&state) < 1e-24);
    }

    #[test]
    fn offset_substitution() {
        let sys = reference(5.0, 0.0);
        let layout = sys.layout();
        let y = sys.y_star().to_vec();
        let u = [0.1, -0.2, 0.3, 0.4, -0.5, 0.6];
        let x: Vec<f64> = y.iter().zip(&u).map(|(a, b)| a + b).collect();
        let mut ns = NetworkState::synchronized(layout, &y);
        ns.agent_states = (0..3).map(|i| x[layout.agent_range(i)].to_vec()).collect();
        let ec = ErrorCoordinates::from_network_state(layout, &ns, &y).unwrap();
        for (a, b) in ec.x_tilde.iter().zip(&u) {
            assert!((a - b).abs() < 1e-14);
        }
        for (c, &(j, _)) in layout.edges().iter().enumerate() {
            assert!(ec.z_tilde[c].iter().all(|v| v.abs() < 1e-14));
            for (e, uj) in ec.e[c].iter().zip(&u[layout.agent_range(j)]) {
                assert!((e - uj).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn stationary_under_drift_and_jumps() {
        let sys = reference(5.0, 0.0);
        let y = sys.y_star().to_vec();
        let state = NetworkState::synchronized(sys.layout(), &y).to_vec(sys.layout()).unwrap();
        let mut dx = vec![0.0; 18];
        sys.drift(0.0, &state, &mut dx);
        assert!(dx.iter().all(|v| v.abs() < 1e-12));
        for c in 0..6 {
            let mut s = state.clone();
            sys.apply_jump(c, 0.0, &mut s);
            assert_eq!(s, state);
        }
    }

    #[test]
    fn jump_touches_only_its_channel() {
        let sys = reference(5.0, 0.0);
        let state: Vec<f64> = (0..18).map(|k| k as f64 * 0.1).collect();
        for c in 0..6 {
            let mut s = state.clone();
            sys.apply_jump(c, 0.0, &mut s);
            let r = sys.layout().channel_range(c);
            for k in 0..18 {
                if !r.contains(&k) {
                    assert_eq!(s[k], state[k]);
                }
            }
            let (j, _) = sys.layout().edges()[c];
            assert_eq!(&s[r], &state[sys.layout().agent_range(j)]);
        }
    }

    #[test]
    fn error_system_with_zero_drift() {
        let p = Arc::new(reference_problem());
        let ch = uniform_channels(3, 5.0, DriftSchedule::Constant(0.0)).unwrap();
        let es = assemble_error_system(p, &ch).unwrap();
        let state: Vec<f64> = (0..18).map(|k| (k as f64).sin()).collect();
        let mut dx = vec![0.0; 18];
        es.drift(0.0, &state, &mut dx);
        assert!(dx[6..].iter().all(|&v| v == 0.0));
        let mut s = state.clone();
        es.apply_jump(0, 0.0, &mut s);
        assert_eq!(&s[6..9], &state[0..3]);
    }

    #[test]
    fn zero_optimum_error_system_is_original() {
        let p = Arc::new(
            QuadraticProblem::new(reference_problem().q_matrix().clone(), DVector::zeros(6), vec![3, 2, 1])
                .unwrap(),
        );
        let ch = uniform_channels(3, 5.0, DriftSchedule::Constant(-1.0)).unwrap();
        let sys = assemble_distributed_system(Arc::clone(&p), &ch).unwrap();
        let es = assemble_error_system(p, &ch).unwrap();
        let cfg = PathConfig::new(0.0, 1.0, 0.01, 11).unwrap();
        let x0: Vec<f64> = (0..18).map(|k| (k as f64 * 0.7).cos()).collect();
        let a = simulate_path(&sys, &cfg, &x0).unwrap();
        let b = simulate_path(&es, &cfg, &x0).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn coordinate_round_trip() {
        let sys = reference(5.0, 0.3);
        let layout = sys.layout();
        let state: Vec<f64> = (0..18).map(|k| (k as f64 * 1.3).sin() * 4.0).collect();
        let ec = sys.error_coordinates(&state);
        let back = ec.to_state(layout, sys.y_star());
        for (a, b) in back.iter().zip(&state) {
            assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
        }
        let again = ErrorCoordinates::from_stacked(layout, &ec.stacked());
        for (x, y) in again.z_tilde.iter().flatten().zip(ec.z_tilde.iter().flatten()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn default_initial_state_has_requested_energy() {
        let sys = reference(5.0, 0.0);
        let x0 = sys.default_initial_state(1.5);
        assert!((sys.lyapunov(&x0) - 1.5).abs() < 1e-12);
    }
}
