//! Channel dynamics `dz = a(t) z dt + (x_j - z) dN`, with identity output.
//!
//! `a = 0` is the ideal sample-and-hold channel; any other `a` is a leaky
//! (a < 0) or amplifying (a > 0) integrator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant drift coefficient `a(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DriftSchedule {
    Constant(f64),
    /// `(start_time, value)` pairs with increasing start times. The first
    /// value also applies before the first start time.
    Piecewise { schedule: Vec<(f64, f64)> },
}

impl Default for DriftSchedule {
    fn default() -> Self {
        DriftSchedule::Constant(0.0)
    }
}

impl DriftSchedule {
    pub fn piecewise(schedule: Vec<(f64, f64)>) -> Result<Self> {
        if schedule.is_empty() {
            return Err(Error::invalid("drift schedule must not be empty"));
        }
        if schedule.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("drift schedule start times must increase"));
        }
        if schedule.iter().any(|(t, a)| !t.is_finite() || !a.is_finite()) {
            return Err(Error::invalid("drift schedule must be finite"));
        }
        Ok(DriftSchedule::Piecewise { schedule })
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            DriftSchedule::Constant(a) => *a,
            DriftSchedule::Piecewise { schedule } => {
                let idx = schedule.partition_point(|(start, _)| *start <= t);
                schedule[idx.saturating_sub(1)].1
            }
        }
    }

    /// `sup_t |a(t)|`, exact for piecewise-constant schedules.
    pub fn sup_abs(&self) -> f64 {
        match self {
            DriftSchedule::Constant(a) => a.abs(),
            DriftSchedule::Piecewise { schedule } => {
                schedule.iter().map(|(_, a)| a.abs()).fold(0.0, f64::max)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sup_abs() == 0.0
    }
}

/// One directed link `(sender, receiver)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub edge: (usize, usize),
    pub rate: f64,
    #[serde(default)]
    pub drift: DriftSchedule,
    /// Bound `a_ji >= sup_t |a(t)|`.
    pub drift_bound: f64,
}

impl ChannelSpec {
    /// Spec whose drift bound is the exact supremum of the schedule.
    pub fn new(edge: (usize, usize), rate: f64, drift: DriftSchedule) -> Result<Self> {
        let drift_bound = drift.sup_abs();
        Self::with_bound(edge, rate, drift, drift_bound)
    }

    pub fn with_bound(
        edge: (usize, usize),
        rate: f64,
        drift: DriftSchedule,
        drift_bound: f64,
    ) -> Result<Self> {
        let spec = Self {
            edge,
            rate,
            drift,
            drift_bound,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sample_and_hold(edge: (usize, usize), rate: f64) -> Result<Self> {
        Self::new(edge, rate, DriftSchedule::Constant(0.0))
    }

    pub fn leaky(edge: (usize, usize), rate: f64, a: f64) -> Result<Self> {
        Self::new(edge, rate, DriftSchedule::Constant(a))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::invalid(format!(
                "channel {:?}: rate must be positive, got {}",
                self.edge, self.rate
            )));
        }
        if self.edge.0 == self.edge.1 {
            return Err(Error::invalid(format!("channel {:?} is a self-loop", self.edge)));
        }
        if let DriftSchedule::Piecewise { schedule } = &self.drift {
            DriftSchedule::piecewise(schedule.clone())?;
        }
        let sup = self.drift.sup_abs();
        if !(self.drift_bound >= sup) {
            return Err(Error::invalid(format!(
                "channel {:?}: drift bound {} below sup |a(t)| = {sup}",
                self.edge, self.drift_bound
            )));
        }
        Ok(())
    }

    pub fn sender(&self) -> usize {
        self.edge.0
    }

    pub fn receiver(&self) -> usize {
        self.edge.1
    }

    pub fn drift_at(&self, t: f64) -> f64 {
        self.drift.value_at(t)
    }
}

/// Held copy `z_(j,i)` of the sender's state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub value: Vec<f64>,
}

impl ChannelState {
    pub fn new(value: Vec<f64>) -> Self {
        Self { value }
    }

    pub fn dim(&self) -> usize {
        self.value.len()
    }
}

/// `a(t) z`.
pub fn channel_drift(spec: &ChannelSpec, t: f64, z: &ChannelState) -> Vec<f64> {
    let a = spec.drift_at(t);
    z.value.iter().map(|v| a * v).collect()
}

/// In-place form of [`channel_drift`].
pub fn channel_drift_into(a: f64, z: &[f64], out: &mut [f64]) {
    for (o, v) in out.iter_mut().zip(z) {
        *o = a * v;
    }
}

/// Post-jump state: `z + (x_j - z)`, i.e. exactly the sender's pre-jump value.
pub fn channel_jump(sender_state: &[f64], z: &ChannelState) -> Result<ChannelState> {
    if sender_state.len() != z.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sender state has length {}, channel holds {}",
            sender_state.len(),
            z.dim()
        )));
    }
    Ok(ChannelState::new(sender_state.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_cases() {
        let hold = ChannelSpec::sample_and_hold((0, 1), 1.0).unwrap();
        assert_eq!(channel_drift(&hold, 3.0, &ChannelState::new(vec![4.0, -2.0])), vec![0.0, 0.0]);
        let leaky = ChannelSpec::leaky((0, 1), 1.0, -6.0).unwrap();
        assert_eq!(channel_drift(&leaky, 0.0, &ChannelState::new(vec![1.0])), vec![-6.0]);
        let unit = ChannelSpec::leaky((0, 1), 1.0, 1.0).unwrap();
        assert_eq!(channel_drift(&unit, 0.0, &ChannelState::new(vec![2.0, -1.0])), vec![2.0, -1.0]);
    }

    #[test]
    fn jump_resets_to_sender() {
        let z = ChannelState::new(vec![5.0]);
        assert_eq!(channel_jump(&[2.0], &z).unwrap().value, vec![2.0]);
        let synced = ChannelState::new(vec![1.5, -3.0]);
        assert_eq!(channel_jump(&[1.5, -3.0], &synced).unwrap(), synced);
        assert!(channel_jump(&[1.0, 2.0], &z).is_err());
    }

    #[test]
    fn piecewise_schedule() {
        let s = DriftSchedule::piecewise(vec![(0.0, -1.0), (2.0, 3.0), (5.0, -4.0)]).unwrap();
        assert_eq!(s.value_at(-1.0), -1.0);
        assert_eq!(s.value_at(1.999), -1.0);
        assert_eq!(s.value_at(2.0), 3.0);
        assert_eq!(s.value_at(10.0), -4.0);
        assert_eq!(s.sup_abs(), 4.0);
        assert!(DriftSchedule::piecewise(vec![(1.0, 0.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn bound_must_dominate_schedule() {
        let s = DriftSchedule::piecewise(vec![(0.0, 1.0), (1.0, -2.0)]).unwrap();
        assert!(ChannelSpec::with_bound((0, 1), 1.0, s.clone(), 1.5).is_err());
        assert!(ChannelSpec::with_bound((0, 1), 1.0, s, 2.5).is_ok());
        assert!(ChannelSpec::sample_and_hold((0, 1), 0.0).is_err());
        assert!(ChannelSpec::sample_and_hold((1, 1), 1.0).is_err());
    }

    #[test]
    fn schedule_json_forms() {
        let c: DriftSchedule = serde_json::from_str("-6.0").unwrap();
        assert_eq!(c, DriftSchedule::Constant(-6.0));
        let p: DriftSchedule = serde_json::from_str(r#"{"schedule": [[0.0, 1.0], [2.0, -1.0]]}"#).unwrap();
        assert_eq!(p.value_at(3.0), -1.0);
    }
}
