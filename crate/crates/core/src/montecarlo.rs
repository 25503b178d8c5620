//! Seeded ensembles of sample paths, pointwise statistics and decay fits.

use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jump::{generate_streams, integrate_with, JumpSystem, PathConfig};

/// Ensemble size, per-path time stepping and seeding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_paths: usize,
    /// Template for each path; its `seed` field is replaced per path.
    pub path: PathConfig,
    pub master_seed: u64,
    /// Number of leading paths whose full trajectories are retained.
    #[serde(default)]
    pub keep_paths: usize,
}

impl EnsembleConfig {
    pub fn new(n_paths: usize, path: PathConfig, master_seed: u64) -> Result<Self> {
        let cfg = Self {
            n_paths,
            path,
            master_seed,
            keep_paths: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_kept_paths(mut self, keep: usize) -> Self {
        self.keep_paths = keep;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::invalid("ensemble needs at least one path"));
        }
        self.path.validate()
    }
}

/// Seed of path `index`: first output of ChaCha8 keyed by `master_seed` on
/// stream `index`.
pub fn path_seed(master_seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// `mean(sqrt V) <= sqrt(mean V)` at the final time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenCheck {
    pub mean_norm: f64,
    pub rms_norm: f64,
    pub holds: bool,
}

/// Pointwise statistics of a recorded scalar functional.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    /// Empirical 2.5 % percentile.
    pub band_low: Vec<f64>,
    /// Empirical 97.5 % percentile.
    pub band_high: Vec<f64>,
    /// Standard error of the mean.
    pub sem: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub n_paths: usize,
    /// Trajectories of the first `keep_paths` paths.
    pub paths: Vec<Vec<f64>>,
    pub jensen: JensenCheck,
}

impl EnsembleStats {
    /// Statistics of per-path series sharing `grid`.
    pub fn from_paths(grid: Vec<f64>, values: &[Vec<f64>], keep_paths: usize) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::invalid("no paths to summarise"));
        }
        if let Some(bad) = values.iter().find(|v| v.len() != grid.len()) {
            return Err(Error::DimensionMismatch(format!(
                "path has {} samples, grid has {}",
                bad.len(),
                grid.len()
            )));
        }
        let m = grid.len();
        let mut stats = Self {
            mean: Vec::with_capacity(m),
            band_low: Vec::with_capacity(m),
            band_high: Vec::with_capacity(m),
            sem: Vec::with_capacity(m),
            min: Vec::with_capacity(m),
            max: Vec::with_capacity(m),
            grid,
            n_paths: n,
            paths: values.iter().take(keep_paths).cloned().collect(),
            jensen: JensenCheck {
                mean_norm: 0.0,
                rms_norm: 0.0,
                holds: true,
            },
        };
        let mut column = vec![0.0; n];
        for k in 0..m {
            for (slot, path) in column.iter_mut().zip(values) {
                *slot = path[k];
            }
            let mut sorted = column.clone();
            sorted.sort_by(f64::total_cmp);
            // summation round-off can push the mean just outside the sample range
            let mean = (column.iter().sum::<f64>() / n as f64).clamp(sorted[0], sorted[n - 1]);
            let var = if n > 1 {
                column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            stats.mean.push(mean);
            stats.sem.push((var / n as f64).sqrt());
            stats.band_low.push(percentile(&sorted, 0.025));
            stats.band_high.push(percentile(&sorted, 0.975));
            stats.min.push(sorted[0]);
            stats.max.push(sorted[n - 1]);
        }
        let last: Vec<f64> = values.iter().map(|p| p[m - 1]).collect();
        stats.jensen = jensen_check(&last);
        Ok(stats)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Mean at the grid point closest to `t`.
    pub fn mean_at(&self, t: f64) -> f64 {
        self.mean[self.nearest_index(t)]
    }

    fn nearest_index(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, g) in self.grid.iter().enumerate() {
            if (g - t).abs() < (self.grid[best] - t).abs() {
                best = k;
            }
        }
        best
    }
}

/// Linear-interpolation percentile of sorted data, `p` in `[0, 1]`.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Jensen check on nonnegative squared norms.
pub fn jensen_check(squared_norms: &[f64]) -> JensenCheck {
    let n = squared_norms.len() as f64;
    let mean_norm = squared_norms.iter().map(|v| v.max(0.0).sqrt()).sum::<f64>() / n;
    let rms_norm = (squared_norms.iter().sum::<f64>() / n).max(0.0).sqrt();
    JensenCheck {
        mean_norm,
        rms_norm,
        holds: mean_norm <= rms_norm * (1.0 + 1e-12) + 1e-300,
    }
}

/// Simulates `config.n_paths` paths from `x0` and records `functional(t, x)`
/// on the output grid. Results do not depend on thread scheduling.
///
/// The recorded functional must be a squared norm (such as `V`) for the
/// embedded Jensen check to be meaningful.
pub fn run_ensemble<S, F>(system: &S, x0: &[f64], config: &EnsembleConfig, functional: F) -> Result<EnsembleStats>
where
    S: JumpSystem + Sync + ?Sized,
    F: Fn(f64, &[f64]) -> f64 + Sync,
{
    config.validate()?;
    let values: Vec<Result<Vec<f64>>> = (0..config.n_paths)
        .into_par_iter()
        .map(|k| {
            let path_cfg = config.path.with_seed(path_seed(config.master_seed, k));
            let streams = generate_streams(system, &path_cfg)?;
            let mut out = Vec::new();
            integrate_with(system, &streams, &path_cfg, x0, |t, x| out.push(functional(t, x)))?;
            Ok(out)
        })
        .collect();
    let mut series = Vec::with_capacity(values.len());
    for (path, v) in values.into_iter().enumerate() {
        series.push(v.map_err(|e| Error::PathFailed {
            path,
            source: Box::new(e),
        })?);
    }
    let stats = EnsembleStats::from_paths(config.path.grid(), &series, config.keep_paths)?;
    if !stats.jensen.holds {
        return Err(Error::invalid(format!(
            "Jensen check failed: mean |s| = {} > rms |s| = {}",
            stats.jensen.mean_norm, stats.jensen.rms_norm
        )));
    }
    Ok(stats)
}

/// Least-squares decay rate of `values` on `[window.0, window.1]`: minus the
/// slope of `ln value` against `t`.
pub fn fit_decay_rate_series(grid: &[f64], values: &[f64], window: (f64, f64)) -> Result<f64> {
    let (a, b) = window;
    if !(a < b) {
        return Err(Error::invalid(format!("empty fit window [{a}, {b}]")));
    }
    let eps = 1e-9 * (b - a).abs().max(1.0);
    let mut pts = Vec::new();
    for (&t, &v) in grid.iter().zip(values) {
        if t >= a - eps && t <= b + eps {
            if !(v > 0.0) {
                return Err(Error::NonPositiveSignal { time: t, value: v });
            }
            pts.push((t, v.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::invalid(format!("fit window [{a}, {b}] holds fewer than two samples")));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    Ok(-sxy / sxx)
}

/// Fitted decay rate of the ensemble mean.
pub fn fit_decay_rate(stats: &EnsembleStats, window: (f64, f64)) -> Result<f64> {
    fit_decay_rate_series(&stats.grid, &stats.mean, window)
}

/// Mean of `V-bar` over the trailing `tail_fraction` of the grid.
pub fn plateau_level(stats: &EnsembleStats, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::invalid(format!("tail fraction {tail_fraction} outside (0, 1]")));
    }
    let m = stats.mean.len();
    let count = ((m as f64 * tail_fraction).ceil() as usize).clamp(1, m);
    Ok(stats.mean[m - count..].iter().sum::<f64>() / count as f64)
}

/// Column selection for trajectory CSVs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvOptions {
    /// Adds `ci_low, ci_high` (mean +- 1.96 standard errors).
    pub include_sem: bool,
    /// Extra named columns, e.g. a reference curve.
    pub extra: Vec<(String, Vec<f64>)>,
}

/// Writes `t, mean, band_low, band_high[, ci_low, ci_high][, extra...][,
/// path_k ...]` with a header row.
pub fn write_trajectories_csv<W: Write>(out: W, stats: &EnsembleStats, options: &CsvOptions) -> Result<()> {
    for (name, col) in &options.extra {
        if col.len() != stats.len() {
            return Err(Error::DimensionMismatch(format!(
                "column {name} has {} rows, grid has {}",
                col.len(),
                stats.len()
            )));
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "mean".into(), "band_low".into(), "band_high".into()];
    if options.include_sem {
        header.push("ci_low".into());
        header.push("ci_high".into());
    }
    header.extend(options.extra.iter().map(|(n, _)| n.clone()));
    header.extend((0..stats.paths.len()).map(|k| format!("path_{k}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for k in 0..stats.len() {
        row.clear();
        row.push(stats.grid[k]);
        row.push(stats.mean[k]);
        row.push(stats.band_low[k]);
        row.push(stats.band_high[k]);
        if options.include_sem {
            row.push(stats.mean[k] - 1.96 * stats.sem[k]);
            row.push(stats.mean[k] + 1.96 * stats.sem[k]);
        }
        row.extend(options.extra.iter().map(|(_, c)| c[k]));
        row.extend(stats.paths.iter().map(|p| p[k]));
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump::FnSystem;

    fn decay_system(rate: f64) -> impl JumpSystem + Sync {
        // x' = -x, halved at each event
        FnSystem::new(
            1,
            vec![rate],
            |_t: f64, x: &[f64], dx: &mut [f64]| dx[0] = -x[0],
            |_c: usize, _t: f64, x: &mut [f64]| x[0] *= 0.5,
        )
    }

    fn cfg(n: usize, seed: u64) -> EnsembleConfig {
        EnsembleConfig::new(n, PathConfig::new(0.0, 1.0, 0.01, 0).unwrap(), seed).unwrap()
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let sys = decay_system(3.0);
        let f = |_t: f64, x: &[f64]| x[0] * x[0];
        let a = run_ensemble(&sys, &[1.0], &cfg(50, 7), f).unwrap();
        let b = run_ensemble(&sys, &[1.0], &cfg(50, 7), f).unwrap();
        let c = run_ensemble(&sys, &[1.0], &cfg(50, 8), f).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.mean, c.mean);
        for k in 0..a.len() {
            assert!(a.band_low[k] <= a.band_high[k]);
            assert!(a.min[k] <= a.mean[k] && a.mean[k] <= a.max[k]);
        }
        assert!(a.jensen.holds);
    }

    #[test]
    fn deterministic_system_has_zero_spread() {
        let sys = FnSystem::new(
            1,
            vec![],
            |_t: f64, x: &[f64], dx: &mut [f64]| dx[0] = -x[0],
            |_c: usize, _t: f64, _x: &mut [f64]| {},
        );
        let s = run_ensemble(&sys, &[2.0], &cfg(5, 1), |_t, x| x[0] * x[0]).unwrap();
        assert_eq!(s.band_low, s.mean);
        assert_eq!(s.band_high, s.mean);
    }

    #[test]
    fn single_path_equals_mean() {
        let sys = decay_system(5.0);
        let s = run_ensemble(&sys, &[1.0], &cfg(1, 3).with_kept_paths(1), |_t, x| x[0]).unwrap();
        assert_eq!(s.paths[0], s.mean);
    }

    #[test]
    fn permuting_paths_keeps_percentiles() {
        let grid = vec![0.0, 1.0];
        let paths = vec![vec![1.0, 3.0], vec![2.0, 1.0], vec![4.0, 2.0]];
        let rev: Vec<Vec<f64>> = paths.iter().rev().cloned().collect();
        let a = EnsembleStats::from_paths(grid.clone(), &paths, 0).unwrap();
        let b = EnsembleStats::from_paths(grid, &rev, 0).unwrap();
        assert_eq!(a.band_low, b.band_low);
        assert_eq!(a.band_high, b.band_high);
        assert!((a.mean[0] - b.mean[0]).abs() < 1e-15);
    }

    #[test]
    fn percentile_interpolates() {
        let v: Vec<f64> = (0..=100).map(f64::from).collect();
        assert!((percentile(&v, 0.025) - 2.5).abs() < 1e-12);
        assert!((percentile(&v, 0.975) - 97.5).abs() < 1e-12);
    }

    #[test]
    fn exact_exponential_fit() {
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let v: Vec<f64> = grid.iter().map(|t| 1.5 * (-0.62 * t).exp()).collect();
        let b = fit_decay_rate_series(&grid, &v, (0.0, 10.0)).unwrap();
        assert!((b - 0.62).abs() < 1e-9);
        let flat = vec![2.0; grid.len()];
        assert!(fit_decay_rate_series(&grid, &flat, (1.0, 5.0)).unwrap().abs() < 1e-12);
        let mut bad = v.clone();
        bad[30] = 0.0;
        assert!(matches!(
            fit_decay_rate_series(&grid, &bad, (1.0, 5.0)),
            Err(Error::NonPositiveSignal { .. })
        ));
    }

    #[test]
    fn plateau_of_constant_and_decay() {
        let grid: Vec<f64> = (0..=100).map(|k| k as f64).collect();
        let c = EnsembleStats::from_paths(grid.clone(), &[vec![4.0; 101]], 0).unwrap();
        assert_eq!(plateau_level(&c, 0.2).unwrap(), 4.0);
        let d: Vec<f64> = grid.iter().map(|t| (-t).exp()).collect();
        let s = EnsembleStats::from_paths(grid, &[d], 0).unwrap();
        assert!(plateau_level(&s, 0.2).unwrap() < 1e-30);
        assert!(plateau_level(&s, 0.0).is_err());
    }

    #[test]
    fn divergence_aborts_with_path_index() {
        let sys = FnSystem::new(
            1,
            vec![],
            |_t: f64, x: &[f64], dx: &mut [f64]| dx[0] = x[0] * x[0] * 1e300,
            |_c: usize, _t: f64, _x: &mut [f64]| {},
        );
        let err = run_ensemble(&sys, &[1e10], &cfg(3, 0), |_t, x| x[0]).unwrap_err();
        assert!(matches!(err, Error::PathFailed { path: 0, .. }));
    }

    #[test]
    fn csv_header_and_rows() {
        let grid = vec![0.0, 0.5, 1.0];
        let s = EnsembleStats::from_paths(grid, &[vec![1.0, 0.5, 0.25], vec![1.0, 0.7, 0.1]], 2).unwrap();
        let mut buf = Vec::new();
        let opts = CsvOptions {
            include_sem: true,
            extra: vec![("reference".into(), vec![1.0, 0.6, 0.3])],
        };
        write_trajectories_csv(&mut buf, &s, &opts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,mean,band_low,band_high,ci_low,ci_high,reference,path_0,path_1"
        );
        assert_eq!(lines.count(), 3);
    }
}
