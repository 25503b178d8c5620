//! Experiment configuration, presets and end-to-end runs.
//!
//! A config is one JSON document; every field left out takes its default,
//! and [`ExperimentConfig::effective_json`] writes the fully expanded form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSpec, DriftSchedule};
use crate::error::{Error, Result};
use crate::jump::{JumpTiming, PathConfig};
use crate::montecarlo::{
    fit_decay_rate, plateau_level, run_ensemble, write_trajectories_csv, CsvOptions, EnsembleConfig, EnsembleStats,
};
use crate::network::{assemble_distributed_system, DistributedSystem, NetworkState};
use crate::problem::{QuadraticProblem, Topology};
use crate::stability::{
    certified_decay_rate, choose_rho, sufficient_rates, verify_mean_square_bound, LyapunovParams, RateCertificate,
    RateConvention, RateOptions,
};

/// Initial `V` of the default start.
pub const DEFAULT_V0: f64 = 1.5;

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 3] = ["experiment1", "experiment2", "nominal"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub channels: ChannelsConfig,
    /// Uniform rates to simulate in turn; overrides per-channel rates.
    #[serde(default)]
    pub rate_sweep: Vec<f64>,
    pub solver: SolverConfig,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Row-major `Q`.
    #[serde(rename = "Q")]
    pub q_matrix: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub partition: Vec<usize>,
}

/// Complete graph of channels: shared defaults plus per-link overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsConfig {
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub drift: DriftSchedule,
    /// Defaults to `sup |a(t)|` of the drift.
    #[serde(default)]
    pub drift_bound: Option<f64>,
    #[serde(default)]
    pub links: Vec<LinkOverride>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkOverride {
    pub edge: (usize, usize),
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub drift: Option<DriftSchedule>,
    #[serde(default)]
    pub drift_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub h: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub jump_timing: JumpTiming,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Individual paths written as `path_k` CSV columns.
    #[serde(default)]
    pub keep_paths: usize,
}

fn default_paths() -> usize {
    100
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            paths: default_paths(),
            master_seed: 0,
            keep_paths: 0,
        }
    }
}

/// Young weights: one shared value or one per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoSetting {
    Uniform(f64),
    PerAgent(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Target ultimate bound used when `rho` is chosen automatically.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub beta_target: Option<f64>,
    #[serde(default)]
    pub rho: Option<RhoSetting>,
    #[serde(default)]
    pub convention: RateConvention,
    #[serde(default = "default_fit_window")]
    pub fit_window: (f64, f64),
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
}

fn default_gamma() -> f64 {
    0.01 * DEFAULT_V0
}

fn default_fit_window() -> (f64, f64) {
    (1.0, 8.0)
}

fn default_tail() -> f64 {
    0.2
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            gamma: default_gamma(),
            beta_target: None,
            rho: None,
            convention: RateConvention::default(),
            fit_window: default_fit_window(),
            tail_fraction: default_tail(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKeyword {
    /// Synchronized channels, `x - y*` spread evenly with `V(0) = 1.5`.
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Keyword(InitialKeyword),
    Explicit {
        x0: Vec<f64>,
        /// Per channel, in `(sender, receiver)` order; defaults to the
        /// sender's `x0` block.
        #[serde(default)]
        z0: Option<Vec<Vec<f64>>>,
    },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Keyword(InitialKeyword::Default)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Adds `ci_low, ci_high` columns.
    #[serde(default)]
    pub include_sem: bool,
    /// Adds a `reference` column `V(0) e^{-2 lambda_min(Q) t}`.
    #[serde(default)]
    pub reference_curve: bool,
}

/// Command-line overrides applied on top of a file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
}

/// Built-in configuration by name.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let text = match name {
        "experiment1" => include_str!("../presets/experiment1.json"),
        "experiment2" => include_str!("../presets/experiment2.json"),
        "nominal" => include_str!("../presets/nominal.json"),
        other => {
            return Err(Error::invalid(format!(
                "unknown preset `{other}` (available: {})",
                PRESETS.join(", ")
            )))
        }
    };
    ExperimentConfig::from_json_str(text)
}

impl ExperimentConfig {
    /// Parses and validates; errors carry the offending field path.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::config(path.as_ref().display().to_string(), format!("cannot read config: {e}"))
        })?;
        Self::from_json_str(&text)
    }

    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.ensemble.master_seed = seed;
        }
        if let Some(paths) = o.paths {
            self.ensemble.paths = paths;
        }
        self.validate()
    }

    /// Fully expanded JSON; parsing it gives back an equal config.
    pub fn effective_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let problem = self.build_problem()?;
        let n = problem.agent_count();
        let c = &self.channels;
        if let Some(r) = c.rate {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config("channels.rate", format!("must be positive, got {r}")));
            }
        }
        for (k, link) in c.links.iter().enumerate() {
            let (j, i) = link.edge;
            if j >= n || i >= n || j == i {
                return Err(Error::config(
                    format!("channels.links[{k}].edge"),
                    format!("({j}, {i}) is not an edge of the complete graph on {n} agents"),
                ));
            }
        }
        for (k, r) in self.rate_sweep.iter().enumerate() {
            if !(*r > 0.0 && r.is_finite()) {
                return Err(Error::config(format!("rate_sweep[{k}]"), format!("must be positive, got {r}")));
            }
        }
        if n > 1 && self.rate_sweep.is_empty() && c.rate.is_none() {
            let all_links = Topology::complete(n)
                .edges()
                .all(|e| c.links.iter().any(|l| l.edge == e && l.rate.is_some()));
            if !all_links {
                return Err(Error::config(
                    "channels.rate",
                    "no rate given (set channels.rate, rate_sweep or a rate on every link)",
                ));
            }
        }
        self.build_channels(self.rate_sweep.first().copied())?;
        let s = &self.solver;
        if !(s.h > 0.0 && s.h.is_finite()) {
            return Err(Error::config("solver.h", format!("must be positive, got {}", s.h)));
        }
        if !(s.horizon >= s.h && s.horizon.is_finite()) {
            return Err(Error::config("solver.T", format!("must be at least h, got {}", s.horizon)));
        }
        if !s.t0.is_finite() {
            return Err(Error::config("solver.t0", "must be finite"));
        }
        self.path_config(0)?;
        if self.ensemble.paths == 0 {
            return Err(Error::config("ensemble.paths", "must be at least 1"));
        }
        let a = &self.analysis;
        if !(a.gamma > 0.0) {
            return Err(Error::config("analysis.gamma", format!("must be positive, got {}", a.gamma)));
        }
        if let Some(beta) = a.beta_target {
            let upper = 2.0 * problem.min_eigenvalue();
            if !(beta > 0.0 && beta < upper) {
                return Err(Error::config(
                    "analysis.beta_target",
                    Error::BetaOutOfRange { beta, upper }.to_string(),
                ));
            }
        }
        match &a.rho {
            Some(RhoSetting::Uniform(r)) if !(*r > 0.0) => {
                return Err(Error::config("analysis.rho", format!("must be positive, got {r}")));
            }
            Some(RhoSetting::PerAgent(v)) if v.len() != n || v.iter().any(|r| !(*r > 0.0)) => {
                return Err(Error::config("analysis.rho", format!("need {n} positive weights")));
            }
            _ => {}
        }
        if !(a.fit_window.0 < a.fit_window.1) {
            return Err(Error::config("analysis.fit_window", "start must precede end"));
        }
        if !(a.tail_fraction > 0.0 && a.tail_fraction <= 1.0) {
            return Err(Error::config("analysis.tail_fraction", "must lie in (0, 1]"));
        }
        if let InitialState::Explicit { x0, z0 } = &self.initial_state {
            if x0.len() != problem.dim() {
                return Err(Error::config(
                    "initial_state.x0",
                    format!("length {} does not match dimension {}", x0.len(), problem.dim()),
                ));
            }
            if let Some(z) = z0 {
                let edges: Vec<_> = Topology::complete(n).edges().collect();
                if z.len() != edges.len() {
                    return Err(Error::config("initial_state.z0", format!("need {} channel copies", edges.len())));
                }
                for (k, (zc, (j, _))) in z.iter().zip(edges).enumerate() {
                    if zc.len() != problem.partition()[j] {
                        return Err(Error::config(format!("initial_state.z0[{k}]"), "wrong block length"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn build_problem(&self) -> Result<QuadraticProblem> {
        let p = &self.problem;
        let d = p.q_matrix.len();
        if let Some(k) = p.q_matrix.iter().position(|r| r.len() != d) {
            return Err(Error::config(format!("problem.Q[{k}]"), format!("row must have length {d}")));
        }
        if p.q.len() != d {
            return Err(Error::config("problem.q", format!("length {} does not match Q ({d})", p.q.len())));
        }
        if p.partition.iter().sum::<usize>() != d || p.partition.contains(&0) {
            return Err(Error::config(
                "problem.partition",
                format!("{:?} must be positive blocks summing to {d}", p.partition),
            ));
        }
        QuadraticProblem::from_rows(&p.q_matrix, &p.q, p.partition.clone())
            .map_err(|e| Error::config("problem.Q", e.to_string()))
    }

    /// Channel specs in `(sender, receiver)` order; `rate` overrides every
    /// configured rate.
    pub fn build_channels(&self, rate: Option<f64>) -> Result<Vec<ChannelSpec>> {
        let n = self.problem.partition.len();
        let c = &self.channels;
        Topology::complete(n)
            .edges()
            .map(|edge| {
                let link = c.links.iter().rposition(|l| l.edge == edge);
                let path = match link {
                    Some(k) => format!("channels.links[{k}]"),
                    None => "channels".into(),
                };
                let link = link.map(|k| &c.links[k]);
                let r = rate
                    .or(link.and_then(|l| l.rate))
                    .or(c.rate)
                    .ok_or_else(|| Error::config(format!("{path}.rate"), "missing rate"))?;
                let drift = link.and_then(|l| l.drift.clone()).unwrap_or_else(|| c.drift.clone());
                let bound = link
                    .and_then(|l| l.drift_bound)
                    .or(c.drift_bound)
                    .unwrap_or_else(|| drift.sup_abs());
                ChannelSpec::with_bound(edge, r, drift, bound).map_err(|e| Error::config(path, e.to_string()))
            })
            .collect()
    }

    pub fn build_system(&self, rate: Option<f64>) -> Result<DistributedSystem> {
        let problem = Arc::new(self.build_problem()?);
        assemble_distributed_system(problem, &self.build_channels(rate)?)
    }

    pub fn path_config(&self, seed: u64) -> Result<PathConfig> {
        let s = &self.solver;
        PathConfig::new(s.t0, s.horizon, s.h, seed)
            .map(|p| p.with_timing(s.jump_timing))
            .map_err(|e| Error::config("solver", e.to_string()))
    }

    pub fn ensemble_config(&self) -> Result<EnsembleConfig> {
        Ok(EnsembleConfig::new(self.ensemble.paths, self.path_config(0)?, self.ensemble.master_seed)?
            .with_kept_paths(self.ensemble.keep_paths.min(self.ensemble.paths)))
    }

    /// Stacked initial state `(x, z)` for `system`.
    pub fn initial_state(&self, system: &DistributedSystem) -> Result<Vec<f64>> {
        match &self.initial_state {
            InitialState::Keyword(InitialKeyword::Default) => Ok(system.default_initial_state(DEFAULT_V0)),
            InitialState::Explicit { x0, z0 } => {
                let layout = system.layout();
                let mut state = NetworkState::synchronized(layout, x0);
                if let Some(z) = z0 {
                    state.channel_states = z.iter().cloned().map(crate::channel::ChannelState::new).collect();
                }
                state.to_vec(layout)
            }
        }
    }

    /// Young weights: explicit, or the smallest uniform weight meeting
    /// `analysis.gamma` with `c3 = beta_target` (else `lambda_min(Q)`).
    pub fn resolve_rho(&self, system: &DistributedSystem) -> Result<Vec<f64>> {
        let n = system.layout().agent_count();
        Ok(match &self.analysis.rho {
            Some(RhoSetting::Uniform(r)) => vec![*r; n],
            Some(RhoSetting::PerAgent(v)) => v.clone(),
            None => {
                let c3 = self.analysis.beta_target.unwrap_or_else(|| system.problem().min_eigenvalue());
                let choice = choose_rho(system.y_star(), c3, self.analysis.gamma, n)?;
                vec![choice.rho.max(f64::MIN_POSITIVE); n]
            }
        })
    }

    pub fn rate_options(&self, system: &DistributedSystem) -> Result<RateOptions> {
        Ok(RateOptions {
            rho: self.resolve_rho(system)?,
            beta: self.analysis.beta_target,
            convention: self.analysis.convention,
        })
    }
}

/// Rate certificate for a config, without simulating.
pub fn certify(config: &ExperimentConfig) -> Result<RateCertificate> {
    let system = config.build_system(config.rate_sweep.first().copied())?;
    sufficient_rates(&system, &config.rate_options(&system)?)
}

/// Writes `certificate.txt` and `certificate.kv` into `dir`.
pub fn write_certificate(cert: &RateCertificate, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("certificate.txt"), cert.to_text())?;
    fs::write(dir.join("certificate.kv"), cert.to_kv())?;
    Ok(())
}

/// Outcome of one simulated rate.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Uniform rate, or `None` when per-channel rates were used.
    pub rate: Option<f64>,
    pub stats: EnsembleStats,
    pub beta_hat: Option<f64>,
    pub plateau: f64,
    /// Decay rate certified for this rate by the norm-bound route, if any.
    pub certified_beta: Option<f64>,
    /// Whether `V-bar` stays under the certified mean-square bound (two
    /// standard errors of slack); only checked when `certified_beta` exists.
    pub bound_holds: Option<bool>,
    pub csv: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub certificate: RateCertificate,
    pub runs: Vec<RunResult>,
    pub y_star: Vec<f64>,
    pub out_dir: PathBuf,
}

fn rate_label(rate: f64) -> String {
    let s = format!("{rate}");
    s.replace('.', "p")
}

/// Simulates every configured rate and writes all outputs into `out_dir`.
///
/// Files: `trajectories.csv` (the last rate of the sweep),
/// `trajectories_rate_<r>.csv` per swept rate, `certificate.txt`,
/// `certificate.kv`, `summary.txt`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let certificate = certify(config)?;
    write_certificate(&certificate, out_dir)?;

    let rates: Vec<Option<f64>> = if config.rate_sweep.is_empty() {
        vec![None]
    } else {
        config.rate_sweep.iter().map(|r| Some(*r)).collect()
    };
    let ens = config.ensemble_config()?;
    let mut runs = Vec::with_capacity(rates.len());
    let mut y_star = Vec::new();
    for (k, rate) in rates.iter().enumerate() {
        let system = config.build_system(*rate)?;
        y_star = system.y_star().to_vec();
        let x0 = config.initial_state(&system)?;
        let stats = run_ensemble(&system, &x0, &ens, |_t, x| system.lyapunov(x))?;

        let mut csv_opts = CsvOptions {
            include_sem: config.output.include_sem,
            extra: Vec::new(),
        };
        if config.output.reference_curve {
            let v0 = stats.mean[0];
            let b = 2.0 * system.problem().min_eigenvalue();
            let t0 = stats.grid[0];
            let reference = stats.grid.iter().map(|t| v0 * (-b * (t - t0)).exp()).collect();
            csv_opts.extra.push(("reference".into(), reference));
        }
        let name = match rate {
            Some(r) if rates.len() > 1 => format!("trajectories_rate_{}.csv", rate_label(*r)),
            _ => "trajectories.csv".to_string(),
        };
        let csv = out_dir.join(&name);
        write_trajectories_csv(fs::File::create(&csv)?, &stats, &csv_opts)?;
        if rates.len() > 1 && k + 1 == rates.len() {
            fs::copy(&csv, out_dir.join("trajectories.csv"))?;
        }

        let window = clip_window(config.analysis.fit_window, &stats);
        let beta_hat = window.and_then(|w| fit_decay_rate(&stats, w).ok());
        let plateau = plateau_level(&stats, config.analysis.tail_fraction)?;

        let bound_opts = RateOptions {
            convention: RateConvention::NormBound,
            ..config.rate_options(&system)?
        };
        let uniform = rate.or_else(|| {
            let ch = system.channels();
            ch.first().map(|c| c.rate).filter(|r| ch.iter().all(|c| c.rate == *r))
        });
        let certified_beta = match uniform {
            Some(r) => certified_decay_rate(&system, r, &bound_opts)?,
            None => None,
        };
        let bound_holds = match certified_beta {
            Some(beta) => {
                let gp = crate::stability::gamma_prime(&system, &bound_opts.rho);
                let params = LyapunovParams::for_squared_norm(beta, gp)?;
                Some(verify_mean_square_bound(&stats, &params, stats.mean[0], 2.0).holds)
            }
            None => None,
        };

        runs.push(RunResult {
            rate: *rate,
            stats,
            beta_hat,
            plateau,
            certified_beta,
            bound_holds,
            csv,
        });
    }

    let report = ExperimentReport {
        certificate,
        runs,
        y_star,
        out_dir: out_dir.to_path_buf(),
    };
    fs::write(out_dir.join("summary.txt"), summary_text(config, &report))?;
    Ok(report)
}

fn clip_window(window: (f64, f64), stats: &EnsembleStats) -> Option<(f64, f64)> {
    let lo = window.0.max(stats.grid[0]);
    let hi = window.1.min(*stats.grid.last()?);
    (lo < hi).then_some((lo, hi))
}

/// Human-readable summary of a finished run.
pub fn summary_text(config: &ExperimentConfig, report: &ExperimentReport) -> String {
    let cert = &report.certificate;
    let mut out = String::new();
    let _ = writeln!(out, "experiment         {}", config.name);
    let _ = writeln!(out, "lambda_min(Q)      {:.6}", cert.lambda_min_q);
    let ys: Vec<String> = report.y_star.iter().map(|v| format!("{v:.6}")).collect();
    let _ = writeln!(out, "y*                 [{}]", ys.join(", "));
    if cert.channel_count == 0 {
        let _ = writeln!(out, "channels           none; nominal rate 2*lambda_min(Q) = {:.6}", cert.nominal_rate());
    } else {
        let _ = writeln!(out, "lambda_s           {:.4} ({})", cert.lambda_s, cert.convention);
        let _ = writeln!(out, "lambda_s bound     {:.4} (norm_bound)", cert.norm_bound.lambda_s);
        if let Some(beta) = cert.beta_target {
            match cert.lambda_d {
                Some(d) => {
                    let _ = writeln!(out, "lambda_d           {d:.4} (beta = {beta})");
                }
                None => {
                    let _ = writeln!(out, "lambda_d           unavailable for beta = {beta} ({})", cert.convention);
                }
            }
        }
    }
    let _ = writeln!(
        out,
        "paths              {} (master seed {})",
        config.ensemble.paths, config.ensemble.master_seed
    );
    let (w0, w1) = config.analysis.fit_window;
    for run in &report.runs {
        let s = &run.stats;
        let label = run.rate.map_or_else(|| "configured".to_string(), |r| format!("{r}"));
        let _ = writeln!(out, "\nrate {label}");
        let _ = writeln!(out, "  V(0)             {:.6}", s.mean[0]);
        let _ = writeln!(out, "  V(T)             {:.6e}", s.mean[s.len() - 1]);
        match run.beta_hat {
            Some(b) => {
                let _ = writeln!(out, "  fitted decay     {b:.4} on [{w0}, {w1}]");
            }
            None => {
                let _ = writeln!(out, "  fitted decay     n/a");
            }
        }
        let _ = writeln!(
            out,
            "  plateau          {:.6e} (last {}%)",
            run.plateau,
            config.analysis.tail_fraction * 100.0
        );
        let _ = writeln!(
            out,
            "  jensen           {} (mean |s| {:.6e} <= rms |s| {:.6e})",
            if s.jensen.holds { "ok" } else { "VIOLATED" },
            s.jensen.mean_norm,
            s.jensen.rms_norm
        );
        if let (Some(b), Some(h)) = (run.certified_beta, run.bound_holds) {
            let _ = writeln!(
                out,
                "  certified decay  {b:.4}; mean-square bound {}",
                if h { "holds" } else { "exceeded" }
            );
        }
        let _ = writeln!(out, "  csv              {}", run.csv.display());
    }
    out
}
