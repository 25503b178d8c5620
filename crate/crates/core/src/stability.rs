//! Lyapunov analysis of the distributed flow and sufficient communication
//! rates.
//!
//! With `s = (x~, e)` and `V(s) = |s|^2`, the generator splits into seven
//! terms `W1 + 2 W2 + W3 + 2 W4 + 2 W5 + W6 + W7`. Bounding the affine term
//! `W7` with Young's inequality gives `L V <= -s^T M(t) s + gamma'`, and a
//! Schur-complement argument on `M(t)` turns that into explicit rate
//! thresholds.
//!
//! Two rate routes are computed side by side (see [`RateConvention`]): the
//! conservative norm-bound route, and an exact Schur complement with upper-left
//! block `Q` and the shared-receiver coupling pattern.

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::montecarlo::EnsembleStats;
use crate::network::{DistributedSystem, ErrorCoordinates, NetworkLayout};
use crate::problem::QuadraticProblem;

/// Constants of the mean-square Lyapunov bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub gamma_prime: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LyapunovParams {
    /// Parameters for `V = |s|^2`, i.e. `c1 = c2 = 1`.
    pub fn for_squared_norm(c3: f64, gamma_prime: f64) -> Result<Self> {
        Self::new(1.0, 1.0, c3, gamma_prime)
    }

    pub fn new(c1: f64, c2: f64, c3: f64, gamma_prime: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 >= c1 && c3 > 0.0 && gamma_prime >= 0.0) {
            return Err(Error::invalid(format!(
                "need 0 < c1 <= c2, c3 > 0, gamma' >= 0; got c1={c1}, c2={c2}, c3={c3}, gamma'={gamma_prime}"
            )));
        }
        Ok(Self {
            c1,
            c2,
            c3,
            gamma_prime,
            alpha: c2 / c1,
            beta: c3 / c2,
            gamma: gamma_prime / c3,
        })
    }

    /// `alpha |s0|^2 e^{-beta (t - t0)} + gamma`.
    pub fn bound_at(&self, s0_norm_sq: f64, elapsed: f64) -> f64 {
        self.alpha * s0_norm_sq * (-self.beta * elapsed).exp() + self.gamma
    }
}

/// `V(s) = |x~|^2 + sum |e_(j,i)|^2`.
pub fn lyapunov_v(s: &ErrorCoordinates) -> f64 {
    let x: f64 = s.x_tilde.iter().map(|v| v * v).sum();
    let e: f64 = s.e.iter().flatten().map(|v| v * v).sum();
    x + e
}

/// The seven generator contributions, unweighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorTerms {
    pub w: [f64; 7],
}

impl GeneratorTerms {
    /// `W1 + 2 W2 + W3 + 2 W4 + 2 W5 + W6 + W7`.
    pub fn total(&self) -> f64 {
        let w = &self.w;
        w[0] + 2.0 * w[1] + w[2] + 2.0 * w[3] + 2.0 * w[4] + w[5] + w[6]
    }
}

fn blk<'a>(layout: &NetworkLayout, v: &'a [f64], agent: usize) -> &'a [f64] {
    &v[layout.agent_range(agent)]
}

fn bilinear(q: &DMatrix<f64>, row0: usize, col0: usize, left: &[f64], right: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (r, l) in left.iter().enumerate() {
        let mut inner = 0.0;
        for (c, x) in right.iter().enumerate() {
            inner += q[(row0 + r, col0 + c)] * x;
        }
        acc += l * inner;
    }
    acc
}

/// Term-by-term generator of `V` at `(s, t)`; `W7` is evaluated exactly.
pub fn generator_terms(system: &DistributedSystem, s: &ErrorCoordinates, t: f64) -> GeneratorTerms {
    let layout = system.layout();
    let q = system.problem().q_matrix();
    let y = system.y_star();
    let x = &s.x_tilde;
    let n = layout.agent_count();
    let off = |a: usize| layout.agent_range(a).start;
    let mut w = [0.0; 7];

    w[0] = -2.0 * bilinear(q, 0, 0, x, x);
    for (c, &(j, i)) in layout.edges().iter().enumerate() {
        let spec = &system.channels()[c];
        let a = spec.drift_at(t);
        let e = &s.e[c];
        w[1] += bilinear(q, off(j), off(i), e, blk(layout, x, i));
        for k in 0..n {
            if k == j {
                continue;
            }
            let ckj = layout.edge_index(k, j).expect("complete topology");
            w[2] += 2.0 * bilinear(q, off(j), off(k), e, &s.e[ckj]);
        }
        for k in 0..n {
            w[3] -= bilinear(q, off(j), off(k), e, blk(layout, x, k));
        }
        let xj = blk(layout, x, j);
        let yj = blk(layout, y, j);
        let e_xj: f64 = e.iter().zip(xj).map(|(a, b)| a * b).sum();
        let e_e: f64 = e.iter().map(|v| v * v).sum();
        let e_yj: f64 = e.iter().zip(yj).map(|(a, b)| a * b).sum();
        w[4] -= a * e_xj;
        w[5] += (2.0 * a - spec.rate) * e_e;
        w[6] -= 2.0 * a * e_yj;
    }
    GeneratorTerms { w }
}

/// Exact infinitesimal generator `L V (s)` at time `t`.
pub fn generator_lv(system: &DistributedSystem, s: &ErrorCoordinates, t: f64) -> f64 {
    generator_terms(system, s, t).total()
}

/// Which definition of the matrix data feeds the rate formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// Upper-left block `Q`, the
    /// shared-receiver coupling pattern in `R`, worst-case drift `a = a_ji`,
    /// and the exact Schur complement `M21 Q^{-1} M21^T`.
    #[default]
    ExactSchur,
    /// Generator-consistent `M` (upper-left block `2Q`), worst-case `R`, and
    /// the norm bound `(|M21,c| + a_max)^2 |(2Q - beta I)^{-1}|` on the Schur
    /// term. Conservative.
    NormBound,
}

impl fmt::Display for RateConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateConvention::ExactSchur => "exact_schur",
            RateConvention::NormBound => "norm_bound",
        })
    }
}

/// `M(t)` split into blocks, materialised at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct MAssembly {
    pub m11: DMatrix<f64>,
    pub m21: DMatrix<f64>,
    /// Diagonal of `Lambda` (rate `lambda_(j,i)` repeated `d_j` times).
    pub lambda: DVector<f64>,
    pub r: DMatrix<f64>,
    pub rho: Vec<f64>,
}

impl MAssembly {
    pub fn m22(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.lambda) + &self.r
    }

    /// Full symmetric `M = [[M11, M21^T], [M21, Lambda + R]]`.
    pub fn full(&self) -> DMatrix<f64> {
        let d = self.m11.nrows();
        let e = self.r.nrows();
        let mut m = DMatrix::zeros(d + e, d + e);
        m.view_mut((0, 0), (d, d)).copy_from(&self.m11);
        m.view_mut((d, 0), (e, d)).copy_from(&self.m21);
        m.view_mut((0, d), (d, e)).copy_from(&self.m21.transpose());
        m.view_mut((d, d), (e, e)).copy_from(&self.m22());
        m
    }

    /// `-s^T M s`.
    pub fn quadratic_form(&self, s: &DVector<f64>) -> f64 {
        -(s.dot(&(self.full() * s)))
    }
}

/// Per-sender Young weights; `rho.len()` must equal the agent count.
fn check_rho(rho: &[f64], n: usize) -> Result<()> {
    if rho.len() != n {
        return Err(Error::DimensionMismatch(format!("{} rho weights for {n} agents", rho.len())));
    }
    if let Some(bad) = rho.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::invalid(format!("rho weights must be positive, got {bad}")));
    }
    Ok(())
}

/// `rho a^2` with the infinite-weight sentinel (used only when `y* = 0`,
/// where the Young step is not needed) contributing nothing.
fn young_term(rho: f64, a: f64) -> f64 {
    if rho.is_infinite() {
        0.0
    } else {
        rho * a * a
    }
}

/// `M21` with drift coefficients `a_of(c)`.
fn build_m21(system: &DistributedSystem, a_of: &dyn Fn(usize) -> f64) -> DMatrix<f64> {
    let layout = system.layout();
    let q = system.problem().q_matrix();
    let d = layout.agent_dim();
    let n = layout.agent_count();
    let mut m21 = DMatrix::zeros(layout.error_dim(), d);
    for (c, &(j, i)) in layout.edges().iter().enumerate() {
        let rows = layout.error_range(c);
        let qj = layout.agent_range(j);
        for k in 0..n {
            let cols = layout.agent_range(k);
            let mut block = q.view((qj.start, cols.start), (qj.len(), cols.len())).into_owned();
            if k == i {
                block -= q.view((qj.start, cols.start), (qj.len(), cols.len()));
            }
            if k == j {
                for r in 0..qj.len() {
                    block[(r, r)] += a_of(c);
                }
            }
            m21.view_mut((rows.start, cols.start), (rows.len(), cols.len())).copy_from(&block);
        }
    }
    m21
}

/// Generator-consistent `R`: diagonal `(-2a - rho_j a^2) I`, coupling
/// `-Q_jk` between `e_(j,i)` and `e_(k,j)` (both orientations, so the pair
/// `(j,i), (i,j)` carries `-2 Q_ji`).
fn build_r_generator(system: &DistributedSystem, rho: &[f64], diag_of: &dyn Fn(usize, f64) -> f64) -> DMatrix<f64> {
    let layout = system.layout();
    let q = system.problem().q_matrix();
    let n = layout.agent_count();
    let ed = layout.error_dim();
    let mut r = DMatrix::zeros(ed, ed);
    for (c, &(j, _)) in layout.edges().iter().enumerate() {
        let rc = layout.error_range(c);
        let value = diag_of(c, rho[j]);
        for k in rc.clone() {
            r[(k, k)] = value;
        }
        let qj = layout.agent_range(j);
        for k in 0..n {
            if k == j {
                continue;
            }
            let ckj = layout.edge_index(k, j).expect("complete topology");
            let rk = layout.error_range(ckj);
            let qk = layout.agent_range(k);
            let block = q.view((qj.start, qk.start), (qj.len(), qk.len()));
            for a in 0..qj.len() {
                for b in 0..qk.len() {
                    r[(rc.start + a, rk.start + b)] -= block[(a, b)];
                    r[(rk.start + b, rc.start + a)] -= block[(a, b)];
                }
            }
        }
    }
    r
}

/// `R` with the shared-receiver coupling: `-2 Q_jp` between `(j,i)` and
/// `(p,i)`, `j != p`.
fn build_r_shared_receiver(system: &DistributedSystem, rho: &[f64], diag_of: &dyn Fn(usize, f64) -> f64) -> DMatrix<f64> {
    let layout = system.layout();
    let q = system.problem().q_matrix();
    let ed = layout.error_dim();
    let mut r = DMatrix::zeros(ed, ed);
    for (c, &(j, i)) in layout.edges().iter().enumerate() {
        let rc = layout.error_range(c);
        let value = diag_of(c, rho[j]);
        for k in rc.clone() {
            r[(k, k)] = value;
        }
        for (c2, &(p, i2)) in layout.edges().iter().enumerate() {
            if i2 != i || p == j {
                continue;
            }
            let r2 = layout.error_range(c2);
            let qj = layout.agent_range(j);
            let qp = layout.agent_range(p);
            let block = q.view((qj.start, qp.start), (qj.len(), qp.len()));
            r.view_mut((rc.start, r2.start), (rc.len(), r2.len())).copy_from(&(block * -2.0));
        }
    }
    r
}

/// Assembles `M(t)` with uniform or per-sender Young weights `rho`.
pub fn assemble_m(system: &DistributedSystem, rho: &[f64], t: f64) -> Result<MAssembly> {
    let layout = system.layout();
    check_rho(rho, layout.agent_count())?;
    let channels = system.channels();
    let m11 = system.problem().q_matrix() * 2.0;
    let m21 = build_m21(system, &|c| channels[c].drift_at(t));
    let r = build_r_generator(system, rho, &|c, rj| {
        let a = channels[c].drift_at(t);
        -2.0 * a - young_term(rj, a)
    });
    let mut lambda = DVector::zeros(layout.error_dim());
    for c in 0..layout.edge_count() {
        for k in layout.error_range(c) {
            lambda[k] = channels[c].rate;
        }
    }
    Ok(MAssembly {
        m11,
        m21,
        lambda,
        r,
        rho: rho.to_vec(),
    })
}

/// `gamma' = sum_(j,i) |y*_j|^2 / rho_j`; zero when every drift bound is
/// zero, since `W7` then vanishes identically.
pub fn gamma_prime(system: &DistributedSystem, rho: &[f64]) -> f64 {
    if system.channels().iter().all(|c| c.drift_bound == 0.0) {
        return 0.0;
    }
    let layout = system.layout();
    layout
        .edges()
        .iter()
        .map(|&(j, _)| {
            let yj: f64 = blk(layout, system.y_star(), j).iter().map(|v| v * v).sum();
            if rho[j].is_infinite() {
                0.0
            } else {
                yj / rho[j]
            }
        })
        .sum()
}

/// Uniform Young weight and the resulting `gamma'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoChoice {
    pub rho: f64,
    pub gamma_prime: f64,
}

/// Smallest uniform `rho` with `(n - 1) |y*|^2 / rho <= c3 gamma`.
pub fn choose_rho(y_star: &[f64], c3: f64, gamma: f64, n: usize) -> Result<RhoChoice> {
    if !(c3 > 0.0) || !(gamma > 0.0) {
        return Err(Error::invalid(format!("need c3 > 0 and gamma > 0, got c3={c3}, gamma={gamma}")));
    }
    let ny: f64 = y_star.iter().map(|v| v * v).sum();
    if ny == 0.0 {
        return Ok(RhoChoice {
            rho: f64::INFINITY,
            gamma_prime: 0.0,
        });
    }
    let rho = (n.saturating_sub(1)) as f64 * ny / (c3 * gamma);
    let gamma_prime = if rho == 0.0 {
        0.0
    } else {
        (n - 1) as f64 * ny / rho
    };
    Ok(RhoChoice { rho, gamma_prime })
}

fn schur_term(m11: &DMatrix<f64>, m12: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m12.nrows() != m11.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "M12 has {} rows, M11 is {}x{}",
            m12.nrows(),
            m11.nrows(),
            m11.ncols()
        )));
    }
    let solved = linalg::spd_solve(m11, m12)
        .map_err(|_| Error::NotPositiveDefinite("M11 must be symmetric positive definite".into()))?;
    let mut k = m12.transpose() * solved;
    linalg::symmetrize(&mut k);
    Ok(k)
}

/// `lambda_s = -lambda_min(R - M12^T M11^{-1} M12)`: any diagonal rate
/// block strictly above it makes `M` positive definite.
pub fn schur_rate_lambda_s(m11: &DMatrix<f64>, m12: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<f64> {
    let k = schur_term(m11, m12)?;
    if r.shape() != k.shape() {
        return Err(Error::DimensionMismatch(format!("R is {:?}, K is {:?}", r.shape(), k.shape())));
    }
    Ok(-linalg::min_eigenvalue(&(r - k)))
}

/// `lambda_d = mu - lambda_min(R - M12^T (M11 - mu I)^{-1} M12)`: rates at or
/// above it give `M >= mu I`.
pub fn schur_rate_lambda_d(m11: &DMatrix<f64>, m12: &DMatrix<f64>, r: &DMatrix<f64>, mu: f64) -> Result<f64> {
    let upper = linalg::min_eigenvalue(m11);
    if !(mu > 0.0 && mu < upper) {
        return Err(Error::InvalidMu { mu, upper });
    }
    let shifted = m11 - DMatrix::identity(m11.nrows(), m11.ncols()) * mu;
    let k = schur_term(&shifted, m12)?;
    if r.shape() != k.shape() {
        return Err(Error::DimensionMismatch(format!("R is {:?}, K is {:?}", r.shape(), k.shape())));
    }
    Ok(mu - linalg::min_eigenvalue(&(r - k)))
}

/// Inputs to [`sufficient_rates`].
#[derive(Debug, Clone, PartialEq)]
pub struct RateOptions {
    /// Per-agent Young weights.
    pub rho: Vec<f64>,
    /// Target decay rate in `(0, 2 lambda_min(Q))`.
    pub beta: Option<f64>,
    pub convention: RateConvention,
}

impl RateOptions {
    pub fn uniform(n: usize, rho: f64) -> Self {
        Self {
            rho: vec![rho; n],
            beta: None,
            convention: RateConvention::default(),
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_convention(mut self, convention: RateConvention) -> Self {
        self.convention = convention;
        self
    }
}

/// `lambda_s` and (when requested and defined) `lambda_d` for one route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub lambda_s: f64,
    pub lambda_d: Option<f64>,
}

/// Sufficient constant rates with every ingredient that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCertificate {
    pub convention: RateConvention,
    pub channel_count: usize,
    pub lambda_min_q: f64,
    /// Headline rates of the selected convention.
    pub lambda_s: f64,
    pub lambda_d: Option<f64>,
    pub norm_bound: RatePair,
    pub exact_schur: RatePair,
    pub k_bound: f64,
    pub k_bound_beta: Option<f64>,
    pub m21_const_norm: f64,
    pub a_max: f64,
    /// Worst-case constant `R` of the norm-bound route.
    pub r_const: DMatrix<f64>,
    pub beta_target: Option<f64>,
    pub rho: Vec<f64>,
    pub gamma_prime: f64,
}

impl RateCertificate {
    /// Mean-square decay rate of the centralised flow, `2 lambda_min(Q)`.
    pub fn nominal_rate(&self) -> f64 {
        2.0 * self.lambda_min_q
    }

    pub fn rates(&self, convention: RateConvention) -> RatePair {
        match convention {
            RateConvention::ExactSchur => self.exact_schur,
            RateConvention::NormBound => self.norm_bound,
        }
    }

    /// `key=value` lines.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.12e}"));
        let _ = writeln!(out, "convention={}", self.convention);
        let _ = writeln!(out, "channels={}", self.channel_count);
        let _ = writeln!(out, "lambda_min_q={:.12e}", self.lambda_min_q);
        let _ = writeln!(out, "nominal_rate={:.12e}", self.nominal_rate());
        let _ = writeln!(out, "lambda_s={:.12e}", self.lambda_s);
        let _ = writeln!(out, "lambda_d={}", opt(self.lambda_d));
        let _ = writeln!(out, "lambda_s_exact_schur={:.12e}", self.exact_schur.lambda_s);
        let _ = writeln!(out, "lambda_d_exact_schur={}", opt(self.exact_schur.lambda_d));
        let _ = writeln!(out, "lambda_s_norm_bound={:.12e}", self.norm_bound.lambda_s);
        let _ = writeln!(out, "lambda_d_norm_bound={}", opt(self.norm_bound.lambda_d));
        let _ = writeln!(out, "k_bound={:.12e}", self.k_bound);
        let _ = writeln!(out, "k_bound_beta={}", opt(self.k_bound_beta));
        let _ = writeln!(out, "m21_const_norm={:.12e}", self.m21_const_norm);
        let _ = writeln!(out, "a_max={:.12e}", self.a_max);
        let _ = writeln!(out, "beta_target={}", opt(self.beta_target));
        let rho: Vec<String> = self.rho.iter().map(|r| format!("{r:.12e}")).collect();
        let _ = writeln!(out, "rho={}", rho.join(","));
        let _ = writeln!(out, "gamma_prime={:.12e}", self.gamma_prime);
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Communication-rate certificate");
        let _ = writeln!(out, "  lambda_min(Q)        {:.6}", self.lambda_min_q);
        let _ = writeln!(out, "  nominal rate 2*l_min {:.6}", self.nominal_rate());
        if self.channel_count == 0 {
            let _ = writeln!(
                out,
                "  no channels; nominal rate 2*lambda_min(Q) = {:.6}",
                self.nominal_rate()
            );
            return out;
        }
        let _ = writeln!(out, "  channels             {}", self.channel_count);
        let _ = writeln!(out, "  convention           {}", self.convention);
        let _ = writeln!(out, "  lambda_s             {:.4}", self.lambda_s);
        match (self.beta_target, self.lambda_d) {
            (Some(b), Some(d)) => {
                let _ = writeln!(out, "  lambda_d (beta={b:.4}) {d:.4}");
            }
            (Some(b), None) => {
                let _ = writeln!(out, "  lambda_d (beta={b:.4}) unavailable under this convention");
            }
            _ => {}
        }
        let _ = writeln!(out, "  exact-Schur route    lambda_s = {:.4}", self.exact_schur.lambda_s);
        let _ = writeln!(out, "  norm-bound route     lambda_s = {:.4}", self.norm_bound.lambda_s);
        if let Some(d) = self.norm_bound.lambda_d {
            let _ = writeln!(out, "                       lambda_d = {d:.4}");
        }
        let _ = writeln!(out, "  K_bound              {:.4}", self.k_bound);
        if let Some(k) = self.k_bound_beta {
            let _ = writeln!(out, "  K_bound,beta         {k:.4}");
        }
        let _ = writeln!(out, "  |M21,c|_2            {:.4}", self.m21_const_norm);
        let _ = writeln!(out, "  a_max                {:.4}", self.a_max);
        let rho: Vec<String> = self.rho.iter().map(|r| format!("{r:.4}")).collect();
        let _ = writeln!(out, "  rho                  [{}]", rho.join(", "));
        let _ = writeln!(out, "  gamma'               {:.6}", self.gamma_prime);
        out
    }
}

impl fmt::Display for RateCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn check_beta(problem: &QuadraticProblem, beta: f64) -> Result<()> {
    let upper = 2.0 * problem.min_eigenvalue();
    if !(beta > 0.0 && beta < upper) {
        return Err(Error::BetaOutOfRange { beta, upper });
    }
    Ok(())
}

/// Sufficient constant rates for stability (`lambda_s`) and, if `beta` is
/// given, for decay rate `beta` (`lambda_d`).
pub fn sufficient_rates(system: &DistributedSystem, options: &RateOptions) -> Result<RateCertificate> {
    let problem = system.problem();
    let layout = system.layout();
    let n = layout.agent_count();
    check_rho(&options.rho, n)?;
    if let Some(beta) = options.beta {
        check_beta(problem, beta)?;
    }
    let lambda_min_q = problem.min_eigenvalue();
    let channels = system.channels();
    let rho = &options.rho;

    if channels.is_empty() {
        return Ok(RateCertificate {
            convention: options.convention,
            channel_count: 0,
            lambda_min_q,
            lambda_s: 0.0,
            lambda_d: options.beta.map(|_| 0.0),
            norm_bound: RatePair {
                lambda_s: 0.0,
                lambda_d: None,
            },
            exact_schur: RatePair {
                lambda_s: 0.0,
                lambda_d: None,
            },
            k_bound: 0.0,
            k_bound_beta: None,
            m21_const_norm: 0.0,
            a_max: 0.0,
            r_const: DMatrix::zeros(0, 0),
            beta_target: options.beta,
            rho: rho.clone(),
            gamma_prime: 0.0,
        });
    }

    let a_max = channels.iter().map(|c| c.drift_bound).fold(0.0, f64::max);

    // worst case of the downward parabola -2a - rho a^2 over [-a_ji, a_ji]
    let worst_diag = |c: usize, rj: f64| {
        let b = channels[c].drift_bound;
        let at = |a: f64| -2.0 * a - young_term(rj, a);
        at(b).min(at(-b))
    };

    // norm-bound route
    let r_const = build_r_generator(system, rho, &worst_diag);
    let m21c = build_m21(system, &|_| 0.0);
    let m21_const_norm = linalg::spectral_norm(&m21c);
    let numerator = (m21_const_norm + a_max).powi(2);
    let k_bound = numerator / (2.0 * lambda_min_q);
    let r_min = linalg::min_eigenvalue(&r_const);
    let bound_s = k_bound - r_min;
    let k_bound_beta = options.beta.map(|b| numerator / (2.0 * lambda_min_q - b));
    let bound_d = options.beta.zip(k_bound_beta).map(|(b, kb)| b + kb - r_min);

    // exact-Schur route
    let m21p = build_m21(system, &|c| channels[c].drift_bound);
    let r_pub = build_r_shared_receiver(system, rho, &worst_diag);
    let m12p = m21p.transpose();
    let q = problem.q_matrix();
    let pub_s = schur_rate_lambda_s(q, &m12p, &r_pub)?;
    let pub_d = match options.beta {
        Some(b) if b < lambda_min_q => Some(schur_rate_lambda_d(q, &m12p, &r_pub, b)?),
        _ => None,
    };

    let norm_bound = RatePair {
        lambda_s: bound_s,
        lambda_d: bound_d,
    };
    let exact_schur = RatePair {
        lambda_s: pub_s,
        lambda_d: pub_d,
    };
    let headline = match options.convention {
        RateConvention::ExactSchur => exact_schur,
        RateConvention::NormBound => norm_bound,
    };
    Ok(RateCertificate {
        convention: options.convention,
        channel_count: channels.len(),
        lambda_min_q,
        lambda_s: headline.lambda_s,
        lambda_d: headline.lambda_d,
        norm_bound,
        exact_schur,
        k_bound,
        k_bound_beta,
        m21_const_norm,
        a_max,
        r_const,
        beta_target: options.beta,
        rho: rho.clone(),
        gamma_prime: gamma_prime(system, rho),
    })
}

/// Largest decay rate `beta` whose `lambda_d(beta)` does not exceed `rate`
/// under `options.convention`; `None` if even `lambda_s` exceeds it.
pub fn certified_decay_rate(system: &DistributedSystem, rate: f64, options: &RateOptions) -> Result<Option<f64>> {
    let base = RateOptions {
        beta: None,
        ..options.clone()
    };
    let cert = sufficient_rates(system, &base)?;
    if cert.channel_count == 0 {
        return Ok(Some(cert.nominal_rate()));
    }
    if cert.lambda_s >= rate {
        return Ok(None);
    }
    let upper = match options.convention {
        RateConvention::ExactSchur => cert.lambda_min_q,
        RateConvention::NormBound => 2.0 * cert.lambda_min_q,
    };
    let lambda_d = |b: f64| -> Result<f64> {
        let c = sufficient_rates(system, &base.clone().with_beta(b))?;
        Ok(c.lambda_d.unwrap_or(f64::INFINITY))
    };
    let (mut lo, mut hi) = (0.0, upper);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 || mid >= upper {
            break;
        }
        if lambda_d(mid)? <= rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if lo > 0.0 { Some(lo) } else { None })
}

/// Outcome of checking `V(t) <= alpha |s0|^2 e^{-beta t} + gamma + slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSquareBoundReport {
    pub holds: bool,
    pub first_violation: Option<f64>,
    /// Largest `V(t) - bound(t) - slack(t)` over the grid.
    pub max_excess: f64,
    pub params: LyapunovParams,
}

/// Checks the ensemble mean against the mean-square bound, allowing
/// `slack_sigmas` standard errors of the mean at each grid point.
pub fn verify_mean_square_bound(
    stats: &EnsembleStats,
    params: &LyapunovParams,
    s0_norm_sq: f64,
    slack_sigmas: f64,
) -> MeanSquareBoundReport {
    let t0 = stats.grid.first().copied().unwrap_or(0.0);
    let mut first_violation = None;
    let mut max_excess = f64::NEG_INFINITY;
    for (k, &t) in stats.grid.iter().enumerate() {
        let bound = params.bound_at(s0_norm_sq, t - t0);
        let excess = stats.mean[k] - bound - slack_sigmas * stats.sem[k];
        // relative round-off allowance for deterministic runs
        let tol = 1e-12 * bound.abs().max(1.0);
        if excess > tol && first_violation.is_none() {
            first_violation = Some(t);
        }
        max_excess = max_excess.max(excess);
    }
    MeanSquareBoundReport {
        holds: first_violation.is_none(),
        first_violation,
        max_excess,
        params: *params,
    }
}
