//! Monte Carlo simulation of the CEV diffusion with absorption at zero:
//! three discretization schemes, plain and importance-sampled ruin
//! estimation, and the sample-path inclusion check tying the driving noise
//! to ruin.
//!
//! Reproducibility contract: every path owns the counter-based substream
//! `path_rng(seed, path_index)`, and estimates reduce per-path values in
//! fixed-size blocks that are summed in index order. Estimates are therefore
//! bit-identical for a given config no matter how many worker threads run.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, ScaleParams};
use crate::rate;

/// Time discretization / sampling scheme for one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Euler-Maruyama with the diffusion coefficient evaluated at
    /// max(X, 0); ruin declared at the first nonpositive state.
    EulerFullTruncation,
    /// Euler on the transformed coordinate V = X^(1-gamma), whose singular
    /// drift reproduces the absorption mechanism; ruin when V <= 0.
    Lamperti,
    /// Exact transition sampling for gamma = 1/2 (Poisson mixture of gamma
    /// distributions with an atom at zero); ruin when a sampled state is
    /// exactly 0. No discretization error.
    ExactCir,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::EulerFullTruncation => "euler_full_truncation",
            Scheme::Lamperti => "lamperti",
            Scheme::ExactCir => "exact_cir",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler_full_truncation" | "euler" => Ok(Scheme::EulerFullTruncation),
            "lamperti" => Ok(Scheme::Lamperti),
            "exact_cir" => Ok(Scheme::ExactCir),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}' (expected euler_full_truncation, lamperti or exact_cir)"
            ))),
        }
    }
}

/// Everything needed to reproduce a simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    params: ModelParams,
    scale: ScaleParams,
    scheme: Scheme,
    n_steps: usize,
    n_paths: u64,
    seed: u64,
    importance_sampling: bool,
}

impl SimConfig {
    /// Validates the combination: n_steps >= 1, n_paths >= 1, the exact
    /// sampler only at gamma = 1/2 and never together with the drift tilt
    /// (it consumes no Gaussian increments to reweight).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        params: ModelParams,
        scale: ScaleParams,
        scheme: Scheme,
        n_steps: usize,
        n_paths: u64,
        seed: u64,
        importance_sampling: bool,
    ) -> Result<Self> {
        if n_steps < 1 {
            return Err(Error::InvalidConfiguration(
                "n_steps must be at least 1".into(),
            ));
        }
        if n_paths < 1 {
            return Err(Error::InvalidConfiguration(
                "n_paths must be at least 1".into(),
            ));
        }
        if scheme == Scheme::ExactCir {
            if params.gamma() != 0.5 {
                return Err(Error::InvalidConfiguration(format!(
                    "exact_cir requires gamma = 1/2, got {}",
                    params.gamma()
                )));
            }
            if importance_sampling {
                return Err(Error::InvalidConfiguration(
                    "exact_cir cannot be combined with importance sampling".into(),
                ));
            }
        }
        Ok(Self {
            params,
            scale,
            scheme,
            n_steps,
            n_paths,
            seed,
            importance_sampling,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn scale(&self) -> &ScaleParams {
        &self.scale
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_paths(&self) -> u64 {
        self.n_paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn importance_sampling(&self) -> bool {
        self.importance_sampling
    }

    fn dt(&self) -> f64 {
        self.params.horizon() / self.n_steps as f64
    }
}

/// Estimated ruin probability with its sampling error and run metadata.
/// `elapsed` is wall-clock seconds and is the one field excluded from the
/// bit-reproducibility contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuinEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub n_paths: u64,
    pub scheme: Scheme,
    pub seed: u64,
    pub elapsed: f64,
}

/// Outcome of a single simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub ruined: bool,
    /// First grid time at which the state reached zero, if it did.
    pub tau0: Option<f64>,
    /// State at the horizon (0 for ruined paths).
    pub terminal_value: f64,
}

/// The RNG substream owned by one path: a fixed generator seeded by `seed`
/// with the 64-bit stream counter set to the path index. Streams never
/// overlap, so partitioning paths over threads cannot change any draw.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Per-run precomputed tables shared by all paths.
struct Precomp {
    dt: f64,
    sqrt_dt: f64,
    /// sigma (1-gamma) e^(-(1-gamma) mu t_i) at left endpoints; multiplied
    /// by the Brownian increment this accumulates the Gaussian part of the
    /// transformed dynamics.
    mart_weight: Vec<f64>,
    /// Drift tilt c_i = K^(1-gamma) w*(t_i) at left endpoints, present only
    /// under importance sampling.
    tilt: Option<Vec<f64>>,
}

impl Precomp {
    fn build(config: &SimConfig) -> Precomp {
        let dt = config.dt();
        let p = config.params();
        if config.scheme() == Scheme::ExactCir {
            return Precomp {
                dt,
                sqrt_dt: dt.sqrt(),
                mart_weight: Vec::new(),
                tilt: None,
            };
        }
        let b = (1.0 - p.gamma()) * p.mu();
        let amp = p.sigma() * (1.0 - p.gamma());
        let mart_weight = (0..config.n_steps())
            .map(|i| amp * (-b * (i as f64 * dt)).exp())
            .collect();
        let tilt = if config.importance_sampling() {
            let knorm = config.scale().norm_scale(p);
            let ctrl =
                rate::optimal_control_sampled(p, config.n_steps()).expect("validated step count");
            Some(
                ctrl.values()[..config.n_steps()]
                    .iter()
                    .map(|w| knorm * w)
                    .collect(),
            )
        } else {
            None
        };
        Precomp {
            dt,
            sqrt_dt: dt.sqrt(),
            mart_weight,
            tilt,
        }
    }
}

/// Everything observed along one path that any caller might need.
struct PathStats {
    ruined: bool,
    absorption_step: Option<usize>,
    terminal: f64,
    /// Log Girsanov weight; 0 when not tilting.
    log_weight: f64,
    /// Discretized martingale sum_i sigma (1-gamma) e^(-b t_i) dB_i over the
    /// steps actually simulated.
    martingale: f64,
}

#[inline(always)]
fn pow_elasticity(x: f64, gamma: f64) -> f64 {
    if gamma == 0.5 {
        x.sqrt()
    } else if gamma == 0.75 {
        let s = x.sqrt();
        s * s.sqrt()
    } else {
        x.powf(gamma)
    }
}

/// (e^x - 1)/x, extended continuously by 1 at x = 0.
fn expm1_over(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        f64::exp_m1(x) / x
    }
}

/// Runs one path of the configured scheme, reporting each visited grid node
/// (in the scheme's native coordinate) to `on_node`. Stops at ruin.
fn run_path<R, F>(config: &SimConfig, pre: &Precomp, rng: &mut R, mut on_node: F) -> PathStats
where
    R: Rng + ?Sized,
    F: FnMut(usize, f64),
{
    let p = config.params();
    let n = config.n_steps();
    let dt = pre.dt;
    let mut log_weight = 0.0;
    let mut martingale = 0.0;

    match config.scheme() {
        Scheme::EulerFullTruncation => {
            let mut x = config.scale().initial_k();
            on_node(0, x);
            for i in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                let mut db = pre.sqrt_dt * z;
                if let Some(tilt) = &pre.tilt {
                    let c = tilt[i];
                    db += c * dt;
                    log_weight -= c * pre.sqrt_dt * z + 0.5 * c * c * dt;
                }
                martingale += pre.mart_weight[i] * db;
                let x_pos = x.max(0.0);
                x += p.mu() * x * dt + p.sigma() * pow_elasticity(x_pos, p.gamma()) * db;
                if x <= 0.0 {
                    on_node(i + 1, 0.0);
                    return PathStats {
                        ruined: true,
                        absorption_step: Some(i + 1),
                        terminal: 0.0,
                        log_weight,
                        martingale,
                    };
                }
                on_node(i + 1, x);
            }
            PathStats {
                ruined: false,
                absorption_step: None,
                terminal: x,
                log_weight,
                martingale,
            }
        }
        Scheme::Lamperti => {
            let g1 = 1.0 - p.gamma();
            let b = g1 * p.mu();
            let singular = 0.5 * p.gamma() * g1 * p.sigma() * p.sigma();
            let amp = p.sigma() * g1;
            let mut v = config.scale().norm_scale(p);
            on_node(0, v);
            for i in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                let mut db = pre.sqrt_dt * z;
                if let Some(tilt) = &pre.tilt {
                    let c = tilt[i];
                    db += c * dt;
                    log_weight -= c * pre.sqrt_dt * z + 0.5 * c * c * dt;
                }
                martingale += pre.mart_weight[i] * db;
                v += b * v * dt - singular * dt / v + amp * db;
                if v <= 0.0 {
                    on_node(i + 1, 0.0);
                    return PathStats {
                        ruined: true,
                        absorption_step: Some(i + 1),
                        terminal: 0.0,
                        log_weight,
                        martingale,
                    };
                }
                on_node(i + 1, v);
            }
            PathStats {
                ruined: false,
                absorption_step: None,
                terminal: v.powf(1.0 / g1),
                log_weight,
                martingale,
            }
        }
        Scheme::ExactCir => {
            let growth = (p.mu() * dt).exp();
            let beta = 0.5 * p.sigma() * p.sigma() * dt * expm1_over(p.mu() * dt);
            let mut x = config.scale().initial_k();
            on_node(0, x);
            for i in 0..n {
                let lambda = x * growth / beta;
                let count: f64 =
                    rng.sample(Poisson::new(lambda).expect("positive finite intensity"));
                if count == 0.0 {
                    on_node(i + 1, 0.0);
                    return PathStats {
                        ruined: true,
                        absorption_step: Some(i + 1),
                        terminal: 0.0,
                        log_weight,
                        martingale,
                    };
                }
                x = rng.sample(Gamma::new(count, beta).expect("positive shape and scale"));
                on_node(i + 1, x);
            }
            PathStats {
                ruined: false,
                absorption_step: None,
                terminal: x,
                log_weight,
                martingale,
            }
        }
    }
}

/// One-shot draw of the ruin indicator for the exact gamma = 1/2 sampler:
/// the transition over the whole horizon has a Poisson-count representation
/// whose zero-count event is exactly {tau_0 <= T}.
fn cir_ruined_single_shot<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> bool {
    let p = config.params();
    let t = p.horizon();
    let growth = (p.mu() * t).exp();
    let beta = 0.5 * p.sigma() * p.sigma() * t * expm1_over(p.mu() * t);
    let lambda = config.scale().initial_k() * growth / beta;
    let count: f64 = rng.sample(Poisson::new(lambda).expect("positive finite intensity"));
    count == 0.0
}

/// Simulates a single path from the provided (already positioned) RNG
/// stream. Under importance sampling the path is drawn from the tilted
/// dynamics.
pub fn simulate_path<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> PathOutcome {
    let pre = Precomp::build(config);
    let stats = run_path(config, &pre, rng, |_, _| {});
    PathOutcome {
        ruined: stats.ruined,
        tau0: stats.absorption_step.map(|s| s as f64 * pre.dt),
        terminal_value: stats.terminal,
    }
}

/// Like [`simulate_path`] but also returns the state at every grid node
/// (n_steps + 1 values, exactly 0 from absorption onward).
pub fn simulate_path_recorded<R: Rng + ?Sized>(
    config: &SimConfig,
    rng: &mut R,
) -> (PathOutcome, Vec<f64>) {
    let pre = Precomp::build(config);
    let mut nodes = vec![0.0; config.n_steps() + 1];
    let stats = run_path(config, &pre, rng, |i, state| nodes[i] = state);
    if config.scheme() == Scheme::Lamperti {
        let inv = 1.0 / (1.0 - config.params().gamma());
        for v in &mut nodes {
            *v = v.powf(inv);
        }
    }
    let outcome = PathOutcome {
        ruined: stats.ruined,
        tau0: stats.absorption_step.map(|s| s as f64 * pre.dt),
        terminal_value: stats.terminal,
    };
    (outcome, nodes)
}

/// Paths per reduction block. Blocks are the unit of parallel work; their
/// partial sums are combined in index order, which keeps the reduction
/// independent of the thread count.
const BLOCK: u64 = 4096;

fn block_reduce<F>(n_paths: u64, per_path: F) -> (f64, f64)
where
    F: Fn(u64) -> f64 + Sync,
{
    let n_blocks = n_paths.div_ceil(BLOCK);
    let partials: Vec<(f64, f64)> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let lo = block * BLOCK;
            let hi = (lo + BLOCK).min(n_paths);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for i in lo..hi {
                let y = per_path(i);
                sum += y;
                sum_sq += y * y;
            }
            (sum, sum_sq)
        })
        .collect();
    partials
        .into_iter()
        .fold((0.0, 0.0), |(s, q), (bs, bq)| (s + bs, q + bq))
}

/// Estimates P(tau_0 <= T) as the ruined fraction (plain Monte Carlo) or
/// defers to [`estimate_ruin_is`] when the config requests the drift tilt.
/// Plain-MC stderr is the Bernoulli formula sqrt(p_hat (1 - p_hat) / n).
pub fn estimate_ruin(config: &SimConfig) -> Result<RuinEstimate> {
    if config.importance_sampling() {
        return estimate_ruin_is(config);
    }
    let start = Instant::now();
    let pre = Precomp::build(config);
    let n = config.n_paths();
    let (sum, _) = block_reduce(n, |i| {
        let mut rng = path_rng(config.seed(), i);
        let ruined = if config.scheme() == Scheme::ExactCir {
            cir_ruined_single_shot(config, &mut rng)
        } else {
            run_path(config, &pre, &mut rng, |_, _| {}).ruined
        };
        if ruined {
            1.0
        } else {
            0.0
        }
    });
    let p_hat = sum / n as f64;
    let stderr = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
    Ok(RuinEstimate {
        p_hat,
        stderr,
        n_paths: n,
        scheme: config.scheme(),
        seed: config.seed(),
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Importance-sampled estimate: paths are simulated under the tilted drift
/// mu X + sigma X^gamma c_t with c_t = K^(1-gamma) w*(t), and each ruined
/// path contributes its Girsanov weight
/// exp(-sum_i c_i sqrt(dt) Z_i - 1/2 sum_i c_i^2 dt). The estimator is
/// unbiased for the discrete scheme's ruin probability; stderr comes from
/// the weighted second moment.
pub fn estimate_ruin_is(config: &SimConfig) -> Result<RuinEstimate> {
    if !config.importance_sampling() {
        return Err(Error::InvalidConfiguration(
            "estimate_ruin_is needs a config with importance_sampling set".into(),
        ));
    }
    let pre = Precomp::build(config);
    estimate_is_with(config, &pre)
}

fn estimate_is_with(config: &SimConfig, pre: &Precomp) -> Result<RuinEstimate> {
    let start = Instant::now();
    let n = config.n_paths();
    let (sum, sum_sq) = block_reduce(n, |i| {
        let mut rng = path_rng(config.seed(), i);
        let stats = run_path(config, pre, &mut rng, |_, _| {});
        if stats.ruined {
            stats.log_weight.exp()
        } else {
            0.0
        }
    });
    let nf = n as f64;
    let p_hat = sum / nf;
    let variance = if n > 1 {
        ((sum_sq - nf * p_hat * p_hat) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    let stderr = (variance / nf).sqrt();
    Ok(RuinEstimate {
        p_hat,
        stderr,
        n_paths: n,
        scheme: config.scheme(),
        seed: config.seed(),
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Sample-path inclusion test: ruin must occur whenever the discretized
/// Gaussian martingale M_T (built from the same increments that drove the
/// path) satisfies M_T / K^(1-gamma) + 1 < 0. Returns the number of paths
/// violating this, i.e. paths with M_T < -K^(1-gamma) that were not ruined;
/// equality at the boundary counts as a non-violation. Errors for the exact
/// sampler, which exposes no Gaussian increments.
pub fn coupled_inclusion_check(config: &SimConfig) -> Result<u64> {
    if config.scheme() == Scheme::ExactCir {
        return Err(Error::InvalidConfiguration(
            "the inclusion check needs a scheme driven by Gaussian increments".into(),
        ));
    }
    let pre = Precomp::build(config);
    let knorm = config.scale().norm_scale(config.params());
    let (violations, _) = block_reduce(config.n_paths(), |i| {
        let mut rng = path_rng(config.seed(), i);
        let stats = run_path(config, &pre, &mut rng, |_, _| {});
        if !stats.ruined && stats.martingale < -knorm {
            1.0
        } else {
            0.0
        }
    });
    Ok(violations as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::exact_ruin_cir;

    #[allow(clippy::too_many_arguments)]
    fn config(
        mu: f64,
        sigma: f64,
        gamma: f64,
        horizon: f64,
        k: f64,
        scheme: Scheme,
        n_steps: usize,
        n_paths: u64,
        seed: u64,
        is: bool,
    ) -> SimConfig {
        SimConfig::new(
            ModelParams::new(mu, sigma, gamma, horizon).unwrap(),
            ScaleParams::new(k).unwrap(),
            scheme,
            n_steps,
            n_paths,
            seed,
            is,
        )
        .unwrap()
    }

    #[test]
    fn config_validation_catches_inconsistencies() {
        let p = ModelParams::new(0.0, 1.0, 0.75, 1.0).unwrap();
        let p_half = ModelParams::new(0.0, 1.0, 0.5, 1.0).unwrap();
        let k = ScaleParams::new(1.0).unwrap();
        assert!(SimConfig::new(p, k, Scheme::Lamperti, 0, 10, 1, false).is_err());
        assert!(SimConfig::new(p, k, Scheme::Lamperti, 10, 0, 1, false).is_err());
        assert!(SimConfig::new(p, k, Scheme::ExactCir, 10, 10, 1, false).is_err());
        assert!(SimConfig::new(p_half, k, Scheme::ExactCir, 10, 10, 1, true).is_err());
        assert!(SimConfig::new(p_half, k, Scheme::ExactCir, 10, 10, 1, false).is_ok());
        assert!(SimConfig::new(p, k, Scheme::Lamperti, 10, 10, 1, true).is_ok());
    }

    #[test]
    fn scheme_tags_round_trip() {
        for scheme in [
            Scheme::EulerFullTruncation,
            Scheme::Lamperti,
            Scheme::ExactCir,
        ] {
            assert_eq!(scheme.as_str().parse::<Scheme>().unwrap(), scheme);
            assert_eq!(
                serde_json::to_string(&scheme).unwrap(),
                format!("\"{scheme}\"")
            );
        }
        assert_eq!(
            "euler".parse::<Scheme>().unwrap(),
            Scheme::EulerFullTruncation
        );
        assert!("milstein".parse::<Scheme>().is_err());
    }

    #[test]
    fn negligible_noise_tracks_the_deterministic_flow() {
        // With sigma ~ 1e-300 both grid schemes reduce to an ODE solver for
        // dX = mu X dt, so the terminal value must be K e^(mu T).
        for scheme in [Scheme::EulerFullTruncation, Scheme::Lamperti] {
            let cfg = config(0.1, 1e-300, 0.75, 1.0, 2.0, scheme, 2000, 1, 9, false);
            let mut rng = path_rng(9, 0);
            let out = simulate_path(&cfg, &mut rng);
            assert!(!out.ruined);
            assert!(out.tau0.is_none());
            let target = 2.0 * (0.1f64).exp();
            assert!((out.terminal_value - target).abs() < 1e-3 * target);
        }
    }

    #[test]
    fn single_path_estimate_is_zero_or_one() {
        let cfg = config(0.0, 1.0, 0.5, 1.0, 1.0, Scheme::ExactCir, 1, 1, 42, false);
        let est = estimate_ruin(&cfg).unwrap();
        assert!(est.p_hat == 0.0 || est.p_hat == 1.0);
        assert_eq!(est.stderr, 0.0);
        assert_eq!(est.n_paths, 1);
    }

    #[test]
    fn exact_sampler_matches_closed_form() {
        let cfg = config(
            0.0,
            1.0,
            0.5,
            1.0,
            1.0,
            Scheme::ExactCir,
            1,
            100_000,
            2024,
            false,
        );
        let est = estimate_ruin(&cfg).unwrap();
        let truth = exact_ruin_cir(cfg.params(), cfg.scale()).unwrap();
        assert!((est.p_hat - truth).abs() <= 3.0 * est.stderr);
        // Bernoulli stderr is asserted exactly.
        let n = est.n_paths as f64;
        assert_eq!(est.stderr, (est.p_hat * (1.0 - est.p_hat) / n).sqrt());
        assert!(est.stderr <= 0.5 / n.sqrt());
    }

    #[test]
    fn recorded_paths_freeze_at_zero() {
        // A strongly negative drift at small K ruins quickly; everything
        // after the first zero must be exactly zero.
        let cfg = config(
            -2.0,
            1.5,
            0.5,
            1.0,
            0.05,
            Scheme::EulerFullTruncation,
            400,
            1,
            5,
            false,
        );
        let mut ruined_seen = 0;
        for path_index in 0..200 {
            let mut rng = path_rng(5, path_index);
            let (out, nodes) = simulate_path_recorded(&cfg, &mut rng);
            assert_eq!(nodes.len(), 401);
            assert_eq!(nodes[0], 0.05);
            if out.ruined {
                ruined_seen += 1;
                let first = nodes.iter().position(|&x| x == 0.0).unwrap();
                assert_eq!(out.tau0.unwrap(), first as f64 * cfg.dt());
                assert!(nodes[first..].iter().all(|&x| x == 0.0));
            } else {
                assert!(nodes.iter().all(|&x| x > 0.0));
            }
        }
        assert!(ruined_seen > 0);
    }

    #[test]
    fn estimates_are_reproducible_and_thread_independent() {
        let cfg = config(
            0.1,
            1.0,
            0.6,
            1.0,
            1.0,
            Scheme::Lamperti,
            200,
            3000,
            77,
            false,
        );
        let a = estimate_ruin(&cfg).unwrap();
        let b = estimate_ruin(&cfg).unwrap();
        assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let c = pool.install(|| estimate_ruin(&cfg).unwrap());
        assert_eq!(a.p_hat.to_bits(), c.p_hat.to_bits());
        assert_eq!(a.stderr.to_bits(), c.stderr.to_bits());
    }

    #[test]
    fn zero_tilt_reduces_to_plain_monte_carlo() {
        // With the tilt forced to zero the Girsanov weight is identically 1,
        // so the importance-sampled estimator reproduces the plain one draw
        // for draw.
        let plain = config(
            0.0,
            1.0,
            0.5,
            1.0,
            1.0,
            Scheme::Lamperti,
            100,
            2000,
            11,
            false,
        );
        let pre_zero = Precomp {
            dt: plain.dt(),
            sqrt_dt: plain.dt().sqrt(),
            mart_weight: vec![0.5; plain.n_steps()],
            tilt: Some(vec![0.0; plain.n_steps()]),
        };
        let tilted = estimate_is_with(&plain, &pre_zero).unwrap();
        let reference = estimate_ruin(&plain).unwrap();
        assert_eq!(tilted.p_hat.to_bits(), reference.p_hat.to_bits());
    }

    #[test]
    fn importance_sampling_agrees_with_exact_oracle() {
        let cfg = config(
            0.0,
            1.0,
            0.5,
            1.0,
            1.0,
            Scheme::Lamperti,
            400,
            20_000,
            13,
            true,
        );
        let est = estimate_ruin(&cfg).unwrap();
        let truth = (-2.0f64).exp();
        // 3 sigma plus a small allowance for the n_steps = 400 bias.
        assert!((est.p_hat - truth).abs() <= 3.0 * est.stderr + 0.01 * truth);
        assert!(est.p_hat > 0.0);
        assert!(est.stderr > 0.0);
    }

    #[test]
    fn is_entry_point_requires_the_flag() {
        let cfg = config(
            0.0,
            1.0,
            0.5,
            1.0,
            1.0,
            Scheme::Lamperti,
            100,
            100,
            1,
            false,
        );
        assert!(estimate_ruin_is(&cfg).is_err());
        let cfg_is = config(0.0, 1.0, 0.5, 1.0, 1.0, Scheme::Lamperti, 100, 100, 1, true);
        let via_dispatch = estimate_ruin(&cfg_is).unwrap();
        let direct = estimate_ruin_is(&cfg_is).unwrap();
        assert_eq!(via_dispatch.p_hat.to_bits(), direct.p_hat.to_bits());
    }

    #[test]
    fn inclusion_check_rejects_the_exact_sampler() {
        let cfg = config(0.0, 1.0, 0.5, 1.0, 1.0, Scheme::ExactCir, 10, 100, 1, false);
        assert!(coupled_inclusion_check(&cfg).is_err());
    }

    #[test]
    fn inclusion_holds_on_transformed_scheme_without_drift() {
        // At mu = 0 the transformed step obeys the discrete version of the
        // driving identity exactly, so violations are impossible.
        let cfg = config(
            0.0,
            1.0,
            0.5,
            1.0,
            1.0,
            Scheme::Lamperti,
            500,
            20_000,
            3,
            false,
        );
        assert_eq!(coupled_inclusion_check(&cfg).unwrap(), 0);
    }

    #[test]
    fn estimate_json_shape() {
        let est = RuinEstimate {
            p_hat: 0.25,
            stderr: 0.01,
            n_paths: 4,
            scheme: Scheme::Lamperti,
            seed: 7,
            elapsed: 0.5,
        };
        let json = serde_json::to_string(&est).unwrap();
        assert_eq!(
            json,
            "{\"p_hat\":0.25,\"stderr\":0.01,\"n_paths\":4,\"scheme\":\"lamperti\",\"seed\":7,\"elapsed\":0.5}"
        );
    }
}
