//! Monte-Carlo validation of the analytic coverage probability.
//!
//! Each trial drops a PPP of deployed BSs on a disc, thins it to the active
//! set, colors bands at random, applies Rayleigh fading and measures the
//! SINR of a typical user at the disc center served by the nearest active
//! BS. Trials use counter-based RNG streams keyed by `(seed, trial index)`,
//! so results are bit-identical no matter how many worker threads run them.
//!
//! Normalization matches the analysis: with `nu = p beta / sigma2` the
//! per-trial SINR is `nu h0 r0^-alpha / (1 + nu I)` where `I` sums
//! `h r^-alpha` over active same-band interferers. Same-band membership is
//! iid with probability `1/beta` (for integer `beta` this is exactly the
//! law of uniform random coloring seen from the serving cell, and it extends
//! the simulator to real-valued `beta`).

use crate::coverage::{self, CoverageSpec};
use crate::model::{ModelError, RadioEnv, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Coverage(#[from] coverage::CoverageError),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("window kept producing empty active sets ({attempts} attempts in one trial)")]
    DegenerateWindow { attempts: u32 },
}

/// Simulation setup. `lambda_u` is the deployed density; the active set is
/// the thinning of the deployment with retention `topology.lambda / lambda_u`.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub env: RadioEnv,
    pub topology: Topology,
    /// Deployed BS density, km^-2 (`>= topology.lambda`).
    pub lambda_u: f64,
    /// Simulation disc radius, km.
    pub window_radius: f64,
    /// Number of independent realizations.
    pub trials: u64,
    /// Reproducibility seed.
    pub seed: u64,
}

impl SimConfig {
    pub fn new(
        env: RadioEnv,
        topology: Topology,
        lambda_u: f64,
        window_radius: f64,
        trials: u64,
        seed: u64,
    ) -> Result<Self, SimError> {
        if !(lambda_u >= topology.lambda) || !lambda_u.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "lambda_u = {lambda_u} must be >= active lambda = {}",
                topology.lambda
            )));
        }
        if !(window_radius > 0.0) || !window_radius.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "window_radius = {window_radius} must be positive"
            )));
        }
        if trials < 10_000 {
            return Err(SimError::InvalidConfig(format!(
                "trials = {trials} below the 1e4 floor for reported estimates"
            )));
        }
        Ok(Self {
            env,
            topology,
            lambda_u,
            window_radius,
            trials,
            seed,
        })
    }

    /// Window radius meeting both the serving-distance rule of thumb
    /// `R >= 5 / sqrt(pi lambda / beta)` and the analytic truncation-bias
    /// bound `<= target_bias`.
    pub fn auto_window_radius(env: &RadioEnv, top: &Topology, target_bias: f64) -> Result<f64, SimError> {
        let rule = 5.0 / (core::f64::consts::PI * top.lambda / top.beta).sqrt();
        let mut radius = rule.max(10.0);
        while truncation_bias_bound(env, top, radius)? > target_bias && radius < 4096.0 {
            radius *= 1.3;
        }
        Ok(radius)
    }
}

/// Estimator output.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Estimated coverage probability.
    pub psi_hat: f64,
    /// 95% normal-approximation half width `1.96 sqrt(psi(1-psi)/trials)`.
    pub ci_halfwidth: f64,
    /// Trials that produced an estimate.
    pub trials_used: u64,
    /// Mean number of active BSs per accepted realization.
    pub mean_active_count: f64,
    /// Mean number of deployed BSs (active + sleeping) per realization.
    pub mean_total_count: f64,
    /// Realizations redrawn because no active BS fell in the window.
    pub redrawn_trials: u64,
    /// Window radius actually used, km.
    pub window_radius: f64,
    /// Analytic upper estimate of the coverage bias from truncating
    /// interference at the window edge.
    pub trunc_bias_bound: f64,
}

/// Sample a homogeneous PPP of the given density on a disc of radius
/// `window_radius` centered at the origin. Returns Cartesian points.
pub fn sample_ppp<R: Rng>(density: f64, window_radius: f64, rng: &mut R) -> Vec<[f64; 2]> {
    assert!(density > 0.0, "density must be positive");
    let mean = density * core::f64::consts::PI * window_radius * window_radius;
    let count = Poisson::new(mean).expect("valid Poisson mean").sample(rng) as usize;
    (0..count)
        .map(|_| {
            let r = window_radius * rng.gen::<f64>().sqrt();
            let angle = 2.0 * core::f64::consts::PI * rng.gen::<f64>();
            [r * angle.cos(), r * angle.sin()]
        })
        .collect()
}

/// Analytic upper estimate of how much truncating interference at radius
/// `window_radius` inflates the coverage estimate.
///
/// A success flips only if the missing interference `I_out` pushes the
/// serving fade below threshold; bounding the exponential density by the
/// covered-probability weight gives
/// `bias <= xi E[I_out] * pi lambda Int x^(alpha/2) exp(-pi lambda G x - xi nu^-1 x^(alpha/2)) dx`
/// with `E[I_out] = 2 pi (lambda/beta) R^(2-alpha) / (alpha - 2)`.
pub fn truncation_bias_bound(env: &RadioEnv, top: &Topology, window_radius: f64) -> Result<f64, SimError> {
    let spec = CoverageSpec::new(env.clone(), top.beta)?;
    let alpha = env.alpha;
    let half = alpha / 2.0;
    let a = core::f64::consts::PI * top.lambda * spec.gain();
    let nu_inv = env.sigma2 / (top.p * top.beta);
    let b = env.xi * nu_inv;
    // pi lambda Int_0^inf x^(alpha/2) exp(-a x - b x^(alpha/2)) dx via the
    // same normalization as the coverage integral.
    let (weighted, _) = crate::numerics::integrate(
        |u| (u / a).powf(half) * (-u - b * (u / a).powf(half)).exp(),
        0.0,
        60.0,
        1e-12,
    )
    .map_err(coverage::CoverageError::from)?;
    let weighted = core::f64::consts::PI * top.lambda * weighted / a;
    let interferer_density = top.lambda / top.beta;
    let mean_out = 2.0 * core::f64::consts::PI * interferer_density * window_radius.powf(2.0 - alpha)
        / (alpha - 2.0);
    Ok((env.xi * mean_out * weighted).min(1.0))
}

struct TrialOutcome {
    covered: bool,
    active: u64,
    total: u64,
    redraws: u64,
}

fn run_trial(cfg: &SimConfig, trial: u64) -> Result<TrialOutcome, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let area = core::f64::consts::PI * cfg.window_radius * cfg.window_radius;
    let mean_active = cfg.topology.lambda * area;
    let mean_sleep = (cfg.lambda_u - cfg.topology.lambda) * area;
    let active_dist = Poisson::new(mean_active).expect("positive active mean");
    let sleep_dist = (mean_sleep > 0.0).then(|| Poisson::new(mean_sleep).expect("positive sleep mean"));
    let nu_inv = cfg.env.sigma2 / (cfg.topology.p * cfg.topology.beta);
    let same_band_prob = 1.0 / cfg.topology.beta;
    let neg_half_alpha = -cfg.env.alpha / 2.0;
    let r2_scale = cfg.window_radius * cfg.window_radius;

    let mut redraws = 0u64;
    loop {
        let n_active = active_dist.sample(&mut rng) as u64;
        let n_sleep = sleep_dist.as_ref().map_or(0, |d| d.sample(&mut rng) as u64);
        if n_active == 0 {
            redraws += 1;
            if redraws >= 10_000 {
                return Err(SimError::DegenerateWindow {
                    attempts: redraws as u32,
                });
            }
            continue;
        }
        // Distances from the origin are the only geometry the SINR needs:
        // for uniform points on the disc, r^2 ~ U(0, R^2) iid.
        let mut serving_gain = 0.0f64; // h * r^-alpha of the nearest BS
        let mut serving_r2 = f64::INFINITY;
        let mut interference = 0.0f64; // sum over same-band others
        let mut serving_same_band_draw = false;
        for _ in 0..n_active {
            let r2 = r2_scale * rng.gen::<f64>();
            let fade: f64 = Exp1.sample(&mut rng);
            let same_band = rng.gen::<f64>() < same_band_prob;
            // r^-alpha = (r^2)^(-alpha/2)
            let gain = fade * r2.powf(neg_half_alpha);
            if r2 < serving_r2 {
                // Previous serving BS becomes an ordinary interferer.
                if serving_r2.is_finite() && serving_same_band_draw {
                    interference += serving_gain;
                }
                serving_r2 = r2;
                serving_gain = gain;
                serving_same_band_draw = same_band;
            } else if same_band {
                interference += gain;
            }
        }
        let sinr = serving_gain / (nu_inv + interference);
        return Ok(TrialOutcome {
            covered: sinr > cfg.env.xi,
            active: n_active,
            total: n_active + n_sleep,
            redraws,
        });
    }
}

/// Estimate the coverage probability for `cfg` by Monte Carlo.
///
/// Trials run in parallel; all accumulators are integers, so the result is
/// independent of the thread count.
pub fn estimate_coverage(cfg: &SimConfig) -> Result<SimResult, SimError> {
    let outcomes: Result<Vec<TrialOutcome>, SimError> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial))
        .collect();
    let outcomes = outcomes?;
    let covered: u64 = outcomes.iter().map(|o| o.covered as u64).sum();
    let active: u64 = outcomes.iter().map(|o| o.active).sum();
    let total: u64 = outcomes.iter().map(|o| o.total).sum();
    let redrawn: u64 = outcomes.iter().map(|o| o.redraws).sum();
    let trials = cfg.trials as f64;
    let psi_hat = covered as f64 / trials;
    Ok(SimResult {
        psi_hat,
        ci_halfwidth: 1.96 * (psi_hat * (1.0 - psi_hat) / trials).sqrt(),
        trials_used: cfg.trials,
        mean_active_count: active as f64 / trials,
        mean_total_count: total as f64 / trials,
        redrawn_trials: redrawn,
        window_radius: cfg.window_radius,
        trunc_bias_bound: truncation_bias_bound(&cfg.env, &cfg.topology, cfg.window_radius)?,
    })
}
