//! Downlink coverage probability for PPP cellular networks with random
//! frequency reuse, plus the tractable bounds the optimizer runs on.
//!
//! With active density `lambda`, per-BS power `p`, `beta` bands and the
//! normalized noise `sigma2`, the coverage probability is
//!
//! ```text
//! psi(lambda, p, beta) = pi lambda Int_0^inf exp(-pi lambda (1 + phi/beta) x
//!                                               - xi sigma2 / (p beta) x^(alpha/2)) dx
//! ```
//!
//! The substitution `u = pi lambda (1 + phi/beta) x` reduces it to
//! `psi = J(kappa) / (1 + phi/beta)` with
//! `J(kappa) = Int_0^inf exp(-u - kappa u^(alpha/2)) du` and
//! `kappa = xi sigma2 / (p beta (pi lambda (1 + phi/beta))^(alpha/2))`,
//! which is what [`psi_exact`] evaluates. For `alpha = 4`, `J` has a closed
//! form through the scaled Gaussian tail ([`psi_closed4`]).

use crate::model::{Constraints, RadioEnv, Topology};
use crate::numerics::{self, QuadratureError};
use thiserror::Error;

/// Absolute quadrature tolerance for coverage integrals. The spec for the
/// closed-form/quadrature agreement is 1e-9; this leaves three orders of
/// margin.
pub const PSI_QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Error)]
pub enum CoverageError {
    #[error("path-loss exponent alpha = {alpha} out of range (requires alpha > 2)")]
    AlphaOutOfRange { alpha: f64 },
    #[error("operation requires alpha = 4 (got alpha = {alpha})")]
    RequiresAlpha4 { alpha: f64 },
    #[error("beta must satisfy beta >= 1 (got {beta})")]
    BetaOutOfRange { beta: f64 },
    #[error("topology beta = {topology_beta} does not match coverage spec beta = {spec_beta}")]
    BetaMismatch { topology_beta: f64, spec_beta: f64 },
    #[error(
        "coverage target eta = {eta} is unattainable: psi < {max_eta} for every (lambda, p) at beta = {beta}"
    )]
    EtaInfeasible { eta: f64, max_eta: f64, beta: f64 },
    #[error("surrogate {kind:?} requires eta >= 1/2 (got eta = {eta})")]
    EtaBelowHalf { kind: SurrogateKind, eta: f64 },
    #[error("surrogate {kind:?} has no posynomial form")]
    NoPosynomialForm { kind: SurrogateKind },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Which expression stands in for the exact coverage probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurrogateKind {
    /// The defining integral, evaluated by quadrature.
    Exact,
    /// The `alpha = 4` closed form (scaled Gaussian tail).
    ClosedForm4,
    /// Lower bound from `exp(-x) >= 1 - x` applied inside the integral.
    LbE,
    /// Lower bound of `LbE` dropping the `(1 + phi/beta)` factor in the
    /// noise term; gives a posynomial constraint.
    LbBeta,
    /// Approximation replacing that factor by `(1 + phi)`; posynomial but
    /// not a bound.
    ApproxA,
    /// Lower bound from `Q(x) > x/(1+x^2) * phi(x)`; posynomial, `alpha = 4`
    /// only.
    LbQ,
}

impl SurrogateKind {
    pub const POSYNOMIAL_KINDS: [SurrogateKind; 3] =
        [SurrogateKind::LbBeta, SurrogateKind::ApproxA, SurrogateKind::LbQ];

    pub fn label(&self) -> &'static str {
        match self {
            SurrogateKind::Exact => "psi",
            SurrogateKind::ClosedForm4 => "psi-closed4",
            SurrogateKind::LbE => "psi_e",
            SurrogateKind::LbBeta => "psi_beta",
            SurrogateKind::ApproxA => "psi_a",
            SurrogateKind::LbQ => "psi_q",
        }
    }
}

/// Interference geometry factor `phi(xi, alpha)`.
///
/// `phi(xi, alpha) = xi^(2/alpha) Int_{xi^(-2/alpha)}^inf du / (1 + u^(alpha/2))`.
/// For `alpha = 4` the arctangent closed form is used; otherwise the
/// integral is mapped onto `[0, 1]` by `u = xi^(-2/alpha) s^(-2/(alpha-2))`,
/// which removes the endpoint singularity for every `alpha > 2`, and
/// integrated adaptively.
pub fn phi(xi: f64, alpha: f64) -> Result<f64, CoverageError> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(CoverageError::AlphaOutOfRange { alpha });
    }
    if alpha == 4.0 {
        return Ok(xi.sqrt() * xi.sqrt().atan());
    }
    phi_quadrature(xi, alpha)
}

/// Quadrature route for `phi`, exposed so the closed form can be
/// cross-checked against it.
pub fn phi_quadrature(xi: f64, alpha: f64) -> Result<f64, CoverageError> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(CoverageError::AlphaOutOfRange { alpha });
    }
    let m = 2.0 / (alpha - 2.0);
    let inner = alpha / (alpha - 2.0);
    let (v, _) = numerics::integrate(|s| 1.0 / (1.0 + xi * s.powf(inner)), 0.0, 1.0, 1e-13)?;
    Ok(xi * m * v)
}

/// Gaussian tail `Q(x)`; see also [`numerics::q_scaled`] for the
/// overflow-free `exp(x^2/2) Q(x)`.
pub use crate::numerics::{q_function, q_scaled};

/// Environment plus band count, with `phi(xi, alpha)` cached.
#[derive(Debug, Clone)]
pub struct CoverageSpec {
    pub env: RadioEnv,
    pub beta: f64,
    pub phi: f64,
}

impl CoverageSpec {
    pub fn new(env: RadioEnv, beta: f64) -> Result<Self, CoverageError> {
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(CoverageError::BetaOutOfRange { beta });
        }
        let phi = phi(env.xi, env.alpha)?;
        Ok(Self { env, beta, phi })
    }

    /// `1 + phi / beta`, the interference gain factor.
    pub fn gain(&self) -> f64 {
        1.0 + self.phi / self.beta
    }

    /// Interference-limited ceiling `1 / (1 + phi/beta)`; the exact coverage
    /// probability never exceeds it and attains it at `sigma2 = 0`.
    pub fn psi_ceiling(&self) -> f64 {
        1.0 / self.gain()
    }

    fn check_topology(&self, top: &Topology) -> Result<(), CoverageError> {
        let tol = 1e-9 * self.beta.max(1.0);
        if (top.beta - self.beta).abs() > tol {
            return Err(CoverageError::BetaMismatch {
                topology_beta: top.beta,
                spec_beta: self.beta,
            });
        }
        Ok(())
    }

    /// Noise exponent coefficient `kappa` after the normalizing substitution.
    fn kappa(&self, lambda: f64, p: f64) -> f64 {
        let alpha = self.env.alpha;
        self.env.xi * self.env.sigma2 / (p * self.beta * (core::f64::consts::PI * lambda * self.gain()).powf(alpha / 2.0))
    }
}

/// `J(kappa) = Int_0^inf exp(-u - kappa u^(alpha/2)) du`, in `(0, 1]`.
///
/// Two integration scales: for `kappa <= 1` the `exp(-u)` factor sets the
/// scale and `[0, 40]` truncation leaves a tail below `5e-18`; for large
/// `kappa` the substitution `u = kappa^(-2/alpha) t` moves the mass back to
/// order one.
fn j_integral(kappa: f64, alpha: f64) -> Result<f64, CoverageError> {
    debug_assert!(kappa >= 0.0);
    if kappa == 0.0 {
        return Ok(1.0);
    }
    let half = alpha / 2.0;
    let value = if kappa <= 1.0 {
        let (v, _) = numerics::integrate(|u| (-u - kappa * u.powf(half)).exp(), 0.0, 40.0, PSI_QUAD_TOL)?;
        v
    } else {
        let scale = kappa.powf(-2.0 / alpha);
        let cut = 40f64.powf(2.0 / alpha);
        let (v, _) = numerics::integrate(|t| (-(scale * t) - t.powf(half)).exp(), 0.0, cut, PSI_QUAD_TOL)?;
        v * scale
    };
    Ok(value)
}

/// Exact coverage probability by adaptive quadrature.
pub fn psi_exact(top: &Topology, spec: &CoverageSpec) -> Result<f64, CoverageError> {
    spec.check_topology(top)?;
    let j = j_integral(spec.kappa(top.lambda, top.p), spec.env.alpha)?;
    Ok(j * spec.psi_ceiling())
}

/// Closed-form coverage probability for `alpha = 4`.
///
/// `psi = sqrt(pi/kappa) * exp(x^2/2) Q(x) / (1 + phi/beta)` with
/// `x = 1/sqrt(2 kappa)`; the scaled tail keeps it finite for dense
/// networks where `x` reaches the hundreds.
pub fn psi_closed4(top: &Topology, spec: &CoverageSpec) -> Result<f64, CoverageError> {
    spec.check_topology(top)?;
    if spec.env.alpha != 4.0 {
        return Err(CoverageError::RequiresAlpha4 { alpha: spec.env.alpha });
    }
    let kappa = spec.kappa(top.lambda, top.p);
    if kappa == 0.0 {
        return Ok(spec.psi_ceiling());
    }
    let x = 1.0 / (2.0 * kappa).sqrt();
    let j = (core::f64::consts::PI / kappa).sqrt() * numerics::q_scaled(x);
    Ok(j * spec.psi_ceiling())
}

/// Evaluate the requested coverage expression. Surrogates are returned
/// unclamped: `LbE`, `LbBeta` and `LbQ` can go negative (or below any
/// target) where the noise term dominates; feasibility logic belongs to the
/// caller.
pub fn psi_surrogate(kind: SurrogateKind, top: &Topology, spec: &CoverageSpec) -> Result<f64, CoverageError> {
    spec.check_topology(top)?;
    let env = &spec.env;
    let alpha = env.alpha;
    let gain = spec.gain();
    let noise = env.xi * env.sigma2;
    let pb = top.p * spec.beta;
    match kind {
        SurrogateKind::Exact => psi_exact(top, spec),
        SurrogateKind::ClosedForm4 => psi_closed4(top, spec),
        SurrogateKind::LbE => {
            let denom = (top.lambda * core::f64::consts::PI * gain).powf(alpha / 2.0) * pb;
            Ok((1.0 - noise * numerics::gamma(1.0 + alpha / 2.0) / denom) / gain)
        }
        SurrogateKind::LbBeta => {
            let denom = (top.lambda * core::f64::consts::PI).powf(alpha / 2.0) * pb;
            Ok((1.0 - noise * numerics::gamma(1.0 + alpha / 2.0) / denom) / gain)
        }
        SurrogateKind::ApproxA => {
            let denom = (top.lambda * core::f64::consts::PI * (1.0 + spec.phi)).powf(alpha / 2.0) * pb;
            Ok((1.0 - noise * numerics::gamma(1.0 + alpha / 2.0) / denom) / gain)
        }
        SurrogateKind::LbQ => {
            if alpha != 4.0 {
                return Err(CoverageError::RequiresAlpha4 { alpha });
            }
            let t = (top.lambda * core::f64::consts::PI * gain).powi(2) * pb;
            Ok((1.0 - 2.0 * noise / (2.0 * noise + t)) / gain)
        }
    }
}

/// Monomial coverage threshold `theta(xi, eta, alpha)` for universal reuse:
/// `lambda^(alpha/2) p >= theta` is sufficient for `psi(lambda, p, 1) >= eta`.
pub fn theta(env: &RadioEnv, cn: &Constraints) -> Result<f64, CoverageError> {
    vartheta(1.0, env, cn)
}

/// Monomial threshold for a fixed band count `beta`; reduces to [`theta`]
/// at `beta = 1`.
pub fn vartheta(beta: f64, env: &RadioEnv, cn: &Constraints) -> Result<f64, CoverageError> {
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(CoverageError::BetaOutOfRange { beta });
    }
    let phi = phi(env.xi, env.alpha)?;
    let gain = 1.0 + phi / beta;
    let margin = 1.0 - cn.eta * gain;
    if margin <= 0.0 {
        return Err(CoverageError::EtaInfeasible {
            eta: cn.eta,
            max_eta: 1.0 / gain,
            beta,
        });
    }
    let alpha = env.alpha;
    let num = env.xi * env.sigma2 * numerics::gamma(1.0 + alpha / 2.0) / beta;
    Ok(num / (margin * (core::f64::consts::PI * gain).powf(alpha / 2.0)))
}

/// Coefficients of the posynomial coverage constraint
/// `c0 lambda^(-alpha/2) p^-1 beta^-1 + c1 beta^-1 + c2 beta^-2 <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosyCoeffs {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
}

impl PosyCoeffs {
    /// Left-hand side `f(lambda, p, beta)` of the constraint.
    pub fn eval(&self, lambda: f64, p: f64, beta: f64) -> f64 {
        self.c0 * lambda.powf(-self.alpha / 2.0) / (p * beta) + self.c1 / beta + self.c2 / (beta * beta)
    }

    /// Denominator `beta^2 - c1 beta - c2` of the closed-form power
    /// expressions; a candidate with a nonpositive value has no positive
    /// finite power satisfying the constraint with equality.
    pub fn power_denominator(&self, beta: f64) -> f64 {
        beta * beta - self.c1 * beta - self.c2
    }

    /// Power making the constraint active at `(lambda, beta)`, when the
    /// denominator allows one.
    pub fn binding_power(&self, lambda: f64, beta: f64) -> Option<f64> {
        let d = self.power_denominator(beta);
        if d <= 0.0 {
            return None;
        }
        Some(self.c0 * lambda.powf(-self.alpha / 2.0) * beta / d)
    }
}

/// Posynomial coefficients for the three convexifiable surrogates.
///
/// `LbQ` needs `eta >= 1/2` so that `c1 >= 0` (it is exactly zero at
/// `eta = 1/2`); the other kinds are valid for any `eta` in (0, 1).
pub fn posynomial_coeffs(kind: SurrogateKind, env: &RadioEnv, cn: &Constraints) -> Result<PosyCoeffs, CoverageError> {
    let alpha = env.alpha;
    let phi = phi(env.xi, alpha)?;
    let eta = cn.eta;
    let noise = env.xi * env.sigma2;
    let gam = numerics::gamma(1.0 + alpha / 2.0);
    let pi = core::f64::consts::PI;
    match kind {
        SurrogateKind::LbBeta => Ok(PosyCoeffs {
            c0: noise * gam / (pi.powf(alpha / 2.0) * (1.0 - eta)),
            c1: eta / (1.0 - eta) * phi,
            c2: 0.0,
            alpha,
        }),
        SurrogateKind::ApproxA => Ok(PosyCoeffs {
            c0: noise * gam / (pi.powf(alpha / 2.0) * (1.0 - eta) * (1.0 + phi).powf(alpha / 2.0)),
            c1: eta / (1.0 - eta) * phi,
            c2: 0.0,
            alpha,
        }),
        SurrogateKind::LbQ => {
            if alpha != 4.0 {
                return Err(CoverageError::RequiresAlpha4 { alpha });
            }
            if eta < 0.5 {
                return Err(CoverageError::EtaBelowHalf { kind, eta });
            }
            Ok(PosyCoeffs {
                c0: 2.0 * noise * eta / (pi * pi * (1.0 - eta)),
                c1: (2.0 * eta - 1.0) / (1.0 - eta) * phi,
                c2: eta / (1.0 - eta) * phi * phi,
                alpha,
            })
        }
        other => Err(CoverageError::NoPosynomialForm { kind: other }),
    }
}
