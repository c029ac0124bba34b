//! Domain parameter types and the area power consumption objective.
//!
//! All values are stored in linear units (watts, km^-2, linear SINR); the
//! dB/dBm helpers at the bottom are for I/O boundaries. Every type checks
//! its invariants once, in its constructor, and is immutable afterwards.

use thiserror::Error;

/// Invalid model parameters or an out-of-domain evaluation.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("invalid {name}: {value} (requires {requirement})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("active density lambda = {lambda} exceeds deployed density lambda_u = {lambda_u}")]
    DensityAboveDeployed { lambda: f64, lambda_u: f64 },
}

fn require(ok: bool, name: &'static str, value: f64, requirement: &'static str) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            requirement,
        })
    }
}

/// Propagation and noise parameters.
///
/// `sigma2` is the normalized noise power `noise_total / path_loss_unit`
/// that the coverage integrals consume; it is derived once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioEnv {
    /// Path-loss exponent, `> 2`.
    pub alpha: f64,
    /// Minimum required SINR, linear scale.
    pub xi: f64,
    /// Linear path gain at the unit distance of 1 km.
    pub path_loss_unit: f64,
    /// Total noise power over the full bandwidth, watts.
    pub noise_total: f64,
    /// Normalized noise `noise_total / path_loss_unit` (cached).
    pub sigma2: f64,
}

impl RadioEnv {
    pub fn new(alpha: f64, xi: f64, path_loss_unit: f64, noise_total: f64) -> Result<Self, ModelError> {
        require(alpha.is_finite() && alpha > 2.0, "alpha", alpha, "alpha > 2")?;
        require(xi.is_finite() && xi > 0.0, "xi", xi, "xi > 0")?;
        require(
            path_loss_unit.is_finite() && path_loss_unit > 0.0,
            "path_loss_unit",
            path_loss_unit,
            "A > 0",
        )?;
        require(
            noise_total.is_finite() && noise_total >= 0.0,
            "noise_total",
            noise_total,
            "noise >= 0",
        )?;
        Ok(Self {
            alpha,
            xi,
            path_loss_unit,
            noise_total,
            sigma2: noise_total / path_loss_unit,
        })
    }

    /// The noise-free special case (interference-limited network).
    pub fn noiseless(alpha: f64, xi: f64) -> Result<Self, ModelError> {
        Self::new(alpha, xi, 1.0, 0.0)
    }

    /// Same environment with a different SINR threshold.
    pub fn with_xi(&self, xi: f64) -> Result<Self, ModelError> {
        Self::new(self.alpha, xi, self.path_loss_unit, self.noise_total)
    }

    /// Same environment with a different path-loss exponent.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self, ModelError> {
        Self::new(alpha, self.xi, self.path_loss_unit, self.noise_total)
    }
}

/// Affine per-BS power consumption model.
///
/// An active BS consumes `p_active_standby + delta_p * p`; a sleeping BS
/// consumes `p_sleep`. `p_bar = p_active_standby - p_sleep` is the saving
/// unlocked by putting one BS to sleep and is cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerModel {
    /// Standby power consumption of an active BS, watts.
    pub p_active_standby: f64,
    /// Sleep-mode power consumption, watts.
    pub p_sleep: f64,
    /// Slope of the affine model (dimensionless).
    pub delta_p: f64,
    /// Maximum BS transmit power, watts.
    pub p_max: f64,
    /// `p_active_standby - p_sleep` (cached, always `> 0`).
    pub p_bar: f64,
}

impl PowerModel {
    pub fn new(p_active_standby: f64, p_sleep: f64, delta_p: f64, p_max: f64) -> Result<Self, ModelError> {
        require(
            p_sleep.is_finite() && p_sleep >= 0.0,
            "p_sleep",
            p_sleep,
            "P_s >= 0",
        )?;
        require(
            p_active_standby.is_finite() && p_active_standby > p_sleep,
            "p_active_standby",
            p_active_standby,
            "P_a > P_s",
        )?;
        require(delta_p.is_finite() && delta_p > 0.0, "delta_p", delta_p, "delta_p > 0")?;
        require(p_max.is_finite() && p_max > 0.0, "p_max", p_max, "P_max > 0")?;
        Ok(Self {
            p_active_standby,
            p_sleep,
            delta_p,
            p_max,
            p_bar: p_active_standby - p_sleep,
        })
    }

    /// Same model with the sleep saving `p_bar` pinned to a fraction of
    /// `p_active_standby` (sweeps vary `p_sleep`, not `p_active_standby`).
    pub fn with_pbar_fraction(&self, fraction: f64) -> Result<Self, ModelError> {
        require(
            fraction > 0.0 && fraction <= 1.0,
            "pbar_fraction",
            fraction,
            "0 < fraction <= 1",
        )?;
        let p_sleep = self.p_active_standby * (1.0 - fraction);
        Self::new(self.p_active_standby, p_sleep, self.delta_p, self.p_max)
    }
}

/// Network requirements: coverage target and density bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    /// Required coverage probability, in (0, 1).
    pub eta: f64,
    /// Minimum BS density required for capacity, km^-2.
    pub lambda_l: f64,
    /// Deployed BS density, km^-2.
    pub lambda_u: f64,
}

impl Constraints {
    pub fn new(eta: f64, lambda_l: f64, lambda_u: f64) -> Result<Self, ModelError> {
        require(eta.is_finite() && eta > 0.0 && eta < 1.0, "eta", eta, "0 < eta < 1")?;
        require(
            lambda_l.is_finite() && lambda_l > 0.0,
            "lambda_l",
            lambda_l,
            "lambda_l > 0",
        )?;
        require(
            lambda_u.is_finite() && lambda_u >= lambda_l,
            "lambda_u",
            lambda_u,
            "lambda_u >= lambda_l",
        )?;
        Ok(Self {
            eta,
            lambda_l,
            lambda_u,
        })
    }

    /// Same bounds with a different coverage target.
    pub fn with_eta(&self, eta: f64) -> Result<Self, ModelError> {
        Self::new(eta, self.lambda_l, self.lambda_u)
    }
}

/// A candidate operating point: active density, transmit power, band count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Topology {
    /// Active BS density, km^-2.
    pub lambda: f64,
    /// Per-BS transmit power, watts.
    pub p: f64,
    /// Number of frequency bands (real-valued, `>= 1`).
    pub beta: f64,
}

impl Topology {
    pub fn new(lambda: f64, p: f64, beta: f64) -> Result<Self, ModelError> {
        require(lambda.is_finite() && lambda > 0.0, "lambda", lambda, "lambda > 0")?;
        require(p.is_finite() && p > 0.0, "p", p, "p > 0")?;
        require(beta.is_finite() && beta >= 1.0, "beta", beta, "beta >= 1")?;
        Ok(Self { lambda, p, beta })
    }
}

/// Reduced APC objective `lambda * (p_bar + delta_p * p)`, watts/km^2.
///
/// This is the part of the area power consumption the optimizers act on;
/// the sleep floor `lambda_u * p_sleep` is an additive constant.
pub fn apc_reduced(top: &Topology, pm: &PowerModel) -> f64 {
    top.lambda * (pm.p_bar + pm.delta_p * top.p)
}

/// Full area power consumption `lambda (p_bar + delta_p p) + lambda_u p_sleep`,
/// watts/km^2.
///
/// Errors if the active density exceeds the deployed density.
pub fn apc(top: &Topology, pm: &PowerModel, cn: &Constraints) -> Result<f64, ModelError> {
    if top.lambda > cn.lambda_u * (1.0 + 1e-12) {
        return Err(ModelError::DensityAboveDeployed {
            lambda: top.lambda,
            lambda_u: cn.lambda_u,
        });
    }
    Ok(apc_reduced(top, pm) + cn.lambda_u * pm.p_sleep)
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// dB to linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Table-style reference parameters used across tests and experiment
/// defaults: 1 km^-2 deployed, 0.2 km^-2 floor, 49 dBm max power, 185 W
/// standby, slope 4.7, -128.1 dB path gain at 1 km, -100.99 dBm total
/// noise, -6 dB SINR target.
pub mod reference {
    use super::*;

    pub const P_A: f64 = 185.0;
    pub const DELTA_P: f64 = 4.7;
    pub const LAMBDA_L: f64 = 0.2;
    pub const LAMBDA_U: f64 = 1.0;
    pub const P_MAX_DBM: f64 = 49.0;
    pub const PATH_LOSS_DB: f64 = -128.1;
    pub const NOISE_TOTAL_DBM: f64 = -100.99;
    pub const XI_DB: f64 = -6.0;

    pub fn radio_env(alpha: f64) -> RadioEnv {
        RadioEnv::new(
            alpha,
            db_to_linear(XI_DB),
            db_to_linear(PATH_LOSS_DB),
            dbm_to_watts(NOISE_TOTAL_DBM),
        )
        .expect("reference radio env is valid")
    }

    pub fn power_model() -> PowerModel {
        // p_sleep = 0: ideal switching off; sweeps derive other p_bar values.
        PowerModel::new(P_A, 0.0, DELTA_P, dbm_to_watts(P_MAX_DBM)).expect("reference power model is valid")
    }

    pub fn constraints(eta: f64) -> Constraints {
        Constraints::new(eta, LAMBDA_L, LAMBDA_U).expect("reference constraints are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma2_is_noise_over_path_gain() {
        let env = reference::radio_env(4.0);
        assert_eq!(env.sigma2, env.noise_total / env.path_loss_unit);
        // Frozen: 10^(-13.099) / 10^(-12.81) = 10^(-0.289).
        assert!((env.sigma2 - 0.51404365158242608).abs() < 5e-15);
    }

    #[test]
    fn apc_at_full_power_full_density() {
        // lambda = 1, p = 49 dBm, P_a = 185, P_s = 0, delta_p = 4.7:
        // hand evaluation of the affine model gives 558.334 W/km^2.
        let pm = reference::power_model();
        let cn = reference::constraints(0.8);
        let top = Topology::new(1.0, dbm_to_watts(49.0), 1.0).unwrap();
        let total = apc(&top, &pm, &cn).unwrap();
        assert!((total - 558.3342703204123).abs() < 1e-9);
        assert!((total - 558.33).abs() < 0.01);
        assert_eq!(total, apc_reduced(&top, &pm)); // p_sleep = 0
    }

    #[test]
    fn apc_vanishes_in_all_sleep_limit() {
        // lambda -> 0 with P_s = 0 drives the APC to zero.
        let pm = reference::power_model();
        let cn = reference::constraints(0.8);
        let top = Topology::new(1e-300, 1.0, 1.0).unwrap();
        assert!(apc(&top, &pm, &cn).unwrap() < 1e-290);
    }

    #[test]
    fn degenerate_power_model_rejected() {
        // P_s = P_a would make p_bar = 0; the constructor refuses it.
        let err = PowerModel::new(185.0, 185.0, 4.7, 10.0);
        assert!(err.is_err());
    }

    #[test]
    fn apc_rejects_density_above_deployed() {
        let pm = reference::power_model();
        let cn = reference::constraints(0.8);
        let top = Topology::new(1.5, 1.0, 1.0).unwrap();
        assert!(matches!(
            apc(&top, &pm, &cn),
            Err(ModelError::DensityAboveDeployed { .. })
        ));
    }

    #[test]
    fn apc_total_minus_sleep_floor_is_reduced() {
        let pm = PowerModel::new(185.0, 40.0, 4.7, 80.0).unwrap();
        let cn = reference::constraints(0.8);
        let top = Topology::new(0.4, 12.0, 2.0).unwrap();
        let total = apc(&top, &pm, &cn).unwrap();
        assert!((total - cn.lambda_u * pm.p_sleep - apc_reduced(&top, &pm)).abs() < 1e-12);
    }

    #[test]
    fn apc_is_increasing_in_lambda_and_p() {
        let pm = reference::power_model();
        for (l1, p1, l2, p2) in [(0.2, 5.0, 0.3, 5.0), (0.2, 5.0, 0.2, 6.0), (0.5, 10.0, 0.6, 11.0)] {
            let a1 = apc_reduced(&Topology::new(l1, p1, 1.0).unwrap(), &pm);
            let a2 = apc_reduced(&Topology::new(l2, p2, 1.0).unwrap(), &pm);
            assert!(a2 > a1);
        }
    }

    #[test]
    fn unit_conversions_round_trip() {
        assert!((dbm_to_watts(49.0) - 79.43282347242815).abs() < 1e-12);
        assert!((watts_to_dbm(dbm_to_watts(39.0)) - 39.0).abs() < 1e-12);
        assert!((db_to_linear(-6.0) - 0.251188643150958).abs() < 1e-15);
        assert!((linear_to_db(db_to_linear(-27.11)) + 27.11).abs() < 1e-12);
    }

    #[test]
    fn pbar_fraction_sweeps_sleep_power() {
        let pm = reference::power_model().with_pbar_fraction(0.25).unwrap();
        assert!((pm.p_bar - 0.25 * 185.0).abs() < 1e-12);
        assert!((pm.p_sleep - 0.75 * 185.0).abs() < 1e-12);
    }
}
