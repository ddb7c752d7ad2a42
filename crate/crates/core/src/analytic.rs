//! Closed-form link budgets for the i.i.d. Rayleigh downlink.
//!
//! Total transmit power is held at `P = N0 * SNR_t / M` so that the
//! cell-wide SNR budget `SNR_t` stays fixed while antennas are added. Under
//! that normalization the large-system SINR approximations are
//!
//! * matched filter:  `SNR_t / (1 + SNR_t (K - 1) / M)`
//! * zero forcing:    `SNR_t (1 - K / M)`
//!
//! and the interference-free bound is `SNR_t` itself. Transmit branch errors
//! multiply the MF SINR by `e^{-sigma_phi^2} / (1 + sigma_a^2)`, or by the
//! small-error form `1 / (1 + sigma^2)` with `sigma^2 = sigma_a^2 +
//! sigma_phi^2`. The `antennas_for_3db` rules invert these expressions at
//! the point 3 dB below the interference-free bound.

use crate::error::{Error, Result};
use crate::impairments::ImpairmentConfig;
use crate::precoding::Precoder;

/// Operating point: array size, user count, cell SNR budget, noise power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    pub antennas: usize,
    pub users: usize,
    pub snr_t_db: f64,
    pub n0: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 || self.users == 0 {
            return Err(Error::InvalidArgument(format!(
                "need at least one antenna and one user, got M={}, K={}",
                self.antennas, self.users
            )));
        }
        if !self.snr_t_db.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "SNR budget must be finite dB, got {}",
                self.snr_t_db
            )));
        }
        if !(self.n0 > 0.0) || !self.n0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise power must be positive, got {}",
                self.n0
            )));
        }
        Ok(())
    }

    pub fn snr_t_linear(&self) -> f64 {
        10f64.powf(self.snr_t_db / 10.0)
    }
}

/// Per-symbol transmit power `N0 * SNR_t / M`.
pub fn tx_power(budget: &LinkBudget) -> f64 {
    budget.n0 * budget.snr_t_linear() / budget.antennas as f64
}

fn mf_sinr_at(snr: f64, users: usize, antennas: f64) -> f64 {
    snr / (1.0 + snr * (users as f64 - 1.0) / antennas)
}

/// Matched-filter SINR approximation (linear).
pub fn sinr_mf(budget: &LinkBudget) -> f64 {
    mf_sinr_at(budget.snr_t_linear(), budget.users, budget.antennas as f64)
}

/// Zero-forcing SINR approximation (linear); needs M > K.
pub fn sinr_zf(budget: &LinkBudget) -> Result<f64> {
    if budget.antennas <= budget.users {
        return Err(Error::NotEnoughAntennas {
            antennas: budget.antennas,
            users: budget.users,
        });
    }
    Ok(budget.snr_t_linear() * (1.0 - budget.users as f64 / budget.antennas as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorFactorMode {
    /// `e^{-sigma_phi^2} / (1 + sigma_a^2)`.
    Exact,
    /// `1 / (1 + sigma_a^2 + sigma_phi^2)`, valid for small spreads.
    SmallError,
}

/// Multiplicative SINR penalty of transmit branch errors (1 when error-free).
pub fn error_factor(cfg: &ImpairmentConfig, mode: ErrorFactorMode) -> f64 {
    let a2 = cfg.sigma_a_lin() * cfg.sigma_a_lin();
    let p2 = cfg.sigma_phi_rad() * cfg.sigma_phi_rad();
    match mode {
        ErrorFactorMode::Exact => (-p2).exp() / (1.0 + a2),
        ErrorFactorMode::SmallError => 1.0 / (1.0 + a2 + p2),
    }
}

/// Matched-filter SINR with branch errors folded in.
pub fn sinr_mf_impaired(
    budget: &LinkBudget,
    cfg: &ImpairmentConfig,
    mode: ErrorFactorMode,
) -> f64 {
    sinr_mf(budget) * error_factor(cfg, mode)
}

/// Shannon rate `log2(1 + sinr)` in bit/s/Hz.
pub fn rate_from_sinr(sinr: f64) -> Result<f64> {
    if !(sinr >= 0.0) || !sinr.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "SINR must be nonnegative, got {sinr}"
        )));
    }
    Ok((1.0 + sinr).log2())
}

/// Sum rate of K symmetric users at the same SINR.
pub fn sum_rate_analytic(users: usize, sinr: f64) -> Result<f64> {
    Ok(users as f64 * rate_from_sinr(sinr)?)
}

fn rule_factor(cfg: &ImpairmentConfig) -> Result<f64> {
    let sigma2 = cfg.sigma_a_lin().powi(2) + cfg.sigma_phi_rad().powi(2);
    if sigma2 >= 1.0 {
        return Err(Error::Infeasible(format!(
            "combined error spread sigma^2 = {sigma2:.4} >= 1: no antenna count reaches 3 dB below the interference-free bound"
        )));
    }
    Ok((1.0 + sigma2) / (1.0 - sigma2))
}

/// Antenna count (before rounding) at which the precoder sits 3 dB below
/// the interference-free SINR. MF scales as `(K - 1) SNR_t`, inflated by
/// `(1 + sigma^2) / (1 - sigma^2)` under branch errors (small-error form);
/// ZF needs `2 K` regardless of branch errors.
pub fn antennas_for_3db_unrounded(
    precoder: Precoder,
    users: usize,
    snr_t_db: f64,
    cfg: &ImpairmentConfig,
) -> Result<f64> {
    if users == 0 {
        return Err(Error::InvalidArgument("need at least one user".into()));
    }
    if !snr_t_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "SNR budget must be finite dB, got {snr_t_db}"
        )));
    }
    match precoder {
        Precoder::Mf => {
            let snr = 10f64.powf(snr_t_db / 10.0);
            Ok(rule_factor(cfg)? * (users as f64 - 1.0) * snr)
        }
        Precoder::ZfExact | Precoder::ZfScaled => Ok(2.0 * users as f64),
    }
}

/// [`antennas_for_3db_unrounded`] rounded up to a whole array (at least 1).
pub fn antennas_for_3db(
    precoder: Precoder,
    users: usize,
    snr_t_db: f64,
    cfg: &ImpairmentConfig,
) -> Result<usize> {
    let real = antennas_for_3db_unrounded(precoder, users, snr_t_db, cfg)?;
    Ok((real.ceil() as usize).max(1))
}
