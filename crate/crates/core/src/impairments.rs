//! Per-antenna transmit branch errors.
//!
//! Each branch m carries a multiplicative error `eps_m = (1 + a_m) e^{j phi_m}`
//! with `a_m ~ N(0, sigma_a^2)` (linear gain spread) and `phi_m ~ N(0,
//! sigma_phi^2)` (radians). The same error vector applies to every user's row
//! because the errors live in the transmitter hardware, not in the channel.
//!
//! Gain spread is usually quoted in dB; the convention here is that a spread
//! of x dB means a one-sigma amplitude excursion to `10^(x/20)`, so
//! `sigma_a = 10^(x/20) - 1` in linear units. A linear sigma can also be
//! given directly via [`ImpairmentConfig::from_linear`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, RngStream};

/// One-sigma linear gain spread for a dB-quoted spread: `10^(db/20) - 1`.
pub fn sigma_a_linear(sigma_a_db: f64) -> Result<f64> {
    if !(sigma_a_db >= 0.0) || !sigma_a_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gain error spread must be nonnegative dB, got {sigma_a_db}"
        )));
    }
    Ok(10f64.powf(sigma_a_db / 20.0) - 1.0)
}

/// Branch error magnitudes, stored in both quoted and working units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImpairmentConfig {
    sigma_a_db: f64,
    sigma_phi_deg: f64,
    sigma_a_lin: f64,
    sigma_phi_rad: f64,
}

impl ImpairmentConfig {
    pub fn none() -> Self {
        Self {
            sigma_a_db: 0.0,
            sigma_phi_deg: 0.0,
            sigma_a_lin: 0.0,
            sigma_phi_rad: 0.0,
        }
    }

    pub fn from_db(sigma_a_db: f64, sigma_phi_deg: f64) -> Result<Self> {
        if !(sigma_phi_deg >= 0.0) || !sigma_phi_deg.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "phase error spread must be nonnegative degrees, got {sigma_phi_deg}"
            )));
        }
        Ok(Self {
            sigma_a_db,
            sigma_phi_deg,
            sigma_a_lin: sigma_a_linear(sigma_a_db)?,
            sigma_phi_rad: sigma_phi_deg.to_radians(),
        })
    }

    /// Build directly from working units (linear amplitude sigma, radians).
    pub fn from_linear(sigma_a_lin: f64, sigma_phi_rad: f64) -> Result<Self> {
        if !(sigma_a_lin >= 0.0) || !sigma_a_lin.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "linear gain spread must be nonnegative, got {sigma_a_lin}"
            )));
        }
        if !(sigma_phi_rad >= 0.0) || !sigma_phi_rad.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "phase spread must be nonnegative radians, got {sigma_phi_rad}"
            )));
        }
        Ok(Self {
            sigma_a_db: 20.0 * (1.0 + sigma_a_lin).log10(),
            sigma_phi_deg: sigma_phi_rad.to_degrees(),
            sigma_a_lin,
            sigma_phi_rad,
        })
    }

    pub fn sigma_a_db(&self) -> f64 {
        self.sigma_a_db
    }

    pub fn sigma_phi_deg(&self) -> f64 {
        self.sigma_phi_deg
    }

    pub fn sigma_a_lin(&self) -> f64 {
        self.sigma_a_lin
    }

    pub fn sigma_phi_rad(&self) -> f64 {
        self.sigma_phi_rad
    }

    pub fn is_zero(&self) -> bool {
        self.sigma_a_lin == 0.0 && self.sigma_phi_rad == 0.0
    }
}

/// Draw one error per antenna (gain first, then phase). A zero config
/// returns exactly 1 for every branch without touching the stream.
pub fn sample_branch_errors(
    antennas: usize,
    cfg: &ImpairmentConfig,
    stream: &mut RngStream,
) -> Vec<Complex64> {
    if cfg.is_zero() {
        return vec![Complex64::ONE; antennas];
    }
    (0..antennas)
        .map(|_| {
            let a = cfg.sigma_a_lin * stream.standard_normal();
            let phi = cfg.sigma_phi_rad * stream.standard_normal();
            (1.0 + a) * Complex64::cis(phi)
        })
        .collect()
}

/// Perturbed channel `H diag(eps)`: column m of H scaled by `eps[m]`.
pub fn apply_branch_errors(h: &ComplexMatrix, errors: &[Complex64]) -> Result<ComplexMatrix> {
    if errors.len() != h.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} branch errors for {} antennas",
            errors.len(),
            h.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(h.rows(), h.cols(), |k, m| {
        h[(k, m)] * errors[m]
    }))
}
