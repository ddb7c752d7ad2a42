//! Downlink channel models: i.i.d. Rayleigh fading and a single-wavefront
//! line-of-sight model for a uniform linear array.
//!
//! Rows are users, columns are base-station antennas. The LoS entry for user
//! k at antenna m is `g(theta_k) * exp(j 2 pi d m sin(theta_k))` with element
//! spacing `d` in wavelengths and `g` the element amplitude pattern. By
//! default each LoS row is rescaled to `||h_k||^2 = M` so that both models
//! present the same per-user channel energy to the precoder.

use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{sample_complex_gaussian_matrix, ComplexMatrix, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelModel {
    Iid,
    Los,
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelModel::Iid => "iid",
            ChannelModel::Los => "los",
        })
    }
}

impl FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(ChannelModel::Iid),
            "los" => Ok(ChannelModel::Los),
            other => Err(Error::InvalidArgument(format!(
                "unknown channel model `{other}` (expected iid|los)"
            ))),
        }
    }
}

/// Geometry and element pattern of the line-of-sight model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LosConfig {
    /// Antenna spacing in wavelengths.
    pub spacing_wl: f64,
    /// Half-power beam width of the element pattern, degrees.
    pub theta3db_deg: f64,
    /// Attenuation ceiling of the element pattern, dB.
    pub max_attenuation_db: f64,
    /// Angle-of-departure interval, degrees.
    pub aod_min_deg: f64,
    pub aod_max_deg: f64,
    /// Rescale each row to `||h_k||^2 = M`.
    pub normalize_rows: bool,
}

impl Default for LosConfig {
    fn default() -> Self {
        Self {
            spacing_wl: 0.6,
            theta3db_deg: 90.0,
            max_attenuation_db: 20.0,
            aod_min_deg: -60.0,
            aod_max_deg: 60.0,
            normalize_rows: true,
        }
    }
}

impl LosConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing_wl > 0.0) || !self.spacing_wl.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "antenna spacing must be positive, got {}",
                self.spacing_wl
            )));
        }
        if !(self.theta3db_deg > 0.0) || !self.theta3db_deg.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "3 dB beam width must be positive, got {}",
                self.theta3db_deg
            )));
        }
        if !(self.max_attenuation_db >= 0.0) || !self.max_attenuation_db.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "attenuation ceiling must be nonnegative, got {}",
                self.max_attenuation_db
            )));
        }
        if !(self.aod_min_deg <= self.aod_max_deg)
            || !self.aod_min_deg.is_finite()
            || !self.aod_max_deg.is_finite()
        {
            return Err(Error::InvalidArgument(format!(
                "bad angle-of-departure interval [{}, {}]",
                self.aod_min_deg, self.aod_max_deg
            )));
        }
        Ok(())
    }
}

fn check_dims(users: usize, antennas: usize) -> Result<()> {
    if users == 0 || antennas == 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least one user and one antenna, got K={users}, M={antennas}"
        )));
    }
    Ok(())
}

/// K x M matrix of i.i.d. unit-variance complex Gaussian entries.
pub fn iid_rayleigh(users: usize, antennas: usize, stream: &mut RngStream) -> Result<ComplexMatrix> {
    check_dims(users, antennas)?;
    Ok(sample_complex_gaussian_matrix(users, antennas, 1.0, stream))
}

/// Element amplitude at `azimuth_deg` off boresight: the attenuation is
/// `min(12 (az / theta3db)^2, ceiling)` in dB, returned as linear amplitude.
pub fn element_pattern_amplitude(
    azimuth_deg: f64,
    theta3db_deg: f64,
    max_attenuation_db: f64,
) -> f64 {
    let ratio = azimuth_deg / theta3db_deg;
    let att_db = (12.0 * ratio * ratio).min(max_attenuation_db);
    10f64.powf(-att_db / 20.0)
}

/// Draw one angle of departure, uniform over the configured interval.
pub fn sample_aod_deg(cfg: &LosConfig, stream: &mut RngStream) -> f64 {
    stream.uniform(cfg.aod_min_deg, cfg.aod_max_deg)
}

/// LoS channel for explicitly given angles of departure (one per user).
pub fn los_channel_for_aods(
    antennas: usize,
    cfg: &LosConfig,
    aods_deg: &[f64],
) -> Result<ComplexMatrix> {
    check_dims(aods_deg.len(), antennas)?;
    cfg.validate()?;
    if let Some(theta) = aods_deg.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "angle of departure must be finite, got {theta}"
        )));
    }
    let mut h = ComplexMatrix::zeros(aods_deg.len(), antennas);
    for (k, &theta_deg) in aods_deg.iter().enumerate() {
        let g = element_pattern_amplitude(theta_deg, cfg.theta3db_deg, cfg.max_attenuation_db);
        let step = 2.0 * std::f64::consts::PI * cfg.spacing_wl * theta_deg.to_radians().sin();
        for m in 0..antennas {
            h[(k, m)] = g * Complex64::cis(step * m as f64);
        }
        if cfg.normalize_rows {
            let scale = (antennas as f64 / h.row_norm_sqr(k)).sqrt();
            for m in 0..antennas {
                h[(k, m)] *= scale;
            }
        }
    }
    Ok(h)
}

/// LoS channel with one freshly sampled angle of departure per user.
pub fn los_channel(
    users: usize,
    antennas: usize,
    cfg: &LosConfig,
    stream: &mut RngStream,
) -> Result<ComplexMatrix> {
    check_dims(users, antennas)?;
    cfg.validate()?;
    let aods: Vec<f64> = (0..users).map(|_| sample_aod_deg(cfg, stream)).collect();
    los_channel_for_aods(antennas, cfg, &aods)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derive_stream;

    // 1. Shapes and bitwise determinism of the Rayleigh model.
    #[test]
    fn iid_shape_and_determinism() {
        let mut a = derive_stream(20, 0);
        let mut b = derive_stream(20, 0);
        let ha = iid_rayleigh(3, 8, &mut a).unwrap();
        let hb = iid_rayleigh(3, 8, &mut b).unwrap();
        assert_eq!(ha.rows(), 3);
        assert_eq!(ha.cols(), 8);
        assert_eq!(ha, hb);
        assert!(matches!(
            iid_rayleigh(0, 8, &mut a),
            Err(Error::InvalidArgument(_))
        ));
    }

    // 2. Row energy concentrates at M: mean ||h_k||^2 over many draws.
    #[test]
    fn iid_row_energy() {
        let mut s = derive_stream(21, 0);
        let (users, antennas, reps) = (10, 100, 1000);
        let mut sum = 0.0;
        for _ in 0..reps {
            let h = iid_rayleigh(users, antennas, &mut s).unwrap();
            for k in 0..users {
                sum += h.row_norm_sqr(k);
            }
        }
        let mean = sum / (users * reps) as f64;
        assert!((mean - 100.0).abs() < 1.0, "mean row energy {mean}");
    }

    // 3. Projection of one row onto another unit row has unit second moment.
    #[test]
    fn iid_cross_row_projection() {
        let mut s = derive_stream(22, 0);
        let reps = 10_000;
        let mut sum = 0.0;
        for _ in 0..reps {
            let h = iid_rayleigh(2, 8, &mut s).unwrap();
            let dot: num_complex::Complex64 = h
                .row(0)
                .iter()
                .zip(h.row(1))
                .map(|(a, b)| a * b.conj())
                .sum();
            sum += dot.norm_sqr() / h.row_norm_sqr(1);
        }
        let mean = sum / reps as f64;
        assert!((mean - 1.0).abs() < 0.05, "cross projection power {mean}");
    }

    // 4. Element pattern anchor points for theta3db = 90, ceiling 20 dB.
    #[test]
    fn element_pattern_values() {
        let g = |az| element_pattern_amplitude(az, 90.0, 20.0);
        assert!((g(0.0) - 1.0).abs() < 1e-15);
        assert!((g(45.0) - 10f64.powf(-3.0 / 20.0)).abs() < 1e-12); // 3 dB point of the quadratic
        assert!((g(90.0) - 10f64.powf(-12.0 / 20.0)).abs() < 1e-12);
        assert_eq!(g(45.0), g(-45.0));
        assert!((g(1e4) - 10f64.powf(-1.0)).abs() < 1e-12); // clipped at the ceiling
        assert_eq!(element_pattern_amplitude(77.0, 90.0, 0.0), 1.0);
    }

    // 5. AoD sampling respects the interval, also when degenerate.
    #[test]
    fn aod_sampling() {
        let cfg = LosConfig::default();
        let mut s = derive_stream(23, 0);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let t = sample_aod_deg(&cfg, &mut s);
            assert!((-60.0..60.0).contains(&t));
            sum += t;
        }
        assert!((sum / 10_000.0).abs() < 2.0);

        let pinned = LosConfig {
            aod_min_deg: 30.0,
            aod_max_deg: 30.0,
            ..LosConfig::default()
        };
        assert_eq!(sample_aod_deg(&pinned, &mut s), 30.0);
    }

    // 6. Boresight user without normalization: every entry is exactly 1.
    #[test]
    fn los_boresight_row() {
        let cfg = LosConfig {
            normalize_rows: false,
            ..LosConfig::default()
        };
        let h = los_channel_for_aods(16, &cfg, &[0.0]).unwrap();
        for m in 0..16 {
            assert!((h[(0, m)] - Complex64::ONE).norm() < 1e-15);
        }
    }

    // 7. Normalization pins every row to ||h_k||^2 = M.
    #[test]
    fn los_row_normalization() {
        let cfg = LosConfig::default();
        let h = los_channel_for_aods(64, &cfg, &[-47.0, 3.5, 12.0, 59.9]).unwrap();
        for k in 0..4 {
            let rel = (h.row_norm_sqr(k) - 64.0).abs() / 64.0;
            assert!(rel < 1e-12, "row {k} energy off by {rel}");
        }
    }

    // 8. Without normalization the row energy carries the element pattern.
    #[test]
    fn los_row_energy_tracks_pattern() {
        let cfg = LosConfig {
            normalize_rows: false,
            ..LosConfig::default()
        };
        let h = los_channel_for_aods(32, &cfg, &[45.0]).unwrap();
        let g = element_pattern_amplitude(45.0, 90.0, 20.0);
        assert!((h.row_norm_sqr(0) - 32.0 * g * g).abs() < 1e-10);
    }

    // 9. Equal angles give identical rows.
    #[test]
    fn los_equal_aods_are_parallel() {
        let h = los_channel_for_aods(24, &LosConfig::default(), &[17.0, 17.0]).unwrap();
        for m in 0..24 {
            assert!((h[(0, m)] - h[(1, m)]).norm() < 1e-14);
        }
    }

    // 10. Row correlation obeys the Dirichlet kernel of the array:
    //     |h_i h_j^H| / M = |sin(M x / 2) / (M sin(x / 2))| with
    //     x = 2 pi d (sin t_i - sin t_j).
    #[test]
    fn los_correlation_matches_dirichlet_kernel() {
        let cfg = LosConfig::default();
        let (m, t1, t2) = (32usize, 10.0f64, 25.0f64);
        let h = los_channel_for_aods(m, &cfg, &[t1, t2]).unwrap();
        let dot: Complex64 = h
            .row(0)
            .iter()
            .zip(h.row(1))
            .map(|(a, b)| a * b.conj())
            .sum();
        let x = 2.0 * std::f64::consts::PI
            * cfg.spacing_wl
            * (t1.to_radians().sin() - t2.to_radians().sin());
        let expected = (f64::sin(m as f64 * x / 2.0) / (m as f64 * f64::sin(x / 2.0))).abs();
        assert!(
            (dot.norm() / m as f64 - expected).abs() < 1e-10,
            "{} vs {}",
            dot.norm() / m as f64,
            expected
        );
    }

    // 11. Single-antenna normalized row has unit magnitude.
    #[test]
    fn los_single_antenna() {
        let h = los_channel_for_aods(1, &LosConfig::default(), &[40.0]).unwrap();
        assert!((h[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    // 12. Sampled LoS channel is deterministic and in-range.
    #[test]
    fn los_sampling_determinism() {
        let cfg = LosConfig::default();
        let mut a = derive_stream(24, 5);
        let mut b = derive_stream(24, 5);
        let ha = los_channel(4, 16, &cfg, &mut a).unwrap();
        let hb = los_channel(4, 16, &cfg, &mut b).unwrap();
        assert_eq!(ha, hb);
    }

    // 13. Config validation rejects nonsense geometry.
    #[test]
    fn los_config_validation() {
        let bad = [
            LosConfig {
                spacing_wl: 0.0,
                ..LosConfig::default()
            },
            LosConfig {
                theta3db_deg: -90.0,
                ..LosConfig::default()
            },
            LosConfig {
                max_attenuation_db: -1.0,
                ..LosConfig::default()
            },
            LosConfig {
                aod_min_deg: 10.0,
                aod_max_deg: -10.0,
                ..LosConfig::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::InvalidArgument(_))));
        }
        assert!(LosConfig::default().validate().is_ok());
    }

    // 14. Model names round-trip through FromStr/Display.
    #[test]
    fn model_names() {
        assert_eq!("iid".parse::<ChannelModel>().unwrap(), ChannelModel::Iid);
        assert_eq!("los".parse::<ChannelModel>().unwrap(), ChannelModel::Los);
        assert_eq!(ChannelModel::Los.to_string(), "los");
        assert!("rayleigh".parse::<ChannelModel>().is_err());
    }
}
