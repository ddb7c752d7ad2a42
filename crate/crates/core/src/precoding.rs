//! Linear downlink precoders. `W` is M x K: column k is the beamforming
//! vector for user k, applied to a K x M channel `H`.
//!
//! Matched filter: `w_k = h_k^H / ||h_k||`, or divided by the expected norm
//! `sqrt(M (1 + sigma_a^2))` when the channel estimate carries branch errors
//! and per-vector normalization is not wanted.
//!
//! Zero forcing comes in two flavors built on the right pseudoinverse
//! `H^+ = H^H (H H^H)^{-1}`: per-column unit normalization (each user gets a
//! unit-energy beam, residual interference exactly zero), or the uniform
//! scaling `sqrt(M - K) H^+` which makes `H W = sqrt(M - K) I` and keeps
//! `E[||W||_F^2] = K` over i.i.d. Rayleigh channels.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{right_pseudoinverse, ComplexMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precoder {
    Mf,
    ZfExact,
    ZfScaled,
}

impl fmt::Display for Precoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precoder::Mf => "mf",
            Precoder::ZfExact => "zf_exact",
            Precoder::ZfScaled => "zf_scaled",
        })
    }
}

impl FromStr for Precoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mf" => Ok(Precoder::Mf),
            "zf_exact" => Ok(Precoder::ZfExact),
            "zf_scaled" => Ok(Precoder::ZfScaled),
            other => Err(Error::InvalidArgument(format!(
                "unknown precoder `{other}` (expected mf|zf_exact|zf_scaled)"
            ))),
        }
    }
}

/// Matched-filter normalization mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MfNorm {
    /// Divide each beam by the actual norm of its channel row.
    PerVector,
    /// Divide by `sqrt(M (1 + sigma_a_lin^2))`, the expected norm of a
    /// branch-error-perturbed row; the analysis form for impaired channels.
    Expected { sigma_a_lin: f64 },
}

pub fn mf_precoder(h: &ComplexMatrix, norm: MfNorm) -> Result<ComplexMatrix> {
    let (k_users, m_ant) = (h.rows(), h.cols());
    let mut w = ComplexMatrix::zeros(m_ant, k_users);
    match norm {
        MfNorm::PerVector => {
            for k in 0..k_users {
                let n2 = h.row_norm_sqr(k);
                if n2 == 0.0 {
                    return Err(Error::ZeroNormRow { user: k });
                }
                let inv = 1.0 / n2.sqrt();
                for m in 0..m_ant {
                    w[(m, k)] = h[(k, m)].conj() * inv;
                }
            }
        }
        MfNorm::Expected { sigma_a_lin } => {
            if !(sigma_a_lin >= 0.0) || !sigma_a_lin.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "expected-norm gain spread must be nonnegative, got {sigma_a_lin}"
                )));
            }
            let inv = 1.0 / (m_ant as f64 * (1.0 + sigma_a_lin * sigma_a_lin)).sqrt();
            for k in 0..k_users {
                for m in 0..m_ant {
                    w[(m, k)] = h[(k, m)].conj() * inv;
                }
            }
        }
    }
    Ok(w)
}

fn check_zf_dims(h: &ComplexMatrix) -> Result<()> {
    if h.cols() <= h.rows() {
        return Err(Error::NotEnoughAntennas {
            antennas: h.cols(),
            users: h.rows(),
        });
    }
    Ok(())
}

/// Zero forcing with unit-norm columns: interference is nulled exactly and
/// every user is served with a unit-energy beam.
pub fn zf_precoder_exact(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_zf_dims(h)?;
    let mut w = right_pseudoinverse(h)?;
    for k in 0..w.cols() {
        let inv = 1.0 / w.col_norm_sqr(k).sqrt();
        for m in 0..w.rows() {
            w[(m, k)] *= inv;
        }
    }
    Ok(w)
}

/// Zero forcing with the uniform `sqrt(M - K)` scaling: `H W = sqrt(M - K) I`.
pub fn zf_precoder_scaled(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_zf_dims(h)?;
    let scale = ((h.cols() - h.rows()) as f64).sqrt();
    Ok(right_pseudoinverse(h)?.scale(scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{derive_stream, gram, hermitian_solve, sample_complex_gaussian_matrix};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // 1. Single-user MF by hand: h = [3, 4i] gives w = [3, -4i]/5.
    #[test]
    fn mf_hand_case() {
        let mut h = ComplexMatrix::zeros(1, 2);
        h[(0, 0)] = c(3.0, 0.0);
        h[(0, 1)] = c(0.0, 4.0);
        let w = mf_precoder(&h, MfNorm::PerVector).unwrap();
        assert!((w[(0, 0)] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((w[(1, 0)] - c(0.0, -0.8)).norm() < 1e-15);
        let gain = h.mul(&w)[(0, 0)];
        assert!((gain - c(5.0, 0.0)).norm() < 1e-14); // h w = ||h||
    }

    // 2. Orthonormal rows: MF beams reproduce the adjoint and H W = I.
    #[test]
    fn mf_orthonormal_rows() {
        let r = 0.5f64.sqrt();
        let mut h = ComplexMatrix::zeros(2, 4);
        h[(0, 0)] = c(r, 0.0);
        h[(0, 1)] = c(0.0, r);
        h[(1, 2)] = c(1.0, 0.0);
        let w = mf_precoder(&h, MfNorm::PerVector).unwrap();
        let hw = h.mul(&w);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((hw[(i, j)] - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    // 3. Per-vector MF always yields unit-energy beams.
    #[test]
    fn mf_unit_columns() {
        let mut s = derive_stream(40, 0);
        let h = sample_complex_gaussian_matrix(6, 32, 1.0, &mut s);
        let w = mf_precoder(&h, MfNorm::PerVector).unwrap();
        for k in 0..6 {
            assert!((w.col_norm_sqr(k) - 1.0).abs() < 1e-12);
        }
    }

    // 4. A dead channel row is reported with its user index.
    #[test]
    fn mf_rejects_zero_row() {
        let mut h = ComplexMatrix::zeros(2, 3);
        h[(0, 0)] = c(1.0, 0.0);
        let err = mf_precoder(&h, MfNorm::PerVector).unwrap_err();
        assert!(matches!(err, Error::ZeroNormRow { user: 1 }), "{err}");
    }

    // 5. Expected-norm MF beams have unit energy on average when the rows
    //    really are branch-error-perturbed Rayleigh rows.
    #[test]
    fn mf_expected_norm_energy() {
        let cfg = crate::impairments::ImpairmentConfig::from_db(1.0, 20.0).unwrap();
        let mut s = derive_stream(41, 0);
        let (m_ant, users, reps) = (64, 2, 2000);
        let mut sum = 0.0;
        for _ in 0..reps {
            let h = sample_complex_gaussian_matrix(users, m_ant, 1.0, &mut s);
            let eps = crate::impairments::sample_branch_errors(m_ant, &cfg, &mut s);
            let ht = crate::impairments::apply_branch_errors(&h, &eps).unwrap();
            let w = mf_precoder(
                &ht,
                MfNorm::Expected {
                    sigma_a_lin: cfg.sigma_a_lin(),
                },
            )
            .unwrap();
            for k in 0..users {
                sum += w.col_norm_sqr(k);
            }
        }
        let mean = sum / (users * reps) as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean beam energy {mean}");
        assert!(matches!(
            mf_precoder(
                &ComplexMatrix::zeros(1, 2),
                MfNorm::Expected { sigma_a_lin: -0.1 }
            ),
            Err(Error::InvalidArgument(_))
        ));
    }

    // 6. Exact ZF: off-diagonal leakage is at the documented null depth and
    //    the served direction has a real positive gain.
    #[test]
    fn zf_exact_null_depth() {
        let mut s = derive_stream(42, 0);
        let h = sample_complex_gaussian_matrix(10, 40, 1.0, &mut s);
        let w = zf_precoder_exact(&h).unwrap();
        let hw = h.mul(&w);
        let tol = 1e-8 * h.frobenius_norm();
        for k in 0..10 {
            for j in 0..10 {
                if j != k {
                    assert!(hw[(k, j)].norm() < tol, "leakage at ({k},{j})");
                }
            }
            assert!(hw[(k, k)].re > 0.0);
            assert!(hw[(k, k)].im.abs() < tol);
        }
        for k in 0..10 {
            assert!((w.col_norm_sqr(k) - 1.0).abs() < 1e-12);
        }
    }

    // 7. Orthonormal rows make exact ZF coincide with MF.
    #[test]
    fn zf_exact_orthonormal_rows() {
        let r = 0.5f64.sqrt();
        let mut h = ComplexMatrix::zeros(2, 4);
        h[(0, 0)] = c(r, 0.0);
        h[(0, 1)] = c(0.0, r);
        h[(1, 2)] = c(1.0, 0.0);
        let zf = zf_precoder_exact(&h).unwrap();
        let mf = mf_precoder(&h, MfNorm::PerVector).unwrap();
        for m in 0..4 {
            for k in 0..2 {
                assert!((zf[(m, k)] - mf[(m, k)]).norm() < 1e-12);
            }
        }
    }

    // 8. K = 1: nothing to null, so ZF reduces to the matched filter.
    #[test]
    fn zf_exact_single_user_is_mf() {
        let mut s = derive_stream(43, 0);
        let h = sample_complex_gaussian_matrix(1, 16, 1.0, &mut s);
        let zf = zf_precoder_exact(&h).unwrap();
        let mf = mf_precoder(&h, MfNorm::PerVector).unwrap();
        for m in 0..16 {
            assert!((zf[(m, 0)] - mf[(m, 0)]).norm() < 1e-12);
        }
    }

    // 9. Scaled ZF: H W = sqrt(M - K) I.
    #[test]
    fn zf_scaled_diagonalizes() {
        let mut s = derive_stream(44, 0);
        let h = sample_complex_gaussian_matrix(10, 40, 1.0, &mut s);
        let w = zf_precoder_scaled(&h).unwrap();
        let mut resid = h.mul(&w);
        let target = 30f64.sqrt();
        for k in 0..10 {
            resid[(k, k)] -= target;
        }
        assert!(resid.frobenius_norm() < 1e-8, "{}", resid.frobenius_norm());
    }

    // 10. Two faces of the same Wishart identity, E[tr (H H^H)^{-1}] = K/(M-K):
    //     the mean inverse-Gram trace, and E[||W||_F^2] = K for scaled ZF.
    #[test]
    fn zf_scaled_energy_and_wishart_trace() {
        let mut s = derive_stream(45, 0);
        let (users, m_ant, reps) = (8, 64, 3000);
        let expect_trace = users as f64 / (m_ant - users) as f64;
        let (mut trace_sum, mut energy_sum) = (0.0, 0.0);
        for _ in 0..reps {
            let h = sample_complex_gaussian_matrix(users, m_ant, 1.0, &mut s);
            let inv = hermitian_solve(&gram(&h), &ComplexMatrix::identity(users)).unwrap();
            trace_sum += (0..users).map(|i| inv[(i, i)].re).sum::<f64>();
            let w = zf_precoder_scaled(&h).unwrap();
            energy_sum += w.frobenius_norm().powi(2);
        }
        let trace_mean = trace_sum / reps as f64;
        let energy_mean = energy_sum / reps as f64;
        assert!(
            (trace_mean - expect_trace).abs() < 0.02 * expect_trace,
            "trace {trace_mean} vs {expect_trace}"
        );
        assert!(
            (energy_mean - users as f64).abs() < 0.02 * users as f64,
            "precoder energy {energy_mean}"
        );
    }

    // 11. M = K + 1 leaves the pseudoinverse unscaled.
    #[test]
    fn zf_scaled_minimal_headroom() {
        let mut s = derive_stream(46, 0);
        let h = sample_complex_gaussian_matrix(3, 4, 1.0, &mut s);
        let w = zf_precoder_scaled(&h).unwrap();
        let pinv = crate::numerics::right_pseudoinverse(&h).unwrap();
        assert_eq!(w, pinv);
    }

    // 12. Both ZF variants refuse M <= K.
    #[test]
    fn zf_needs_antenna_headroom() {
        for (users, m_ant) in [(10, 10), (10, 8)] {
            let h = ComplexMatrix::zeros(users, m_ant);
            for out in [zf_precoder_exact(&h), zf_precoder_scaled(&h)] {
                assert!(matches!(
                    out,
                    Err(Error::NotEnoughAntennas { antennas, users: u })
                        if antennas == m_ant && u == users
                ));
            }
        }
    }

    // 13. Precoder names round-trip.
    #[test]
    fn precoder_names() {
        for p in [Precoder::Mf, Precoder::ZfExact, Precoder::ZfScaled] {
            assert_eq!(p.to_string().parse::<Precoder>().unwrap(), p);
        }
        assert!("dirty_paper".parse::<Precoder>().is_err());
    }
}
