//! Built-in statistical self-checks.
//!
//! Each check pins one distributional identity the simulator leans on, with
//! a fixed seed and an explicit tolerance, so CI can run them headlessly:
//!
//! * fourth moment of the unit complex Gaussian, `E[|z|^4] = 2`,
//!   within 3 standard errors over 1e6 draws;
//! * Gaussian phase characteristic function, `E[e^{j phi}] = e^{-sigma^2/2}`
//!   at a 20 degree spread, within 0.2% over 1e6 draws;
//! * Wishart inverse trace, `E[tr (H H^H)^{-1}] = K / (M - K)` at
//!   M = 100, K = 10, within 2% over 1e4 draws.

use crate::impairments::{sample_branch_errors, ImpairmentConfig};
use crate::numerics::{derive_stream, gram, hermitian_solve, ComplexMatrix};
use num_complex::Complex64;

pub const DEFAULT_SEED: u64 = 1009;

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    /// Absolute tolerance on `value - expected`.
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        (self.value - self.expected).abs() <= self.tolerance
    }
}

fn fourth_moment_check(seed: u64) -> CheckOutcome {
    let mut stream = derive_stream(seed, 0);
    let n = 1_000_000u64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let m4 = stream.complex_gaussian(1.0).norm_sqr().powi(2);
        sum += m4;
        sum_sq += m4 * m4;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    let stderr = (var / n as f64).sqrt();
    CheckOutcome {
        name: "complex_gaussian_fourth_moment",
        value: mean,
        expected: 2.0,
        tolerance: 3.0 * stderr,
    }
}

fn characteristic_function_check(seed: u64) -> CheckOutcome {
    let cfg = ImpairmentConfig::from_db(0.0, 20.0).expect("valid spread");
    let expected = (-cfg.sigma_phi_rad().powi(2) / 2.0).exp();
    let mut stream = derive_stream(seed, 1);
    let n = 1_000_000usize;
    let mean: Complex64 =
        sample_branch_errors(n, &cfg, &mut stream).iter().sum::<Complex64>() / n as f64;
    CheckOutcome {
        name: "phase_error_characteristic_function",
        value: mean.re,
        expected,
        tolerance: 0.002 * expected,
    }
}

fn wishart_trace_check(seed: u64) -> CheckOutcome {
    let (users, antennas, reps) = (10usize, 100usize, 10_000u64);
    let mut stream = derive_stream(seed, 2);
    let mut sum = 0.0;
    for _ in 0..reps {
        let h = crate::numerics::sample_complex_gaussian_matrix(users, antennas, 1.0, &mut stream);
        let inv = hermitian_solve(&gram(&h), &ComplexMatrix::identity(users))
            .expect("i.i.d. Gaussian Gram matrices are positive definite");
        sum += (0..users).map(|i| inv[(i, i)].re).sum::<f64>();
    }
    let expected = users as f64 / (antennas - users) as f64;
    CheckOutcome {
        name: "wishart_inverse_trace",
        value: sum / reps as f64,
        expected,
        tolerance: 0.02 * expected,
    }
}

/// Run all checks with substreams of `seed`.
pub fn run_checks(seed: u64) -> Vec<CheckOutcome> {
    vec![
        fourth_moment_check(seed),
        characteristic_function_check(seed),
        wishart_trace_check(seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    // 1. The bundle passes at the default seed.
    #[test]
    fn checks_pass_at_default_seed() {
        let outcomes = run_checks(DEFAULT_SEED);
        assert_eq!(outcomes.len(), 3);
        for o in &outcomes {
            assert!(
                o.passed(),
                "{}: {} vs {} (tol {})",
                o.name,
                o.value,
                o.expected,
                o.tolerance
            );
            assert!(o.tolerance > 0.0);
        }
    }

    // 2. Pass/fail logic.
    #[test]
    fn outcome_logic() {
        let ok = CheckOutcome {
            name: "x",
            value: 1.005,
            expected: 1.0,
            tolerance: 0.01,
        };
        assert!(ok.passed());
        let bad = CheckOutcome {
            name: "x",
            value: 1.02,
            expected: 1.0,
            tolerance: 0.01,
        };
        assert!(!bad.passed());
    }
}
