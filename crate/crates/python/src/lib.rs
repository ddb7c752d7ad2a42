//! Python bindings. Scenarios are built once, then handed to the estimation
//! functions; closed forms are plain functions of scalars. All errors
//! surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mimo_lab::analytic::{self, ErrorFactorMode, LinkBudget};
use mimo_lab::channel::{ChannelModel, LosConfig};
use mimo_lab::cli;
use mimo_lab::engine::{self, ErrorRedraw, ScenarioConfig};
use mimo_lab::impairments::ImpairmentConfig;
use mimo_lab::precoding::Precoder;

fn value_err(e: mimo_lab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn budget(antennas: usize, users: usize, snr_t_db: f64) -> LinkBudget {
    LinkBudget {
        antennas,
        users,
        snr_t_db,
        n0: 1.0,
    }
}

fn factor_mode(exact: bool) -> ErrorFactorMode {
    if exact {
        ErrorFactorMode::Exact
    } else {
        ErrorFactorMode::SmallError
    }
}

/// One Monte Carlo scenario, fully specified.
#[pyclass]
struct Scenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl Scenario {
    #[new]
    #[pyo3(signature = (antennas, users, snr_t_db, realizations, seed,
                        model="iid", precoder="mf",
                        sigma_a_db=0.0, sigma_phi_deg=0.0, n0=1.0,
                        error_redraw="per_realization"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        antennas: usize,
        users: usize,
        snr_t_db: f64,
        realizations: u64,
        seed: u64,
        model: &str,
        precoder: &str,
        sigma_a_db: f64,
        sigma_phi_deg: f64,
        n0: f64,
        error_redraw: &str,
    ) -> PyResult<Self> {
        let inner = ScenarioConfig {
            budget: LinkBudget {
                antennas,
                users,
                snr_t_db,
                n0,
            },
            model: model.parse::<ChannelModel>().map_err(value_err)?,
            los: LosConfig::default(),
            precoder: precoder.parse::<Precoder>().map_err(value_err)?,
            impairments: ImpairmentConfig::from_db(sigma_a_db, sigma_phi_deg).map_err(value_err)?,
            error_redraw: error_redraw.parse::<ErrorRedraw>().map_err(value_err)?,
            realizations,
            seed,
        };
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        let b = self.inner.budget;
        format!(
            "Scenario(M={}, K={}, snr_t_db={}, model={}, precoder={}, realizations={}, seed={})",
            b.antennas,
            b.users,
            b.snr_t_db,
            self.inner.model,
            self.inner.precoder,
            self.inner.realizations,
            self.inner.seed
        )
    }
}

/// Monte Carlo estimates for one scenario.
#[pyclass]
struct RateReport {
    #[pyo3(get)]
    per_user_rate: Vec<f64>,
    #[pyo3(get)]
    sum_rate: f64,
    #[pyo3(get)]
    sum_rate_stderr: f64,
    #[pyo3(get)]
    mean_sinr: f64,
    #[pyo3(get)]
    realizations: u64,
}

#[pymethods]
impl RateReport {
    fn __repr__(&self) -> String {
        format!(
            "RateReport(sum_rate={:.4}, stderr={:.4}, mean_sinr={:.4}, realizations={})",
            self.sum_rate, self.sum_rate_stderr, self.mean_sinr, self.realizations
        )
    }
}

/// Monte Carlo per-user rates and ratio-of-means SINR.
#[pyfunction]
fn estimate_rates(scenario: &Scenario) -> PyResult<RateReport> {
    let report = engine::estimate_rates(&scenario.inner).map_err(value_err)?;
    Ok(RateReport {
        per_user_rate: report.per_user_rate,
        sum_rate: report.sum_rate,
        sum_rate_stderr: report.sum_rate_stderr,
        mean_sinr: report.mean_sinr,
        realizations: report.realizations,
    })
}

/// Monte Carlo ratio-of-means SINR per user.
#[pyfunction]
fn expected_sinr(scenario: &Scenario) -> PyResult<Vec<f64>> {
    engine::estimate_expected_sinr(&scenario.inner).map_err(value_err)
}

/// Closed-form matched-filter SINR on i.i.d. Rayleigh.
#[pyfunction]
fn sinr_mf(antennas: usize, users: usize, snr_t_db: f64) -> PyResult<f64> {
    let b = budget(antennas, users, snr_t_db);
    b.validate().map_err(value_err)?;
    Ok(analytic::sinr_mf(&b))
}

/// Closed-form zero-forcing SINR on i.i.d. Rayleigh.
#[pyfunction]
fn sinr_zf(antennas: usize, users: usize, snr_t_db: f64) -> PyResult<f64> {
    let b = budget(antennas, users, snr_t_db);
    b.validate().map_err(value_err)?;
    analytic::sinr_zf(&b).map_err(value_err)
}

/// Matched-filter SINR degraded by per-antenna gain/phase errors.
#[pyfunction]
#[pyo3(signature = (antennas, users, snr_t_db, sigma_a_db, sigma_phi_deg, exact=true))]
fn sinr_mf_impaired(
    antennas: usize,
    users: usize,
    snr_t_db: f64,
    sigma_a_db: f64,
    sigma_phi_deg: f64,
    exact: bool,
) -> PyResult<f64> {
    let b = budget(antennas, users, snr_t_db);
    b.validate().map_err(value_err)?;
    let cfg = ImpairmentConfig::from_db(sigma_a_db, sigma_phi_deg).map_err(value_err)?;
    Ok(analytic::sinr_mf_impaired(&b, &cfg, factor_mode(exact)))
}

/// Multiplicative SINR penalty of gain/phase errors.
#[pyfunction]
#[pyo3(signature = (sigma_a_db, sigma_phi_deg, exact=true))]
fn error_factor(sigma_a_db: f64, sigma_phi_deg: f64, exact: bool) -> PyResult<f64> {
    let cfg = ImpairmentConfig::from_db(sigma_a_db, sigma_phi_deg).map_err(value_err)?;
    Ok(analytic::error_factor(&cfg, factor_mode(exact)))
}

/// Shannon rate `log2(1 + sinr)` in bit/s/Hz.
#[pyfunction]
fn rate_from_sinr(sinr: f64) -> PyResult<f64> {
    analytic::rate_from_sinr(sinr).map_err(value_err)
}

/// Antennas needed to sit 3 dB below the interference-free bound.
#[pyfunction]
#[pyo3(signature = (precoder, users, snr_t_db, sigma_a_db=0.0, sigma_phi_deg=0.0))]
fn antennas_for_3db(
    precoder: &str,
    users: usize,
    snr_t_db: f64,
    sigma_a_db: f64,
    sigma_phi_deg: f64,
) -> PyResult<usize> {
    let precoder = match precoder {
        "zf" => Precoder::ZfExact,
        other => other.parse::<Precoder>().map_err(value_err)?,
    };
    let cfg = ImpairmentConfig::from_db(sigma_a_db, sigma_phi_deg).map_err(value_err)?;
    analytic::antennas_for_3db(precoder, users, snr_t_db, &cfg).map_err(value_err)
}

/// Run a config document and return `(csv, notes, failures)`.
#[pyfunction]
fn sweep_csv(config_text: &str) -> PyResult<(String, Vec<String>, Vec<String>)> {
    let spec = cli::parse_config(config_text).map_err(value_err)?;
    let outcome = cli::run_sweep(&spec).map_err(value_err)?;
    Ok((
        cli::csv_string(&outcome.rows),
        outcome.notes,
        outcome.failures,
    ))
}

#[pymodule]
fn mimo_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<RateReport>()?;
    m.add_function(wrap_pyfunction!(estimate_rates, m)?)?;
    m.add_function(wrap_pyfunction!(expected_sinr, m)?)?;
    m.add_function(wrap_pyfunction!(sinr_mf, m)?)?;
    m.add_function(wrap_pyfunction!(sinr_zf, m)?)?;
    m.add_function(wrap_pyfunction!(sinr_mf_impaired, m)?)?;
    m.add_function(wrap_pyfunction!(error_factor, m)?)?;
    m.add_function(wrap_pyfunction!(rate_from_sinr, m)?)?;
    m.add_function(wrap_pyfunction!(antennas_for_3db, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    Ok(())
}
