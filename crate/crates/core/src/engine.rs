//! Monte Carlo rate estimation.
//!
//! One realization draws a channel, optionally perturbs it with branch
//! errors, builds the precoder from the perturbed channel, and then scores
//! it against the TRUE channel: the transmitter only ever sees its imperfect
//! estimate, the air interface does not. Per-user SINR is
//!
//! `gamma_k = P |h_k w_k|^2 / (P sum_{j != k} |h_k w_j|^2 + N0)`
//!
//! and rates are `log2(1 + gamma_k)`, averaged over realizations.
//!
//! Reproducibility: realization r draws from stream `(seed, r)`, channel
//! first, then branch errors (when redrawn per realization). Hold-fixed
//! errors come from the reserved stream index `u64::MAX`. Results are
//! accumulated in realization order with compensated sums, so reports are
//! bitwise identical no matter how many worker threads rayon uses.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{tx_power, LinkBudget};
use crate::channel::{iid_rayleigh, los_channel, ChannelModel, LosConfig};
use crate::error::{Error, Result};
use crate::impairments::{apply_branch_errors, sample_branch_errors, ImpairmentConfig};
use crate::numerics::{derive_stream, ComplexMatrix};
use crate::precoding::{mf_precoder, zf_precoder_exact, zf_precoder_scaled, MfNorm, Precoder};

/// Stream index reserved for the hold-fixed branch error draw; realization
/// indices run from 0 and never reach it.
const FIXED_ERROR_STREAM: u64 = u64::MAX;

/// Realizations evaluated per parallel batch. Batching bounds memory while
/// keeping the accumulation order fixed.
const BATCH: u64 = 512;

/// When branch errors are redrawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorRedraw {
    /// Fresh errors every realization (drift faster than the fading).
    PerRealization,
    /// One error vector for the whole run (miscalibration study).
    Fixed,
}

impl std::fmt::Display for ErrorRedraw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ErrorRedraw::PerRealization => "per_realization",
            ErrorRedraw::Fixed => "fixed",
        })
    }
}

impl std::str::FromStr for ErrorRedraw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_realization" => Ok(ErrorRedraw::PerRealization),
            "fixed" => Ok(ErrorRedraw::Fixed),
            other => Err(Error::InvalidArgument(format!(
                "unknown error redraw mode `{other}` (expected per_realization|fixed)"
            ))),
        }
    }
}

/// Everything one Monte Carlo run needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub budget: LinkBudget,
    pub model: ChannelModel,
    pub los: LosConfig,
    pub precoder: Precoder,
    pub impairments: ImpairmentConfig,
    pub error_redraw: ErrorRedraw,
    pub realizations: u64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Structural validity; the realization count is checked where Monte
    /// Carlo actually runs, since analytic-only use is allowed to carry 0.
    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        if self.model == ChannelModel::Los {
            self.los.validate()?;
        }
        if matches!(self.precoder, Precoder::ZfExact | Precoder::ZfScaled)
            && self.budget.antennas <= self.budget.users
        {
            return Err(Error::NotEnoughAntennas {
                antennas: self.budget.antennas,
                users: self.budget.users,
            });
        }
        Ok(())
    }
}

/// Monte Carlo estimates for one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    /// Mean rate per user, bit/s/Hz.
    pub per_user_rate: Vec<f64>,
    /// Sum of the per-user means (exactly, by construction).
    pub sum_rate: f64,
    /// Standard error of the per-realization sum rate.
    pub sum_rate_stderr: f64,
    /// Ratio-of-means SINR, averaged over users, linear.
    pub mean_sinr: f64,
    pub realizations: u64,
}

/// Per-user signal and interference powers of one (H, W) pair.
fn sinr_components(
    h: &ComplexMatrix,
    w: &ComplexMatrix,
    p: f64,
    n0: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if h.cols() != w.rows() || h.rows() != w.cols() {
        return Err(Error::DimensionMismatch(format!(
            "channel {}x{} against precoder {}x{}",
            h.rows(),
            h.cols(),
            w.rows(),
            w.cols()
        )));
    }
    if !(p > 0.0) || !p.is_finite() || !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "powers must be positive, got P={p}, N0={n0}"
        )));
    }
    let k_users = h.rows();
    let gains = h.mul(w);
    let mut signal = vec![0.0; k_users];
    let mut interference = vec![0.0; k_users];
    for k in 0..k_users {
        let mut intf = 0.0;
        for j in 0..k_users {
            if j == k {
                signal[k] = p * gains[(k, j)].norm_sqr();
            } else {
                intf += gains[(k, j)].norm_sqr();
            }
        }
        interference[k] = p * intf;
    }
    Ok((signal, interference))
}

/// Per-user SINR of one channel/precoder pair at transmit power `p`.
pub fn instantaneous_sinr(
    h: &ComplexMatrix,
    w: &ComplexMatrix,
    p: f64,
    n0: f64,
) -> Result<Vec<f64>> {
    let (signal, interference) = sinr_components(h, w, p, n0)?;
    Ok(signal
        .iter()
        .zip(&interference)
        .map(|(s, i)| s / (i + n0))
        .collect())
}

struct Sample {
    rates: Vec<f64>,
    signal: Vec<f64>,
    interference: Vec<f64>,
}

fn build_precoder(h: &ComplexMatrix, precoder: Precoder) -> Result<ComplexMatrix> {
    match precoder {
        Precoder::Mf => mf_precoder(h, MfNorm::PerVector),
        Precoder::ZfExact => zf_precoder_exact(h),
        Precoder::ZfScaled => zf_precoder_scaled(h),
    }
}

fn realize(cfg: &ScenarioConfig, fixed_errors: Option<&[Complex64]>, index: u64) -> Result<Sample> {
    let mut stream = derive_stream(cfg.seed, index);
    let (k_users, m_ant) = (cfg.budget.users, cfg.budget.antennas);
    let h = match cfg.model {
        ChannelModel::Iid => iid_rayleigh(k_users, m_ant, &mut stream)?,
        ChannelModel::Los => los_channel(k_users, m_ant, &cfg.los, &mut stream)?,
    };
    let w = if cfg.impairments.is_zero() {
        build_precoder(&h, cfg.precoder)?
    } else {
        let drawn;
        let errors: &[Complex64] = match fixed_errors {
            Some(e) => e,
            None => {
                drawn = sample_branch_errors(m_ant, &cfg.impairments, &mut stream);
                &drawn
            }
        };
        build_precoder(&apply_branch_errors(&h, errors)?, cfg.precoder)?
    };
    let p = tx_power(&cfg.budget);
    let (signal, interference) = sinr_components(&h, &w, p, cfg.budget.n0)?;
    let mut rates = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let gamma = signal[k] / (interference[k] + cfg.budget.n0);
        if !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite SINR for user {k}"
            )));
        }
        rates.push((1.0 + gamma).log2());
    }
    Ok(Sample {
        rates,
        signal,
        interference,
    })
}

/// Compensated (Kahan) accumulator; the order of adds is fixed upstream.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

struct Accumulator {
    n: u64,
    rate: Vec<Kahan>,
    signal: Vec<Kahan>,
    interference: Vec<Kahan>,
    // Welford over the per-realization sum rate, for the standard error.
    sum_rate_mean: f64,
    sum_rate_m2: f64,
}

impl Accumulator {
    fn new(k_users: usize) -> Self {
        Self {
            n: 0,
            rate: vec![Kahan::default(); k_users],
            signal: vec![Kahan::default(); k_users],
            interference: vec![Kahan::default(); k_users],
            sum_rate_mean: 0.0,
            sum_rate_m2: 0.0,
        }
    }

    fn push(&mut self, s: &Sample) {
        let mut sum_rate = 0.0;
        for k in 0..s.rates.len() {
            self.rate[k].add(s.rates[k]);
            self.signal[k].add(s.signal[k]);
            self.interference[k].add(s.interference[k]);
            sum_rate += s.rates[k];
        }
        self.n += 1;
        let delta = sum_rate - self.sum_rate_mean;
        self.sum_rate_mean += delta / self.n as f64;
        self.sum_rate_m2 += delta * (sum_rate - self.sum_rate_mean);
    }

    fn per_user_sinr(&self, n0: f64) -> Vec<f64> {
        let n = self.n as f64;
        self.signal
            .iter()
            .zip(&self.interference)
            .map(|(s, i)| (s.sum / n) / (i.sum / n + n0))
            .collect()
    }
}

fn run(cfg: &ScenarioConfig) -> Result<Accumulator> {
    cfg.validate()?;
    if cfg.realizations == 0 {
        return Err(Error::InvalidArgument(
            "Monte Carlo needs at least one realization".into(),
        ));
    }
    let fixed_errors = match cfg.error_redraw {
        ErrorRedraw::Fixed if !cfg.impairments.is_zero() => Some(sample_branch_errors(
            cfg.budget.antennas,
            &cfg.impairments,
            &mut derive_stream(cfg.seed, FIXED_ERROR_STREAM),
        )),
        _ => None,
    };
    let mut acc = Accumulator::new(cfg.budget.users);
    let mut start = 0u64;
    while start < cfg.realizations {
        let end = (start + BATCH).min(cfg.realizations);
        let samples: Vec<Sample> = (start..end)
            .into_par_iter()
            .map(|index| {
                realize(cfg, fixed_errors.as_deref(), index).map_err(|e| Error::Realization {
                    index,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()?;
        for s in &samples {
            acc.push(s);
        }
        start = end;
    }
    Ok(acc)
}

/// Estimate per-user and sum rates over `cfg.realizations` channel draws.
pub fn estimate_rates(cfg: &ScenarioConfig) -> Result<RateReport> {
    let acc = run(cfg)?;
    let n = acc.n as f64;
    let per_user_rate: Vec<f64> = acc.rate.iter().map(|k| k.sum / n).collect();
    let sum_rate = per_user_rate.iter().sum();
    let sum_rate_stderr = if acc.n > 1 {
        (acc.sum_rate_m2 / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    let sinr = acc.per_user_sinr(cfg.budget.n0);
    Ok(RateReport {
        per_user_rate,
        sum_rate,
        sum_rate_stderr,
        mean_sinr: sinr.iter().sum::<f64>() / sinr.len() as f64,
        realizations: acc.n,
    })
}

/// Ratio-of-means SINR per user: mean signal power over mean interference
/// plus noise. This is the Monte Carlo counterpart of the closed-form SINR
/// approximations, not the mean of per-realization SINRs.
pub fn estimate_expected_sinr(cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    Ok(run(cfg)?.per_user_sinr(cfg.budget.n0))
}
