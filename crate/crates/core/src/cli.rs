//! Config documents, sweep execution, and CSV output.
//!
//! Configs are flat `key = value` lines (UTF-8, `#` comments). A document
//! describes one scenario, optionally swept along a single axis:
//!
//! ```text
//! M = 100
//! K = 10
//! snr_t_db = 10
//! model = iid
//! precoder = mf
//! realizations = 10000
//! seed = 1
//! sweep = M
//! values = 20:20:200        # or a comma list: 20,50,100
//! ```
//!
//! Results go out as CSV, one row per scenario and source (closed form
//! first, then Monte Carlo), floats printed to 6 significant digits. The
//! standard-error column is empty on closed-form rows, and closed-form rows
//! report 0 realizations. Scenarios without a closed form (line-of-sight, or
//! zero forcing with branch errors) emit Monte Carlo rows only, with a note.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analytic::{sinr_mf_impaired, sinr_zf, sum_rate_analytic, ErrorFactorMode, LinkBudget};
use crate::channel::{ChannelModel, LosConfig};
use crate::engine::{estimate_rates, ErrorRedraw, ScenarioConfig};
use crate::error::{Error, Result};
use crate::impairments::ImpairmentConfig;
use crate::precoding::Precoder;

// ── Sweep specification ─────────────────────────────────────────────────────

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Antennas,
    Users,
    SnrTDb,
    SigmaADb,
    SigmaPhiDeg,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Antennas => "M",
            SweepAxis::Users => "K",
            SweepAxis::SnrTDb => "snr_t_db",
            SweepAxis::SigmaADb => "sigma_a_db",
            SweepAxis::SigmaPhiDeg => "sigma_phi_deg",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" => Ok(SweepAxis::Antennas),
            "K" => Ok(SweepAxis::Users),
            "snr_t_db" => Ok(SweepAxis::SnrTDb),
            "sigma_a_db" => Ok(SweepAxis::SigmaADb),
            "sigma_phi_deg" => Ok(SweepAxis::SigmaPhiDeg),
            other => Err(Error::InvalidArgument(format!(
                "unknown sweep axis `{other}` (expected M|K|snr_t_db|sigma_a_db|sigma_phi_deg)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emit {
    Analytic,
    Mc,
    Both,
}

impl Emit {
    pub fn wants_analytic(&self) -> bool {
        matches!(self, Emit::Analytic | Emit::Both)
    }

    pub fn wants_mc(&self) -> bool {
        matches!(self, Emit::Mc | Emit::Both)
    }
}

impl fmt::Display for Emit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Emit::Analytic => "analytic",
            Emit::Mc => "mc",
            Emit::Both => "both",
        })
    }
}

impl FromStr for Emit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Emit::Analytic),
            "mc" => Ok(Emit::Mc),
            "both" => Ok(Emit::Both),
            other => Err(Error::InvalidArgument(format!(
                "unknown emit mode `{other}` (expected analytic|mc|both)"
            ))),
        }
    }
}

/// A base scenario plus an optional one-dimensional sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub axis: Option<SweepAxis>,
    pub values: Vec<f64>,
    pub emit: Emit,
}

fn apply_axis(base: &ScenarioConfig, axis: SweepAxis, value: f64) -> Result<ScenarioConfig> {
    let mut s = *base;
    match axis {
        SweepAxis::Antennas | SweepAxis::Users => {
            if value.fract() != 0.0 || !(1.0..=1e12).contains(&value) {
                return Err(Error::InvalidArgument(format!(
                    "sweep value {value} for axis {axis} must be a positive integer"
                )));
            }
            if axis == SweepAxis::Antennas {
                s.budget.antennas = value as usize;
            } else {
                s.budget.users = value as usize;
            }
        }
        SweepAxis::SnrTDb => s.budget.snr_t_db = value,
        SweepAxis::SigmaADb => {
            s.impairments = ImpairmentConfig::from_db(value, s.impairments.sigma_phi_deg())?;
        }
        SweepAxis::SigmaPhiDeg => {
            s.impairments = ImpairmentConfig::from_db(s.impairments.sigma_a_db(), value)?;
        }
    }
    Ok(s)
}

impl SweepSpec {
    /// Expand into concrete scenarios, in axis order (base alone if unswept).
    pub fn scenarios(&self) -> Result<Vec<ScenarioConfig>> {
        match self.axis {
            None => Ok(vec![self.base]),
            Some(axis) => self
                .values
                .iter()
                .map(|&v| apply_axis(&self.base, axis, v))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.axis, self.values.is_empty()) {
            (Some(_), true) => {
                return Err(Error::InvalidArgument(
                    "sweep axis given without values".into(),
                ))
            }
            (None, false) => {
                return Err(Error::InvalidArgument(
                    "sweep values given without an axis".into(),
                ))
            }
            _ => {}
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "sweep values must be strictly increasing".into(),
            ));
        }
        if self.emit.wants_mc() && self.base.realizations == 0 {
            return Err(Error::InvalidArgument(
                "realizations = 0 is only allowed with emit = analytic".into(),
            ));
        }
        for scenario in self.scenarios()? {
            scenario.validate().map_err(|e| match self.axis {
                Some(axis) => Error::InvalidArgument(format!(
                    "scenario at {axis} = {}: {e}",
                    match axis {
                        SweepAxis::Antennas => scenario.budget.antennas as f64,
                        SweepAxis::Users => scenario.budget.users as f64,
                        SweepAxis::SnrTDb => scenario.budget.snr_t_db,
                        SweepAxis::SigmaADb => scenario.impairments.sigma_a_db(),
                        SweepAxis::SigmaPhiDeg => scenario.impairments.sigma_phi_deg(),
                    }
                )),
                None => e,
            })?;
        }
        Ok(())
    }
}

// ── Config parsing ──────────────────────────────────────────────────────────

const KNOWN_KEYS: &[&str] = &[
    "M",
    "K",
    "snr_t_db",
    "n0",
    "model",
    "precoder",
    "sigma_a_db",
    "sigma_phi_deg",
    "realizations",
    "seed",
    "sweep",
    "values",
    "emit",
    "los_spacing_wl",
    "los_theta3db_deg",
    "los_am_db",
    "los_normalize",
    "error_redraw",
];

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

struct RawConfig(HashMap<String, (String, usize)>);

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(line_no, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(config_err(line_no, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(config_err(line_no, format!("empty value for `{key}`")));
            }
            if map.insert(key.to_string(), (value.to_string(), line_no)).is_some() {
                return Err(config_err(line_no, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self(map))
    }

    fn get(&self, key: &str) -> Option<&(String, usize)> {
        self.0.get(key)
    }

    fn line(&self, key: &str) -> usize {
        self.get(key).map(|(_, l)| *l).unwrap_or(0)
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let (value, line) = self
            .get(key)
            .ok_or_else(|| config_err(0, format!("missing required key `{key}`")))?;
        value
            .parse::<T>()
            .map_err(|e| config_err(*line, format!("bad value for `{key}`: {e}")))
    }

    fn optional<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some((value, line)) => value
                .parse::<T>()
                .map_err(|e| config_err(*line, format!("bad value for `{key}`: {e}"))),
        }
    }

    fn optional_flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some((value, line)) => match value.as_str() {
                "on" | "true" => Ok(true),
                "off" | "false" => Ok(false),
                other => Err(config_err(
                    *line,
                    format!("bad value for `{key}`: expected on|off, got `{other}`"),
                )),
            },
        }
    }
}

/// Expand `start:step:stop` or a comma list into numeric values.
fn expand_values(raw: &str) -> std::result::Result<Vec<f64>, String> {
    let parse_one = |s: &str| -> std::result::Result<f64, String> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a number", s.trim()))?;
        if !v.is_finite() {
            return Err(format!("`{v}` is not finite"));
        }
        Ok(v)
    };
    let values = if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            return Err("range must be start:step:stop".into());
        }
        let (start, step, stop) = (parse_one(parts[0])?, parse_one(parts[1])?, parse_one(parts[2])?);
        if step <= 0.0 {
            return Err(format!("range step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("range stop {stop} is below start {start}"));
        }
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            let v = start + i as f64 * step;
            if v > stop + step * 1e-9 {
                break;
            }
            out.push(v);
            i += 1;
            if i > 1_000_000 {
                return Err("range expands to more than 1e6 values".into());
            }
        }
        out
    } else {
        raw.split(',').map(parse_one).collect::<std::result::Result<_, _>>()?
    };
    if values.is_empty() {
        return Err("no values given".into());
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err("values must be strictly increasing".into());
    }
    Ok(values)
}

/// Parse a config document into a validated sweep specification.
pub fn parse_config(text: &str) -> Result<SweepSpec> {
    let raw = RawConfig::parse(text)?;

    let antennas: usize = raw.required("M")?;
    let users: usize = raw.required("K")?;
    let snr_t_db: f64 = raw.required("snr_t_db")?;
    let n0: f64 = raw.optional("n0", 1.0)?;
    let model: ChannelModel = raw.required("model")?;
    let precoder: Precoder = raw.required("precoder")?;
    let realizations: u64 = raw.required("realizations")?;
    let seed: u64 = raw.required("seed")?;
    let emit: Emit = raw.optional("emit", Emit::Both)?;
    let error_redraw: ErrorRedraw = raw.optional("error_redraw", ErrorRedraw::PerRealization)?;

    let sigma_a_db: f64 = raw.optional("sigma_a_db", 0.0)?;
    let sigma_phi_deg: f64 = raw.optional("sigma_phi_deg", 0.0)?;
    let impairments = ImpairmentConfig::from_db(sigma_a_db, sigma_phi_deg).map_err(|e| {
        let line = raw.line("sigma_a_db").max(raw.line("sigma_phi_deg"));
        config_err(line, e.to_string())
    })?;

    let los = LosConfig {
        spacing_wl: raw.optional("los_spacing_wl", 0.6)?,
        theta3db_deg: raw.optional("los_theta3db_deg", 90.0)?,
        max_attenuation_db: raw.optional("los_am_db", 20.0)?,
        normalize_rows: raw.optional_flag("los_normalize", true)?,
        ..LosConfig::default()
    };

    let axis: Option<SweepAxis> = match raw.get("sweep") {
        None => None,
        Some((value, line)) => Some(
            value
                .parse()
                .map_err(|e| config_err(*line, format!("bad value for `sweep`: {e}")))?,
        ),
    };
    let values = match (axis, raw.get("values")) {
        (None, None) => Vec::new(),
        (None, Some((_, line))) => {
            return Err(config_err(*line, "`values` given without `sweep`"));
        }
        (Some(_), None) => {
            return Err(config_err(
                raw.line("sweep"),
                "`sweep` given without `values`",
            ));
        }
        (Some(_), Some((value, line))) => expand_values(value)
            .map_err(|e| config_err(*line, format!("bad value for `values`: {e}")))?,
    };

    let spec = SweepSpec {
        base: ScenarioConfig {
            budget: LinkBudget {
                antennas,
                users,
                snr_t_db,
                n0,
            },
            model,
            los,
            precoder,
            impairments,
            error_redraw,
            realizations,
            seed,
        },
        axis,
        values,
        emit,
    };
    spec.validate().map_err(|e| match e {
        Error::Config { .. } => e,
        other => config_err(0, other.to_string()),
    })?;
    Ok(spec)
}

/// Serialize a spec so that `parse_config(emit_config(s)) == s` for every
/// spec that itself came out of `parse_config`.
pub fn emit_config(spec: &SweepSpec) -> String {
    let b = &spec.base;
    let mut out = String::new();
    let mut push = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    push("M", b.budget.antennas.to_string());
    push("K", b.budget.users.to_string());
    push("snr_t_db", b.budget.snr_t_db.to_string());
    push("n0", b.budget.n0.to_string());
    push("model", b.model.to_string());
    push("precoder", b.precoder.to_string());
    push("sigma_a_db", b.impairments.sigma_a_db().to_string());
    push("sigma_phi_deg", b.impairments.sigma_phi_deg().to_string());
    push("realizations", b.realizations.to_string());
    push("seed", b.seed.to_string());
    push("error_redraw", b.error_redraw.to_string());
    push("emit", spec.emit.to_string());
    push("los_spacing_wl", b.los.spacing_wl.to_string());
    push("los_theta3db_deg", b.los.theta3db_deg.to_string());
    push("los_am_db", b.los.max_attenuation_db.to_string());
    push("los_normalize", if b.los.normalize_rows { "on" } else { "off" }.to_string());
    if let Some(axis) = spec.axis {
        push("sweep", axis.to_string());
        let list: Vec<String> = spec.values.iter().map(|v| v.to_string()).collect();
        push("values", list.join(","));
    }
    out
}

// ── Execution and CSV output ────────────────────────────────────────────────

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Analytic,
    Mc,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Analytic => "analytic",
            Source::Mc => "mc",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ResultRow {
    pub scenario: ScenarioConfig,
    pub source: Source,
    pub sum_rate: f64,
    /// Present on Monte Carlo rows only.
    pub sum_rate_stderr: Option<f64>,
    pub mean_sinr: f64,
}

#[derive(Debug, Default)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    /// Human-readable remarks (skipped closed forms and the like).
    pub notes: Vec<String>,
    /// One entry per scenario that failed; empty means a clean run.
    pub failures: Vec<String>,
}

/// Closed-form SINR where one exists for the scenario.
fn closed_form_sinr(sc: &ScenarioConfig) -> Option<f64> {
    if sc.model == ChannelModel::Los {
        return None;
    }
    match sc.precoder {
        Precoder::Mf => Some(sinr_mf_impaired(
            &sc.budget,
            &sc.impairments,
            ErrorFactorMode::Exact,
        )),
        Precoder::ZfExact | Precoder::ZfScaled => {
            if sc.impairments.is_zero() {
                sinr_zf(&sc.budget).ok()
            } else {
                None
            }
        }
    }
}

fn describe(sc: &ScenarioConfig) -> String {
    format!(
        "{} {} M={} K={} snr_t={} dB",
        sc.model, sc.precoder, sc.budget.antennas, sc.budget.users, sc.budget.snr_t_db
    )
}

/// Run every scenario of the spec. Rows come out sorted by axis value and,
/// within a scenario, closed form before Monte Carlo.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let mut outcome = SweepOutcome::default();
    let (mut noted_los, mut noted_impaired_zf) = (false, false);
    for sc in spec.scenarios()? {
        if spec.emit.wants_analytic() {
            match closed_form_sinr(&sc) {
                Some(sinr) => outcome.rows.push(ResultRow {
                    scenario: sc,
                    source: Source::Analytic,
                    sum_rate: sum_rate_analytic(sc.budget.users, sinr)?,
                    sum_rate_stderr: None,
                    mean_sinr: sinr,
                }),
                None if sc.model == ChannelModel::Los && !noted_los => {
                    noted_los = true;
                    outcome.notes.push(
                        "line-of-sight scenarios have no closed form; skipping analytic rows"
                            .into(),
                    );
                }
                None if sc.model != ChannelModel::Los && !noted_impaired_zf => {
                    noted_impaired_zf = true;
                    outcome.notes.push(
                        "zero forcing with branch errors has no closed form; emitting Monte Carlo rows only"
                            .into(),
                    );
                }
                None => {}
            }
        }
        if spec.emit.wants_mc() {
            match estimate_rates(&sc) {
                Ok(report) => outcome.rows.push(ResultRow {
                    scenario: sc,
                    source: Source::Mc,
                    sum_rate: report.sum_rate,
                    sum_rate_stderr: Some(report.sum_rate_stderr),
                    mean_sinr: report.mean_sinr,
                }),
                Err(e) => outcome.failures.push(format!("{}: {e}", describe(&sc))),
            }
        }
    }
    Ok(outcome)
}

pub const CSV_HEADER: &str = "model,precoder,M,K,snr_t_db,sigma_a_db,sigma_phi_deg,realizations,source,sum_rate,sum_rate_stderr,mean_sinr_linear";

/// Shortest-form decimal with `digits` significant digits.
fn fmt_sig(v: f64, digits: i32) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if exp >= digits {
        return format!("{:.*e}", (digits - 1) as usize, v);
    }
    let decimals = (digits - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, v)
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let sc = &row.scenario;
        let realizations = match row.source {
            Source::Analytic => 0,
            Source::Mc => sc.realizations,
        };
        let stderr = match row.sum_rate_stderr {
            Some(s) => fmt_sig(s, 6),
            None => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            sc.model,
            sc.precoder,
            sc.budget.antennas,
            sc.budget.users,
            fmt_sig(sc.budget.snr_t_db, 6),
            fmt_sig(sc.impairments.sigma_a_db(), 6),
            fmt_sig(sc.impairments.sigma_phi_deg(), 6),
            realizations,
            row.source,
            fmt_sig(row.sum_rate, 6),
            stderr,
            fmt_sig(row.mean_sinr, 6),
        ));
    }
    out
}

/// Write atomically (temp file + rename), so re-runs replace rather than
/// append and readers never see a half-written table.
pub fn write_csv_atomic(path: &Path, content: &str) -> Result<()> {
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
