//! Run configuration: TOML text in, validated [`RunConfig`] out.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use supwave_core::randomize::RandomLaw;
use supwave_core::solver::{critical_exponents, critical_exponents_limit, LocalTimeRule};

/// Randomization law; the non-Gaussian laws are normalized to unit variance
/// except Rademacher, which is `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawName {
    Gaussian,
    Rademacher,
    Uniform,
}

impl LawName {
    pub fn law(self) -> RandomLaw {
        match self {
            LawName::Gaussian => RandomLaw::standard_gaussian(),
            LawName::Rademacher => RandomLaw::rademacher(),
            LawName::Uniform => RandomLaw::symmetric_uniform(3f64.sqrt()),
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.to_ascii_lowercase().as_str() {
            "gaussian" => Some(LawName::Gaussian),
            "rademacher" => Some(LawName::Rademacher),
            "uniform" => Some(LawName::Uniform),
            _ => None,
        }
    }
}

impl fmt::Display for LawName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LawName::Gaussian => "gaussian",
            LawName::Rademacher => "rademacher",
            LawName::Uniform => "uniform",
        })
    }
}

/// Deterministic data before randomization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSpec {
    /// Coefficients `amplitude·⟨n⟩^{−(s+3/2+δ)}` for `u₀` and `amplitude·⟨n⟩^{−(s+1/2+δ)}` for `u₁`.
    Profile {
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        /// Defaults to the solver cutoff `resolution/2 − 1`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    },
    /// A two-field snapshot holding `(u₀, u₁)`.
    File { path: String },
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Profile { delta: default_delta(), amplitude: default_amplitude(), cutoff: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TstarConfig {
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default = "default_min_tstar")]
    pub min: f64,
}

impl Default for TstarConfig {
    fn default() -> Self {
        Self { c: default_c(), gamma: None, min: default_min_tstar() }
    }
}

impl TstarConfig {
    pub fn rule(&self) -> LocalTimeRule {
        LocalTimeRule { c: self.c, gamma: self.gamma }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    /// Length of the intervals `I_k`.
    #[serde(default = "default_event_tstar")]
    pub tstar: f64,
    #[serde(default = "default_nodes")]
    pub nodes_per_interval: usize,
    #[serde(default = "default_prefactors")]
    pub prefactors: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Defaults to `s/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl Default for EventConfig {
    fn default() -> Self {
        Self {
            tstar: default_event_tstar(),
            nodes_per_interval: default_nodes(),
            prefactors: default_prefactors(),
            epsilon: default_epsilon(),
            alpha: None,
        }
    }
}

/// Validated configuration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    /// Defaults to `0.01·32/resolution`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(rename = "N", default = "default_truncations")]
    pub truncations: Vec<f64>,
    #[serde(default = "default_law")]
    pub law: LawName,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub tstar: TstarConfig,
    #[serde(default)]
    pub events: EventConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn default_s() -> f64 {
    0.9
}
fn default_resolution() -> usize {
    32
}
fn default_horizon() -> f64 {
    1.0
}
fn default_truncations() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0]
}
fn default_law() -> LawName {
    LawName::Gaussian
}
fn default_samples() -> usize {
    20
}
fn default_delta() -> f64 {
    0.01
}
fn default_amplitude() -> f64 {
    1.0
}
fn default_c() -> f64 {
    0.1
}
fn default_min_tstar() -> f64 {
    1e-6
}
fn default_event_tstar() -> f64 {
    0.1
}
fn default_nodes() -> usize {
    5
}
fn default_prefactors() -> Vec<f64> {
    vec![0.0, 1.0, 3.0, 10.0, 100.0]
}
fn default_epsilon() -> f64 {
    0.01
}

impl RunConfig {
    /// Configuration with every default and the given exponent.
    pub fn with_exponent(p: f64) -> Self {
        Self {
            p,
            s: default_s(),
            seed: 0,
            resolution: default_resolution(),
            horizon: default_horizon(),
            dt_max: None,
            truncations: default_truncations(),
            law: default_law(),
            samples: default_samples(),
            data: DataSpec::default(),
            tstar: TstarConfig::default(),
            events: EventConfig::default(),
            output_dir: None,
        }
    }

    /// Solver cutoff `M = resolution/2 − 1`.
    pub fn cutoff(&self) -> usize {
        self.resolution / 2 - 1
    }

    pub fn effective_dt_max(&self) -> f64 {
        self.dt_max.unwrap_or(0.01 * 32.0 / self.resolution as f64)
    }

    /// TOML text that [`parse_config`] maps back to `self`.
    pub fn serialize(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization.
    /// The output directory does not enter the hash: it changes where
    /// results go, not what they are.
    pub fn hash(&self) -> String {
        let canonical = Self { output_dir: None, ..self.clone() };
        let digest = Sha256::digest(canonical.serialize().as_bytes());
        hex::encode(&digest[..8])
    }

    /// Constraint violations (errors) and advisory findings (warnings).
    pub fn check(&self) -> (Vec<Violation>, Vec<String>) {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        let mut err = |key: &'static str, message: String| errors.push(Violation { key, message });
        if critical_exponents(self.p).is_err() {
            err("p", format!("p must lie in (3,5), got {}", self.p));
        } else {
            let (s_cr, s_min) = critical_exponents_limit(self.p);
            if !(self.s > s_min && self.s < 1.0) {
                warnings.push(format!(
                    "s = {} lies outside the range ({s_min:.6}, 1) for p = {} (critical index {s_cr:.6}); run is exploratory",
                    self.s, self.p
                ));
            }
        }
        if !self.s.is_finite() {
            err("s", "s must be finite".into());
        }
        if !self.resolution.is_power_of_two() || self.resolution < 4 {
            err("resolution", format!("resolution must be a power of two >= 4, got {}", self.resolution));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            err("T", format!("T must be positive, got {}", self.horizon));
        }
        if let Some(dt) = self.dt_max {
            if !(dt > 0.0 && dt.is_finite()) {
                err("dt_max", format!("dt_max must be positive, got {dt}"));
            }
        }
        if self.truncations.is_empty() || self.truncations.iter().any(|&n| !(n > 0.0 && n.is_finite())) {
            err("N", "N must be a non-empty list of positive numbers".into());
        } else if self.truncations.windows(2).any(|w| !(w[1] > w[0])) {
            err("N", "N must be strictly increasing".into());
        }
        if self.samples == 0 {
            err("samples", "samples must be at least 1".into());
        }
        match &self.data {
            DataSpec::Profile { delta, amplitude, cutoff } => {
                if !delta.is_finite() || !amplitude.is_finite() {
                    err("delta", "profile delta and amplitude must be finite".into());
                }
                if let Some(m) = cutoff {
                    if self.resolution >= 4 && *m > self.cutoff() {
                        err("cutoff", format!("data cutoff {m} exceeds the solver cutoff {} of resolution {}", self.cutoff(), self.resolution));
                    }
                }
            }
            DataSpec::File { path } => {
                if path.is_empty() {
                    err("path", "data file path is empty".into());
                }
            }
        }
        if !(self.tstar.c > 0.0) {
            err("c", format!("t* constant c must be positive, got {}", self.tstar.c));
        }
        if self.tstar.gamma.is_some_and(|g| !(g > 0.0)) {
            err("gamma", "t* exponent gamma must be positive".into());
        }
        if !(self.tstar.min > 0.0) {
            err("min", "t* floor must be positive".into());
        }
        let ev = &self.events;
        if !(ev.tstar > 0.0) {
            err("tstar", "event interval length must be positive".into());
        }
        if ev.nodes_per_interval < 2 {
            err("nodes_per_interval", "need at least two nodes per interval".into());
        }
        if !(ev.epsilon > 0.0 && ev.epsilon < 1.0) {
            err("epsilon", "epsilon must lie in (0,1)".into());
        }
        if ev.prefactors.iter().any(|c| !(*c >= 0.0)) {
            err("prefactors", "prefactors must be nonnegative".into());
        }
        (errors, warnings)
    }
}

/// One failed constraint, keyed by the offending TOML key.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: &'static str,
    pub message: String,
}

/// A located configuration problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigIssue {
    /// 1-based line, when the problem maps to a line of the input.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid configuration: {}", .issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

/// A validated configuration and its advisory warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub config: RunConfig,
    pub warnings: Vec<String>,
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

/// Parses TOML text, fills defaults and validates every constraint,
/// reporting all violations at once.
pub fn parse_config(text: &str) -> Result<Parsed, ConfigError> {
    validate(from_toml(text)?, Some(text))
}

/// Parses TOML text and fills defaults without checking value constraints,
/// so that command-line overrides can be applied before validation.
pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e: toml::de::Error| {
        let start = e.span().map(|s| s.start);
        // An unknown key is reported against its whole table; point at the key instead.
        let key_line = e
            .message()
            .strip_prefix("unknown field `")
            .and_then(|rest| rest.split('`').next())
            .and_then(|key| {
                let from = start.map_or(0, |o| line_of_offset(text, o) - 1);
                let tail: String = text.lines().skip(from).collect::<Vec<_>>().join("\n");
                line_of_key(&tail, key).map(|l| l + from)
            });
        let line = key_line.or_else(|| start.map(|o| line_of_offset(text, o)));
        ConfigError { issues: vec![ConfigIssue { line, message: e.message().to_string() }] }
    })
}

/// Validates a configuration built in code or merged from flags.
pub fn validate(config: RunConfig, text: Option<&str>) -> Result<Parsed, ConfigError> {
    let (errors, warnings) = config.check();
    if errors.is_empty() {
        return Ok(Parsed { config, warnings });
    }
    let issues = errors
        .into_iter()
        .map(|v| ConfigIssue { line: text.and_then(|t| line_of_key(t, v.key)), message: v.message })
        .collect();
    Err(ConfigError { issues })
}
