//! Run configuration: TOML (or JSON) file, then environment, then flags.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use reslab_core::direct::AveragingConfig;
use reslab_core::{BoxShape, Case, Damping, Domain, Forcing, Scheme, SetKind, SimConfig, WaveVector};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SEED_ENV: &str = "RESLAB_SEED";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Listing {
    #[default]
    Triads,
    S1,
    S2,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub domain: DomainSection,
    pub enumerate: EnumerateSection,
    pub model: ModelSection,
    pub simulation: SimulationSection,
    pub averaging: AveragingSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSection {
    pub bound: i32,
    #[serde(rename = "box")]
    pub shape: BoxShape,
    /// Ceiling for the brute-force enumeration.
    pub max_bound: i32,
}

impl Default for DomainSection {
    fn default() -> Self {
        Self { bound: 2, shape: BoxShape::default(), max_bound: reslab_core::resonance::DEFAULT_MAX_BOUND }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnumerateSection {
    pub set: Listing,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k3: Option<WaveVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub case: Case,
    pub mu: f64,
    pub damping: Damping,
    pub forcing: Forcing,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { case: Case::B, mu: 1.0, damping: Damping::Linear, forcing: Forcing::Constant { value: 1.0 } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub step: f64,
    pub horizon: f64,
    pub ensemble: usize,
    pub scheme: Scheme,
    pub checkpoints: usize,
    /// Initial amplitude `[re, im]` of every mode.
    pub initial: [f64; 2],
}

impl Default for SimulationSection {
    fn default() -> Self {
        let d = SimConfig::default();
        Self {
            step: d.step,
            horizon: d.horizon,
            ensemble: d.ensemble,
            scheme: d.scheme,
            checkpoints: d.checkpoints,
            initial: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AveragingSection {
    pub nu: Vec<f64>,
    pub paths: usize,
    pub horizon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_fast: Option<f64>,
    pub effective_scheme: Scheme,
}

impl Default for AveragingSection {
    fn default() -> Self {
        Self {
            nu: vec![0.1, 0.05, 0.025],
            paths: 256,
            horizon: 1.0,
            h_fast: None,
            effective_scheme: Scheme::EulerMaruyama,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Not echoed into the resolved config, so reruns into different
    /// directories produce identical files.
    #[serde(skip_serializing)]
    pub dir: PathBuf,
    pub format: Format,
    pub emit_plot_data: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: Format::Csv, emit_plot_data: false }
    }
}

impl RunConfig {
    /// Reads `path` (JSON when the extension is `.json`, TOML otherwise).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Applies `RESLAB_SEED` when set.
    pub fn apply_env(&mut self) -> Result<(), CliError> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            self.seed = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{raw}`")))?;
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        Ok(Domain::new(self.domain.bound, self.domain.shape)?)
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = &self.simulation;
        SimConfig {
            step: s.step,
            horizon: s.horizon,
            seed: self.seed,
            ensemble: s.ensemble,
            scheme: s.scheme,
            checkpoints: s.checkpoints,
        }
    }

    pub fn averaging_config(&self) -> AveragingConfig {
        let a = &self.averaging;
        AveragingConfig {
            mu: self.model.mu,
            damping: self.model.damping,
            forcing: self.model.forcing,
            horizon: a.horizon,
            paths: a.paths,
            h_fast: a.h_fast,
            seed: self.seed,
            initial: Complex64::new(self.simulation.initial[0], self.simulation.initial[1]),
            effective_scheme: a.effective_scheme,
        }
    }

    pub fn set_kind(&self) -> Option<SetKind> {
        match self.enumerate.set {
            Listing::Triads => None,
            Listing::S1 => Some(SetKind::S1),
            Listing::S2 => Some(SetKind::S2),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

/// Parses a comma-separated ν ladder.
pub fn parse_nu_list(raw: &str) -> Result<Vec<f64>, CliError> {
    let nus: Vec<f64> = raw
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("malformed nu list `{raw}`")))?;
    validate_nu_list(&nus)?;
    Ok(nus)
}

pub fn validate_nu_list(nus: &[f64]) -> Result<(), CliError> {
    if nus.is_empty() {
        return Err(CliError::Usage("nu list is empty".into()));
    }
    if nus.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(CliError::Usage("every nu must be positive".into()));
    }
    if nus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Usage("nu list must be strictly descending".into()));
    }
    Ok(())
}

/// `zero`, `linear`, `quadratic` or `const:V`.
pub fn parse_damping(raw: &str) -> Result<Damping, String> {
    match raw.trim() {
        "zero" => Ok(Damping::Zero),
        "linear" => Ok(Damping::Linear),
        "quadratic" => Ok(Damping::Quadratic),
        other => other
            .strip_prefix("const:")
            .and_then(|v| v.parse().ok())
            .map(|value| Damping::Constant { value })
            .ok_or_else(|| format!("expected zero|linear|quadratic|const:V, got `{raw}`")),
    }
}

/// `const:V` or `power:S`.
pub fn parse_forcing(raw: &str) -> Result<Forcing, String> {
    let raw = raw.trim();
    if let Some(v) = raw.strip_prefix("const:") {
        return v.parse().map(|value| Forcing::Constant { value }).map_err(|_| format!("bad forcing `{raw}`"));
    }
    if let Some(s) = raw.strip_prefix("power:") {
        return s.parse().map(|s| Forcing::Power { s }).map_err(|_| format!("bad forcing `{raw}`"));
    }
    Err(format!("expected const:V or power:S, got `{raw}`"))
}
