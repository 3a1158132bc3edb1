//! Versioned JSON run configuration.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "state": "fig4d",
//!   "theta": 0.0,
//!   "epsilon": 0.2,
//!   "g": 3.141592653589793,
//!   "postselection": "uniform",
//!   "method": "exact_inversion",
//!   "noise": { "pairs_per_setting": 100000, "trials": 200, "seed": 7 },
//!   "output_path": "out.csv",
//!   "format": "csv"
//! }
//! ```
//!
//! `state` is a preset name (`fig3`, `fig4a`..`fig4d`) or an explicit
//! `{ "dims": [m, n], "amplitudes": [[re, im], ...] }`. `postselection` is
//! `uniform`, `alt_postselection`, or an explicit state.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use directwf::presets;
use directwf::protocol::{MeterMode, ProtocolConfig};
use directwf::reconstruction::{EstimationMethod, ReconstructOptions};
use directwf::shot_noise::{CountingConfig, FailurePolicy};
use directwf::PureState;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Relative renormalization above which loading an explicit state warns.
const RENORMALIZATION_WARN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Preset(String),
    Explicit(ExplicitState),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitState {
    pub dims: Vec<usize>,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Method {
    FirstOrder,
    #[default]
    ExactInversion,
    Definitional,
}

impl From<Method> for EstimationMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::FirstOrder => EstimationMethod::FirstOrder,
            Method::ExactInversion => EstimationMethod::ExactInversion,
            Method::Definitional => EstimationMethod::Definitional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum MeterModeSpec {
    #[default]
    Entangled,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PolicySpec {
    #[default]
    Reject,
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub pairs_per_setting: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub policy: PolicySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub steps: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            theta_min: -PI,
            theta_max: PI,
            steps: 41,
        }
    }
}

fn default_trials() -> usize {
    200
}

fn default_epsilon() -> f64 {
    0.2
}

fn default_g() -> f64 {
    PI
}

fn default_state() -> StateSpec {
    StateSpec::Preset("fig4a".into())
}

fn default_postselection() -> StateSpec {
    StateSpec::Preset("uniform".into())
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_state")]
    pub state: StateSpec,
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "default_postselection")]
    pub postselection: StateSpec,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub meter_mode: MeterModeSpec,
    #[serde(default)]
    pub reference: Option<[usize; 2]>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_true")]
    pub timestamp: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            state: default_state(),
            theta: 0.0,
            epsilon: default_epsilon(),
            g: default_g(),
            postselection: default_postselection(),
            method: Method::default(),
            meter_mode: MeterModeSpec::default(),
            reference: None,
            noise: None,
            sweep: None,
            output_path: None,
            format: Format::default(),
            timestamp: true,
        }
    }
}

/// A resolved configuration plus any warnings raised while loading it.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl RunConfig {
    /// Parses a config document; errors name the line, column and field path.
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::config(format!(
                "config parse error at line {} column {} (field `{}`): {}",
                inner.line(),
                inner.column(),
                path,
                inner
            ))
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading config {}", path.display()),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn estimation_method(&self) -> EstimationMethod {
        self.method.into()
    }

    pub fn system_state(&self) -> Result<Loaded<PureState>, CliError> {
        match &self.state {
            StateSpec::Preset(name) => {
                let state = match name.as_str() {
                    "fig3" => presets::phase_bell(self.theta),
                    "fig4a" => presets::bell(),
                    "fig4b" => presets::bell_i(),
                    "fig4c" => presets::product_plus_minus_i(),
                    "fig4d" => presets::asymmetric_entangled(),
                    other => {
                        return Err(CliError::config(format!(
                            "field `state`: unknown preset `{other}` (expected fig3, fig4a, fig4b, fig4c or fig4d)"
                        )))
                    }
                };
                Ok(Loaded {
                    value: state,
                    warnings: Vec::new(),
                })
            }
            StateSpec::Explicit(explicit) => explicit.load("state"),
        }
    }

    pub fn postselection(&self, dims: (usize, usize)) -> Result<Loaded<PureState>, CliError> {
        match &self.postselection {
            StateSpec::Preset(name) => {
                let state = match name.as_str() {
                    "uniform" => presets::uniform_postselection(dims.0, dims.1),
                    "alt_postselection" if dims == (2, 2) => presets::alternate_postselection(),
                    "alt_postselection" => {
                        return Err(CliError::config(
                            "field `postselection`: alt_postselection is defined for two qubits only",
                        ))
                    }
                    other => {
                        return Err(CliError::config(format!(
                            "field `postselection`: unknown preset `{other}` (expected uniform or alt_postselection)"
                        )))
                    }
                };
                Ok(Loaded {
                    value: state,
                    warnings: Vec::new(),
                })
            }
            StateSpec::Explicit(explicit) => explicit.load("postselection"),
        }
    }

    pub fn reconstruct_options(&self) -> ReconstructOptions {
        let mut options = ReconstructOptions::default();
        if let Some([j, l]) = self.reference {
            options.reference = (j, l);
        }
        options
    }

    pub fn counting(&self) -> Result<Option<(CountingConfig, FailurePolicy)>, CliError> {
        self.noise
            .map(|n| {
                let counting = CountingConfig::binomial(n.pairs_per_setting, n.trials, n.seed)
                    .map_err(|e| CliError::config(format!("field `noise`: {e}")))?;
                let policy = match n.policy {
                    PolicySpec::Reject => FailurePolicy::Reject,
                    PolicySpec::Clamp => FailurePolicy::Clamp,
                };
                Ok((counting, policy))
            })
            .transpose()
    }

    /// Protocol configuration for `state`, with this config's meter settings.
    pub fn protocol_for(&self, state: PureState) -> Result<Loaded<ProtocolConfig>, CliError> {
        if state.dims().len() != 2 {
            return Err(CliError::config(format!(
                "field `state`: expected a bipartite state, got dims {:?}",
                state.dims()
            )));
        }
        let dims = (state.dims()[0], state.dims()[1]);
        let phi = self.postselection(dims)?;
        let mode = match self.meter_mode {
            MeterModeSpec::Entangled => MeterMode::Entangled,
            MeterModeSpec::Product => MeterMode::Product,
        };
        let cfg = ProtocolConfig::new(state, phi.value, self.epsilon)?
            .with_g(self.g)
            .with_meter_mode(mode);
        cfg.validate()?;
        Ok(Loaded {
            value: cfg,
            warnings: phi.warnings,
        })
    }

    pub fn protocol(&self) -> Result<Loaded<ProtocolConfig>, CliError> {
        let state = self.system_state()?;
        let mut out = self.protocol_for(state.value)?;
        out.warnings.splice(0..0, state.warnings);
        Ok(out)
    }
}

impl ExplicitState {
    fn load(&self, field: &str) -> Result<Loaded<PureState>, CliError> {
        let amps: Vec<Complex64> = self
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let raw = PureState::new(self.dims.clone(), amps)
            .map_err(|e| CliError::config(format!("field `{field}`: {e}")))?;
        let norm = raw.norm();
        let state = raw
            .normalize()
            .map_err(|e| CliError::config(format!("field `{field}`: {e}")))?;
        let mut warnings = Vec::new();
        if (norm - 1.0).abs() > RENORMALIZATION_WARN {
            warnings.push(format!(
                "field `{field}`: amplitudes renormalized (norm was {norm})"
            ));
        }
        Ok(Loaded {
            value: state,
            warnings,
        })
    }
}
