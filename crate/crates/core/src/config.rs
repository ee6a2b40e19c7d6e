//! JSON configuration documents for the `simulate` and `hj-suite` commands.

use std::path::Path;

use serde::Deserialize;

use crate::dynamics::Control;
use crate::error::{Error, Result};
use crate::lie::{Mat3, Rotation};
use crate::model::{Case, InertiaParams};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub inertia: [f64; 3],
    pub j3: f64,
    #[serde(default)]
    pub gh: f64,
    #[serde(default = "e3")]
    pub chi: [f64; 3],
}

fn e3() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub pi: [f64; 3],
    pub gamma: Option<[f64; 3]>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub l: f64,
    /// Row-major attitude; presence selects full-state integration.
    pub attitude: Option<[[f64; 3]; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlConfig {
    #[default]
    None,
    Constant { value: f64 },
    LinearFeedback { gain: f64 },
}

impl ControlConfig {
    pub fn law(&self) -> Control {
        match *self {
            ControlConfig::None => Control::None,
            ControlConfig::Constant { value } => Control::Constant(value),
            ControlConfig::LinearFeedback { gain } => Control::LinearFeedback { gain },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Rk4,
    Rkmk4,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOutputs {
    #[serde(default = "default_trajectory")]
    pub trajectory: String,
    #[serde(default = "default_report")]
    pub report: String,
}

impl Default for ScenarioOutputs {
    fn default() -> Self {
        ScenarioOutputs {
            trajectory: default_trajectory(),
            report: default_report(),
        }
    }
}

fn default_trajectory() -> String {
    "trajectory.csv".into()
}

fn default_report() -> String {
    "report.json".into()
}

fn default_hj_report() -> String {
    "hj_report.json".into()
}

/// Conservation tolerances on maximum relative drift.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub energy: f64,
    pub casimirs: f64,
    pub l: f64,
    pub momentum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            energy: 1e-9,
            casimirs: 1e-10,
            l: 1e-13,
            momentum: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub case: Case,
    pub params: ParamsConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub control: ControlConfig,
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub integrator: Integrator,
    pub stride: Option<usize>,
    #[serde(default = "default_reorth")]
    pub reorthonormalize_every: Option<usize>,
    #[serde(default)]
    pub outputs: ScenarioOutputs,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_reorth() -> Option<usize> {
    Some(100)
}

/// Validated physical setup of a scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub params: InertiaParams,
    pub attitude: Option<Rotation>,
}

impl Scenario {
    /// Integrates a full state when an attitude is given or `rkmk4` is used.
    pub fn full_state(&self) -> bool {
        self.attitude.is_some() || self.config.integrator == Integrator::Rkmk4
    }
}

fn invalid(path: &str, e: Error) -> Error {
    match e {
        Error::InvalidParams(m) | Error::Degenerate(m) => Error::config(path, m),
        other => Error::config(path, other.to_string()),
    }
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Scenario> {
        parse::<ScenarioConfig>(text)?.validate()
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        Self::from_json(&read(path)?)
    }

    pub fn validate(self) -> Result<Scenario> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        if self.stride == Some(0) {
            return Err(Error::config("stride", "must be at least 1"));
        }
        if self.reorthonormalize_every == Some(0) {
            return Err(Error::config("reorthonormalize_every", "must be at least 1"));
        }
        let p = &self.params;
        let gh = match self.case {
            Case::Coincident if p.gh != 0.0 => {
                return Err(Error::config("params.gh", "must be 0 in the coincident case"))
            }
            _ => p.gh,
        };
        let params = InertiaParams::new(p.inertia, p.j3, gh, p.chi).map_err(|e| invalid("params", e))?;
        match (self.case, self.initial.gamma) {
            (Case::Noncoincident, None) => {
                return Err(Error::config("initial.gamma", "required in the noncoincident case"))
            }
            (Case::Coincident, Some(_)) => {
                return Err(Error::config("initial.gamma", "not allowed in the coincident case"))
            }
            _ => {}
        }
        let attitude = match self.initial.attitude {
            None => None,
            Some(rows) => {
                let m = Mat3::from_fn(|i, j| rows[i][j]);
                Some(Rotation::new(m).map_err(|e| invalid("initial.attitude", e))?)
            }
        };
        Ok(Scenario {
            config: self,
            params,
            attitude,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Battery {
    /// Dual-transcription Type I audit, both cases.
    Type1,
    /// Closed and non-closed one-form witnesses.
    Closedness,
    /// Type II dual-residual equivalence over the ε battery.
    Type2,
    /// Poisson-map property of identity, flow and broken maps.
    PoissonMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct HjTolerances {
    pub type1: f64,
    pub closed: f64,
    pub non_closed: f64,
    pub type2_gate: f64,
    pub poisson_flow: f64,
}

impl Default for HjTolerances {
    fn default() -> Self {
        HjTolerances {
            type1: 1e-15,
            closed: 1e-6,
            non_closed: 1e-3,
            type2_gate: 1e-4,
            poisson_flow: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HjOutputs {
    #[serde(default = "default_hj_report")]
    pub report: String,
}

impl Default for HjOutputs {
    fn default() -> Self {
        HjOutputs {
            report: default_hj_report(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HjSuiteConfig {
    #[serde(default = "default_points")]
    pub points: usize,
    /// Random states per map in the Type II and Poisson-map batteries.
    #[serde(default = "default_map_points")]
    pub map_points: usize,
    #[serde(default = "all_batteries")]
    pub batteries: Vec<Battery>,
    #[serde(default = "default_range")]
    pub param_range: [f64; 2],
    #[serde(default)]
    pub tolerances: HjTolerances,
    #[serde(default)]
    pub outputs: HjOutputs,
}

fn default_points() -> usize {
    1000
}

fn default_map_points() -> usize {
    4
}

fn all_batteries() -> Vec<Battery> {
    vec![Battery::Type1, Battery::Closedness, Battery::Type2, Battery::PoissonMap]
}

fn default_range() -> [f64; 2] {
    [0.5, 5.0]
}

impl HjSuiteConfig {
    pub fn from_json(text: &str) -> Result<HjSuiteConfig> {
        parse::<HjSuiteConfig>(text)?.validate()
    }

    pub fn load(path: &Path) -> Result<HjSuiteConfig> {
        Self::from_json(&read(path)?)
    }

    pub fn validate(self) -> Result<HjSuiteConfig> {
        if self.batteries.is_empty() {
            return Err(Error::config("batteries", "must list at least one battery"));
        }
        if self.points == 0 {
            return Err(Error::config("points", "must be at least 1"));
        }
        if self.map_points == 0 {
            return Err(Error::config("map_points", "must be at least 1"));
        }
        let [lo, hi] = self.param_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(Error::config("param_range", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
        }
        Ok(self)
    }
}
