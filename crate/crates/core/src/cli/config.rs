//! JSON run configuration with dotted-path overrides.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flow::Numerics;
use crate::integrate::Tolerances;
use crate::model::{check_hypotheses, ForcingParams, SystemParams, VectorFieldSpec};
use crate::symbolic::DetectOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub family: String,
    pub params: Vec<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { family: "linear".into(), params: vec![-1.0, 0.5] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingConfig {
    #[serde(rename = "A")]
    pub a: f64,
    pub d: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        ForcingConfig { a: 0.8, d: 0.5, t: 1.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub rtol: f64,
    pub atol: f64,
    pub event_tol: f64,
    pub fp_tol: f64,
    pub burn_in: usize,
    /// Period cap; when absent sweeps use 20 and scans 64.
    pub max_period: Option<usize>,
    /// Return-distance tolerance of cycle detection.
    pub detect_tol: f64,
    /// Extra burn-in blocks allowed while an orbit is still converging.
    pub max_extensions: usize,
    pub horizon_periods: f64,
    /// Integrate the linear family numerically instead of in closed form.
    pub force_numeric: bool,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            rtol: 1e-10,
            atol: 1e-12,
            event_tol: 1e-12,
            fp_tol: 1e-10,
            burn_in: 500,
            max_period: None,
            detect_tol: 1e-9,
            max_extensions: 64,
            horizon_periods: 2000.0,
            force_numeric: false,
        }
    }
}

pub const SWEEP_MAX_PERIOD: usize = 20;
pub const SCAN_MAX_PERIOD: usize = 64;

impl NumericsConfig {
    pub fn numerics(&self) -> Numerics {
        Numerics {
            tol: Tolerances { rtol: self.rtol, atol: self.atol, event_tol: self.event_tol },
            force_numeric: self.force_numeric,
        }
    }

    pub fn detect(&self, default_cap: usize) -> DetectOptions {
        DetectOptions {
            burn_in: self.burn_in,
            max_period: self.max_period.unwrap_or(default_cap),
            tol: self.detect_tol,
            max_extensions: self.max_extensions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapJob {
    pub points: usize,
}

impl Default for MapJob {
    fn default() -> Self {
        MapJob { points: 1000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitJob {
    pub x0: f64,
    pub samples_per_period: usize,
}

impl Default for OrbitJob {
    fn default() -> Self {
        OrbitJob { x0: 0.0, samples_per_period: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvesJob {
    pub d_min: f64,
    pub d_max: f64,
    pub d_points: usize,
    pub n_max: u32,
}

impl Default for CurvesJob {
    fn default() -> Self {
        CurvesJob { d_min: 0.02, d_max: 0.98, d_points: 50, n_max: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepJob {
    pub d_min: f64,
    pub d_max: f64,
    pub d_points: usize,
    pub inv_a_min: f64,
    pub inv_a_max: f64,
    pub inv_a_points: usize,
}

impl Default for SweepJob {
    fn default() -> Self {
        SweepJob { d_min: 0.02, d_max: 0.98, d_points: 150, inv_a_min: 0.02, inv_a_max: 2.0, inv_a_points: 150 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StaircaseJob {
    /// First window index `n` (spike counts `n` and `n+1`).
    pub window: u32,
    /// Number of consecutive windows to scan.
    pub windows: u32,
    pub d_start: f64,
    pub d_end: f64,
    pub steps: usize,
    pub adding_depth: u32,
    /// Points of each refinement scan requested by the adding check.
    pub refine_steps: usize,
}

impl Default for StaircaseJob {
    fn default() -> Self {
        StaircaseJob { window: 0, windows: 1, d_start: 0.5, d_end: 0.5, steps: 2001, adding_depth: 3, refine_steps: 201 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FareyJob {
    pub depth: u32,
}

impl Default for FareyJob {
    fn default() -> Self {
        FareyJob { depth: 4 }
    }
}

fn default_theta() -> f64 {
    1.0
}

/// Complete run configuration. Every block has defaults; the model defaults
/// to the linear field `-x + 0.5` with `theta = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub map: MapJob,
    #[serde(default)]
    pub orbit: OrbitJob,
    #[serde(default)]
    pub curves: CurvesJob,
    #[serde(default)]
    pub sweep: SweepJob,
    #[serde(default)]
    pub staircase: StaircaseJob,
    #[serde(default)]
    pub farey: FareyJob,
}

impl Default for Config {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl Config {
    /// Parses a JSON document and applies `key=value` overrides.
    pub fn from_json_with_overrides(text: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut root: Value = match text {
            Some(t) => serde_json::from_str(t).map_err(config_err)?,
            None => Value::Object(Default::default()),
        };
        if !root.is_object() {
            return Err(Error::Config("configuration must be a JSON object".into()));
        }
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        serde_json::from_value(root).map_err(config_err)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with_overrides(Some(text), &[])
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical JSON echo.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn system(&self) -> Result<SystemParams> {
        let field = VectorFieldSpec::from_family(&self.model.family, &self.model.params).map_err(config_err)?;
        let forcing = ForcingParams::new(self.forcing.a, self.forcing.d, self.forcing.t).map_err(config_err)?;
        SystemParams::new(field, forcing, self.theta).map_err(config_err)
    }

    /// Builds the system and checks the standing hypotheses on it.
    pub fn validated_system(&self) -> Result<SystemParams> {
        let sys = self.system()?;
        let rep = check_hypotheses(&sys).map_err(config_err)?;
        if !rep.h1_ok || !rep.h2_ok {
            return Err(Error::Config(format!(
                "hypotheses fail for {} {:?}: attracting rest state in (0, theta) = {}, f' < 0 on [0, theta] = {} (max f' = {})",
                self.model.family, self.model.params, rep.h1_ok, rep.h2_ok, rep.max_df
            )));
        }
        let n = &self.numerics;
        if !(n.rtol > 0.0 && n.atol > 0.0 && n.event_tol > 0.0 && n.fp_tol > 0.0 && n.detect_tol > 0.0) {
            return Err(Error::Config("numerical tolerances must be positive".into()));
        }
        if n.max_period == Some(0) || !(n.horizon_periods > 0.0) {
            return Err(Error::Config("max_period and horizon_periods must be positive".into()));
        }
        Ok(sys)
    }
}

/// Sets the leaf at a dotted path. The value is read as JSON when it parses,
/// otherwise as a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not KEY=VALUE")))?;
    let value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("bad override path `{path}`")));
    }
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("`{path}` descends into a non-object")))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("`{path}` descends into a non-object")))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}
