//! Experiment configuration: JSON file merged over defaults, then `--set`
//! overrides, then strict deserialization.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use relaxwave_core::diagnostics::{EnvelopeGrid, VerdictOptions};
use relaxwave_core::initial::PerturbationSpec;
use relaxwave_core::{CurveMode, FluxModel, Scheme, SolverConfig, SourceMode};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `burgers`, `linear` or `euler`.
    pub label: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    /// Constant flux matrix of the `linear` model, row major.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
}

/// How the wave fan is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FanConfig {
    /// Riemann data `(u_-, u_+)`.
    Riemann { u_minus: Vec<f64>, u_plus: Vec<f64> },
    /// Wave-curve construction from a known intermediate state.
    Design {
        anchor: Vec<f64>,
        anchor_index: usize,
        strengths: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub scheme: Scheme,
    pub cfl: f64,
    pub source: SourceMode,
    pub half_width: f64,
    pub cells: usize,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    /// Shock field to export; every shock when absent.
    pub field: Option<usize>,
    pub half_width: f64,
    /// Odd counts put `xi = 0` on a sample.
    pub samples: usize,
    pub residual_tolerance: f64,
    pub endpoint_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSection {
    pub times: Vec<f64>,
    /// Half-width of the sample window in units of `sigma(t)`.
    pub sigmas: f64,
    pub samples: usize,
    pub decay_t_min: f64,
    pub decay_t_max: f64,
    pub exponent_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub sweep_strengths: Vec<f64>,
    pub shifts: Option<Vec<f64>>,
    /// Number of heat-kernel parameters drawn from the seeded generator.
    pub gamma_count: usize,
    pub gamma_range: [f64; 2],
    pub heat_times: Vec<f64>,
    pub envelope: EnvelopeSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSection {
    pub x_half_width: f64,
    pub x_points: usize,
    pub t_max: f64,
    pub t_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub a: f64,
    pub eps: f64,
    pub fan: FanConfig,
    /// Linearly degenerate field carried by a contact wave.
    pub contact_field: Option<usize>,
    pub curve_mode: CurveMode,
    pub perturbation: PerturbationSpec,
    pub solver: SolverSection,
    pub profile: ProfileSection,
    pub contact: ContactSection,
    pub check: CheckSection,
    pub verdict: VerdictOptions,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        let env = EnvelopeGrid::default();
        Self {
            model: ModelConfig {
                label: "euler".into(),
                parameters: BTreeMap::from([("gamma".to_string(), 1.4)]),
                matrix: None,
            },
            a: 0.18,
            eps: 1.0,
            fan: FanConfig::Design {
                // rho = 1, w = 0, p = 0.01
                anchor: vec![1.0, 0.0, 0.025],
                anchor_index: 1,
                strengths: vec![0.05; 3],
            },
            contact_field: Some(1),
            curve_mode: CurveMode::Auto,
            perturbation: PerturbationSpec {
                shape: relaxwave_core::initial::Shape::Gaussian,
                amplitude: 0.01,
                center: 0.0,
                width: 1.0,
                mass_free: true,
                direction: relaxwave_core::initial::Direction::Eigen,
                ..PerturbationSpec::default()
            },
            solver: SolverSection {
                scheme: solver.scheme,
                cfl: solver.cfl,
                source: solver.source,
                half_width: solver.half_width,
                cells: solver.cells,
                t_end: solver.t_end,
                snapshot_times: solver.snapshot_times,
            },
            profile: ProfileSection {
                field: None,
                half_width: 40.0,
                samples: 801,
                residual_tolerance: 1e-8,
                endpoint_tolerance: 1e-6,
            },
            contact: ContactSection {
                times: vec![0.0, 1.0, 10.0, 100.0],
                sigmas: 10.0,
                samples: 401,
                decay_t_min: 10.0,
                decay_t_max: 1000.0,
                exponent_tolerance: 0.1,
            },
            check: CheckSection {
                sweep_strengths: vec![0.025, 0.05, 0.1],
                shifts: None,
                gamma_count: 5,
                gamma_range: [0.05, 5.0],
                heat_times: vec![0.0, 1.0, 10.0],
                envelope: EnvelopeSection {
                    x_half_width: env.x_half_width,
                    x_points: env.x_points,
                    t_max: env.t_max,
                    t_points: env.t_points,
                },
            },
            verdict: VerdictOptions::default(),
            output_dir: PathBuf::from("runs"),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn model(&self) -> Result<FluxModel, CliError> {
        FluxModel::from_label(&self.model.label, &self.model.parameters, self.model.matrix.as_deref())
            .map_err(|e| CliError::core("model", e))
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            scheme: s.scheme,
            cfl: s.cfl,
            source: s.source,
            half_width: s.half_width,
            cells: s.cells,
            t_end: s.t_end,
            snapshot_times: s.snapshot_times.clone(),
            eps: self.eps,
        }
    }

    pub fn envelope_grid(&self) -> EnvelopeGrid {
        let e = &self.check.envelope;
        EnvelopeGrid {
            x_half_width: e.x_half_width,
            x_points: e.x_points,
            t_max: e.t_max,
            t_points: e.t_points,
        }
    }

    /// Canonical JSON text; object keys are sorted.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string_pretty(&value).expect("value serializes") + "\n"
    }
}

/// Recursively overlays `patch` onto `base`; objects merge, anything else
/// replaces.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies `key.path=value`; the value is parsed as JSON and falls back to
/// a plain string.
fn set_path(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("override '{assignment}' is not of the form key=value")))?;
    if key.is_empty() {
        return Err(CliError::usage(format!("override '{assignment}' has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        let last = k + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| CliError::usage(format!("'{part}' in '{key}' is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(i)
                    .ok_or_else(|| CliError::usage(format!("index {i} in '{key}' out of range (length {len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(CliError::usage(format!("'{key}' descends into a scalar"))),
        };
    }
    unreachable!("loop returns on the last component")
}

/// Defaults, then the file at `path`, then `overrides` in order.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut value = serde_json::to_value(ExperimentConfig::default()).expect("defaults serialize");
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        if !file.is_object() {
            return Err(CliError::usage(format!("config {} must be a JSON object", path.display())));
        }
        // `model` and `fan` are replaced as a whole: their parameter maps and
        // variants do not combine with the defaults.
        for key in ["model", "fan"] {
            if let Some(v) = file.get(key) {
                if !v.is_object() {
                    return Err(CliError::usage(format!("'{key}' must be an object")));
                }
                value[key] = Value::Object(Default::default());
            }
        }
        merge(&mut value, file);
    }
    for o in overrides {
        set_path(&mut value, o)?;
    }
    let config: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
    validate(&config)?;
    Ok(config)
}

fn validate(c: &ExperimentConfig) -> Result<(), CliError> {
    if !(c.a > 0.0 && c.a.is_finite()) {
        return Err(CliError::usage(format!("a must be positive, got {}", c.a)));
    }
    c.solver_config().validate().map_err(|e| CliError::core("config", e))?;
    if c.profile.samples < 3 {
        return Err(CliError::usage("profile.samples must be at least 3".into()));
    }
    if c.contact.samples < 2 || !(c.contact.sigmas > 0.0) {
        return Err(CliError::usage("contact window needs samples >= 2 and sigmas > 0".into()));
    }
    if !(c.contact.decay_t_min > 0.0 && c.contact.decay_t_max > 2.0 * c.contact.decay_t_min) {
        return Err(CliError::usage("contact decay needs 0 < decay_t_min and decay_t_max > 2 decay_t_min".into()));
    }
    let [lo, hi] = c.check.gamma_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(CliError::usage(format!("check.gamma_range must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
    }
    if c.check.envelope.x_points < 3 || c.check.envelope.t_points < 2 {
        return Err(CliError::usage("envelope grid needs x_points >= 3 and t_points >= 2".into()));
    }
    Ok(())
}
