use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub radius: f64,
    /// Defaults to `radius / 64`.
    pub h: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { radius: 1.5, h: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Defaults to `4 * grid.radius`.
    pub sphere_radius: Option<f64>,
    pub num_points: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { sphere_radius: None, num_points: 16, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub regularity: f64,
    pub rank: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { regularity: 1e-6, rank: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeparationConfig {
    pub radius: f64,
    pub pairs: usize,
    pub factor: f64,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        Self { radius: 0.02, pairs: 10, factor: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReduceConfig {
    pub form: String,
    pub k: u32,
    /// Defaults to `2 n (N - 1)`.
    pub maxdeg: Option<u32>,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        Self { form: "1".into(), k: 0, maxdeg: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JacobianConfig {
    /// `surface` or `finite_difference`.
    pub method: String,
    pub delta: f64,
    /// `moments` or `potential`.
    pub observable: String,
}

impl Default for JacobianConfig {
    fn default() -> Self {
        Self { method: "surface".into(), delta: 1e-3, observable: "moments".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoverConfig {
    /// Start point; empty means `lambda` moved by `offset` in a seeded direction.
    pub lambda0: Vec<f64>,
    pub offset: f64,
    pub max_iterations: usize,
    pub residual_tol: f64,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        Self { lambda0: Vec::new(), offset: 1e-2, max_iterations: 50, residual_tol: 1e-8 }
    }
}

/// Everything a run depends on; echoed into the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n: usize,
    /// `fermat:N`, `morse`, or a polynomial in `x1..xn`.
    pub germ: String,
    pub lambda: Vec<f64>,
    /// Density polynomial; must not vanish at the origin.
    pub psi: String,
    pub grid: GridConfig,
    pub eval: EvalConfig,
    /// Defaults to the smallest order with at least `mu + 3` moments.
    pub moment_order: Option<u32>,
    pub thresholds: Thresholds,
    /// `fractional` or `midpoint`.
    pub quadrature: String,
    pub separation: SeparationConfig,
    pub reduce: ReduceConfig,
    pub jacobian: JacobianConfig,
    pub recover: RecoverConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 3,
            germ: "morse".into(),
            lambda: vec![-1.0],
            psi: "1".into(),
            grid: GridConfig::default(),
            eval: EvalConfig::default(),
            moment_order: None,
            thresholds: Thresholds::default(),
            quadrature: "fractional".into(),
            separation: SeparationConfig::default(),
            reduce: ReduceConfig::default(),
            jacobian: JacobianConfig::default(),
            recover: RecoverConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Defaults, then the optional JSON file, then `key.path=value` overrides.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut doc = serde_json::to_value(Self::default()).expect("default config serializes");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            let user: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
            merge(&mut doc, user);
        }
        for (key, value) in overrides {
            set_path(&mut doc, key, value)?;
        }
        serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn h(&self) -> f64 {
        self.grid.h.unwrap_or(self.grid.radius / 64.0)
    }

    pub fn sphere_radius(&self) -> f64 {
        self.eval.sphere_radius.unwrap_or(4.0 * self.grid.radius)
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

/// Parses an override value against the slot it replaces: strings stay
/// verbatim, array slots take JSON arrays, single values or comma lists,
/// anything else is JSON (with comma lists as arrays).
fn parse_value(current: Option<&Value>, raw: &str) -> Value {
    let list = || {
        Value::Array(
            raw.split(',')
                .map(|s| serde_json::from_str(s.trim()).unwrap_or_else(|_| Value::String(s.trim().to_string())))
                .collect(),
        )
    };
    let json = serde_json::from_str::<Value>(raw).ok();
    match current {
        Some(Value::String(_)) => Value::String(raw.to_string()),
        Some(Value::Array(_)) => match json {
            Some(Value::Array(a)) => Value::Array(a),
            _ => list(),
        },
        _ => match json {
            Some(v) => v,
            None if raw.contains(',') => list(),
            None => Value::String(raw.to_string()),
        },
    }
}

fn set_path(doc: &mut Value, key: &str, raw: &str) -> Result<(), CliError> {
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| CliError::Usage(format!("`{key}` is not a config path")))?;
        if !obj.contains_key(*part) {
            return Err(CliError::Usage(format!("unknown config key `{key}`")));
        }
        if i + 1 == parts.len() {
            let v = parse_value(obj.get(*part), raw);
            obj.insert(part.to_string(), v);
            return Ok(());
        }
        node = obj.get_mut(*part).expect("checked above");
    }
    Err(CliError::Usage(format!("empty config key `{key}`")))
}

/// Splits `--a.b=value` overrides (any key present in the config) from the
/// remaining arguments.
pub fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let doc = serde_json::to_value(RunConfig::default()).expect("default config serializes");
    let is_key = |k: &str| {
        let mut node = &doc;
        for part in k.split('.') {
            match node.get(part) {
                Some(v) => node = v,
                None => return false,
            }
        }
        true
    };
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    for a in args {
        if let Some((k, v)) = a.strip_prefix("--").and_then(|s| s.split_once('=')) {
            if is_key(k) {
                overrides.push((k.to_string(), v.to_string()));
                continue;
            }
        }
        rest.push(a);
    }
    (rest, overrides)
}
