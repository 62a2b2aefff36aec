//! Experiment configs: JSON schema validation, then semantic checks that
//! need the parsed values.

use std::fmt;
use std::path::PathBuf;
use std::sync::OnceLock;

use jsonschema::error::ValidationErrorKind;
use serde::Deserialize;
use serde_json::Value;
use slice_gauss::harness::{PerturbationMode, ReferenceChoice, DEFAULT_BIAS_BUDGET};
use slice_gauss::vectors::VectorDescriptor;
use slice_gauss::{Integrand, IntegrandKind, OrthonormalFamily, SequenceVector};

pub const SCHEMA: &str = include_str!("../schema/experiment.schema.json");

/// A config problem, tied to the offending top-level field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: field \"{}\": {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Vec<VectorDescriptor>,
    pub p: Vec<f64>,
    pub k: usize,
    pub integrand: IntegrandKind,
    pub n_schedule: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub output: PathBuf,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub reference: ReferenceChoice,
    #[serde(default)]
    pub bias_budget: Option<f64>,
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub perturbation: PerturbationMode,
    #[serde(default)]
    pub base: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub directions: Option<Vec<Vec<f64>>>,
}

/// A config with its family and integrand already built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub members: Vec<SequenceVector>,
    pub family: OrthonormalFamily,
    pub integrand: Integrand,
}

impl Experiment {
    /// The single ambient dimension used by `integrate`, `tails`, `rotate`,
    /// `geometry` and `perturb`: `n` if given, else the last schedule entry.
    pub fn n(&self) -> usize {
        self.config
            .n
            .unwrap_or_else(|| *self.config.n_schedule.last().expect("schedule validated non-empty"))
    }

    pub fn bias_budget(&self) -> f64 {
        self.config.bias_budget.unwrap_or(DEFAULT_BIAS_BUDGET)
    }
}

fn validator() -> &'static jsonschema::Validator {
    static VALIDATOR: OnceLock<jsonschema::Validator> = OnceLock::new();
    VALIDATOR.get_or_init(|| {
        let schema: Value = serde_json::from_str(SCHEMA).expect("shipped schema is valid JSON");
        jsonschema::validator_for(&schema).expect("shipped schema compiles")
    })
}

/// Top-level field named by a JSON pointer such as `/family/0/ratio`.
fn top_field(pointer: &str) -> Option<&str> {
    pointer.trim_start_matches('/').split('/').next().filter(|s| !s.is_empty())
}

pub fn parse_config(text: &str) -> Result<Experiment, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::new("config", format!("not valid JSON: {e}")))?;
    if let Some(err) = validator().iter_errors(&value).next() {
        let pointer = err.instance_path().as_str().to_string();
        let message = err.to_string();
        // missing or unexpected properties are reported at the root, so the
        // field comes from the error itself
        let field = match (top_field(&pointer), err.kind()) {
            (Some(f), _) => f.to_string(),
            (None, ValidationErrorKind::AdditionalProperties { unexpected }) => {
                unexpected.first().cloned().unwrap_or_else(|| "config".into())
            }
            (None, ValidationErrorKind::Required { property }) => {
                property.as_str().unwrap_or("config").to_string()
            }
            (None, _) => "config".to_string(),
        };
        let at = if pointer.is_empty() { String::new() } else { format!(" (at {pointer})") };
        return Err(ConfigError::new(&field, format!("{message}{at}")));
    }
    let config: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| ConfigError::new("config", e.to_string()))?;
    check(config)
}

fn strictly_increasing<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn check(config: ExperimentConfig) -> Result<Experiment, ConfigError> {
    let members = config
        .family
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, d)| SequenceVector::try_from(d).map_err(|e| ConfigError::new("family", format!("member {i}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let gamma = members.len();
    if config.p.len() != gamma {
        return Err(ConfigError::new(
            "p",
            format!("expected {gamma} entries (one per family member), found {}", config.p.len()),
        ));
    }
    if config.p.iter().any(|v| !v.is_finite()) {
        return Err(ConfigError::new("p", "entries must be finite"));
    }
    let family = OrthonormalFamily::new(members.clone()).map_err(|e| ConfigError::new("family", e.to_string()))?;
    let integrand =
        Integrand::new(config.k, config.integrand.clone()).map_err(|e| ConfigError::new("integrand", e.to_string()))?;
    if !strictly_increasing(&config.n_schedule) {
        return Err(ConfigError::new("n_schedule", "must be strictly increasing"));
    }
    let smallest = config.n_schedule[0];
    if smallest <= gamma {
        return Err(ConfigError::new("n_schedule", format!("every n must exceed the family size {gamma}")));
    }
    if config.k > smallest {
        return Err(ConfigError::new("k", format!("k = {} exceeds the smallest n = {smallest}", config.k)));
    }
    if let Some(n) = config.n {
        if n <= gamma || n < config.k {
            return Err(ConfigError::new("n", format!("n = {n} must exceed the family size and be at least k")));
        }
    }
    if let Some(b) = config.bias_budget {
        if !b.is_finite() {
            return Err(ConfigError::new("bias_budget", "must be finite"));
        }
    }
    if let Some(t) = &config.thresholds {
        if !strictly_increasing(t) || t.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::new("thresholds", "must be finite and strictly increasing"));
        }
    }
    if let Some(base) = &config.base {
        let dim = base[0].len();
        if base.iter().any(|v| v.len() != dim) {
            return Err(ConfigError::new("base", "vectors must share one length"));
        }
        if let Some(d) = &config.directions {
            if d.len() != base.len() || d.iter().any(|v| v.len() != dim) {
                return Err(ConfigError::new("directions", "need one direction per base vector, of the same length"));
            }
        }
    } else if config.directions.is_some() {
        return Err(ConfigError::new("directions", "only allowed together with an explicit base"));
    }
    Ok(Experiment {
        config,
        members,
        family,
        integrand,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "family": [{"kind": "explicit", "coords": [0.6, 0.8]}],
        "p": [1.0],
        "k": 2,
        "integrand": {"kind": "cos_linear", "a": [1.0, 0.0], "b": 0.0},
        "n_schedule": [64, 256],
        "samples": 1000,
        "seed": 1,
        "output": "out.csv"
    }"#;

    fn with(edit: impl FnOnce(&mut Value)) -> String {
        let mut v: Value = serde_json::from_str(GOOD).unwrap();
        edit(&mut v);
        v.to_string()
    }

    #[test]
    fn accepts_good_config() {
        let e = parse_config(GOOD).unwrap();
        assert_eq!(e.n(), 256);
        assert_eq!(e.family.gamma(), 1);
        assert_eq!(e.bias_budget(), DEFAULT_BIAS_BUDGET);
    }

    #[test]
    fn p_length_mismatch_names_p() {
        let err = parse_config(&with(|v| v["p"] = serde_json::json!([1.0, 2.0]))).unwrap_err();
        assert_eq!(err.field, "p");
    }

    #[test]
    fn schema_errors_name_the_field() {
        let err = parse_config(&with(|v| v["samples"] = serde_json::json!(10))).unwrap_err();
        assert_eq!(err.field, "samples");
        let err = parse_config(&with(|v| {
            v.as_object_mut().unwrap().remove("seed");
        }))
        .unwrap_err();
        assert_eq!(err.field, "seed");
        let err = parse_config(&with(|v| v["family"][0]["kind"] = serde_json::json!("weird"))).unwrap_err();
        assert_eq!(err.field, "family");
        let err = parse_config(&with(|v| v["extra"] = serde_json::json!(1))).unwrap_err();
        assert_eq!(err.field, "extra");
        let err = parse_config("{").unwrap_err();
        assert_eq!(err.field, "config");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let err = parse_config(&with(|v| v["family"][0]["coords"] = serde_json::json!([0.6, 0.6]))).unwrap_err();
        assert_eq!(err.field, "family");
        let err = parse_config(&with(|v| v["integrand"]["a"] = serde_json::json!([1.0]))).unwrap_err();
        assert_eq!(err.field, "integrand");
        let err = parse_config(&with(|v| v["n_schedule"] = serde_json::json!([256, 64]))).unwrap_err();
        assert_eq!(err.field, "n_schedule");
        let err = parse_config(&with(|v| v["thresholds"] = serde_json::json!([3.0, 2.0]))).unwrap_err();
        assert_eq!(err.field, "thresholds");
        let err = parse_config(&with(|v| v["k"] = serde_json::json!(100))).unwrap_err();
        assert_eq!(err.field, "integrand");
    }

    #[test]
    fn geometric_members_parse() {
        let text = with(|v| {
            v["family"] = serde_json::json!([{"kind": "geometric", "scale": 3f64.sqrt(), "ratio": 0.5}]);
            v["p"] = serde_json::json!([0.0]);
        });
        let e = parse_config(&text).unwrap();
        assert!((e.members[0].norm_sq() - 1.0).abs() < 1e-12);
    }
}
