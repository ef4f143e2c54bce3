//! JSON scenario documents.
//!
//! ```json
//! {
//!   "model": "ma",
//!   "params": { "beta1": 0.0042, "beta2": 0.0009, "lambda": 0.65,
//!               "gamma": 0.005, "kappa": 0.00006, "rho": 0.75, "n": 100 },
//!   "init": "dfe_plus_one_symptomatic",
//!   "time": { "t1": 300000, "dt": 1, "record_every": 100 },
//!   "outputs": ["S1", "S2", "I", "R"]
//! }
//! ```
//!
//! `init` may also be `{"rule": "dfe_plus_one_symptomatic", "split": 0.75}`
//! or an explicit state keyed by compartment (`S1`, `S2`, `Is`, `Ia`, `R` or
//! `S1`, `S2`, `A1`, `A2`, `Is`, `R`). A switched run adds
//! `"mixed": {"t_switch": 1000, "rho_split": 0.25}` to an `mb` document.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::integrator::Observable;
use crate::params::{validate_params, ModelKind, RawParams, State, StateMa, StateMb};
use crate::scenarios::{InitRule, MixedBlock, ScenarioConfig, SplitRule};

const SEEDED_RULE: &str = "dfe_plus_one_symptomatic";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    model: ModelKind,
    params: RawParams,
    #[serde(default)]
    init: Option<Value>,
    time: TimeBlock,
    #[serde(default)]
    mixed: Option<MixedDoc>,
    #[serde(default)]
    outputs: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeBlock {
    #[serde(default)]
    t0: f64,
    t1: f64,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_record_every")]
    record_every: usize,
}

fn default_dt() -> f64 {
    1.0
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixedDoc {
    t_switch: f64,
    rho_split: f64,
    #[serde(default = "default_split_rule")]
    split_rule: String,
}

fn default_split_rule() -> String {
    "proportional".into()
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn parse_init(value: Option<Value>) -> Result<InitRule> {
    let Some(value) = value else {
        return Ok(InitRule::DfePlusOneSymptomatic { split: None });
    };
    match value {
        Value::String(s) if s == SEEDED_RULE => Ok(InitRule::DfePlusOneSymptomatic { split: None }),
        Value::String(s) => Err(parse_error("init", format!("unknown rule `{s}`"))),
        Value::Object(map) if map.contains_key("rule") => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Rule {
                rule: String,
                split: Option<f64>,
            }
            let rule: Rule = serde_json::from_value(Value::Object(map))
                .map_err(|e| parse_error("init", e.to_string()))?;
            if rule.rule != SEEDED_RULE {
                return Err(parse_error("init.rule", format!("unknown rule `{}`", rule.rule)));
            }
            Ok(InitRule::DfePlusOneSymptomatic { split: rule.split })
        }
        Value::Object(map) => {
            let state = if map.contains_key("A1") || map.contains_key("A2") {
                serde_json::from_value::<StateMb>(Value::Object(map)).map(State::Mb)
            } else {
                serde_json::from_value::<StateMa>(Value::Object(map)).map(State::Ma)
            };
            state
                .map(InitRule::Explicit)
                .map_err(|e| parse_error("init", e.to_string()))
        }
        other => Err(parse_error("init", format!("expected a rule or a state, got {other}"))),
    }
}

/// Parse and validate a scenario document.
pub fn load_config(text: &str) -> Result<ScenarioConfig> {
    let doc: Document = serde_json::from_str(text).map_err(|e| {
        parse_error(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;

    if doc.model == ModelKind::Mb && doc.params.rho.is_some() {
        return Err(parse_error("params.rho", "rho is derived from alpha1 and alpha2 for model mb"));
    }
    let params = validate_params(&doc.params, doc.model).map_err(|e| e.at_path("params."))?;
    let init = parse_init(doc.init)?;

    let mixed = doc
        .mixed
        .map(|m| {
            let split_rule = match m.split_rule.as_str() {
                "proportional" => SplitRule::Proportional,
                other => return Err(parse_error("mixed.split_rule", format!("unknown rule `{other}`"))),
            };
            Ok(MixedBlock {
                t_switch: m.t_switch,
                rho_split: m.rho_split,
                split_rule,
            })
        })
        .transpose()?;

    let outputs = doc
        .outputs
        .iter()
        .enumerate()
        .map(|(i, name)| {
            name.parse::<Observable>()
                .map_err(|_| parse_error(format!("outputs[{i}]"), format!("unknown observable `{name}`")))
        })
        .collect::<Result<Vec<_>>>()?;

    let cfg = ScenarioConfig {
        model: doc.model,
        params,
        init,
        t0: doc.time.t0,
        t1: doc.time.t1,
        dt: doc.time.dt,
        record_every: doc.time.record_every,
        mixed,
        outputs,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Pretty-printed document that [`load_config`] maps back to `cfg`.
pub fn write_config(cfg: &ScenarioConfig) -> String {
    let mut doc = Map::new();
    doc.insert("model".into(), json!(cfg.model));
    doc.insert("params".into(), json!(cfg.params.to_raw()));
    let init = match cfg.init {
        InitRule::DfePlusOneSymptomatic { split: None } => json!(SEEDED_RULE),
        InitRule::DfePlusOneSymptomatic { split: Some(s) } => json!({ "rule": SEEDED_RULE, "split": s }),
        InitRule::Explicit(State::Ma(s)) => json!(s),
        InitRule::Explicit(State::Mb(s)) => json!(s),
    };
    doc.insert("init".into(), init);
    doc.insert(
        "time".into(),
        json!(TimeBlock {
            t0: cfg.t0,
            t1: cfg.t1,
            dt: cfg.dt,
            record_every: cfg.record_every,
        }),
    );
    if let Some(m) = cfg.mixed {
        let rule = match m.split_rule {
            SplitRule::Proportional => "proportional",
        };
        doc.insert(
            "mixed".into(),
            json!(MixedDoc {
                t_switch: m.t_switch,
                rho_split: m.rho_split,
                split_rule: rule.into(),
            }),
        );
    }
    if !cfg.outputs.is_empty() {
        let names: Vec<&str> = cfg.outputs.iter().map(|o| o.name()).collect();
        doc.insert("outputs".into(), json!(names));
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("config values serialize");
    text.push('\n');
    text
}
