//! Validated model parameters and compartment states.
//!
//! Every parameter set passes through [`validate_params`] before it reaches a
//! vector field, so downstream code can rely on the standing assumptions
//! (`beta1 > beta2 > 0`, `kappa` in `(0, 1]`, and so on) without rechecking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which system a parameter set or state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Two susceptible classes with fixed membership.
    Ma,
    /// Susceptibles and asymptomatics switch class at rates alpha1, alpha2.
    Mb,
    /// `Ma` restricted to a single susceptible class (rho = 1, S2 = 0).
    Single,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ma => "ma",
            ModelKind::Mb => "mb",
            ModelKind::Single => "single",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ma" => Ok(ModelKind::Ma),
            "mb" => Ok(ModelKind::Mb),
            "single" => Ok(ModelKind::Single),
            other => Err(Error::range("model", format!("unknown model `{other}`"))),
        }
    }
}

/// How the asymptomatic class-switching terms of `Mb` are scaled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionNormalization {
    /// `alpha * A` for asymptomatics, `alpha * S / N` for susceptibles.
    #[default]
    #[serde(rename = "as-printed")]
    AsPrinted,
    /// `alpha * X / N` for both.
    #[serde(rename = "uniform-per-capita")]
    UniformPerCapita,
}

/// Switches that loosen the standing parameter assumptions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Relaxations {
    /// Admit beta1 > 1 and beta2 >= 1. Feasibility classification is
    /// unavailable for such parameter sets.
    pub allow_beta_gt_one: bool,
    /// Admit alpha2 = 0 for `Mb` (used by the mitigation presets).
    pub allow_zero_alpha2: bool,
}

/// Unvalidated parameter mapping, as read from a config file or CLI flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition_normalization: Option<TransitionNormalization>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub allow_beta_gt_one: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub allow_zero_alpha2: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Behaviour-switching rates of `Mb`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switching {
    pub alpha1: f64,
    pub alpha2: f64,
}

/// A validated parameter vector. Fields are private so the invariants
/// established by [`validate_params`] cannot be broken afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    model: ModelKind,
    beta1: f64,
    beta2: f64,
    lambda: f64,
    gamma: f64,
    kappa: f64,
    switching: Option<Switching>,
    rho: f64,
    n: f64,
    normalization: TransitionNormalization,
    relax: Relaxations,
}

impl Params {
    pub fn model(&self) -> ModelKind {
        self.model
    }
    pub fn beta1(&self) -> f64 {
        self.beta1
    }
    pub fn beta2(&self) -> f64 {
        self.beta2
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn switching(&self) -> Option<Switching> {
        self.switching
    }
    /// For `Mb` this is always `alpha2 / (alpha1 + alpha2)`.
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn n(&self) -> f64 {
        self.n
    }
    pub fn normalization(&self) -> TransitionNormalization {
        self.normalization
    }
    pub fn relaxations(&self) -> Relaxations {
        self.relax
    }

    /// Mixed infection rate `rho*beta1 + (1-rho)*beta2`.
    pub fn b_rho(&self) -> f64 {
        self.rho * self.beta1 + (1.0 - self.rho) * self.beta2
    }

    pub fn to_raw(&self) -> RawParams {
        let (alpha1, alpha2) = match self.switching {
            Some(s) => (Some(s.alpha1), Some(s.alpha2)),
            None => (None, None),
        };
        RawParams {
            beta1: Some(self.beta1),
            beta2: match self.model {
                ModelKind::Single if self.beta2 == 0.0 => None,
                _ => Some(self.beta2),
            },
            lambda: Some(self.lambda),
            gamma: Some(self.gamma),
            kappa: Some(self.kappa),
            alpha1,
            alpha2,
            rho: match self.model {
                ModelKind::Ma => Some(self.rho),
                _ => None,
            },
            n: Some(self.n),
            transition_normalization: match self.normalization {
                TransitionNormalization::AsPrinted => None,
                other => Some(other),
            },
            allow_beta_gt_one: self.relax.allow_beta_gt_one,
            allow_zero_alpha2: self.relax.allow_zero_alpha2,
        }
    }

    /// Re-validate with one field replaced. Used by parameter sweeps.
    pub fn with(&self, edit: impl FnOnce(&mut RawParams)) -> Result<Params> {
        let mut raw = self.to_raw();
        edit(&mut raw);
        validate_params(&raw, self.model)
    }

    /// Like [`Params::with`] but revalidates against another model.
    pub fn with_model(&self, model: ModelKind, edit: impl FnOnce(&mut RawParams)) -> Result<Params> {
        let mut raw = self.to_raw();
        edit(&mut raw);
        validate_params(&raw, model)
    }

    /// The single-class variant used before a mixed-model switch: all
    /// susceptibles behave as class 1.
    pub fn single_phase(&self) -> Params {
        Params {
            model: ModelKind::Single,
            rho: 1.0,
            switching: None,
            ..*self
        }
    }
}

fn require(value: Option<f64>, field: &str) -> Result<f64> {
    let v = value.ok_or_else(|| Error::RejectMissing(field.to_string()))?;
    if !v.is_finite() {
        return Err(Error::range(field, format!("{v} is not finite")));
    }
    Ok(v)
}

fn check(ok: bool, field: &str, value: f64, interval: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::range(field, format!("{value} not in {interval}")))
    }
}

/// Check a raw parameter mapping against the standing assumptions of `model`.
///
/// For `Mb` the susceptible split is derived from the switching rates and
/// must not be supplied. For `Single` it is fixed at 1 and `beta2` is
/// optional (it never enters the dynamics).
pub fn validate_params(raw: &RawParams, model: ModelKind) -> Result<Params> {
    let relax = Relaxations {
        allow_beta_gt_one: raw.allow_beta_gt_one,
        allow_zero_alpha2: raw.allow_zero_alpha2,
    };

    let beta1 = require(raw.beta1, "beta1")?;
    let beta2 = match (model, raw.beta2) {
        (ModelKind::Single, None) => 0.0,
        _ => require(raw.beta2, "beta2")?,
    };
    let lambda = require(raw.lambda, "lambda")?;
    let gamma = require(raw.gamma, "gamma")?;
    let kappa = require(raw.kappa, "kappa")?;
    let n = require(raw.n, "n")?;

    let switching = match model {
        ModelKind::Mb => Some(Switching {
            alpha1: require(raw.alpha1, "alpha1")?,
            alpha2: require(raw.alpha2, "alpha2")?,
        }),
        _ => {
            if raw.alpha1.is_some() {
                return Err(Error::range("alpha1", format!("not a parameter of model {}", model.name())));
            }
            if raw.alpha2.is_some() {
                return Err(Error::range("alpha2", format!("not a parameter of model {}", model.name())));
            }
            None
        }
    };

    let rho = match model {
        ModelKind::Ma => {
            let rho = require(raw.rho, "rho")?;
            check(rho > 0.0 && rho < 1.0, "rho", rho, "(0, 1)")?;
            rho
        }
        ModelKind::Mb => {
            if raw.rho.is_some() {
                return Err(Error::range("rho", "derived from alpha1 and alpha2 for model mb; do not set it"));
            }
            0.0 // replaced below
        }
        ModelKind::Single => {
            if let Some(r) = raw.rho {
                check(r == 1.0, "rho", r, "{1}")?;
            }
            1.0
        }
    };

    if relax.allow_beta_gt_one {
        check(beta1 > 0.0, "beta1", beta1, "(0, inf)")?;
    } else {
        check(beta1 > 0.0 && beta1 <= 1.0, "beta1", beta1, "(0, 1]")?;
    }
    let beta2_optional = model == ModelKind::Single && raw.beta2.is_none();
    if !beta2_optional {
        if relax.allow_beta_gt_one {
            check(beta2 > 0.0, "beta2", beta2, "(0, inf)")?;
        } else {
            check(beta2 > 0.0 && beta2 < 1.0, "beta2", beta2, "(0, 1)")?;
        }
    }
    check(lambda > 0.0 && lambda <= 1.0, "lambda", lambda, "(0, 1]")?;
    check(gamma >= 0.0, "gamma", gamma, "[0, inf)")?;
    check(kappa > 0.0 && kappa <= 1.0, "kappa", kappa, "(0, 1]")?;
    check(n > 0.0, "n", n, "(0, inf)")?;

    if !beta2_optional && beta1 <= beta2 {
        return Err(Error::RejectOrder(format!(
            "beta1 ({beta1}) must exceed beta2 ({beta2})"
        )));
    }

    let mut params = Params {
        model,
        beta1,
        beta2,
        lambda,
        gamma,
        kappa,
        switching,
        rho,
        n,
        normalization: raw.transition_normalization.unwrap_or_default(),
        relax,
    };

    if let Some(Switching { alpha1, alpha2 }) = switching {
        if relax.allow_zero_alpha2 {
            check(alpha2 >= 0.0, "alpha2", alpha2, "[0, inf)")?;
        } else {
            check(alpha2 > 0.0, "alpha2", alpha2, "(0, inf)")?;
        }
        if alpha1 <= alpha2 {
            return Err(Error::RejectOrder(format!(
                "alpha1 ({alpha1}) must exceed alpha2 ({alpha2})"
            )));
        }
        params.rho = alpha2 / (alpha1 + alpha2);
    }

    Ok(params)
}

/// Compartments of `Ma` (and `Single`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateMa {
    #[serde(rename = "S1")]
    pub s1: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    #[serde(rename = "Is")]
    pub is: f64,
    #[serde(rename = "Ia")]
    pub ia: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl StateMa {
    pub fn new(s1: f64, s2: f64, is: f64, ia: f64, r: f64) -> Self {
        StateMa { s1, s2, is, ia, r }
    }

    pub fn infected(&self) -> f64 {
        self.ia + self.is
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.s1, self.s2, self.is, self.ia, self.r]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        StateMa::new(a[0], a[1], a[2], a[3], a[4])
    }
}

/// Compartments of `Mb`. Total and asymptomatic infectives are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateMb {
    #[serde(rename = "S1")]
    pub s1: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "Is")]
    pub is: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl StateMb {
    pub fn new(s1: f64, s2: f64, a1: f64, a2: f64, is: f64, r: f64) -> Self {
        StateMb { s1, s2, a1, a2, is, r }
    }

    pub fn asymptomatic(&self) -> f64 {
        self.a1 + self.a2
    }

    pub fn infected(&self) -> f64 {
        self.a1 + self.a2 + self.is
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.s1, self.s2, self.a1, self.a2, self.is, self.r]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        StateMb::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }
}

/// A state of either system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum State {
    Ma(StateMa),
    Mb(StateMb),
}

impl State {
    pub fn components(&self) -> Vec<f64> {
        match self {
            State::Ma(s) => s.to_array().to_vec(),
            State::Mb(s) => s.to_array().to_vec(),
        }
    }

    pub fn infected(&self) -> f64 {
        match self {
            State::Ma(s) => s.infected(),
            State::Mb(s) => s.infected(),
        }
    }

    pub fn symptomatic(&self) -> f64 {
        match self {
            State::Ma(s) => s.is,
            State::Mb(s) => s.is,
        }
    }

    pub fn recovered(&self) -> f64 {
        match self {
            State::Ma(s) => s.r,
            State::Mb(s) => s.r,
        }
    }

    pub fn susceptible(&self) -> (f64, f64) {
        match self {
            State::Ma(s) => (s.s1, s.s2),
            State::Mb(s) => (s.s1, s.s2),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }
}

impl From<StateMa> for State {
    fn from(s: StateMa) -> Self {
        State::Ma(s)
    }
}

impl From<StateMb> for State {
    fn from(s: StateMb) -> Self {
        State::Mb(s)
    }
}

/// Sum of all compartments.
pub fn total_population(state: &State) -> f64 {
    state.components().iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn raw_ma() -> RawParams {
        RawParams {
            beta1: Some(0.0042),
            beta2: Some(0.0009),
            lambda: Some(0.65),
            gamma: Some(0.005),
            kappa: Some(0.0006),
            rho: Some(0.75),
            n: Some(100.0),
            ..Default::default()
        }
    }

    fn raw_mb() -> RawParams {
        RawParams {
            rho: None,
            alpha1: Some(0.001),
            alpha2: Some(0.0001),
            ..raw_ma()
        }
    }

    #[test]
    fn accepts_figure_parameters() {
        let p = validate_params(&raw_ma(), ModelKind::Ma).unwrap();
        assert_eq!(p.beta1(), 0.0042);
        assert_eq!(p.rho(), 0.75);
        assert_eq!(p.n(), 100.0);
    }

    #[test]
    fn rejects_swapped_betas() {
        let raw = RawParams {
            beta1: Some(0.0009),
            beta2: Some(0.0042),
            ..raw_ma()
        };
        assert!(matches!(
            validate_params(&raw, ModelKind::Ma),
            Err(Error::RejectOrder(_))
        ));
    }

    #[test]
    fn mb_rho_is_derived() {
        let p = validate_params(&raw_mb(), ModelKind::Mb).unwrap();
        assert!((p.rho() - 1.0 / 11.0).abs() < 1e-15);
        assert!((p.rho() - 0.0909091).abs() < 1e-7);
    }

    #[test]
    fn mb_rejects_explicit_rho_and_bad_alpha_order() {
        let raw = RawParams {
            rho: Some(0.1),
            ..raw_mb()
        };
        assert!(matches!(
            validate_params(&raw, ModelKind::Mb),
            Err(Error::RejectRange { .. })
        ));
        let raw = RawParams {
            alpha2: Some(0.001),
            ..raw_mb()
        };
        assert!(matches!(
            validate_params(&raw, ModelKind::Mb),
            Err(Error::RejectOrder(_))
        ));
    }

    #[test]
    fn missing_and_range_errors() {
        let raw = RawParams {
            kappa: None,
            ..raw_ma()
        };
        assert_eq!(
            validate_params(&raw, ModelKind::Ma),
            Err(Error::RejectMissing("kappa".into()))
        );
        for (edit, field) in [
            (RawParams { kappa: Some(1.5), ..raw_ma() }, "kappa"),
            (RawParams { kappa: Some(0.0), ..raw_ma() }, "kappa"),
            (RawParams { lambda: Some(0.0), ..raw_ma() }, "lambda"),
            (RawParams { gamma: Some(-1.0), ..raw_ma() }, "gamma"),
            (RawParams { rho: Some(1.0), ..raw_ma() }, "rho"),
            (RawParams { n: Some(0.0), ..raw_ma() }, "n"),
            (RawParams { beta1: Some(1.2), ..raw_ma() }, "beta1"),
            (RawParams { beta1: Some(f64::NAN), ..raw_ma() }, "beta1"),
        ] {
            match validate_params(&edit, ModelKind::Ma) {
                Err(Error::RejectRange { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected range error on {field}, got {other:?}"),
            }
        }
    }

    #[test]
    fn beta_bound_relaxation() {
        let raw = RawParams {
            beta1: Some(2.0),
            beta2: Some(1.5),
            allow_beta_gt_one: true,
            ..raw_ma()
        };
        let p = validate_params(&raw, ModelKind::Ma).unwrap();
        assert!(p.relaxations().allow_beta_gt_one);
    }

    #[test]
    fn zero_alpha2_needs_relaxation() {
        let raw = RawParams {
            alpha2: Some(0.0),
            ..raw_mb()
        };
        assert!(validate_params(&raw, ModelKind::Mb).is_err());
        let raw = RawParams {
            allow_zero_alpha2: true,
            ..raw
        };
        let p = validate_params(&raw, ModelKind::Mb).unwrap();
        assert_eq!(p.rho(), 0.0);
    }

    #[test]
    fn single_fixes_rho_and_drops_beta2() {
        let raw = RawParams {
            beta2: None,
            rho: None,
            ..raw_ma()
        };
        let p = validate_params(&raw, ModelKind::Single).unwrap();
        assert_eq!(p.rho(), 1.0);
        assert_eq!(validate_params(&p.to_raw(), ModelKind::Single).unwrap(), p);
    }

    #[test]
    fn validation_is_idempotent() {
        for (raw, model) in [(raw_ma(), ModelKind::Ma), (raw_mb(), ModelKind::Mb)] {
            let p = validate_params(&raw, model).unwrap();
            assert_eq!(validate_params(&p.to_raw(), model).unwrap(), p);
        }
    }

    #[test]
    fn population_totals() {
        let s = State::Ma(StateMa::new(74.25, 24.75, 1.0, 0.0, 0.0));
        assert_eq!(total_population(&s), 100.0);
        assert_eq!(total_population(&State::Ma(StateMa::new(0.0, 0.0, 0.0, 0.0, 0.0))), 0.0);
        let s = State::Ma(StateMa::new(50.0, 30.0, 5.0, 5.0, 10.0));
        assert_eq!(total_population(&s), 100.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn mb_rho_below_half(a2 in 1e-6f64..0.5, ratio in 1.0001f64..100.0) {
                let raw = RawParams { alpha1: Some(a2 * ratio), alpha2: Some(a2), ..raw_mb() };
                let p = validate_params(&raw, ModelKind::Mb).unwrap();
                prop_assert!(p.rho() > 0.0 && p.rho() < 0.5);
            }
        }
    }
}
