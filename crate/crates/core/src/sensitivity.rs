//! Normalized forward sensitivity indices of `R0`, `(p / R0) dR0/dp`.
//!
//! With `R0 * kappa = rho*beta1 + (1-rho)*beta2` each of the three indices for
//! `rho`, `beta1`, `beta2` has the form `1 - f / (R0 kappa)` with
//! `f = beta2`, `(1-rho) beta2` and `rho beta1` respectively, so their order
//! is decided by comparing those three numerators. The switching rates of
//! `Mb` enter only through `rho = alpha2 / (alpha1 + alpha2)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::ngm::r0;
use crate::params::{ModelKind, Params};

/// Ties closer than this (in `rho`) to a case breakpoint are `Boundary`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityIndices {
    pub model: ModelKind,
    pub upsilon_rho: f64,
    pub upsilon_beta1: f64,
    pub upsilon_beta2: f64,
    pub upsilon_alpha1: Option<f64>,
    pub upsilon_alpha2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexName {
    Rho,
    Beta1,
    Beta2,
    Alpha1,
    Alpha2,
}

impl IndexName {
    pub fn name(self) -> &'static str {
        match self {
            IndexName::Rho => "rho",
            IndexName::Beta1 => "beta1",
            IndexName::Beta2 => "beta2",
            IndexName::Alpha1 => "alpha1",
            IndexName::Alpha2 => "alpha2",
        }
    }
}

impl fmt::Display for IndexName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl SensitivityIndices {
    pub fn get(&self, name: IndexName) -> Option<f64> {
        match name {
            IndexName::Rho => Some(self.upsilon_rho),
            IndexName::Beta1 => Some(self.upsilon_beta1),
            IndexName::Beta2 => Some(self.upsilon_beta2),
            IndexName::Alpha1 => self.upsilon_alpha1,
            IndexName::Alpha2 => self.upsilon_alpha2,
        }
    }

    pub fn entries(&self) -> Vec<(IndexName, f64)> {
        [
            IndexName::Rho,
            IndexName::Beta1,
            IndexName::Beta2,
            IndexName::Alpha1,
            IndexName::Alpha2,
        ]
        .into_iter()
        .filter_map(|n| self.get(n).map(|v| (n, v)))
        .collect()
    }

    /// Index names in increasing order of value.
    pub fn sorted_names(&self) -> Vec<IndexName> {
        let mut e = self.entries();
        e.sort_by(|a, b| a.1.total_cmp(&b.1));
        e.into_iter().map(|(n, _)| n).collect()
    }
}

/// Closed forms from raw values; `with_alphas` adds the switching-rate
/// indices. No ordering of the betas is assumed.
pub fn indices_from(beta1: f64, beta2: f64, rho: f64, kappa: f64, with_alphas: bool) -> SensitivityIndices {
    let r0k = r0(beta1, beta2, rho, kappa) * kappa;
    let switching = rho * (1.0 - rho) * (beta1 - beta2) / r0k;
    SensitivityIndices {
        model: if with_alphas { ModelKind::Mb } else { ModelKind::Ma },
        upsilon_rho: 1.0 - beta2 / r0k,
        upsilon_beta1: 1.0 - (1.0 - rho) * beta2 / r0k,
        upsilon_beta2: 1.0 - rho * beta1 / r0k,
        upsilon_alpha1: with_alphas.then_some(-switching),
        upsilon_alpha2: with_alphas.then_some(switching),
    }
}

pub fn sensitivity_indices(model: ModelKind, p: &Params) -> SensitivityIndices {
    let mut idx = indices_from(p.beta1(), p.beta2(), p.rho(), p.kappa(), model == ModelKind::Mb);
    idx.model = model;
    idx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseLabel {
    A,
    B,
    C,
    D,
    Boundary,
}

impl CaseLabel {
    pub fn name(self) -> &'static str {
        match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
            CaseLabel::C => "C",
            CaseLabel::D => "D",
            CaseLabel::Boundary => "BOUNDARY",
        }
    }
}

/// The split values at which the ordering changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseThresholds {
    /// `beta2 / (beta1 + beta2)`: beta1 and beta2 indices swap.
    pub sum: f64,
    /// `beta2 / beta1`: rho and beta2 indices swap.
    pub ratio: f64,
    /// `beta2 / (beta1 - beta2)`: alpha2 and beta2 indices swap (`Mb` only).
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCase {
    pub label: CaseLabel,
    /// Index names from least to most sensitive.
    pub chain: Vec<IndexName>,
    pub thresholds: CaseThresholds,
}

pub fn case_thresholds(model: ModelKind, beta1: f64, beta2: f64) -> CaseThresholds {
    CaseThresholds {
        sum: beta2 / (beta1 + beta2),
        ratio: beta2 / beta1,
        difference: (model == ModelKind::Mb).then(|| beta2 / (beta1 - beta2)),
    }
}

fn chain_for(model: ModelKind, label: CaseLabel) -> Option<Vec<IndexName>> {
    use IndexName::*;
    let base = match label {
        CaseLabel::A => vec![Rho, Beta1, Beta2],
        CaseLabel::B => vec![Rho, Beta2, Beta1],
        CaseLabel::C => vec![Beta2, Rho, Beta1],
        CaseLabel::D => vec![Alpha1, Beta2, Alpha2, Rho, Beta1],
        CaseLabel::Boundary => return None,
    };
    Some(match (model, label) {
        (ModelKind::Mb, CaseLabel::D) => base,
        (ModelKind::Mb, _) => [vec![Alpha1, Alpha2], base].concat(),
        (_, _) => base,
    })
}

/// Which ordering of the indices holds for `p`.
pub fn ordering_case(model: ModelKind, p: &Params) -> OrderingCase {
    let th = case_thresholds(model, p.beta1(), p.beta2());
    let rho = p.rho();
    let mut cuts = vec![th.sum, th.ratio];
    cuts.extend(th.difference);

    let label = if cuts.iter().any(|c| (rho - c).abs() <= BOUNDARY_TOLERANCE) {
        CaseLabel::Boundary
    } else if rho < th.sum {
        CaseLabel::A
    } else if rho < th.ratio {
        CaseLabel::B
    } else if th.difference.map_or(true, |d| rho < d) {
        CaseLabel::C
    } else {
        CaseLabel::D
    };

    let chain = chain_for(model, label)
        .unwrap_or_else(|| sensitivity_indices(model, p).sorted_names());
    OrderingCase {
        label,
        chain,
        thresholds: th,
    }
}

/// Largest relative deviation between the closed-form indices and central
/// differences of `R0` with relative step `h`. For `Mb` the switching-rate
/// indices are differentiated through `rho(alpha1, alpha2)`.
pub fn finite_diff_check(model: ModelKind, p: &Params, h: f64) -> Result<f64> {
    if !(h > 1e-10 && h <= 1e-2) {
        return Err(Error::range("h", format!("{h} not in (1e-10, 1e-2]")));
    }
    let closed = sensitivity_indices(model, p);
    let (b1, b2, rho, k) = (p.beta1(), p.beta2(), p.rho(), p.kappa());
    let base = r0(b1, b2, rho, k);

    let index = |x: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        let (lo, hi) = (x * (1.0 - h), x * (1.0 + h));
        x / base * (f(hi) - f(lo)) / (hi - lo)
    };

    let mut numeric = vec![
        (IndexName::Rho, index(rho, &|v| r0(b1, b2, v, k))),
        (IndexName::Beta1, index(b1, &|v| r0(v, b2, rho, k))),
        (IndexName::Beta2, index(b2, &|v| r0(b1, v, rho, k))),
    ];
    if model == ModelKind::Mb {
        let sw = p.switching().expect("mb parameters carry switching rates");
        let split = |a1: f64, a2: f64| a2 / (a1 + a2);
        numeric.push((
            IndexName::Alpha1,
            index(sw.alpha1, &|v| r0(b1, b2, split(v, sw.alpha2), k)),
        ));
        numeric.push((
            IndexName::Alpha2,
            index(sw.alpha2, &|v| r0(b1, b2, split(sw.alpha1, v), k)),
        ));
    }

    Ok(numeric
        .into_iter()
        .map(|(name, fd)| {
            let exact = closed.get(name).expect("index present for model");
            (fd - exact).abs() / exact.abs()
        })
        .fold(0.0, f64::max))
}
