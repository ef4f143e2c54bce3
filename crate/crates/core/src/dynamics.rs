//! Right-hand sides of the two systems.
//!
//! Infectives `I` are always recomputed from the compartments.

use crate::error::{Error, Result};
use crate::params::{Params, StateMa, StateMb, TransitionNormalization};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivMa {
    pub ds1: f64,
    pub ds2: f64,
    pub dis: f64,
    pub dia: f64,
    pub dr: f64,
}

impl DerivMa {
    pub fn to_array(self) -> [f64; 5] {
        [self.ds1, self.ds2, self.dis, self.dia, self.dr]
    }

    pub fn sum(&self) -> f64 {
        self.to_array().iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivMb {
    pub ds1: f64,
    pub ds2: f64,
    pub da1: f64,
    pub da2: f64,
    pub dis: f64,
    pub dr: f64,
}

impl DerivMb {
    pub fn to_array(self) -> [f64; 6] {
        [self.ds1, self.ds2, self.da1, self.da2, self.dis, self.dr]
    }

    pub fn sum(&self) -> f64 {
        self.to_array().iter().sum()
    }
}

fn ensure_finite(values: &[f64], context: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            context: context.to_string(),
        })
    }
}

pub fn rhs_ma(p: &Params, s: &StateMa) -> Result<DerivMa> {
    ensure_finite(&s.to_array(), "rhs_ma state")?;
    let n = p.n();
    let infected = s.ia + s.is;
    let force1 = p.beta1() * s.s1 / n * infected;
    let force2 = p.beta2() * s.s2 / n * infected;
    let incidence = force1 + force2;

    let d = DerivMa {
        ds1: -force1,
        ds2: -force2,
        dis: p.lambda() * incidence + p.gamma() * s.ia - p.kappa() * s.is,
        dia: (1.0 - p.lambda()) * incidence - (p.gamma() + p.kappa()) * s.ia,
        dr: p.kappa() * infected,
    };
    ensure_finite(&d.to_array(), "rhs_ma output")?;
    Ok(d)
}

/// `Mb` vector field. Susceptible switching is always per capita
/// (`alpha * S / N`); asymptomatic switching follows
/// [`Params::normalization`].
///
/// # Panics
///
/// If `p` carries no switching rates (i.e. was not validated as `Mb`).
pub fn rhs_mb(p: &Params, s: &StateMb) -> Result<DerivMb> {
    ensure_finite(&s.to_array(), "rhs_mb state")?;
    let sw = p
        .switching()
        .expect("rhs_mb requires parameters validated for model mb");
    let n = p.n();
    let infected = s.infected();
    let asym = s.asymptomatic();

    let force1 = p.beta1() * infected * s.s1 / n;
    let force2 = p.beta2() * infected * s.s2 / n;
    let move_s12 = sw.alpha1 * s.s1 / n;
    let move_s21 = sw.alpha2 * s.s2 / n;
    let a_scale = match p.normalization() {
        TransitionNormalization::AsPrinted => 1.0,
        TransitionNormalization::UniformPerCapita => 1.0 / n,
    };
    let move_a12 = sw.alpha1 * s.a1 * a_scale;
    let move_a21 = sw.alpha2 * s.a2 * a_scale;
    let gk = p.gamma() + p.kappa();

    let d = DerivMb {
        ds1: move_s21 - move_s12 - force1,
        ds2: move_s12 - move_s21 - force2,
        da1: (1.0 - p.lambda()) * force1 + move_a21 - move_a12 - gk * s.a1,
        da2: (1.0 - p.lambda()) * force2 + move_a12 - move_a21 - gk * s.a2,
        dis: p.lambda() * (force1 + force2) + p.gamma() * asym - p.kappa() * s.is,
        dr: p.kappa() * infected,
    };
    ensure_finite(&d.to_array(), "rhs_mb output")?;
    Ok(d)
}
