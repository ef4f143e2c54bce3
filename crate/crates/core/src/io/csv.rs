//! Plain-text tables. Numbers are written like C's `%.9g`.

use std::fmt::Write;

use crate::feasibility::BifurcationScan;
use crate::integrator::Trajectory;
use crate::params::{total_population, ModelKind, State};

pub const MA_HEADER: &str = "t,S1,S2,Ia,Is,R,I,N";
pub const MB_HEADER: &str = "t,S1,S2,A1,A2,Is,R,I,N";

/// `x` with `digits` significant digits, trailing zeros removed, switching
/// to exponent notation when the exponent is below -4 or at least `digits`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");

    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format_sig(*v, 9));
    }
    out.push('\n');
}

pub fn header_for(model: ModelKind) -> &'static str {
    match model {
        ModelKind::Mb => MB_HEADER,
        _ => MA_HEADER,
    }
}

/// One row per recorded state. Switched runs already carry `Mb` states
/// throughout, so they get the `Mb` header.
pub fn write_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (traj.len() + 1));
    out.push_str(header_for(traj.model));
    out.push('\n');
    for (t, state) in traj.iter() {
        let n = total_population(state);
        let row: Vec<f64> = match state {
            State::Ma(s) => vec![t, s.s1, s.s2, s.ia, s.is, s.r, s.infected(), n],
            State::Mb(s) => vec![t, s.s1, s.s2, s.a1, s.a2, s.is, s.r, s.infected(), n],
        };
        push_row(&mut out, &row);
    }
    out
}

/// `axis value,type` rows of a feasibility scan.
pub fn write_bifurcation_csv(scan: &BifurcationScan) -> String {
    let mut out = String::new();
    let axis = match scan.axis {
        crate::feasibility::ScanAxis::Rho => "rho",
        crate::feasibility::ScanAxis::Kappa => "kappa",
    };
    writeln!(out, "{axis},type").unwrap();
    for (x, label) in scan.grid.iter().zip(&scan.labels) {
        writeln!(out, "{},{}", format_sig(*x, 9), label.value()).unwrap();
    }
    out
}
