//! Line charts of trajectories as standalone SVG, built from `line`,
//! `polyline` and `text` elements only.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::integrator::{Observable, Trajectory};
use crate::io::csv::format_sig;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 120.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 44.0;
const TICKS: usize = 5;

pub fn render_svg(traj: &Trajectory, observables: &[Observable], width: f64, height: f64) -> Result<String> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if observables.is_empty() {
        return Err(Error::range("observables", "at least one is required"));
    }
    let plot_w = width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = height - MARGIN_TOP - MARGIN_BOTTOM;
    if !(width.is_finite() && height.is_finite() && plot_w > 0.0 && plot_h > 0.0) {
        return Err(Error::InvalidDimensions { width, height });
    }

    let series: Vec<Vec<f64>> = observables.iter().map(|&o| traj.series(o)).collect();
    let (t_min, t_max) = (traj.times[0], traj.times[traj.len() - 1]);
    let y_min = series.iter().flatten().copied().fold(0.0, f64::min);
    let mut y_max = series.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let t_span = if t_max > t_min { t_max - t_min } else { 1.0 };

    let x_of = |t: f64| MARGIN_LEFT + (t - t_min) / t_span * plot_w;
    let y_of = |v: f64| MARGIN_TOP + (y_max - v) / (y_max - y_min) * plot_h;
    let (x0, x1) = (MARGIN_LEFT, MARGIN_LEFT + plot_w);
    let (y_top, y_bottom) = (MARGIN_TOP, MARGIN_TOP + plot_h);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        width, height, width, height
    )
    .unwrap();
    writeln!(out, r#"<g font-family="sans-serif" font-size="11" fill="black">"#).unwrap();

    writeln!(out, r#"<line x1="{x0:.2}" y1="{y_bottom:.2}" x2="{x1:.2}" y2="{y_bottom:.2}" stroke="black"/>"#).unwrap();
    writeln!(out, r#"<line x1="{x0:.2}" y1="{y_top:.2}" x2="{x0:.2}" y2="{y_bottom:.2}" stroke="black"/>"#).unwrap();
    for k in 0..=TICKS {
        let frac = k as f64 / TICKS as f64;
        let t = t_min + frac * t_span;
        let x = x_of(t);
        writeln!(out, r#"<line x1="{x:.2}" y1="{y_bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y_bottom + 4.0).unwrap();
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y_bottom + 16.0,
            format_sig(t, 4)
        )
        .unwrap();
        let v = y_min + frac * (y_max - y_min);
        let y = y_of(v);
        writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 4.0).unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            format_sig(v, 4)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        x0 + plot_w / 2.0,
        height - 8.0
    )
    .unwrap();

    for (i, (obs, values)) in observables.iter().zip(&series).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = traj
            .times
            .iter()
            .zip(values)
            .map(|(&t, &v)| format!("{:.2},{:.2}", x_of(t), y_of(v)))
            .collect();
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        )
        .unwrap();

        let ly = y_top + 14.0 * i as f64 + 6.0;
        let lx = x1 + 12.0;
        writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        )
        .unwrap();
        writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 24.0, ly + 4.0, obs.name()).unwrap();
    }

    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::simulate;
    use crate::params::{validate_params, ModelKind, RawParams, State, StateMa};

    fn traj(t1: f64, record_every: usize) -> Trajectory {
        let raw = RawParams {
            beta1: Some(0.0042),
            beta2: Some(0.0009),
            lambda: Some(0.65),
            gamma: Some(0.005),
            kappa: Some(0.00006),
            rho: Some(0.75),
            n: Some(100.0),
            ..Default::default()
        };
        let p = validate_params(&raw, ModelKind::Ma).unwrap();
        let init = State::Ma(StateMa::new(74.25, 24.75, 1.0, 0.0, 0.0));
        simulate(ModelKind::Ma, &p, init, 0.0, t1, 1.0, record_every).unwrap()
    }

    #[test]
    fn two_points_one_polyline() {
        let svg = render_svg(&traj(1.0, 1), &[Observable::I], 400.0, 300.0).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split(' ').count(), 2);
        assert!(svg.contains(">I</text>"));
    }

    #[test]
    fn four_observables_four_polylines() {
        let obs = [Observable::S1, Observable::S2, Observable::I, Observable::R];
        let t = traj(5000.0, 50);
        let svg = render_svg(&t, &obs, 800.0, 500.0).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
        for o in obs {
            assert!(svg.contains(&format!(">{}</text>", o.name())));
        }
        assert_eq!(svg, render_svg(&t, &obs, 800.0, 500.0).unwrap());
        for tag in ["<rect", "<circle", "<path"] {
            assert!(!svg.contains(tag));
        }
    }

    #[test]
    fn bad_inputs() {
        let t = traj(10.0, 1);
        assert!(matches!(render_svg(&t, &[Observable::I], 0.0, 0.0), Err(Error::InvalidDimensions { .. })));
        assert!(render_svg(&t, &[], 400.0, 300.0).is_err());
        let mut empty = t.clone();
        empty.times.clear();
        empty.states.clear();
        assert_eq!(render_svg(&empty, &[Observable::I], 400.0, 300.0), Err(Error::EmptyTrajectory));
    }
}
