//! Fixed-step classical Runge–Kutta integration and trajectory recording.

use std::fmt;
use std::str::FromStr;

use crate::dynamics::{rhs_ma, rhs_mb};
use crate::error::{Error, Result};
use crate::params::{total_population, ModelKind, Params, State, StateMa, StateMb};

/// Components may dip this far below zero (relative to the state's total)
/// before a step is rejected.
pub const NEGATIVE_TOLERANCE: f64 = 1e-9;

/// One classical fourth-order Runge–Kutta step of `dy/dt = f(t, y)`.
pub fn step_rk4<const D: usize, F>(f: F, y: &[f64; D], t: f64, dt: f64) -> Result<[f64; D]>
where
    F: Fn(f64, &[f64; D]) -> Result<[f64; D]>,
{
    let shifted = |k: &[f64; D], h: f64| -> [f64; D] {
        let mut out = *y;
        for i in 0..D {
            out[i] += h * k[i];
        }
        out
    };

    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * dt, &shifted(&k1, 0.5 * dt))?;
    let k3 = f(t + 0.5 * dt, &shifted(&k2, 0.5 * dt))?;
    let k4 = f(t + dt, &shifted(&k3, dt))?;

    let mut next = *y;
    for i in 0..D {
        next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("rk4 step at t = {t}"),
        });
    }
    let scale: f64 = y.iter().map(|v| v.abs()).sum();
    if let Some((component, &value)) = next
        .iter()
        .enumerate()
        .find(|(_, &v)| v < -NEGATIVE_TOLERANCE * scale)
    {
        return Err(Error::NegativeState {
            t: t + dt,
            component,
            value,
        });
    }
    Ok(next)
}

/// State right before and right after a mid-run model switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchRecord {
    pub t_switch: f64,
    pub pre: State,
    pub post: State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub model: ModelKind,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub params_used: Params,
    pub dt: f64,
    pub switch_record: Option<SwitchRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> Option<(f64, &State)> {
        self.times.first().copied().zip(self.states.first())
    }

    pub fn last(&self) -> Option<(f64, &State)> {
        self.times.last().copied().zip(self.states.last())
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &State)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// Values of `obs` at every recorded time.
    pub fn series(&self, obs: Observable) -> Vec<f64> {
        self.states.iter().map(|s| obs.extract(s)).collect()
    }

    /// Largest deviation of the total population from `N`.
    pub fn max_conservation_error(&self) -> f64 {
        let n = self.params_used.n();
        self.states
            .iter()
            .map(|s| (total_population(s) - n).abs())
            .fold(0.0, f64::max)
    }
}

/// A scalar read off a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    S1,
    S2,
    /// S1 + S2
    S,
    Ia,
    A1,
    A2,
    /// Asymptomatic total: Ia for `Ma`, A1 + A2 for `Mb`.
    A,
    Is,
    /// All infectives.
    I,
    R,
    N,
}

impl Observable {
    pub const ALL: [Observable; 11] = [
        Observable::S1,
        Observable::S2,
        Observable::S,
        Observable::Ia,
        Observable::A1,
        Observable::A2,
        Observable::A,
        Observable::Is,
        Observable::I,
        Observable::R,
        Observable::N,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::S1 => "S1",
            Observable::S2 => "S2",
            Observable::S => "S",
            Observable::Ia => "Ia",
            Observable::A1 => "A1",
            Observable::A2 => "A2",
            Observable::A => "A",
            Observable::Is => "Is",
            Observable::I => "I",
            Observable::R => "R",
            Observable::N => "N",
        }
    }

    /// Total on both state types; `Ma` has no A1/A2 split, so A1 reads Ia
    /// and A2 reads zero (the convention of the mixed-run CSV layout).
    pub fn extract(self, state: &State) -> f64 {
        match (self, state) {
            (Observable::S1, s) => s.susceptible().0,
            (Observable::S2, s) => s.susceptible().1,
            (Observable::S, s) => {
                let (a, b) = s.susceptible();
                a + b
            }
            (Observable::Ia | Observable::A | Observable::A1, State::Ma(s)) => s.ia,
            (Observable::A2, State::Ma(_)) => 0.0,
            (Observable::Ia | Observable::A, State::Mb(s)) => s.asymptomatic(),
            (Observable::A1, State::Mb(s)) => s.a1,
            (Observable::A2, State::Mb(s)) => s.a2,
            (Observable::Is, s) => s.symptomatic(),
            (Observable::I, s) => s.infected(),
            (Observable::R, s) => s.recovered(),
            (Observable::N, s) => total_population(s),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::range("observable", format!("unknown observable `{s}`")))
    }
}

/// First recorded maximum of `obs`.
///
/// # Panics
///
/// If the trajectory is empty.
pub fn peak_of(traj: &Trajectory, obs: Observable) -> (f64, f64) {
    assert!(!traj.is_empty(), "peak_of on an empty trajectory");
    let mut best = (traj.times[0], obs.extract(&traj.states[0]));
    for (t, s) in traj.iter().skip(1) {
        let v = obs.extract(s);
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

fn check_init(model: ModelKind, p: &Params, init: &State) -> Result<()> {
    if p.model() != model {
        return Err(Error::range(
            "model",
            format!("parameters validated for {}, simulating {}", p.model().name(), model.name()),
        ));
    }
    match (model, init) {
        (ModelKind::Ma, State::Ma(_)) | (ModelKind::Mb, State::Mb(_)) => {}
        (ModelKind::Single, State::Ma(s)) => {
            if s.s2 != 0.0 {
                return Err(Error::range("init.S2", "must be 0 for the single-class model"));
            }
        }
        _ => {
            return Err(Error::range(
                "init",
                format!("state does not belong to model {}", model.name()),
            ))
        }
    }
    if !init.is_finite() {
        return Err(Error::NonFinite {
            context: "initial state".into(),
        });
    }
    let n = p.n();
    if init.components().iter().any(|&c| c < 0.0) {
        return Err(Error::range("init", "compartments must be nonnegative"));
    }
    let total = total_population(init);
    if (total - n).abs() > 1e-9 * n {
        return Err(Error::range(
            "init",
            format!("compartments sum to {total}, expected N = {n}"),
        ));
    }
    Ok(())
}

/// Integrate `model` from `t0` to `t1` with fixed step `dt`, recording every
/// `record_every` steps and always the final state.
pub fn simulate(
    model: ModelKind,
    p: &Params,
    init: State,
    t0: f64,
    t1: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::range("time", format!("need t0 < t1, got [{t0}, {t1}]")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::range("dt", format!("{dt} not in (0, inf)")));
    }
    if record_every == 0 {
        return Err(Error::range("record_every", "must be a positive integer"));
    }
    check_init(model, p, &init)?;

    let span = t1 - t0;
    let full_steps = (span / dt + 1e-9).floor() as usize;
    let remainder = span - full_steps as f64 * dt;
    let partial = remainder > 1e-9 * dt;

    let mut traj = Trajectory {
        model,
        times: vec![t0],
        states: vec![init],
        params_used: *p,
        dt,
        switch_record: None,
    };

    match init {
        State::Ma(s) => {
            let f = |_t: f64, y: &[f64; 5]| -> Result<[f64; 5]> {
                Ok(rhs_ma(p, &StateMa::from_array(*y))?.to_array())
            };
            run(f, s.to_array(), t0, dt, full_steps, partial.then_some(remainder), record_every, t1, &mut traj, |a| {
                State::Ma(StateMa::from_array(a))
            })?;
        }
        State::Mb(s) => {
            let f = |_t: f64, y: &[f64; 6]| -> Result<[f64; 6]> {
                Ok(rhs_mb(p, &StateMb::from_array(*y))?.to_array())
            };
            run(f, s.to_array(), t0, dt, full_steps, partial.then_some(remainder), record_every, t1, &mut traj, |a| {
                State::Mb(StateMb::from_array(a))
            })?;
        }
    }
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
fn run<const D: usize, F, W>(
    f: F,
    mut y: [f64; D],
    t0: f64,
    dt: f64,
    full_steps: usize,
    partial: Option<f64>,
    record_every: usize,
    t1: f64,
    traj: &mut Trajectory,
    wrap: W,
) -> Result<()>
where
    F: Fn(f64, &[f64; D]) -> Result<[f64; D]>,
    W: Fn([f64; D]) -> State,
{
    for k in 0..full_steps {
        let t = t0 + k as f64 * dt;
        y = step_rk4(&f, &y, t, dt)?;
        let done = k + 1;
        let last = done == full_steps && partial.is_none();
        if done % record_every == 0 || last {
            traj.times.push(if last { t1 } else { t0 + done as f64 * dt });
            traj.states.push(wrap(y));
        }
    }
    if let Some(h) = partial {
        let t = t0 + full_steps as f64 * dt;
        y = step_rk4(&f, &y, t, h)?;
        traj.times.push(t1);
        traj.states.push(wrap(y));
    }
    Ok(())
}
