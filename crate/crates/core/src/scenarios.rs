//! Experiments built on top of the integrator: configured runs, the
//! single-to-two-class switched model, mitigation presets and the
//! participation scan against a symptomatic capacity.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrator::{peak_of, simulate, Observable, SwitchRecord, Trajectory};
use crate::ngm::r0;
use crate::params::{validate_params, ModelKind, Params, RawParams, State, StateMa, StateMb};

/// How the starting state is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitRule {
    /// One symptomatic individual, the other `N - 1` susceptible and split
    /// between the classes by `split` (the model's own `rho` when `None`).
    DfePlusOneSymptomatic { split: Option<f64> },
    Explicit(State),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitRule {
    /// Susceptibles and asymptomatics are both divided by `rho_split`.
    #[default]
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedBlock {
    pub t_switch: f64,
    pub rho_split: f64,
    pub split_rule: SplitRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// `Mb` for a switched run; the first phase is then derived from
    /// `params` with [`Params::single_phase`].
    pub model: ModelKind,
    pub params: Params,
    pub init: InitRule,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub record_every: usize,
    pub mixed: Option<MixedBlock>,
    pub outputs: Vec<Observable>,
}

impl ScenarioConfig {
    /// A plain run from the standard seeded start, recording every step.
    pub fn new(model: ModelKind, params: Params, t1: f64) -> Self {
        ScenarioConfig {
            model,
            params,
            init: InitRule::DfePlusOneSymptomatic { split: None },
            t0: 0.0,
            t1,
            dt: 1.0,
            record_every: 1,
            mixed: None,
            outputs: Vec::new(),
        }
    }

    /// Observables to plot when none were requested.
    pub fn outputs_or_default(&self) -> Vec<Observable> {
        if !self.outputs.is_empty() {
            return self.outputs.clone();
        }
        match self.model {
            ModelKind::Mb => vec![Observable::S1, Observable::S2, Observable::A, Observable::Is, Observable::R],
            _ => vec![Observable::S1, Observable::S2, Observable::Ia, Observable::Is, Observable::R],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.model() != self.model {
            return Err(Error::range(
                "model",
                format!("params validated for {}, config says {}", self.params.model().name(), self.model.name()),
            ));
        }
        if let Some(m) = &self.mixed {
            if self.model != ModelKind::Mb {
                return Err(Error::range("mixed", "a switched run needs model mb"));
            }
            if !(m.t_switch > self.t0 && m.t_switch < self.t1) {
                return Err(Error::range(
                    "mixed.t_switch",
                    format!("{} not in ({}, {})", m.t_switch, self.t0, self.t1),
                ));
            }
            if !(m.rho_split > 0.0 && m.rho_split < 1.0) {
                return Err(Error::range("mixed.rho_split", format!("{} not in (0, 1)", m.rho_split)));
            }
        }
        if let InitRule::DfePlusOneSymptomatic { split: Some(s) } = self.init {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::range("init.split", format!("{s} not in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// `(S1, S2, Is) = ((N-1) split, (N-1)(1-split), 1)`, everything else zero.
pub fn seeded_state(model: ModelKind, n: f64, split: f64) -> State {
    let s = n - 1.0;
    let (s1, s2) = (s * split, s * (1.0 - split));
    match model {
        ModelKind::Mb => State::Mb(StateMb::new(s1, s2, 0.0, 0.0, 1.0, 0.0)),
        _ => State::Ma(StateMa::new(s1, s2, 1.0, 0.0, 0.0)),
    }
}

fn resolve_init(init: InitRule, model: ModelKind, p: &Params) -> State {
    match init {
        InitRule::Explicit(s) => s,
        InitRule::DfePlusOneSymptomatic { split } => {
            let split = match model {
                ModelKind::Single => 1.0,
                _ => split.unwrap_or(p.rho()),
            };
            seeded_state(model, p.n(), split)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSummary {
    pub r0: f64,
    /// `(t, value)` of the first maximum of `I`.
    pub peak_infected: (f64, f64),
    pub peak_symptomatic: (f64, f64),
    pub final_recovered: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub trajectory: Trajectory,
    pub summary: ScenarioSummary,
}

fn summarize(traj: &Trajectory) -> ScenarioSummary {
    let p = &traj.params_used;
    ScenarioSummary {
        r0: r0(p.beta1(), p.beta2(), p.rho(), p.kappa()),
        peak_infected: peak_of(traj, Observable::I),
        peak_symptomatic: peak_of(traj, Observable::Is),
        final_recovered: traj.last().map_or(f64::NAN, |(_, s)| s.recovered()),
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    if cfg.mixed.is_some() {
        return run_mixed(cfg);
    }
    let init = resolve_init(cfg.init, cfg.model, &cfg.params);
    let trajectory = simulate(cfg.model, &cfg.params, init, cfg.t0, cfg.t1, cfg.dt, cfg.record_every)?;
    let summary = summarize(&trajectory);
    Ok(ScenarioOutcome { trajectory, summary })
}

/// Map the single-class state onto the two-class one. Each aggregate
/// (susceptible, asymptomatic) is cut so that the two pieces add back to
/// the original exactly.
pub fn split_state(pre: &StateMa, rho_split: f64, rule: SplitRule) -> StateMb {
    match rule {
        SplitRule::Proportional => {
            // When `total - first` lands on a rounding tie the sum cannot
            // reproduce `total`; nudging `first` by an ulp breaks the tie.
            let cut = |total: f64| {
                let mut first = rho_split * total;
                for _ in 0..8 {
                    let second = total - first;
                    if first + second == total {
                        return (first, second);
                    }
                    first = first.next_down();
                }
                (rho_split * total, total - rho_split * total)
            };
            let (s1, s2) = cut(pre.s1 + pre.s2);
            let (a1, a2) = cut(pre.ia);
            StateMb::new(s1, s2, a1, a2, pre.is, pre.r)
        }
    }
}

fn lift(state: &State) -> State {
    match state {
        State::Ma(s) => State::Mb(StateMb::new(s.s1, s.s2, s.ia, 0.0, s.is, s.r)),
        mb => *mb,
    }
}

/// Run the single-class phase up to `t_switch`, split the population and
/// continue with `Mb`. Pre-switch records are reported in the `Mb` layout
/// with the asymptomatics in `A1`.
pub fn run_mixed(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    let mixed = cfg
        .mixed
        .ok_or_else(|| Error::RejectMissing("mixed".into()))?;
    let single = cfg.params.single_phase();
    let init = match cfg.init {
        InitRule::Explicit(State::Mb(_)) => {
            return Err(Error::range("init", "a switched run starts from a single-class (ma layout) state"));
        }
        other => resolve_init(other, ModelKind::Single, &single),
    };

    let first = simulate(ModelKind::Single, &single, init, cfg.t0, mixed.t_switch, cfg.dt, cfg.record_every)?;
    let (_, pre) = first.last().ok_or(Error::EmptyTrajectory)?;
    let pre = match pre {
        State::Ma(s) => *s,
        State::Mb(_) => unreachable!("single phase yields ma states"),
    };
    let post = split_state(&pre, mixed.rho_split, mixed.split_rule);
    let second = simulate(
        ModelKind::Mb,
        &cfg.params,
        State::Mb(post),
        mixed.t_switch,
        cfg.t1,
        cfg.dt,
        cfg.record_every,
    )?;

    let keep = first.len() - 1;
    let mut times: Vec<f64> = first.times[..keep].to_vec();
    let mut states: Vec<State> = first.states[..keep].iter().map(lift).collect();
    times.extend_from_slice(&second.times);
    states.extend_from_slice(&second.states);

    let trajectory = Trajectory {
        model: ModelKind::Mb,
        times,
        states,
        params_used: cfg.params,
        dt: cfg.dt,
        switch_record: Some(SwitchRecord {
            t_switch: mixed.t_switch,
            pre: State::Ma(pre),
            post: State::Mb(post),
        }),
    };
    let summary = summarize(&trajectory);
    Ok(ScenarioOutcome { trajectory, summary })
}

/// Class totals compared across a switch: susceptible, asymptomatic,
/// symptomatic, recovered and their sum in that order.
pub fn aggregates(state: &State) -> [f64; 5] {
    let (s, a, is, r) = match state {
        State::Ma(x) => (x.s1 + x.s2, x.ia, x.is, x.r),
        State::Mb(x) => (x.s1 + x.s2, x.a1 + x.a2, x.is, x.r),
    };
    [s, a, is, r, s + a + is + r]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    Masks,
    CommonAreas,
    Distancing,
}

impl PresetName {
    pub const ALL: [PresetName; 3] = [PresetName::Masks, PresetName::CommonAreas, PresetName::Distancing];

    pub fn name(self) -> &'static str {
        match self {
            PresetName::Masks => "masks",
            PresetName::CommonAreas => "common_areas",
            PresetName::Distancing => "distancing",
        }
    }
}

impl std::str::FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::range("preset", format!("unknown preset `{s}`")))
    }
}

/// Infection rates for a population where class 2 follows a mitigation
/// behaviour and class 1 does not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MitigationPreset {
    pub name: PresetName,
    pub beta1: f64,
    pub beta2: f64,
}

pub const PRESET_ALPHA1: f64 = 0.0001;
pub const PRESET_ALPHA2: f64 = 0.0;
pub const PRESET_GAMMA: f64 = 0.0001;
pub const PRESET_LAMBDA: f64 = 0.65;
pub const PRESET_KAPPA: f64 = 0.0002;

pub fn covid_mitigation_presets() -> [MitigationPreset; 3] {
    [
        MitigationPreset { name: PresetName::Masks, beta1: 0.00808, beta2: 0.00558 },
        MitigationPreset { name: PresetName::CommonAreas, beta1: 0.00675, beta2: 0.00538 },
        MitigationPreset { name: PresetName::Distancing, beta1: 0.00700, beta2: 0.00547 },
    ]
}

pub fn preset(name: PresetName) -> MitigationPreset {
    covid_mitigation_presets()
        .into_iter()
        .find(|p| p.name == name)
        .expect("every preset name has an entry")
}

impl MitigationPreset {
    /// `Mb` parameters with the shared rates. `alpha2 = 0` needs the
    /// zero-alpha2 relaxation, which is switched on here.
    pub fn params(&self, n: f64) -> Params {
        let raw = RawParams {
            beta1: Some(self.beta1),
            beta2: Some(self.beta2),
            lambda: Some(PRESET_LAMBDA),
            gamma: Some(PRESET_GAMMA),
            kappa: Some(PRESET_KAPPA),
            alpha1: Some(PRESET_ALPHA1),
            alpha2: Some(PRESET_ALPHA2),
            n: Some(n),
            allow_zero_alpha2: true,
            ..Default::default()
        };
        validate_params(&raw, ModelKind::Mb).expect("preset parameters are valid under relaxation")
    }
}

/// Run settings shared by every grid point of a participation scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub n: f64,
    pub t1: f64,
    pub dt: f64,
    pub record_every: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            n: 100.0,
            t1: 30_000.0,
            dt: 1.0,
            record_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipationScanResult {
    pub preset: PresetName,
    pub capacity: f64,
    pub grid: Vec<f64>,
    pub peak_is: Vec<f64>,
    /// Smallest grid fraction whose symptomatic peak stays within capacity.
    pub minimal_compliant: Option<f64>,
    /// Set when the peaks are not non-increasing along the grid.
    pub warning: Option<String>,
}

/// `k` evenly spaced fractions `i / (k + 1)`.
pub fn participation_grid(k: usize) -> Vec<f64> {
    (1..=k).map(|i| i as f64 / (k + 1) as f64).collect()
}

/// Peak symptomatic load for each participation fraction `q`, with the
/// compliant `q (N-1)` in class 2 and one symptomatic seed.
pub fn participation_scan(
    preset: &MitigationPreset,
    capacity: f64,
    grid: &[f64],
    settings: ScanSettings,
) -> Result<ParticipationScanResult> {
    if !(capacity > 0.0) {
        return Err(Error::range("capacity", format!("{capacity} must be positive")));
    }
    if grid.is_empty() || grid.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
        return Err(Error::range("grid", "fractions must lie in (0, 1)"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::RejectOrder("grid must be strictly increasing".into()));
    }
    let p = preset.params(settings.n);

    let peak_is = grid
        .par_iter()
        .map(|&q| {
            let init = seeded_state(ModelKind::Mb, settings.n, 1.0 - q);
            let traj = simulate(ModelKind::Mb, &p, init, 0.0, settings.t1, settings.dt, settings.record_every)?;
            Ok(peak_of(&traj, Observable::Is).1)
        })
        .collect::<Result<Vec<f64>>>()?;

    let minimal_compliant = grid
        .iter()
        .zip(&peak_is)
        .find(|(_, &peak)| peak <= capacity)
        .map(|(&q, _)| q);
    let warning = peak_is
        .windows(2)
        .position(|w| w[1] > w[0])
        .map(|i| format!("peak Is rises between q = {} and q = {}", grid[i], grid[i + 1]));

    Ok(ParticipationScanResult {
        preset: preset.name,
        capacity,
        grid: grid.to_vec(),
        peak_is,
        minimal_compliant,
        warning,
    })
}
