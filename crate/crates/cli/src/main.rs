use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use socsir::feasibility::{bifurcation_scan, classify_feasible_set, rho_grid};
use socsir::io::{format_sig, load_config, render_svg, write_bifurcation_csv, write_csv};
use socsir::ngm::stability;
use socsir::params::{validate_params, ModelKind, Params, RawParams, State};
use socsir::scenarios::{participation_grid, participation_scan, preset, run_mixed, run_scenario, PresetName, ScanSettings};
use socsir::sensitivity::{finite_diff_check, ordering_case, sensitivity_indices};
use socsir::{Error, ErrorKind};

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 500.0;

#[derive(Parser)]
#[command(name = "socsir", version, about = "Two-population behavioural SIR models")]
struct Cli {
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario document.
    Simulate(RunArgs),
    /// Basic reproduction number.
    R0(ParamArgs),
    /// Stability of the disease-free equilibrium.
    Stability(ParamArgs),
    /// Type and vertices of the rho-feasible set.
    Feasibility {
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        rho: f64,
    },
    /// Feasible-set type along a grid of rho values.
    Bifurcation {
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 99)]
        steps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sensitivity indices of R0 and their ordering.
    Sensitivity(ParamArgs),
    /// Run a scenario document with a mid-run switch to two classes.
    Mixed(RunArgs),
    /// Smallest participation keeping the symptomatic peak within capacity.
    ScanParticipation {
        #[arg(long)]
        preset: PresetName,
        #[arg(long)]
        capacity: f64,
        #[arg(long, default_value_t = 99)]
        steps: usize,
        #[arg(long, default_value_t = 30_000.0)]
        t1: f64,
        #[arg(long, default_value_t = 100.0)]
        n: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

/// Parameters for the closed-form commands. `lambda`, `gamma` and `n` do
/// not affect any of them but are still validated.
#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    model: ModelKind,
    #[arg(long)]
    beta1: f64,
    #[arg(long)]
    beta2: f64,
    #[arg(long)]
    kappa: f64,
    #[arg(long, conflicts_with_all = ["alpha1", "alpha2"])]
    rho: Option<f64>,
    #[arg(long, requires = "alpha2")]
    alpha1: Option<f64>,
    #[arg(long, requires = "alpha1")]
    alpha2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 100.0)]
    n: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<Params, Failure> {
        let raw = RawParams {
            beta1: Some(self.beta1),
            beta2: Some(self.beta2),
            lambda: Some(self.lambda),
            gamma: Some(self.gamma),
            kappa: Some(self.kappa),
            rho: self.rho,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            n: Some(self.n),
            ..Default::default()
        };
        Ok(validate_params(&raw, self.model)?)
    }
}

enum Failure {
    Model(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        Failure::Model(Error::Parse {
            location: path.display().to_string(),
            message: e.to_string(),
        })
    })
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn g(x: f64) -> String {
    format_sig(x, 9)
}

fn state_line(state: &State) -> String {
    match state {
        State::Ma(s) => format!("S1={} S2={} Is={} Ia={} R={}", g(s.s1), g(s.s2), g(s.is), g(s.ia), g(s.r)),
        State::Mb(s) => format!(
            "S1={} S2={} A1={} A2={} Is={} R={}",
            g(s.s1),
            g(s.s2),
            g(s.a1),
            g(s.a2),
            g(s.is),
            g(s.r)
        ),
    }
}

fn run(args: &RunArgs, require_mixed: bool) -> Result<String, Failure> {
    let cfg = load_config(&read(&args.config)?)?;
    if require_mixed && cfg.mixed.is_none() {
        return Err(Error::RejectMissing("mixed".into()).into());
    }
    let outcome = if require_mixed { run_mixed(&cfg)? } else { run_scenario(&cfg)? };
    let traj = &outcome.trajectory;
    if let Some(path) = &args.csv {
        write(path, &write_csv(traj))?;
    }
    if let Some(path) = &args.svg {
        write(path, &render_svg(traj, &cfg.outputs_or_default(), SVG_WIDTH, SVG_HEIGHT)?)?;
    }

    let s = outcome.summary;
    let mut out = String::new();
    writeln!(out, "model: {}", traj.model.name()).unwrap();
    writeln!(out, "records: {}", traj.len()).unwrap();
    writeln!(out, "r0: {}", g(s.r0)).unwrap();
    writeln!(out, "peak_I: {} at t={}", g(s.peak_infected.1), g(s.peak_infected.0)).unwrap();
    writeln!(out, "peak_Is: {} at t={}", g(s.peak_symptomatic.1), g(s.peak_symptomatic.0)).unwrap();
    writeln!(out, "final_R: {}", g(s.final_recovered)).unwrap();
    if let Some(sw) = &traj.switch_record {
        writeln!(out, "switch_t: {}", g(sw.t_switch)).unwrap();
        writeln!(out, "switch_pre: {}", state_line(&sw.pre)).unwrap();
        writeln!(out, "switch_post: {}", state_line(&sw.post)).unwrap();
    }
    if cfg.outputs.is_empty() && args.csv.is_none() && args.svg.is_none() {
        return Ok(out);
    }
    for obs in &cfg.outputs {
        let last = traj.last().map(|(_, st)| obs.extract(st)).unwrap_or(f64::NAN);
        writeln!(out, "final_{}: {}", obs.name(), g(last)).unwrap();
    }
    Ok(out)
}

fn execute(cmd: &Command) -> Result<String, Failure> {
    let mut out = String::new();
    match cmd {
        Command::Simulate(args) => return run(args, false),
        Command::Mixed(args) => return run(args, true),
        Command::R0(args) => {
            let p = args.params()?;
            let rep = stability(args.model, &p);
            writeln!(out, "r0: {}", g(rep.r0)).unwrap();
            writeln!(out, "rho: {}", g(p.rho())).unwrap();
        }
        Command::Stability(args) => {
            let p = args.params()?;
            let rep = stability(args.model, &p);
            writeln!(out, "verdict: {}", rep.verdict.name()).unwrap();
            writeln!(out, "r0: {}", g(rep.r0)).unwrap();
            writeln!(out, "b_rho: {}", g(rep.b_rho)).unwrap();
            writeln!(out, "dfe: {}", state_line(&rep.dfe)).unwrap();
        }
        Command::Feasibility { model, kappa, rho } => {
            let rep = classify_feasible_set(*rho, *kappa, *model)?;
            writeln!(out, "type: {}", rep.type_label.name()).unwrap();
            for (b1, b2) in &rep.vertices {
                writeln!(out, "vertex: {} {}", g(*b1), g(*b2)).unwrap();
            }
        }
        Command::Bifurcation { model, kappa, steps, csv } => {
            if *steps == 0 {
                return Err(Error::range("steps", "must be positive").into());
            }
            let scan = bifurcation_scan(*model, *kappa, &rho_grid(*model, *steps))?;
            if let Some(path) = csv {
                write(path, &write_bifurcation_csv(&scan))?;
            }
            writeln!(out, "points: {}", scan.grid.len()).unwrap();
            if scan.breakpoints.is_empty() {
                writeln!(out, "breakpoints: none ({} throughout)", scan.labels[0].name()).unwrap();
            }
            for b in &scan.breakpoints {
                let at = b.exact.map(|x| format!(" exact={}", g(x))).unwrap_or_default();
                writeln!(
                    out,
                    "breakpoint: {} -> {} in [{}, {}]{at}",
                    b.from.name(),
                    b.to.name(),
                    g(b.lower),
                    g(b.upper)
                )
                .unwrap();
            }
        }
        Command::Sensitivity(args) => {
            let p = args.params()?;
            let idx = sensitivity_indices(args.model, &p);
            for (name, v) in idx.entries() {
                writeln!(out, "upsilon_{name}: {}", g(v)).unwrap();
            }
            let case = ordering_case(args.model, &p);
            let chain: Vec<&str> = case.chain.iter().map(|n| n.name()).collect();
            writeln!(out, "case: {}", case.label.name()).unwrap();
            writeln!(out, "order: {}", chain.join(" < ")).unwrap();
            writeln!(out, "finite_diff_max_rel_error: {:.3e}", finite_diff_check(args.model, &p, 1e-6)?).unwrap();
        }
        Command::ScanParticipation { preset: name, capacity, steps, t1, n } => {
            if *steps == 0 {
                return Err(Error::range("steps", "must be positive").into());
            }
            let settings = ScanSettings { n: *n, t1: *t1, ..Default::default() };
            let res = participation_scan(&preset(*name), *capacity, &participation_grid(*steps), settings)?;
            writeln!(out, "preset: {}", name.name()).unwrap();
            writeln!(out, "capacity: {}", g(res.capacity)).unwrap();
            match res.minimal_compliant {
                Some(q) => writeln!(out, "minimal_compliant: {}", g(q)).unwrap(),
                None => writeln!(out, "minimal_compliant: NONE").unwrap(),
            }
            if let Some(w) = &res.warning {
                writeln!(out, "WARNING: {w}").unwrap();
            }
            for (q, peak) in res.grid.iter().zip(&res.peak_is) {
                writeln!(out, "{},{}", g(*q), g(*peak)).unwrap();
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli.command).and_then(|text| match &cli.out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Parse => 4,
            })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
