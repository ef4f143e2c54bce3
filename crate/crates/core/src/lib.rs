//! Two-population behavioural SIR models.
//!
//! `Ma` splits susceptibles into two classes with fixed membership and
//! infectives into symptomatic and asymptomatic; `Mb` additionally lets
//! susceptibles and asymptomatics move between the classes. The crate
//! simulates both, computes `R0` from the next-generation matrix,
//! classifies the parameter region where the disease-free state is stable,
//! and reports how sensitive `R0` is to each behavioural parameter.

pub mod dynamics;
pub mod error;
pub mod feasibility;
pub mod integrator;
pub mod io;
pub mod ngm;
pub mod params;
pub mod scenarios;
pub mod sensitivity;

pub use error::{Error, ErrorKind, Result};
pub use integrator::{simulate, Observable, Trajectory};
pub use ngm::{ngm, r0, stability, Verdict};
pub use params::{validate_params, ModelKind, Params, RawParams, State, StateMa, StateMb};
