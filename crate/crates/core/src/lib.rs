//! Floquet-engineered fast-forward state preparation of a two-level system
//! under dephasing noise, with variational Floquet drives for d-level problems.
//!
//! Frequencies are angular (rad/µs) and times are in µs throughout; see
//! [`units`] for conversions from MHz.

pub mod error;
pub mod evolve;
pub mod experiments;
pub mod noise;
pub mod numerics;
pub mod protocols;
pub mod schedules;
pub mod units;
pub mod variational;

pub use error::{Error, ExitCode, Result};
pub use evolve::{evolve, evolve_against, final_fidelity, strobe_compare, EvolutionResult, QuantumState, StepPolicy, Stepper};
pub use experiments::{figure_ids, run_figure, run_scan, ExperimentConfig, Table};
pub use noise::{noisy_ensemble, ramsey_t2star, DetuningSpec, NoiseSpec};
pub use numerics::PauliVector;
pub use protocols::{fields, ControlFields, Protocol, ProtocolParams};
pub use schedules::{SweepKind, SweepSchedule};
pub use variational::{agp_exact, magnus_h0, variational_fit, DriveAnsatz, ManyBodyProblem};
