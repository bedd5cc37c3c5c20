//! Hybrid circuit mapper for neutral-atom quantum hardware.
//!
//! Neutral-atom machines offer two ways to make a blocked gate executable:
//! inserting SWAP gates (changing which atom holds which circuit qubit) or
//! physically shuttling atoms to new trap coordinates with an AOD. This crate
//! routes each gate through whichever capability a fidelity estimate favors,
//! lowers the resulting move stream to native AOD operations, schedules the
//! final program under the restriction-radius constraint, and reports fidelity
//! and timing metrics against the unmapped circuit.
//!
//! The main entry point is [`pipeline::run`], which drives the whole flow:
//! parse, decompose, map, route, lower, schedule, compare. Individual stages
//! are usable on their own (see the module docs).
//!
//! All geometric and fidelity math is generic over the scalar type via the
//! [`num::Real`] trait; the type aliases at the crate root fix it to `f64`,
//! which is what the CLI and the bundled presets use.

pub mod aod;
pub mod circuit;
pub mod decide;
pub mod error;
pub mod hardware;
pub mod layers;
pub mod mapping;
pub mod num;
pub mod pipeline;
pub mod presets;
pub mod program;
pub mod schedule;
pub mod shuttle_router;
pub mod sim;
pub mod swap_router;

pub use error::{MapError, Result};

/// Default scalar for the CLI and presets.
pub type Real = f64;

pub type Circuit = circuit::QuantumCircuit<Real>;
pub type Hardware = hardware::HardwareSpec<Real>;
pub type Mapping = mapping::MappingState<Real>;
pub type RunConfig = pipeline::RunConfig<Real>;
pub type RunResult = pipeline::RunResult<Real>;
pub type Metrics = schedule::Metrics<Real>;
