//! Adiabatic propagation of three-component pulses through a tripod medium.
//!
//! * [`algebra`]: angle parameterization, dark states, state assembly.
//! * [`units`]: CGS estimates.
//! * [`profile`]: boundary data.
//! * [`reduced`]: the reduced hyperbolic solver in nonlinear time.
//! * [`oracle`]: the full Maxwell–Schrödinger integrator.
//! * [`analytic`]: exact slow/fast families, classification and fitting.

pub mod algebra;
pub mod analytic;
pub mod error;
pub mod oracle;
pub mod profile;
pub mod reduced;
pub mod units;

pub use algebra::{AngleTriple, AtomState, Phases, RabiTriple, C64, ZERO_PHASES};
pub use error::{Error, Result};
pub use profile::{BoundaryProfile, Profile, SampledProfile, Segment, Shape};
pub use reduced::{Grid, ReducedField, SnapshotPlan};
