//! Kerr-state cat and kitten states in a truncated Fock space.
//!
//! * [`fock`]: state vectors, coherent states, overlaps, truncation and
//!   quadrature moments.
//! * [`kerr`]: Kerr evolution, squeezing, and fractional-revival
//!   decomposition into coherent-state superpositions.
//! * [`wigner`]: Wigner functions by two independent routes, grids and
//!   negativity.
//! * [`ion`]: carrier / red-sideband pulses on a trapped ion, pulse-sequence
//!   synthesis for arbitrary motional superpositions, and lab schedules.

pub mod fock;
pub mod ion;
pub mod kerr;
pub mod special;
pub mod wigner;

mod mp_series;

pub use fock::{fidelity, inner_product, FockError, StateVector, TruncationReport};
pub use ion::{IonError, JointState, PhysicalSchedule, Pulse, PulseKind, ScheduleMode, TargetSpec};
pub use kerr::{CoherentSuperposition, KerrError, KerrParams, RevivalFraction};
pub use num_complex::Complex64;
pub use wigner::{PhaseSpacePoint, WignerError, WignerGrid, WignerMethod, Window};
