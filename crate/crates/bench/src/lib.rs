//! Shared fixtures for the criterion benches.

use kerrcat::kerr::{kerr_evolve, KerrParams};
use kerrcat::StateVector;
use num_complex::Complex64 as C64;

/// The four-lobe kitten at `alpha = 2`, `tau = pi/2`.
pub fn kitten_params() -> KerrParams {
    KerrParams::new(C64::new(2.0, 0.0), std::f64::consts::FRAC_PI_2)
}

pub fn kitten_state() -> StateVector {
    let p = kitten_params();
    kerr_evolve(p, p.default_dim()).expect("valid parameters")
}
