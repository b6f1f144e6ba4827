//! Trapped-ion motional state engineering.
//!
//! The ion's state lives on `|n, g>` and `|n, e>`. Carrier pulses rotate each
//! `(|n,g>, |n,e>)` pair, red-sideband pulses each `(|n,g>, |n-1,e>)` pair.
//! The rotation rate on a pair is the bare pulse area scaled by the
//! displacement matrix element `<m| e^{i eta (a + a^dag)} |n>`, which keeps
//! the model valid outside the Lamb-Dicke regime.
//!
//! All rotations use `U(theta, phi) = [[cos, -i e^{-i phi} sin], [-i e^{i phi} sin, cos]]`
//! on `(g, e)` with half-angle `theta / 2`, so `theta = pi` swaps `g` and `e`.

mod schedule;
mod synth;

pub use schedule::{PhysicalPulse, PhysicalSchedule, ScheduleHeader, ScheduleMode, TimingConvention};
pub use synth::{simulate_pulses, synthesize, Synthesis, TargetSpec};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{FockError, StateVector, NORM_TOL};
use crate::special::laguerre;

#[derive(Debug, Error, PartialEq)]
pub enum IonError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("Lamb-Dicke parameter must be finite and non-negative, got {0}")]
    BadEta(f64),
    #[error("red-sideband pulses need eta > 0")]
    ZeroEtaSideband,
    #[error("non-finite pulse parameter")]
    NonFinitePulse,
    #[error("target has no non-zero coefficient")]
    ZeroTarget,
    #[error("target is not normalized (norm {0})")]
    TargetNotNormalized(f64),
    #[error("global phase must have unit magnitude, got {0}")]
    BadGlobalPhase(f64),
    #[error("motional dimension {dim} too small for pulses up to level {top}; need at least {}", top + 2)]
    DimensionTooSmall { dim: usize, top: usize },
    #[error("{kind:?} coupling on level {level} vanishes at eta = {eta}")]
    VanishingCoupling { kind: PulseKind, level: usize, eta: f64 },
    #[error("rabi frequencies and durations must be positive")]
    BadTiming,
    #[error("initial state is not normalized")]
    NotNormalized,
}

/// Joint motional and electronic state.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    ground: Vec<C64>,
    excited: Vec<C64>,
}

impl JointState {
    /// `|0, g>` in a motional space of `dim` levels.
    pub fn ground(dim: usize) -> Result<Self, IonError> {
        Self::from_motional(&StateVector::vacuum(dim)?)
    }

    /// `|psi> |g>`.
    pub fn from_motional(s: &StateVector) -> Result<Self, IonError> {
        Ok(JointState { ground: s.amps().to_vec(), excited: vec![C64::new(0.0, 0.0); s.dim()] })
    }

    pub fn from_parts(ground: Vec<C64>, excited: Vec<C64>) -> Result<Self, IonError> {
        if ground.len() != excited.len() {
            return Err(FockError::DimensionMismatch(ground.len(), excited.len()).into());
        }
        if ground.is_empty() {
            return Err(FockError::ZeroDimension.into());
        }
        if !ground.iter().chain(&excited).all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(FockError::NonFinite("joint amplitudes").into());
        }
        Ok(JointState { ground, excited })
    }

    pub fn dim(&self) -> usize {
        self.ground.len()
    }

    pub fn ground_amps(&self) -> &[C64] {
        &self.ground
    }

    pub fn excited_amps(&self) -> &[C64] {
        &self.excited
    }

    pub fn norm_sqr(&self) -> f64 {
        self.ground.iter().chain(&self.excited).map(|a| a.norm_sqr()).sum()
    }

    pub fn excited_population(&self) -> f64 {
        self.excited.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        JointState {
            ground: self.ground.iter().map(|a| a * factor).collect(),
            excited: self.excited.iter().map(|a| a * factor).collect(),
        }
    }

    /// The `|g>` component as a motional state, not renormalized.
    pub fn motional_ground(&self) -> StateVector {
        StateVector::from_amps(self.ground.clone()).expect("joint state amplitudes are finite")
    }

    /// Phase-insensitive overlap `|<target, g | self>|^2`.
    pub fn fidelity_with(&self, target: &StateVector) -> f64 {
        target.amps().iter().zip(&self.ground).map(|(t, a)| t.conj() * a).sum::<C64>().norm_sqr()
    }

    /// Population above motional level `top` in either electronic state.
    pub fn leakage_above(&self, top: usize) -> f64 {
        self.ground.iter().chain(&self.excited).enumerate().filter(|(i, _)| i % self.dim() > top).map(|(_, a)| a.norm_sqr()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    Carrier,
    RedSideband,
}

impl PulseKind {
    pub fn label(&self) -> char {
        match self {
            PulseKind::Carrier => 'C',
            PulseKind::RedSideband => 'R',
        }
    }
}

/// One laser pulse. `theta` is the bare pulse area (Rabi frequency times
/// duration); the rotation angle on a given pair is `theta` times that
/// pair's coupling factor. `index` is the `k` of `C_k` / `R_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub kind: PulseKind,
    pub index: usize,
    pub phase: f64,
    pub theta: f64,
}

fn check_eta(eta: f64) -> Result<(), IonError> {
    if eta.is_finite() && eta >= 0.0 {
        Ok(())
    } else {
        Err(IonError::BadEta(eta))
    }
}

/// Carrier coupling on `(|n,g>, |n,e>)`: `e^{-eta^2/2} L_n(eta^2)`.
pub fn carrier_coupling(n: usize, eta: f64) -> f64 {
    let x = eta * eta;
    (-0.5 * x).exp() * laguerre(n, 0, x)
}

/// Red-sideband coupling on `(|n,g>, |n-1,e>)`:
/// `e^{-eta^2/2} eta L^1_{n-1}(eta^2) / sqrt(n)`, which tends to `eta sqrt(n)`.
pub fn red_coupling(n: usize, eta: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let x = eta * eta;
    (-0.5 * x).exp() * eta * laguerre(n - 1, 1, x) / (n as f64).sqrt()
}

/// Rotates `(g, e)` by `angle` with laser phase `phase`.
fn rotate(g: C64, e: C64, angle: f64, phase: f64) -> (C64, C64) {
    let (s, c) = (0.5 * angle).sin_cos();
    let mi = C64::new(0.0, -1.0);
    let to_e = mi * C64::from_polar(s, phase);
    let to_g = mi * C64::from_polar(s, -phase);
    (c * g + to_g * e, to_e * g + c * e)
}

fn check_pulse(phase: f64, theta: f64) -> Result<(), IonError> {
    if phase.is_finite() && theta.is_finite() {
        Ok(())
    } else {
        Err(IonError::NonFinitePulse)
    }
}

pub fn apply_carrier(s: &JointState, phase: f64, theta: f64, eta: f64) -> Result<JointState, IonError> {
    check_eta(eta)?;
    check_pulse(phase, theta)?;
    let mut out = s.clone();
    for n in 0..s.dim() {
        let (g, e) = rotate(s.ground[n], s.excited[n], theta * carrier_coupling(n, eta), phase);
        out.ground[n] = g;
        out.excited[n] = e;
    }
    Ok(out)
}

/// `|0,g>` has no partner and `|dim-1,e>` none either; both are left alone.
pub fn apply_red_sideband(s: &JointState, phase: f64, theta: f64, eta: f64) -> Result<JointState, IonError> {
    check_eta(eta)?;
    if eta == 0.0 {
        return Err(IonError::ZeroEtaSideband);
    }
    check_pulse(phase, theta)?;
    let mut out = s.clone();
    for n in 1..s.dim() {
        let (g, e) = rotate(s.ground[n], s.excited[n - 1], theta * red_coupling(n, eta), phase);
        out.ground[n] = g;
        out.excited[n - 1] = e;
    }
    Ok(out)
}

pub fn apply_pulse(s: &JointState, p: &Pulse, eta: f64) -> Result<JointState, IonError> {
    match p.kind {
        PulseKind::Carrier => apply_carrier(s, p.phase, p.theta, eta),
        PulseKind::RedSideband => apply_red_sideband(s, p.phase, p.theta, eta),
    }
}

pub(crate) fn ensure_normalized(s: &JointState) -> Result<(), IonError> {
    if (s.norm_sqr().sqrt() - 1.0).abs() < NORM_TOL {
        Ok(())
    } else {
        Err(IonError::NotNormalized)
    }
}

/// Reduces a phase to `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = phi.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
