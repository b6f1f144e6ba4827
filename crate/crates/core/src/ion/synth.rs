use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{
    apply_pulse, carrier_coupling, ensure_normalized, red_coupling, wrap_phase, IonError, JointState, Pulse,
    PulseKind,
};
use crate::fock::{truncate, StateVector};
use crate::kerr::{kerr_evolve, KerrParams};

/// Amplitudes below this are treated as already nulled.
const NULL_TOL: f64 = 1e-12;

/// Motional superposition `sum_n c_n |n>` to be prepared in `|g>`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetSpec {
    coeffs: Vec<C64>,
}

impl TargetSpec {
    pub fn new(coeffs: Vec<C64>) -> Result<Self, IonError> {
        let s = StateVector::from_amps(coeffs)?;
        let norm = s.norm();
        if norm == 0.0 {
            return Err(IonError::ZeroTarget);
        }
        if (norm - 1.0).abs() > 1e-12 {
            return Err(IonError::TargetNotNormalized(norm));
        }
        Ok(TargetSpec { coeffs: s.into_amps() })
    }

    /// The Kerr state cut off at `n = cutoff` and renormalized over the kept
    /// levels.
    pub fn truncated_kerr(p: KerrParams, cutoff: usize) -> Result<Self, IonError> {
        let dim = p.default_dim().max(cutoff + 1);
        let full = kerr_evolve(p, dim).map_err(|e| match e {
            crate::kerr::KerrError::Fock(f) => IonError::Fock(f),
            _ => IonError::NonFinitePulse,
        })?;
        let (t, _) = truncate(&full, cutoff)?;
        Self::new(t.into_amps())
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Highest level with a non-negligible coefficient.
    pub fn top_level(&self) -> usize {
        self.coeffs.iter().rposition(|c| c.norm() > NULL_TOL).unwrap_or(0)
    }

    pub fn as_state(&self) -> StateVector {
        StateVector::from_amps(self.coeffs.clone()).expect("validated on construction")
    }
}

/// A synthesized pulse list in application order, together with the phase
/// `u` of the initial state: applying the pulses to `u |0,g>` yields exactly
/// the target.
#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis {
    pub pulses: Vec<Pulse>,
    pub global_phase: C64,
    pub top_level: usize,
}

/// Angle and phase of a rotation that sends the `from` amplitude of a
/// two-level pair to zero. `from_is_ground` selects which half is emptied.
fn nulling_rotation(from: C64, into: C64, from_is_ground: bool) -> (f64, f64) {
    if from.norm() < NULL_TOL {
        return (0.0, 0.0);
    }
    let angle = 2.0 * from.norm().atan2(into.norm());
    if into.norm() < NULL_TOL {
        return (angle, 0.0);
    }
    // ground nulled: cos g = i e^{-i phi} sin e; excited nulled: cos e = i e^{i phi} sin g
    let rel = (C64::new(0.0, -1.0) * from * into.conj()).arg();
    let phase = if from_is_ground { -rel } else { rel };
    (angle, phase)
}

/// Builds the `2M` pulse schedule `C_0, R_1, C_1, .., C_{M-1}, R_M` that
/// prepares `t` from `|0,g>`.
///
/// The target is taken apart from the top: `R_k` empties `|k,g>` into
/// `|k-1,e>`, then `C_{k-1}` empties `|k-1,e>` back into `|k-1,g>`. After
/// each pair the support shrinks by one level, and the remaining `|0,g>`
/// amplitude is the global phase. The recorded deconstruction pulses are
/// inverted (phase shifted by `pi`) and reversed.
pub fn synthesize(t: &TargetSpec, eta: f64) -> Result<Synthesis, IonError> {
    let top = t.top_level();
    if t.coeffs[top].norm() <= NULL_TOL {
        return Err(IonError::ZeroTarget);
    }
    if top > 0 && !(eta.is_finite() && eta > 0.0) {
        return Err(if eta == 0.0 { IonError::ZeroEtaSideband } else { IonError::BadEta(eta) });
    }
    let mut state = JointState::from_motional(&StateVector::from_amps(t.coeffs[..=top].to_vec())?)?;
    let mut undo = Vec::with_capacity(2 * top);

    for k in (1..=top).rev() {
        let (angle, phase) = nulling_rotation(state.ground[k], state.excited[k - 1], true);
        let red = deconstruction_pulse(PulseKind::RedSideband, k, angle, phase, red_coupling(k, eta), eta)?;
        state = apply_pulse(&state, &red, eta)?;
        undo.push(red);

        let (angle, phase) = nulling_rotation(state.excited[k - 1], state.ground[k - 1], false);
        let car = deconstruction_pulse(PulseKind::Carrier, k - 1, angle, phase, carrier_coupling(k - 1, eta), eta)?;
        state = apply_pulse(&state, &car, eta)?;
        undo.push(car);
    }

    let u = state.ground[0];
    let global_phase = u / u.norm();
    let pulses = undo
        .into_iter()
        .rev()
        .map(|p| Pulse { phase: if p.theta == 0.0 { 0.0 } else { wrap_phase(p.phase + PI) }, ..p })
        .collect();
    Ok(Synthesis { pulses, global_phase, top_level: top })
}

/// Turns an effective rotation on level `level` into a bare pulse area.
fn deconstruction_pulse(
    kind: PulseKind,
    level: usize,
    angle: f64,
    phase: f64,
    coupling: f64,
    eta: f64,
) -> Result<Pulse, IonError> {
    if angle == 0.0 {
        return Ok(Pulse { kind, index: level, phase: 0.0, theta: 0.0 });
    }
    if coupling.abs() < 1e-12 {
        return Err(IonError::VanishingCoupling { kind, level, eta });
    }
    let phase = if coupling < 0.0 { phase + PI } else { phase };
    Ok(Pulse { kind, index: level, phase, theta: angle / coupling.abs() })
}

/// Applies `pulses` in order. The motional space must hold every addressed
/// level plus one guard level.
pub fn simulate_pulses(pulses: &[Pulse], initial: &JointState, eta: f64) -> Result<JointState, IonError> {
    ensure_normalized(initial)?;
    let top = pulses.iter().map(|p| p.index).max().unwrap_or(0);
    if !pulses.is_empty() && initial.dim() < top + 2 {
        return Err(IonError::DimensionTooSmall { dim: initial.dim(), top });
    }
    pulses.iter().try_fold(initial.clone(), |s, p| apply_pulse(&s, p, eta))
}
