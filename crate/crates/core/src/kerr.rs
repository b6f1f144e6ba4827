//! Kerr-medium evolution of coherent states.
//!
//! A coherent state passing through a Kerr medium picks up the phase
//! `exp(i tau/2 n(n-1))` on Fock component `n`. The photon statistics stay
//! Poissonian while the quadratures squeeze, and at `tau = 2 pi p/q` the
//! state collapses onto a finite superposition of coherent states with the
//! same amplitude and equally spaced phases (fractional revivals).

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{self, FockError, StateVector};

#[derive(Debug, Error, PartialEq)]
pub enum KerrError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("non-finite tau")]
    NonFiniteTau,
    #[error("closed-form variances need a real alpha, got {0}")]
    ComplexAlpha(C64),
    #[error("revival denominator must be positive")]
    ZeroDenominator,
    #[error("revival fraction {num}/{den} is not in lowest terms")]
    NotCoprime { num: i64, den: u64 },
    #[error("no candidate phase set reproduces the Kerr phases (best residual {residual:e})")]
    Degenerate { residual: f64 },
    #[error("superposition has no terms")]
    EmptySuperposition,
}

/// Initial coherent amplitude and dimensionless Kerr evolution parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerrParams {
    pub alpha: C64,
    pub tau: f64,
}

impl KerrParams {
    pub fn new(alpha: C64, tau: f64) -> Self {
        KerrParams { alpha, tau }
    }

    pub fn default_dim(&self) -> usize {
        fock::default_dim(self.alpha)
    }
}

/// Kerr phase `exp(i tau n(n-1)/2)`; `n(n-1)/2` is an integer, which is what
/// makes the evolution `2 pi`-periodic.
pub fn kerr_phase(tau: f64, n: usize) -> C64 {
    let pairs = (n * n.saturating_sub(1) / 2) as f64;
    C64::from_polar(1.0, tau * pairs)
}

/// Evolves `|alpha>` through the Kerr medium, truncated and renormalized to
/// `dim` levels.
pub fn kerr_evolve(p: KerrParams, dim: usize) -> Result<StateVector, KerrError> {
    if !p.tau.is_finite() {
        return Err(KerrError::NonFiniteTau);
    }
    let amps = fock::coherent_amps(p.alpha, dim)?
        .into_iter()
        .enumerate()
        .map(|(n, a)| a * kerr_phase(p.tau, n))
        .collect();
    Ok(StateVector::from_amps(amps)?.normalized()?)
}

/// Closed-form quadrature variances of the Kerr state for real `alpha`:
///
/// ```text
/// (dX1)^2 = 1 + 2a^2 (1 - e^{2a^2(cos t - 1)} + Re{e^{it + a^2(e^{2it} - 1)} - e^{2a^2(e^{it} - 1)}})
/// (dX2)^2 = 1 + 2a^2 (1 - e^{2a^2(cos t - 1)} - Re{e^{it + a^2(e^{2it} - 1)} - e^{2a^2(e^{it} - 1)}})
/// ```
///
/// These follow from `<a> = a e^{a^2(e^{it}-1)}` and
/// `<a^2> = a^2 e^{it} e^{a^2(e^{2it}-1)}`.
pub fn quadrature_variances_closed_form(p: KerrParams) -> Result<(f64, f64), KerrError> {
    if p.alpha.im != 0.0 {
        return Err(KerrError::ComplexAlpha(p.alpha));
    }
    if !p.tau.is_finite() {
        return Err(KerrError::NonFiniteTau);
    }
    if !p.alpha.re.is_finite() {
        return Err(FockError::NonFinite("alpha").into());
    }
    let a2 = p.alpha.re * p.alpha.re;
    let t = p.tau;
    let i = C64::i();
    let one = C64::new(1.0, 0.0);
    let radial = (2.0 * a2 * (t.cos() - 1.0)).exp();
    let cross = (i * t + a2 * ((2.0 * i * t).exp() - one)).exp()
        - (2.0 * a2 * ((i * t).exp() - one)).exp();
    let var_x1 = 1.0 + 2.0 * a2 * (1.0 - radial + cross.re);
    let var_x2 = 1.0 + 2.0 * a2 * (1.0 - radial - cross.re);
    Ok((var_x1, var_x2))
}

/// `tau = 2 pi num/den`, kept as an exact rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RevivalFraction {
    num: i64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl RevivalFraction {
    /// Requires `den > 0` and `gcd(num, den) = 1`.
    pub fn new(num: i64, den: u64) -> Result<Self, KerrError> {
        if den == 0 {
            return Err(KerrError::ZeroDenominator);
        }
        if gcd(num.unsigned_abs(), den) != 1 {
            return Err(KerrError::NotCoprime { num, den });
        }
        Ok(RevivalFraction { num, den })
    }

    /// Reduces `num/den` first.
    pub fn reduced(num: i64, den: u64) -> Result<Self, KerrError> {
        if den == 0 {
            return Err(KerrError::ZeroDenominator);
        }
        let g = gcd(num.unsigned_abs(), den).max(1);
        Self::new(num / g as i64, den / g)
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn tau(&self) -> f64 {
        TAU * self.num as f64 / self.den as f64
    }

    /// Kerr phase at level `n`, reduced modulo the period before the
    /// exponential is taken.
    fn phase(&self, n: usize) -> C64 {
        let q = self.den as i128;
        let pairs = (n as i128) * (n as i128 - 1) / 2;
        let k = (self.num as i128 * pairs).rem_euclid(q);
        C64::from_polar(1.0, TAU * k as f64 / q as f64)
    }
}

/// One term `d |alpha e^{i angle}>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionTerm {
    pub coefficient: C64,
    pub angle: f64,
}

/// `sum_j d_j |alpha e^{i theta_j}>` with `theta_j` increasing in `[0, 2 pi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentSuperposition {
    pub alpha: C64,
    pub terms: Vec<SuperpositionTerm>,
}

impl CoherentSuperposition {
    /// CSV rows `angle,coeff_re,coeff_im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle,coeff_re,coeff_im\n");
        for t in &self.terms {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", t.angle, t.coefficient.re, t.coefficient.im);
        }
        out
    }
}

/// Candidate angle sets tried by [`revival_decompose`], in preference order.
#[derive(Clone, Copy, Debug, PartialEq)]
struct AngleSet {
    count: usize,
    offset: f64,
}

impl AngleSet {
    fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.offset + TAU * j as f64 / self.count as f64)
    }
}

/// Least-squares fit of `sum_j d_j e^{i n theta_j} = phase(n)` for
/// `n < rows`. Returns the coefficients and the relative residual, or `None`
/// if the design matrix is rank deficient.
fn fit_phases(angles: &[f64], target: &DVector<C64>) -> Option<(DVector<C64>, f64)> {
    let rows = target.len();
    let design = DMatrix::from_fn(rows, angles.len(), |n, j| C64::from_polar(1.0, n as f64 * angles[j]));
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let max = sv.max();
    let min = sv.min();
    if min <= 1e-10 * max {
        return None;
    }
    let coeffs = svd.solve(target, 0.0).ok()?;
    let residual = (&design * &coeffs - target).norm() / target.norm();
    Some((coeffs, residual))
}

/// Decomposes the Kerr state at `tau = 2 pi num/den` into coherent states.
///
/// The Kerr phase sequence `phase(n)` is periodic in `n`, so dividing the
/// Fock amplitudes by `alpha^n / sqrt(n!)` turns the decomposition into a
/// linear fit of that sequence by `e^{i n theta_j}` over the first
/// `4 den` levels. Angle sets with `den` and `2 den` equally spaced phases,
/// unshifted or shifted by half a step, are tried in that order and the first
/// one reaching a relative residual below `1e-9` wins.
pub fn revival_decompose(alpha: C64, fraction: RevivalFraction) -> Result<CoherentSuperposition, KerrError> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(FockError::NonFinite("alpha").into());
    }
    let q = fraction.den as usize;
    let rows = 4 * q;
    let target = DVector::from_iterator(rows, (0..rows).map(|n| fraction.phase(n)));

    let mut best = f64::INFINITY;
    for count in [q, 2 * q] {
        for offset in [0.0, PI / count as f64] {
            let set = AngleSet { count, offset };
            let angles: Vec<f64> = set.angles().collect();
            let Some((coeffs, residual)) = fit_phases(&angles, &target) else {
                continue;
            };
            best = best.min(residual);
            if residual < 1e-9 {
                let terms = angles
                    .iter()
                    .zip(coeffs.iter())
                    .filter(|(_, d)| d.norm() >= 1e-10)
                    .map(|(&angle, &coefficient)| SuperpositionTerm { coefficient, angle })
                    .collect();
                return Ok(CoherentSuperposition { alpha, terms });
            }
        }
    }
    Err(KerrError::Degenerate { residual: best })
}

/// A reconstructed superposition together with its norm before
/// renormalization. A raw norm far from one means the coefficient set does
/// not describe a physical Kerr state.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub state: StateVector,
    pub raw_norm: f64,
}

/// Sums `d_j coherent(alpha e^{i theta_j}, dim)` amplitude-wise, then
/// normalizes. Each coherent state enters untruncated-normalized, so the raw
/// norm is the physical one up to the truncation tail.
pub fn reconstruct_superposition(s: &CoherentSuperposition, dim: usize) -> Result<Reconstruction, KerrError> {
    if s.terms.is_empty() {
        return Err(KerrError::EmptySuperposition);
    }
    let mut acc = vec![C64::new(0.0, 0.0); dim];
    for t in &s.terms {
        let amps = fock::coherent_amps(s.alpha * C64::from_polar(1.0, t.angle), dim)?;
        for (slot, a) in acc.iter_mut().zip(amps) {
            *slot += t.coefficient * a;
        }
    }
    let raw = StateVector::from_amps(acc)?;
    let raw_norm = raw.norm();
    Ok(Reconstruction { state: raw.normalized()?, raw_norm })
}

/// Variance curve sampled on `points` equally spaced values of `tau` in
/// `[tau_min, tau_max]` (both ends included), computed in the Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceCurve {
    pub rows: Vec<(f64, f64, f64)>,
}

impl VarianceCurve {
    pub fn numerical(alpha: C64, tau_min: f64, tau_max: f64, points: usize, dim: usize) -> Result<Self, KerrError> {
        Self::sample(tau_min, tau_max, points, |tau| {
            let m = fock::quadrature_moments(&kerr_evolve(KerrParams::new(alpha, tau), dim)?);
            Ok((m.var_x1, m.var_x2))
        })
    }

    pub fn closed_form(alpha: C64, tau_min: f64, tau_max: f64, points: usize) -> Result<Self, KerrError> {
        Self::sample(tau_min, tau_max, points, |tau| quadrature_variances_closed_form(KerrParams::new(alpha, tau)))
    }

    fn sample<F>(tau_min: f64, tau_max: f64, points: usize, mut f: F) -> Result<Self, KerrError>
    where
        F: FnMut(f64) -> Result<(f64, f64), KerrError>,
    {
        let step = if points > 1 { (tau_max - tau_min) / (points - 1) as f64 } else { 0.0 };
        let rows = (0..points)
            .map(|i| {
                let tau = tau_min + step * i as f64;
                f(tau).map(|(v1, v2)| (tau, v1, v2))
            })
            .collect::<Result<_, _>>()?;
        Ok(VarianceCurve { rows })
    }

    /// CSV rows `tau,var_x1,var_x2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,var_x1,var_x2\n");
        for (t, v1, v2) in &self.rows {
            let _ = writeln!(out, "{t:.16e},{v1:.16e},{v2:.16e}");
        }
        out
    }
}
