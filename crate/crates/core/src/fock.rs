//! Truncated Fock-space states.
//!
//! A [`StateVector`] holds the amplitudes of a single bosonic mode over the
//! number states `|0>, .., |D-1>`. Everything here is a pure function of its
//! inputs; states are never mutated in place once handed out.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking that a state is normalized.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("truncation dimension must be at least 1")]
    ZeroDimension,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cutoff M = {cutoff} out of range for dimension {dim}")]
    CutoffOutOfRange { cutoff: usize, dim: usize },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("amplitude list has {len} entries but dim = {dim}")]
    LengthMismatch { len: usize, dim: usize },
    #[error("cannot pad a state of dimension {from} down to {to}")]
    PadShrinks { from: usize, to: usize },
}

/// Default truncation for a coherent-state workload: `ceil(|a|^2 + 8|a| + 20)`.
pub fn default_dim(alpha: C64) -> usize {
    let r = alpha.norm();
    (r * r + 8.0 * r + 20.0).ceil() as usize
}

/// Amplitudes over the number states `0..dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct StateVector {
    amps: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    dim: usize,
    amps: Vec<[f64; 2]>,
}

impl TryFrom<RawState> for StateVector {
    type Error = FockError;

    fn try_from(raw: RawState) -> Result<Self, FockError> {
        if raw.amps.len() != raw.dim {
            return Err(FockError::LengthMismatch { len: raw.amps.len(), dim: raw.dim });
        }
        StateVector::from_amps(raw.amps.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl From<StateVector> for RawState {
    fn from(s: StateVector) -> Self {
        RawState {
            dim: s.dim(),
            amps: s.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl StateVector {
    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amps(amps: Vec<C64>) -> Result<Self, FockError> {
        if amps.is_empty() {
            return Err(FockError::ZeroDimension);
        }
        if !amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(FockError::NonFinite("amplitudes"));
        }
        Ok(StateVector { amps })
    }

    /// The number state `|n>` in a space of dimension `dim`.
    pub fn fock(n: usize, dim: usize) -> Result<Self, FockError> {
        if n >= dim {
            return Err(FockError::CutoffOutOfRange { cutoff: n, dim });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[n] = C64::new(1.0, 0.0);
        Ok(StateVector { amps })
    }

    pub fn vacuum(dim: usize) -> Result<Self, FockError> {
        Self::fock(0, dim)
    }

    /// Coherent state `|alpha>` truncated to `dim` levels and renormalized.
    ///
    /// Amplitudes come from the ratio recurrence `c_{n+1} = c_n alpha / sqrt(n+1)`
    /// starting at `exp(-|alpha|^2/2)`, so no factorial is ever formed.
    pub fn coherent(alpha: C64, dim: usize) -> Result<Self, FockError> {
        let amps = coherent_amps(alpha, dim)?;
        StateVector { amps }.normalized()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < NORM_TOL
    }

    pub fn normalized(&self) -> Result<Self, FockError> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(FockError::ZeroNorm);
        }
        Ok(StateVector { amps: self.amps.iter().map(|a| a / norm).collect() })
    }

    /// Occupation probabilities `|c_n|^2`.
    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Zero-pads the state up to `dim` levels.
    pub fn padded(&self, dim: usize) -> Result<Self, FockError> {
        if dim < self.dim() {
            return Err(FockError::PadShrinks { from: self.dim(), to: dim });
        }
        let mut amps = self.amps.clone();
        amps.resize(dim, C64::new(0.0, 0.0));
        Ok(StateVector { amps })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        StateVector { amps: self.amps.iter().map(|a| a * factor).collect() }
    }
}

pub(crate) fn coherent_amps(alpha: C64, dim: usize) -> Result<Vec<C64>, FockError> {
    if dim == 0 {
        return Err(FockError::ZeroDimension);
    }
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(FockError::NonFinite("alpha"));
    }
    let mut amps = Vec::with_capacity(dim);
    let mut cur = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        amps.push(cur);
        cur = cur * alpha / ((n + 1) as f64).sqrt();
    }
    Ok(amps)
}

/// Probability that an untruncated coherent state `|alpha>` has fewer than
/// `dim` quanta, i.e. `sum_{n<dim} e^{-|a|^2} |a|^{2n}/n!`.
pub fn coherent_truncation_weight(alpha: C64, dim: usize) -> Result<f64, FockError> {
    Ok(coherent_amps(alpha, dim)?.iter().map(|a| a.norm_sqr()).sum())
}

/// `<a|b> = sum conj(a_n) b_n`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64, FockError> {
    if a.dim() != b.dim() {
        return Err(FockError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// `|<a|b>|^2` for normalized inputs.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64, FockError> {
    inner_product(a, b).map(|z| z.norm_sqr())
}

/// Outcome of cutting a state off at `n = M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub cutoff: usize,
    pub kept_probability: f64,
    pub fidelity_to_full: f64,
}

/// Keeps levels `0..=cutoff` and renormalizes them.
pub fn truncate(s: &StateVector, cutoff: usize) -> Result<(StateVector, TruncationReport), FockError> {
    if cutoff >= s.dim() {
        return Err(FockError::CutoffOutOfRange { cutoff, dim: s.dim() });
    }
    let head = StateVector { amps: s.amps[..=cutoff].to_vec() };
    let kept = head.norm_sqr();
    let total = s.norm_sqr();
    let out = head.normalized()?;
    let report = TruncationReport {
        cutoff,
        kept_probability: kept,
        // |<s|out>|^2 = kept^2 / kept / total
        fidelity_to_full: kept / total,
    };
    Ok((out, report))
}

/// First and second moments of the quadratures `X1 = a + a^dag` and
/// `X2 = -i(a - a^dag)`. Vacuum variance is 1 in this normalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureMoments {
    pub mean_x1: f64,
    pub mean_x2: f64,
    pub var_x1: f64,
    pub var_x2: f64,
}

/// Quadrature moments by ladder-operator action on the Fock amplitudes.
///
/// The ladder operators act on the state embedded in the untruncated space,
/// so `<a a^dag> = <n> + 1` holds exactly even if the top level is occupied.
pub fn quadrature_moments(s: &StateVector) -> QuadratureMoments {
    let c = &s.amps;
    let d = c.len();
    let mut a1 = C64::new(0.0, 0.0);
    let mut a2 = C64::new(0.0, 0.0);
    let mut n_mean = 0.0;
    for n in 0..d {
        n_mean += n as f64 * c[n].norm_sqr();
        if n + 1 < d {
            a1 += c[n].conj() * c[n + 1] * ((n + 1) as f64).sqrt();
        }
        if n + 2 < d {
            a2 += c[n].conj() * c[n + 2] * (((n + 1) * (n + 2)) as f64).sqrt();
        }
    }
    let norm = s.norm_sqr();
    let (a1, a2, n_mean) = (a1 / norm, a2 / norm, n_mean / norm);
    let mean_x1 = 2.0 * a1.re;
    let mean_x2 = 2.0 * a1.im;
    let sq_x1 = 2.0 * a2.re + 2.0 * n_mean + 1.0;
    let sq_x2 = -2.0 * a2.re + 2.0 * n_mean + 1.0;
    QuadratureMoments {
        mean_x1,
        mean_x2,
        var_x1: (sq_x1 - mean_x1 * mean_x1).max(0.0),
        var_x2: (sq_x2 - mean_x2 * mean_x2).max(0.0),
    }
}

/// `<(-1)^n>`.
pub fn parity_expectation(s: &StateVector) -> f64 {
    s.amps
        .iter()
        .enumerate()
        .map(|(n, a)| if n % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}
