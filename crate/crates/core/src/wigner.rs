//! Wigner functions on phase space.
//!
//! Convention: `W(g) = (2/pi) <psi| D(2g) P |psi>` with `P` the parity
//! operator, so the coherent state `|a>` has `W(g) = (2/pi) e^{-2|g - a|^2}`
//! and peaks at `g = a`. This is the scaling the Kerr double series produces
//! at `tau = 0`, and the Fock-basis evaluator follows it.
//!
//! Two independent evaluators exist:
//! * [`wigner_fock`] works for any [`StateVector`] from displacement matrix
//!   elements (normalized associated Laguerre functions).
//! * [`wigner_kerr_series`] sums the closed double series for the Kerr state
//!   directly from `(alpha, tau)`, without any Fock truncation.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::StateVector;
use crate::kerr::KerrParams;
use crate::mp_series::{self, MpSeries};
use crate::special::displacement_magnitudes;

/// Upper bound on the Wigner function magnitude in this convention.
pub const WIGNER_BOUND: f64 = FRAC_2_PI;

/// Terms allowed per series before giving up.
pub const MAX_SERIES_TERMS: usize = 500;

/// Consecutive small terms required before a series is considered converged.
const SERIES_HYSTERESIS: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum WignerError {
    #[error("series did not converge within {MAX_SERIES_TERMS} terms at gamma = {0}")]
    NonConvergence(C64),
    #[error("series tolerance must be positive")]
    BadTolerance,
    #[error("window has zero area")]
    DegenerateWindow,
    #[error("grid needs at least 2 points per axis, got {nx}x{ny}")]
    TooFewPoints { nx: usize, ny: usize },
    #[error("grid integral {0} is not within 5e-3 of 1; window does not contain the state")]
    PoorlyContained(f64),
}

/// A phase-space coordinate `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub re: f64,
    pub im: f64,
}

impl PhaseSpacePoint {
    pub fn new(re: f64, im: f64) -> Self {
        PhaseSpacePoint { re, im }
    }

    pub fn as_complex(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

impl From<C64> for PhaseSpacePoint {
    fn from(z: C64) -> Self {
        PhaseSpacePoint { re: z.re, im: z.im }
    }
}

/// Wigner function of `s` at one point, from the displaced-parity expansion
///
/// ```text
/// W(g) = (2/pi) [ sum_n (-1)^n |c_n|^2 f_n^(0)
///               + 2 Re sum_{k>=1} sum_m conj(c_{m+k}) c_m (-1)^m e^{ik arg g} f_m^(k) ]
/// ```
///
/// with `f_m^(k)` the normalized Laguerre functions at `x = 4|g|^2`.
pub fn wigner_fock(s: &StateVector, pt: PhaseSpacePoint) -> f64 {
    let mut buf = Vec::with_capacity(s.dim());
    wigner_fock_with(s.amps(), pt.as_complex(), &mut buf)
}

fn wigner_fock_with(c: &[C64], gamma: C64, buf: &mut Vec<f64>) -> f64 {
    let d = c.len();
    let x = 4.0 * gamma.norm_sqr();
    let phase = if gamma.norm_sqr() > 0.0 { gamma / gamma.norm() } else { C64::new(1.0, 0.0) };

    displacement_magnitudes(0, x, d, buf);
    let mut diag = 0.0;
    for (m, f) in buf.iter().enumerate() {
        let term = c[m].norm_sqr() * f;
        diag += if m % 2 == 0 { term } else { -term };
    }

    let mut off = C64::new(0.0, 0.0);
    let mut rot = C64::new(1.0, 0.0);
    for k in 1..d {
        rot *= phase;
        displacement_magnitudes(k, x, d - k, buf);
        let mut acc = C64::new(0.0, 0.0);
        for (m, f) in buf.iter().enumerate() {
            let t = c[m + k].conj() * c[m] * *f;
            if m % 2 == 0 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        off += acc * rot;
    }
    FRAC_2_PI * (diag + 2.0 * off.re)
}

/// Evaluator for the Kerr-state double series
///
/// ```text
/// W = (2/pi) e^{-2|g|^2} e^{-|a|^2} sum_q (2 a* g e^{i tau/2})^q / q! e^{-i tau q^2/2}
///       sum_k (2 a g* e^{-i tau/2})^k / k! e^{i tau k^2/2} e^{-|a|^2 e^{i tau (k-q)}}
/// ```
///
/// The coupling factor `e^{-|a|^2 e^{i tau d}}` depends only on `d = k - q`
/// and is tabulated once. The Gaussian prefactor is split evenly between the
/// two power series so neither grows past `e^{|a|^2/2}`.
///
/// Points where `f64` rounding on the largest terms would exceed `tol` are
/// summed in multiprecision instead; for `|alpha| <= 2` at the default
/// tolerance that never happens.
#[derive(Clone, Debug)]
pub struct KerrSeries {
    params: KerrParams,
    tol: f64,
    coupling: Vec<C64>,
    /// Largest `|coupling|`, bounding every inner term by `|b_k| * coupling_max`.
    coupling_max: f64,
    mp: OnceLock<MpSeries>,
}

impl KerrSeries {
    pub fn new(params: KerrParams, tol: f64) -> Result<Self, WignerError> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(WignerError::BadTolerance);
        }
        let a2 = params.alpha.norm_sqr();
        let span = MAX_SERIES_TERMS as i64;
        let coupling: Vec<C64> = (-span..=span)
            .map(|d| (-a2 * C64::from_polar(1.0, params.tau * d as f64)).exp())
            .collect();
        let coupling_max = coupling.iter().map(|c| c.norm()).fold(0.0, f64::max);
        Ok(KerrSeries { params, tol, coupling, coupling_max, mp: OnceLock::new() })
    }

    fn coupling(&self, d: i64) -> C64 {
        self.coupling[(d + MAX_SERIES_TERMS as i64) as usize]
    }

    /// Inner sums get multiplied by outer coefficients as large as the term
    /// scale before the final cancellation, so they are converged that much
    /// more tightly.
    fn inner_tol(&self, gamma: C64) -> f64 {
        let scale = mp_series::log_term_scale(self.params.alpha.norm(), gamma.norm());
        self.tol * (-scale.max(0.0)).exp()
    }

    /// Whether `pt` goes through the multiprecision path.
    pub fn needs_multiprecision(&self, pt: PhaseSpacePoint) -> bool {
        let scale = mp_series::log_term_scale(self.params.alpha.norm(), pt.as_complex().norm());
        f64::EPSILON * scale.exp() > self.tol
    }

    pub fn eval(&self, pt: PhaseSpacePoint) -> Result<f64, WignerError> {
        let gamma = pt.as_complex();
        if self.needs_multiprecision(pt) {
            let mp = self.mp.get_or_init(|| MpSeries::new(self.params, MAX_SERIES_TERMS));
            return mp.eval(gamma.re, gamma.im, self.tol, self.inner_tol(gamma)).ok_or(WignerError::NonConvergence(gamma));
        }
        let alpha = self.params.alpha;
        let tau = self.params.tau;
        let half = C64::from_polar(1.0, 0.5 * tau);
        let u = 2.0 * alpha.conj() * gamma * half;
        let v = 2.0 * alpha * gamma.conj() * half.conj();
        let start = (-gamma.norm_sqr() - 0.5 * alpha.norm_sqr()).exp();

        let inner_tol = self.inner_tol(gamma);
        // No inner sum exceeds coupling_max * sum_k |b_k| = coupling_max * start * e^{|v|}.
        let inner_bound = self.coupling_max * start * v.norm().exp();
        let mut outer = C64::new(0.0, 0.0);
        let mut a_q = C64::new(start, 0.0);
        let mut quiet = 0;
        for q in 0..MAX_SERIES_TERMS {
            if q > 0 {
                a_q *= u / q as f64;
            }
            let inner = self.inner_sum(q, v, start, gamma, inner_tol)?;
            let qf = q as f64;
            outer += a_q * C64::from_polar(1.0, -0.5 * tau * qf * qf) * inner;
            if converged(a_q.norm() * inner_bound, outer.norm(), self.tol, &mut quiet) {
                return Ok(FRAC_2_PI * outer.re);
            }
        }
        Err(WignerError::NonConvergence(gamma))
    }

    fn inner_sum(&self, q: usize, v: C64, start: f64, gamma: C64, tol: f64) -> Result<C64, WignerError> {
        let tau = self.params.tau;
        let mut sum = C64::new(0.0, 0.0);
        let mut b_k = C64::new(start, 0.0);
        let mut quiet = 0;
        for k in 0..MAX_SERIES_TERMS {
            if k > 0 {
                b_k *= v / k as f64;
            }
            let kf = k as f64;
            sum += b_k * C64::from_polar(1.0, 0.5 * tau * kf * kf) * self.coupling(k as i64 - q as i64);
            if converged(b_k.norm() * self.coupling_max, sum.norm(), tol, &mut quiet) {
                return Ok(sum);
            }
        }
        Err(WignerError::NonConvergence(gamma))
    }
}

/// Hysteresis stop rule. `envelope` bounds the magnitude of the current term
/// and of every later one, so the coupling factor dipping for a few `k - q`
/// cannot end a sum whose tail is still large.
pub(crate) fn converged(envelope: f64, partial: f64, tol: f64, quiet: &mut usize) -> bool {
    if envelope < tol * (partial + 1e-300) {
        *quiet += 1;
    } else {
        *quiet = 0;
    }
    *quiet >= SERIES_HYSTERESIS
}

/// Wigner function of the Kerr state at one point, by the double series.
pub fn wigner_kerr_series(p: KerrParams, pt: PhaseSpacePoint, tol: f64) -> Result<f64, WignerError> {
    KerrSeries::new(p, tol)?.eval(pt)
}

/// Rectangular phase-space window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn square(half_width: f64) -> Self {
        Window { x_min: -half_width, x_max: half_width, y_min: -half_width, y_max: half_width }
    }

    /// `[-(|alpha| + 3.5), |alpha| + 3.5]` on both axes.
    pub fn auto(alpha: C64) -> Self {
        Self::square(alpha.norm() + 3.5)
    }

    fn validate(&self) -> Result<(), WignerError> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min;
        if ok {
            Ok(())
        } else {
            Err(WignerError::DegenerateWindow)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WignerMethod {
    KerrSeries,
    FockParity,
}

impl WignerMethod {
    pub fn label(&self) -> &'static str {
        match self {
            WignerMethod::KerrSeries => "kerr-series",
            WignerMethod::FockParity => "fock-parity",
        }
    }
}

/// Wigner values sampled on `nx * ny` points spanning the window edges
/// inclusively. `values` is row-major with rows of increasing `gamma.im`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub method: WignerMethod,
    pub values: Vec<f64>,
}

fn check_shape(window: &Window, nx: usize, ny: usize) -> Result<(), WignerError> {
    if nx < 2 || ny < 2 {
        return Err(WignerError::TooFewPoints { nx, ny });
    }
    window.validate()
}

impl WignerGrid {
    pub fn dx(&self) -> f64 {
        (self.window.x_max - self.window.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.window.y_max - self.window.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.window.x_min + self.dx() * ix as f64
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.window.y_min + self.dy() * iy as f64
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Midpoint-rule integral, each sample standing for a `dx * dy` cell.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx() * self.dy()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest point-wise difference to a grid of the same shape.
    pub fn max_abs_diff(&self, other: &WignerGrid) -> Option<f64> {
        if self.nx != other.nx || self.ny != other.ny || self.window != other.window {
            return None;
        }
        Some(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// `(gamma, W)` pairs in storage order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.ny).flat_map(move |iy| (0..self.nx).map(move |ix| (self.x(ix), self.y(iy), self.at(ix, iy))))
    }

    /// CSV rows `x,y,w`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,w\n");
        for (x, y, w) in self.points() {
            let _ = writeln!(out, "{x:.16e},{y:.16e},{w:.16e}");
        }
        out
    }

    /// gnuplot `matrix` layout: one line per `y`, columns over `x`, preceded
    /// by a three-line comment header.
    pub fn to_gnuplot(&self) -> String {
        let w = &self.window;
        let mut out = String::new();
        let _ = writeln!(out, "# window x=[{:.16e},{:.16e}] y=[{:.16e},{:.16e}]", w.x_min, w.x_max, w.y_min, w.y_max);
        let _ = writeln!(out, "# resolution nx={} ny={}", self.nx, self.ny);
        let _ = writeln!(out, "# method {}", self.method.label());
        for row in self.values.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

fn sample<F>(window: Window, nx: usize, ny: usize, method: WignerMethod, f: F) -> Result<WignerGrid, WignerError>
where
    F: Fn(C64) -> Result<f64, WignerError> + Sync,
{
    check_shape(&window, nx, ny)?;
    let dx = (window.x_max - window.x_min) / (nx - 1) as f64;
    let dy = (window.y_max - window.y_min) / (ny - 1) as f64;
    let rows: Vec<Vec<f64>> = (0..ny)
        .into_par_iter()
        .map(|iy| {
            let y = window.y_min + dy * iy as f64;
            (0..nx).map(|ix| f(C64::new(window.x_min + dx * ix as f64, y))).collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(WignerGrid { window, nx, ny, method, values: rows.concat() })
}

/// Samples [`wigner_fock`] on a grid.
pub fn wigner_grid(s: &StateVector, window: Window, nx: usize, ny: usize) -> Result<WignerGrid, WignerError> {
    let amps = s.amps();
    sample(window, nx, ny, WignerMethod::FockParity, |g| {
        let mut buf = Vec::with_capacity(amps.len());
        Ok(wigner_fock_with(amps, g, &mut buf))
    })
}

/// Samples the Kerr double series on a grid.
pub fn wigner_grid_kerr_series(
    p: KerrParams,
    window: Window,
    nx: usize,
    ny: usize,
    tol: f64,
) -> Result<WignerGrid, WignerError> {
    let series = KerrSeries::new(p, tol)?;
    sample(window, nx, ny, WignerMethod::KerrSeries, |g| series.eval(g.into()))
}

/// Riemann sum of `|min(W, 0)|` over the grid.
pub fn negativity_volume(g: &WignerGrid) -> Result<f64, WignerError> {
    let integral = g.integral();
    if (integral - 1.0).abs() > 5e-3 {
        return Err(WignerError::PoorlyContained(integral));
    }
    Ok(g.values.iter().map(|w| (-w).max(0.0)).sum::<f64>() * g.dx() * g.dy())
}

/// Analytic Wigner function of the coherent state, for reference.
pub fn coherent_wigner(alpha: C64, pt: PhaseSpacePoint) -> f64 {
    2.0 / PI * (-2.0 * (pt.as_complex() - alpha).norm_sqr()).exp()
}
