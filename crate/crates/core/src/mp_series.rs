//! Multiprecision evaluation of the Kerr double series.
//!
//! Individual terms of the series reach `e^{4|a||g| - 2|g|^2}`, up to
//! `e^{2|a|^2}` on the ring `|g| = |a|`, while the sum stays below `2/pi`.
//! In `f64` that cancellation leaves nothing for `|a| >~ 3`, so the terms are
//! carried with `2|a|^2 / ln 2` extra bits plus a fixed guard.

use rug::{Assign, Float};

use crate::kerr::KerrParams;
use crate::wigner::converged;

const GUARD_BITS: u32 = 40;

/// Natural log of the largest total term magnitude at `|gamma|`, with the
/// coupling factor bounded by `e^{|alpha|^2}`.
pub(crate) fn log_term_scale(alpha_abs: f64, gamma_abs: f64) -> f64 {
    4.0 * alpha_abs * gamma_abs - 2.0 * gamma_abs * gamma_abs
}

#[derive(Clone, Debug)]
struct Cx {
    re: Float,
    im: Float,
}

impl Cx {
    fn from_f64(prec: u32, re: f64, im: f64) -> Cx {
        Cx { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    /// `r e^{i phi}`.
    fn polar(r: &Float, phi: &Float) -> Cx {
        let (s, c) = phi.clone().sin_cos(Float::new(phi.prec()));
        Cx { re: c * r, im: s * r }
    }

    fn mul(&self, o: &Cx) -> Cx {
        let p = self.re.prec();
        Cx {
            re: Float::with_val(p, &self.re * &o.re - &self.im * &o.im),
            im: Float::with_val(p, &self.re * &o.im + &self.im * &o.re),
        }
    }

    fn scale(&mut self, s: &Float) {
        self.re *= s;
        self.im *= s;
    }

    fn div_u(&mut self, k: u64) {
        self.re /= k;
        self.im /= k;
    }

    /// `self += a * b`, reusing `tmp` so that no allocation happens. Plain
    /// multiply-then-add is markedly faster than MPFR's fused variant here.
    fn add_product(&mut self, a: &Cx, b: &Cx, tmp: &mut Float) {
        tmp.assign(&a.re * &b.re);
        self.re += &*tmp;
        tmp.assign(&a.im * &b.im);
        self.re -= &*tmp;
        tmp.assign(&a.re * &b.im);
        self.im += &*tmp;
        tmp.assign(&a.im * &b.re);
        self.im += &*tmp;
    }

    fn conj(&self) -> Cx {
        Cx { re: self.re.clone(), im: -self.im.clone() }
    }

    fn norm_f64(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }
}

/// Tables that depend only on `(alpha, tau)`.
#[derive(Clone, Debug)]
pub(crate) struct MpSeries {
    prec: u32,
    alpha: Cx,
    a2: Float,
    /// `e^{i tau/2}`.
    half: Cx,
    /// `e^{i tau n^2 / 2}` for `n < max_terms`.
    chirp: Vec<Cx>,
    /// `e^{-|a|^2 e^{i tau d}}` for `|d| < max_terms`, offset by `max_terms`.
    coupling: Vec<Cx>,
    coupling_max: f64,
    max_terms: usize,
}

impl MpSeries {
    pub(crate) fn new(p: KerrParams, max_terms: usize) -> MpSeries {
        let a2_f64 = p.alpha.norm_sqr();
        let prec = 53 + (2.0 * a2_f64 / std::f64::consts::LN_2).ceil() as u32 + GUARD_BITS;
        let tau = Float::with_val(prec, p.tau);
        let a2 = {
            let alpha = Cx::from_f64(prec, p.alpha.re, p.alpha.im);
            Float::with_val(prec, alpha.re.square_ref()) + Float::with_val(prec, alpha.im.square_ref())
        };
        let one = Float::with_val(prec, 1);
        let chirp = (0..max_terms)
            .map(|n| {
                let n2 = Float::with_val(prec, n as u64 * n as u64);
                Cx::polar(&one, &(Float::with_val(prec, &tau * &n2) / 2u32))
            })
            .collect();
        let span = max_terms as i64;
        let coupling: Vec<Cx> = (-span..=span)
            .map(|d| {
                let angle = Float::with_val(prec, &tau * d);
                let (s, c) = angle.sin_cos(Float::new(prec));
                let mag = Float::with_val(prec, -(c * &a2)).exp();
                let phase = -(s * &a2);
                Cx::polar(&mag, &phase)
            })
            .collect();
        let coupling_max = (-span..=span).map(|d| -a2_f64 * (p.tau * d as f64).cos()).fold(f64::MIN, f64::max).exp();
        MpSeries {
            prec,
            coupling_max,
            alpha: Cx::from_f64(prec, p.alpha.re, p.alpha.im),
            half: Cx::polar(&one, &(tau / 2u32)),
            a2,
            chirp,
            coupling,
            max_terms,
        }
    }

    fn coupling(&self, d: i64) -> &Cx {
        &self.coupling[(d + self.max_terms as i64) as usize]
    }

    /// Same series and termination rule as the `f64` evaluator. Returns the
    /// real part of the double sum times `2/pi`, or `None` on non-convergence.
    pub(crate) fn eval(&self, gamma_re: f64, gamma_im: f64, tol: f64, inner_tol: f64) -> Option<f64> {
        let p = self.prec;
        let gamma = Cx::from_f64(p, gamma_re, gamma_im);
        let two = Float::with_val(p, 2);
        let mut u = self.alpha.conj().mul(&gamma).mul(&self.half);
        u.scale(&two);
        let mut v = self.alpha.mul(&gamma.conj()).mul(&self.half.conj());
        v.scale(&two);
        let g2 = Float::with_val(p, gamma.re.square_ref()) + Float::with_val(p, gamma.im.square_ref());
        let start = {
            let half_a2 = Float::with_val(p, &self.a2 / 2u32);
            (-(g2 + half_a2)).exp()
        };

        let inner_bound = self.coupling_max * start.to_f64() * v.norm_f64().exp();
        let mut b_norms: Vec<f64> = Vec::new();

        // b_k e^{i tau k^2/2} does not depend on q; extended on demand.
        let mut inner_terms: Vec<Cx> = Vec::new();
        let mut b_k = Cx { re: start.clone(), im: Float::new(p) };

        let mut tmp = Float::new(p);
        let mut outer = Cx::from_f64(p, 0.0, 0.0);
        let mut a_q = Cx { re: start.clone(), im: Float::new(p) };
        let mut quiet = 0;
        for q in 0..self.max_terms {
            if q > 0 {
                a_q = a_q.mul(&u);
                a_q.div_u(q as u64);
            }
            let mut inner = Cx::from_f64(p, 0.0, 0.0);
            let mut inner_quiet = 0;
            let mut done = false;
            for k in 0..self.max_terms {
                if k == inner_terms.len() {
                    if k > 0 {
                        b_k = b_k.mul(&v);
                        b_k.div_u(k as u64);
                    }
                    inner_terms.push(b_k.mul(&self.chirp[k]));
                    b_norms.push(b_k.norm_f64());
                }
                inner.add_product(&inner_terms[k], self.coupling(k as i64 - q as i64), &mut tmp);
                if converged(b_norms[k] * self.coupling_max, inner.norm_f64(), inner_tol, &mut inner_quiet) {
                    done = true;
                    break;
                }
            }
            if !done {
                return None;
            }
            outer.add_product(&a_q.mul(&self.chirp[q].conj()), &inner, &mut tmp);
            if converged(a_q.norm_f64() * inner_bound, outer.norm_f64(), tol, &mut quiet) {
                return Some(std::f64::consts::FRAC_2_PI * outer.re.to_f64());
            }
        }
        None
    }
}
