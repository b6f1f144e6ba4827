//! Laguerre polynomials and the normalized Laguerre functions that appear in
//! displacement-operator matrix elements.

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by the three-term recurrence.
///
/// Only suitable where the polynomial itself stays representable, i.e. small
/// `x` (Lamb-Dicke factors). Use [`displacement_magnitudes`] for phase-space
/// work.
pub fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln(k!)` by direct summation; `k` is always a Fock index here.
pub(crate) fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Normalized Laguerre functions
/// `f_m = sqrt(m!/(m+k)!) x^{k/2} e^{-x/2} L_m^{(k)}(x)` for `m = 0..len`.
///
/// These are the magnitudes `|<m+k|D(beta)|m>|` with `x = |beta|^2`, bounded by
/// one, so the recurrence runs on O(1) quantities and never overflows. The
/// prefactor of the first term is assembled in log space.
pub fn displacement_magnitudes(k: usize, x: f64, len: usize, out: &mut Vec<f64>) {
    out.clear();
    if len == 0 {
        return;
    }
    let f0 = if k == 0 {
        (-0.5 * x).exp()
    } else if x == 0.0 {
        0.0
    } else {
        (0.5 * k as f64 * x.ln() - 0.5 * x - 0.5 * ln_factorial(k)).exp()
    };
    out.push(f0);
    if len == 1 {
        return;
    }
    let kf = k as f64;
    out.push(f0 * (1.0 + kf - x) / (1.0 + kf).sqrt());
    for j in 1..len - 1 {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * out[j] - (jf * (jf + kf)).sqrt() * out[j - 1])
            / ((jf + 1.0) * (jf + 1.0 + kf)).sqrt();
        out.push(next);
    }
}
