//! Evolution-parameter input: either a float or an exact `p/q pi` rational.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use kerrcat::kerr::RevivalFraction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tau {
    Float(f64),
    /// `num/den * pi`.
    PiRational { num: i64, den: u64 },
}

impl Tau {
    pub fn value(&self) -> f64 {
        match *self {
            Tau::Float(v) => v,
            Tau::PiRational { num, den } => PI * num as f64 / den as f64,
        }
    }

    /// `tau = 2 pi * fraction`, only available for the exact form.
    pub fn revival_fraction(&self) -> Result<RevivalFraction> {
        match *self {
            Tau::Float(v) => bail!("tau: decompose needs the exact form \"p/q pi\", got float {v}"),
            Tau::PiRational { num, den } => {
                let den2 = den.checked_mul(2).ok_or_else(|| anyhow!("tau: denominator too large"))?;
                RevivalFraction::reduced(num, den2).map_err(|e| anyhow!("tau: {e}"))
            }
        }
    }
}

impl FromStr for Tau {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(frac) = t.strip_suffix("pi") {
            let frac = frac.trim();
            let (num, den) = match frac.split_once('/') {
                Some((n, d)) => (n.trim(), d.trim()),
                None => (frac, "1"),
            };
            let num: i64 = if num.is_empty() { 1 } else { num.parse().map_err(|_| anyhow!("tau: bad numerator in {s:?}"))? };
            let den: u64 = den.parse().map_err(|_| anyhow!("tau: bad denominator in {s:?}"))?;
            if den == 0 {
                bail!("tau: zero denominator in {s:?}");
            }
            return Ok(Tau::PiRational { num, den });
        }
        let v: f64 = t.parse().map_err(|_| anyhow!("tau: expected a number or \"p/q pi\", got {s:?}"))?;
        if !v.is_finite() {
            bail!("tau: must be finite");
        }
        Ok(Tau::Float(v))
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tau::Float(v) => write!(f, "{v}"),
            Tau::PiRational { num, den } => write!(f, "{num}/{den} pi"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        assert_eq!("0.3".parse::<Tau>().unwrap(), Tau::Float(0.3));
        assert_eq!("1/2 pi".parse::<Tau>().unwrap(), Tau::PiRational { num: 1, den: 2 });
        assert_eq!("2/3pi".parse::<Tau>().unwrap(), Tau::PiRational { num: 2, den: 3 });
        assert_eq!("pi".parse::<Tau>().unwrap(), Tau::PiRational { num: 1, den: 1 });
        assert!("1/0 pi".parse::<Tau>().is_err());
        assert!("abc".parse::<Tau>().is_err());
        assert!("inf".parse::<Tau>().is_err());
    }

    #[test]
    fn fraction_of_full_period() {
        let f = "1/2 pi".parse::<Tau>().unwrap().revival_fraction().unwrap();
        assert_eq!((f.num(), f.den()), (1, 4));
        let f = "1/1 pi".parse::<Tau>().unwrap().revival_fraction().unwrap();
        assert_eq!((f.num(), f.den()), (1, 2));
        let f = "2/5 pi".parse::<Tau>().unwrap().revival_fraction().unwrap();
        assert_eq!((f.num(), f.den()), (1, 5));
        assert!(Tau::Float(1.0).revival_fraction().is_err());
    }
}
