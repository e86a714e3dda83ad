//! The exponent r of Δ^r, kept exact when rational.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerKind {
    Rational,
    Irrational,
}

/// r in (0, 1). Rational powers carry coprime `alpha / beta`; irrational
/// ones carry only `value` and are never approximated by a fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalPower {
    pub kind: PowerKind,
    pub alpha: u32,
    pub beta: u32,
    pub value: f64,
}

impl RationalPower {
    pub fn rational(alpha: u32, beta: u32) -> Result<Self> {
        if alpha == 0 || beta == 0 || alpha >= beta {
            return Err(Error::InvalidPower(format!("{alpha}/{beta} is not in (0,1)")));
        }
        let g = alpha.gcd(&beta);
        let (alpha, beta) = (alpha / g, beta / g);
        Ok(Self { kind: PowerKind::Rational, alpha, beta, value: alpha as f64 / beta as f64 })
    }

    pub fn irrational(value: f64) -> Result<Self> {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::InvalidPower(format!("{value} is not in (0,1)")));
        }
        Ok(Self { kind: PowerKind::Irrational, alpha: 0, beta: 0, value })
    }

    pub fn half() -> Self {
        Self::rational(1, 2).expect("1/2 is valid")
    }

    pub fn is_rational(&self) -> bool {
        self.kind == PowerKind::Rational
    }

    pub fn as_ratio(&self) -> Option<Ratio<i64>> {
        self.is_rational().then(|| Ratio::new(self.alpha as i64, self.beta as i64))
    }

    /// True when `r * m` is an integer (always false for irrational r unless m = 0).
    pub fn times_is_integer(&self, m: i64) -> bool {
        if m == 0 {
            return true;
        }
        self.is_rational() && m % self.beta as i64 == 0
    }
}

impl fmt::Display for RationalPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PowerKind::Rational => write!(f, "{}/{}", self.alpha, self.beta),
            PowerKind::Irrational => write!(f, "{}", self.value),
        }
    }
}

impl FromStr for RationalPower {
    type Err = Error;

    /// `"a/b"` parses exactly; a decimal parses as an irrational-flagged real.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let a: u32 = a.trim().parse().map_err(|_| Error::InvalidPower(s.to_string()))?;
            let b: u32 = b.trim().parse().map_err(|_| Error::InvalidPower(s.to_string()))?;
            Self::rational(a, b)
        } else {
            let v: f64 = s.parse().map_err(|_| Error::InvalidPower(s.to_string()))?;
            Self::irrational(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_reduce_and_decimals_stay_irrational() {
        let r: RationalPower = "2/4".parse().unwrap();
        assert_eq!((r.alpha, r.beta), (1, 2));
        let q: RationalPower = "0.5".parse().unwrap();
        assert_eq!(q.kind, PowerKind::Irrational);
        assert!("3/2".parse::<RationalPower>().is_err());
        assert!("1".parse::<RationalPower>().is_err());
    }

    #[test]
    fn integer_multiples() {
        let r = RationalPower::rational(1, 3).unwrap();
        assert!(r.times_is_integer(6));
        assert!(!r.times_is_integer(4));
        assert!(!RationalPower::irrational(0.7).unwrap().times_is_integer(10));
    }
}
