//! Exact rational arithmetic used for all probabilities and weights.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational. Every probability, weight, and optimum
/// value in this crate is one of these; floats appear only on the spectral
/// side.
pub type Rational = Ratio<BigInt>;

/// Builds `num/den` without risk of overflow.
pub fn ratio(num: i64, den: i64) -> Rational {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Ratio::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

pub fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}

pub fn is_one(r: &Rational) -> bool {
    r.is_one()
}

/// Renders as `num/den`, or just `num` for integers.
pub fn display(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `num`, `num/den`, with optional sign.
pub fn parse(s: &str) -> Result<Rational> {
    let parts: Vec<&str> = s.split('/').collect();
    let bad = || Error::Invalid(format!("cannot parse rational from {s:?}"));
    match parts.as_slice() {
        [n] => Ok(int(n.trim().parse::<i64>().map_err(|_| bad())?)),
        [n, d] => {
            let num = n.trim().parse::<i64>().map_err(|_| bad())?;
            let den = d.trim().parse::<i64>().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(ratio(num, den))
        }
        _ => Err(bad()),
    }
}

/// Wire form of a rational weight: `{"num": .., "den": ..}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RatioJson {
    pub num: i64,
    pub den: i64,
}

impl RatioJson {
    pub fn to_rational(self) -> Result<Rational> {
        if self.den == 0 {
            return Err(Error::Invalid("rational with zero denominator".into()));
        }
        Ok(ratio(self.num, self.den))
    }

    pub fn from_rational(r: &Rational) -> Result<Self> {
        let num = r.numer().to_i64();
        let den = r.denom().to_i64();
        match (num, den) {
            (Some(num), Some(den)) => Ok(RatioJson { num, den }),
            _ => Err(Error::Invalid(format!(
                "rational {} does not fit the i64 wire format",
                display(r)
            ))),
        }
    }
}

/// Absolute difference as f64, for tolerance checks against float quantities.
pub fn abs_diff_f64(r: &Rational, x: f64) -> f64 {
    (to_f64(r) - x).abs()
}

pub fn abs(r: &Rational) -> Rational {
    Signed::abs(r)
}
