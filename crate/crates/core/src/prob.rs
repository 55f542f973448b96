//! Source bias values.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::number::{Float, Number};

/// A probability `p` in `(0, 1)`, kept exact whenever it is rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Probability {
    Rational(BigRational),
    /// `1/sqrt(2)`
    InvSqrt2,
    /// `1 - 1/e`
    OneMinusInvE,
}

impl Probability {
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::BadProbability(format!("{num}/{den}")));
        }
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Result<Self> {
        if r <= BigRational::zero() || r >= BigRational::one() {
            return Err(Error::ProbabilityOutOfRange(r.to_string()));
        }
        Ok(Probability::Rational(r))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Probability::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_float(&self, precision: usize) -> Float {
        match self {
            Probability::Rational(r) => Float::from_rational(r, precision),
            Probability::InvSqrt2 => {
                let one = Float::from_u64(1, precision);
                one.div(&Float::from_u64(2, precision).sqrt())
            }
            Probability::OneMinusInvE => {
                let one = Float::from_u64(1, precision);
                let inv_e = one.div(&one.exp());
                one.sub(&inv_e)
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(80).to_f64()
    }

    /// `floor(p * 2^64)`, the comparison threshold used by the bit source.
    pub fn threshold_u64(&self) -> u64 {
        let scale = BigInt::one() << 64;
        let scaled = match self {
            Probability::Rational(r) => (r * BigRational::from_integer(scale)).floor().to_integer(),
            other => {
                // 192 bits leaves ample guard bits for the floor.
                other.to_float(192).mul(&Float::from_bigint(&scale, 192)).floor_to_bigint()
            }
        };
        u64::try_from(scaled).unwrap_or(u64::MAX)
    }
}

fn parse_decimal_exact(s: &str) -> Option<BigRational> {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(digits, den))
}

impl FromStr for Probability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "1/sqrt2" | "1/sqrt(2)" => return Ok(Probability::InvSqrt2),
            "1-1/e" | "1-e^-1" | "1-exp(-1)" => return Ok(Probability::OneMinusInvE),
            _ => {}
        }
        let value = if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| Error::BadProbability(s.to_string()))?;
            let d: BigInt = d.trim().parse().map_err(|_| Error::BadProbability(s.to_string()))?;
            if d.is_zero() {
                return Err(Error::BadProbability(s.to_string()));
            }
            BigRational::new(n, d)
        } else {
            parse_decimal_exact(t).ok_or_else(|| Error::BadProbability(s.to_string()))?
        };
        Probability::from_rational(value)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probability::Rational(r) => {
                // Prefer a terminating decimal when one exists.
                let mut den = r.denom().clone();
                for prime in [2u32, 5] {
                    let p = BigInt::from(prime);
                    while (&den % &p).is_zero() {
                        den /= &p;
                    }
                }
                if den.is_one() {
                    write!(f, "{}", r.to_decimal(40))
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Probability::InvSqrt2 => f.write_str("1/sqrt2"),
            Probability::OneMinusInvE => f.write_str("1-1/e"),
        }
    }
}
