use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
///
/// Values parsed from text (`"0.675"`, `"1/6"`) also carry their exact
/// rational value, which lets closed-form fairness checks decide equality
/// exactly. Arithmetic on the float side is always available.
#[derive(Debug, Clone, PartialEq)]
pub struct Probability {
    value: f64,
    exact: Option<BigRational>,
}

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if !in_unit_interval(value) {
            return Err(Error::InvalidProbability(0));
        }
        Ok(Self { value, exact: None })
    }

    pub fn from_ratio(ratio: BigRational) -> Result<Self> {
        if ratio < BigRational::zero() || ratio > BigRational::one() {
            return Err(Error::InvalidProbability(0));
        }
        let value = ratio.to_f64().ok_or(Error::InvalidProbability(0))?;
        Ok(Self {
            value,
            exact: Some(ratio),
        })
    }

    /// `numer / denom`, kept exact.
    pub fn rational(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidProbability(0));
        }
        Self::from_ratio(BigRational::new(numer.into(), denom.into()))
    }

    pub(crate) fn from_parts(value: f64, exact: Option<BigRational>) -> Self {
        debug_assert!(in_unit_interval(value));
        Self { value, exact }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn is_interior(&self) -> bool {
        self.value > 0.0 && self.value < 1.0
    }

    /// `1 - p`.
    pub fn complement(&self) -> Self {
        Self {
            value: 1.0 - self.value,
            exact: self.exact.as_ref().map(|r| BigRational::one() - r),
        }
    }
}

fn in_unit_interval(value: f64) -> bool {
    (0.0..=1.0).contains(&value)
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) if !r.denom().is_one() && !is_power_of_ten(r.denom()) => {
                write!(f, "{}/{}", r.numer(), r.denom())
            }
            _ => write!(f, "{}", self.value),
        }
    }
}

fn is_power_of_ten(n: &BigInt) -> bool {
    let ten = BigInt::from(10);
    let mut n = n.clone();
    while !n.is_one() {
        if (&n % &ten).is_zero() {
            n /= &ten;
        } else {
            return false;
        }
    }
    true
}

impl FromStr for Probability {
    type Err = Error;

    /// Accepts plain decimals (`0.675`), rationals (`1/6`) and, as a float
    /// fallback without an exact value, scientific notation (`1e-3`).
    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        let parse_err = || Error::ParseProbability(s.to_string());
        if let Some((numer, denom)) = text.split_once('/') {
            let numer: BigInt = numer.trim().parse().map_err(|_| parse_err())?;
            let denom: BigInt = denom.trim().parse().map_err(|_| parse_err())?;
            if denom.is_zero() {
                return Err(parse_err());
            }
            return Self::from_ratio(BigRational::new(numer, denom));
        }
        if let Some(ratio) = parse_plain_decimal(text) {
            let value: f64 = text.parse().map_err(|_| parse_err())?;
            if !in_unit_interval(value) {
                return Err(Error::InvalidProbability(0));
            }
            return Ok(Self {
                value,
                exact: Some(ratio),
            });
        }
        let value: f64 = text.parse().map_err(|_| parse_err())?;
        Self::new(value)
    }
}

fn parse_plain_decimal(text: &str) -> Option<BigRational> {
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if negative {
        numer = -numer;
    }
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(BigRational::new(numer, denom))
}

/// Parses a comma-separated list of probabilities, reporting the offending index.
pub fn parse_list(text: &str) -> Result<Vec<Probability>> {
    text.split(',')
        .enumerate()
        .map(|(i, item)| {
            item.parse::<Probability>().map_err(|err| match err {
                Error::InvalidProbability(_) => Error::InvalidProbability(i),
                other => other,
            })
        })
        .collect()
}
