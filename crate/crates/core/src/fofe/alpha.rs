use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A forgetting factor together with its arithmetic mode.
///
/// Exact-rational mode is required by the lossless decoder; float mode is
/// what feature extraction and training use.
#[derive(Debug, Clone, PartialEq)]
pub enum Alpha {
    Float(f64),
    Exact(BigRational),
}

impl Alpha {
    pub fn float(value: f64) -> Result<Self> {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::Config(format!(
                "forgetting factor must be in (0, 1), got {value}"
            )));
        }
        Ok(Alpha::Float(value))
    }

    pub fn exact(value: BigRational) -> Result<Self> {
        if !(value.is_positive() && value < BigRational::one()) {
            return Err(Error::Config(format!(
                "forgetting factor must be in (0, 1), got {value}"
            )));
        }
        Ok(Alpha::Exact(value))
    }

    /// Parse `"p/q"` as exact-rational, anything else as a float literal.
    pub fn parse(s: &str) -> Result<Self> {
        if s.contains('/') {
            Alpha::exact(parse_rational(s)?)
        } else {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse forgetting factor {s:?}")))?;
            Alpha::float(v)
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Alpha::Float(v) => *v,
            Alpha::Exact(r) => rational_to_f64(r),
        }
    }

    pub fn as_exact(&self) -> Result<BigRational> {
        match self {
            Alpha::Exact(r) => Ok(r.clone()),
            Alpha::Float(_) => Err(Error::Mode(
                "exact-rational forgetting factor required".into(),
            )),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Alpha::Exact(_))
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Float(v) => write!(f, "{v}"),
            Alpha::Exact(r) => write!(f, "{r}"),
        }
    }
}

/// Parse `"p/q"` or a finite decimal (`"0.25"`) into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|_| Error::Config(format!("bad rational numerator in {s:?}")))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|_| Error::Config(format!("bad rational denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Config(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    // Finite decimal: digits[.digits]
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    let n = BigInt::from_str(&digits)
        .map_err(|_| Error::Config(format!("cannot parse {s:?} as a rational")))?;
    let d = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(n, d))
}

fn rational_to_f64(r: &BigRational) -> f64 {
    // Good enough for factors in (0,1) with small denominators.
    let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    n / d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ratio_and_decimal() {
        assert_eq!(
            Alpha::parse("1/2").unwrap().as_exact().unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
        assert_eq!(Alpha::parse("0.5").unwrap().as_f64(), 0.5);
        assert_eq!(
            parse_rational("0.25").unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(4))
        );
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Alpha::parse("0").is_err());
        assert!(Alpha::parse("1").is_err());
        assert!(Alpha::parse("3/2").is_err());
        assert!(Alpha::parse("-0.5").is_err());
    }

    #[test]
    fn float_mode_refuses_exact_access() {
        assert!(Alpha::float(0.5).unwrap().as_exact().is_err());
    }
}
