//! Scalar abstraction: exact rationals and complex floats behind one trait.
//!
//! Every evaluator in this crate is generic over [`Scalar`]. The exact
//! implementation ([`Rat`]) never rounds; square roots exist only for
//! perfect squares and anything else is a hard error. The float
//! implementation ([`Cx`]) is a complex `f64` and compares with an explicit
//! tolerance supplied at the comparison site.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of {0} is not rational")]
    InexactSqrt(String),
    #[error("cannot parse scalar from {0}")]
    Unparseable(String),
}

/// Field operations plus the handful of extras the state sums need.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Sized
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    /// Exact rational constant p/q. Panics on q = 0.
    fn from_ratio(p: i64, q: i64) -> Self;
    /// Lift a float constant. The exact implementation accepts only values
    /// that are honestly integral (so irrational constants cannot sneak
    /// into exact arithmetic); the float implementation always succeeds.
    fn from_f64(x: f64) -> Result<Self, ScalarError>;
    fn is_zero(&self) -> bool;
    fn recip(&self) -> Result<Self, ScalarError>;
    /// Square root. Exact mode: perfect squares only. Float mode: the
    /// principal branch (positive root for non-negative reals).
    fn sqrt(&self) -> Result<Self, ScalarError>;
    /// Complex conjugate; identity on rationals.
    fn conj(&self) -> Self;
    /// Equality up to `tol` in absolute value; exact equality when `tol`
    /// is zero or the scalar is exact.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;
    /// |self| as f64, for residual reporting only.
    fn abs_f64(&self) -> f64;
    /// True for the exact rational implementation.
    fn is_exact() -> bool;
    fn pow_i(&self, n: i64) -> Result<Self, ScalarError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..n.unsigned_abs() {
            acc = acc * base.clone();
        }
        Ok(acc)
    }
    fn to_json(&self) -> serde_json::Value;
    fn from_json(v: &serde_json::Value) -> Result<Self, ScalarError>;
    /// Render with full precision (17 significant digits in float mode,
    /// `p/q` in exact mode).
    fn render(&self) -> String;
}

/// Exact arbitrary-precision rational scalar.
#[derive(Clone, PartialEq, Debug)]
pub struct Rat(pub BigRational);

impl Rat {
    pub fn new(p: i64, q: i64) -> Self {
        Rat(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }
    pub fn from_big(r: BigRational) -> Self {
        Rat(r)
    }
}

fn bigint_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r.clone() * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Parse "p/q" or "p" into an exact rational.
pub fn parse_ratio_str(s: &str) -> Result<BigRational, ScalarError> {
    let s = s.trim();
    let mk_err = || ScalarError::Unparseable(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| mk_err())?;
        let q: BigInt = q.trim().parse().map_err(|_| mk_err())?;
        if q.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(BigRational::new(p, q))
    } else {
        let p: BigInt = s.parse().map_err(|_| mk_err())?;
        Ok(BigRational::from_integer(p))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        Rat(self.0 + rhs.0)
    }
}
impl Sub for Rat {
    type Output = Rat;
    fn sub(self, rhs: Rat) -> Rat {
        Rat(self.0 - rhs.0)
    }
}
impl Mul for Rat {
    type Output = Rat;
    fn mul(self, rhs: Rat) -> Rat {
        Rat(self.0 * rhs.0)
    }
}
impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Scalar for Rat {
    fn zero() -> Self {
        Rat(BigRational::zero())
    }
    fn one() -> Self {
        Rat(BigRational::one())
    }
    fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        Rat::new(p, q)
    }
    fn from_f64(x: f64) -> Result<Self, ScalarError> {
        if x.fract() == 0.0 && x.abs() <= 9.0e15 {
            Ok(Rat::from_int(x as i64))
        } else {
            Err(ScalarError::Unparseable(format!(
                "{x} is not an integer; exact mode cannot hold irrational constants"
            )))
        }
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn recip(&self) -> Result<Self, ScalarError> {
        if self.0.is_zero() {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(Rat(self.0.recip()))
        }
    }
    fn sqrt(&self) -> Result<Self, ScalarError> {
        let p = bigint_sqrt(self.0.numer());
        let q = bigint_sqrt(self.0.denom());
        match (p, q) {
            (Some(p), Some(q)) => Ok(Rat(BigRational::new(p, q))),
            _ => Err(ScalarError::InexactSqrt(self.0.to_string())),
        }
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn abs_f64(&self) -> f64 {
        self.0.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
    fn is_exact() -> bool {
        true
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.0.to_string())
    }
    fn from_json(v: &serde_json::Value) -> Result<Self, ScalarError> {
        match v {
            serde_json::Value::String(s) => parse_ratio_str(s).map(Rat),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Rat::from_int(i))
                } else {
                    Err(ScalarError::Unparseable(n.to_string()))
                }
            }
            other => Err(ScalarError::Unparseable(other.to_string())),
        }
    }
    fn render(&self) -> String {
        self.0.to_string()
    }
}

/// Complex floating-point scalar.
#[derive(Clone, PartialEq, Debug)]
pub struct Cx(pub Complex64);

impl Cx {
    pub fn new(re: f64, im: f64) -> Self {
        Cx(Complex64::new(re, im))
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl Add for Cx {
    type Output = Cx;
    fn add(self, rhs: Cx) -> Cx {
        Cx(self.0 + rhs.0)
    }
}
impl Sub for Cx {
    type Output = Cx;
    fn sub(self, rhs: Cx) -> Cx {
        Cx(self.0 - rhs.0)
    }
}
impl Mul for Cx {
    type Output = Cx;
    fn mul(self, rhs: Cx) -> Cx {
        Cx(self.0 * rhs.0)
    }
}
impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx(-self.0)
    }
}

impl Scalar for Cx {
    fn zero() -> Self {
        Cx(Complex64::new(0.0, 0.0))
    }
    fn one() -> Self {
        Cx(Complex64::new(1.0, 0.0))
    }
    fn from_int(n: i64) -> Self {
        Cx(Complex64::new(n as f64, 0.0))
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Cx(Complex64::new(p as f64 / q as f64, 0.0))
    }
    fn from_f64(x: f64) -> Result<Self, ScalarError> {
        Ok(Cx::new(x, 0.0))
    }
    fn is_zero(&self) -> bool {
        self.0.norm() == 0.0
    }
    fn recip(&self) -> Result<Self, ScalarError> {
        if self.0.norm() == 0.0 {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(Cx(self.0.inv()))
        }
    }
    fn sqrt(&self) -> Result<Self, ScalarError> {
        Ok(Cx(self.0.sqrt()))
    }
    fn conj(&self) -> Self {
        Cx(self.0.conj())
    }
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.0 - other.0).norm() <= tol
    }
    fn abs_f64(&self) -> f64 {
        self.0.norm()
    }
    fn is_exact() -> bool {
        false
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::json!([self.0.re, self.0.im])
    }
    fn from_json(v: &serde_json::Value) -> Result<Self, ScalarError> {
        match v {
            serde_json::Value::Array(xs) if xs.len() == 2 => {
                let re = xs[0].as_f64().ok_or_else(|| ScalarError::Unparseable(v.to_string()))?;
                let im = xs[1].as_f64().ok_or_else(|| ScalarError::Unparseable(v.to_string()))?;
                Ok(Cx::new(re, im))
            }
            serde_json::Value::Number(n) => {
                let re = n.as_f64().ok_or_else(|| ScalarError::Unparseable(v.to_string()))?;
                Ok(Cx::new(re, 0.0))
            }
            // Exact rational text is accepted and converted once, up front.
            serde_json::Value::String(s) => {
                let r = parse_ratio_str(s)?;
                let re = r.to_f64().ok_or_else(|| ScalarError::Unparseable(s.clone()))?;
                Ok(Cx::new(re, 0.0))
            }
            other => Err(ScalarError::Unparseable(other.to_string())),
        }
    }
    fn render(&self) -> String {
        if self.0.im == 0.0 {
            format!("{:.16e}", self.0.re)
        } else {
            format!("{:.16e}{:+.16e}i", self.0.re, self.0.im)
        }
    }
}

/// Sum a slice of scalars.
pub fn sum<S: Scalar>(items: impl IntoIterator<Item = S>) -> S {
    items.into_iter().fold(S::zero(), |a, b| a + b)
}

/// Product of a slice of scalars.
pub fn product<S: Scalar>(items: impl IntoIterator<Item = S>) -> S {
    items.into_iter().fold(S::one(), |a, b| a * b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_sqrt_is_exact_or_fails() {
        assert_eq!(Rat::new(9, 4).sqrt().unwrap(), Rat::new(3, 2));
        assert_eq!(Rat::new(0, 1).sqrt().unwrap(), Rat::new(0, 1));
        assert!(Rat::new(2, 1).sqrt().is_err());
        assert!(Rat::new(-1, 1).sqrt().is_err());
    }

    #[test]
    fn ratio_parsing_round_trips() {
        let r = parse_ratio_str("-22/7").unwrap();
        assert_eq!(Rat(r).render(), "-22/7");
        assert!(parse_ratio_str("3/0").is_err());
        assert!(parse_ratio_str("x").is_err());
    }

    #[test]
    fn complex_compare_uses_tolerance() {
        let a = Cx::new(1.0, 0.0);
        let b = Cx::new(1.0 + 1e-12, 0.0);
        assert!(a.approx_eq(&b, 1e-9));
        assert!(!a.approx_eq(&b, 1e-15));
    }

    #[test]
    fn integer_powers_handle_negatives() {
        let two = Rat::from_int(2);
        assert_eq!(two.pow_i(-3).unwrap(), Rat::new(1, 8));
        assert_eq!(two.pow_i(0).unwrap(), Rat::from_int(1));
    }

    #[test]
    fn json_round_trip_both_modes() {
        let r = Rat::new(-5, 3);
        assert_eq!(Rat::from_json(&r.to_json()).unwrap(), r);
        let c = Cx::new(0.5, -2.0);
        assert_eq!(Cx::from_json(&c.to_json()).unwrap(), c);
    }
}
