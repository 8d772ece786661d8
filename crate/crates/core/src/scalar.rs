//! Exact rationals, a small scalar trait shared by exact and float code paths,
//! and serde helpers for the `"num/den"` text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Arbitrary precision rational.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `base^e` for a possibly negative exponent.
pub fn qpow(base: &Q, e: i64) -> Q {
    let p = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Natural log of a positive big integer, valid far beyond the f64 range.
pub fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap().ln()
    } else {
        let shift = bits - 64;
        let top: BigInt = x >> shift;
        top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Natural log of a positive rational.
pub fn ln_q(x: &Q) -> f64 {
    assert!(x.is_positive(), "ln of non-positive rational");
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// Float value of a rational that may have huge numerator and denominator.
pub fn q_to_f64(x: &Q) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b != 0.0 => {
            let v = a / b;
            if v != 0.0 && v.is_finite() {
                return v;
            }
        }
        _ => {}
    }
    let s = if x.is_negative() { -1.0 } else { 1.0 };
    s * ln_q(&x.abs()).exp()
}

/// Always `num/den`, including `n/1` for integers.
pub fn q_to_string(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Accepts `num/den`, a plain integer, or a finite decimal like `-0.25`.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::arg("rational", format!("cannot parse `{s}`"));
    if let Some((a, b)) = t.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| bad())?;
        let d: BigInt = b.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::arg("rational", format!("zero denominator in `{s}`")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

/// Field operations needed by the extension and energy code, available for
/// both exact rationals and `f64`.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_ratio(n: i64, d: i64) -> Self;
    fn from_q(x: &Q) -> Self;
    fn to_f64(&self) -> f64;
    fn abs_val(&self) -> Self;
}

impl Scalar for f64 {
    fn from_ratio(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }
    fn from_q(x: &Q) -> Self {
        q_to_f64(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for Q {
    fn from_ratio(n: i64, d: i64) -> Self {
        q(n, d)
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn to_f64(&self) -> f64 {
        q_to_f64(self)
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// `#[serde(with = "q_serde")]` for a single rational.
pub mod q_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&q_to_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "q3_serde")]` for a triple of rationals.
pub mod q3_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &[Q; 3], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = x.iter().map(q_to_string).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<[Q; 3], D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        if v.len() != 3 {
            return Err(serde::de::Error::custom("expected three values"));
        }
        let mut out = [Q::zero(), Q::zero(), Q::zero()];
        for (o, s) in out.iter_mut().zip(&v) {
            *o = parse_q(s).map_err(serde::de::Error::custom)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_q("-7").unwrap(), qi(-7));
        assert_eq!(parse_q("-0.25").unwrap(), q(-1, 4));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
    }

    #[test]
    fn string_roundtrip() {
        for x in [q(-3, 7), qi(5), Q::zero()] {
            assert_eq!(parse_q(&q_to_string(&x)).unwrap(), x);
        }
        assert_eq!(q_to_string(&qi(5)), "5/1");
    }

    #[test]
    fn huge_logs() {
        let x = qpow(&q(3, 5), 2000);
        let want = 2000.0 * (0.6f64).ln();
        assert!((ln_q(&x) - want).abs() < 1e-9);
        assert!(q_to_f64(&x) == 0.0 || q_to_f64(&x) < 1e-300);
        let y = qpow(&q(2, 3), 300);
        assert!((q_to_f64(&y) / (2.0f64 / 3.0).powi(300) - 1.0).abs() < 1e-12);
    }
}
