//! Exact arithmetic in the real quadratic field Q(√2).
//!
//! A [`Scalar`] is `rat + surd·√2` with both components arbitrary-precision
//! rationals. Every probability, correlator and bound in the crate lives
//! here, so `1/√2` and `2^{n-1/2}` compare exactly against rationals.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// `rat + surd·√2`, canonical: components are reduced with positive
/// denominators, so structural equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    rat: BigRational,
    surd: BigRational,
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Scalar {
    pub fn new(rat: BigRational, surd: BigRational) -> Self {
        Scalar { rat, surd }
    }

    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_integer(1)
    }

    pub fn from_integer(n: i64) -> Self {
        Scalar::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    /// The rational `num/den`. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "Scalar::ratio with zero denominator");
        Scalar::new(ratio(num, den), BigRational::zero())
    }

    /// `(rn/rd) + (sn/sd)·√2`.
    pub fn from_parts(rn: i64, rd: i64, sn: i64, sd: i64) -> Self {
        assert!(
            rd != 0 && sd != 0,
            "Scalar::from_parts with zero denominator"
        );
        Scalar::new(ratio(rn, rd), ratio(sn, sd))
    }

    pub fn sqrt2() -> Self {
        Scalar::new(BigRational::zero(), BigRational::one())
    }

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Scalar::new(BigRational::zero(), ratio(1, 2))
    }

    /// `2^exp` for any integer exponent.
    pub fn pow2(exp: i32) -> Self {
        let p = BigInt::one() << exp.unsigned_abs();
        let r = if exp >= 0 {
            BigRational::from_integer(p)
        } else {
            BigRational::new(BigInt::one(), p)
        };
        Scalar::new(r, BigRational::zero())
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rat
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.surd
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.surd.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.rat.is_one() && self.surd.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    /// Exact sign of the real value.
    pub fn signum(&self) -> Ordering {
        let a = sign_of(&self.rat);
        let b = sign_of(&self.surd);
        match (a, b) {
            (a, Ordering::Equal) => a,
            (Ordering::Equal, b) => b,
            (a, b) if a == b => a,
            // Opposite signs: the larger magnitude wins, compared via squares.
            (a, b) => {
                let rat_sq = &self.rat * &self.rat;
                let surd_sq = &self.surd * &self.surd * BigRational::from_integer(2.into());
                match rat_sq.cmp(&surd_sq) {
                    Ordering::Greater => a,
                    Ordering::Less => b,
                    // a² = 2b² has no nonzero rational solution.
                    Ordering::Equal => unreachable!("√2 is irrational"),
                }
            }
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn is_nonnegative(&self) -> bool {
        self.signum() != Ordering::Less
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Galois conjugate `rat − surd·√2`.
    pub fn conjugate(&self) -> Scalar {
        Scalar::new(self.rat.clone(), -self.surd.clone())
    }

    /// Field norm `rat² − 2·surd²`; zero only for zero.
    pub fn norm(&self) -> BigRational {
        &self.rat * &self.rat - &self.surd * &self.surd * BigRational::from_integer(2.into())
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        let c = self.conjugate();
        Ok(Scalar::new(&c.rat / &n, &c.surd / &n))
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, exp: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..exp {
            acc *= self;
        }
        acc
    }

    /// Display-only approximation. Not used on any exact path.
    pub fn approx_f64(&self) -> f64 {
        let r = self.rat.to_f64().unwrap_or(f64::NAN);
        let s = self.surd.to_f64().unwrap_or(f64::NAN);
        r + s * std::f64::consts::SQRT_2
    }

    /// Fixed-point decimal string with `digits` fractional digits, rounded
    /// half away from zero. Computed with integer arithmetic only.
    pub fn to_decimal(&self, digits: u32) -> String {
        const GUARD: u32 = 24;
        let work = digits + GUARD;
        let scale = BigInt::from(10u32).pow(work);
        // floor(√2 · 10^work); truncation error is far below the guard digits.
        let sqrt2_scaled = (BigInt::from(2u32) * &scale * &scale).sqrt();
        let scaled = self.rat.clone() * BigRational::from_integer(scale.clone())
            + self.surd.clone() * BigRational::from_integer(sqrt2_scaled);
        let negative = scaled.is_negative();
        let magnitude = scaled.abs();
        let guard = BigInt::from(10u32).pow(GUARD);
        let shifted = magnitude / BigRational::from_integer(guard);
        let half = ratio(1, 2);
        let rounded = (shifted + half).floor().to_integer();
        let unit = BigInt::from(10u32).pow(digits);
        let int_part = &rounded / &unit;
        let frac_part = &rounded % &unit;
        let sign = if negative && !rounded.is_zero() {
            "-"
        } else {
            ""
        };
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            format!(
                "{sign}{int_part}.{frac:0>width$}",
                frac = frac_part.to_string(),
                width = digits as usize
            )
        }
    }
}

fn sign_of(r: &BigRational) -> Ordering {
    if r.is_zero() {
        Ordering::Equal
    } else if r.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_integer(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::new(r, BigRational::zero())
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-self.rat.clone(), -self.surd.clone())
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-self.rat, -self.surd)
    }
}

impl<'b> Add<&'b Scalar> for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'b Scalar) -> Scalar {
        Scalar::new(&self.rat + &rhs.rat, &self.surd + &rhs.surd)
    }
}

impl<'b> Sub<&'b Scalar> for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &'b Scalar) -> Scalar {
        Scalar::new(&self.rat - &rhs.rat, &self.surd - &rhs.surd)
    }
}

impl<'b> Mul<&'b Scalar> for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'b Scalar) -> Scalar {
        if self.surd.is_zero() && rhs.surd.is_zero() {
            return Scalar::new(&self.rat * &rhs.rat, BigRational::zero());
        }
        if rhs.surd.is_zero() {
            return Scalar::new(&self.rat * &rhs.rat, &self.surd * &rhs.rat);
        }
        if self.surd.is_zero() {
            return Scalar::new(&self.rat * &rhs.rat, &self.rat * &rhs.surd);
        }
        let two = BigRational::from_integer(2.into());
        Scalar::new(
            &self.rat * &rhs.rat + &self.surd * &rhs.surd * two,
            &self.rat * &rhs.surd + &self.surd * &rhs.rat,
        )
    }
}

/// Panics on a zero divisor; use [`Scalar::checked_div`] to get an error.
impl<'b> Div<&'b Scalar> for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'b Scalar) -> Scalar {
        match self.checked_div(rhs) {
            Ok(q) => q,
            Err(e) => panic!("{e}"),
        }
    }
}

macro_rules! forward_binop {
    ($imp:ident, $method:ident) => {
        impl $imp<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $imp<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $imp<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl<'a> AddAssign<&'a Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &'a Scalar) {
        if !rhs.rat.is_zero() {
            self.rat += &rhs.rat;
        }
        if !rhs.surd.is_zero() {
            self.surd += &rhs.surd;
        }
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        *self += &rhs;
    }
}

impl<'a> SubAssign<&'a Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &'a Scalar) {
        self.rat -= &rhs.rat;
        self.surd -= &rhs.surd;
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        *self -= &rhs;
    }
}

impl<'a> MulAssign<&'a Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &'a Scalar) {
        *self = &*self * rhs;
    }
}

impl MulAssign for Scalar {
    fn mul_assign(&mut self, rhs: Scalar) {
        *self = &*self * &rhs;
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

impl Product for Scalar {
    fn product<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::one(), |acc, x| acc * x)
    }
}

fn fmt_ratio(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `k√2`, `√2/2`, `3√2/4`, … for a positive coefficient.
fn fmt_surd(c: &BigRational) -> String {
    let num = c.numer();
    let head = if num.is_one() {
        "√2".to_string()
    } else {
        format!("{num}√2")
    };
    if c.is_integer() {
        head
    } else {
        format!("{head}/{}", c.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rat.is_zero(), self.surd.is_zero()) {
            (_, true) => write!(f, "{}", fmt_ratio(&self.rat)),
            (true, false) => {
                let sign = if self.surd.is_negative() { "-" } else { "" };
                write!(f, "{sign}{}", fmt_surd(&self.surd.abs()))
            }
            (false, false) => {
                let op = if self.surd.is_negative() { '-' } else { '+' };
                write!(
                    f,
                    "{} {op} {}",
                    fmt_ratio(&self.rat),
                    fmt_surd(&self.surd.abs())
                )
            }
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

/// Parses `p`, `p/q`, `√2`, `k√2`, `p√2/q`, `sqrt2`, or a sum/difference of
/// one rational and one surd term such as `1/2 + √2/4`.
impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid scalar literal {s:?}"));
        let cleaned: String = s
            .replace("sqrt2", "√2")
            .replace("sqrt(2)", "√2")
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        if cleaned.is_empty() {
            return Err(bad());
        }
        // Split into signed terms at '+'/'-' that are not leading.
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, c) in cleaned.char_indices() {
            if i > start && (c == '+' || c == '-') {
                terms.push(&cleaned[start..i]);
                start = i;
            }
        }
        terms.push(&cleaned[start..]);
        let mut out = Scalar::zero();
        for term in terms {
            let (neg, body) = match term.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, term.strip_prefix('+').unwrap_or(term)),
            };
            let value = if let Some(pos) = body.find('√') {
                let coeff_str = &body[..pos];
                let after = body[pos + '√'.len_utf8()..]
                    .strip_prefix('2')
                    .ok_or_else(bad)?;
                let coeff = if coeff_str.is_empty() {
                    BigRational::one()
                } else {
                    parse_ratio(coeff_str).ok_or_else(bad)?
                };
                let coeff = if after.is_empty() {
                    coeff
                } else {
                    let den = after.strip_prefix('/').ok_or_else(bad)?;
                    let den: BigInt = den.parse().map_err(|_| bad())?;
                    if den.is_zero() {
                        return Err(bad());
                    }
                    coeff / BigRational::from_integer(den)
                };
                Scalar::new(BigRational::zero(), coeff)
            } else {
                Scalar::from(parse_ratio(body).ok_or_else(bad)?)
            };
            if neg {
                out -= &value;
            } else {
                out += &value;
            }
        }
        Ok(out)
    }
}

fn parse_ratio(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

#[derive(Serialize, Deserialize)]
struct WireScalar {
    r: (WireInt, WireInt),
    s: (WireInt, WireInt),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireInt {
    Text(String),
    Int(i64),
}

impl WireInt {
    fn to_bigint(&self) -> std::result::Result<BigInt, String> {
        match self {
            WireInt::Text(t) => t.parse().map_err(|_| format!("invalid integer {t:?}")),
            WireInt::Int(i) => Ok(BigInt::from(*i)),
        }
    }
}

fn wire_ratio(num: &WireInt, den: &WireInt) -> std::result::Result<BigRational, String> {
    let d = den.to_bigint()?;
    if d.is_zero() {
        return Err("zero denominator".into());
    }
    Ok(BigRational::new(num.to_bigint()?, d))
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = WireScalar {
            r: (
                WireInt::Text(self.rat.numer().to_string()),
                WireInt::Text(self.rat.denom().to_string()),
            ),
            s: (
                WireInt::Text(self.surd.numer().to_string()),
                WireInt::Text(self.surd.denom().to_string()),
            ),
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = WireScalar::deserialize(deserializer)?;
        let rat = wire_ratio(&wire.r.0, &wire.r.1).map_err(D::Error::custom)?;
        let surd = wire_ratio(&wire.s.0, &wire.s.1).map_err(D::Error::custom)?;
        Ok(Scalar::new(rat, surd))
    }
}
