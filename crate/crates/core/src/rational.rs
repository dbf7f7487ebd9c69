//! Exact rational numbers and the four elementary combinations.
//!
//! A [`Rational`] is always stored in lowest terms with a strictly positive
//! denominator. Values whose numerator fits in `i64` and whose denominator
//! fits in `u64` use an inline representation; everything else is boxed
//! arbitrary-precision. The choice of representation is a function of the
//! value alone, so equal values are structurally identical and the derived
//! `Eq`/`Hash` are exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

impl RationalError {
    pub fn name(&self) -> &'static str {
        match self {
            RationalError::ZeroDenominator => "ZeroDenominator",
            RationalError::DivisionByZero => "DivisionByZero",
            RationalError::Parse(_) => "ParseError",
        }
    }
}

/// One of the four elementary combinations of two rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ElementaryOp {
    pub const ALL: [ElementaryOp; 4] = [
        ElementaryOp::Add,
        ElementaryOp::Sub,
        ElementaryOp::Mul,
        ElementaryOp::Div,
    ];

    pub fn symbol(self) -> char {
        match self {
            ElementaryOp::Add => '+',
            ElementaryOp::Sub => '-',
            ElementaryOp::Mul => '*',
            ElementaryOp::Div => '/',
        }
    }
}

impl fmt::Display for ElementaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small { num: i64, den: u64 },
    Big(Box<BigParts>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct BigParts {
    num: BigInt,
    den: BigInt,
}

/// A canonical arbitrary-precision fraction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small { num: 0, den: 1 })
    }

    pub fn one() -> Self {
        Rational(Repr::Small { num: 1, den: 1 })
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(Repr::Small { num: n, den: 1 })
    }

    /// Builds `n/d` in lowest terms.
    pub fn new(n: i64, d: i64) -> Result<Self, RationalError> {
        if d == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        let den = d.unsigned_abs() as u128;
        let num = if d < 0 { -(n as i128) } else { n as i128 };
        Ok(Self::from_i128(num, den))
    }

    /// Builds `n/d` in lowest terms from arbitrary-precision integers.
    pub fn from_bigints(n: BigInt, d: BigInt) -> Result<Self, RationalError> {
        if d.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Self::reduce_big(n, d))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::canonical_big(n, BigInt::one())
    }

    pub fn from_biguint(n: BigUint) -> Self {
        Self::from_bigint(BigInt::from(n))
    }

    /// `2^exp` for any signed exponent.
    pub fn pow2(exp: i64) -> Self {
        let shifted = BigInt::one() << exp.unsigned_abs();
        if exp >= 0 {
            Self::from_bigint(shifted)
        } else {
            Self::canonical_big(BigInt::one(), shifted)
        }
    }

    fn from_i128(num: i128, den: u128) -> Self {
        debug_assert!(den != 0);
        if num == 0 {
            return Self::zero();
        }
        let mag = num.unsigned_abs();
        let g = match (u64::try_from(mag), u64::try_from(den)) {
            (Ok(a), Ok(b)) => a.gcd(&b) as u128,
            _ => mag.gcd(&den),
        };
        let (num, den) = if g == 1 {
            (num, den)
        } else {
            (num / g as i128, den / g)
        };
        match (i64::try_from(num), u64::try_from(den)) {
            (Ok(num), Ok(den)) => Rational(Repr::Small { num, den }),
            _ => Rational(Repr::Big(Box::new(BigParts {
                num: BigInt::from(num),
                den: BigInt::from(den),
            }))),
        }
    }

    fn reduce_big(mut n: BigInt, mut d: BigInt) -> Self {
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        if n.is_zero() {
            return Self::zero();
        }
        let g = n.gcd(&d);
        if !g.is_one() {
            n /= &g;
            d /= &g;
        }
        Self::canonical_big(n, d)
    }

    /// `n/d` must already be reduced with `d > 0`.
    fn canonical_big(n: BigInt, d: BigInt) -> Self {
        match (n.to_i64(), d.to_u64()) {
            (Some(num), Some(den)) => Rational(Repr::Small { num, den }),
            _ => Rational(Repr::Big(Box::new(BigParts { num: n, den: d }))),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, .. } => BigInt::from(*num),
            Repr::Big(b) => b.num.clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small { den, .. } => BigInt::from(*den),
            Repr::Big(b) => b.den.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small { num: 1, den: 1 })
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num < 0,
            Repr::Big(b) => b.num.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && !self.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(b) => b.den.is_one(),
        }
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            Rational::zero() - self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Result<Rational, RationalError> {
        Rational::one().checked_div(self)
    }

    pub fn floor(&self) -> BigInt {
        self.numer().div_floor(&self.denom())
    }

    pub fn ceil(&self) -> BigInt {
        self.numer().div_ceil(&self.denom())
    }

    /// `(e, m)` with `self = 2^e * m` and `1 <= m < 2`. Requires `self > 0`.
    pub(crate) fn binary_split(&self) -> (i64, Rational) {
        debug_assert!(self.is_positive());
        let n = self.numer();
        let d = self.denom();
        let mut e = n.bits() as i64 - d.bits() as i64;
        let mut m = self * &Rational::pow2(-e);
        let two = Rational::from_integer(2);
        if m < Rational::one() {
            e -= 1;
            m = &m * &two;
        }
        debug_assert!(m >= Rational::one() && m < two);
        (e, m)
    }

    /// Exact power-of-two exponent, if `self` is one.
    pub fn log2_exact(&self) -> Option<i64> {
        if !self.is_positive() {
            return None;
        }
        let n = self.numer();
        let d = self.denom();
        let pow2 = |x: &BigInt| x.magnitude().count_ones() == 1;
        if d.is_one() && pow2(&n) {
            Some(n.bits() as i64 - 1)
        } else if n.is_one() && pow2(&d) {
            Some(-(d.bits() as i64 - 1))
        } else {
            None
        }
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, RationalError> {
        if rhs.is_zero() {
            return Err(RationalError::DivisionByZero);
        }
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) = (&self.0, &rhs.0)
        {
            // (a/b) / (c/d) = (a*d) / (b*c)
            let n = *a as i128 * *d as i128;
            let m = *b as u128 * c.unsigned_abs() as u128;
            let n = if *c < 0 { -n } else { n };
            return Ok(Self::from_i128(n, m));
        }
        Ok(Self::reduce_big(
            self.numer() * rhs.denom(),
            self.denom() * rhs.numer(),
        ))
    }

    /// Exact decimal parse: `"-12"`, `"0.25"`, `"1e-12"`, `"3.5E2"`.
    pub fn from_decimal_str(s: &str) -> Result<Rational, RationalError> {
        let err = || RationalError::Parse(s.to_string());
        let t = s.trim();
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(i) => {
                let exp: i64 = t[i + 1..].parse().map_err(|_| err())?;
                (&t[..i], exp)
            }
            None => (t, 0),
        };
        let (neg, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part
            .bytes()
            .chain(frac_part.bytes())
            .all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let all: String = format!("{int_part}{frac_part}");
        let mut num: BigInt = all.parse().map_err(|_| err())?;
        if neg {
            num = -num;
        }
        let scale = exp - frac_part.len() as i64;
        if scale.unsigned_abs() > 100_000 {
            return Err(err());
        }
        let ten = BigInt::from(10u32);
        let p = num_traits::pow(ten, scale.unsigned_abs() as usize);
        if scale >= 0 {
            Ok(Self::from_bigint(num * p))
        } else {
            Ok(Self::reduce_big(num, p))
        }
    }

    /// Decimal rendering with exactly `frac_digits` fractional digits.
    pub fn to_decimal(&self, frac_digits: usize, mode: RoundMode) -> String {
        let scale = num_traits::pow(BigInt::from(10u32), frac_digits);
        let scaled = self.numer() * &scale;
        let d = self.denom();
        let q = match mode {
            RoundMode::Floor => scaled.div_floor(&d),
            RoundMode::Ceil => scaled.div_ceil(&d),
            RoundMode::Nearest => {
                (scaled * BigInt::from(2) + &d).div_floor(&(&d * BigInt::from(2)))
            }
        };
        let neg = q.is_negative();
        let digits = q.magnitude().to_string();
        let digits = if digits.len() <= frac_digits {
            format!("{}{}", "0".repeat(frac_digits + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (i, f) = digits.split_at(digits.len() - frac_digits);
        let sign = if neg { "-" } else { "" };
        if frac_digits == 0 {
            format!("{sign}{i}")
        } else {
            format!("{sign}{i}.{f}")
        }
    }

    /// Like [`Rational::to_decimal`] but with trailing zeros dropped.
    pub fn to_decimal_trimmed(&self, frac_digits: usize, mode: RoundMode) -> String {
        let s = self.to_decimal(frac_digits, mode);
        if !s.contains('.') {
            return s;
        }
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".to_string()
        } else {
            s.to_string()
        }
    }

    /// Lossy, for display and plotting only.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => *num as f64 / *den as f64,
            Repr::Big(b) => {
                let shift = b.num.bits() as i64 - b.den.bits() as i64 - 60;
                let scaled = if shift > 0 {
                    (&b.num >> shift as usize).div_floor(&b.den)
                } else {
                    (&b.num << (-shift) as usize).div_floor(&b.den)
                };
                scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
            }
        }
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Option<Rational> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Rational::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        let m = Rational::from_integer(sign * mant as i64);
        Some(&m * &Rational::pow2(exp))
    }
}

/// Rounding direction for decimal rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundMode {
    Floor,
    Ceil,
    Nearest,
}

/// Applies one elementary combination. Division by zero is the only failure.
pub fn combine(a: &Rational, b: &Rational, op: ElementaryOp) -> Result<Rational, RationalError> {
    match op {
        ElementaryOp::Add => Ok(a + b),
        ElementaryOp::Sub => Ok(a - b),
        ElementaryOp::Mul => Ok(a * b),
        ElementaryOp::Div => a.checked_div(b),
    }
}

/// `n/d` in canonical form.
pub fn normalize(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Rational, RationalError> {
    Rational::from_bigints(n.into(), d.into())
}

impl std::ops::Add for &Rational {
    type Output = Rational;

    fn add(self, rhs: &Rational) -> Rational {
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) = (&self.0, &rhs.0)
        {
            let (a, b, c, d) = (*a as i128, *b as u128, *c as i128, *d as u128);
            if let Some(n) = (a * d as i128).checked_add(c * b as i128) {
                return Rational::from_i128(n, b * d);
            }
        }
        Rational::reduce_big(
            self.numer() * rhs.denom() + rhs.numer() * self.denom(),
            self.denom() * rhs.denom(),
        )
    }
}

impl std::ops::Sub for &Rational {
    type Output = Rational;

    fn sub(self, rhs: &Rational) -> Rational {
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) = (&self.0, &rhs.0)
        {
            let (a, b, c, d) = (*a as i128, *b as u128, *c as i128, *d as u128);
            if let Some(n) = (a * d as i128).checked_sub(c * b as i128) {
                return Rational::from_i128(n, b * d);
            }
        }
        Rational::reduce_big(
            self.numer() * rhs.denom() - rhs.numer() * self.denom(),
            self.denom() * rhs.denom(),
        )
    }
}

impl std::ops::Mul for &Rational {
    type Output = Rational;

    fn mul(self, rhs: &Rational) -> Rational {
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) = (&self.0, &rhs.0)
        {
            return Rational::from_i128(*a as i128 * *c as i128, *b as u128 * *d as u128);
        }
        Rational::reduce_big(self.numer() * rhs.numer(), self.denom() * rhs.denom())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl std::ops::$tr for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl std::ops::$tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul);

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| &acc + &x)
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| &acc + x)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) =
            (&self.0, &other.0)
        {
            // |a*d| < 2^127, so the cross products cannot overflow.
            return (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128));
        }
        (self.numer() * other.denom()).cmp(&(other.numer() * self.denom()))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_bigint(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{num}"),
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(b) if b.den.is_one() => write!(f, "{}", b.num),
            Repr::Big(b) => write!(f, "{}/{}", b.num, b.den),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `"n/d"` or `"n"`; a decimal form such as `"0.25"` is also accepted.
impl FromStr for Rational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || RationalError::Parse(s.to_string());
        let int = |x: &str| -> Result<BigInt, RationalError> {
            let x = x.trim();
            let digits = x.strip_prefix(['-', '+']).unwrap_or(x);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            x.parse().map_err(|_| err())
        };
        match t.split_once('/') {
            Some((n, d)) => Rational::from_bigints(int(n)?, int(d)?),
            None if t.contains(['.', 'e', 'E']) => Rational::from_decimal_str(t),
            None => Ok(Rational::from_bigint(int(t)?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
