//! Certified enclosures of real numbers with dyadic endpoints.
//!
//! Logarithms are evaluated in fixed point: every intermediate quantity is a
//! pair of integers `(lo, hi)` scaled by `2^-bits`, with lower endpoints
//! rounded toward -inf and upper endpoints toward +inf. Additions of such
//! pairs are exact, so a sum of enclosures does not depend on the order of
//! its terms.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{Rational, RoundMode};

pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// Refinement gives up past this working precision.
const MAX_PRECISION_BITS: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(Rational),
    #[error("working precision must be at least 8 bits, got {0}")]
    PrecisionTooSmall(u32),
    #[error("precision limit of {0} bits reached before meeting the tolerance")]
    PrecisionLimit(u32),
    #[error("invalid hex float {0:?}")]
    HexParse(String),
}

/// A binary floating value `mantissa * 2^exp`, normalized so the mantissa is
/// odd (or the value is `0 * 2^0`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn new(mantissa: BigInt, exp: i64) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        Dyadic {
            mantissa: mantissa >> tz,
            exp: exp + tz as i64,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// `None` when the rational is not dyadic.
    pub fn from_rational(q: &Rational) -> Option<Self> {
        let d = q.denom();
        if d.magnitude().count_ones() != 1 {
            return None;
        }
        Some(Dyadic::new(q.numer(), -(d.bits() as i64 - 1)))
    }

    pub fn to_rational(&self) -> Rational {
        &Rational::from_bigint(self.mantissa.clone()) * &Rational::pow2(self.exp)
    }

    /// C99-style hex float: `0x1.8p+0`, `-0x1p-3`, `0x0p+0`.
    pub fn to_hex(&self) -> String {
        if self.is_zero() {
            return "0x0p+0".to_string();
        }
        let sign = if self.is_negative() { "-" } else { "" };
        let mag = self.mantissa.magnitude();
        let frac_bits = mag.bits() - 1;
        let e = self.exp + frac_bits as i64;
        let frac = mag - (num_bigint::BigUint::one() << frac_bits);
        let pad = (4 - frac_bits % 4) % 4;
        let hex_digits = ((frac_bits + pad) / 4) as usize;
        let body = if hex_digits == 0 {
            String::new()
        } else {
            format!(".{:0width$x}", frac << pad, width = hex_digits)
        };
        let esign = if e < 0 { '-' } else { '+' };
        format!("{sign}0x1{body}p{esign}{}", e.unsigned_abs())
    }

    pub fn from_hex(s: &str) -> Result<Self, CertifyError> {
        let err = || CertifyError::HexParse(s.to_string());
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let rest = rest.strip_prefix("0x").ok_or_else(err)?;
        let (digits, exp) = rest.split_once('p').ok_or_else(err)?;
        let exp: i64 = exp.parse().map_err(|_| err())?;
        let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
        let all = format!("{int}{frac}");
        if int.is_empty() || !all.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err());
        }
        let mut m = BigInt::parse_bytes(all.as_bytes(), 16).ok_or_else(err)?;
        if neg {
            m = -m;
        }
        Ok(Dyadic::new(m, exp - 4 * frac.len() as i64))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.min(other.exp);
        let a = &self.mantissa << (self.exp - e) as usize;
        let b = &other.mantissa << (other.exp - e) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

impl Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Dyadic::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// A closed interval `[lo, hi]` known to contain an exact real value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CertifiedReal {
    lo: Dyadic,
    hi: Dyadic,
}

impl CertifiedReal {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "inverted enclosure");
        CertifiedReal { lo, hi }
    }

    pub fn exact_zero() -> Self {
        CertifiedReal {
            lo: Dyadic::zero(),
            hi: Dyadic::zero(),
        }
    }

    /// The point enclosure of a dyadic rational.
    pub fn exact(q: &Rational) -> Option<Self> {
        let d = Dyadic::from_rational(q)?;
        Some(CertifiedReal {
            lo: d.clone(),
            hi: d,
        })
    }

    pub(crate) fn from_fixed(f: &FixedInterval) -> Self {
        CertifiedReal {
            lo: Dyadic::new(f.lo.clone(), -(f.bits as i64)),
            hi: Dyadic::new(f.hi.clone(), -(f.bits as i64)),
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        self.hi.to_rational() - self.lo.to_rational()
    }

    pub fn midpoint(&self) -> Rational {
        let sum = self.hi.to_rational() + self.lo.to_rational();
        &sum * &Rational::pow2(-1)
    }

    pub fn radius(&self) -> Rational {
        &self.width() * &Rational::pow2(-1)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo.to_rational() <= q && q <= &self.hi.to_rational()
    }

    /// Every point of `self` is strictly below every point of `other`.
    pub fn strictly_below(&self, other: &CertifiedReal) -> bool {
        self.hi < other.lo
    }

    /// Every point of `self` is strictly below `q`.
    pub fn strictly_below_value(&self, q: &Rational) -> bool {
        &self.hi.to_rational() < q
    }

    /// Every point of `self` is strictly above `q`.
    pub fn strictly_above_value(&self, q: &Rational) -> bool {
        &self.lo.to_rational() > q
    }

    /// Distance from `q` to the farthest endpoint.
    pub fn max_distance_to(&self, q: &Rational) -> Rational {
        let a = (&self.lo.to_rational() - q).abs();
        let b = (&self.hi.to_rational() - q).abs();
        a.max(b)
    }

    pub fn sub(&self, other: &CertifiedReal) -> CertifiedReal {
        let lo = Dyadic::from_rational(&(self.lo.to_rational() - other.hi.to_rational()))
            .expect("dyadic difference");
        let hi = Dyadic::from_rational(&(self.hi.to_rational() - other.lo.to_rational()))
            .expect("dyadic difference");
        CertifiedReal { lo, hi }
    }

    /// Intersection with `[0, inf)`. Only sound when the value is known to be
    /// nonnegative.
    pub fn clamp_nonnegative(&self) -> CertifiedReal {
        let zero = Dyadic::zero();
        CertifiedReal {
            lo: self.lo.clone().max(zero.clone()),
            hi: self.hi.clone().max(zero),
        }
    }

    /// `"midpoint ± radius"`, rounded for reading; the radius is rounded up.
    pub fn to_human(&self) -> String {
        let mid = self.midpoint().to_decimal_trimmed(15, RoundMode::Nearest);
        format!("{mid} ± {}", sci_ceil(&self.radius()))
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_human())
    }
}

/// Scientific notation with three significant digits, rounded up.
pub fn sci_ceil(x: &Rational) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let ten = Rational::from_integer(10);
    let mut e: i64 = 0;
    let mut scaled = x.abs();
    while scaled >= ten {
        scaled = scaled.checked_div(&ten).expect("nonzero");
        e += 1;
    }
    while scaled < Rational::one() {
        scaled = &scaled * &ten;
        e -= 1;
    }
    let mut digits = (&scaled * &Rational::from_integer(100)).ceil();
    if digits >= BigInt::from(1000) {
        digits = BigInt::from(100);
        e += 1;
    }
    let s = digits.to_string();
    let sign = if x.is_negative() { "-" } else { "" };
    format!("{sign}{}.{}e{e}", &s[..1], &s[1..])
}

/// A positive error bound on the width of a certified result, plus the
/// working precision refinement starts from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tolerance {
    tol: Rational,
    start_bits: u32,
}

impl Tolerance {
    pub fn new(tol: Rational) -> Result<Self, CertifyError> {
        if !tol.is_positive() {
            return Err(CertifyError::NonPositiveTolerance(tol));
        }
        Ok(Tolerance {
            tol,
            start_bits: DEFAULT_PRECISION_BITS,
        })
    }

    pub fn from_f64(tol: f64) -> Result<Self, CertifyError> {
        let q = Rational::from_f64(tol).unwrap_or_else(Rational::zero);
        Self::new(q)
    }

    /// `2^-bits`.
    pub fn pow2(bits: u32) -> Self {
        Self::new(Rational::pow2(-(bits as i64))).expect("positive")
    }

    pub fn with_start_bits(mut self, bits: u32) -> Result<Self, CertifyError> {
        if bits < 8 {
            return Err(CertifyError::PrecisionTooSmall(bits));
        }
        self.start_bits = bits;
        Ok(self)
    }

    pub fn value(&self) -> &Rational {
        &self.tol
    }

    pub fn start_bits(&self) -> u32 {
        self.start_bits
    }

    /// The same starting precision with the tolerance scaled by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Self {
        Tolerance {
            tol: &self.tol * factor,
            start_bits: self.start_bits,
        }
    }

    pub fn admits(&self, c: &CertifiedReal) -> bool {
        c.width() <= self.tol
    }

    /// Runs `compute` at increasing precision until the result is narrow
    /// enough.
    pub(crate) fn refine<F>(&self, mut compute: F) -> CertifiedReal
    where
        F: FnMut(u32) -> CertifiedReal,
    {
        let mut bits = self.start_bits;
        loop {
            let c = compute(bits);
            if self.admits(&c) || bits >= MAX_PRECISION_BITS {
                // Widths this large would need inputs of astronomical size.
                assert!(self.admits(&c), "{}", CertifyError::PrecisionLimit(bits));
                return c;
            }
            bits = bits.saturating_mul(2).min(MAX_PRECISION_BITS);
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::pow2(40)
    }
}

/// `[lo, hi] * 2^-bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FixedInterval {
    pub lo: BigInt,
    pub hi: BigInt,
    pub bits: u32,
}

impl FixedInterval {
    pub fn zero(bits: u32) -> Self {
        FixedInterval {
            lo: BigInt::zero(),
            hi: BigInt::zero(),
            bits,
        }
    }

    pub fn add_assign(&mut self, other: &FixedInterval) {
        debug_assert_eq!(self.bits, other.bits);
        self.lo += &other.lo;
        self.hi += &other.hi;
    }

    pub fn neg(&self) -> FixedInterval {
        FixedInterval {
            lo: -&self.hi,
            hi: -&self.lo,
            bits: self.bits,
        }
    }

    /// Multiplication by an exact nonnegative rational.
    pub fn scale(&self, q: &Rational) -> FixedInterval {
        debug_assert!(!q.is_negative());
        let (n, d) = (q.numer(), q.denom());
        FixedInterval {
            lo: (&self.lo * &n).div_floor(&d),
            hi: (&self.hi * &n).div_ceil(&d),
            bits: self.bits,
        }
    }

    pub fn scale_int(&self, k: &BigInt) -> FixedInterval {
        debug_assert!(!k.is_negative());
        FixedInterval {
            lo: &self.lo * k,
            hi: &self.hi * k,
            bits: self.bits,
        }
    }
}

/// Enclosure of `atanh(z)` for an exact `0 <= z <= 1/3`, via
/// `atanh z = sum z^(2k+1) / (2k+1)`.
fn atanh_fixed(z: &Rational, bits: u32) -> FixedInterval {
    debug_assert!(!z.is_negative() && z <= &Rational::new(1, 3).unwrap());
    if z.is_zero() {
        return FixedInterval::zero(bits);
    }
    let guard = 32 + (bits as f64).log2().ceil() as u32;
    let w = bits + guard;
    let (zn, zd) = (z.numer(), z.denom());
    let (z2n, z2d) = (&zn * &zn, &zd * &zd);
    let mut pow_lo = (&zn << w).div_floor(&zd);
    let mut pow_hi = (&zn << w).div_ceil(&zd);
    let mut sum_lo = BigInt::zero();
    let mut sum_hi = BigInt::zero();
    let mut k: u64 = 0;
    loop {
        let odd = BigInt::from(2 * k + 1);
        sum_lo += pow_lo.div_floor(&odd);
        sum_hi += pow_hi.div_ceil(&odd);
        pow_lo = (&pow_lo * &z2n).div_floor(&z2d);
        pow_hi = (&pow_hi * &z2n).div_ceil(&z2d);
        k += 1;
        if pow_hi.is_one() {
            break;
        }
    }
    // Tail after k terms: sum_{j>=k} z^(2j+1)/(2j+1) <= z^(2k+1) / ((2k+1)(1 - z^2)).
    let tail = (&pow_hi * &z2d).div_ceil(&(BigInt::from(2 * k + 1) * (&z2d - &z2n)));
    sum_hi += tail;
    FixedInterval {
        lo: sum_lo >> guard,
        hi: (sum_hi + ((BigInt::one() << guard) - 1u32)) >> guard,
        bits,
    }
}

/// Enclosure of `ln(m)` for an exact `1 <= m < 2`.
fn ln_mantissa(m: &Rational, bits: u32) -> FixedInterval {
    let one = Rational::one();
    let z = (m - &one).checked_div(&(m + &one)).expect("m + 1 > 0");
    let mut a = atanh_fixed(&z, bits);
    a.lo <<= 1;
    a.hi <<= 1;
    a
}

fn ln2(bits: u32) -> FixedInterval {
    let mut a = atanh_fixed(&Rational::new(1, 3).unwrap(), bits);
    a.lo <<= 1;
    a.hi <<= 1;
    a
}

/// Enclosure of `log2(q)` for an exact `q > 0`.
pub(crate) fn log2_fixed(q: &Rational, bits: u32) -> FixedInterval {
    assert!(q.is_positive(), "log2 of a nonpositive value");
    if let Some(e) = q.log2_exact() {
        let v = BigInt::from(e) << bits;
        return FixedInterval {
            lo: v.clone(),
            hi: v,
            bits,
        };
    }
    let (e, m) = q.binary_split();
    let work = bits + 8;
    let num = ln_mantissa(&m, work);
    let den = ln2(work);
    // num >= 0 and den > 0, so the quotient bounds pair lo/hi and hi/lo.
    let frac_lo = (&num.lo << bits).div_floor(&den.hi);
    let frac_hi = (&num.hi << bits).div_ceil(&den.lo);
    let base = BigInt::from(e) << bits;
    FixedInterval {
        lo: &base + frac_lo,
        hi: base + frac_hi,
        bits,
    }
}

/// Enclosure of `-p log2 p` for an exact `0 < p <= 1`.
pub(crate) fn surprisal_fixed(p: &Rational, bits: u32) -> FixedInterval {
    log2_fixed(p, bits).neg().scale(p)
}

/// Certified `log2(q)` for `q > 0`.
pub fn log2(q: &Rational, tol: &Tolerance) -> CertifiedReal {
    tol.refine(|bits| CertifiedReal::from_fixed(&log2_fixed(q, bits)))
}
