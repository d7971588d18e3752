//! Exact elements of Q and Q(rt d).

use alloc::format;
use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The value `a + b*rt(d)`. Rationals carry `d = 0`, which makes them
/// compatible with every quadratic field.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Scalar {
    a: BigRational,
    b: BigRational,
    d: u64,
}

fn is_squarefree(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        if n.is_multiple_of(p) {
            n /= p;
        }
        p += 1;
    }
    true
}

/// Checks a field descriptor: 0 for Q, otherwise a squarefree integer >= 2.
pub fn check_field(d: u64) -> Result<()> {
    if d == 0 || is_squarefree(d) {
        Ok(())
    } else {
        Err(Error::Parse(format!("rt({d}) is not a squarefree field descriptor")))
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { a: BigRational::zero(), b: BigRational::zero(), d: 0 }
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn int(n: i64) -> Self {
        Scalar { a: rat(n), b: BigRational::zero(), d: 0 }
    }

    pub fn big(n: BigInt) -> Self {
        Scalar::rational(BigRational::from_integer(n))
    }

    /// `p/q`; panics when `q == 0`.
    pub fn frac(p: i64, q: i64) -> Self {
        Scalar::rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn rational(a: BigRational) -> Self {
        Scalar { a, b: BigRational::zero(), d: 0 }
    }

    /// `a + b*rt(d)`, normalised so that `b = 0` forces `d = 0`.
    pub fn quadratic(a: BigRational, b: BigRational, d: u64) -> Result<Self> {
        check_field(d)?;
        if d == 0 && !b.is_zero() {
            return Err(Error::Parse("nonzero irrational part over Q".to_string()));
        }
        Ok(Scalar::norm(a, b, d))
    }

    /// `rt(d)` itself.
    pub fn sqrt_of(d: u64) -> Result<Self> {
        Scalar::quadratic(BigRational::zero(), BigRational::one(), d)
    }

    fn norm(a: BigRational, b: BigRational, d: u64) -> Self {
        if b.is_zero() {
            Scalar { a, b, d: 0 }
        } else {
            Scalar { a, b, d }
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    /// Field descriptor of this value; 0 when rational.
    pub fn field(&self) -> u64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(self.a.clone())
        } else {
            None
        }
    }

    /// Integer value when the scalar is an integer.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.is_rational() && self.a.is_integer() {
            Some(self.a.to_integer())
        } else {
            None
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_integer().and_then(|n| n.to_i64())
    }

    fn join(&self, other: &Scalar) -> Result<u64> {
        match (self.d, other.d) {
            (0, e) | (e, 0) => Ok(e),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(Error::FieldMismatch(x, y)),
        }
    }

    fn joined(&self, other: &Scalar) -> u64 {
        match self.join(other) {
            Ok(d) => d,
            Err(_) => panic!("field mismatch: rt({}) against rt({})", self.d, other.d),
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        let d = self.join(other)?;
        Ok(Scalar::norm(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar> {
        let d = self.join(other)?;
        Ok(Scalar::norm(&self.a - &other.a, &self.b - &other.b, d))
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar> {
        let d = self.join(other)?;
        let dd = BigRational::from_integer(BigInt::from(d));
        let a = &self.a * &other.a + &self.b * &other.b * dd;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Scalar::norm(a, b, d))
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        let d = self.join(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let dd = BigRational::from_integer(BigInt::from(d));
        let n = &other.a * &other.a - &other.b * &other.b * dd;
        let conj = Scalar::norm(other.a.clone(), -other.b.clone(), other.d);
        let num = self.checked_mul(&conj)?;
        Ok(Scalar::norm(num.a / &n, num.b / &n, d))
    }

    pub fn recip(&self) -> Result<Scalar> {
        Scalar::one().checked_div(self)
    }

    /// Sign of the real embedding.
    pub fn signum(&self) -> Ordering {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 against b^2 d
        let dd = BigRational::from_integer(BigInt::from(self.d));
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * dd;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn checked_cmp(&self, other: &Scalar) -> Result<Ordering> {
        Ok(self.checked_sub(other)?.signum())
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact floor of the real embedding.
    pub fn floor(&self) -> BigInt {
        let mut g = self.a.floor().to_integer();
        if !self.b.is_zero() {
            let dd = BigRational::from_integer(BigInt::from(self.d));
            let sq = (&self.b * &self.b * dd).floor().to_integer().sqrt();
            if self.b.is_negative() {
                g -= sq + BigInt::one();
            } else {
                g += sq;
            }
        }
        loop {
            let gs = Scalar::big(g.clone());
            if *self < gs {
                g -= BigInt::one();
            } else if *self >= gs + Scalar::one() {
                g += BigInt::one();
            } else {
                return g;
            }
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// `self / other` when that ratio is rational.
    pub fn ratio(&self, other: &Scalar) -> Result<Option<BigRational>> {
        Ok(self.checked_div(other)?.to_rational())
    }

    /// Multiply by an integer.
    pub fn times(&self, n: i64) -> Scalar {
        self * &Scalar::int(n)
    }

    pub fn times_big(&self, n: &BigInt) -> Scalar {
        self * &Scalar::big(n.clone())
    }

    /// Decimal approximation, for display only.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * approx_sqrt(self.d as f64)
    }
}

fn approx_sqrt(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut r = x;
    for _ in 0..64 {
        r = 0.5 * (r + x / r);
    }
    r
}

fn sign_of(r: &BigRational) -> Ordering {
    if r.is_positive() {
        Ordering::Greater
    } else if r.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    /// Panics on a field mismatch; use [`Scalar::checked_cmp`] at trust boundaries.
    fn cmp(&self, other: &Self) -> Ordering {
        if self.b.is_zero() && other.b.is_zero() {
            return self.a.cmp(&other.a);
        }
        let _ = self.joined(other);
        (self - other).signum()
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                let _ = self.joined(rhs);
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = &*self - rhs;
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::norm(-self.a.clone(), -self.b.clone(), self.d)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

fn fmt_rat(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_rat(&self.a, f)?;
        if !self.b.is_zero() {
            if self.b.is_negative() {
                f.write_str("-")?;
            } else {
                f.write_str("+")?;
            }
            fmt_rat(&self.b.abs(), f)?;
            write!(f, "*rt({})", self.d)?;
        }
        Ok(())
    }
}

fn parse_rat(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("expected p or p/q, found {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let digits = |t: &str, signed: bool| {
        let body = if signed { t.strip_prefix('-').unwrap_or(t) } else { t };
        !body.is_empty() && body.bytes().all(|c| c.is_ascii_digit())
    };
    if !digits(p, true) || !digits(q, false) {
        return Err(bad());
    }
    let p = BigInt::from_str(p).map_err(|_| bad())?;
    let q = BigInt::from_str(q).map_err(|_| bad())?;
    if q.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(p, q))
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts `p`, `p/q`, `p/q+r/s*rt(d)` and `p/q-r/s*rt(d)`.
    fn from_str(s: &str) -> Result<Scalar> {
        if s.is_empty() || s.chars().any(char::is_whitespace) {
            return Err(Error::Parse(format!("malformed scalar {s:?}")));
        }
        let Some(body) = s.strip_suffix(')') else {
            return Ok(Scalar::rational(parse_rat(s)?));
        };
        let (head, d) = body
            .rsplit_once("*rt(")
            .ok_or_else(|| Error::Parse(format!("malformed scalar {s:?}")))?;
        let d: u64 = d.parse().map_err(|_| Error::Parse(format!("malformed radicand in {s:?}")))?;
        if d < 2 {
            return Err(Error::Parse(format!("rt({d}) is not a quadratic field")));
        }
        check_field(d)?;
        // split `a+b` / `a-b` at the last sign that is not leading
        let pos = head
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last()
            .ok_or_else(|| Error::Parse(format!("missing rational part in {s:?}")))?;
        let a = parse_rat(&head[..pos])?;
        let sign = &head[pos..pos + 1];
        let b = parse_rat(&head[pos + 1..])?;
        if b.is_negative() {
            return Err(Error::Parse(format!("malformed coefficient in {s:?}")));
        }
        let b = if sign == "-" { -b } else { b };
        Ok(Scalar::norm(a, b, d))
    }
}

/// Lebesgue-type measure: a non-negative scalar or infinity.
#[derive(Clone, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub enum ExtMeasure {
    Finite(Scalar),
    Infinite,
}

impl ExtMeasure {
    pub fn zero() -> Self {
        ExtMeasure::Finite(Scalar::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtMeasure::Finite(s) if s.is_zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtMeasure::Finite(_))
    }

    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            ExtMeasure::Finite(s) => Some(s),
            ExtMeasure::Infinite => None,
        }
    }
}

impl Add for &ExtMeasure {
    type Output = ExtMeasure;
    fn add(self, rhs: &ExtMeasure) -> ExtMeasure {
        match (self, rhs) {
            (ExtMeasure::Finite(a), ExtMeasure::Finite(b)) => ExtMeasure::Finite(a + b),
            _ => ExtMeasure::Infinite,
        }
    }
}

impl Add for ExtMeasure {
    type Output = ExtMeasure;
    fn add(self, rhs: ExtMeasure) -> ExtMeasure {
        &self + &rhs
    }
}

impl fmt::Display for ExtMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtMeasure::Finite(s) => write!(f, "{s}"),
            ExtMeasure::Infinite => f.write_str("inf"),
        }
    }
}

/// Least positive common multiple of commensurable positive scalars.
pub fn lcm_scalars(xs: &[Scalar]) -> Result<Scalar> {
    let first = xs.first().cloned().unwrap_or_else(Scalar::one);
    let mut l = BigInt::one();
    for x in xs {
        let r = x.ratio(&first)?.ok_or(Error::IncommensurablePeriods)?;
        l = l.lcm(r.numer());
    }
    Ok(first.times_big(&l))
}

/// Text form for a list of values, used in diagnostics.
pub fn join_scalars(xs: &[Scalar]) -> String {
    let parts: alloc::vec::Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    parts.join(",")
}
