//! The reference probability measure and the metrics built on it.
//!
//! `mu` has density `(4/3) 2^-(|n|+2)` on `[n, n+1)`.

use alloc::format;
use alloc::string::String;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::layout::{block_count, zip_with, Layout, Payload, Shift, Tail};
use crate::map::{Ept, PartialIso};
use crate::scalar::{ExtMeasure, Scalar};
use crate::set::IntervalSet;

fn pow2_inv(n: u64) -> Scalar {
    let den = BigInt::one() << n;
    Scalar::rational(BigRational::new(BigInt::one(), den))
}

/// `mu` density on the cell `[n, n+1)`.
pub fn density(n: &BigInt) -> Scalar {
    let k = n.abs().to_u64().unwrap_or(u64::MAX / 2);
    &pow2_inv(k) * &Scalar::frac(1, 3)
}

fn cell(x: &Scalar) -> BigInt {
    x.floor()
}

/// Integral of a block-independent piecewise constant `f` over `[lo, hi)`.
fn integrate_span(lo: &Scalar, hi: &Scalar, v: &Scalar) -> Result<Scalar> {
    if v.is_zero() || lo >= hi {
        return Ok(Scalar::zero());
    }
    let n0 = cell(lo);
    let n1 = cell(hi);
    if &n1 - &n0 > BigInt::from(crate::layout::WINDOW_BUDGET) {
        return Err(Error::CompositionOutOfClass("integration window exceeds the budget".into()));
    }
    let mut total = Scalar::zero();
    let mut n = n0;
    while n <= n1 {
        let a = Scalar::big(n.clone()).max(lo.clone());
        let b = Scalar::big(&n + 1).min(hi.clone());
        if a < b {
            total += &(&(&b - &a) * &density(&n));
        }
        n += 1;
    }
    Ok(&total * v)
}

/// `sum_m 2^-(m N)` times the first-block integral, for a right tail with
/// start `>= 0` in real or reflected coordinates.
fn integrate_tail<P: Payload>(t: &Tail<P>, f: &dyn Fn(&P) -> Scalar) -> Result<Scalar> {
    if t.is_uniform() {
        let v = f(&t.pieces[0].val.at_block(0));
        if v.is_zero() {
            return Ok(Scalar::zero());
        }
        // mu([s, inf)) = mu([s, ceil s)) + (2/3) 2^-ceil(s)
        let c = t.start.ceil();
        let head = integrate_span(&t.start, &Scalar::big(c.clone()), &Scalar::one())?;
        let k = c.to_u64().ok_or_else(|| Error::CompositionOutOfClass("tail start too large".into()))?;
        let rest = &pow2_inv(k) * &Scalar::frac(2, 3);
        return Ok(&(&head + &rest) * &v);
    }
    let p = t.period.to_rational().ok_or(Error::IncommensurablePeriods)?;
    let r = p.denom().clone();
    let r = block_count(&r)?;
    let t = t.refine(r);
    let n = t.period.to_integer().ok_or(Error::IncommensurablePeriods)?;
    let n = n.to_u64().ok_or_else(|| Error::CompositionOutOfClass("period too large".into()))?;
    let mut first = Scalar::zero();
    for piece in &t.pieces {
        let v = f(&piece.val.at_block(0));
        let lo = &t.start + &piece.lo;
        let hi = &t.start + &piece.hi;
        first += &integrate_span(&lo, &hi, &v)?;
    }
    let geom = Scalar::one() - pow2_inv(n);
    Ok(&first / &geom)
}

/// `∫ f dmu` for a payload function that does not depend on the block index.
pub fn integrate<P: Payload>(l: &Layout<P>, f: impl Fn(&P) -> Scalar) -> Result<Scalar> {
    let mut l = l.clone();
    let zero = Scalar::zero();
    if l.right.start < zero {
        let t = ((-&l.right.start) / &l.right.period).ceil();
        l.unroll_right(block_count(&t)?);
    }
    if l.left.start < zero {
        let t = ((-&l.left.start) / &l.left.period).ceil();
        l.unroll_left(block_count(&t)?);
    }
    let mut total = Scalar::zero();
    for p in &l.core {
        total += &integrate_span(&p.lo, &p.hi, &f(&p.val))?;
    }
    total += &integrate_tail(&l.right, &f)?;
    let g = |v: &P| f(&v.reflect());
    let left = integrate_tail(&l.left, &g)?;
    total += &(&left * &Scalar::frac(1, 2));
    Ok(total)
}

/// `mu(A)`.
pub fn mu(a: &IntervalSet) -> Result<Scalar> {
    integrate(a.layout(), |v| if *v { Scalar::one() } else { Scalar::zero() })
}

/// `lambda({x in C : S x != T x})`.
pub fn d_uc(s: &Ept, t: &Ept, c: &IntervalSet) -> Result<Scalar> {
    if !c.measure().is_finite() {
        return Err(Error::CInfinite);
    }
    let m = s.disagreement(t)?.intersect(c)?.measure();
    Ok(m.finite().cloned().unwrap_or_else(Scalar::zero))
}

/// `mu({x : S x != T x})`.
pub fn d_mu(s: &Ept, t: &Ept) -> Result<Scalar> {
    mu(&s.disagreement(t)?)
}

/// `lambda({x : S x != T x})`.
pub fn d_uf(s: &Ept, t: &Ept) -> Result<ExtMeasure> {
    Ok(s.disagreement(t)?.measure())
}

/// `∫ min(|S x - T x|, 1) dmu`.
pub fn cm_metric(s: &Ept, t: &Ept) -> Result<Scalar> {
    let mut d = zip_with(s.layout(), t.layout(), |a, b| a.add(&b.neg()))?;
    for _ in 0..2 {
        let mut need = BigInt::zero();
        for p in &d.right.pieces {
            let Shift { alpha, beta } = &p.val;
            if beta.is_zero() {
                continue;
            }
            let sgn = if beta.is_positive() { Scalar::one() } else { -Scalar::one() };
            let k = ((Scalar::one() - alpha * &sgn) / beta.abs()).ceil();
            if k > need {
                need = k;
            }
        }
        d.unroll_right(block_count(&need)?);
        d = d.reflect();
    }
    let one = Scalar::one();
    integrate(&d, |sh| {
        if !sh.beta.is_zero() {
            return one.clone();
        }
        sh.alpha.abs().min(one.clone())
    })
}

/// The `i`-th dyadic test set, enumerated by level `m >= 1` and then by `k`
/// over `[-m 2^m, m 2^m)`: `[k/2^m, (k+1)/2^m)`.
pub fn dyadic_test_set(i: u64) -> (Scalar, Scalar) {
    let mut i = i;
    let mut m: u64 = 1;
    loop {
        let count = 2 * m * (1u64 << m);
        if i < count {
            let k = i as i64 - (m * (1u64 << m)) as i64;
            let den = 1i64 << m;
            return (Scalar::frac(k, den), Scalar::frac(k + 1, den));
        }
        i -= count;
        m += 1;
    }
}

/// `min(lambda(S(C) Δ T(C)), 1)`.
pub fn weak_term(s: &Ept, t: &Ept, c: &IntervalSet) -> Result<Scalar> {
    let d = s.image(c)?.symdiff(&t.image(c)?)?.measure();
    Ok(match d {
        ExtMeasure::Infinite => Scalar::one(),
        ExtMeasure::Finite(v) => v.min(Scalar::one()),
    })
}

/// Truncated weak distance and the bound on the neglected tail of the series.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakValue {
    pub value: Scalar,
    pub truncation: u64,
}

impl WeakValue {
    pub fn error_text(&self) -> String {
        format!("1/2^{}", self.truncation)
    }
}

pub fn weak_metric(s: &Ept, t: &Ept, trunc: u64) -> Result<WeakValue> {
    if trunc == 0 {
        return Err(Error::OutOfRange("truncation must be positive".into()));
    }
    let mut total = Scalar::zero();
    for i in 0..trunc {
        let (a, b) = dyadic_test_set(i);
        let term = weak_term(s, t, &IntervalSet::interval(a, b))?;
        if !term.is_zero() {
            total += &(&term * &pow2_inv(i + 1));
        }
    }
    Ok(WeakValue { value: total, truncation: trunc })
}

/// `mu(disagreement on dom φ ∩ dom ψ) + mu(dom φ Δ dom ψ)`.
pub fn partial_metric(phi: &PartialIso, psi: &PartialIso) -> Result<Scalar> {
    let a = mu(&phi.disagreement(psi)?)?;
    let b = mu(&phi.dom().symdiff(&psi.dom())?)?;
    Ok(&a + &b)
}
