//! Eventually periodic subsets of the line with exact Lebesgue measure.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result, Witness};
use crate::layout::{zip_with, Layout, Piece, Tail};
use crate::scalar::{ExtMeasure, Scalar};

/// A tail description as written by users: `{x beyond start : (x - start) mod period in pattern}`.
/// For a left tail the residue is taken as `(x - start) mod period` as well, for `x < start`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailSpec {
    pub start: Scalar,
    pub period: Scalar,
    pub pattern: Vec<(Scalar, Scalar)>,
}

/// A finite union of half-open intervals plus periodic patterns towards both infinities.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet(pub(crate) Layout<bool>);

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet(Layout::constant(false))
    }

    pub fn full() -> Self {
        IntervalSet(Layout::constant(true))
    }

    /// `[lo, hi)`; empty when `lo >= hi`.
    pub fn interval(lo: Scalar, hi: Scalar) -> Self {
        if lo >= hi {
            return Self::empty();
        }
        IntervalSet(Layout::from_pieces(vec![Piece::new(lo, hi, true)], false))
    }

    /// Union of finitely many intervals, in any order.
    pub fn from_intervals(iv: &[(Scalar, Scalar)]) -> Self {
        let mut iv: Vec<(Scalar, Scalar)> = iv.iter().filter(|(a, b)| a < b).cloned().collect();
        iv.sort();
        let mut merged: Vec<Piece<bool>> = Vec::new();
        for (a, b) in iv {
            if let Some(last) = merged.last_mut() {
                if a <= last.hi {
                    if b > last.hi {
                        last.hi = b;
                    }
                    continue;
                }
            }
            merged.push(Piece::new(a, b, true));
        }
        IntervalSet(Layout::from_pieces(merged, false))
    }

    /// `[start, inf)`.
    pub fn ray_right(start: Scalar) -> Self {
        IntervalSet(Layout { core: Vec::new(), left: Tail::uniform(-&start, false), right: Tail::uniform(start, true) })
    }

    /// `(-inf, end)`.
    pub fn ray_left(end: Scalar) -> Self {
        IntervalSet(Layout { core: Vec::new(), left: Tail::uniform(-&end, true), right: Tail::uniform(end, false) })
    }

    /// Periodic pattern on `[start, inf)`.
    pub fn right_periodic(spec: &TailSpec) -> Result<Self> {
        let pieces = pattern_pieces(&spec.period, &spec.pattern)?;
        let right = Tail { start: spec.start.clone(), period: spec.period.clone(), pieces };
        Ok(IntervalSet(Layout { core: Vec::new(), left: Tail::uniform(-&spec.start, false), right }.canonical()))
    }

    /// Periodic pattern on `(-inf, start)`.
    pub fn left_periodic(spec: &TailSpec) -> Result<Self> {
        let p = &spec.period;
        let reflected: Vec<(Scalar, Scalar)> = spec.pattern.iter().map(|(a, b)| (p - b, p - a)).collect();
        let pieces = pattern_pieces(p, &reflected)?;
        let left = Tail { start: -&spec.start, period: p.clone(), pieces };
        Ok(IntervalSet(Layout { core: Vec::new(), left, right: Tail::uniform(spec.start.clone(), false) }.canonical()))
    }

    /// Same pattern on both sides of `start`, i.e. `{x : (x - start) mod period in pattern}`.
    pub fn two_sided(spec: &TailSpec) -> Result<Self> {
        Self::right_periodic(spec)?.union(&Self::left_periodic(spec)?)
    }

    pub fn from_parts(core: &[(Scalar, Scalar)], left: Option<&TailSpec>, right: Option<&TailSpec>) -> Result<Self> {
        let mut s = Self::from_intervals(core);
        if let Some(l) = left {
            s = s.union(&Self::left_periodic(l)?)?;
        }
        if let Some(r) = right {
            s = s.union(&Self::right_periodic(r)?)?;
        }
        Ok(s)
    }

    pub fn from_layout(l: Layout<bool>) -> Self {
        IntervalSet(l.canonical())
    }

    pub fn layout(&self) -> &Layout<bool> {
        &self.0
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Ok(IntervalSet(zip_with(&self.0, &other.0, |a, b| *a || *b)?))
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        Ok(IntervalSet(zip_with(&self.0, &other.0, |a, b| *a && *b)?))
    }

    pub fn diff(&self, other: &Self) -> Result<Self> {
        Ok(IntervalSet(zip_with(&self.0, &other.0, |a, b| *a && !*b)?))
    }

    pub fn symdiff(&self, other: &Self) -> Result<Self> {
        Ok(IntervalSet(zip_with(&self.0, &other.0, |a, b| *a != *b)?))
    }

    pub fn complement(&self) -> Self {
        IntervalSet(self.0.map(|a| !*a))
    }

    /// Exact Lebesgue measure.
    pub fn measure(&self) -> ExtMeasure {
        let l = &self.0;
        if l.right.pieces.iter().chain(l.left.pieces.iter()).any(|p| p.val) {
            return ExtMeasure::Infinite;
        }
        let mut total = Scalar::zero();
        for p in l.core.iter().filter(|p| p.val) {
            total += &p.len();
        }
        ExtMeasure::Finite(total)
    }

    /// Null up to measure zero (canonical pieces are never degenerate).
    pub fn is_empty(&self) -> bool {
        !self.0.all_payloads().any(|v| *v)
    }

    pub fn is_full(&self) -> bool {
        self.0.all_payloads().all(|v| *v)
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        Ok(self.diff(other)?.is_empty())
    }

    /// Equality up to null sets.
    pub fn eq_ae(&self, other: &Self) -> Result<bool> {
        Ok(self.symdiff(other)?.is_empty())
    }

    /// Disjoint up to null sets.
    pub fn is_disjoint(&self, other: &Self) -> Result<bool> {
        Ok(self.intersect(other)?.is_empty())
    }

    /// A witness interval inside the set, if it is non-null.
    pub fn witness(&self) -> Option<Witness> {
        crate::layout::find_piece(&self.0, |v| *v)
    }

    /// Merged maximal intervals of the set meeting `[lo, hi)`.
    pub fn intervals_in(&self, lo: &Scalar, hi: &Scalar) -> Result<Vec<(Scalar, Scalar)>> {
        let mut out: Vec<(Scalar, Scalar)> = Vec::new();
        for p in self.0.pieces_in(lo, hi)? {
            if !p.val {
                continue;
            }
            if let Some(last) = out.last_mut() {
                if last.1 == p.lo {
                    last.1 = p.hi;
                    continue;
                }
            }
            out.push((p.lo, p.hi));
        }
        Ok(out)
    }

    /// Maximal intervals of a finite-measure set.
    pub fn intervals(&self) -> Option<Vec<(Scalar, Scalar)>> {
        if !self.measure().is_finite() {
            return None;
        }
        let lo = self.0.core_lo();
        let hi = self.0.core_hi();
        self.intervals_in(&lo, &hi).ok()
    }

    /// Bounding window `[lo, hi)` of a finite-measure set.
    pub fn bounds(&self) -> Option<(Scalar, Scalar)> {
        let iv = self.intervals()?;
        Some((iv.first()?.0.clone(), iv.last()?.1.clone()))
    }

    pub fn translate(&self, c: &Scalar) -> Self {
        let l = &self.0;
        let core = l.core.iter().map(|p| Piece::new(&p.lo + c, &p.hi + c, p.val)).collect();
        let mut left = l.left.clone();
        left.start = &left.start - c;
        let mut right = l.right.clone();
        right.start = &right.start + c;
        IntervalSet(Layout { core, left, right })
    }

    /// User-facing parts: core intervals, left tail, right tail.
    pub fn parts(&self) -> (Vec<(Scalar, Scalar)>, Option<TailSpec>, Option<TailSpec>) {
        let l = &self.0;
        let core = l
            .core
            .iter()
            .filter(|p| p.val)
            .map(|p| (p.lo.clone(), p.hi.clone()))
            .collect();
        let right = tail_spec(&l.right, false);
        let left = tail_spec(&l.left, true);
        (core, left, right)
    }
}

fn pattern_pieces(period: &Scalar, pattern: &[(Scalar, Scalar)]) -> Result<Vec<Piece<bool>>> {
    if !period.is_positive() {
        return Err(Error::Parse("tail period must be positive".into()));
    }
    let zero = Scalar::zero();
    let mut iv: Vec<(Scalar, Scalar)> = Vec::new();
    for (a, b) in pattern {
        if a < &zero || b > period || a > b {
            return Err(Error::Parse("tail pattern must lie within [0, period)".into()));
        }
        if a < b {
            iv.push((a.clone(), b.clone()));
        }
    }
    iv.sort();
    let mut pieces: Vec<Piece<bool>> = Vec::new();
    let mut at = zero;
    for (a, b) in iv {
        if b <= at {
            continue;
        }
        let a = a.max(at.clone());
        if at < a {
            pieces.push(Piece::new(at.clone(), a.clone(), false));
        }
        pieces.push(Piece::new(a, b.clone(), true));
        at = b;
    }
    if &at < period {
        pieces.push(Piece::new(at, period.clone(), false));
    }
    Ok(pieces)
}

fn tail_spec(t: &Tail<bool>, reflected: bool) -> Option<TailSpec> {
    if t.pieces.iter().all(|p| !p.val) {
        return None;
    }
    let p = &t.period;
    let mut pattern: Vec<(Scalar, Scalar)> = t
        .pieces
        .iter()
        .filter(|q| q.val)
        .map(|q| if reflected { (p - &q.hi, p - &q.lo) } else { (q.lo.clone(), q.hi.clone()) })
        .collect();
    pattern.sort();
    let start = if reflected { -&t.start } else { t.start.clone() };
    Some(TailSpec { start, period: p.clone(), pattern })
}

/// Union of an explicitly listed increasing family.
pub fn sup_increasing(family: &[IntervalSet]) -> Result<IntervalSet> {
    let Some(first) = family.first() else {
        return Err(Error::OutOfRange("empty family".into()));
    };
    for (i, w) in family.windows(2).enumerate() {
        if !w[0].is_subset(&w[1])? {
            return Err(Error::NotIncreasing(i + 1));
        }
    }
    let mut acc = first.clone();
    for a in &family[1..] {
        acc = acc.union(a)?;
    }
    if !acc.measure().is_finite() {
        return Err(Error::InfiniteSupremum);
    }
    Ok(acc)
}

/// `A_t`: the union of `[n, n + t)` over all integers `n`.
pub fn staircase_set(t: &Scalar) -> Result<IntervalSet> {
    let zero = Scalar::zero();
    let one = Scalar::one();
    if t < &zero || t > &one {
        return Err(Error::OutOfRange(alloc::format!("staircase parameter {t} outside [0, 1]")));
    }
    if t.is_zero() {
        return Ok(IntervalSet::empty());
    }
    if t == &one {
        return Ok(IntervalSet::full());
    }
    IntervalSet::two_sided(&TailSpec { start: zero.clone(), period: one, pattern: vec![(zero, t.clone())] })
}
