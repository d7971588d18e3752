//! Eventually periodic partitions of the line carrying a payload on every piece.
//!
//! A [`Layout`] is a bounded core tiled by finitely many pieces plus one periodic
//! tail on each side. The left tail is stored in reflected coordinates
//! (`x -> -x`), so every tail algorithm is written once, for right tails.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result, Witness};
use crate::scalar::Scalar;

/// Maximum number of tail blocks any single operation may unroll or scan.
pub const WINDOW_BUDGET: i64 = 200_000;

/// Data attached to a piece. Tail payloads may depend affinely on the block
/// index; `advance` and `scale` re-express that dependence.
pub trait Payload: Clone + PartialEq + core::fmt::Debug {
    /// The payload of block `m + t`, viewed as a function of `m`.
    fn advance(&self, t: i64) -> Self;
    /// Multiply the per-block slope by `f`.
    fn scale(&self, f: i64) -> Self;
    /// Conjugate by `x -> -x`.
    fn reflect(&self) -> Self;

    /// Value at block `m`, with the block dependence removed.
    fn at_block(&self, m: i64) -> Self {
        self.advance(m).scale(0)
    }

    /// Independent of the block index.
    fn is_stable(&self) -> bool {
        self.advance(1) == *self
    }
}

/// Translation amount `alpha + m*beta` on block `m` of a tail; `beta = 0` in the core.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Shift {
    pub alpha: Scalar,
    pub beta: Scalar,
}

impl Shift {
    pub fn new(alpha: Scalar, beta: Scalar) -> Self {
        Shift { alpha, beta }
    }

    pub fn constant(alpha: Scalar) -> Self {
        Shift { alpha, beta: Scalar::zero() }
    }

    pub fn zero() -> Self {
        Shift::constant(Scalar::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.is_zero() && self.beta.is_zero()
    }

    pub fn add(&self, other: &Shift) -> Shift {
        Shift { alpha: &self.alpha + &other.alpha, beta: &self.beta + &other.beta }
    }

    pub fn neg(&self) -> Shift {
        Shift { alpha: -&self.alpha, beta: -&self.beta }
    }
}

impl Payload for Shift {
    fn advance(&self, t: i64) -> Self {
        if t == 0 || self.beta.is_zero() {
            return self.clone();
        }
        Shift { alpha: &self.alpha + &self.beta.times(t), beta: self.beta.clone() }
    }
    fn scale(&self, f: i64) -> Self {
        if f == 1 {
            return self.clone();
        }
        Shift { alpha: self.alpha.clone(), beta: self.beta.times(f) }
    }
    fn reflect(&self) -> Self {
        self.neg()
    }
}

impl Payload for bool {
    fn advance(&self, _: i64) -> Self {
        *self
    }
    fn scale(&self, _: i64) -> Self {
        *self
    }
    fn reflect(&self) -> Self {
        *self
    }
}

impl Payload for u32 {
    fn advance(&self, _: i64) -> Self {
        *self
    }
    fn scale(&self, _: i64) -> Self {
        *self
    }
    fn reflect(&self) -> Self {
        *self
    }
}

/// Block-independent scalar weight (used for integrands).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Weight(pub Scalar);

impl Payload for Weight {
    fn advance(&self, _: i64) -> Self {
        self.clone()
    }
    fn scale(&self, _: i64) -> Self {
        self.clone()
    }
    fn reflect(&self) -> Self {
        self.clone()
    }
}

impl<P: Payload> Payload for Option<P> {
    fn advance(&self, t: i64) -> Self {
        self.as_ref().map(|p| p.advance(t))
    }
    fn scale(&self, f: i64) -> Self {
        self.as_ref().map(|p| p.scale(f))
    }
    fn reflect(&self) -> Self {
        self.as_ref().map(|p| p.reflect())
    }
}

impl<A: Payload, B: Payload> Payload for (A, B) {
    fn advance(&self, t: i64) -> Self {
        (self.0.advance(t), self.1.advance(t))
    }
    fn scale(&self, f: i64) -> Self {
        (self.0.scale(f), self.1.scale(f))
    }
    fn reflect(&self) -> Self {
        (self.0.reflect(), self.1.reflect())
    }
}

/// Payloads that move points.
pub trait HasShift: Payload {
    fn shift(&self) -> Shift;
}

impl HasShift for Shift {
    fn shift(&self) -> Shift {
        self.clone()
    }
}

impl HasShift for Option<Shift> {
    fn shift(&self) -> Shift {
        self.clone().unwrap_or_else(Shift::zero)
    }
}

impl<B: Payload> HasShift for (Shift, B) {
    fn shift(&self) -> Shift {
        self.0.clone()
    }
}

/// Wraps a payload as a non-moving source for overlays.
#[derive(Clone, PartialEq, Debug)]
struct Still<P>(P);

impl<P: Payload> Payload for Still<P> {
    fn advance(&self, t: i64) -> Self {
        Still(self.0.advance(t))
    }
    fn scale(&self, f: i64) -> Self {
        Still(self.0.scale(f))
    }
    fn reflect(&self) -> Self {
        Still(self.0.reflect())
    }
}

impl<P: Payload> HasShift for Still<P> {
    fn shift(&self) -> Shift {
        Shift::zero()
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Piece<P> {
    pub lo: Scalar,
    pub hi: Scalar,
    pub val: P,
}

impl<P> Piece<P> {
    pub fn new(lo: Scalar, hi: Scalar, val: P) -> Self {
        Piece { lo, hi, val }
    }

    pub fn len(&self) -> Scalar {
        &self.hi - &self.lo
    }
}

/// A periodic region `[start, inf)` whose blocks `[start + mP, start + (m+1)P)`
/// are tiled by `pieces` (offsets within `[0, P)`).
#[derive(Clone, PartialEq, Debug)]
pub struct Tail<P> {
    pub start: Scalar,
    pub period: Scalar,
    pub pieces: Vec<Piece<P>>,
}

impl<P: Payload> Tail<P> {
    pub fn uniform(start: Scalar, val: P) -> Self {
        Tail { start, period: Scalar::one(), pieces: vec![Piece::new(Scalar::zero(), Scalar::one(), val)] }
    }

    /// One piece whose payload does not depend on the block.
    pub fn is_uniform(&self) -> bool {
        self.pieces.len() == 1 && self.pieces[0].val.is_stable()
    }

    pub fn refine(&self, r: i64) -> Tail<P> {
        if r == 1 {
            return self.clone();
        }
        let mut pieces = Vec::with_capacity(self.pieces.len() * r as usize);
        for rho in 0..r {
            let off = self.period.times(rho);
            for p in &self.pieces {
                pieces.push(Piece::new(&off + &p.lo, &off + &p.hi, p.val.advance(rho).scale(r)));
            }
        }
        Tail { start: self.start.clone(), period: self.period.times(r), pieces }
    }

    /// Concrete pieces meeting `[lo, hi)`, which must lie at or after `start`.
    pub fn pieces_in(&self, lo: &Scalar, hi: &Scalar) -> Result<Vec<Piece<P>>> {
        let mut out = Vec::new();
        if lo >= hi {
            return Ok(out);
        }
        if self.is_uniform() {
            out.push(Piece::new(lo.clone(), hi.clone(), self.pieces[0].val.at_block(0)));
            return Ok(out);
        }
        let m0 = ((lo - &self.start) / &self.period).floor();
        let m1 = ((hi - &self.start) / &self.period).ceil();
        let count = &m1 - &m0;
        if count > BigInt::from(WINDOW_BUDGET) {
            return Err(Error::CompositionOutOfClass(format!("scan of {count} tail blocks exceeds the window budget")));
        }
        let m0 = m0.to_i64().ok_or_else(|| Error::CompositionOutOfClass("block index overflow".into()))?;
        let m1 = m1.to_i64().ok_or_else(|| Error::CompositionOutOfClass("block index overflow".into()))?;
        for m in m0..m1 {
            let base = &self.start + &self.period.times(m);
            for p in &self.pieces {
                let a = (&base + &p.lo).max(lo.clone());
                let b = (&base + &p.hi).min(hi.clone());
                if a < b {
                    out.push(Piece::new(a, b, p.val.at_block(m)));
                }
            }
        }
        Ok(out)
    }

    fn merge(&mut self) {
        self.pieces.retain(|p| p.lo < p.hi);
        merge_pieces(&mut self.pieces);
    }
}

fn merge_pieces<P: PartialEq>(pieces: &mut Vec<Piece<P>>) {
    let mut out: Vec<Piece<P>> = Vec::with_capacity(pieces.len());
    for p in pieces.drain(..) {
        if let Some(last) = out.last_mut() {
            if last.val == p.val && last.hi == p.lo {
                last.hi = p.hi;
                continue;
            }
        }
        out.push(p);
    }
    *pieces = out;
}

/// A total partition of the line with payloads; see the module docs.
#[derive(Clone, PartialEq, Debug)]
pub struct Layout<P> {
    pub core: Vec<Piece<P>>,
    /// Left tail in reflected coordinates: its start is `-core_lo`.
    pub left: Tail<P>,
    pub right: Tail<P>,
}

impl<P: Payload> Layout<P> {
    pub fn constant(val: P) -> Self {
        Layout {
            core: Vec::new(),
            left: Tail::uniform(Scalar::zero(), val.reflect()),
            right: Tail::uniform(Scalar::zero(), val),
        }
    }

    /// Finite pieces inside a constant background. Pieces must be sorted and
    /// disjoint; gaps receive `background`.
    pub fn from_pieces(pieces: Vec<Piece<P>>, background: P) -> Self {
        let Some(first) = pieces.first() else {
            return Layout::constant(background);
        };
        let lo = first.lo.clone();
        let hi = pieces.last().map(|p| p.hi.clone()).unwrap_or_else(|| lo.clone());
        let mut core = Vec::new();
        let mut at = lo.clone();
        for p in pieces {
            if at < p.lo {
                core.push(Piece::new(at.clone(), p.lo.clone(), background.clone()));
            }
            at = p.hi.clone();
            core.push(p);
        }
        Layout {
            core,
            left: Tail::uniform(-&lo, background.reflect()),
            right: Tail::uniform(hi, background),
        }
        .canonical()
    }

    pub fn core_lo(&self) -> Scalar {
        -&self.left.start
    }

    pub fn core_hi(&self) -> Scalar {
        self.right.start.clone()
    }

    pub fn reflect(&self) -> Layout<P> {
        let core = self
            .core
            .iter()
            .rev()
            .map(|p| Piece::new(-&p.hi, -&p.lo, p.val.reflect()))
            .collect();
        Layout { core, left: self.right.clone(), right: self.left.clone() }
    }

    /// Apply `f` to every payload in real orientation.
    pub fn map<Q: Payload>(&self, f: impl Fn(&P) -> Q) -> Layout<Q> {
        let core = self.core.iter().map(|p| Piece::new(p.lo.clone(), p.hi.clone(), f(&p.val))).collect();
        let right = map_tail(&self.right, &f);
        let left = map_tail(&self.left, &|v: &P| f(&v.reflect()).reflect());
        Layout { core, left, right }
    }

    /// Apply a fallible `f` to every payload in real orientation.
    pub fn try_map<Q: Payload>(&self, f: impl Fn(&P) -> Result<Q>) -> Result<Layout<Q>> {
        let mut core = Vec::with_capacity(self.core.len());
        for p in &self.core {
            core.push(Piece::new(p.lo.clone(), p.hi.clone(), f(&p.val)?));
        }
        let right = try_map_tail(&self.right, &f)?;
        let left = try_map_tail(&self.left, &|v: &P| Ok(f(&v.reflect())?.reflect()))?;
        Ok(Layout { core, left, right })
    }

    /// Unroll `t` blocks of the right tail into the core.
    pub fn unroll_right(&mut self, t: i64) {
        if t <= 0 {
            return;
        }
        let tail = &self.right;
        for m in 0..t {
            let base = &tail.start + &tail.period.times(m);
            for p in &tail.pieces {
                self.core.push(Piece::new(&base + &p.lo, &base + &p.hi, p.val.at_block(m)));
            }
        }
        let start = &self.right.start + &self.right.period.times(t);
        for p in &mut self.right.pieces {
            p.val = p.val.advance(t);
        }
        self.right.start = start;
    }

    pub fn unroll_left(&mut self, t: i64) {
        if t <= 0 {
            return;
        }
        let mut r = self.reflect();
        r.unroll_right(t);
        *self = r.reflect();
    }

    /// Extend the core window to cover `[lo, hi)`, unrolling whole blocks.
    pub fn widen(&mut self, lo: &Scalar, hi: &Scalar) -> Result<()> {
        if hi > &self.right.start {
            let t = ((hi - &self.right.start) / &self.right.period).ceil();
            self.unroll_right(block_count(&t)?);
        }
        let cl = self.core_lo();
        if lo < &cl {
            let t = ((&cl - lo) / &self.left.period).ceil();
            self.unroll_left(block_count(&t)?);
        }
        Ok(())
    }

    /// Concrete pieces (real orientation) meeting `[lo, hi)`.
    pub fn pieces_in(&self, lo: &Scalar, hi: &Scalar) -> Result<Vec<Piece<P>>> {
        let mut out = Vec::new();
        if lo >= hi {
            return Ok(out);
        }
        let cl = self.core_lo();
        let ch = self.core_hi();
        if lo < &cl {
            let top = hi.clone().min(cl.clone());
            let mut left = self.left.pieces_in(&-&top, &-lo)?;
            left.reverse();
            for p in left {
                out.push(Piece::new(-&p.hi, -&p.lo, p.val.reflect()));
            }
        }
        let a = lo.clone().max(cl.clone());
        let b = hi.clone().min(ch.clone());
        if a < b {
            let start = self.core.partition_point(|p| p.hi <= a);
            for p in &self.core[start..] {
                if p.lo >= b {
                    break;
                }
                let x = p.lo.clone().max(a.clone());
                let y = p.hi.clone().min(b.clone());
                if x < y {
                    out.push(Piece::new(x, y, p.val.clone()));
                }
            }
        }
        if hi > &ch {
            out.extend(self.right.pieces_in(&lo.clone().max(ch.clone()), hi)?);
        }
        Ok(out)
    }

    /// Concrete payload at `x`. Left-tail pieces are closed on the right.
    pub fn value_at(&self, x: &Scalar) -> P {
        let ch = self.core_hi();
        if x >= &ch {
            return tail_value(&self.right, x);
        }
        let cl = self.core_lo();
        if x < &cl {
            return tail_value(&self.left, &-x).reflect();
        }
        let i = self.core.partition_point(|p| &p.hi <= x);
        self.core[i].val.clone()
    }

    /// Every stored piece: core pieces plus one copy of each tail pattern.
    pub fn all_payloads(&self) -> impl Iterator<Item = &P> {
        self.core
            .iter()
            .chain(self.right.pieces.iter())
            .chain(self.left.pieces.iter())
            .map(|p| &p.val)
    }

    /// Merge equal neighbours and pull tail starts inward while the core
    /// repeats the tail pattern.
    pub fn canonical(mut self) -> Self {
        self.core.retain(|p| p.lo < p.hi);
        merge_pieces(&mut self.core);
        self.right.merge();
        self.left.merge();
        normalise_uniform(&mut self.right);
        normalise_uniform(&mut self.left);
        let mut out = self.settle();
        if out.core.is_empty() && out.left.is_uniform() && out.right.is_uniform() && out.left.pieces[0].val.reflect() == out.right.pieces[0].val {
            out.left.start = Scalar::zero();
            out.right.start = Scalar::zero();
        }
        out
    }

    fn settle(mut self) -> Self {
        self.pull_right();
        let mut r = self.reflect();
        r.pull_right();
        let mut out = r.reflect();
        merge_pieces(&mut out.core);
        out
    }

    /// With an empty core, slide a periodic right tail back over a uniform left tail.
    fn pull_through_left(&mut self) {
        if self.right.is_uniform() || !self.left.is_uniform() {
            return;
        }
        let v = self.left.pieces[0].val.reflect();
        loop {
            let tail_last = self.right.pieces.last().expect("tail has pieces");
            if tail_last.val.at_block(-1) != v {
                return;
            }
            let d = tail_last.len();
            let n = self.right.pieces.len();
            let mut pieces = Vec::with_capacity(n);
            pieces.push(Piece::new(Scalar::zero(), d.clone(), tail_last.val.advance(-1)));
            for q in &self.right.pieces[..n - 1] {
                pieces.push(Piece::new(&q.lo + &d, &q.hi + &d, q.val.clone()));
            }
            self.right.pieces = pieces;
            self.right.merge();
            self.right.start = &self.right.start - &d;
            self.left.start = -&self.right.start;
        }
    }

    fn pull_right(&mut self) {
        loop {
            let Some(last) = self.core.last() else {
                self.pull_through_left();
                return;
            };
            if self.right.is_uniform() {
                if last.val == self.right.pieces[0].val.at_block(0) {
                    self.right.start = last.lo.clone();
                    self.core.pop();
                    continue;
                }
                return;
            }
            let tail_last = self.right.pieces.last().expect("tail has pieces");
            if last.val != tail_last.val.at_block(-1) {
                return;
            }
            let d = last.len().min(tail_last.len());
            if !d.is_positive() {
                return;
            }
            // rotate the pattern so the block starts `d` earlier
            let n = self.right.pieces.len();
            let mut pieces = Vec::with_capacity(n + 1);
            pieces.push(Piece::new(Scalar::zero(), d.clone(), tail_last.val.advance(-1)));
            for q in &self.right.pieces[..n - 1] {
                pieces.push(Piece::new(&q.lo + &d, &q.hi + &d, q.val.clone()));
            }
            let cut = &tail_last.lo + &d;
            if cut < self.right.period {
                pieces.push(Piece::new(cut, self.right.period.clone(), tail_last.val.clone()));
            }
            self.right.pieces = pieces;
            self.right.merge();
            self.right.start = &self.right.start - &d;
            let last = self.core.last_mut().expect("core is non-empty");
            if last.len() == d {
                self.core.pop();
            } else {
                last.hi = &last.hi - &d;
            }
        }
    }
}

pub(crate) fn block_count(t: &BigInt) -> Result<i64> {
    if t > &BigInt::from(WINDOW_BUDGET) {
        return Err(Error::CompositionOutOfClass(format!("unrolling {t} blocks exceeds the window budget")));
    }
    Ok(t.to_i64().unwrap_or(0).max(0))
}

fn normalise_uniform<P: Payload>(t: &mut Tail<P>) {
    if t.pieces.len() == 1 && t.pieces[0].val.is_stable() && t.period != Scalar::one() {
        t.period = Scalar::one();
        t.pieces[0].lo = Scalar::zero();
        t.pieces[0].hi = Scalar::one();
    }
}

fn tail_value<P: Payload>(t: &Tail<P>, x: &Scalar) -> P {
    let m = ((x - &t.start) / &t.period).floor();
    let u = x - &t.start - t.period.times_big(&m);
    let m = m.to_i64().unwrap_or(i64::MAX);
    let i = t.pieces.partition_point(|p| p.hi <= u).min(t.pieces.len() - 1);
    t.pieces[i].val.at_block(m)
}

fn map_tail<P: Payload, Q: Payload>(t: &Tail<P>, f: &dyn Fn(&P) -> Q) -> Tail<Q> {
    Tail {
        start: t.start.clone(),
        period: t.period.clone(),
        pieces: t.pieces.iter().map(|p| Piece::new(p.lo.clone(), p.hi.clone(), f(&p.val))).collect(),
    }
}

fn try_map_tail<P: Payload, Q: Payload>(t: &Tail<P>, f: &dyn Fn(&P) -> Result<Q>) -> Result<Tail<Q>> {
    let mut pieces = Vec::with_capacity(t.pieces.len());
    for p in &t.pieces {
        pieces.push(Piece::new(p.lo.clone(), p.hi.clone(), f(&p.val)?));
    }
    Ok(Tail { start: t.start.clone(), period: t.period.clone(), pieces })
}

/// Image stride of a tail piece per block.
fn stride(period: &Scalar, sh: &Shift) -> Scalar {
    period + &sh.beta
}

/// Refine and unroll the right tail of `s` so that every tail piece has an
/// image stride that is a whole number of target blocks and its images lie
/// inside the target tail on the side they travel to.
fn prep_right<P: HasShift, Q: Payload>(s: &mut Layout<P>, tgt: &Layout<Q>, reflected: bool) -> Result<()> {
    if s.right.is_uniform() && s.right.pieces[0].val.shift().beta.is_zero() && !tgt.right.is_uniform() {
        let val = s.right.pieces[0].val.clone();
        s.right.period = tgt.right.period.clone();
        s.right.pieces = vec![Piece::new(Scalar::zero(), tgt.right.period.clone(), val)];
    }
    let mut r = BigInt::one();
    for p in &s.right.pieces {
        let sh = p.val.shift();
        let sigma = stride(&s.right.period, &sh);
        if sigma.is_zero() {
            let c = &s.right.start + &p.lo + &sh.alpha;
            let w = if reflected {
                Witness::new(-(&c + p.len()), -c)
            } else {
                Witness::new(c.clone(), &c + p.len())
            };
            return Err(Error::ImageOverlap(w));
        }
        let side = if sigma.is_positive() { &tgt.right } else { &tgt.left };
        if side.is_uniform() {
            continue;
        }
        let q = sigma.abs().ratio(&side.period)?.ok_or(Error::IncommensurablePeriods)?;
        r = r.lcm(q.denom());
    }
    let r = block_count(&r)?;
    if r > 1 {
        s.right = s.right.refine(r);
    }
    let tr = tgt.core_hi();
    let tl = tgt.core_lo();
    let mut need = BigInt::zero();
    for p in &s.right.pieces {
        let sh = p.val.shift();
        let sigma = stride(&s.right.period, &sh);
        let c = &s.right.start + &p.lo + &sh.alpha;
        let k = if sigma.is_positive() {
            ((&tr - &c) / &sigma).ceil()
        } else {
            ((&c + p.len() - &tl) / sigma.abs()).ceil()
        };
        if k > need {
            need = k;
        }
    }
    let need = block_count(&need)?;
    s.unroll_right(need);
    Ok(())
}

fn tail_pullback<P: HasShift, Q: Payload>(tail: &Tail<P>, tgt: &Layout<Q>) -> Result<Tail<(P, Q)>> {
    let mut pieces = Vec::new();
    for p in &tail.pieces {
        let sh = p.val.shift();
        let sigma = stride(&tail.period, &sh);
        let len = p.len();
        let c = &tail.start + &p.lo + &sh.alpha;
        let (side, cc, rev) = if sigma.is_positive() {
            (&tgt.right, c, false)
        } else {
            (&tgt.left, -(&c + &len), true)
        };
        if side.is_uniform() {
            let q = side.pieces[0].val.at_block(0);
            let q = if rev { q.reflect() } else { q };
            pieces.push(Piece::new(p.lo.clone(), p.hi.clone(), (p.val.clone(), q)));
            continue;
        }
        let qp = &side.period;
        let num = sigma
            .abs()
            .ratio(qp)?
            .and_then(|r| r.is_integer().then(|| r.to_integer()))
            .ok_or(Error::IncommensurablePeriods)?;
        let num = block_count(&num)?;
        let o = &cc - &side.start;
        let kb = (&o / qp).floor();
        let k = block_count(&kb)?;
        let r0 = &o - qp.times(k);
        let end = &r0 + &len;
        let mut e = 0i64;
        loop {
            let base = qp.times(e);
            if base >= end {
                break;
            }
            for tp in &side.pieces {
                let a = (&base + &tp.lo).max(r0.clone());
                let b = (&base + &tp.hi).min(end.clone());
                if a >= b {
                    continue;
                }
                let t0 = &a - &r0;
                let t1 = &b - &r0;
                let (lo, hi) = if rev {
                    (&p.lo + &len - &t1, &p.lo + &len - &t0)
                } else {
                    (&p.lo + &t0, &p.lo + &t1)
                };
                let q = tp.val.advance(k + e).scale(num);
                let q = if rev { q.reflect() } else { q };
                pieces.push(Piece::new(lo, hi, (p.val.clone(), q)));
            }
            e += 1;
        }
    }
    pieces.sort_by(|x, y| x.lo.cmp(&y.lo));
    Ok(Tail { start: tail.start.clone(), period: tail.period.clone(), pieces })
}

/// Pair every point `x` with the source payload at `x` and the target payload
/// at the image of `x` under the source shift.
pub fn pullback<P: HasShift, Q: Payload>(src: &Layout<P>, tgt: &Layout<Q>) -> Result<Layout<(P, Q)>> {
    let mut s = src.clone();
    prep_right(&mut s, tgt, false)?;
    let mut rs = s.reflect();
    let rt = tgt.reflect();
    prep_right(&mut rs, &rt, true)?;
    let s = rs.reflect();
    let mut core = Vec::new();
    for p in &s.core {
        let a = p.val.shift().alpha;
        for q in tgt.pieces_in(&(&p.lo + &a), &(&p.hi + &a))? {
            core.push(Piece::new(&q.lo - &a, &q.hi - &a, (p.val.clone(), q.val)));
        }
    }
    let right = tail_pullback(&s.right, tgt)?;
    let left = tail_pullback(&s.left, &rt)?;
    Ok(Layout { core, left, right }.canonical())
}

/// Common refinement of two layouts.
pub fn overlay<P: Payload, Q: Payload>(x: &Layout<P>, y: &Layout<Q>) -> Result<Layout<(P, Q)>> {
    let src = Layout {
        core: x.core.iter().map(|p| Piece::new(p.lo.clone(), p.hi.clone(), Still(p.val.clone()))).collect(),
        left: map_tail(&x.left, &|v: &P| Still(v.clone())),
        right: map_tail(&x.right, &|v: &P| Still(v.clone())),
    };
    let out = pullback(&src, y)?;
    Ok(Layout {
        core: out.core.into_iter().map(|p| Piece::new(p.lo, p.hi, (p.val.0 .0, p.val.1))).collect(),
        left: map_tail(&out.left, &|v: &(Still<P>, Q)| (v.0 .0.clone(), v.1.clone())),
        right: map_tail(&out.right, &|v: &(Still<P>, Q)| (v.0 .0.clone(), v.1.clone())),
    }
    .canonical())
}

/// Overlay and combine payloads pointwise (real orientation).
pub fn zip_with<P: Payload, Q: Payload, R: Payload>(
    x: &Layout<P>,
    y: &Layout<Q>,
    f: impl Fn(&P, &Q) -> R,
) -> Result<Layout<R>> {
    Ok(overlay(x, y)?.map(|(p, q)| f(p, q)).canonical())
}

/// Find the first piece (core first, then the first block of each tail)
/// whose payload satisfies `pred`; returns it as a real interval.
pub fn find_piece<P: Payload>(l: &Layout<P>, pred: impl Fn(&P) -> bool) -> Option<Witness> {
    for p in &l.core {
        if pred(&p.val) {
            return Some(Witness::new(p.lo.clone(), p.hi.clone()));
        }
    }
    for p in &l.right.pieces {
        if pred(&p.val.at_block(0)) {
            return Some(Witness::new(&l.right.start + &p.lo, &l.right.start + &p.hi));
        }
    }
    for p in &l.left.pieces {
        if pred(&p.val.at_block(0).reflect()) {
            return Some(Witness::new(-(&l.left.start + &p.hi), -(&l.left.start + &p.lo)));
        }
    }
    None
}

/// Compare two scalars, used by sort routines.
pub fn cmp_lo<P>(a: &Piece<P>, b: &Piece<P>) -> Ordering {
    a.lo.cmp(&b.lo)
}
