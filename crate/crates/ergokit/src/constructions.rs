//! Separators, exchanging involutions, conjugacies and generation of involutions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::layout::{block_count, zip_with, Layout, Piece, Shift, Tail, WINDOW_BUDGET};
use crate::map::{settle, Ept, PartialIso};
use crate::scalar::{ExtMeasure, Scalar};
use crate::set::IntervalSet;

/// One periodic run of a set towards an infinity, in outward coordinates
/// (the real line for a right run, its reflection for a left run).
#[derive(Clone, Debug)]
struct Stream {
    prefix: Vec<(Scalar, Scalar)>,
    start: Scalar,
    period: Scalar,
    pattern: Vec<(Scalar, Scalar)>,
    left: bool,
}

fn total(iv: &[(Scalar, Scalar)]) -> Scalar {
    let mut m = Scalar::zero();
    for (a, b) in iv {
        m += &(b - a);
    }
    m
}

impl Stream {
    fn block_measure(&self) -> Scalar {
        total(&self.pattern)
    }

    /// The first `m` units of measure, and where they end.
    fn take(&self, m: &Scalar) -> Result<(Vec<(Scalar, Scalar)>, Scalar)> {
        let mut out = Vec::new();
        let mut acc = Scalar::zero();
        let mut pos = None;
        let mut push = |a: &Scalar, b: &Scalar, acc: &mut Scalar, out: &mut Vec<(Scalar, Scalar)>| -> bool {
            if &*acc >= m {
                return true;
            }
            let room = m - &*acc;
            let len = b - a;
            if len <= room {
                out.push((a.clone(), b.clone()));
                *acc += &len;
                pos = Some(b.clone());
            } else {
                let e = a + &room;
                out.push((a.clone(), e.clone()));
                *acc += &room;
                pos = Some(e);
            }
            &*acc >= m
        };
        let mut done = m.is_zero();
        for (a, b) in &self.prefix {
            if done {
                break;
            }
            done = push(a, b, &mut acc, &mut out);
        }
        let mut k = 0i64;
        while !done {
            if k > WINDOW_BUDGET {
                return Err(Error::CompositionOutOfClass("matching prefix exceeds the window budget".into()));
            }
            let base = &self.start + &self.period.times(k);
            for (a, b) in &self.pattern {
                if done {
                    break;
                }
                done = push(&(&base + a), &(&base + b), &mut acc, &mut out);
            }
            k += 1;
        }
        let end = pos.unwrap_or_else(|| self.start.clone()).max(self.start.clone());
        Ok((out, end))
    }

    /// Tail intervals inside `[from, from + w)`, with `from >= start`.
    fn window(&self, from: &Scalar, w: &Scalar) -> Result<Vec<(Scalar, Scalar)>> {
        let to = from + w;
        let k0 = ((from - &self.start) / &self.period).floor();
        let k1 = ((&to - &self.start) / &self.period).ceil();
        let k0 = block_count(&k0)?;
        let k1 = block_count(&k1)?;
        let mut out = Vec::new();
        for k in k0..k1 {
            let base = &self.start + &self.period.times(k);
            for (a, b) in &self.pattern {
                let x = (&base + a).max(from.clone());
                let y = (&base + b).min(to.clone());
                if x < y {
                    out.push((x, y));
                }
            }
        }
        Ok(out)
    }

    /// Even or odd blocks of this run.
    fn split(&self, residue: i64) -> Stream {
        Stream {
            prefix: if residue == 0 { self.prefix.clone() } else { Vec::new() },
            start: &self.start + &self.period.times(residue),
            period: self.period.times(2),
            pattern: self.pattern.clone(),
            left: self.left,
        }
    }
}

fn true_pieces(t: &Tail<bool>) -> Vec<(Scalar, Scalar)> {
    t.pieces.iter().filter(|p| p.val).map(|p| (p.lo.clone(), p.hi.clone())).collect()
}

/// Right and left runs of an infinite-measure set. Core intervals ride on the
/// right run when there is one.
fn streams(a: &IntervalSet) -> (Option<Stream>, Option<Stream>) {
    let l = a.layout();
    let core: Vec<(Scalar, Scalar)> = l.core.iter().filter(|p| p.val).map(|p| (p.lo.clone(), p.hi.clone())).collect();
    let rp = true_pieces(&l.right);
    let lp = true_pieces(&l.left);
    let has_r = !rp.is_empty();
    let has_l = !lp.is_empty();
    let right = has_r.then(|| Stream {
        prefix: core.clone(),
        start: l.right.start.clone(),
        period: l.right.period.clone(),
        pattern: rp,
        left: false,
    });
    let left = has_l.then(|| Stream {
        prefix: if has_r { Vec::new() } else { core.iter().rev().map(|(a, b)| (-b, -a)).collect() },
        start: l.left.start.clone(),
        period: l.left.period.clone(),
        pattern: lp,
        left: true,
    });
    (right, left)
}

/// Pair two equal-length ordered interval lists chunk by chunk.
fn match_lists(xs: &[(Scalar, Scalar)], ys: &[(Scalar, Scalar)]) -> Vec<(Scalar, Scalar, Scalar, Scalar)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut xa = xs.first().map(|p| p.0.clone());
    let mut ya = ys.first().map(|p| p.0.clone());
    while i < xs.len() && j < ys.len() {
        let x0 = xa.clone().unwrap();
        let y0 = ya.clone().unwrap();
        let lx = &xs[i].1 - &x0;
        let ly = &ys[j].1 - &y0;
        let len = lx.clone().min(ly.clone());
        out.push((x0.clone(), &x0 + &len, y0.clone(), &y0 + &len));
        if lx == len {
            i += 1;
            xa = xs.get(i).map(|p| p.0.clone());
        } else {
            xa = Some(&x0 + &len);
        }
        if ly == len {
            j += 1;
            ya = ys.get(j).map(|p| p.0.clone());
        } else {
            ya = Some(&y0 + &len);
        }
    }
    out
}

fn fill(pieces: Vec<Piece<Option<Shift>>>, lo: Scalar, hi: Scalar) -> Vec<Piece<Option<Shift>>> {
    let mut pieces = pieces;
    pieces.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut out = Vec::new();
    let mut at = lo;
    for p in pieces {
        if at < p.lo {
            out.push(Piece::new(at.clone(), p.lo.clone(), None));
        }
        at = p.hi.clone();
        out.push(p);
    }
    if at < hi {
        out.push(Piece::new(at, hi, None));
    }
    out
}

fn pair_streams(xs: &Stream, ys: &Stream) -> Result<Layout<Option<Shift>>> {
    let flip = xs.left != ys.left;
    let work = |a: &Scalar, b: &Scalar| if flip { -b } else { a.clone() };
    let a = xs.block_measure();
    let b = ys.block_measure();
    let r = a.ratio(&b)?.ok_or(Error::IncommensurablePeriods)?;
    let nx = block_count(r.denom())?;
    let ny = block_count(r.numer())?;
    let c = total(&xs.prefix).max(total(&ys.prefix));
    let (xf, xstar) = xs.take(&c)?;
    let (yf, ystar) = ys.take(&c)?;
    let mut core = Vec::new();
    for (x0, x1, y0, y1) in match_lists(&xf, &yf) {
        let sh = &work(&y0, &y1) - &x0;
        core.push(Piece::new(x0, x1, Some(Shift::constant(sh))));
    }
    let wx = xs.period.times(nx);
    let wy = ys.period.times(ny);
    let xw = xs.window(&xstar, &wx)?;
    let yw = ys.window(&ystar, &wy)?;
    let beta = if flip { -&wy - &wx } else { &wy - &wx };
    let mut pat = Vec::new();
    for (x0, x1, y0, y1) in match_lists(&xw, &yw) {
        let alpha = &work(&y0, &y1) - &x0;
        pat.push(Piece::new(&x0 - &xstar, &x1 - &xstar, Some(Shift::new(alpha, beta.clone()))));
    }
    let lo = core.iter().map(|p| p.lo.clone()).min().unwrap_or_else(|| xstar.clone()).min(xstar.clone());
    let core = fill(core, lo.clone(), xstar.clone());
    let pieces = fill(pat, Scalar::zero(), wx.clone());
    let l = Layout {
        core,
        left: Tail::uniform(-&lo, None),
        right: Tail { start: xstar, period: wx, pieces },
    };
    Ok(if xs.left { l.reflect() } else { l })
}

/// Leftmost-first greedy matching of `x` onto `y`.
fn match_sets(x: &IntervalSet, y: &IntervalSet) -> Result<PartialIso> {
    let mx = x.measure();
    let my = y.measure();
    if mx != my {
        return Err(Error::MeasureMismatch(format!("{mx} against {my}")));
    }
    let phi = match mx {
        ExtMeasure::Finite(_) => {
            let xs = x.intervals().unwrap_or_default();
            let ys = y.intervals().unwrap_or_default();
            let pieces = match_lists(&xs, &ys)
                .into_iter()
                .map(|(x0, x1, y0, _)| {
                    let sh = &y0 - &x0;
                    Piece::new(x0, x1, Some(Shift::constant(sh)))
                })
                .collect();
            PartialIso::from_layout(Layout::from_pieces(pieces, None))?
        }
        ExtMeasure::Infinite => {
            let (xr, xl) = streams(x);
            let (yr, yl) = streams(y);
            let xv: Vec<Stream> = xr.into_iter().chain(xl).collect();
            let yv: Vec<Stream> = yr.into_iter().chain(yl).collect();
            let pairs: Vec<(Stream, Stream)> = match (xv.len(), yv.len()) {
                (1, 1) => vec![(xv[0].clone(), yv[0].clone())],
                (2, 2) => vec![(xv[0].clone(), yv[0].clone()), (xv[1].clone(), yv[1].clone())],
                (2, 1) => vec![(xv[0].clone(), yv[0].split(0)), (xv[1].clone(), yv[0].split(1))],
                (1, 2) => vec![(xv[0].split(0), yv[0].clone()), (xv[0].split(1), yv[1].clone())],
                _ => return Err(Error::MeasureMismatch("infinite set without a periodic run".into())),
            };
            let mut parts = Vec::new();
            for (a, b) in &pairs {
                parts.push(PartialIso::from_layout(pair_streams(a, b)?)?);
            }
            PartialIso::paste(&parts)?
        }
    };
    if !phi.dom().eq_ae(x)? || !phi.rng()?.eq_ae(y)? {
        return Err(Error::VerificationFailed("matcher domain or range".into()));
    }
    Ok(phi)
}

/// A partial isomorphism from `a` onto `b`.
pub fn partial_iso_between(a: &IntervalSet, b: &IntervalSet) -> Result<PartialIso> {
    match_sets(a, b)
}

/// An involution supported in `A Δ B` carrying `A` onto `B`.
pub fn exchange_involution(a: &IntervalSet, b: &IntervalSet) -> Result<Ept> {
    let x = a.diff(b)?;
    let y = b.diff(a)?;
    let phi = match_sets(&x, &y)?;
    let u = PartialIso::paste(&[phi.clone(), phi.inverse()?])?.extend_by_identity()?;
    if !u.is_involution()? || !u.image(a)?.eq_ae(b)? || !u.support()?.is_subset(&a.symdiff(b)?)? {
        return Err(Error::VerificationFailed("exchanging involution".into()));
    }
    Ok(u)
}

/// A map supported in `C` carrying `A` onto `B` and `C \ A` onto `C \ B`.
pub fn send_within(c: &IntervalSet, a: &IntervalSet, b: &IntervalSet) -> Result<Ept> {
    if !a.is_subset(c)? || !b.is_subset(c)? {
        return Err(Error::NotSubset);
    }
    let ca = c.diff(a)?;
    let cb = c.diff(b)?;
    if a.measure() != b.measure() || ca.measure() != cb.measure() {
        return Err(Error::MeasureMismatch(format!(
            "{} and {} against {} and {}",
            a.measure(),
            ca.measure(),
            b.measure(),
            cb.measure()
        )));
    }
    let t = PartialIso::paste(&[match_sets(a, b)?, match_sets(&ca, &cb)?])?.extend_by_identity()?;
    if !t.image(a)?.eq_ae(b)? || !t.image(&ca)?.eq_ae(&cb)? || !t.support()?.is_subset(c)? {
        return Err(Error::VerificationFailed("send within".into()));
    }
    Ok(t)
}

fn chop(lo: &Scalar, hi: &Scalar, step: &Scalar) -> Result<Vec<(Scalar, Scalar)>> {
    let len = hi - lo;
    let n = (&len / step).ceil();
    let n = block_count(&n)?.max(1);
    let w = &len / &Scalar::int(n);
    Ok((0..n).map(|i| (lo + &w.times(i), lo + &w.times(i + 1))).collect())
}

fn sparse_tail_set(left: bool, start: Scalar, period: Scalar, lo: &Scalar, hi: &Scalar) -> IntervalSet {
    let mut pieces = Vec::new();
    if lo.is_positive() {
        pieces.push(Piece::new(Scalar::zero(), lo.clone(), false));
    }
    pieces.push(Piece::new(lo.clone(), hi.clone(), true));
    if hi < &period {
        pieces.push(Piece::new(hi.clone(), period.clone(), false));
    }
    let tail = Tail { start: start.clone(), period, pieces };
    let other = Tail::uniform(-&start, false);
    let l = if left { Layout { core: Vec::new(), left: tail, right: other } } else { Layout { core: Vec::new(), left: other, right: tail } };
    IntervalSet::from_layout(l)
}

/// `A ⊆ C ∩ supp T` with `A ∩ T(A)` null and `C ∩ supp T ⊆ A ∪ T(A) ∪ T⁻¹(A)`.
pub fn separator(t: &Ept, c: &IntervalSet) -> Result<IntervalSet> {
    let s = t.support()?.intersect(c)?;
    if s.is_empty() {
        return Ok(IntervalSet::empty());
    }
    let inv = t.inverse()?;
    let l = zip_with(&settle(t.layout())?, s.layout(), |sh, inside| inside.then(|| sh.clone()))?;
    let mut fixed = Vec::new();
    for p in &l.core {
        if let Some(sh) = &p.val {
            for (a, b) in chop(&p.lo, &p.hi, &sh.alpha.abs())? {
                fixed.push(IntervalSet::interval(a, b));
            }
        }
    }
    // (left side, chunk) for every moving tail piece
    let mut chunks = Vec::new();
    for (left, tail) in [(false, &l.right), (true, &l.left)] {
        for p in &tail.pieces {
            if let Some(sh) = &p.val {
                let bound = sh.alpha.abs().min((&sh.alpha + &sh.beta).abs());
                for ch in chop(&p.lo, &p.hi, &bound)? {
                    chunks.push((left, tail.start.clone(), tail.period.clone(), ch));
                }
            }
        }
    }
    for b in &fixed {
        if !t.image(b)?.is_disjoint(b)? {
            return Err(Error::OutOfClass("core chunk meets its own image".into()));
        }
    }
    let mut classes = None;
    'k: for k in 3..=12i64 {
        let mut cls = Vec::new();
        for res in 0..k {
            for want_left in [false, true] {
                for (left, start, period, (lo, hi)) in &chunks {
                    if *left != want_left {
                        continue;
                    }
                    // global block index g = m on the right and -m-1 on the left
                    let m = if *left { (-res - 1).rem_euclid(k) } else { res };
                    let set = sparse_tail_set(*left, start + &period.times(m), period.times(k), lo, hi);
                    if !t.image(&set)?.is_disjoint(&set)? {
                        continue 'k;
                    }
                    cls.push(set);
                }
            }
        }
        classes = Some(cls);
        break;
    }
    let Some(tail_classes) = classes else {
        return Err(Error::OutOfClass("no periodic colouring separates the tail".into()));
    };
    let mut a = IntervalSet::empty();
    for b in fixed.iter().chain(tail_classes.iter()) {
        let blocked = inv.preimage(&a)?.union(&t.preimage(&a)?)?;
        let fresh = b.diff(&blocked)?;
        if !fresh.is_empty() {
            a = a.union(&fresh)?;
        }
    }
    let ta = t.image(&a)?;
    let ok = a.is_subset(&s)?
        && a.is_disjoint(&ta)?
        && s.is_subset(&a.union(&ta)?.union(&t.preimage(&a)?)?)?;
    if !ok {
        return Err(Error::VerificationFailed("separator identity".into()));
    }
    Ok(a)
}

/// A word in named generators; each letter is `c g^e c⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct Letter {
    pub generator: String,
    pub exponent: i8,
    pub conjugator: Option<Ept>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct GroupWord {
    pub letters: Vec<Letter>,
}

impl GroupWord {
    pub fn letter(generator: &str, exponent: i8) -> Letter {
        Letter { generator: generator.to_string(), exponent, conjugator: None }
    }

    /// Product of the letters, leftmost acting last.
    pub fn eval(&self, gens: &BTreeMap<String, Ept>) -> Result<Ept> {
        let mut acc = Ept::identity();
        for l in &self.letters {
            let g = gens
                .get(&l.generator)
                .ok_or_else(|| Error::OutOfRange(format!("unknown generator {}", l.generator)))?;
            let mut v = if l.exponent < 0 { g.inverse()? } else { g.clone() };
            if let Some(c) = &l.conjugator {
                v = v.conjugate_by(c)?;
            }
            acc = acc.compose(&v)?;
        }
        Ok(acc)
    }

    /// Word for the inverse element.
    pub fn inverse(&self) -> GroupWord {
        let letters = self
            .letters
            .iter()
            .rev()
            .map(|l| Letter { generator: l.generator.clone(), exponent: -l.exponent, conjugator: l.conjugator.clone() })
            .collect();
        GroupWord { letters }
    }

    /// Word for `c w c⁻¹`.
    pub fn conjugate(&self, c: &Ept) -> Result<GroupWord> {
        let mut letters = Vec::with_capacity(self.letters.len());
        for l in &self.letters {
            let conj = match &l.conjugator {
                Some(d) => c.compose(d)?,
                None => c.clone(),
            };
            letters.push(Letter { generator: l.generator.clone(), exponent: l.exponent, conjugator: Some(conj) });
        }
        Ok(GroupWord { letters })
    }

    pub fn then(mut self, other: GroupWord) -> GroupWord {
        self.letters.extend(other.letters);
        self
    }
}

/// Cut `b` at the point where half of its measure lies to the left.
pub(crate) fn halves(b: &IntervalSet) -> Result<(IntervalSet, IntervalSet)> {
    let m = b.measure();
    let half = match &m {
        ExtMeasure::Finite(v) => v / &Scalar::int(2),
        ExtMeasure::Infinite => return Err(Error::OutOfRange("set must have finite measure".into())),
    };
    let first = leftmost(b, &half)?;
    Ok((first.clone(), b.diff(&first)?))
}

/// The leftmost part of `b` of measure `m`.
pub(crate) fn leftmost(b: &IntervalSet, m: &Scalar) -> Result<IntervalSet> {
    let mut acc = Scalar::zero();
    let mut out = Vec::new();
    for (x, y) in b.intervals().unwrap_or_default() {
        if &acc >= m {
            break;
        }
        let room = m - &acc;
        let len = &y - &x;
        if len <= room {
            acc += &len;
            out.push((x, y));
        } else {
            acc += &room;
            out.push((x.clone(), &x + &room));
        }
    }
    if &acc < m {
        return Err(Error::MeasureMismatch(format!("set too small for measure {m}")));
    }
    Ok(IntervalSet::from_intervals(&out))
}

/// `U = [T, V]` for the half-swapping involution `V` of `B`.
pub fn commutator_involution(t: &Ept, b: &IntervalSet) -> Result<(Ept, GroupWord, Ept)> {
    let m = b.measure();
    if !m.is_finite() || m.is_zero() {
        return Err(Error::OutOfRange("B must have finite positive measure".into()));
    }
    let tb = t.image(b)?;
    let meet = b.intersect(&tb)?;
    if let Some(w) = meet.witness() {
        return Err(Error::Overlap(w));
    }
    let (b1, b2) = halves(b)?;
    let v = exchange_involution(&b1, &b2)?;
    let u = t.compose(&v)?.compose(&t.inverse()?)?.compose(&v.inverse()?)?;
    let word = GroupWord {
        letters: vec![GroupWord::letter("T", 1), GroupWord::letter("V", 1), GroupWord::letter("T", -1), GroupWord::letter("V", -1)],
    };
    if !u.is_involution()? || !u.support()?.eq_ae(&b.union(&tb)?)? {
        return Err(Error::VerificationFailed("commutator involution".into()));
    }
    Ok((u, word, v))
}

/// `T` supported in `C` with `T U T⁻¹ = V`.
pub fn conjugate_involutions(u: &Ept, v: &Ept, c: &IntervalSet) -> Result<Ept> {
    if !u.is_involution()? || !v.is_involution()? {
        return Err(Error::NotInvolution);
    }
    if u.eq_ae(v)? {
        return Ok(Ept::identity());
    }
    let su = u.support()?;
    let sv = v.support()?;
    if !su.is_subset(c)? || !sv.is_subset(c)? {
        return Err(Error::NotSubset);
    }
    let x = c.diff(&su)?;
    let y = c.diff(&sv)?;
    if su.measure() != sv.measure() || x.measure() != y.measure() {
        return Err(Error::MeasureMismatch(format!(
            "supports {} and {}, complements {} and {}",
            su.measure(),
            sv.measure(),
            x.measure(),
            y.measure()
        )));
    }
    let a = separator(u, &IntervalSet::full())?;
    let b = separator(v, &IntervalSet::full())?;
    let phi1 = match_sets(&a, &b)?;
    let ua = u.image(&a)?;
    let second = v.restrict(&b)?.compose(&phi1.compose(&u.restrict(&ua)?)?)?;
    let xy = x.diff(&y)?;
    let yx = y.diff(&x)?;
    let phi2 = if xy.measure() == yx.measure() {
        PartialIso::paste(&[PartialIso::identity_on(&x.intersect(&y)?), match_sets(&xy, &yx)?])?
    } else {
        match_sets(&x, &y)?
    };
    let t = PartialIso::paste(&[phi1, second, phi2])?.extend_by_identity()?;
    if !u.conjugate_by(&t)?.eq_ae(v)? || !t.support()?.is_subset(c)? {
        return Err(Error::VerificationFailed("conjugacy".into()));
    }
    Ok(t)
}

/// Copy map `[n, n+1) -> [kn + i, kn + i + 1)`.
fn copy_map(k: i64, i: i64) -> Result<PartialIso> {
    let one = Scalar::one();
    let piece = |sh: Shift| vec![Piece::new(Scalar::zero(), one.clone(), Some(sh))];
    let right = Tail { start: Scalar::zero(), period: one.clone(), pieces: piece(Shift::new(Scalar::int(i), Scalar::int(k - 1))) };
    let left = Tail {
        start: Scalar::zero(),
        period: one.clone(),
        pieces: piece(Shift::new(Scalar::int(k - 1 - i), Scalar::int(k - 1))),
    };
    PartialIso::from_layout(Layout { core: Vec::new(), left, right })
}

/// `π_k(T)`: a copy of `T` on each of the `k` interleaved families `[kn + i, kn + i + 1)`.
pub fn multiply_support(t: &Ept, k: u32) -> Result<Ept> {
    if k == 0 {
        return Err(Error::OutOfRange("k must be positive".into()));
    }
    if !t.support()?.measure().is_finite() {
        return Err(Error::InfiniteSupport);
    }
    let k = i64::from(k);
    let tp = t.as_partial();
    let mut parts = Vec::new();
    for i in 0..k {
        let psi = copy_map(k, i)?;
        parts.push(psi.compose(&tp.compose(&psi.inverse()?)?)?);
    }
    PartialIso::paste(&parts)?.extend_by_identity()
}

fn one_step(u: &Ept, t: &Scalar) -> Result<(Ept, Ept)> {
    let a = separator(u, &IntervalSet::full())?;
    let b = leftmost(&a, &(t / &Scalar::int(4)))?;
    let c = b.union(&u.image(&b)?)?;
    let (_, top) = u.support()?.bounds().ok_or(Error::InfiniteSupport)?;
    let d = IntervalSet::interval(top.clone(), &top + &(t / &Scalar::int(2)));
    let v = exchange_involution(&c, &d)?;
    let w = u.compose(&v)?.compose(&u.inverse()?)?.compose(&v.inverse()?)?;
    Ok((w, v))
}

/// An involution with support of measure exactly `t`, built from `U` by
/// commutators and conjugation, and a word in `U` expressing it.
pub fn normal_involution_with_measure(u: &Ept, t: &Scalar) -> Result<(Ept, GroupWord)> {
    if !t.is_positive() {
        return Err(Error::OutOfRange("t must be positive".into()));
    }
    if !u.is_involution()? {
        return Err(Error::NotInvolution);
    }
    let m = match u.support()?.measure() {
        ExtMeasure::Finite(m) if m.is_positive() => m,
        ExtMeasure::Finite(_) => return Err(Error::NotInvolution),
        ExtMeasure::Infinite => return Err(Error::InfiniteSupport),
    };
    let mut cur = u.clone();
    let mut word = GroupWord { letters: vec![GroupWord::letter("U", 1)] };
    let mut size = m;
    loop {
        let doubling = t > &size.times(2);
        let target = if doubling { size.times(2) } else { t.clone() };
        let (w, v) = one_step(&cur, &target)?;
        word = word.clone().then(word.inverse().conjugate(&v)?);
        cur = w;
        size = target;
        if !doubling {
            break;
        }
    }
    let mut gens = BTreeMap::new();
    gens.insert("U".to_string(), u.clone());
    let ok = cur.is_involution()?
        && cur.support()?.measure() == ExtMeasure::Finite(t.clone())
        && word.eval(&gens)?.eq_ae(&cur)?;
    if !ok {
        return Err(Error::VerificationFailed("normal generation".into()));
    }
    Ok((cur, word))
}

pub use crate::dynamics::three_involutions;
