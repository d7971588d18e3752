//! Eventually periodic piecewise translations and partial isomorphisms.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::error::{Error, Result, Witness};
use crate::layout::{block_count, find_piece, overlay, pullback, zip_with, Layout, Payload, Piece, Shift, Tail};
use crate::scalar::{lcm_scalars, Scalar};
use crate::set::IntervalSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A translated core piece `[lo, hi) -> [lo + shift, hi + shift)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorePiece {
    pub lo: Scalar,
    pub hi: Scalar,
    pub shift: Scalar,
}

/// Blocks `n >= 0` with `n = residue (mod modulus)` on one side of `start`.
/// Block `n` is `[start + n p, start + (n+1) p)` on the right and
/// `[start - (n+1) p, start - n p)` on the left; `pattern` is measured from
/// the left end of the block in both cases. The block moves by `alpha + n beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub side: Side,
    pub start: Scalar,
    pub period: Scalar,
    pub modulus: u64,
    pub residue: u64,
    pub pattern: (Scalar, Scalar),
    pub alpha: Scalar,
    pub beta: Scalar,
}

/// Unvalidated map description.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RawEpt {
    pub core: Vec<CorePiece>,
    pub families: Vec<Family>,
}

#[derive(Clone, Debug, PartialEq)]
enum Cover {
    Empty,
    One(Shift),
    Many,
}

impl Payload for Cover {
    fn advance(&self, t: i64) -> Self {
        match self {
            Cover::One(s) => Cover::One(s.advance(t)),
            c => c.clone(),
        }
    }
    fn scale(&self, f: i64) -> Self {
        match self {
            Cover::One(s) => Cover::One(s.scale(f)),
            c => c.clone(),
        }
    }
    fn reflect(&self) -> Self {
        match self {
            Cover::One(s) => Cover::One(s.reflect()),
            c => c.clone(),
        }
    }
}

fn join(a: &Cover, b: &Cover) -> Cover {
    match (a, b) {
        (Cover::Empty, x) | (x, Cover::Empty) => x.clone(),
        _ => Cover::Many,
    }
}

fn family_layout(f: &Family) -> Result<Layout<Cover>> {
    let p = &f.period;
    let (u0, u1) = &f.pattern;
    if !p.is_positive() {
        return Err(Error::Parse("family period must be positive".into()));
    }
    if f.modulus == 0 || f.residue >= f.modulus {
        return Err(Error::Parse("family residue must lie in [0, modulus)".into()));
    }
    if u0 < &Scalar::zero() || u1 > p || u0 >= u1 {
        return Err(Error::Parse("family pattern must be a non-empty interval within [0, period)".into()));
    }
    let q = i64::try_from(f.modulus).map_err(|_| Error::Parse("modulus too large".into()))?;
    let r = f.residue as i64;
    let qp = p.times(q);
    let rp = p.times(r);
    let (lo, hi, shift, start) = match f.side {
        Side::Right => (
            &rp + u0,
            &rp + u1,
            Shift::new(&f.alpha + &f.beta.times(r), f.beta.times(q)),
            f.start.clone(),
        ),
        Side::Left => (
            &rp + p - u1,
            &rp + p - u0,
            Shift::new(-(&f.alpha + &f.beta.times(r)), -f.beta.times(q)),
            -&f.start,
        ),
    };
    let mut pieces = Vec::new();
    if lo.is_positive() {
        pieces.push(Piece::new(Scalar::zero(), lo.clone(), Cover::Empty));
    }
    let top = hi.clone();
    pieces.push(Piece::new(lo, hi, Cover::One(shift)));
    if top < qp {
        pieces.push(Piece::new(top, qp.clone(), Cover::Empty));
    }
    let tail = Tail { start: start.clone(), period: qp, pieces };
    let other = Tail::uniform(-&start, Cover::Empty);
    Ok(match f.side {
        Side::Right => Layout { core: Vec::new(), left: other, right: tail },
        Side::Left => Layout { core: Vec::new(), left: tail, right: other },
    })
}

/// Check that the pieces of `raw` tile the line and that their images do too.
pub fn validate(raw: &RawEpt) -> Result<Ept> {
    validate_inner(raw, false)
}

/// As [`validate`], with points outside every piece fixed.
pub fn validate_filled(raw: &RawEpt) -> Result<Ept> {
    validate_inner(raw, true)
}

fn validate_inner(raw: &RawEpt, fill: bool) -> Result<Ept> {
    let mut core: Vec<&CorePiece> = Vec::new();
    for c in &raw.core {
        if c.lo > c.hi {
            return Err(Error::Parse(format!("core piece [{}, {}) is reversed", c.lo, c.hi)));
        }
        if c.lo < c.hi {
            core.push(c);
        }
    }
    core.sort_by(|a, b| a.lo.cmp(&b.lo));
    for w in core.windows(2) {
        if w[1].lo < w[0].hi {
            let hi = w[0].hi.clone().min(w[1].hi.clone());
            return Err(Error::DomainOverlap(Witness::new(w[1].lo.clone(), hi)));
        }
    }
    let pieces = core
        .iter()
        .map(|c| Piece::new(c.lo.clone(), c.hi.clone(), Cover::One(Shift::constant(c.shift.clone()))))
        .collect();
    let mut acc = Layout::from_pieces(pieces, Cover::Empty);
    for f in &raw.families {
        acc = zip_with(&acc, &family_layout(f)?, join)?;
    }
    if fill {
        acc = acc.map(|c| if *c == Cover::Empty { Cover::One(Shift::zero()) } else { c.clone() });
    }
    if let Some(w) = find_piece(&acc, |c| *c == Cover::Empty) {
        return Err(Error::DomainGap(w));
    }
    if let Some(w) = find_piece(&acc, |c| *c == Cover::Many) {
        return Err(Error::DomainOverlap(w));
    }
    let l = acc.map(|c| match c {
        Cover::One(s) => s.clone(),
        _ => Shift::zero(),
    });
    Ept::from_layout(l)
}

struct ImageFamily {
    c: Scalar,
    len: Scalar,
    step: Scalar,
    gamma: Scalar,
    delta: Scalar,
}

fn to_real(w: Witness, reflected: bool) -> Witness {
    if reflected {
        Witness::new(-w.hi, -w.lo)
    } else {
        w
    }
}

/// Images that run off to `+inf` in the coordinates of `l`, as a tail of the
/// image side plus the finitely many image pieces that fall below its start.
#[allow(clippy::type_complexity)]
fn right_images(
    l: &Layout<Option<Shift>>,
    reflected: bool,
) -> Result<(Option<Tail<Option<Shift>>>, Vec<Piece<Option<Shift>>>)> {
    let mut fams = Vec::new();
    let t = &l.right;
    for p in &t.pieces {
        let Some(sh) = &p.val else { continue };
        let sigma = &t.period + &sh.beta;
        let c = &t.start + &p.lo + &sh.alpha;
        if sigma.is_zero() {
            return Err(Error::ImageOverlap(to_real(Witness::new(c.clone(), &c + p.len()), reflected)));
        }
        if sigma.is_positive() {
            fams.push(ImageFamily { c, len: p.len(), step: sigma, gamma: -&sh.alpha, delta: -&sh.beta });
        }
    }
    let t = &l.left;
    for p in &t.pieces {
        let Some(sh) = &p.val else { continue };
        let sigma = &t.period + &sh.beta;
        if sigma.is_negative() {
            let c = -(&t.start + &p.hi + &sh.alpha);
            fams.push(ImageFamily { c, len: p.len(), step: -sigma, gamma: sh.alpha.clone(), delta: sh.beta.clone() });
        }
    }
    if fams.is_empty() {
        return Ok((None, Vec::new()));
    }
    for f in &fams {
        if f.len > f.step {
            let w = Witness::new(&f.c + &f.step, &f.c + &f.len);
            return Err(Error::ImageOverlap(to_real(w, reflected)));
        }
    }
    let steps: Vec<Scalar> = fams.iter().map(|f| f.step.clone()).collect();
    let q = lcm_scalars(&steps)?;
    let mut subs = Vec::new();
    for f in &fams {
        let n = q.ratio(&f.step)?.ok_or(Error::IncommensurablePeriods)?.to_integer();
        let n = block_count(&n)?;
        for rho in 0..n {
            subs.push(ImageFamily {
                c: &f.c + &f.step.times(rho),
                len: f.len.clone(),
                step: q.clone(),
                gamma: &f.gamma + &f.delta.times(rho),
                delta: f.delta.times(n),
            });
        }
    }
    let s = subs.iter().map(|f| f.c.clone()).max().unwrap_or_else(Scalar::zero);
    let mut pattern: Vec<Piece<Option<Shift>>> = Vec::new();
    let mut finite = Vec::new();
    let mut budget = BigInt::from(crate::layout::WINDOW_BUDGET);
    for f in &subs {
        let o = &s - &f.c;
        let kb = (&o / &q).floor();
        budget -= &kb;
        if budget < BigInt::from(0) {
            return Err(Error::CompositionOutOfClass("image window exceeds the budget".into()));
        }
        let k = block_count(&kb)?;
        let w = &o - &q.times(k);
        for m in 0..k {
            let lo = &f.c + &q.times(m);
            finite.push(Piece::new(lo.clone(), &lo + &f.len, Some(Shift::constant(&f.gamma + &f.delta.times(m)))));
        }
        if w.is_zero() {
            let a = &f.gamma + &f.delta.times(k);
            pattern.push(Piece::new(Scalar::zero(), f.len.clone(), Some(Shift::new(a, f.delta.clone()))));
        } else {
            let lo = &s - &w;
            let first = f.len.clone().min(w.clone());
            finite.push(Piece::new(lo.clone(), &lo + &first, Some(Shift::constant(&f.gamma + &f.delta.times(k)))));
            let a1 = &f.gamma + &f.delta.times(k + 1);
            pattern.push(Piece::new(&q - &w, &q - &w + &first, Some(Shift::new(a1, f.delta.clone()))));
            if f.len > w {
                let a0 = &f.gamma + &f.delta.times(k);
                pattern.push(Piece::new(Scalar::zero(), &f.len - &w, Some(Shift::new(a0, f.delta.clone()))));
            }
        }
    }
    pattern.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut pieces = Vec::new();
    let mut at = Scalar::zero();
    for p in pattern {
        if p.lo < at {
            let w = Witness::new(&s + &p.lo, &s + &at.clone().min(p.hi.clone()));
            return Err(Error::ImageOverlap(to_real(w, reflected)));
        }
        if at < p.lo {
            pieces.push(Piece::new(at.clone(), p.lo.clone(), None));
        }
        at = p.hi.clone();
        pieces.push(p);
    }
    if at < q {
        pieces.push(Piece::new(at, q.clone(), None));
    }
    Ok((Some(Tail { start: s, period: q, pieces }), finite))
}

/// The inverse of an injective partial map: for each image point the shift
/// back to its preimage, `None` off the range.
fn inverse_layout(l: &Layout<Option<Shift>>) -> Result<Layout<Option<Shift>>> {
    let (rt, mut fin) = right_images(l, false)?;
    let (lt, fin_l) = right_images(&l.reflect(), true)?;
    fin.extend(fin_l.into_iter().map(|p| Piece::new(-&p.hi, -&p.lo, p.val.reflect())));
    for p in &l.core {
        if let Some(sh) = &p.val {
            let a = &sh.alpha;
            fin.push(Piece::new(&p.lo + a, &p.hi + a, Some(Shift::constant(-a))));
        }
    }
    let hi_f = fin.iter().map(|p| p.hi.clone()).max();
    let real_sl = lt.as_ref().map(|t| -&t.start);
    let need_r = match (hi_f, real_sl.clone()) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    let right = match rt {
        Some(t) => t,
        None => Tail::uniform(need_r.clone().unwrap_or_else(Scalar::zero), None),
    };
    let placeholder = Tail::uniform(Scalar::zero(), None);
    let mut out = Layout { core: fin, left: placeholder, right };
    if let Some(r) = need_r {
        if r > out.right.start {
            let t = ((&r - &out.right.start) / &out.right.period).ceil();
            out.unroll_right(block_count(&t)?);
        }
    }
    let lo_f = out.core.iter().map(|p| p.lo.clone()).min();
    let need_l = match lo_f {
        Some(a) => a.min(out.right.start.clone()),
        None => out.right.start.clone(),
    };
    match lt {
        Some(t) => {
            out.left = t;
            let sl = -&out.left.start;
            if need_l < sl {
                let t = ((&sl - &need_l) / &out.left.period).ceil();
                out.unroll_left(block_count(&t)?);
            }
        }
        None => out.left = Tail::uniform(-&need_l, None),
    }
    out.core.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut core = Vec::with_capacity(out.core.len());
    let mut at = out.core_lo();
    for p in out.core.drain(..) {
        if p.lo < at {
            let w = Witness::new(p.lo.clone(), at.clone().min(p.hi.clone()));
            return Err(Error::ImageOverlap(w));
        }
        if at < p.lo {
            core.push(Piece::new(at.clone(), p.lo.clone(), None));
        }
        at = p.hi.clone();
        core.push(p);
    }
    let end = out.core_hi();
    if at < end {
        core.push(Piece::new(at, end, None));
    }
    out.core = core;
    Ok(out.canonical())
}

/// Layout with every tail piece's shift of constant zero/non-zero status.
pub(crate) fn settle(l: &Layout<Shift>) -> Result<Layout<Shift>> {
    let mut l = l.clone();
    for _ in 0..2 {
        let mut need = BigInt::from(0);
        for p in &l.right.pieces {
            let sh = &p.val;
            if sh.beta.is_zero() {
                continue;
            }
            let m0 = (-&sh.alpha / &sh.beta).floor() + BigInt::from(1);
            if m0 > need {
                need = m0;
            }
        }
        l.unroll_right(block_count(&need)?);
        l = l.reflect();
    }
    Ok(l)
}

pub(crate) fn settle_opt(l: &Layout<Option<Shift>>) -> Result<Layout<Option<Shift>>> {
    let mut l = l.clone();
    for _ in 0..2 {
        let mut need = BigInt::from(0);
        for p in &l.right.pieces {
            let Some(sh) = &p.val else { continue };
            if sh.beta.is_zero() {
                continue;
            }
            let m0 = (-&sh.alpha / &sh.beta).floor() + BigInt::from(1);
            if m0 > need {
                need = m0;
            }
        }
        l.unroll_right(block_count(&need)?);
        l = l.reflect();
    }
    Ok(l)
}

/// A validated measure-preserving bijection of the line: on each piece,
/// `x -> x + alpha + m beta` where `m` is the tail block index.
#[derive(Clone, Debug, PartialEq)]
pub struct Ept {
    layout: Layout<Shift>,
}

impl Ept {
    pub fn identity() -> Self {
        Ept { layout: Layout::constant(Shift::zero()) }
    }

    /// `x -> x + c`.
    pub fn translation(c: Scalar) -> Self {
        Ept { layout: Layout::constant(Shift::constant(c)) }
    }

    /// Validate the image side of a layout whose domain side is total by construction.
    pub fn from_layout(l: Layout<Shift>) -> Result<Self> {
        let inv = inverse_layout(&l.map(|s| Some(s.clone())))?;
        if let Some(w) = find_piece(&inv, |v| v.is_none()) {
            return Err(Error::ImageGap(w));
        }
        Ok(Ept { layout: l.canonical() })
    }

    /// Finite list of translated intervals, identity elsewhere.
    pub fn from_pieces(pieces: &[(Scalar, Scalar, Scalar)]) -> Result<Self> {
        let mut iv: Vec<&(Scalar, Scalar, Scalar)> = pieces.iter().collect();
        iv.sort_by(|a, b| a.0.cmp(&b.0));
        for w in iv.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::DomainOverlap(Witness::new(w[1].0.clone(), w[0].1.clone().min(w[1].1.clone()))));
            }
        }
        let pieces: Vec<Piece<Shift>> =
            iv.iter().filter(|p| p.0 < p.1).map(|p| Piece::new(p.0.clone(), p.1.clone(), Shift::constant(p.2.clone()))).collect();
        Ept::from_layout(Layout::from_pieces(pieces, Shift::zero()))
    }

    pub fn layout(&self) -> &Layout<Shift> {
        &self.layout
    }

    pub fn apply(&self, x: &Scalar) -> Scalar {
        x + &self.layout.value_at(x).alpha
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Ept) -> Result<Ept> {
        let l = pullback(&other.layout, &self.layout)?;
        Ok(Ept { layout: l.map(|(a, b)| a.add(b)).canonical() })
    }

    pub fn inverse(&self) -> Result<Ept> {
        let inv = inverse_layout(&self.layout.map(|s| Some(s.clone())))?;
        if let Some(w) = find_piece(&inv, |v| v.is_none()) {
            return Err(Error::ImageGap(w));
        }
        Ok(Ept { layout: inv.map(|v| v.clone().unwrap_or_else(Shift::zero)).canonical() })
    }

    pub fn power(&self, n: i64) -> Result<Ept> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Ept::identity();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.compose(&sq)?;
            }
        }
        Ok(acc)
    }

    /// `s ∘ self ∘ s⁻¹`.
    pub fn conjugate_by(&self, s: &Ept) -> Result<Ept> {
        s.compose(&self.compose(&s.inverse()?)?)
    }

    pub fn support(&self) -> Result<IntervalSet> {
        Ok(IntervalSet::from_layout(settle(&self.layout)?.map(|s| !s.is_zero())))
    }

    pub fn is_identity(&self) -> Result<bool> {
        Ok(self.support()?.is_empty())
    }

    pub fn eq_ae(&self, other: &Ept) -> Result<bool> {
        let o = overlay(&self.layout, &other.layout)?;
        let same = o.all_payloads().all(|(a, b)| a == b);
        Ok(same)
    }

    pub fn is_involution(&self) -> Result<bool> {
        self.compose(self)?.is_identity()
    }

    /// `T⁻¹(A)`.
    pub fn preimage(&self, a: &IntervalSet) -> Result<IntervalSet> {
        let l = pullback(&self.layout, a.layout())?;
        Ok(IntervalSet::from_layout(l.map(|(_, v)| *v)))
    }

    /// `T(A)`.
    pub fn image(&self, a: &IntervalSet) -> Result<IntervalSet> {
        self.inverse()?.preimage(a)
    }

    pub fn restrict(&self, a: &IntervalSet) -> Result<PartialIso> {
        let l = zip_with(&self.layout, a.layout(), |s, inside| inside.then(|| s.clone()))?;
        PartialIso::from_layout(l)
    }

    pub fn as_partial(&self) -> PartialIso {
        PartialIso { layout: self.layout.map(|s| Some(s.clone())) }
    }

    /// Disagreement set `{x : S(x) != T(x)}`.
    pub fn disagreement(&self, other: &Ept) -> Result<IntervalSet> {
        let d = zip_with(&self.layout, &other.layout, |a, b| a.add(&b.neg()))?;
        Ok(IntervalSet::from_layout(settle(&d)?.map(|s| !s.is_zero())))
    }

    /// Piece list in user-facing form.
    pub fn to_raw(&self) -> RawEpt {
        emit(&self.layout.map(|s| Some(s.clone())))
    }
}

fn emit(l: &Layout<Option<Shift>>) -> RawEpt {
    let core = l
        .core
        .iter()
        .filter_map(|p| {
            let sh = p.val.as_ref()?;
            Some(CorePiece { lo: p.lo.clone(), hi: p.hi.clone(), shift: sh.alpha.clone() })
        })
        .collect();
    let mut families = Vec::new();
    for p in &l.right.pieces {
        let Some(sh) = &p.val else { continue };
        families.push(Family {
            side: Side::Right,
            start: l.right.start.clone(),
            period: l.right.period.clone(),
            modulus: 1,
            residue: 0,
            pattern: (p.lo.clone(), p.hi.clone()),
            alpha: sh.alpha.clone(),
            beta: sh.beta.clone(),
        });
    }
    let per = &l.left.period;
    let mut left = Vec::new();
    for p in &l.left.pieces {
        let Some(sh) = &p.val else { continue };
        left.push(Family {
            side: Side::Left,
            start: -&l.left.start,
            period: per.clone(),
            modulus: 1,
            residue: 0,
            pattern: (per - &p.hi, per - &p.lo),
            alpha: -&sh.alpha,
            beta: -&sh.beta,
        });
    }
    left.sort_by(|a, b| a.pattern.0.cmp(&b.pattern.0));
    families.extend(left);
    RawEpt { core, families }
}

/// Paste `T_i` on `A_i`; the `A_i` must partition the line.
pub fn cut_and_paste(pairs: &[(Ept, IntervalSet)]) -> Result<Ept> {
    let mut count: Layout<u32> = Layout::constant(0);
    for (_, a) in pairs {
        count = zip_with(&count, a.layout(), |c, v| c + u32::from(*v))?;
    }
    if let Some(w) = find_piece(&count, |c| *c != 1) {
        return Err(Error::NotAPartition(w));
    }
    let mut acc: Layout<Option<Shift>> = Layout::constant(None);
    for (t, a) in pairs {
        let part = zip_with(t.layout(), a.layout(), |s, inside| inside.then(|| s.clone()))?;
        acc = zip_with(&acc, &part, |x, y| x.clone().or_else(|| y.clone()))?;
    }
    Ept::from_layout(acc.map(|v| v.clone().unwrap_or_else(Shift::zero)))
}

/// An injective measure-preserving map from `dom` onto `rng`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialIso {
    layout: Layout<Option<Shift>>,
}

impl PartialIso {
    pub fn from_layout(l: Layout<Option<Shift>>) -> Result<Self> {
        inverse_layout(&l)?;
        Ok(PartialIso { layout: l.canonical() })
    }

    pub fn identity_on(a: &IntervalSet) -> Self {
        PartialIso { layout: a.layout().map(|v| v.then(Shift::zero)) }
    }

    pub fn layout(&self) -> &Layout<Option<Shift>> {
        &self.layout
    }

    pub fn dom(&self) -> IntervalSet {
        IntervalSet::from_layout(self.layout.map(|v| v.is_some()))
    }

    pub fn rng(&self) -> Result<IntervalSet> {
        Ok(IntervalSet::from_layout(inverse_layout(&self.layout)?.map(|v| v.is_some())))
    }

    pub fn inverse(&self) -> Result<PartialIso> {
        Ok(PartialIso { layout: inverse_layout(&self.layout)? })
    }

    pub fn apply(&self, x: &Scalar) -> Option<Scalar> {
        self.layout.value_at(x).map(|s| x + &s.alpha)
    }

    /// `self ∘ other`; the range of `other` must equal the domain of `self`.
    pub fn compose(&self, other: &PartialIso) -> Result<PartialIso> {
        if !other.rng()?.eq_ae(&self.dom())? {
            return Err(Error::DomainRangeMismatch);
        }
        let l = pullback(&other.layout, &self.layout)?;
        let l = l.map(|(a, b)| match (a, b) {
            (Some(x), Some(y)) => Some(x.add(y)),
            _ => None,
        });
        Ok(PartialIso { layout: l.canonical() })
    }

    /// Union of partial isos with disjoint domains and disjoint ranges.
    pub fn paste(parts: &[PartialIso]) -> Result<PartialIso> {
        let mut acc: Layout<Option<Shift>> = Layout::constant(None);
        for p in parts {
            let both = overlay(&acc, &p.layout)?;
            if let Some(w) = find_piece(&both, |(a, b)| a.is_some() && b.is_some()) {
                return Err(Error::Overlap(w));
            }
            acc = both.map(|(a, b)| a.clone().or_else(|| b.clone())).canonical();
        }
        match inverse_layout(&acc) {
            Ok(_) => Ok(PartialIso { layout: acc }),
            Err(Error::ImageOverlap(w)) => Err(Error::Overlap(w)),
            Err(e) => Err(e),
        }
    }

    /// Extend by the identity off the domain; needs `dom = rng`.
    pub fn extend_by_identity(&self) -> Result<Ept> {
        Ept::from_layout(self.layout.map(|v| v.clone().unwrap_or_else(Shift::zero)))
    }

    /// Extend by `other` off the domain.
    pub fn extend_by(&self, other: &Ept) -> Result<Ept> {
        let l = zip_with(&self.layout, other.layout(), |a, b| a.clone().unwrap_or_else(|| b.clone()))?;
        Ept::from_layout(l)
    }

    /// Restrict to `dom ∩ a`.
    pub fn restrict(&self, a: &IntervalSet) -> Result<PartialIso> {
        let l = zip_with(&self.layout, a.layout(), |s, inside| if *inside { s.clone() } else { None })?;
        Ok(PartialIso { layout: l })
    }

    /// Points of the domain that actually move.
    pub fn support(&self) -> Result<IntervalSet> {
        let l = settle_opt(&self.layout)?;
        Ok(IntervalSet::from_layout(l.map(|v| v.as_ref().is_some_and(|s| !s.is_zero()))))
    }

    /// Disagreement set on the common domain.
    pub fn disagreement(&self, other: &PartialIso) -> Result<IntervalSet> {
        let d = zip_with(&self.layout, &other.layout, |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(x.add(&y.neg())),
            _ => None,
        })?;
        let l = settle_opt(&d)?;
        Ok(IntervalSet::from_layout(l.map(|v| v.as_ref().is_some_and(|s| !s.is_zero()))))
    }

    pub fn to_raw(&self) -> RawEpt {
        emit(&self.layout)
    }
}

impl From<&Ept> for PartialIso {
    fn from(t: &Ept) -> Self {
        t.as_partial()
    }
}
