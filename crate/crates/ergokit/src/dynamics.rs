//! Orbit structure: Hopf classification with re-checkable certificates,
//! first-return maps, Rokhlin markers, the three-factor splitting and the
//! approximations built on them.
//!
//! Two engines. When every breakpoint and shift is an integer multiple of a
//! common unit and the tails are purely periodic, the map permutes unit cells
//! and every orbit is either a finite cycle or a line drifting between tails;
//! the classification is then complete. Otherwise finite invariant pieces are
//! found by power sweeps and rotation tests, and tails are handled when every
//! tail block is invariant.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::constructions::halves;
use crate::error::{Error, Result};
use crate::layout::{zip_with, Layout, Piece, Shift, Tail};
use crate::map::{settle, Ept, PartialIso, Side};
use crate::metrics::{d_mu, mu};
use crate::scalar::{ExtMeasure, Scalar};
use crate::set::{IntervalSet, TailSpec};

pub const DEFAULT_BUDGET: u64 = 10_000;

const SWEEP_LIMIT: u64 = 720;
const GLOBAL_SWEEP_LIMIT: u64 = 48;

/// Rotation of `[lo, hi)` by `angle`, optionally repeated on every block of a tail.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    pub lo: Scalar,
    pub hi: Scalar,
    pub angle: Scalar,
    /// Copies translated by `m * period` away from the origin on `side`, `m >= 0`.
    pub repeat: Option<(Side, Scalar)>,
}

impl Rotation {
    pub fn width(&self) -> Scalar {
        &self.hi - &self.lo
    }

    /// `angle / width`, or `None` when irrational.
    pub fn number(&self) -> Result<Option<BigRational>> {
        self.angle.ratio(&self.width())
    }

    pub fn as_ept(&self) -> Result<Ept> {
        let w = self.width();
        let cut = &self.hi - &self.angle;
        match &self.repeat {
            None => Ept::from_pieces(&[
                (self.lo.clone(), cut.clone(), self.angle.clone()),
                (cut, self.hi.clone(), &self.angle - &w),
            ]),
            Some((Side::Right, p)) => {
                let mut pieces = vec![
                    Piece::new(Scalar::zero(), &w - &self.angle, Shift::constant(self.angle.clone())),
                    Piece::new(&w - &self.angle, w.clone(), Shift::constant(&self.angle - &w)),
                ];
                if &w < p {
                    pieces.push(Piece::new(w.clone(), p.clone(), Shift::zero()));
                }
                let right = Tail { start: self.lo.clone(), period: p.clone(), pieces };
                Ept::from_layout(Layout { core: Vec::new(), left: Tail::uniform(-&self.lo, Shift::zero()), right })
            }
            Some((Side::Left, p)) => {
                let out = Rotation {
                    lo: -&self.hi,
                    hi: -&self.lo,
                    angle: &w - &self.angle,
                    repeat: Some((Side::Right, p.clone())),
                };
                Ept::from_layout(out.as_ept()?.layout().reflect())
            }
        }
    }

    pub fn region(&self) -> Result<IntervalSet> {
        self.as_ept()?.support()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    /// Every orbit has exactly `period` points.
    Periodic { period: u64 },
    /// `T^k(wandering) = wandering + c` with `c != 0`.
    Dissipative { wandering: IntervalSet, k: u64, c: Scalar },
    /// A rotation by an irrational fraction of its interval.
    Aperiodic { rotation: Rotation },
    Unknown { spent: u64 },
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Periodic { .. } => "PERIODIC",
            Kind::Dissipative { .. } => "DISSIPATIVE",
            Kind::Aperiodic { .. } => "CONSERVATIVE_APERIODIC",
            Kind::Unknown { .. } => "UNKNOWN",
        }
    }

    fn rank(&self) -> (u8, u64) {
        match self {
            Kind::Periodic { period } => (0, *period),
            Kind::Dissipative { .. } => (1, 0),
            Kind::Aperiodic { .. } => (2, 0),
            Kind::Unknown { .. } => (3, 0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub set: IntervalSet,
    pub kind: Kind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub components: Vec<Component>,
}

impl Classification {
    pub fn part(&self, pred: impl Fn(&Kind) -> bool) -> Result<IntervalSet> {
        let mut acc = IntervalSet::empty();
        for c in self.components.iter().filter(|c| pred(&c.kind)) {
            acc = acc.union(&c.set)?;
        }
        Ok(acc)
    }

    pub fn periodic_part(&self) -> Result<IntervalSet> {
        self.part(|k| matches!(k, Kind::Periodic { .. }))
    }

    pub fn dissipative_part(&self) -> Result<IntervalSet> {
        self.part(|k| matches!(k, Kind::Dissipative { .. }))
    }

    pub fn aperiodic_part(&self) -> Result<IntervalSet> {
        self.part(|k| matches!(k, Kind::Aperiodic { .. }))
    }

    pub fn is_complete(&self) -> bool {
        !self.components.iter().any(|c| matches!(c.kind, Kind::Unknown { .. }))
    }

    /// Re-check every certificate and the partition property against `t`.
    pub fn verify(&self, t: &Ept) -> Result<()> {
        let fail = |m: &str| Err(Error::VerificationFailed(m.into()));
        let mut all = IntervalSet::empty();
        for c in &self.components {
            if !all.is_disjoint(&c.set)? {
                return fail("components overlap");
            }
            all = all.union(&c.set)?;
            if !t.image(&c.set)?.eq_ae(&c.set)? {
                return fail("component is not invariant");
            }
            match &c.kind {
                Kind::Periodic { period } => {
                    let n = i64::try_from(*period).map_err(|_| Error::OutOfRange("period".into()))?;
                    if !t.power(n)?.support()?.is_disjoint(&c.set)? {
                        return fail("T^n differs from the identity on a periodic component");
                    }
                }
                Kind::Dissipative { wandering, k, c: drift } => {
                    let m = wandering.measure();
                    if drift.is_zero() || m.is_zero() || !m.is_finite() || !wandering.is_subset(&c.set)? {
                        return fail("malformed wandering set");
                    }
                    let k = i64::try_from(*k).map_err(|_| Error::OutOfRange("k".into()))?;
                    if !t.power(k)?.image(wandering)?.eq_ae(&wandering.translate(drift))? {
                        return fail("T^k(W) differs from W + c");
                    }
                }
                Kind::Aperiodic { rotation } => {
                    if rotation.number()?.is_some() {
                        return fail("rotation number is rational");
                    }
                    if !rotation.region()?.eq_ae(&c.set)? || !restricted(t, &c.set)?.eq_ae(&rotation.as_ept()?)? {
                        return fail("map is not the certified rotation");
                    }
                }
                Kind::Unknown { .. } => {}
            }
        }
        if !all.eq_ae(&t.support()?)? {
            return fail("components do not cover the support");
        }
        Ok(())
    }

    fn normalise(mut self) -> Result<Self> {
        let mut out: Vec<Component> = Vec::new();
        for c in self.components.drain(..) {
            if c.set.is_empty() {
                continue;
            }
            let same = out.iter_mut().find(|o| match (&o.kind, &c.kind) {
                (Kind::Periodic { period: a }, Kind::Periodic { period: b }) => a == b,
                (Kind::Unknown { .. }, Kind::Unknown { .. }) => true,
                _ => false,
            });
            match same {
                Some(o) => o.set = o.set.union(&c.set)?,
                None => out.push(c),
            }
        }
        out.sort_by_key(|c| c.kind.rank());
        Ok(Classification { components: out })
    }
}

/// `t` on the invariant set `a`, identity elsewhere.
fn restricted(t: &Ept, a: &IntervalSet) -> Result<Ept> {
    if a.is_empty() {
        return Ok(Ept::identity());
    }
    t.restrict(a)?.extend_by_identity()
}

/// `{x : e(x) > x}`.
fn moves_right(e: &Ept) -> Result<IntervalSet> {
    let l = settle(e.layout())?;
    Ok(IntervalSet::from_layout(l.map(|s| if s.beta.is_zero() { s.alpha.is_positive() } else { s.beta.is_positive() })))
}

/// Points of a period-`n` invariant set that are the leftmost of their orbit.
fn orbit_minima(t: &Ept, k: &IntervalSet, n: u64) -> Result<IntervalSet> {
    let mut f = k.clone();
    let mut p = Ept::identity();
    for _ in 1..n {
        p = p.compose(t)?;
        f = f.intersect(&moves_right(&p)?)?;
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Cell engine

fn cells(x: &Scalar, unit: &Scalar) -> Result<i64> {
    let r = x.ratio(unit)?.filter(|r| r.is_integer()).ok_or_else(|| Error::OutOfClass("off the cell lattice".into()))?;
    r.to_integer().to_i64().ok_or_else(|| Error::OutOfClass("cell index overflow".into()))
}

fn layout_quantities<P: Clone>(l: &Layout<P>, out: &mut Vec<Scalar>, shift: impl Fn(&P) -> Option<Scalar>) {
    for p in &l.core {
        out.push(p.lo.clone());
        out.push(p.hi.clone());
        out.extend(shift(&p.val));
    }
    for t in [&l.left, &l.right] {
        out.push(t.start.clone());
        out.push(t.period.clone());
        for p in &t.pieces {
            out.push(p.lo.clone());
            out.push(p.hi.clone());
            out.extend(shift(&p.val));
        }
    }
}

/// A unit `g / q` such that every quantity is an integer multiple of it.
fn lattice(qs: &[Scalar]) -> Result<Option<Scalar>> {
    let g = qs.iter().find(|q| !q.irrational_part().is_zero()).map(|q| q.abs()).unwrap_or_else(Scalar::one);
    let mut q = BigInt::one();
    for x in qs {
        match x.ratio(&g)? {
            Some(r) => q = q.lcm(r.denom()),
            None => return Ok(None),
        }
    }
    Ok(Some(&g / &Scalar::big(q)))
}

fn periodic_tails(l: &Layout<Shift>) -> bool {
    l.right.pieces.iter().chain(l.left.pieces.iter()).all(|p| p.val.beta.is_zero())
}

/// The unit lattice on which `t` (and the extra sets) live, if any.
fn cell_unit(t: &Ept, extra: &[&IntervalSet]) -> Result<Option<Scalar>> {
    let l = settle(t.layout())?;
    if !periodic_tails(&l) {
        return Ok(None);
    }
    let mut qs = Vec::new();
    layout_quantities(&l, &mut qs, |s: &Shift| Some(s.alpha.clone()));
    for s in extra {
        layout_quantities(s.layout(), &mut qs, |_| None);
    }
    lattice(&qs)
}

/// Cell permutation: explicit on `[lo, hi)`, periodic beyond.
struct CellMap {
    lo: i64,
    hi: i64,
    core: Vec<i64>,
    right: Vec<i64>,
    /// Real shifts, indexed by outward residue.
    left: Vec<i64>,
}

impl CellMap {
    fn build(l: &Layout<Shift>, unit: &Scalar, cap: i64) -> Result<CellMap> {
        let lo = cells(&l.core_lo(), unit)?;
        let hi = cells(&l.core_hi(), unit)?;
        let mr = cells(&l.right.period, unit)?;
        let ml = cells(&l.left.period, unit)?;
        if hi - lo + mr + ml > cap {
            return Err(Error::BudgetExhausted(format!("{} cells exceed the budget", hi - lo + mr + ml)));
        }
        let mut core = Vec::with_capacity((hi - lo) as usize);
        for p in &l.core {
            let s = cells(&p.val.alpha, unit)?;
            for _ in cells(&p.lo, unit)?..cells(&p.hi, unit)? {
                core.push(s);
            }
        }
        let tail = |t: &Tail<Shift>, m: i64, sign: i64| -> Result<Vec<i64>> {
            let mut out = vec![0; m as usize];
            for p in &t.pieces {
                if !p.val.beta.is_zero() {
                    return Err(Error::OutOfClass("affine tail".into()));
                }
                let s = sign * cells(&p.val.alpha, unit)?;
                for c in cells(&p.lo, unit)?..cells(&p.hi, unit)? {
                    out[c as usize] = s;
                }
            }
            Ok(out)
        };
        Ok(CellMap { lo, hi, core, right: tail(&l.right, mr, 1)?, left: tail(&l.left, ml, -1)? })
    }

    fn apply(&self, k: i64) -> i64 {
        let s = if k >= self.hi {
            self.right[(k - self.hi).rem_euclid(self.right.len() as i64) as usize]
        } else if k < self.lo {
            self.left[(self.lo - 1 - k).rem_euclid(self.left.len() as i64) as usize]
        } else {
            self.core[(k - self.lo) as usize]
        };
        k + s
    }
}

/// A cycle of the residue permutation of one tail, in outward coordinates.
struct Class {
    residues: Vec<usize>,
    /// Accumulated block lift before position `p`.
    cum: Vec<i64>,
    drift: i64,
}

struct SideInfo {
    m: i64,
    class_of: Vec<usize>,
    pos_of: Vec<usize>,
    classes: Vec<Class>,
    /// Blocks at or beyond `reach` never leave the tail within one cycle.
    reach: i64,
}

impl SideInfo {
    fn new(out_shift: &[i64]) -> SideInfo {
        let m = out_shift.len() as i64;
        let mut class_of = vec![usize::MAX; out_shift.len()];
        let mut pos_of = vec![0; out_shift.len()];
        let mut classes = Vec::new();
        let mut reach = 1;
        for r0 in 0..out_shift.len() {
            if class_of[r0] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let (mut residues, mut cum) = (Vec::new(), Vec::new());
            let (mut r, mut acc) = (r0, 0i64);
            loop {
                class_of[r] = id;
                pos_of[r] = residues.len();
                residues.push(r);
                cum.push(acc);
                let t = r as i64 + out_shift[r];
                let lift = t.div_euclid(m);
                reach += lift.abs();
                acc += lift;
                r = t.rem_euclid(m) as usize;
                if r == r0 {
                    break;
                }
            }
            classes.push(Class { residues, cum, drift: acc });
        }
        SideInfo { m, class_of, pos_of, classes, reach }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Way {
    Out,
    In,
}

/// A far tail cell through which an orbit line enters or leaves for good.
#[derive(Clone, Copy, Debug)]
struct Anchor {
    side: usize,
    class: usize,
    pos: usize,
    block: i64,
    index: i64,
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Free,
    Fixed,
    On(usize, i64),
}

enum Orbit {
    /// Cells starting from the leftmost.
    Cycle(Vec<i64>),
    /// Cells from `entry` to `exit`; index 0 is the base cell.
    Line { path: Vec<i64>, entry: Anchor, exit: Anchor },
}

struct Cells {
    unit: Scalar,
    fwd: CellMap,
    bwd: CellMap,
    sides: [SideInfo; 2],
    wlo: i64,
    whi: i64,
    slots: Vec<Slot>,
    orbits: Vec<Orbit>,
    lanes: BTreeMap<(usize, usize, i64), (usize, Way)>,
}

impl Cells {
    fn analyse(t: &Ept, extra: &[&IntervalSet], budget: u64) -> Result<Option<Cells>> {
        let Some(unit) = cell_unit(t, extra)? else {
            return Ok(None);
        };
        let inv = t.inverse()?;
        let li = settle(inv.layout())?;
        if !periodic_tails(&li) {
            return Ok(None);
        }
        let cap = i64::try_from(budget.saturating_mul(64)).unwrap_or(i64::MAX);
        let fwd = CellMap::build(&settle(t.layout())?, &unit, cap)?;
        let bwd = CellMap::build(&li, &unit, cap)?;
        let left_out: Vec<i64> = fwd.left.iter().map(|s| -s).collect();
        let sides = [SideInfo::new(&fwd.right), SideInfo::new(&left_out)];
        let wlo = fwd.lo - sides[1].reach * sides[1].m;
        let whi = fwd.hi + sides[0].reach * sides[0].m;
        if whi - wlo > cap {
            return Err(Error::BudgetExhausted(format!("window of {} cells exceeds the budget", whi - wlo)));
        }
        let mut c = Cells {
            unit,
            fwd,
            bwd,
            sides,
            wlo,
            whi,
            slots: vec![Slot::Free; (whi - wlo) as usize],
            orbits: Vec::new(),
            lanes: BTreeMap::new(),
        };
        let mut steps = budget.saturating_mul(256);
        for k in wlo..whi {
            if matches!(c.slots[(k - wlo) as usize], Slot::Free) {
                c.trace(k, &mut steps)?;
            }
        }
        c.check_lanes()?;
        Ok(Some(c))
    }

    fn in_window(&self, k: i64) -> bool {
        self.wlo <= k && k < self.whi
    }

    /// Side, residue and block of a tail cell.
    fn locate(&self, k: i64) -> Option<(usize, usize, i64)> {
        let (side, o) = if k >= self.fwd.hi {
            (0, k - self.fwd.hi)
        } else if k < self.fwd.lo {
            (1, self.fwd.lo - 1 - k)
        } else {
            return None;
        };
        let m = self.sides[side].m;
        Some((side, o.rem_euclid(m) as usize, o.div_euclid(m)))
    }

    fn cell(&self, side: usize, r: usize, block: i64) -> i64 {
        let o = block * self.sides[side].m + r as i64;
        if side == 0 {
            self.fwd.hi + o
        } else {
            self.fwd.lo - 1 - o
        }
    }

    fn far(&self, k: i64, way: Way) -> Option<Anchor> {
        let (side, r, block) = self.locate(k)?;
        let s = &self.sides[side];
        if block < s.reach {
            return None;
        }
        let class = s.class_of[r];
        let d = s.classes[class].drift;
        let ok = match way {
            Way::Out => d > 0,
            Way::In => d < 0,
        };
        ok.then(|| Anchor { side, class, pos: s.pos_of[r], block, index: 0 })
    }

    /// The cell `t` steps along the tail dynamics from an anchor.
    fn cell_after(&self, a: &Anchor, t: i64) -> i64 {
        let class = &self.sides[a.side].classes[a.class];
        let len = class.residues.len() as i64;
        let q = a.pos as i64 + t;
        let p = q.rem_euclid(len) as usize;
        let block = a.block + q.div_euclid(len) * class.drift + class.cum[p] - class.cum[a.pos];
        self.cell(a.side, class.residues[p], block)
    }

    fn trace(&mut self, k: i64, steps: &mut u64) -> Result<()> {
        let mut tick = || {
            if *steps == 0 {
                return Err(Error::BudgetExhausted("orbit tracing".into()));
            }
            *steps -= 1;
            Ok(())
        };
        if self.fwd.apply(k) == k {
            self.slots[(k - self.wlo) as usize] = Slot::Fixed;
            return Ok(());
        }
        let mut ahead = vec![k];
        let mut cur = k;
        let exit = loop {
            tick()?;
            cur = self.fwd.apply(cur);
            if cur == k {
                break None;
            }
            ahead.push(cur);
            if let Some(a) = self.far(cur, Way::Out) {
                break Some(a);
            }
        };
        let id = self.orbits.len();
        let Some(mut exit) = exit else {
            let base = (0..ahead.len()).min_by_key(|&i| ahead[i]).unwrap_or(0);
            ahead.rotate_left(base);
            for (i, &c) in ahead.iter().enumerate() {
                if self.in_window(c) {
                    self.slots[(c - self.wlo) as usize] = Slot::On(id, i as i64);
                }
            }
            self.orbits.push(Orbit::Cycle(ahead));
            return Ok(());
        };
        let mut behind = Vec::new();
        cur = k;
        let mut entry = loop {
            tick()?;
            cur = self.bwd.apply(cur);
            behind.push(cur);
            if let Some(a) = self.far(cur, Way::In) {
                break a;
            }
        };
        behind.reverse();
        behind.extend(ahead);
        let path = behind;
        let key = |c: i64| ((2 * c + 1).abs(), c < 0);
        let base = (0..path.len()).filter(|&i| self.in_window(path[i])).min_by_key(|&i| key(path[i])).unwrap_or(0);
        for (i, &c) in path.iter().enumerate() {
            if self.in_window(c) {
                self.slots[(c - self.wlo) as usize] = Slot::On(id, i as i64 - base as i64);
            }
        }
        entry.index = -(base as i64);
        exit.index = path.len() as i64 - 1 - base as i64;
        for (a, way) in [(entry, Way::In), (exit, Way::Out)] {
            let class = &self.sides[a.side].classes[a.class];
            let lane = (a.block - class.cum[a.pos]).rem_euclid(class.drift.abs());
            if self.lanes.insert((a.side, a.class, lane), (id, way)).is_some() {
                return Err(Error::VerificationFailed("two orbits share a tail lane".into()));
            }
        }
        self.orbits.push(Orbit::Line { path, entry, exit });
        Ok(())
    }

    fn check_lanes(&self) -> Result<()> {
        let want: i64 = self.sides.iter().flat_map(|s| s.classes.iter()).map(|c| c.drift.abs()).sum();
        if want != self.lanes.len() as i64 {
            return Err(Error::VerificationFailed("tail lanes without a crossing orbit".into()));
        }
        Ok(())
    }

    /// Orbit and index of any cell; `None` for fixed cells.
    fn position(&self, k: i64) -> Option<(OrbitRef<'_>, i64)> {
        if self.in_window(k) {
            return match self.slots[(k - self.wlo) as usize] {
                Slot::On(id, i) => Some((OrbitRef::Known(&self.orbits[id]), i)),
                _ => None,
            };
        }
        let (side, r, block) = self.locate(k)?;
        let s = &self.sides[side];
        let class = &s.classes[s.class_of[r]];
        let p = s.pos_of[r];
        if class.drift == 0 {
            if class.residues.len() == 1 {
                return None;
            }
            let mut cyc: Vec<i64> = (0..class.residues.len())
                .map(|q| self.cell(side, class.residues[q], block + class.cum[q] - class.cum[p]))
                .collect();
            let base = (0..cyc.len()).min_by_key(|&i| cyc[i]).unwrap_or(0);
            cyc.rotate_left(base);
            let idx = (p as i64 - base as i64).rem_euclid(cyc.len() as i64);
            return Some((OrbitRef::Far(cyc), idx));
        }
        let lane = (block - class.cum[p]).rem_euclid(class.drift.abs());
        let &(id, way) = self.lanes.get(&(side, s.class_of[r], lane))?;
        let Orbit::Line { entry, exit, .. } = &self.orbits[id] else { return None };
        let a = if way == Way::Out { exit } else { entry };
        let len = class.residues.len() as i64;
        let u = (block - a.block - class.cum[p] + class.cum[a.pos]) / class.drift;
        Some((OrbitRef::Known(&self.orbits[id]), a.index + (p as i64 - a.pos as i64) + len * u))
    }

    fn at(&self, orbit: &OrbitRef<'_>, idx: i64) -> i64 {
        match orbit {
            OrbitRef::Far(cyc) => cyc[idx.rem_euclid(cyc.len() as i64) as usize],
            OrbitRef::Known(Orbit::Cycle(cyc)) => cyc[idx.rem_euclid(cyc.len() as i64) as usize],
            OrbitRef::Known(Orbit::Line { path, entry, exit }) => {
                if idx > exit.index {
                    self.cell_after(exit, idx - exit.index)
                } else if idx < entry.index {
                    self.cell_after(entry, idx - entry.index)
                } else {
                    path[(idx - entry.index) as usize]
                }
            }
        }
    }

    fn span(&self, k: i64) -> (Scalar, Scalar) {
        (self.unit.times(k), self.unit.times(k + 1))
    }

    fn run_set(&self, mut ks: Vec<i64>) -> IntervalSet {
        ks.sort_unstable();
        ks.dedup();
        let mut iv: Vec<(i64, i64)> = Vec::new();
        for k in ks {
            match iv.last_mut() {
                Some(last) if last.1 == k => last.1 = k + 1,
                _ => iv.push((k, k + 1)),
            }
        }
        let iv: Vec<(Scalar, Scalar)> = iv.into_iter().map(|(a, b)| (self.unit.times(a), self.unit.times(b))).collect();
        IntervalSet::from_intervals(&iv)
    }

    /// Cells `offsets` (relative to block `reach`) repeated every `blocks` blocks outward.
    fn far_set(&self, side: usize, blocks: i64, offsets: &[i64]) -> Result<IntervalSet> {
        if offsets.is_empty() {
            return Ok(IntervalSet::empty());
        }
        let s = &self.sides[side];
        let origin = if side == 0 { self.fwd.hi } else { -self.fwd.lo };
        let inner = self.run_set(offsets.to_vec());
        let spec = TailSpec {
            start: self.unit.times(origin + s.reach * s.m),
            period: self.unit.times(blocks * s.m),
            pattern: inner.intervals().unwrap_or_default(),
        };
        let out = IntervalSet::right_periodic(&spec)?;
        Ok(if side == 0 { out } else { IntervalSet::from_layout(out.layout().reflect()) })
    }

    fn exit_class(&self, id: usize) -> Option<(usize, usize)> {
        match &self.orbits[id] {
            Orbit::Line { exit, .. } => Some((exit.side, exit.class)),
            Orbit::Cycle(_) => None,
        }
    }

    fn classification(&self) -> Result<Classification> {
        let mut periodic: BTreeMap<u64, Vec<i64>> = BTreeMap::new();
        let mut lines: BTreeMap<(usize, usize), Vec<i64>> = BTreeMap::new();
        for (i, slot) in self.slots.iter().enumerate() {
            let k = self.wlo + i as i64;
            if let Slot::On(id, _) = slot {
                match &self.orbits[*id] {
                    Orbit::Cycle(c) => periodic.entry(c.len() as u64).or_default().push(k),
                    Orbit::Line { exit, .. } => lines.entry((exit.side, exit.class)).or_default().push(k),
                }
            }
        }
        let mut comps = Vec::new();
        for (n, ks) in periodic {
            comps.push(Component { set: self.run_set(ks), kind: Kind::Periodic { period: n } });
        }
        let mut far_lines: BTreeMap<(usize, usize), IntervalSet> = BTreeMap::new();
        for side in 0..2 {
            let s = &self.sides[side];
            let mut cyc: BTreeMap<u64, Vec<i64>> = BTreeMap::new();
            for (ci, class) in s.classes.iter().enumerate() {
                let len = class.residues.len() as u64;
                let own: Vec<i64> = class.residues.iter().map(|&r| r as i64).collect();
                if class.drift == 0 {
                    if len > 1 {
                        cyc.entry(len).or_default().extend(own);
                    }
                    continue;
                }
                if class.drift > 0 {
                    let set = self.far_set(side, 1, &own)?;
                    let e = far_lines.entry((side, ci)).or_insert_with(IntervalSet::empty);
                    *e = e.union(&set)?;
                    continue;
                }
                let d = class.drift.abs();
                let mut by_exit: BTreeMap<(usize, usize), Vec<i64>> = BTreeMap::new();
                for j in 0..d {
                    for (p, &r) in class.residues.iter().enumerate() {
                        let lane = (s.reach + j - class.cum[p]).rem_euclid(d);
                        let (id, _) = self.lanes[&(side, ci, lane)];
                        let key = self.exit_class(id).ok_or_else(|| Error::VerificationFailed("lane on a cycle".into()))?;
                        by_exit.entry(key).or_default().push(j * s.m + r as i64);
                    }
                }
                for (key, offs) in by_exit {
                    let set = self.far_set(side, d, &offs)?;
                    let e = far_lines.entry(key).or_insert_with(IntervalSet::empty);
                    *e = e.union(&set)?;
                }
            }
            for (n, offs) in cyc {
                comps.push(Component { set: self.far_set(side, 1, &offs)?, kind: Kind::Periodic { period: n } });
            }
        }
        let keys: Vec<(usize, usize)> = far_lines.keys().copied().collect();
        for key in keys {
            let mut set = far_lines.remove(&key).unwrap_or_else(IntervalSet::empty);
            if let Some(ks) = lines.remove(&key) {
                set = set.union(&self.run_set(ks))?;
            }
            let kind = self.wandering(key.0, key.1)?;
            comps.push(Component { set, kind });
        }
        Classification { components: comps }.normalise()
    }

    /// Smallest block run `W` of an outward class with `T^len(W) = W + drift blocks`.
    fn wandering(&self, side: usize, ci: usize) -> Result<Kind> {
        let s = &self.sides[side];
        let class = &s.classes[ci];
        let len = class.residues.len();
        let d = class.drift;
        let holds = |j0: i64| {
            (j0..j0 + d).all(|j| {
                class.residues.iter().all(|&r| {
                    let mut k = self.cell(side, r, j);
                    for _ in 0..len {
                        k = self.fwd.apply(k);
                    }
                    k == self.cell(side, r, j + d)
                })
            })
        };
        let mut j0 = s.reach;
        while j0 > 0 && holds(j0 - 1) {
            j0 -= 1;
        }
        let ks: Vec<i64> = (j0..j0 + d).flat_map(|j| class.residues.iter().map(move |&r| (j, r))).map(|(j, r)| self.cell(side, r, j)).collect();
        let c = self.unit.times(d * s.m);
        Ok(Kind::Dissipative { wandering: self.run_set(ks), k: len as u64, c: if side == 0 { c } else { -c } })
    }

    /// Orbit-index reflection `x_i -> x_{turn - i}` as a map.
    fn reflection(&self, turn: i64, super_blocks: i64) -> Result<Ept> {
        let mut period = 1i64;
        let mut lens = 1i64;
        for c in self.sides.iter().flat_map(|s| s.classes.iter()).filter(|c| c.drift != 0) {
            period = period.lcm(&c.drift.abs());
            lens = lens.lcm(&(c.residues.len() as i64));
        }
        let period = period * lens;
        let target = |k: i64| match self.position(k) {
            None => k,
            Some((o, i)) => self.at(&o, turn - i),
        };
        let (ml, mr) = (self.sides[1].m * period, self.sides[0].m * period);
        let a = self.wlo - super_blocks * ml;
        let b = self.whi + super_blocks * mr;
        let u = &self.unit;
        let mut core = Vec::with_capacity((b - a) as usize);
        for k in a..b {
            let (lo, hi) = self.span(k);
            core.push(Piece::new(lo, hi, Shift::constant(u.times(target(k) - k))));
        }
        let tail = |start: i64, m: i64, cell: &dyn Fn(i64, i64) -> i64, sign: i64| {
            let pieces = (0..m)
                .map(|r| {
                    let (k0, k1) = (cell(r, 0), cell(r, 1));
                    let (s0, s1) = (target(k0) - k0, target(k1) - k1);
                    Piece::new(u.times(r), u.times(r + 1), Shift::new(u.times(sign * s0), u.times(sign * (s1 - s0))))
                })
                .collect();
            Tail { start: u.times(start), period: u.times(m), pieces }
        };
        let right = tail(b, mr, &|r, blk| b + blk * mr + r, 1);
        let left = tail(-a, ml, &|r, blk| a - 1 - blk * ml - r, -1);
        Ept::from_layout(Layout { core, left, right }.canonical())
    }
}

enum OrbitRef<'a> {
    Known(&'a Orbit),
    Far(Vec<i64>),
}

// ---------------------------------------------------------------------------
// Power sweeps, rotations, blockwise tails

fn sweep(t: &Ept, region: &IntervalSet, limit: u64) -> Result<Vec<Component>> {
    let mut rem = region.clone();
    let mut out = Vec::new();
    let mut p = t.clone();
    for n in 1..=limit {
        if n > 1 {
            p = p.compose(t)?;
        }
        let done = rem.diff(&p.support()?)?;
        if !done.is_empty() {
            rem = rem.diff(&done)?;
            if n > 1 {
                out.push(Component { set: done, kind: Kind::Periodic { period: n } });
            }
        }
        if rem.is_empty() {
            return Ok(out);
        }
    }
    out.push(Component { set: rem, kind: Kind::Unknown { spent: limit } });
    Ok(out)
}

fn as_rotation(tk: &Ept, k: &IntervalSet) -> Result<Option<Rotation>> {
    let Some(iv) = k.intervals() else { return Ok(None) };
    let [(a, b)] = iv.as_slice() else { return Ok(None) };
    let moving: Vec<&Piece<Shift>> = tk.layout().core.iter().filter(|p| !p.val.is_zero()).collect();
    let [p, q] = moving.as_slice() else { return Ok(None) };
    let ok = &p.lo == a && p.hi == q.lo && &q.hi == b && p.val.alpha == b - &p.hi && q.val.alpha == a - &q.lo;
    Ok(ok.then(|| Rotation { lo: a.clone(), hi: b.clone(), angle: b - &p.hi, repeat: None }))
}

fn union_find_groups(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for &(a, b) in edges {
        let (x, y) = (root(&mut parent, a), root(&mut parent, b));
        if x != y {
            parent[x.max(y)] = x.min(y);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Classify `t` on a finite-measure invariant region.
fn bounded(t: &Ept, region: &IntervalSet, budget: u64) -> Result<Vec<Component>> {
    let l = settle(restricted(t, region)?.layout())?;
    if l.left.pieces.iter().chain(l.right.pieces.iter()).any(|p| !p.val.is_zero()) {
        return Err(Error::InfiniteSupport);
    }
    // nodes are the translated pieces; a piece is linked to every piece its image meets
    let iv: Vec<(Scalar, Scalar)> = l.core.iter().filter(|p| !p.val.is_zero()).map(|p| (p.lo.clone(), p.hi.clone())).collect();
    let shifts: Vec<&Scalar> = l.core.iter().filter(|p| !p.val.is_zero()).map(|p| &p.val.alpha).collect();
    let mut edges = Vec::new();
    for (i, (a, b)) in iv.iter().enumerate() {
        let (x, y) = (a + shifts[i], b + shifts[i]);
        let from = iv.partition_point(|q| q.1 <= x);
        for (j, q) in iv.iter().enumerate().skip(from) {
            if q.0 >= y {
                break;
            }
            edges.push((i, j));
        }
    }
    let mut out = Vec::new();
    for g in union_find_groups(iv.len(), &edges) {
        let parts: Vec<(Scalar, Scalar)> = g.iter().map(|&i| iv[i].clone()).collect();
        let k = IntervalSet::from_intervals(&parts);
        let tk = restricted(t, &k)?;
        match as_rotation(&tk, &k)? {
            Some(rot) => {
                let kind = match rot.number()? {
                    Some(r) => Kind::Periodic { period: r.denom().to_u64().ok_or_else(|| Error::OutOfClass("period overflow".into()))? },
                    None => Kind::Aperiodic { rotation: rot },
                };
                out.push(Component { set: k, kind });
            }
            None => out.extend(sweep(&tk, &k, budget.min(SWEEP_LIMIT))?),
        }
    }
    Ok(out)
}

/// The map of one tail block, in block coordinates, if every block is invariant.
fn block_map(tail: &Tail<Shift>) -> Result<Option<Ept>> {
    let zero = Scalar::zero();
    let mut pieces = Vec::new();
    for p in &tail.pieces {
        let s = &p.val;
        if !s.beta.is_zero() || &p.lo + &s.alpha < zero || &p.hi + &s.alpha > tail.period {
            return Ok(None);
        }
        pieces.push((p.lo.clone(), p.hi.clone(), s.alpha.clone()));
    }
    Ok(Some(Ept::from_pieces(&pieces)?))
}

fn repeat_component(c: Component, side: Side, tail: &Tail<Shift>) -> Result<Component> {
    let spec = TailSpec { start: tail.start.clone(), period: tail.period.clone(), pattern: c.set.intervals().unwrap_or_default() };
    let out = IntervalSet::right_periodic(&spec)?;
    let set = match side {
        Side::Right => out,
        Side::Left => IntervalSet::from_layout(out.layout().reflect()),
    };
    let kind = match c.kind {
        Kind::Aperiodic { rotation: r } => {
            let (lo, hi) = (&tail.start + &r.lo, &tail.start + &r.hi);
            let rotation = match side {
                Side::Right => Rotation { lo, hi, angle: r.angle, repeat: Some((Side::Right, tail.period.clone())) },
                Side::Left => Rotation { lo: -hi, hi: -lo, angle: &r.width() - &r.angle, repeat: Some((Side::Left, tail.period.clone())) },
            };
            Kind::Aperiodic { rotation }
        }
        k => k,
    };
    Ok(Component { set, kind })
}

fn generic(t: &Ept, budget: u64) -> Result<Classification> {
    let supp = t.support()?;
    let l = settle(t.layout())?;
    let mut comps = Vec::new();
    for (side, tail) in [(Side::Right, &l.right), (Side::Left, &l.left)] {
        if tail.pieces.iter().all(|p| p.val.is_zero()) {
            continue;
        }
        let Some(block) = block_map(tail)? else {
            return Classification { components: sweep(t, &supp, budget.min(GLOBAL_SWEEP_LIMIT))? }.normalise();
        };
        let inside = IntervalSet::interval(Scalar::zero(), tail.period.clone());
        for c in bounded(&block, &inside, budget)? {
            comps.push(repeat_component(c, side, tail)?);
        }
    }
    let core = supp.intersect(&IntervalSet::interval(l.core_lo(), l.core_hi()))?;
    if !core.is_empty() {
        comps.extend(bounded(&restricted(t, &core)?, &core, budget)?);
    }
    Classification { components: comps }.normalise()
}

/// Hopf classification of `t` with certificates; never returns a wrong certificate.
pub fn classify(t: &Ept, budget: u64) -> Result<Classification> {
    if t.is_identity()? {
        return Ok(Classification { components: Vec::new() });
    }
    match Cells::analyse(t, &[], budget) {
        Ok(Some(c)) => c.classification(),
        Ok(None) | Err(Error::BudgetExhausted(_)) => generic(t, budget),
        Err(e) => Err(e),
    }
}

fn complete(t: &Ept, budget: u64) -> Result<Classification> {
    let c = classify(t, budget)?;
    if !c.is_complete() {
        return Err(Error::ClassificationIncomplete);
    }
    Ok(c)
}

/// `(T_D, T_Cf, T_Cinf)`: `t` on its dissipative, periodic and aperiodic parts.
pub fn hopf(t: &Ept, budget: u64) -> Result<(Ept, Ept, Ept)> {
    let c = complete(t, budget)?;
    Ok((
        restricted(t, &c.dissipative_part()?)?,
        restricted(t, &c.periodic_part()?)?,
        restricted(t, &c.aperiodic_part()?)?,
    ))
}

// ---------------------------------------------------------------------------
// First return, markers, splitting

#[derive(Clone, Debug, PartialEq)]
pub struct Induced {
    pub map: Ept,
    /// `(n, A_n)`: the part of `A` first returning after `n` steps.
    pub returns: Vec<(u64, IntervalSet)>,
}

/// First-return map on `a`, by pushing `a` forward and removing returned mass.
pub fn induce(t: &Ept, a: &IntervalSet, budget: u64) -> Result<Induced> {
    if a.measure().is_zero() {
        return Err(Error::OutOfRange("inducing set is null".into()));
    }
    let diss = classify(t, budget)?.dissipative_part()?.intersect(a)?;
    if let Some(w) = diss.witness() {
        return Err(Error::NotConservative(w));
    }
    let mut live = t.restrict(a)?;
    let mut pieces = Vec::new();
    let mut returns = Vec::new();
    for n in 1..=budget {
        let rng = live.rng()?;
        let back = rng.intersect(a)?;
        if !back.is_empty() {
            let part = live.inverse()?.restrict(&back)?.inverse()?;
            returns.push((n, part.dom()));
            pieces.push(part);
        }
        let out = rng.diff(a)?;
        if out.is_empty() {
            let map = PartialIso::paste(&pieces)?.extend_by_identity()?;
            return Ok(Induced { map, returns });
        }
        let cont = live.inverse()?.restrict(&out)?.inverse()?;
        live = t.restrict(&out)?.compose(&cont)?;
    }
    Err(Error::BudgetExhausted(format!("no full return within {budget} steps")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Marker {
    pub set: IntervalSet,
    /// Minimal rotations whose every orbit is dense, hence meets the marker.
    pub rotations: Vec<Rotation>,
}

fn aperiodic_rotations(c: &Classification) -> Result<Vec<Rotation>> {
    if !c.is_complete() {
        return Err(Error::BudgetExhausted("classification left unknown components".into()));
    }
    let mut out = Vec::new();
    for comp in &c.components {
        match &comp.kind {
            Kind::Aperiodic { rotation } => out.push(rotation.clone()),
            _ => return Err(Error::NotAperiodic),
        }
    }
    if out.is_empty() {
        return Err(Error::NotAperiodic);
    }
    Ok(out)
}

/// A set of measure `< eps` meeting almost every orbit.
pub fn rokhlin_marker(t: &Ept, eps: &Scalar, budget: u64) -> Result<Marker> {
    if !eps.is_positive() {
        return Err(Error::OutOfRange("eps must be positive".into()));
    }
    let rotations = aperiodic_rotations(&classify(t, budget)?)?;
    let mut set = IntervalSet::empty();
    let mut share = eps / &Scalar::int(2);
    for r in &rotations {
        if r.repeat.is_some() {
            return Err(Error::OutOfClass("a finite-measure marker cannot meet infinitely many invariant blocks".into()));
        }
        let len = share.clone().min(&r.width() / &Scalar::int(2));
        set = set.union(&IntervalSet::interval(r.lo.clone(), &r.lo + &len))?;
        share = &share / &Scalar::int(2);
    }
    Ok(Marker { set, rotations })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factorisation {
    pub t1: Ept,
    pub t2: Ept,
    pub teps: Ept,
}

/// Halve each fundamental domain `(F, n)` of the periodic map `s` per visit count to `d`.
fn split_periodic(s: &Ept, parts: &[(IntervalSet, u64)], d: &IntervalSet) -> Result<(IntervalSet, IntervalSet)> {
    let top = parts.iter().map(|p| p.1).max().unwrap_or(0);
    let mut pw = vec![Ept::identity()];
    for j in 1..top {
        pw.push(pw[j as usize - 1].compose(s)?);
    }
    let mut sat = (IntervalSet::empty(), IntervalSet::empty());
    for (f, n) in parts {
        let n = *n as usize;
        let mut count: Layout<u32> = Layout::constant(0);
        for p in &pw[..n] {
            count = zip_with(&count, p.preimage(d)?.layout(), |c, b| c + u32::from(*b))?;
        }
        let mut values: Vec<u32> = count.all_payloads().copied().collect();
        values.sort_unstable();
        values.dedup();
        for v in values {
            let slice = IntervalSet::from_layout(zip_with(&count, f.layout(), |c, b| *b && *c == v)?);
            if slice.is_empty() {
                continue;
            }
            let (a, b) = halves(&slice)?;
            for p in &pw[..n] {
                sat.0 = sat.0.union(&p.image(&a)?)?;
                sat.1 = sat.1.union(&p.image(&b)?)?;
            }
        }
    }
    Ok(sat)
}

/// `t = t1 ∘ t2 ∘ teps` with `t1`, `t2` of disjoint supports of equal measure
/// meeting `d` equally, and `teps` aperiodic with support of measure `< eps`.
pub fn factor_split(t: &Ept, d: &IntervalSet, eps: &Scalar, budget: u64) -> Result<Factorisation> {
    if d.measure().is_zero() {
        return Err(Error::OutOfRange("D must have positive measure".into()));
    }
    if !eps.is_positive() {
        return Err(Error::OutOfRange("eps must be positive".into()));
    }
    let cls = complete(t, budget)?;
    let supp = t.support()?;
    let out = if cls.aperiodic_part()?.is_empty() && supp.measure() != ExtMeasure::zero() {
        match cell_unit(t, &[d])? {
            Some(unit) => {
                let half = IntervalSet::two_sided(&TailSpec {
                    start: Scalar::zero(),
                    period: unit.clone(),
                    pattern: vec![(Scalar::zero(), &unit / &Scalar::int(2))],
                })?;
                Factorisation {
                    t1: restricted(t, &supp.intersect(&half)?)?,
                    t2: restricted(t, &supp.diff(&half)?)?,
                    teps: Ept::identity(),
                }
            }
            None => split_generic(t, &cls, d, eps, budget)?,
        }
    } else {
        split_generic(t, &cls, d, eps, budget)?
    };
    check_factorisation(t, &out, d, eps)?;
    Ok(out)
}

fn split_generic(t: &Ept, cls: &Classification, d: &IntervalSet, eps: &Scalar, budget: u64) -> Result<Factorisation> {
    let mut parts = Vec::new();
    let mut teps = Ept::identity();
    let aperiodic = cls.aperiodic_part()?;
    if !aperiodic.is_empty() {
        let ta = restricted(t, &aperiodic)?;
        let marker = rokhlin_marker(&ta, eps, budget)?;
        let ind = induce(&ta, &marker.set, budget)?;
        for (n, an) in &ind.returns {
            parts.push((ind.map.image(an)?, *n));
        }
        teps = ind.map;
    }
    let s = t.compose(&teps.inverse()?)?;
    for c in &cls.components {
        match &c.kind {
            Kind::Periodic { period } => {
                if !c.set.measure().is_finite() {
                    return Err(Error::OutOfClass("periodic component of infinite measure off the cell lattice".into()));
                }
                parts.push((orbit_minima(t, &c.set, *period)?, *period));
            }
            Kind::Dissipative { .. } => return Err(Error::OutOfClass("dissipative component off the cell lattice".into())),
            _ => {}
        }
    }
    let (a, b) = split_periodic(&s, &parts, d)?;
    Ok(Factorisation { t1: restricted(&s, &a)?, t2: restricted(&s, &b)?, teps })
}

fn check_factorisation(t: &Ept, f: &Factorisation, d: &IntervalSet, eps: &Scalar) -> Result<()> {
    let fail = |m: &str| Err(Error::VerificationFailed(m.into()));
    if !f.t1.compose(&f.t2.compose(&f.teps)?)?.eq_ae(t)? {
        return fail("product differs from T");
    }
    let (s1, s2) = (f.t1.support()?, f.t2.support()?);
    if !s1.is_disjoint(&s2)? {
        return fail("supports of T1 and T2 overlap");
    }
    if s1.measure() != s2.measure() || s1.intersect(d)?.measure() != s2.intersect(d)?.measure() {
        return fail("T1 and T2 are not balanced");
    }
    match f.teps.support()?.measure() {
        ExtMeasure::Finite(m) if &m < eps => Ok(()),
        _ => fail("support of T_eps is too large"),
    }
}

/// `t` on the union of its invariant aperiodic blocks inside `[1 - levels, levels)`.
pub fn skyscraper_approx(t: &Ept, levels: u64, budget: u64) -> Result<Ept> {
    if levels == 0 {
        return Err(Error::OutOfRange("levels must be positive".into()));
    }
    if t.is_identity()? {
        return Ok(Ept::identity());
    }
    let rotations = aperiodic_rotations(&classify(t, budget)?)?;
    let top = Scalar::int(i64::try_from(levels).map_err(|_| Error::OutOfRange("levels".into()))?);
    let bottom = &Scalar::one() - &top;
    let mut keep = Vec::new();
    for r in &rotations {
        let (mut lo, mut hi) = (r.lo.clone(), r.hi.clone());
        let step = match &r.repeat {
            None => None,
            Some((Side::Right, p)) => Some(p.clone()),
            Some((Side::Left, p)) => Some(-p),
        };
        while lo >= bottom && hi <= top {
            keep.push((lo.clone(), hi.clone()));
            let Some(s) = &step else { break };
            lo = &lo + s;
            hi = &hi + s;
        }
    }
    restricted(t, &IntervalSet::from_intervals(&keep))
}

/// `U_n`: `t` where both `x` and `t(x)` lie in `x_n`, identity elsewhere.
pub fn truncate_support(t: &Ept, xn: &IntervalSet) -> Result<Ept> {
    if !t.is_involution()? {
        return Err(Error::NotInvolution);
    }
    if !xn.measure().is_finite() {
        return Err(Error::OutOfRange("truncation set must have finite measure".into()));
    }
    let keep = xn.intersect(&t.preimage(xn)?)?;
    let u = restricted(t, &keep)?;
    let bound = &mu(&xn.complement())? + &mu(&t.image(xn)?.complement())?;
    if d_mu(&u, t)? > bound {
        return Err(Error::VerificationFailed("truncation bound".into()));
    }
    Ok(u)
}

/// Involutions `[u1, u2, u3]` with `u1 ∘ u2 ∘ u3 = t`.
pub fn three_involutions(t: &Ept, budget: u64) -> Result<[Ept; 3]> {
    if t.is_involution()? {
        return Ok([t.clone(), Ept::identity(), Ept::identity()]);
    }
    let cls = classify(t, budget)?;
    if !cls.aperiodic_part()?.is_empty() {
        return Err(Error::UnsupportedAperiodic);
    }
    if !cls.is_complete() {
        return Err(Error::ClassificationIncomplete);
    }
    let check = |w: &Ept, v: &Ept| -> Result<bool> {
        Ok(v.is_involution()? && w.is_involution()? && w.compose(v)?.eq_ae(t)?)
    };
    if let Ok(Some(c)) = Cells::analyse(t, &[], budget) {
        for k in [1, 2, 4, 8, 16] {
            let (Ok(v), Ok(w)) = (c.reflection(0, k), c.reflection(1, k)) else { continue };
            if check(&w, &v)? {
                return Ok([w, v, Ept::identity()]);
            }
        }
        return Err(Error::OutOfClass("reflections of the orbit lines are not eventually periodic".into()));
    }
    let mut vs = Vec::new();
    let mut ws = Vec::new();
    for c in &cls.components {
        let Kind::Periodic { period } = c.kind else {
            return Err(Error::OutOfClass("dissipative component off the cell lattice".into()));
        };
        let n = period as usize;
        let f = orbit_minima(t, &c.set, period)?;
        let mut pw = vec![Ept::identity()];
        for j in 1..n {
            pw.push(pw[j - 1].compose(t)?);
        }
        for j in 0..n {
            let fj = pw[j].image(&f)?;
            let jj = j as i64;
            let nn = n as i64;
            vs.push(pw[(-2 * jj).rem_euclid(nn) as usize].restrict(&fj)?);
            ws.push(pw[(1 - 2 * jj).rem_euclid(nn) as usize].restrict(&fj)?);
        }
    }
    let v = PartialIso::paste(&vs)?.extend_by_identity()?;
    let w = PartialIso::paste(&ws)?.extend_by_identity()?;
    if !check(&w, &v)? {
        return Err(Error::VerificationFailed("dihedral factorisation".into()));
    }
    Ok([w, v, Ept::identity()])
}

/// Pointwise first-return simulation, for cross-checking `induce`.
pub fn first_return(t: &Ept, a: &IntervalSet, x: &Scalar, limit: u64) -> Option<(u64, Scalar)> {
    let inside = |y: &Scalar| a.layout().value_at(y);
    let mut y = x.clone();
    for n in 1..=limit {
        y = t.apply(&y);
        if inside(&y) {
            return Some((n, y));
        }
    }
    None
}

