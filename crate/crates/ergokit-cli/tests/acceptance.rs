//! Acceptance suite: one line per criterion, exact comparisons throughout.
//!
//! Run with `cargo test -p ergokit-cli --test acceptance -- --nocapture` to see the table.

use std::collections::BTreeMap;
use std::process::Command;

use ergokit::constructions::{exchange_involution, multiply_support, normal_involution_with_measure, separator, three_involutions};
use ergokit::dynamics::{classify, factor_split, hopf, induce, first_return, truncate_support, Rotation, DEFAULT_BUDGET};
use ergokit::map::Side;
use ergokit::metrics::{cm_metric, d_mu, d_uc, d_uf, dyadic_test_set, mu, weak_term};
use ergokit::{staircase_set, Ept, Error, ExtMeasure, IntervalSet, Layout, Piece, Scalar, Shift, Tail, TailSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn s(x: &str) -> Scalar {
    x.parse().unwrap()
}

fn q(p: i64, d: i64) -> Scalar {
    Scalar::frac(p, d)
}

fn iv(a: Scalar, b: Scalar) -> IntervalSet {
    IntervalSet::interval(a, b)
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn e2s(e: Error) -> String {
    format!("{}: {e}", e.code())
}

fn golden() -> Scalar {
    s("-1/2+1/2*rt(5)")
}

fn rotation(lo: Scalar, w: Scalar, angle: Scalar) -> Ept {
    Rotation { lo: lo.clone(), hi: &lo + &w, angle, repeat: None }.as_ept().unwrap()
}

fn swap(a: Scalar, w: Scalar) -> Ept {
    rotation(a, &w + &w, w)
}

/// Cycles `k` consecutive blocks of width `w` one step to the right.
fn cycle(a: Scalar, w: Scalar, k: i64) -> Ept {
    rotation(a, w.times(k), w)
}

fn swap01() -> Ept {
    swap(s("0"), s("1"))
}

fn cycle3() -> Ept {
    cycle(s("0"), s("1"), 3)
}

/// Swaps `[2n, 2n+1)` with `[2n+1, 2n+2)` for every `n`.
fn staircase_involution() -> Ept {
    let pieces = vec![
        Piece::new(s("0"), s("1"), Shift::constant(s("1"))),
        Piece::new(s("1"), s("2"), Shift::constant(s("-1"))),
    ];
    let tail = Tail { start: s("0"), period: s("2"), pieces };
    Ept::from_layout(Layout { core: vec![], left: tail.clone(), right: tail }).unwrap()
}

fn blockwise_golden() -> Ept {
    let r = Rotation { lo: s("0"), hi: s("1"), angle: golden(), repeat: Some((Side::Right, s("1"))) };
    let l = Rotation { lo: s("-1"), hi: s("0"), angle: golden(), repeat: Some((Side::Left, s("1"))) };
    r.as_ept().unwrap().compose(&l.as_ept().unwrap()).unwrap()
}

/// A two-sided periodic involution swapping adjacent halves of each period.
fn periodic_swap(p: Scalar) -> Ept {
    let h = &p / &Scalar::int(2);
    let pieces = vec![Piece::new(s("0"), h.clone(), Shift::constant(h.clone())), Piece::new(h.clone(), p.clone(), Shift::constant(-&h))];
    let tail = Tail { start: s("0"), period: p, pieces };
    Ept::from_layout(Layout { core: vec![], left: tail.clone(), right: tail }).unwrap()
}

struct Gen(ChaCha8Rng);

impl Gen {
    fn new(seed: u64) -> Gen {
        Gen(ChaCha8Rng::seed_from_u64(seed))
    }

    fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.0.random_range(lo..=hi)
    }

    fn rat(&mut self, lo: i64, hi: i64, den: i64) -> Scalar {
        q(self.int(lo * den, hi * den), den)
    }

    fn finite_atom(&mut self) -> Ept {
        let den = [1, 2, 4][self.int(0, 2) as usize];
        let a = self.rat(-4, 4, den);
        let w = q(self.int(1, 2 * den), den);
        match self.int(0, 2) {
            0 => swap(a, w),
            1 => cycle(a, w, self.int(3, 4)),
            _ => {
                let n = self.int(2, 6);
                rotation(a, w.clone(), &w * &q(self.int(1, n - 1), n))
            }
        }
    }

    /// Finite-support map with rational data.
    fn finite(&mut self) -> Ept {
        let mut t = self.finite_atom();
        for _ in 0..self.int(0, 2) {
            t = t.compose(&self.finite_atom()).unwrap();
        }
        t
    }

    /// Rational-lattice map that may move infinitely many points.
    fn lattice(&mut self) -> Ept {
        let mut t = match self.int(0, 3) {
            0 => Ept::translation(q([1, 2, -1, 3][self.int(0, 3) as usize], [1, 2][self.int(0, 1) as usize])),
            1 => periodic_swap(q(self.int(1, 4), 1)),
            _ => self.finite(),
        };
        if self.int(0, 1) == 1 {
            t = t.compose(&self.finite()).unwrap();
        }
        t
    }

    fn finite_set(&mut self) -> IntervalSet {
        let mut iv = Vec::new();
        for _ in 0..self.int(1, 3) {
            let a = self.rat(-5, 5, 4);
            let b = &a + &self.rat(0, 2, 4) + q(1, 4);
            iv.push((a, b));
        }
        IntervalSet::from_intervals(&iv)
    }

    fn periodic_set(&mut self, p: i64) -> IntervalSet {
        let a = self.rat(0, p - 1, 2);
        let len = self.rat(0, 1, 4) + q(1, 4);
        let b = (&a + &len).min(Scalar::int(p));
        IntervalSet::two_sided(&TailSpec { start: s("0"), period: Scalar::int(p), pattern: vec![(a, b)] }).unwrap()
    }
}

fn criterion_1() -> Outcome {
    let mut pool = [(Ept::identity(), None), (swap01(), Some(iv(s("0"), s("1")))), (Ept::translation(s("1")), None)];
    let three = IntervalSet::two_sided(&TailSpec { start: s("0"), period: s("3"), pattern: vec![(s("0"), s("1"))] }).unwrap();
    pool[2].1 = Some(three);
    pool[0].1 = Some(IntervalSet::empty());
    let mut g = Gen::new(1);
    let mut n = 0;
    let mut randoms = Vec::new();
    while randoms.len() < 120 {
        let t = if n % 4 == 3 { g.finite().compose(&rotation(s("10"), s("1"), golden())).unwrap() } else { g.lattice() };
        n += 1;
        let c = if n % 2 == 0 { IntervalSet::full() } else { g.finite_set() };
        randoms.push((t, c));
    }
    for (i, (t, want)) in pool.iter().enumerate() {
        let a = separator(t, &IntervalSet::full()).map_err(e2s)?;
        ensure(a.eq_ae(want.as_ref().unwrap()).unwrap(), || format!("canonical example {i} gave {:?}", a.intervals()))?;
    }
    let mut checked = 0;
    for (t, c) in pool.iter().map(|(t, _)| (t.clone(), IntervalSet::full())).chain(randoms) {
        let a = separator(&t, &c).map_err(e2s)?;
        let supp = t.support().unwrap().intersect(&c).unwrap();
        let ta = t.image(&a).unwrap();
        let pa = t.preimage(&a).unwrap().intersect(&supp).unwrap();
        let union = a.union(&ta.intersect(&supp).unwrap()).unwrap().union(&pa).unwrap();
        ensure(a.is_subset(&supp).unwrap(), || "A leaves C n supp T".into())?;
        ensure(a.is_disjoint(&ta).unwrap() && a.is_disjoint(&pa).unwrap(), || "A meets its images".into())?;
        ensure(union.symdiff(&supp).unwrap().measure().is_zero(), || "union differs from C n supp T".into())?;
        checked += 1;
    }
    Ok(format!("{checked} maps (3 canonical), symdiff measure 0"))
}

fn criterion_2() -> Outcome {
    let mut g = Gen::new(2);
    let (mut finite, mut infinite) = (0, 0);
    while finite + infinite < 120 {
        let (a, b) = if (finite + infinite) % 3 == 2 {
            let p = g.int(1, 3);
            let a = g.periodic_set(p);
            let b = a.translate(&g.rat(1, 6, 2));
            (a, b)
        } else {
            let a = g.finite_set();
            let b = g.finite().image(&a).unwrap();
            (a, b)
        };
        let u = exchange_involution(&a, &b).map_err(e2s)?;
        ensure(u.is_involution().unwrap(), || "U^2 != id".into())?;
        ensure(u.image(&a).unwrap().eq_ae(&b).unwrap(), || "U(A) != B".into())?;
        ensure(u.support().unwrap().is_subset(&a.symdiff(&b).unwrap()).unwrap(), || "supp U not in A symdiff B".into())?;
        if a.measure().is_finite() {
            finite += 1;
        } else {
            infinite += 1;
        }
    }
    Ok(format!("{} pairs ({finite} finite, {infinite} infinite periodic)", finite + infinite))
}

fn check_factor(t: &Ept, d: &IntervalSet, eps: &Scalar) -> Result<(), String> {
    let f = factor_split(t, d, eps, DEFAULT_BUDGET).map_err(e2s)?;
    ensure(f.t1.compose(&f.t2.compose(&f.teps).unwrap()).unwrap().eq_ae(t).unwrap(), || "product differs".into())?;
    let (a, b) = (f.t1.support().unwrap(), f.t2.support().unwrap());
    ensure(a.intersect(&b).unwrap().measure().is_zero(), || "supports overlap".into())?;
    ensure(a.measure() == b.measure(), || format!("support measures {} vs {}", a.measure(), b.measure()))?;
    let (da, db) = (a.intersect(d).unwrap().measure(), b.intersect(d).unwrap().measure());
    ensure(da == db, || format!("D-measures {da} vs {db}"))?;
    let m = f.teps.support().unwrap().measure();
    ensure(m.finite().is_some_and(|x| x < eps), || format!("supp Teps measure {m}"))?;
    Ok(())
}

fn criterion_3() -> Outcome {
    let eps = q(1, 10);
    let d0 = iv(s("0"), s("1"));
    check_factor(&Ept::translation(s("1")), &d0, &eps)?;
    check_factor(&cycle3(), &d0, &eps)?;
    let mut g = Gen::new(3);
    let mut n = 0;
    let mut skipped = 0;
    while n < 60 {
        let t = g.lattice();
        let d = g.finite_set();
        match factor_split(&t, &d, &eps, DEFAULT_BUDGET) {
            Err(Error::CompositionOutOfClass(_)) => skipped += 1,
            _ => {
                check_factor(&t, &d, &eps).map_err(|e| format!("instance {n}: {e}"))?;
                n += 1;
            }
        }
    }
    Ok(format!("2 examples + {n} random periodic/dissipative maps ({skipped} out of class)"))
}

fn criterion_4() -> Outcome {
    let mut pool = vec![Ept::translation(s("1")), swap01(), cycle3(), rotation(s("0"), s("1"), golden()), blockwise_golden(), staircase_involution()];
    pool.push(cycle3().compose(&rotation(s("10"), s("1"), golden())).unwrap());
    let mut g = Gen::new(4);
    for _ in 0..60 {
        pool.push(g.lattice());
    }
    let mut certs = 0;
    let mut unknown = 0;
    for (i, t) in pool.iter().enumerate() {
        let c = classify(t, DEFAULT_BUDGET).map_err(e2s)?;
        c.verify(t).map_err(|e| format!("instance {i}: {}", e2s(e)))?;
        if !c.is_complete() {
            unknown += 1;
            continue;
        }
        certs += c.components.len();
        let (a, b, e) = hopf(t, DEFAULT_BUDGET).map_err(e2s)?;
        ensure(a.compose(&b.compose(&e).unwrap()).unwrap().eq_ae(t).unwrap(), || format!("instance {i}: product"))?;
        let fs = [&a, &b, &e];
        let mut all = IntervalSet::empty();
        for (j, x) in fs.iter().enumerate() {
            all = all.union(&x.support().unwrap()).unwrap();
            for y in &fs[j + 1..] {
                ensure(x.compose(y).unwrap().eq_ae(&y.compose(x).unwrap()).unwrap(), || format!("instance {i}: commute"))?;
                ensure(x.support().unwrap().is_disjoint(&y.support().unwrap()).unwrap(), || format!("instance {i}: overlap"))?;
            }
        }
        ensure(all.eq_ae(&t.support().unwrap()).unwrap(), || format!("instance {i}: cover"))?;
    }
    ensure(unknown == 0, || format!("{unknown} classifications incomplete"))?;
    Ok(format!("{} maps classified, {certs} certificates re-verified", pool.len()))
}

fn criterion_5() -> Outcome {
    let mut g = Gen::new(5);
    for n in 0..60 {
        let (a, b) = (g.finite(), g.finite());
        for k in 1..=5u32 {
            let (pa, pb) = (multiply_support(&a, k).map_err(e2s)?, multiply_support(&b, k).map_err(e2s)?);
            let kk = k as i64;
            let m = a.support().unwrap().measure();
            let mk = pa.support().unwrap().measure();
            ensure(mk.finite() == m.finite().map(|x| x.times(kk)).as_ref(), || format!("pair {n}, k={k}: support scaling"))?;
            let (dk, d1) = (d_uf(&pa, &pb).unwrap(), d_uf(&a, &b).unwrap());
            ensure(dk.finite() == d1.finite().map(|x| x.times(kk)).as_ref(), || format!("pair {n}, k={k}: d_uf scaling"))?;
            let prod = multiply_support(&a.compose(&b).unwrap(), k).map_err(e2s)?;
            ensure(prod.eq_ae(&pa.compose(&pb).unwrap()).unwrap(), || format!("pair {n}, k={k}: homomorphism"))?;
        }
    }
    Ok("60 pairs, k = 1..5".into())
}

fn criterion_6() -> Outcome {
    let id = Ept::identity();
    let level4: u64 = (1..=4).map(|m: u64| 2 * m * (1 << m)).sum();
    for n in 2..=64i64 {
        let t = rotation(s("0"), s("1"), q(1, n));
        let cm = cm_metric(&t, &id).map_err(e2s)?;
        let want = &(&q(2, 3) * &q(1, n)) * &(Scalar::one() - q(1, n));
        ensure(cm == want, || format!("n={n}: cm {cm} != {want}"))?;
        let dm = d_mu(&t, &id).map_err(e2s)?;
        ensure(dm == q(1, 3), || format!("n={n}: d_mu {dm}"))?;
        for i in 0..level4 {
            let (a, b) = dyadic_test_set(i);
            let w = weak_term(&t, &id, &iv(a.clone(), b.clone())).map_err(e2s)?;
            ensure(w <= q(2, n), || format!("n={n}: weak term on [{a}, {b}) is {w}"))?;
        }
    }
    Ok(format!("n = 2..64, {level4} dyadic test sets of level <= 4"))
}

fn criterion_7() -> Outcome {
    let mut g = Gen::new(7);
    for n in 0..200 {
        let (x, y) = (g.lattice(), g.lattice());
        let c = g.finite_set();
        let lhs = x.image(&c).unwrap().symdiff(&y.image(&c).unwrap()).unwrap().measure();
        let rhs = d_uc(&x, &y, &c).map_err(e2s)?;
        ensure(lhs.finite().is_some_and(|l| l <= &(&rhs + &rhs)), || format!("triple {n}: {lhs} > 2 * {rhs}"))?;
    }
    Ok("200 random triples".into())
}

fn kac(t: &Ept, a: &IntervalSet) -> Result<(), String> {
    let ind = induce(t, a, DEFAULT_BUDGET).map_err(e2s)?;
    let mut total = Scalar::zero();
    for (n, an) in &ind.returns {
        total += &an.measure().finite().unwrap().times(*n as i64);
    }
    let top = ind.returns.iter().map(|r| r.0).max().unwrap_or(1);
    let mut sat = IntervalSet::empty();
    let mut p = Ept::identity();
    for _ in 0..top {
        sat = sat.union(&p.image(a).unwrap()).unwrap();
        p = p.compose(t).unwrap();
    }
    ensure(ExtMeasure::Finite(total.clone()) == sat.measure(), || format!("sum n |A_n| = {total}, saturation {}", sat.measure()))
}

fn criterion_8() -> Outcome {
    let mut g = Gen::new(8);
    let mut n = 0;
    kac(&cycle3(), &iv(s("0"), s("1")))?;
    while n < 60 {
        let t = if n % 2 == 0 {
            g.finite()
        } else {
            let d = g.int(2, 9);
            rotation(s("0"), s("1"), q(g.int(1, d - 1), d))
        };
        let a = g.finite_set().intersect(&t.support().unwrap()).unwrap();
        if a.is_empty() {
            continue;
        }
        kac(&t, &a).map_err(|e| format!("instance {n}: {e}"))?;
        n += 1;
    }
    let t = rotation(s("0"), s("1"), golden());
    let a = iv(s("0"), golden());
    let ind = induce(&t, &a, DEFAULT_BUDGET).map_err(e2s)?;
    let times: Vec<u64> = ind.returns.iter().map(|r| r.0).collect();
    ensure(times == vec![1, 2], || format!("golden return times {times:?}"))?;
    for i in 0..100 {
        let x = &golden() * &q(i, 100);
        let (k, y) = first_return(&t, &a, &x, 16).ok_or("no return")?;
        ensure(ind.map.apply(&x) == y, || format!("T_A({x}) differs from simulation"))?;
        let cell = ind.returns.iter().find(|r| r.1.layout().value_at(&x)).ok_or("point outside every A_n")?;
        ensure(cell.0 == k, || format!("return time at {x}"))?;
    }
    Ok("61 periodic/rational-rotation instances, golden rotation on 100 points".into())
}

fn check_three(t: &Ept) -> Result<(), String> {
    let us = three_involutions(t, DEFAULT_BUDGET).map_err(e2s)?;
    for u in &us {
        ensure(u.is_involution().unwrap(), || "factor is not an involution".into())?;
    }
    ensure(us[0].compose(&us[1].compose(&us[2]).unwrap()).unwrap().eq_ae(t).unwrap(), || "product differs".into())
}

fn criterion_9() -> Outcome {
    check_three(&Ept::translation(s("1")))?;
    check_three(&cycle3())?;
    let r2 = s("0+1*rt(2)");
    check_three(&cycle(s("0"), r2, 3))?;
    let mut g = Gen::new(9);
    let mut n = 0;
    let mut out_of_class = 0;
    while n < 60 {
        let t = g.lattice();
        match three_involutions(&t, DEFAULT_BUDGET) {
            Err(Error::OutOfClass(_) | Error::CompositionOutOfClass(_)) => out_of_class += 1,
            _ => {
                check_three(&t).map_err(|e| format!("instance {n}: {e}"))?;
                n += 1;
            }
        }
    }
    for t in [rotation(s("0"), s("1"), golden()), blockwise_golden()] {
        ensure(matches!(three_involutions(&t, DEFAULT_BUDGET), Err(Error::UnsupportedAperiodic)), || "aperiodic input accepted".into())?;
    }
    Ok(format!("3 examples + {n} random maps ({out_of_class} out of class), aperiodic inputs rejected"))
}

fn criterion_10() -> Outcome {
    let u = swap01();
    let gens = BTreeMap::from([("U".to_string(), u.clone())]);
    for t in ["1/4", "1", "2", "4", "8"] {
        let (w, word) = normal_involution_with_measure(&u, &s(t)).map_err(e2s)?;
        let m = w.support().unwrap().measure();
        ensure(m == ExtMeasure::Finite(s(t)), || format!("t={t}: measure {m}"))?;
        ensure(w.is_involution().unwrap(), || format!("t={t}: not an involution"))?;
        ensure(word.eval(&gens).map_err(e2s)?.eq_ae(&w).unwrap(), || format!("t={t}: word differs"))?;
    }
    Ok("t in {1/4, 1, 2, 4, 8}".into())
}

fn criterion_11() -> Outcome {
    let grid: Vec<Scalar> = (0..=8).map(|i| q(i, 8)).collect();
    let mut pairs = 0;
    let two = s("2");
    // A_t placed on even blocks, its copy on odd blocks
    let placed = |t: &Scalar| {
        let even = IntervalSet::two_sided(&TailSpec { start: s("0"), period: two.clone(), pattern: vec![(s("0"), t.clone())] }).unwrap();
        (even.clone(), even.translate(&Scalar::one()))
    };
    for (i, a) in grid.iter().enumerate() {
        for b in &grid[i + 1..] {
            let (sa, sb) = (staircase_set(a).map_err(e2s)?, staircase_set(b).map_err(e2s)?);
            ensure(sb.diff(&sa).unwrap().measure() == ExtMeasure::Infinite, || format!("A_{b} - A_{a} finite"))?;
            ensure(sa.diff(&sb).unwrap().measure().is_zero(), || format!("A_{a} - A_{b} not null"))?;
            let (xa, ya) = placed(a);
            let (xb, yb) = placed(b);
            let ua = exchange_involution(&xa, &ya).map_err(e2s)?;
            let ub = exchange_involution(&xb, &yb).map_err(e2s)?;
            let prod = ua.inverse().unwrap().compose(&ub).unwrap();
            let supp = prod.support().unwrap();
            ensure(supp.translate(&two).eq_ae(&supp).unwrap(), || "support not 2-periodic".into())?;
            let per = supp.intersect(&iv(s("0"), two.clone())).unwrap().measure();
            let want = (b - a).times(2);
            ensure(per == ExtMeasure::Finite(want.clone()), || format!("s={a}, t={b}: support per period {per}, want {want}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs 0 <= s < t <= 1 on the 1/8 grid"))
}

fn criterion_12() -> Outcome {
    let u = staircase_involution();
    let mut last = None;
    for n in 1..=32i64 {
        let x = iv(Scalar::int(-n), Scalar::int(n));
        let v = truncate_support(&u, &x).map_err(e2s)?;
        let d = d_mu(&v, &u).map_err(e2s)?;
        let bound = &mu(&x.complement()).unwrap() + &mu(&u.image(&x).unwrap().complement()).unwrap();
        ensure(d <= bound, || format!("n={n}: {d} > {bound}"))?;
        if n % 2 == 0 {
            if let Some(prev) = &last {
                ensure(&d <= prev, || format!("n={n}: not decreasing"))?;
            }
            last = Some(d);
        }
    }
    let end = last.unwrap();
    ensure(end < q(1, 1 << 30), || format!("d_mu at n=32 is {end}"))?;
    Ok(format!("n = 1..32, d_mu at n=32 is {end}"))
}

const GOLDEN: &[(&str, &[&str])] = &[
    ("empty", &["validate"]),
    ("swap", &["metric", "d_mu", "T", "id"]),
    ("sets", &["op", "union", "B", "C"]),
    ("translation", &["analyze", "hopf", "T"]),
    ("cycle", &["analyze", "factor", "T", "D"]),
    ("golden", &["analyze", "induce", "T", "A"]),
    ("blockwise_golden", &["analyze", "skyscraper", "T", "3"]),
    ("conjugate", &["construct", "conjugate", "U", "V"]),
    ("exchange", &["construct", "exchange", "A", "B"]),
    ("sendwithin", &["construct", "sendwithin", "C", "A", "B"]),
    ("commutator", &["construct", "commutator", "T", "B"]),
    ("multk", &["construct", "multk", "T", "3"]),
    ("normalgen", &["construct", "normalgen", "U", "1"]),
    ("staircase_involution", &["analyze", "truncate", "U", "X"]),
    ("metrics", &["metric", "cm", "R", "id"]),
    ("mixed", &["report"]),
    ("quadratic_swap", &["construct", "threeinv", "T"]),
    ("translation_two", &["construct", "threeinv", "T"]),
    ("ops", &["op", "image", "T", "A"]),
    ("separator", &["construct", "separator", "T"]),
];

fn run_cli(file: &str, argv: &[&str]) -> Result<String, String> {
    let path = format!("{}/tests/workspaces/{file}.json", env!("CARGO_MANIFEST_DIR"));
    let out = Command::new(env!("CARGO_BIN_EXE_ergokit"))
        .arg(argv[0])
        .arg(&path)
        .args(&argv[1..])
        .env_remove("ERGOKIT_BUDGET")
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{file}: exit {:?}: {text}", out.status.code()))?;
    Ok(text.lines().filter(|l| !l.trim_start().starts_with("\"timing_us\"")).collect::<Vec<_>>().join("\n"))
}

fn criterion_13() -> Outcome {
    for (file, argv) in GOLDEN {
        let first = run_cli(file, argv)?;
        let second = run_cli(file, argv)?;
        ensure(first == second, || format!("{file}: reports differ between runs"))?;
        ensure(first.contains("\"verified\": true"), || format!("{file}: no passing verification block"))?;
    }
    Ok(format!("{} workspaces, two runs each, byte-identical and verified", GOLDEN.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 13] = [
        ("separator identity", criterion_1),
        ("exchanging involutions", criterion_2),
        ("factorization", criterion_3),
        ("Hopf pipeline", criterion_4),
        ("support multiplication laws", criterion_5),
        ("metric hierarchy", criterion_6),
        ("uniform refines weak", criterion_7),
        ("Kac oracle for induce", criterion_8),
        ("three involutions", criterion_9),
        ("normal generation", criterion_10),
        ("staircase family", criterion_11),
        ("truncation density", criterion_12),
        ("CLI determinism", criterion_13),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|sc| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                let f = *f;
                std::thread::Builder::new()
                    .stack_size(64 << 20)
                    .spawn_scoped(sc, move || {
                        let start = std::time::Instant::now();
                        let r = std::panic::catch_unwind(f).unwrap_or_else(|p| {
                            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
                            Err(format!("panicked: {}", msg.unwrap_or_default()))
                        });
                        (r, start.elapsed().as_secs_f64())
                    })
                    .unwrap()
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = Vec::new();
    for (i, ((name, _), (r, secs))) in criteria.iter().zip(&results).enumerate() {
        match r {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}; {secs:.1}s)", i + 1),
            Err(why) => {
                println!("criterion {:>2} {name}: FAIL ({why}; {secs:.1}s)", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
