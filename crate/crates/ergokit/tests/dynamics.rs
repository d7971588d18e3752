use ergokit::dynamics::{
    classify, factor_split, first_return, hopf, induce, rokhlin_marker, skyscraper_approx, truncate_support, Kind,
    Rotation, DEFAULT_BUDGET,
};
use ergokit::constructions::three_involutions;
use ergokit::map::Side;
use ergokit::metrics::{d_mu, mu};
use ergokit::{Ept, Error, ExtMeasure, IntervalSet, Layout, Piece, Scalar, Shift, Tail, TailSpec};

fn s(x: &str) -> Scalar {
    x.parse().unwrap()
}

fn iv(a: &str, b: &str) -> IntervalSet {
    IntervalSet::interval(s(a), s(b))
}

fn swap01() -> Ept {
    Ept::from_pieces(&[(s("0"), s("1"), s("1")), (s("1"), s("2"), s("-1"))]).unwrap()
}

fn cycle3() -> Ept {
    Ept::from_pieces(&[(s("0"), s("2"), s("1")), (s("2"), s("3"), s("-2"))]).unwrap()
}

fn golden() -> Scalar {
    s("-1/2+1/2*rt(5)")
}

fn golden_rotation() -> Ept {
    Rotation { lo: s("0"), hi: s("1"), angle: golden(), repeat: None }.as_ept().unwrap()
}

fn blockwise_golden() -> Ept {
    let right = Rotation { lo: s("0"), hi: s("1"), angle: golden(), repeat: Some((Side::Right, s("1"))) };
    let left = Rotation { lo: s("-1"), hi: s("0"), angle: golden(), repeat: Some((Side::Left, s("1"))) };
    right.as_ept().unwrap().compose(&left.as_ept().unwrap()).unwrap()
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

fn fin(x: &str) -> ExtMeasure {
    ExtMeasure::Finite(s(x))
}

#[test]
fn translation_is_dissipative() {
    let t = Ept::translation(s("1"));
    let c = classify(&t, DEFAULT_BUDGET).unwrap();
    c.verify(&t).unwrap();
    assert_eq!(c.components.len(), 1);
    assert!(c.components[0].set.is_full());
    match &c.components[0].kind {
        Kind::Dissipative { wandering, k, c } => {
            assert!(wandering.eq_ae(&iv("0", "1")).unwrap());
            assert_eq!(*k, 1);
            assert_eq!(*c, s("1"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn swap_is_periodic() {
    let t = swap01();
    let c = classify(&t, DEFAULT_BUDGET).unwrap();
    c.verify(&t).unwrap();
    assert_eq!(c.components.len(), 1);
    assert_eq!(c.components[0].kind, Kind::Periodic { period: 2 });
    assert!(c.components[0].set.eq_ae(&iv("0", "2")).unwrap());
}

#[test]
fn golden_rotation_is_aperiodic() {
    let t = golden_rotation();
    let c = classify(&t, DEFAULT_BUDGET).unwrap();
    c.verify(&t).unwrap();
    assert_eq!(c.components.len(), 1);
    assert!(matches!(c.components[0].kind, Kind::Aperiodic { .. }));
    assert!(c.components[0].set.eq_ae(&iv("0", "1")).unwrap());
}

#[test]
fn blockwise_golden_is_aperiodic_everywhere() {
    let t = blockwise_golden();
    let c = classify(&t, DEFAULT_BUDGET).unwrap();
    c.verify(&t).unwrap();
    assert!(c.aperiodic_part().unwrap().is_full());
}

#[test]
fn mixed_map_classifies_each_part() {
    // 3-cycle on [0,3), translation by 1 on [10, inf) fed from the left half-line
    let diss = Ept::from_layout(Layout {
        core: vec![Piece::new(s("3"), s("10"), Shift::zero())],
        left: Tail::uniform(s("-3"), Shift::zero()),
        right: Tail::uniform(s("10"), Shift::constant(s("1"))),
    });
    assert!(diss.is_err(), "a half-line translation is not onto");
    let t = cycle3().compose(&Ept::from_pieces(&[(s("5"), s("7"), s("2")), (s("7"), s("9"), s("-2"))]).unwrap()).unwrap();
    let c = classify(&t, DEFAULT_BUDGET).unwrap();
    c.verify(&t).unwrap();
    assert_eq!(c.components.len(), 2);
    assert_eq!(c.components[0].kind, Kind::Periodic { period: 2 });
    assert_eq!(c.components[1].kind, Kind::Periodic { period: 3 });
}

#[test]
fn hopf_examples() {
    let t = Ept::translation(s("1"));
    let (d, cf, ci) = hopf(&t, DEFAULT_BUDGET).unwrap();
    assert!(d.eq_ae(&t).unwrap() && cf.is_identity().unwrap() && ci.is_identity().unwrap());
    let t = swap01();
    let (d, cf, ci) = hopf(&t, DEFAULT_BUDGET).unwrap();
    assert!(d.is_identity().unwrap() && cf.eq_ae(&t).unwrap() && ci.is_identity().unwrap());
    let (d, cf, ci) = hopf(&Ept::identity(), DEFAULT_BUDGET).unwrap();
    assert!(d.is_identity().unwrap() && cf.is_identity().unwrap() && ci.is_identity().unwrap());
}

#[test]
fn hopf_factors_commute_and_rebuild() {
    let t = cycle3().compose(&golden_rotation().conjugate_by(&Ept::translation(s("10"))).unwrap()).unwrap();
    let (d, cf, ci) = hopf(&t, DEFAULT_BUDGET).unwrap();
    assert!(d.compose(&cf.compose(&ci).unwrap()).unwrap().eq_ae(&t).unwrap());
    for (a, b) in [(&d, &cf), (&d, &ci), (&cf, &ci)] {
        assert!(a.compose(b).unwrap().eq_ae(&b.compose(a).unwrap()).unwrap());
        assert!(a.support().unwrap().is_disjoint(&b.support().unwrap()).unwrap());
    }
    assert!(cf.support().unwrap().eq_ae(&iv("0", "3")).unwrap());
    assert!(ci.support().unwrap().eq_ae(&iv("10", "11")).unwrap());
}

#[test]
fn induce_on_three_cycle() {
    let t = cycle3();
    let a = iv("0", "1");
    let ind = induce(&t, &a, DEFAULT_BUDGET).unwrap();
    assert!(ind.map.is_identity().unwrap());
    assert_eq!(ind.returns.len(), 1);
    assert_eq!(ind.returns[0].0, 3);
    assert!(ind.returns[0].1.eq_ae(&a).unwrap());
}

#[test]
fn induce_on_whole_support_is_t() {
    let t = swap01();
    let ind = induce(&t, &iv("0", "2"), DEFAULT_BUDGET).unwrap();
    assert!(ind.map.eq_ae(&t).unwrap());
}

fn kac(t: &Ept, a: &IntervalSet) {
    let ind = induce(t, a, DEFAULT_BUDGET).unwrap();
    let mut total = Scalar::zero();
    let mut sat = IntervalSet::empty();
    let mut p = Ept::identity();
    let top = ind.returns.iter().map(|r| r.0).max().unwrap();
    for _ in 0..top {
        sat = sat.union(&p.image(a).unwrap()).unwrap();
        p = p.compose(t).unwrap();
    }
    for (n, an) in &ind.returns {
        total += &Scalar::int(*n as i64).checked_mul(an.measure().finite().unwrap()).unwrap();
    }
    assert_eq!(ExtMeasure::Finite(total), sat.measure());
}

#[test]
fn kac_formula() {
    kac(&cycle3(), &iv("0", "1"));
    kac(&cycle3(), &iv("1/2", "5/2"));
    kac(&swap01(), &iv("0", "1/2"));
    let r = Rotation { lo: s("0"), hi: s("1"), angle: s("2/5"), repeat: None }.as_ept().unwrap();
    kac(&r, &iv("0", "1/3"));
    kac(&golden_rotation(), &iv("0", "1/4"));
}

#[test]
fn golden_first_return_matches_simulation() {
    let t = golden_rotation();
    let a = IntervalSet::interval(s("0"), golden());
    let ind = induce(&t, &a, DEFAULT_BUDGET).unwrap();
    let times: Vec<u64> = ind.returns.iter().map(|r| r.0).collect();
    assert_eq!(times, vec![1, 2]);
    let moving = ind.map.layout().core.iter().filter(|p| !p.val.is_zero()).count();
    assert_eq!(moving, 2);
    for i in 0..100 {
        let x = &golden() * &Scalar::frac(i, 100);
        let (n, y) = first_return(&t, &a, &x, 10).unwrap();
        assert_eq!(ind.map.apply(&x), y);
        let cell = ind.returns.iter().find(|r| r.1.layout().value_at(&x)).unwrap();
        assert_eq!(cell.0, n);
    }
}

#[test]
fn induce_refuses_wandering_sets() {
    let t = Ept::translation(s("1"));
    assert!(matches!(induce(&t, &iv("0", "1"), DEFAULT_BUDGET), Err(Error::NotConservative(_))));
}

#[test]
fn rokhlin_examples() {
    let m = rokhlin_marker(&golden_rotation(), &s("1/2"), DEFAULT_BUDGET).unwrap();
    assert!(m.set.eq_ae(&iv("0", "1/4")).unwrap());
    assert_eq!(m.rotations.len(), 1);
    assert!(matches!(rokhlin_marker(&swap01(), &s("1/2"), DEFAULT_BUDGET), Err(Error::NotAperiodic)));
    assert!(matches!(rokhlin_marker(&blockwise_golden(), &s("1/2"), DEFAULT_BUDGET), Err(Error::OutOfClass(_))));
}

fn check_split(t: &Ept, d: &IntervalSet, eps: &str) -> ergokit::dynamics::Factorisation {
    let f = factor_split(t, d, &s(eps), DEFAULT_BUDGET).unwrap();
    assert!(f.t1.compose(&f.t2.compose(&f.teps).unwrap()).unwrap().eq_ae(t).unwrap());
    let (a, b) = (f.t1.support().unwrap(), f.t2.support().unwrap());
    assert!(a.is_disjoint(&b).unwrap());
    assert_eq!(a.measure(), b.measure());
    assert_eq!(a.intersect(d).unwrap().measure(), b.intersect(d).unwrap().measure());
    f
}

#[test]
fn factor_split_translation() {
    let f = check_split(&Ept::translation(s("1")), &iv("0", "1"), "1/10");
    let lower = IntervalSet::two_sided(&TailSpec { start: s("0"), period: s("1"), pattern: vec![(s("0"), s("1/2"))] }).unwrap();
    assert!(f.t1.support().unwrap().eq_ae(&lower).unwrap());
    assert!(f.t2.support().unwrap().eq_ae(&lower.complement()).unwrap());
    assert!(f.teps.is_identity().unwrap());
}

#[test]
fn factor_split_three_cycle() {
    let d = iv("0", "1");
    let f = check_split(&cycle3(), &d, "1/10");
    assert_eq!(f.t1.support().unwrap().measure(), fin("3/2"));
    assert_eq!(f.t1.support().unwrap().intersect(&d).unwrap().measure(), fin("1/2"));
    assert!(f.teps.is_identity().unwrap());
}

#[test]
fn factor_split_identity() {
    let f = check_split(&Ept::identity(), &iv("0", "1"), "1/10");
    assert!(f.t1.is_identity().unwrap() && f.t2.is_identity().unwrap() && f.teps.is_identity().unwrap());
}

#[test]
fn factor_split_quadratic_periodic() {
    // swap of two intervals of irrational length: off any rational lattice
    let r = s("0+1*rt(2)");
    let t = Ept::from_pieces(&[(s("0"), r.clone(), r.clone()), (r.clone(), &r + &r, -&r)]).unwrap();
    check_split(&t, &iv("0", "1"), "1/10");
}

#[test]
fn factor_split_aperiodic() {
    let t = golden_rotation().compose(&swap01().conjugate_by(&Ept::translation(s("5"))).unwrap()).unwrap();
    let f = check_split(&t, &iv("0", "1"), "1/8");
    let m = f.teps.support().unwrap().measure();
    assert!(m.finite().unwrap() < &s("1/8"));
    assert!(!f.teps.is_identity().unwrap());
}

#[test]
fn skyscraper_blockwise() {
    let t = blockwise_golden();
    let mut last = s("1");
    for k in 1..6u64 {
        let u = skyscraper_approx(&t, k, DEFAULT_BUDGET).unwrap();
        let kk = k as i64;
        let inside = IntervalSet::interval(Scalar::int(1 - kk), Scalar::int(kk));
        assert!(u.support().unwrap().eq_ae(&inside).unwrap());
        let d = d_mu(&u, &t).unwrap();
        assert_eq!(d, mu(&inside.complement()).unwrap());
        assert!(d <= last);
        last = d;
    }
    assert!(skyscraper_approx(&golden_rotation(), 1, DEFAULT_BUDGET).unwrap().eq_ae(&golden_rotation()).unwrap());
    assert!(matches!(skyscraper_approx(&Ept::translation(s("1")), 3, DEFAULT_BUDGET), Err(Error::NotAperiodic)));
}

#[test]
fn truncation_examples() {
    assert!(truncate_support(&swap01(), &iv("0", "2")).unwrap().eq_ae(&swap01()).unwrap());
    assert!(truncate_support(&swap01(), &iv("0", "1")).unwrap().is_identity().unwrap());
    assert!(matches!(truncate_support(&cycle3(), &iv("0", "3")), Err(Error::NotInvolution)));
    let u = staircase_involution();
    for n in 1..=8i64 {
        let x = IntervalSet::interval(Scalar::int(-n), Scalar::int(n));
        let v = truncate_support(&u, &x).unwrap();
        // pairs are [2m, 2m+2); for odd n the pair at -n is cut
        let m = n - n % 2;
        let kept = IntervalSet::interval(Scalar::int(-m), Scalar::int(m));
        assert!(v.support().unwrap().eq_ae(&kept).unwrap());
        let d = d_mu(&v, &u).unwrap();
        assert_eq!(d, mu(&kept.complement()).unwrap());
        assert!(d <= &mu(&x.complement()).unwrap() * &s("2"));
    }
}

fn check_three(t: &Ept) {
    let us = three_involutions(t, DEFAULT_BUDGET).unwrap();
    for u in &us {
        assert!(u.is_involution().unwrap());
        assert!(u.support().unwrap().is_subset(&t.support().unwrap()).unwrap());
    }
    assert!(us[0].compose(&us[1].compose(&us[2]).unwrap()).unwrap().eq_ae(t).unwrap());
}

#[test]
fn three_involutions_examples() {
    let t = Ept::translation(s("1"));
    check_three(&t);
    let [w, v, _] = three_involutions(&t, DEFAULT_BUDGET).unwrap();
    assert_eq!(v.apply(&s("7/2")), s("-5/2"));
    assert_eq!(w.apply(&s("7/2")), s("-3/2"));
    check_three(&cycle3());
    check_three(&swap01());
    let [a, b, c] = three_involutions(&swap01(), DEFAULT_BUDGET).unwrap();
    assert!(a.eq_ae(&swap01()).unwrap() && b.is_identity().unwrap() && c.is_identity().unwrap());
    assert!(matches!(three_involutions(&golden_rotation(), DEFAULT_BUDGET), Err(Error::UnsupportedAperiodic)));
}

#[test]
fn three_involutions_off_lattice() {
    let r = s("0+1*rt(2)");
    let t = Ept::from_pieces(&[(s("0"), &r + &r, r.clone()), (&r + &r, &r * &s("3"), &r * &s("-2"))]).unwrap();
    check_three(&t);
}

#[test]
fn three_involutions_translation_by_two() {
    check_three(&Ept::translation(s("2")));
    check_three(&Ept::translation(s("1/3")));
}
