use std::collections::BTreeMap;

use ergokit::constructions::{
    commutator_involution, conjugate_involutions, exchange_involution, multiply_support,
    normal_involution_with_measure, partial_iso_between, send_within, separator,
};
use ergokit::metrics::d_uf;
use ergokit::{Ept, Error, ExtMeasure, IntervalSet, Scalar, TailSpec};

fn s(x: &str) -> Scalar {
    x.parse().unwrap()
}

fn iv(a: &str, b: &str) -> IntervalSet {
    IntervalSet::interval(s(a), s(b))
}

fn swap(a: &str, b: &str, c: &str) -> Ept {
    // [a,b) <-> [b,c) with equal lengths
    let d = &s(b) - &s(a);
    Ept::from_pieces(&[(s(a), s(b), d.clone()), (s(b), s(c), -d)]).unwrap()
}

fn swap01() -> Ept {
    swap("0", "1", "2")
}

fn periodic(start: &str, period: &str, lo: &str, hi: &str) -> TailSpec {
    TailSpec { start: s(start), period: s(period), pattern: vec![(s(lo), s(hi))] }
}

#[test]
fn separator_examples() {
    let full = IntervalSet::full();
    assert!(separator(&Ept::identity(), &full).unwrap().is_empty());
    assert!(separator(&swap01(), &full).unwrap().eq_ae(&iv("0", "1")).unwrap());
    let a = separator(&Ept::translation(s("1")), &full).unwrap();
    let want = IntervalSet::two_sided(&periodic("0", "3", "0", "1")).unwrap();
    assert!(a.eq_ae(&want).unwrap(), "{:?}", a.parts());
}

#[test]
fn exchange_examples() {
    assert!(exchange_involution(&iv("0", "1"), &iv("0", "1")).unwrap().is_identity().unwrap());
    let u = exchange_involution(&iv("0", "1"), &iv("2", "3")).unwrap();
    let want = Ept::from_pieces(&[(s("0"), s("1"), s("2")), (s("2"), s("3"), s("-2"))]).unwrap();
    assert!(u.eq_ae(&want).unwrap());
    let evens = IntervalSet::right_periodic(&periodic("0", "2", "0", "1")).unwrap();
    let odds = IntervalSet::right_periodic(&periodic("1", "2", "0", "1")).unwrap();
    let u = exchange_involution(&evens, &odds).unwrap();
    assert_eq!(u.apply(&s("4")), s("5"));
    assert_eq!(u.apply(&s("7/2")), s("5/2"));
    assert_eq!(u.apply(&s("-1")), s("-1"));
}

#[test]
fn partial_iso_examples() {
    let phi = partial_iso_between(&iv("0", "2"), &IntervalSet::from_intervals(&[(s("5"), s("6")), (s("8"), s("9"))])).unwrap();
    assert_eq!(phi.apply(&s("1/2")), Some(s("11/2")));
    assert_eq!(phi.apply(&s("3/2")), Some(s("17/2")));
    let evens = IntervalSet::right_periodic(&periodic("0", "2", "0", "1")).unwrap();
    let phi = partial_iso_between(&IntervalSet::ray_right(s("0")), &evens).unwrap();
    for n in 0..20 {
        let x = &Scalar::int(n) + &s("1/3");
        assert_eq!(phi.apply(&x), Some(&Scalar::int(2 * n) + &s("1/3")));
    }
}

#[test]
fn send_within_examples() {
    let c = iv("0", "4");
    let t = send_within(&c, &iv("0", "1"), &iv("3", "4")).unwrap();
    assert_eq!(t.apply(&s("1/2")), s("7/2"));
    assert_eq!(t.apply(&s("2")), s("1"));
    let evens = IntervalSet::right_periodic(&periodic("0", "2", "0", "1")).unwrap();
    let a = IntervalSet::ray_right(s("0"));
    let t = send_within(&IntervalSet::full(), &a, &evens).unwrap();
    assert!(t.image(&a).unwrap().eq_ae(&evens).unwrap());
    assert!(exchange_involution(&a, &evens).is_err());
}

#[test]
fn commutator_examples() {
    let (u, _, _) = commutator_involution(&swap01(), &iv("0", "1/2")).unwrap();
    assert!(u.support().unwrap().eq_ae(&IntervalSet::from_intervals(&[(s("0"), s("1/2")), (s("1"), s("3/2"))])).unwrap());
    let (u, _, _) = commutator_involution(&Ept::translation(s("1")), &iv("0", "1")).unwrap();
    assert!(u.support().unwrap().eq_ae(&iv("0", "2")).unwrap());
    assert!(matches!(commutator_involution(&Ept::identity(), &iv("0", "1")), Err(Error::Overlap(_))));
}

#[test]
fn conjugate_examples() {
    let u = swap01();
    let v = swap("4", "5", "6");
    let t = conjugate_involutions(&u, &v, &IntervalSet::full()).unwrap();
    let want = Ept::from_pieces(&[(s("0"), s("2"), s("4")), (s("4"), s("6"), s("-4"))]).unwrap();
    assert!(t.eq_ae(&want).unwrap());
    assert!(conjugate_involutions(&u, &u, &IntervalSet::full()).unwrap().is_identity().unwrap());
    let w = swap("0", "3/2", "3");
    assert!(matches!(conjugate_involutions(&u, &w, &IntervalSet::full()), Err(Error::MeasureMismatch(_))));
}

#[test]
fn multiply_support_examples() {
    let t = swap01();
    assert!(multiply_support(&t, 1).unwrap().eq_ae(&t).unwrap());
    let p2 = multiply_support(&t, 2).unwrap();
    assert_eq!(p2.support().unwrap().measure(), ExtMeasure::Finite(s("4")));
    let id = Ept::identity();
    assert_eq!(d_uf(&p2, &id).unwrap(), ExtMeasure::Finite(s("4")));
    assert!(multiply_support(&t.compose(&t).unwrap(), 2).unwrap().is_identity().unwrap());
}

#[test]
fn normal_generation_examples() {
    let u = swap01();
    let mut gens = BTreeMap::new();
    gens.insert("U".to_string(), u.clone());
    for t in ["1/4", "1", "2", "4", "8"] {
        let (w, word) = normal_involution_with_measure(&u, &s(t)).unwrap();
        assert_eq!(w.support().unwrap().measure(), ExtMeasure::Finite(s(t)));
        assert!(word.eval(&gens).unwrap().eq_ae(&w).unwrap());
    }
    let (w, _) = normal_involution_with_measure(&u, &s("1")).unwrap();
    let want = IntervalSet::from_intervals(&[(s("0"), s("1/4")), (s("1"), s("5/4")), (s("2"), s("5/2"))]);
    assert!(w.support().unwrap().eq_ae(&want).unwrap());
    assert!(normal_involution_with_measure(&Ept::identity(), &s("1")).is_err());
}
