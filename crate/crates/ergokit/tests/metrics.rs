use ergokit::metrics::{cm_metric, d_mu, d_uc, d_uf, mu, partial_metric, weak_metric, weak_term};
use ergokit::{staircase_set, Ept, Error, ExtMeasure, IntervalSet, PartialIso, Scalar};
use proptest::prelude::*;

fn s(x: &str) -> Scalar {
    x.parse().unwrap()
}

fn q(n: i64, d: i64) -> Scalar {
    Scalar::frac(n, d)
}

fn iv(a: Scalar, b: Scalar) -> IntervalSet {
    IntervalSet::interval(a, b)
}

fn swap01() -> Ept {
    Ept::from_pieces(&[(s("0"), s("1"), s("1")), (s("1"), s("2"), s("-1"))]).unwrap()
}

/// Rotation of `[a, a + w)` by `r`, with `0 < r < w`.
fn rot(a: Scalar, w: Scalar, r: Scalar) -> Ept {
    let b = &a + &w;
    let cut = &b - &r;
    Ept::from_pieces(&[(a.clone(), cut.clone(), r.clone()), (cut, b, &r - &w)]).unwrap()
}

#[test]
fn reference_measure() {
    assert_eq!(mu(&IntervalSet::full()).unwrap(), Scalar::one());
    assert_eq!(mu(&iv(s("0"), s("1"))).unwrap(), q(1, 3));
    assert_eq!(mu(&iv(s("-1"), s("0"))).unwrap(), q(1, 6));
    assert_eq!(mu(&IntervalSet::ray_right(s("0"))).unwrap(), q(2, 3));
    assert_eq!(mu(&IntervalSet::ray_left(s("0"))).unwrap(), q(1, 3));
    assert_eq!(mu(&staircase_set(&q(1, 2)).unwrap()).unwrap(), q(1, 2));
    assert_eq!(mu(&IntervalSet::ray_right(s("5/2"))).unwrap(), &q(1, 24) + &q(1, 12));
}

#[test]
fn uniform_metric_examples() {
    let id = Ept::identity();
    assert_eq!(d_mu(&id, &id).unwrap(), Scalar::zero());
    assert_eq!(d_mu(&swap01(), &id).unwrap(), q(1, 2));
    let t = Ept::translation(s("1"));
    assert_eq!(d_uf(&t, &id).unwrap(), ExtMeasure::Infinite);
    assert_eq!(d_mu(&t, &id).unwrap(), Scalar::one());
    assert_eq!(d_uc(&swap01(), &id, &iv(s("1/2"), s("5"))).unwrap(), q(3, 2));
    assert!(matches!(d_uc(&swap01(), &id, &IntervalSet::ray_right(s("0"))), Err(Error::CInfinite)));
}

#[test]
fn weak_metric_examples() {
    let id = Ept::identity();
    let w = weak_metric(&id, &id, 8).unwrap();
    assert_eq!(w.value, Scalar::zero());
    assert_eq!(w.error_text(), "1/2^8");
    let c = iv(s("0"), s("1"));
    assert_eq!(weak_term(&swap01(), &id, &c).unwrap(), Scalar::one());
    assert_eq!(weak_term(&rot(s("0"), s("1"), q(1, 4)), &id, &c).unwrap(), Scalar::zero());
    assert!(weak_metric(&swap01(), &id, 40).unwrap().value.is_positive());
    assert!(weak_metric(&id, &id, 0).is_err());
}

#[test]
fn cm_metric_examples() {
    let id = Ept::identity();
    assert_eq!(cm_metric(&id, &id).unwrap(), Scalar::zero());
    assert_eq!(cm_metric(&swap01(), &id).unwrap(), q(1, 2));
    assert_eq!(cm_metric(&rot(s("0"), s("1"), q(1, 4)), &id).unwrap(), q(1, 8));
    assert_eq!(cm_metric(&Ept::translation(q(1, 2)), &id).unwrap(), q(1, 2));
    assert_eq!(cm_metric(&Ept::translation(s("3")), &id).unwrap(), Scalar::one());
}

#[test]
fn partial_metric_examples() {
    let a = PartialIso::identity_on(&iv(s("0"), s("1")));
    let b = PartialIso::identity_on(&iv(s("0"), s("2")));
    assert_eq!(partial_metric(&a, &a).unwrap(), Scalar::zero());
    assert_eq!(partial_metric(&a, &b).unwrap(), q(1, 6));
    let p = Ept::translation(s("2")).restrict(&iv(s("0"), s("1"))).unwrap();
    let r = Ept::translation(s("3")).restrict(&iv(s("0"), s("1"))).unwrap();
    assert_eq!(partial_metric(&p, &r).unwrap(), q(1, 3));
}

#[test]
fn rotations_converge_in_measure_but_not_uniformly() {
    let id = Ept::identity();
    let c = iv(s("0"), s("1"));
    for n in 2..=64 {
        let t = rot(s("0"), s("1"), q(1, n));
        let want = &(&q(2, 3) * &q(1, n)) * &q(n - 1, n);
        assert_eq!(cm_metric(&t, &id).unwrap(), want, "n = {n}");
        assert_eq!(d_mu(&t, &id).unwrap(), q(1, 3), "n = {n}");
        assert_eq!(weak_term(&t, &id, &c).unwrap(), Scalar::zero());
        let half = iv(s("0"), q(1, 2));
        assert_eq!(weak_term(&t, &id, &half).unwrap(), q(2, 1).min(&q(2, 1) * &q(1, n)).min(Scalar::one()));
    }
}

fn arb_scalar() -> impl Strategy<Value = Scalar> {
    (-12i64..12, 1i64..4).prop_map(|(n, d)| Scalar::frac(n, d))
}

fn arb_ept() -> impl Strategy<Value = Ept> {
    prop::collection::vec((arb_scalar(), 1i64..8, 1i64..8, any::<bool>()), 0..3).prop_map(|gs| {
        let mut t = Ept::identity();
        for (a, w, r, tr) in gs {
            let g = if tr {
                Ept::translation(Scalar::frac(r - 4, 2))
            } else {
                let w = Scalar::frac(w + 1, 2);
                let r = &w * &Scalar::frac(r, 9);
                rot(a, w, r)
            };
            t = t.compose(&g).unwrap();
        }
        t
    })
}

fn arb_set() -> impl Strategy<Value = IntervalSet> {
    prop::collection::vec((arb_scalar(), 1i64..6), 1..3).prop_map(|v| {
        let iv: Vec<(Scalar, Scalar)> = v.into_iter().map(|(a, w)| (a.clone(), &a + &Scalar::frac(w, 2))).collect();
        IntervalSet::from_intervals(&iv)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_axioms(a in arb_ept(), b in arb_ept(), c in arb_ept()) {
        for f in [d_mu as fn(&Ept, &Ept) -> ergokit::Result<Scalar>, cm_metric] {
            let ab = f(&a, &b).unwrap();
            prop_assert_eq!(&ab, &f(&b, &a).unwrap());
            prop_assert!(ab <= &f(&a, &c).unwrap() + &f(&c, &b).unwrap());
            prop_assert_eq!(ab.is_zero(), a.eq_ae(&b).unwrap());
            prop_assert!(f(&a, &a).unwrap().is_zero());
        }
    }

    #[test]
    fn partial_metric_axioms(a in arb_ept(), b in arb_ept(), x in arb_set(), y in arb_set(), z in arb_set()) {
        let p = a.restrict(&x).unwrap();
        let r = b.restrict(&y).unwrap();
        let m = a.restrict(&z).unwrap();
        let pr = partial_metric(&p, &r).unwrap();
        prop_assert_eq!(&pr, &partial_metric(&r, &p).unwrap());
        prop_assert!(pr <= &partial_metric(&p, &m).unwrap() + &partial_metric(&m, &r).unwrap());
        prop_assert!(partial_metric(&p, &p).unwrap().is_zero());
    }

    #[test]
    fn uniform_refines_weak(a in arb_ept(), b in arb_ept(), c in arb_set()) {
        let moved = a.image(&c).unwrap().symdiff(&b.image(&c).unwrap()).unwrap().measure();
        let bound = &d_uc(&a, &b, &c).unwrap() * &Scalar::int(2);
        prop_assert!(moved <= ExtMeasure::Finite(bound));
    }

    #[test]
    fn left_invariance(r in arb_ept(), a in arb_ept(), b in arb_ept()) {
        let lhs = d_uf(&r.compose(&a).unwrap(), &r.compose(&b).unwrap()).unwrap();
        prop_assert_eq!(lhs, d_uf(&a, &b).unwrap());
    }
}
