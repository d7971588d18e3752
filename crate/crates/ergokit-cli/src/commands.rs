//! Subcommand dispatch. Every command returns a report whose identities were re-checked.

use std::collections::BTreeMap;

use ergokit::constructions::{
    commutator_involution, conjugate_involutions, exchange_involution, multiply_support, normal_involution_with_measure,
    send_within, separator, three_involutions, GroupWord,
};
use ergokit::dynamics::{
    classify, factor_split, hopf, induce, rokhlin_marker, skyscraper_approx, truncate_support, Classification, Kind,
    Rotation, DEFAULT_BUDGET,
};
use ergokit::map::Side;
use ergokit::metrics::{cm_metric, d_mu, d_uc, d_uf, mu, partial_metric, weak_metric};
use ergokit::{cut_and_paste, staircase_set, sup_increasing, Ept, ExtMeasure, IntervalSet, Scalar};
use serde_json::{json, Map, Value};

use crate::workspace::{map_json, partial_json, set_json, Workspace};
use crate::{CliError, Checks};

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub budget: Option<u64>,
    pub eps: Option<String>,
    pub trunc: Option<u64>,
    pub plot: bool,
    pub plot_range: Option<i64>,
}

/// The outcome of one command: a report, and plot rows when asked for.
pub struct Outcome {
    pub report: Value,
    pub plot: Option<String>,
}

struct Ctx<'a> {
    ws: &'a Workspace,
    args: &'a [String],
    budget: u64,
    opts: &'a Options,
}

impl Ctx<'_> {
    fn arg(&self, i: usize, what: &str) -> Result<&str, CliError> {
        self.args.get(i).map(String::as_str).ok_or_else(|| CliError::Usage(format!("missing argument {}: {what}", i + 1)))
    }

    fn map(&self, i: usize) -> Result<Ept, CliError> {
        self.ws.map(self.arg(i, "map name")?)
    }

    fn set(&self, i: usize) -> Result<IntervalSet, CliError> {
        self.ws.set(self.arg(i, "set name")?)
    }

    fn set_or_line(&self, i: usize) -> Result<IntervalSet, CliError> {
        match self.args.get(i) {
            Some(n) => self.ws.set(n),
            None => Ok(IntervalSet::full()),
        }
    }

    fn scalar(&self, i: usize) -> Result<Scalar, CliError> {
        self.ws.scalar(self.arg(i, "scalar")?)
    }

    fn count(&self, i: usize, what: &str) -> Result<u64, CliError> {
        let s = self.arg(i, what)?;
        s.parse().map_err(|_| CliError::Usage(format!("{what} must be a non-negative integer, found {s:?}")))
    }

    fn eps(&self) -> Result<Scalar, CliError> {
        self.ws.scalar(self.opts.eps.as_deref().unwrap_or("1/2"))
    }

    fn no_more(&self, n: usize) -> Result<(), CliError> {
        match self.args.get(n) {
            Some(a) => Err(CliError::Usage(format!("unexpected argument {a:?}"))),
            None => Ok(()),
        }
    }
}

fn budget(ws: &Workspace, opts: &Options) -> u64 {
    let env = std::env::var("ERGOKIT_BUDGET").ok().and_then(|v| v.parse().ok());
    opts.budget.or(env).or(ws.budget).unwrap_or(DEFAULT_BUDGET).max(1)
}

/// Run `command args` against a parsed workspace.
pub fn execute(ws: &Workspace, command: &str, args: &[String], opts: &Options) -> Result<Outcome, CliError> {
    let cx = Ctx { ws, args, budget: budget(ws, opts), opts };
    if opts.plot && !(command == "analyze" && matches!(args.first().map(String::as_str), Some("classify" | "hopf"))) {
        return Err(CliError::Usage("--plot applies to `analyze classify` and `analyze hopf`".into()));
    }
    let mut checks = Checks::default();
    let mut plot = None;
    let result = match command {
        "validate" => validate(&cx, &mut checks)?,
        "op" => op(&cx, &mut checks)?,
        "metric" => metric(&cx, &mut checks)?,
        "construct" => construct(&cx, &mut checks)?,
        "analyze" => analyze(&cx, &mut checks, &mut plot)?,
        "report" => report(&cx, &mut checks)?,
        other => return Err(CliError::Usage(format!("unknown subcommand {other:?}"))),
    };
    let verification = checks.finish()?;
    let mut echo = vec![json!(command)];
    echo.extend(args.iter().map(|a| json!(a)));
    let mut report = Map::new();
    report.insert("command".into(), Value::Array(echo));
    report.insert("result".into(), result);
    report.insert("verification".into(), verification);
    Ok(Outcome { report: Value::Object(report), plot })
}

fn measure_json(m: &ExtMeasure) -> Value {
    json!(m.to_string())
}

fn word_json(w: &GroupWord) -> Value {
    Value::Array(
        w.letters
            .iter()
            .map(|l| {
                json!({
                    "generator": l.generator,
                    "exponent": l.exponent,
                    "conjugator": l.conjugator.as_ref().map(map_json).unwrap_or(Value::Null),
                })
            })
            .collect(),
    )
}

fn validate(cx: &Ctx, checks: &mut Checks) -> Result<Value, CliError> {
    cx.no_more(0)?;
    let ws = cx.ws;
    let text = serde_json::to_string(&ws.emit()).map_err(|e| CliError::Usage(e.to_string()))?;
    let again = Workspace::parse(&text)?;
    let text2 = serde_json::to_string(&again.emit()).map_err(|e| CliError::Usage(e.to_string()))?;
    checks.check("re-emission is byte-stable", text == text2);
    for (name, t) in &ws.maps {
        checks.check(&format!("{name} o {name}^-1 = id"), t.compose(&t.inverse()?)?.is_identity()?);
    }
    for (name, p) in &ws.partials {
        checks.check(&format!("measure(dom {name}) = measure(rng {name})"), p.iso.dom().measure() == p.iso.rng()?.measure());
    }
    let mut sets = Map::new();
    for (name, a) in &ws.sets {
        sets.insert(name.clone(), json!({ "measure": measure_json(&a.measure()), "mu": mu(a)?.to_string() }));
    }
    let mut maps = Map::new();
    for (name, t) in &ws.maps {
        maps.insert(name.clone(), json!({ "support_measure": measure_json(&t.support()?.measure()), "valid": true }));
    }
    Ok(json!({ "workspace": ws.emit(), "sets": sets, "maps": maps }))
}

fn scalar_op(cx: &Ctx, name: &str, checks: &mut Checks) -> Result<Value, CliError> {
    let x = cx.scalar(1)?;
    if name == "neg" {
        cx.no_more(2)?;
        let r = -&x;
        checks.check("x + (-x) = 0", (&x + &r).is_zero());
        return Ok(json!({ "value": r.to_string() }));
    }
    let y = cx.scalar(2)?;
    cx.no_more(3)?;
    let r = match name {
        "add" => x.checked_add(&y)?,
        "sub" => x.checked_sub(&y)?,
        "mul" => x.checked_mul(&y)?,
        "div" => x.checked_div(&y)?,
        "cmp" => {
            let o = x.checked_cmp(&y)?;
            checks.check("cmp(y, x) is the reverse", y.checked_cmp(&x)? == o.reverse());
            let s = match o {
                std::cmp::Ordering::Less => "LT",
                std::cmp::Ordering::Equal => "EQ",
                std::cmp::Ordering::Greater => "GT",
            };
            return Ok(json!({ "value": s }));
        }
        _ => unreachable!(),
    };
    let back = match name {
        "add" => r.checked_sub(&y)?,
        "sub" => r.checked_add(&y)?,
        "mul" if y.is_zero() => x.clone(),
        "mul" => r.checked_div(&y)?,
        _ => r.checked_mul(&y)?,
    };
    checks.check("inverse operation recovers x", back == x);
    Ok(json!({ "value": r.to_string() }))
}

fn op(cx: &Ctx, checks: &mut Checks) -> Result<Value, CliError> {
    let name = cx.arg(0, "operation")?;
    Ok(match name {
        "add" | "sub" | "mul" | "div" | "neg" | "cmp" => scalar_op(cx, name, checks)?,
        "union" | "intersect" | "diff" | "symdiff" => {
            let (a, b) = (cx.set(1)?, cx.set(2)?);
            cx.no_more(3)?;
            let r = match name {
                "union" => a.union(&b)?,
                "intersect" => a.intersect(&b)?,
                "diff" => a.diff(&b)?,
                _ => a.symdiff(&b)?,
            };
            let ok = match name {
                "union" => a.is_subset(&r)? && b.is_subset(&r)? && r.diff(&a)?.is_subset(&b)?,
                "intersect" => r.is_subset(&a)? && r.is_subset(&b)? && a.diff(&r)?.is_disjoint(&b)?,
                "diff" => r.is_subset(&a)? && r.is_disjoint(&b)? && a.diff(&r)?.is_subset(&b)?,
                _ => r.eq_ae(&a.diff(&b)?.union(&b.diff(&a)?)?)?,
            };
            checks.check(&format!("{name} characterised by inclusions"), ok);
            json!({ "set": set_json(&r), "measure": measure_json(&r.measure()) })
        }
        "measure" => {
            let a = cx.set(1)?;
            cx.no_more(2)?;
            let m = a.measure();
            let pos = a.intersect(&IntervalSet::ray_right(Scalar::zero()))?.measure();
            let neg = a.intersect(&IntervalSet::ray_left(Scalar::zero()))?.measure();
            checks.check("measure is additive over the two half-lines", &pos + &neg == m);
            json!({ "measure": measure_json(&m), "mu": mu(&a)?.to_string() })
        }
        "staircase" => {
            let t = cx.scalar(1)?;
            cx.no_more(2)?;
            let a = staircase_set(&t)?;
            checks.check("A_t + 1 = A_t", a.translate(&Scalar::one()).eq_ae(&a)?);
            let unit = a.intersect(&IntervalSet::interval(Scalar::zero(), Scalar::one()))?.measure();
            checks.value("measure(A_t on [0,1)) = t", unit == ExtMeasure::Finite(t.clone()), &unit);
            json!({ "set": set_json(&a) })
        }
        "supinc" => {
            let family = (1..cx.args.len()).map(|i| cx.set(i)).collect::<Result<Vec<_>, _>>()?;
            let r = sup_increasing(&family)?;
            let mut ok = true;
            for a in &family {
                ok &= a.is_subset(&r)?;
            }
            checks.check("every member lies in the supremum", ok);
            json!({ "set": set_json(&r), "measure": measure_json(&r.measure()) })
        }
        "compose" => {
            let (s, t) = (cx.map(1)?, cx.map(2)?);
            cx.no_more(3)?;
            let r = s.compose(&t)?;
            checks.check("(S o T) o T^-1 = S", r.compose(&t.inverse()?)?.eq_ae(&s)?);
            json!({ "map": map_json(&r) })
        }
        "invert" => {
            let t = cx.map(1)?;
            cx.no_more(2)?;
            let r = t.inverse()?;
            checks.check("T^-1 o T = id", r.compose(&t)?.is_identity()?);
            json!({ "map": map_json(&r) })
        }
        "eq" => {
            let (s, t) = (cx.map(1)?, cx.map(2)?);
            cx.no_more(3)?;
            let r = s.eq_ae(&t)?;
            checks.check("eq_ae is symmetric", t.eq_ae(&s)? == r);
            checks.check("eq_ae iff null disagreement", r == s.disagreement(&t)?.measure().is_zero());
            json!({ "equal": r })
        }
        "support" => {
            let t = cx.map(1)?;
            cx.no_more(2)?;
            let r = t.support()?;
            checks.check("T(supp T) = supp T", t.image(&r)?.eq_ae(&r)?);
            checks.check("supp T^-1 = supp T", t.inverse()?.support()?.eq_ae(&r)?);
            json!({ "set": set_json(&r), "measure": measure_json(&r.measure()) })
        }
        "image" | "preimage" => {
            let (t, a) = (cx.map(1)?, cx.set(2)?);
            cx.no_more(3)?;
            let (r, back) = if name == "image" {
                let r = t.image(&a)?;
                let back = t.preimage(&r)?;
                (r, back)
            } else {
                let r = t.preimage(&a)?;
                let back = t.image(&r)?;
                (r, back)
            };
            checks.check("measure is preserved", r.measure() == a.measure());
            checks.check("transporting back recovers A", back.eq_ae(&a)?);
            json!({ "set": set_json(&r), "measure": measure_json(&r.measure()) })
        }
        "restrict" => {
            let (t, a) = (cx.map(1)?, cx.set(2)?);
            cx.no_more(3)?;
            let p = t.restrict(&a)?;
            checks.check("dom = A", p.dom().eq_ae(&a)?);
            checks.check("rng = T(A)", p.rng()?.eq_ae(&t.image(&a)?)?);
            json!({ "partial": partial_json(&p) })
        }
        "paste" => {
            if cx.args.len() < 3 || cx.args.len().is_multiple_of(2) {
                return Err(CliError::Usage("paste takes pairs: T1 A1 T2 A2 ...".into()));
            }
            let mut pairs = Vec::new();
            for i in (1..cx.args.len()).step_by(2) {
                pairs.push((cx.map(i)?, cx.set(i + 1)?));
            }
            let r = cut_and_paste(&pairs)?;
            let mut ok = true;
            for (t, a) in &pairs {
                ok &= r.disagreement(t)?.is_disjoint(a)?;
            }
            checks.check("result agrees with T_i on A_i", ok);
            json!({ "map": map_json(&r) })
        }
        other => return Err(CliError::Usage(format!("unknown op {other:?}"))),
    })
}

fn metric(cx: &Ctx, checks: &mut Checks) -> Result<Value, CliError> {
    let name = cx.arg(0, "metric")?;
    if name == "partial" {
        let (p, q) = (cx.ws.partial(cx.arg(1, "partial map")?)?, cx.ws.partial(cx.arg(2, "partial map")?)?);
        cx.no_more(3)?;
        let v = partial_metric(&p, &q)?;
        checks.check("symmetric", partial_metric(&q, &p)? == v);
        return Ok(json!({ "metric": name, "value": v.to_string(), "exact": true }));
    }
    let (s, t) = (cx.map(1)?, cx.map(2)?);
    let mut out = Map::new();
    out.insert("metric".into(), json!(name));
    let value = match name {
        "d_mu" => {
            cx.no_more(3)?;
            let v = d_mu(&s, &t)?;
            checks.check("symmetric", d_mu(&t, &s)? == v);
            checks.check("zero iff eq_ae", v.is_zero() == s.eq_ae(&t)?);
            v.to_string()
        }
        "d_uf" => {
            cx.no_more(3)?;
            let v = d_uf(&s, &t)?;
            checks.check("symmetric", d_uf(&t, &s)? == v);
            v.to_string()
        }
        "d_uc" => {
            let c = cx.set(3)?;
            cx.no_more(4)?;
            let v = d_uc(&s, &t, &c)?;
            checks.check("symmetric", d_uc(&t, &s, &c)? == v);
            let moved = s.image(&c)?.symdiff(&t.image(&c)?)?.measure();
            let bound = ExtMeasure::Finite(&v + &v);
            let ok = match (&moved, &bound) {
                (ExtMeasure::Finite(a), ExtMeasure::Finite(b)) => a <= b,
                _ => false,
            };
            checks.value("lambda(S(C) symdiff T(C)) <= 2 d_uC", ok, &moved);
            v.to_string()
        }
        "weak" => {
            let trunc = match cx.args.get(3) {
                Some(_) => cx.count(3, "truncation")?,
                None => cx.opts.trunc.unwrap_or(cx.ws.weak_truncation),
            };
            cx.no_more(4)?;
            let w = weak_metric(&s, &t, trunc)?;
            checks.check("symmetric", weak_metric(&t, &s, trunc)?.value == w.value);
            out.insert("truncation".into(), json!(trunc));
            out.insert("truncation_error".into(), json!(w.error_text()));
            w.value.to_string()
        }
        "cm" => {
            cx.no_more(3)?;
            let v = cm_metric(&s, &t)?;
            checks.check("symmetric", cm_metric(&t, &s)? == v);
            checks.check("cm <= d_mu", v <= d_mu(&s, &t)?);
            v.to_string()
        }
        other => return Err(CliError::Usage(format!("unknown metric {other:?}"))),
    };
    out.insert("value".into(), json!(value));
    out.insert("exact".into(), json!(true));
    Ok(Value::Object(out))
}

fn involution_checks(checks: &mut Checks, name: &str, u: &Ept) -> Result<(), CliError> {
    checks.check(&format!("{name}^2 = id"), u.is_involution()?);
    Ok(())
}

fn construct(cx: &Ctx, checks: &mut Checks) -> Result<Value, CliError> {
    let what = cx.arg(0, "construction")?;
    Ok(match what {
        "separator" => {
            let t = cx.map(1)?;
            let c = cx.set_or_line(2)?;
            cx.no_more(3)?;
            let a = separator(&t, &c)?;
            let s = t.support()?.intersect(&c)?;
            let (ta, pa) = (t.image(&a)?, t.preimage(&a)?.intersect(&s)?);
            checks.check("A, T(A), T^-1(A) pairwise disjoint on C", a.is_disjoint(&ta)? && a.is_disjoint(&pa)?);
            checks.check("A u T(A) u T^-1(A) = C n supp T", a.union(&ta.intersect(&s)?)?.union(&pa)?.eq_ae(&s)?);
            json!({ "set": set_json(&a), "measure": measure_json(&a.measure()) })
        }
        "exchange" => {
            let (a, b) = (cx.set(1)?, cx.set(2)?);
            cx.no_more(3)?;
            let u = exchange_involution(&a, &b)?;
            involution_checks(checks, "U", &u)?;
            checks.check("U(A) = B", u.image(&a)?.eq_ae(&b)?);
            checks.check("supp U in A symdiff B", u.support()?.is_subset(&a.symdiff(&b)?)?);
            json!({ "map": map_json(&u) })
        }
        "sendwithin" => {
            let (c, a, b) = (cx.set(1)?, cx.set(2)?, cx.set(3)?);
            cx.no_more(4)?;
            let t = send_within(&c, &a, &b)?;
            checks.check("supp T in C", t.support()?.is_subset(&c)?);
            checks.check("T(A) = B", t.image(&a)?.eq_ae(&b)?);
            checks.check("T(C - A) = C - B", t.image(&c.diff(&a)?)?.eq_ae(&c.diff(&b)?)?);
            json!({ "map": map_json(&t) })
        }
        "commutator" => {
            let (t, b) = (cx.map(1)?, cx.set(2)?);
            cx.no_more(3)?;
            let (u, word, v) = commutator_involution(&t, &b)?;
            let gens = BTreeMap::from([("T".to_string(), t.clone()), ("V".to_string(), v.clone())]);
            involution_checks(checks, "U", &u)?;
            checks.check("word evaluates to U", word.eval(&gens)?.eq_ae(&u)?);
            checks.check("supp U = B u T(B)", u.support()?.eq_ae(&b.union(&t.image(&b)?)?)?);
            json!({ "map": map_json(&u), "word": word_json(&word), "V": map_json(&v) })
        }
        "conjugate" => {
            let (u, v) = (cx.map(1)?, cx.map(2)?);
            let c = cx.set_or_line(3)?;
            cx.no_more(4)?;
            let t = conjugate_involutions(&u, &v, &c)?;
            checks.check("T U T^-1 = V", u.conjugate_by(&t)?.eq_ae(&v)?);
            checks.check("supp T in C", t.support()?.is_subset(&c)?);
            json!({ "map": map_json(&t) })
        }
        "threeinv" => {
            let t = cx.map(1)?;
            cx.no_more(2)?;
            let us = three_involutions(&t, cx.budget)?;
            let supp = t.support()?;
            for (i, u) in us.iter().enumerate() {
                involution_checks(checks, &format!("U{}", i + 1), u)?;
                checks.check(&format!("supp U{} in supp T", i + 1), u.support()?.is_subset(&supp)?);
            }
            checks.check("U1 o U2 o U3 = T", us[0].compose(&us[1].compose(&us[2])?)?.eq_ae(&t)?);
            json!({ "involutions": us.iter().map(map_json).collect::<Vec<_>>() })
        }
        "multk" => {
            let t = cx.map(1)?;
            let k = cx.count(2, "k")?;
            cx.no_more(3)?;
            let k32 = u32::try_from(k).ok().filter(|k| *k > 0).ok_or_else(|| CliError::Usage("k must be positive".into()))?;
            let r = multiply_support(&t, k32)?;
            let m = t.support()?.measure();
            let mk = r.support()?.measure();
            let scaled = m.finite().map(|x| x.times(k as i64));
            checks.value("measure(supp pi_k T) = k measure(supp T)", mk.finite() == scaled.as_ref(), &mk);
            let sq = multiply_support(&t.compose(&t)?, k32)?;
            checks.check("pi_k(T o T) = pi_k(T) o pi_k(T)", sq.eq_ae(&r.compose(&r)?)?);
            json!({ "map": map_json(&r) })
        }
        "normalgen" => {
            let (u, t) = (cx.map(1)?, cx.scalar(2)?);
            cx.no_more(3)?;
            let (w, word) = normal_involution_with_measure(&u, &t)?;
            let gens = BTreeMap::from([("U".to_string(), u.clone())]);
            involution_checks(checks, "W", &w)?;
            checks.check("word evaluates to W", word.eval(&gens)?.eq_ae(&w)?);
            let m = w.support()?.measure();
            checks.value("measure(supp W) = t", m == ExtMeasure::Finite(t.clone()), &m);
            json!({ "map": map_json(&w), "word": word_json(&word) })
        }
        other => return Err(CliError::Usage(format!("unknown construction {other:?}"))),
    })
}

fn rotation_json(r: &Rotation) -> Value {
    json!({
        "lo": r.lo.to_string(),
        "hi": r.hi.to_string(),
        "angle": r.angle.to_string(),
        "repeat": match &r.repeat {
            None => Value::Null,
            Some((side, p)) => json!({ "side": if *side == Side::Left { "left" } else { "right" }, "period": p.to_string() }),
        },
    })
}

fn certificate_json(k: &Kind) -> Value {
    match k {
        Kind::Periodic { period } => json!({ "period": period }),
        Kind::Dissipative { wandering, k, c } => json!({ "wandering": set_json(wandering), "k": k, "c": c.to_string() }),
        Kind::Aperiodic { rotation } => json!({ "rotation": rotation_json(rotation), "rotation_number": "irrational" }),
        Kind::Unknown { spent } => json!({ "budget_spent": spent }),
    }
}

fn classification_json(c: &Classification) -> Value {
    Value::Array(
        c.components
            .iter()
            .map(|comp| {
                json!({
                    "set": set_json(&comp.set),
                    "kind": comp.kind.name(),
                    "certificate": certificate_json(&comp.kind),
                })
            })
            .collect(),
    )
}

/// Re-check a classification identity by identity.
fn classification_checks(pre: &str, t: &Ept, c: &Classification, checks: &mut Checks) -> Result<(), CliError> {
    let mut all = IntervalSet::empty();
    let mut disjoint = true;
    for (i, comp) in c.components.iter().enumerate() {
        disjoint &= all.is_disjoint(&comp.set)?;
        all = all.union(&comp.set)?;
        checks.check(&format!("{pre}component {i}: T-invariant"), t.image(&comp.set)?.eq_ae(&comp.set)?);
        match &comp.kind {
            Kind::Periodic { period } => {
                let p = t.power(*period as i64)?;
                checks.check(&format!("{pre}component {i}: T^{period} = id"), p.support()?.is_disjoint(&comp.set)?);
            }
            Kind::Dissipative { wandering, k, c } => {
                let moved = t.power(*k as i64)?.image(wandering)?;
                checks.check(&format!("{pre}component {i}: T^{k}(W) = W + {c}"), moved.eq_ae(&wandering.translate(c))?);
                let m = wandering.measure();
                checks.check(&format!("{pre}component {i}: 0 < measure(W) < inf, W inside"), !m.is_zero() && m.is_finite() && wandering.is_subset(&comp.set)?);
            }
            Kind::Aperiodic { rotation } => {
                checks.check(&format!("{pre}component {i}: rotation number irrational"), rotation.number()?.is_none());
                let same = rotation.region()?.eq_ae(&comp.set)?
                    && t.restrict(&comp.set)?.extend_by_identity()?.eq_ae(&rotation.as_ept()?)?;
                checks.check(&format!("{pre}component {i}: T is the certified rotation"), same);
            }
            Kind::Unknown { .. } => {}
        }
    }
    checks.check(&format!("{pre}components pairwise disjoint"), disjoint);
    checks.check(&format!("{pre}components cover supp T"), all.eq_ae(&t.support()?)?);
    Ok(())
}

fn plot_rows(rows: &[(IntervalSet, &str)], range: i64) -> Result<String, CliError> {
    let (lo, hi) = (Scalar::int(-range), Scalar::int(range));
    let mut out = String::new();
    for (set, kind) in rows {
        for (a, b) in set.intervals_in(&lo, &hi)? {
            out.push_str(&format!("{:.9}\t{:.9}\t{kind}\n", a.to_f64(), b.to_f64()));
        }
    }
    Ok(out)
}

fn restricted(t: &Ept, a: &IntervalSet) -> Result<Ept, CliError> {
    Ok(t.restrict(a)?.extend_by_identity()?)
}

fn analyze(cx: &Ctx, checks: &mut Checks, plot: &mut Option<String>) -> Result<Value, CliError> {
    let what = cx.arg(0, "analysis")?;
    let t = cx.map(1)?;
    let range = cx.opts.plot_range.unwrap_or(16);
    Ok(match what {
        "classify" => {
            cx.no_more(2)?;
            let c = classify(&t, cx.budget)?;
            classification_checks("", &t, &c, checks)?;
            if cx.opts.plot {
                let rows: Vec<(IntervalSet, &str)> = c.components.iter().map(|x| (x.set.clone(), x.kind.name())).collect();
                *plot = Some(plot_rows(&rows, range)?);
            }
            json!({ "complete": c.is_complete(), "components": classification_json(&c) })
        }
        "hopf" => {
            cx.no_more(2)?;
            let (d, cf, ci) = hopf(&t, cx.budget)?;
            let c = classify(&t, cx.budget)?;
            classification_checks("", &t, &c, checks)?;
            checks.check("T_D o T_Cf o T_Cinf = T", d.compose(&cf.compose(&ci)?)?.eq_ae(&t)?);
            let fs = [&d, &cf, &ci];
            let mut commute = true;
            let mut disjoint = true;
            let mut all = IntervalSet::empty();
            for (i, a) in fs.iter().enumerate() {
                all = all.union(&a.support()?)?;
                for b in &fs[i + 1..] {
                    commute &= a.compose(b)?.eq_ae(&b.compose(a)?)?;
                    disjoint &= a.support()?.is_disjoint(&b.support()?)?;
                }
            }
            checks.check("factors commute pairwise", commute);
            checks.check("factor supports pairwise disjoint", disjoint);
            checks.check("factor supports cover supp T", all.eq_ae(&t.support()?)?);
            if cx.opts.plot {
                let rows = [(d.support()?, "DISSIPATIVE"), (cf.support()?, "PERIODIC"), (ci.support()?, "CONSERVATIVE_APERIODIC")];
                *plot = Some(plot_rows(&rows, range)?);
            }
            json!({
                "dissipative": map_json(&d),
                "periodic": map_json(&cf),
                "aperiodic": map_json(&ci),
                "components": classification_json(&c),
            })
        }
        "induce" => {
            let a = cx.set(2)?;
            cx.no_more(3)?;
            let ind = induce(&t, &a, cx.budget)?;
            checks.check("T_A(A) = A", ind.map.image(&a)?.eq_ae(&a)?);
            checks.check("supp T_A in A", ind.map.support()?.is_subset(&a)?);
            let mut cells = IntervalSet::empty();
            let mut kac = ExtMeasure::zero();
            let mut agree = true;
            for (n, an) in &ind.returns {
                cells = cells.union(an)?;
                let m = an.measure();
                kac = &kac + &match m.finite() {
                    Some(x) => ExtMeasure::Finite(x.times(*n as i64)),
                    None => ExtMeasure::Infinite,
                };
                agree &= t.power(*n as i64)?.disagreement(&ind.map)?.is_disjoint(an)?;
            }
            checks.check("return cells partition A", cells.eq_ae(&a)?);
            checks.check("T_A = T^n on A_n", agree);
            if a.measure().is_finite() {
                let top = ind.returns.iter().map(|r| r.0).max().unwrap_or(1);
                let mut sat = IntervalSet::empty();
                let mut p = Ept::identity();
                for _ in 0..top {
                    sat = sat.union(&p.image(&a)?)?;
                    p = p.compose(&t)?;
                }
                checks.value("sum n measure(A_n) = measure(saturation of A)", kac == sat.measure(), &kac);
            }
            let returns: Vec<Value> =
                ind.returns.iter().map(|(n, an)| json!({ "n": n, "set": set_json(an), "measure": measure_json(&an.measure()) })).collect();
            json!({ "map": map_json(&ind.map), "returns": returns })
        }
        "rokhlin" => {
            cx.no_more(2)?;
            let eps = cx.eps()?;
            let m = rokhlin_marker(&t, &eps, cx.budget)?;
            let size = m.set.measure();
            checks.value("0 < measure(C) < eps", size.finite().is_some_and(|x| x.is_positive() && x < &eps), &size);
            checks.check("C in supp T", m.set.is_subset(&t.support()?)?);
            let mut meets = true;
            for r in &m.rotations {
                meets &= r.number()?.is_none() && !m.set.intersect(&r.region()?)?.is_empty();
            }
            checks.check("C meets every minimal rotation", meets);
            json!({
                "set": set_json(&m.set),
                "measure": measure_json(&size),
                "certificate": { "minimal_rotations": m.rotations.iter().map(rotation_json).collect::<Vec<_>>() },
            })
        }
        "factor" => {
            let d = cx.set(2)?;
            cx.no_more(3)?;
            let eps = cx.eps()?;
            let f = factor_split(&t, &d, &eps, cx.budget)?;
            checks.check("T1 o T2 o Teps = T", f.t1.compose(&f.t2.compose(&f.teps)?)?.eq_ae(&t)?);
            let (s1, s2) = (f.t1.support()?, f.t2.support()?);
            checks.check("supp T1 n supp T2 null", s1.is_disjoint(&s2)?);
            checks.value("measure(supp T1) = measure(supp T2)", s1.measure() == s2.measure(), s1.measure());
            let (d1, d2) = (s1.intersect(&d)?.measure(), s2.intersect(&d)?.measure());
            checks.value("measure(supp T1 n D) = measure(supp T2 n D)", d1 == d2, &d1);
            let se = f.teps.support()?.measure();
            checks.value("measure(supp Teps) < eps", se.finite().is_some_and(|x| x < &eps), &se);
            let ce = classify(&f.teps, cx.budget)?;
            let aperiodic = ce.components.iter().all(|c| matches!(c.kind, Kind::Aperiodic { .. }));
            checks.check("Teps aperiodic on its support", aperiodic);
            for (name, x) in [("T1", &f.t1), ("T2", &f.t2), ("Teps", &f.teps)] {
                checks.check(&format!("{name} agrees with T on its support"), x.disagreement(&t)?.is_disjoint(&x.support()?)?);
            }
            json!({ "t1": map_json(&f.t1), "t2": map_json(&f.t2), "teps": map_json(&f.teps) })
        }
        "skyscraper" => {
            let levels = cx.count(2, "levels")?;
            cx.no_more(3)?;
            let u = skyscraper_approx(&t, levels, cx.budget)?;
            let supp = u.support()?;
            checks.check("finite support", supp.measure().is_finite());
            checks.check("U = T on supp U", u.eq_ae(&restricted(&t, &supp)?)?);
            let cu = classify(&u, cx.budget)?;
            checks.check("U aperiodic on its support", cu.components.iter().all(|c| matches!(c.kind, Kind::Aperiodic { .. })));
            let d = d_mu(&u, &t)?;
            if levels > 1 {
                let prev = d_mu(&skyscraper_approx(&t, levels - 1, cx.budget)?, &t)?;
                checks.value("d_mu non-increasing in levels", d <= prev, &d);
            } else {
                checks.value("d_mu(U, T) <= 1", d <= Scalar::one(), &d);
            }
            json!({ "map": map_json(&u), "d_mu": d.to_string() })
        }
        "truncate" => {
            let x = cx.set(2)?;
            cx.no_more(3)?;
            let u = truncate_support(&t, &x)?;
            involution_checks(checks, "U_n", &u)?;
            let d = d_mu(&u, &t)?;
            let bound = &mu(&x.complement())? + &mu(&t.image(&x)?.complement())?;
            checks.value("d_mu(U_n, U) <= mu(R - X) + mu(R - U(X))", d <= bound, &d);
            json!({ "map": map_json(&u), "d_mu": d.to_string(), "bound": bound.to_string() })
        }
        other => return Err(CliError::Usage(format!("unknown analysis {other:?}"))),
    })
}

fn report(cx: &Ctx, checks: &mut Checks) -> Result<Value, CliError> {
    cx.no_more(0)?;
    let ws = cx.ws;
    let mut sets = Map::new();
    for (name, a) in &ws.sets {
        sets.insert(name.clone(), json!({ "set": set_json(a), "measure": measure_json(&a.measure()), "mu": mu(a)?.to_string() }));
    }
    let mut maps = Map::new();
    for (name, t) in &ws.maps {
        let supp = t.support()?;
        let c = classify(t, cx.budget)?;
        classification_checks(&format!("{name}: "), t, &c, checks)?;
        maps.insert(
            name.clone(),
            json!({
                "map": map_json(t),
                "support": set_json(&supp),
                "support_measure": measure_json(&supp.measure()),
                "involution": t.is_involution()?,
                "d_mu_to_id": d_mu(t, &Ept::identity())?.to_string(),
                "classification": classification_json(&c),
            }),
        );
    }
    if ws.maps.is_empty() {
        checks.check("workspace loaded", true);
    }
    Ok(json!({ "field": { "d": ws.d }, "sets": sets, "maps": maps }))
}
