//! Workspace files: named scalars, sets, maps and partial maps over one field.

use std::collections::BTreeMap;

use ergokit::dynamics::Rotation;
use ergokit::map::{validate_filled, CorePiece, Family, Side};
use ergokit::{validate, Ept, Error, IntervalSet, PartialIso, RawEpt, Scalar, TailSpec};
use serde_json::{json, Map, Value};

use crate::CliError;

pub const DEFAULT_WEAK_TRUNCATION: u64 = 32;

#[derive(Clone, Debug)]
pub struct Workspace {
    pub d: u64,
    pub budget: Option<u64>,
    pub weak_truncation: u64,
    pub scalars: BTreeMap<String, Scalar>,
    pub sets: BTreeMap<String, IntervalSet>,
    pub maps: BTreeMap<String, Ept>,
    pub partials: BTreeMap<String, Partial>,
}

/// A partial map declared as a map restricted to a domain.
#[derive(Clone, Debug)]
pub struct Partial {
    pub map: Ept,
    pub dom: IntervalSet,
    pub iso: PartialIso,
}

/// Where in the document a value sits, for error messages.
#[derive(Clone)]
struct At(String);

impl At {
    fn key(&self, k: &str) -> At {
        At(format!("{}/{}", self.0, k))
    }

    fn idx(&self, i: usize) -> At {
        At(format!("{}/{}", self.0, i))
    }

    fn expected(&self, what: &str) -> CliError {
        CliError::Module(Error::Parse(format!("at {}: expected {what}", self.path())))
    }

    fn path(&self) -> &str {
        if self.0.is_empty() {
            "/"
        } else {
            &self.0
        }
    }
}

fn obj<'a>(v: &'a Value, at: &At) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| at.expected("an object"))
}

fn arr<'a>(v: &'a Value, at: &At) -> Result<&'a Vec<Value>, CliError> {
    v.as_array().ok_or_else(|| at.expected("an array"))
}

fn field<'a>(m: &'a Map<String, Value>, k: &str, at: &At) -> Result<&'a Value, CliError> {
    m.get(k).ok_or_else(|| at.expected(&format!("key {k:?}")))
}

fn uint(v: &Value, at: &At) -> Result<u64, CliError> {
    v.as_u64().ok_or_else(|| at.expected("a non-negative integer"))
}

fn known_keys(m: &Map<String, Value>, keys: &[&str], at: &At) -> Result<(), CliError> {
    match m.keys().find(|k| !keys.contains(&k.as_str())) {
        Some(k) => Err(at.expected(&format!("one of {keys:?}, found key {k:?}"))),
        None => Ok(()),
    }
}

pub fn scalar_in(d: u64, text: &str) -> Result<Scalar, CliError> {
    let x: Scalar = text.parse()?;
    if !x.is_rational() && x.field() != d {
        return Err(Error::FieldMismatch(x.field(), d).into());
    }
    Ok(x)
}

struct Reader<'a> {
    d: u64,
    scalars: &'a BTreeMap<String, Scalar>,
}

impl Reader<'_> {
    fn scalar(&self, v: &Value, at: &At) -> Result<Scalar, CliError> {
        let s = v.as_str().ok_or_else(|| at.expected("a scalar string"))?;
        if let Some(x) = self.scalars.get(s) {
            return Ok(x.clone());
        }
        scalar_in(self.d, s).map_err(|e| match e {
            CliError::Module(Error::Parse(m)) => CliError::Module(Error::Parse(format!("at {}: {m}", at.path()))),
            e => e,
        })
    }

    fn pair(&self, v: &Value, at: &At) -> Result<(Scalar, Scalar), CliError> {
        match arr(v, at)?.as_slice() {
            [a, b] => Ok((self.scalar(a, &at.idx(0))?, self.scalar(b, &at.idx(1))?)),
            _ => Err(at.expected("a pair [lo, hi]")),
        }
    }

    fn tail(&self, v: &Value, at: &At) -> Result<Option<TailSpec>, CliError> {
        if v.is_null() {
            return Ok(None);
        }
        let m = obj(v, at)?;
        known_keys(m, &["start", "period", "pattern"], at)?;
        let pattern = arr(field(m, "pattern", at)?, &at.key("pattern"))?
            .iter()
            .enumerate()
            .map(|(i, p)| self.pair(p, &at.key("pattern").idx(i)))
            .collect::<Result<_, _>>()?;
        Ok(Some(TailSpec {
            start: self.scalar(field(m, "start", at)?, &at.key("start"))?,
            period: self.scalar(field(m, "period", at)?, &at.key("period"))?,
            pattern,
        }))
    }

    fn set(&self, v: &Value, at: &At) -> Result<IntervalSet, CliError> {
        let m = obj(v, at)?;
        known_keys(m, &["core", "left_tail", "right_tail"], at)?;
        let core = match m.get("core") {
            Some(c) => arr(c, &at.key("core"))?
                .iter()
                .enumerate()
                .map(|(i, p)| self.pair(p, &at.key("core").idx(i)))
                .collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        let left = self.tail(m.get("left_tail").unwrap_or(&Value::Null), &at.key("left_tail"))?;
        let right = self.tail(m.get("right_tail").unwrap_or(&Value::Null), &at.key("right_tail"))?;
        Ok(IntervalSet::from_parts(&core, left.as_ref(), right.as_ref())?)
    }

    fn map(&self, v: &Value, at: &At) -> Result<Ept, CliError> {
        let m = obj(v, at)?;
        if let Some(c) = m.get("translation") {
            known_keys(m, &["translation"], at)?;
            return Ok(Ept::translation(self.scalar(c, &at.key("translation"))?));
        }
        if let Some(r) = m.get("rotation") {
            known_keys(m, &["rotation"], at)?;
            return Ok(self.rotation(r, &at.key("rotation"))?.as_ept()?);
        }
        known_keys(m, &["core_pieces", "tail_families", "elsewhere"], at)?;
        let fill = match m.get("elsewhere") {
            None => false,
            Some(Value::String(s)) if s == "identity" => true,
            Some(_) => return Err(at.key("elsewhere").expected("\"identity\"")),
        };
        let mut raw = RawEpt::default();
        if let Some(c) = m.get("core_pieces") {
            let at = at.key("core_pieces");
            for (i, p) in arr(c, &at)?.iter().enumerate() {
                let at = at.idx(i);
                let q = obj(p, &at)?;
                known_keys(q, &["lo", "hi", "shift"], &at)?;
                raw.core.push(CorePiece {
                    lo: self.scalar(field(q, "lo", &at)?, &at.key("lo"))?,
                    hi: self.scalar(field(q, "hi", &at)?, &at.key("hi"))?,
                    shift: self.scalar(field(q, "shift", &at)?, &at.key("shift"))?,
                });
            }
        }
        if let Some(fs) = m.get("tail_families") {
            let at = at.key("tail_families");
            for (i, f) in arr(fs, &at)?.iter().enumerate() {
                raw.families.push(self.family(f, &at.idx(i))?);
            }
        }
        let t = if fill { validate_filled(&raw) } else { validate(&raw) };
        t.map_err(|e| match e {
            Error::DomainGap(_) | Error::DomainOverlap(_) | Error::ImageGap(_) | Error::ImageOverlap(_) => CliError::Validation(at.path().to_string(), e),
            e => e.into(),
        })
    }

    fn family(&self, v: &Value, at: &At) -> Result<Family, CliError> {
        let q = obj(v, at)?;
        known_keys(q, &["side", "start", "period", "modulus", "residue", "pattern", "shift_const", "shift_slope"], at)?;
        let side = match field(q, "side", at)?.as_str() {
            Some("left") => Side::Left,
            Some("right") => Side::Right,
            _ => return Err(at.key("side").expected("\"left\" or \"right\"")),
        };
        let zero = Value::String("0".into());
        Ok(Family {
            side,
            start: self.scalar(field(q, "start", at)?, &at.key("start"))?,
            period: self.scalar(field(q, "period", at)?, &at.key("period"))?,
            modulus: q.get("modulus").map(|v| uint(v, &at.key("modulus"))).transpose()?.unwrap_or(1),
            residue: q.get("residue").map(|v| uint(v, &at.key("residue"))).transpose()?.unwrap_or(0),
            pattern: self.pair(field(q, "pattern", at)?, &at.key("pattern"))?,
            alpha: self.scalar(q.get("shift_const").unwrap_or(&zero), &at.key("shift_const"))?,
            beta: self.scalar(q.get("shift_slope").unwrap_or(&zero), &at.key("shift_slope"))?,
        })
    }

    fn rotation(&self, v: &Value, at: &At) -> Result<Rotation, CliError> {
        let m = obj(v, at)?;
        known_keys(m, &["lo", "hi", "angle", "repeat"], at)?;
        let repeat = match m.get("repeat") {
            None | Some(Value::Null) => None,
            Some(r) => {
                let at = at.key("repeat");
                let q = obj(r, &at)?;
                known_keys(q, &["side", "period"], &at)?;
                let side = match field(q, "side", &at)?.as_str() {
                    Some("left") => Side::Left,
                    Some("right") => Side::Right,
                    _ => return Err(at.key("side").expected("\"left\" or \"right\"")),
                };
                Some((side, self.scalar(field(q, "period", &at)?, &at.key("period"))?))
            }
        };
        Ok(Rotation {
            lo: self.scalar(field(m, "lo", at)?, &at.key("lo"))?,
            hi: self.scalar(field(m, "hi", at)?, &at.key("hi"))?,
            angle: self.scalar(field(m, "angle", at)?, &at.key("angle"))?,
            repeat,
        })
    }
}

fn check_name(name: &str, taken: &BTreeMap<String, &'static str>, kind: &'static str) -> Result<(), CliError> {
    if let Some(k) = taken.get(name) {
        return Err(CliError::Module(Error::Parse(format!("{kind} name {name:?} is already used by a {k}"))));
    }
    Ok(())
}

impl Workspace {
    pub fn parse(text: &str) -> Result<Workspace, CliError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| {
            CliError::Module(Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
        })?;
        let root = At(String::new());
        let top = obj(&doc, &root)?;
        known_keys(top, &["field", "options", "scalars", "sets", "maps", "partials"], &root)?;
        let f = obj(field(top, "field", &root)?, &root.key("field"))?;
        let d = uint(field(f, "d", &root.key("field"))?, &root.key("field").key("d"))?;
        ergokit::scalar::check_field(d)?;
        let mut ws = Workspace {
            d,
            budget: None,
            weak_truncation: DEFAULT_WEAK_TRUNCATION,
            scalars: BTreeMap::new(),
            sets: BTreeMap::new(),
            maps: BTreeMap::new(),
            partials: BTreeMap::new(),
        };
        if let Some(o) = top.get("options") {
            let at = root.key("options");
            let o = obj(o, &at)?;
            known_keys(o, &["budget", "weak_truncation"], &at)?;
            if let Some(b) = o.get("budget") {
                ws.budget = Some(uint(b, &at.key("budget"))?.max(1));
            }
            if let Some(t) = o.get("weak_truncation") {
                ws.weak_truncation = uint(t, &at.key("weak_truncation"))?.max(1);
            }
        }
        let mut taken: BTreeMap<String, &'static str> = BTreeMap::new();
        let empty = BTreeMap::new();
        if let Some(s) = top.get("scalars") {
            let at = root.key("scalars");
            let r = Reader { d, scalars: &empty };
            for (name, v) in obj(s, &at)? {
                check_name(name, &taken, "scalar")?;
                ws.scalars.insert(name.clone(), r.scalar(v, &at.key(name))?);
                taken.insert(name.clone(), "scalar");
            }
        }
        let r = Reader { d, scalars: &ws.scalars };
        let mut sets = BTreeMap::new();
        if let Some(s) = top.get("sets") {
            let at = root.key("sets");
            for (name, v) in obj(s, &at)? {
                check_name(name, &taken, "set")?;
                sets.insert(name.clone(), r.set(v, &at.key(name))?);
                taken.insert(name.clone(), "set");
            }
        }
        let mut maps = BTreeMap::new();
        if let Some(s) = top.get("maps") {
            let at = root.key("maps");
            for (name, v) in obj(s, &at)? {
                check_name(name, &taken, "map")?;
                maps.insert(name.clone(), r.map(v, &at.key(name))?);
                taken.insert(name.clone(), "map");
            }
        }
        let mut partials = BTreeMap::new();
        if let Some(s) = top.get("partials") {
            let at = root.key("partials");
            for (name, v) in obj(s, &at)? {
                check_name(name, &taken, "partial map")?;
                let at = at.key(name);
                let q = obj(v, &at)?;
                known_keys(q, &["map", "dom"], &at)?;
                let t = match field(q, "map", &at)? {
                    Value::String(n) if n == "id" && !maps.contains_key(n) => Ept::identity(),
                    Value::String(n) => maps.get(n).cloned().ok_or_else(|| CliError::UnknownName(n.clone()))?,
                    v => r.map(v, &at.key("map"))?,
                };
                let a = match field(q, "dom", &at)? {
                    Value::String(n) if n == "R" && !sets.contains_key(n) => IntervalSet::full(),
                    Value::String(n) => sets.get(n).cloned().ok_or_else(|| CliError::UnknownName(n.clone()))?,
                    v => r.set(v, &at.key("dom"))?,
                };
                let iso = t.restrict(&a)?;
                partials.insert(name.clone(), Partial { map: t, dom: a, iso });
                taken.insert(name.clone(), "partial map");
            }
        }
        ws.sets = sets;
        ws.maps = maps;
        ws.partials = partials;
        Ok(ws)
    }

    /// Canonical document; parsing it back gives the same document.
    pub fn emit(&self) -> Value {
        let mut top = Map::new();
        top.insert("field".into(), json!({ "d": self.d }));
        let mut opts = Map::new();
        if let Some(b) = self.budget {
            opts.insert("budget".into(), json!(b));
        }
        opts.insert("weak_truncation".into(), json!(self.weak_truncation));
        top.insert("options".into(), Value::Object(opts));
        top.insert(
            "scalars".into(),
            Value::Object(self.scalars.iter().map(|(k, v)| (k.clone(), json!(v.to_string()))).collect()),
        );
        top.insert("sets".into(), Value::Object(self.sets.iter().map(|(k, v)| (k.clone(), set_json(v))).collect()));
        top.insert("maps".into(), Value::Object(self.maps.iter().map(|(k, v)| (k.clone(), map_json(v))).collect()));
        top.insert(
            "partials".into(),
            Value::Object(
                self.partials
                    .iter()
                    .map(|(k, v)| (k.clone(), json!({ "map": map_json(&v.map), "dom": set_json(&v.dom) })))
                    .collect(),
            ),
        );
        Value::Object(top)
    }

    pub fn scalar(&self, s: &str) -> Result<Scalar, CliError> {
        match self.scalars.get(s) {
            Some(x) => Ok(x.clone()),
            None => scalar_in(self.d, s),
        }
    }

    /// A named set, or `R` for the whole line.
    pub fn set(&self, name: &str) -> Result<IntervalSet, CliError> {
        if name == "R" && !self.sets.contains_key("R") {
            return Ok(IntervalSet::full());
        }
        self.sets.get(name).cloned().ok_or_else(|| CliError::UnknownName(name.into()))
    }

    /// A named map, or `id`.
    pub fn map(&self, name: &str) -> Result<Ept, CliError> {
        if name == "id" && !self.maps.contains_key("id") {
            return Ok(Ept::identity());
        }
        self.maps.get(name).cloned().ok_or_else(|| CliError::UnknownName(name.into()))
    }

    pub fn partial(&self, name: &str) -> Result<PartialIso, CliError> {
        self.partials.get(name).map(|p| p.iso.clone()).ok_or_else(|| CliError::UnknownName(name.into()))
    }
}

fn pair_json(a: &Scalar, b: &Scalar) -> Value {
    json!([a.to_string(), b.to_string()])
}

fn tail_json(t: &Option<TailSpec>) -> Value {
    match t {
        None => Value::Null,
        Some(t) => json!({
            "start": t.start.to_string(),
            "period": t.period.to_string(),
            "pattern": t.pattern.iter().map(|(a, b)| pair_json(a, b)).collect::<Vec<_>>(),
        }),
    }
}

pub fn set_json(a: &IntervalSet) -> Value {
    let (core, left, right) = a.parts();
    json!({
        "core": core.iter().map(|(a, b)| pair_json(a, b)).collect::<Vec<_>>(),
        "right_tail": tail_json(&right),
        "left_tail": tail_json(&left),
    })
}

fn raw_json(raw: &RawEpt) -> Value {
    let core: Vec<Value> = raw
        .core
        .iter()
        .map(|p| json!({ "lo": p.lo.to_string(), "hi": p.hi.to_string(), "shift": p.shift.to_string() }))
        .collect();
    let families: Vec<Value> = raw
        .families
        .iter()
        .map(|f| {
            json!({
                "side": if f.side == Side::Left { "left" } else { "right" },
                "start": f.start.to_string(),
                "period": f.period.to_string(),
                "modulus": f.modulus,
                "residue": f.residue,
                "pattern": pair_json(&f.pattern.0, &f.pattern.1),
                "shift_const": f.alpha.to_string(),
                "shift_slope": f.beta.to_string(),
            })
        })
        .collect();
    json!({ "core_pieces": core, "tail_families": families })
}

pub fn map_json(t: &Ept) -> Value {
    raw_json(&t.to_raw())
}

/// Pieces, domain and range of a partial map.
pub fn partial_json(p: &PartialIso) -> Value {
    json!({
        "pieces": raw_json(&p.to_raw()),
        "dom": set_json(&p.dom()),
        "rng": p.rng().map(|r| set_json(&r)).unwrap_or(Value::Null),
    })
}
