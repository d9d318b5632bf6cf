//! JSON wire format.
//!
//! Parsing reports the JSON path of the first malformed value. Integers are
//! accepted as numbers or decimal strings and written as numbers while they
//! fit in 53 bits, as decimal strings otherwise. Object keys come out sorted.

use fliplab_core::cone::Cone;
use fliplab_core::fan::Fan;
use fliplab_core::flip::{is_flop, WallRelation};
use fliplab_core::lattice::{IntMat, IntVec};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::SCHEMA;

/// A payload that does not match the command's input schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError {
    pub message: String,
    pub location: String,
}

pub type Parsed<T> = Result<T, SchemaError>;

fn fail<T>(location: &str, message: impl Into<String>) -> Parsed<T> {
    Err(SchemaError {
        message: message.into(),
        location: location.to_string(),
    })
}

fn at(location: &str, key: &str) -> String {
    format!("{location}.{key}")
}

fn item(location: &str, i: usize) -> String {
    format!("{location}[{i}]")
}

/// An object whose keys all belong to `allowed`. Envelope keys are accepted
/// too, so result documents such as fixtures can be fed back in: `"schema"`
/// must name this format and `"command"` must be a string.
pub fn object<'a>(v: &'a Value, location: &str, allowed: &[&str]) -> Parsed<&'a Map<String, Value>> {
    let Some(obj) = v.as_object() else {
        return fail(location, "expected an object");
    };
    for (key, value) in obj {
        if key == "schema" {
            if value.as_str() != Some(SCHEMA) {
                return fail(&at(location, key), format!("expected \"{SCHEMA}\""));
            }
        } else if key == "command" {
            if !value.is_string() {
                return fail(&at(location, key), "expected a string");
            }
        } else if !allowed.contains(&key.as_str()) {
            return fail(&at(location, key), format!("unknown key; expected one of {}", allowed.join(", ")));
        }
    }
    Ok(obj)
}

pub fn field<'a>(obj: &'a Map<String, Value>, key: &str, location: &str) -> Parsed<&'a Value> {
    match obj.get(key) {
        Some(v) => Ok(v),
        None => fail(&at(location, key), "missing required key"),
    }
}

pub fn int(v: &Value, location: &str) -> Parsed<BigInt> {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_i64() {
                Ok(BigInt::from(x))
            } else if let Some(x) = n.as_u64() {
                Ok(BigInt::from(x))
            } else {
                fail(location, "expected an integer")
            }
        }
        Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .or_else(|_| fail(location, "expected a decimal integer string")),
        _ => fail(location, "expected an integer"),
    }
}

pub fn count(v: &Value, location: &str) -> Parsed<usize> {
    match v.as_u64().and_then(|x| usize::try_from(x).ok()) {
        Some(x) => Ok(x),
        None => fail(location, "expected a nonnegative integer"),
    }
}

fn array<'a>(v: &'a Value, location: &str) -> Parsed<&'a Vec<Value>> {
    v.as_array().map_or_else(|| fail(location, "expected an array"), Ok)
}

pub fn int_vec(v: &Value, location: &str, dim: Option<usize>) -> Parsed<IntVec> {
    let xs = array(v, location)?;
    if let Some(d) = dim {
        if xs.len() != d {
            return fail(location, format!("expected {d} entries, found {}", xs.len()));
        }
    }
    let entries = xs
        .iter()
        .enumerate()
        .map(|(i, x)| int(x, &item(location, i)))
        .collect::<Parsed<Vec<_>>>()?;
    Ok(IntVec::new(entries))
}

pub fn int_vecs(v: &Value, location: &str, dim: Option<usize>) -> Parsed<Vec<IntVec>> {
    let xs = array(v, location)?;
    let mut dim = dim;
    let mut out = Vec::with_capacity(xs.len());
    for (i, x) in xs.iter().enumerate() {
        let vec = int_vec(x, &item(location, i), dim)?;
        dim = Some(vec.dim());
        out.push(vec);
    }
    Ok(out)
}

pub fn int_list(v: &Value, location: &str) -> Parsed<Vec<BigInt>> {
    Ok(int_vec(v, location, None)?.into_entries())
}

fn index_lists(v: &Value, location: &str) -> Parsed<Vec<Vec<usize>>> {
    array(v, location)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let loc = item(location, i);
            array(x, &loc)?
                .iter()
                .enumerate()
                .map(|(k, y)| count(y, &item(&loc, k)))
                .collect()
        })
        .collect()
}

/// A matrix as a nonempty array of rows, or as
/// `{"rows": r, "cols": c, "entries": [row-major]}` for any shape.
pub fn matrix(v: &Value, location: &str) -> Parsed<IntMat> {
    if v.is_object() {
        let obj = object(v, location, &["rows", "cols", "entries"])?;
        let rows = count(field(obj, "rows", location)?, &at(location, "rows"))?;
        let cols = count(field(obj, "cols", location)?, &at(location, "cols"))?;
        let entries = int_list(field(obj, "entries", location)?, &at(location, "entries"))?;
        if entries.len() != rows * cols {
            return fail(&at(location, "entries"), format!("expected {} entries", rows * cols));
        }
        return Ok(IntMat::new(rows, cols, entries).expect("shape checked"));
    }
    let rows = int_vecs(v, location, None)?;
    let Some(first) = rows.first() else {
        return fail(location, "an empty row list has no column count; use the object form");
    };
    Ok(IntMat::from_rows(first.dim(), &rows).expect("row lengths checked"))
}

/// `{"rank": n, "rays": [[...]]}`.
pub fn cone_input(v: &Value, location: &str) -> Parsed<(usize, Vec<IntVec>)> {
    let obj = object(v, location, &["rank", "rays"])?;
    let rank = count(field(obj, "rank", location)?, &at(location, "rank"))?;
    let rays = int_vecs(field(obj, "rays", location)?, &at(location, "rays"), Some(rank))?;
    Ok((rank, rays))
}

/// `{"rank": n, "rays": [[...]], "cones": [[ray indices]]}`.
pub fn fan_input(v: &Value, location: &str) -> Parsed<(usize, Vec<IntVec>, Vec<Vec<usize>>)> {
    let obj = object(v, location, &["rank", "rays", "cones"])?;
    let rank = count(field(obj, "rank", location)?, &at(location, "rank"))?;
    let rays = int_vecs(field(obj, "rays", location)?, &at(location, "rays"), Some(rank))?;
    let cones = index_lists(field(obj, "cones", location)?, &at(location, "cones"))?;
    for (i, c) in cones.iter().enumerate() {
        for (k, &r) in c.iter().enumerate() {
            if r >= rays.len() {
                return fail(&item(&item(&at(location, "cones"), i), k), "ray index out of range");
            }
        }
    }
    Ok((rank, rays, cones))
}

/// How a wall relation was described in the payload.
pub enum WallInput {
    /// Two adjacent full-dimensional simplicial cones.
    Cones(usize, Vec<IntVec>, Vec<IntVec>),
    /// Rays with an optional explicit relation.
    Rays(Vec<IntVec>, Option<Vec<BigInt>>),
    /// Coefficients on the standard basis with the last ray derived.
    Coefficients(Vec<BigInt>),
}

pub fn wall_input(v: &Value, location: &str) -> Parsed<WallInput> {
    let obj = object(v, location, &["rank", "rays", "coefficients", "cones", "fixture"])?;
    if let Some(name) = obj.get("fixture") {
        if !name.is_string() {
            return fail(&at(location, "fixture"), "expected a string");
        }
    }
    let rank = obj.get("rank").map(|r| count(r, &at(location, "rank"))).transpose()?;
    let coefficients = obj
        .get("coefficients")
        .map(|c| int_list(c, &at(location, "coefficients")))
        .transpose()?;
    if let Some(cones) = obj.get("cones") {
        if obj.contains_key("rays") || coefficients.is_some() {
            return fail(location, "give either cones, or rays and coefficients");
        }
        let Some(rank) = rank else {
            return fail(&at(location, "rank"), "required together with cones");
        };
        let loc = at(location, "cones");
        let list = array(cones, &loc)?;
        if list.len() != 2 {
            return fail(&loc, "expected exactly two cones");
        }
        let a = int_vecs(&list[0], &item(&loc, 0), Some(rank))?;
        let b = int_vecs(&list[1], &item(&loc, 1), Some(rank))?;
        return Ok(WallInput::Cones(rank, a, b));
    }
    if let Some(rays) = obj.get("rays") {
        let rays = int_vecs(rays, &at(location, "rays"), rank)?;
        return Ok(WallInput::Rays(rays, coefficients));
    }
    match coefficients {
        Some(b) => Ok(WallInput::Coefficients(b)),
        None => fail(location, "expected cones, rays or coefficients"),
    }
}

pub fn int_json(x: &BigInt) -> Value {
    const SAFE: i64 = (1 << 53) - 1;
    match x.to_i64() {
        Some(v) if v.abs() <= SAFE => json!(v),
        _ => Value::String(x.to_string()),
    }
}

pub fn ints_json<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> Value {
    Value::Array(xs.into_iter().map(int_json).collect())
}

pub fn vec_json(v: &IntVec) -> Value {
    ints_json(v.entries())
}

pub fn vecs_json<'a>(vs: impl IntoIterator<Item = &'a IntVec>) -> Value {
    Value::Array(vs.into_iter().map(vec_json).collect())
}

/// Generators, facet inequalities and the equations cutting out the span.
pub fn cone_json(c: &Cone) -> Value {
    let dual = c.dual_description();
    json!({
        "rank": c.rank(),
        "rays": vecs_json(c.rays()),
        "inequalities": vecs_json(&dual.facets),
        "equations": vecs_json(&dual.lineality),
        "dim": c.dim(),
        "strongly_convex": c.is_strongly_convex(),
    })
}

pub fn fan_json(f: &Fan) -> Value {
    json!({
        "rank": f.rank(),
        "rays": vecs_json(f.rays()),
        "cones": f.max_cones(),
    })
}

/// One-based ray labels.
pub fn labels(indices: &[usize]) -> Value {
    json!(indices.iter().map(|i| i + 1).collect::<Vec<_>>())
}

pub fn wall_json(w: &WallRelation) -> Value {
    json!({
        "rank": w.n(),
        "rays": vecs_json(w.rays()),
        "coefficients": ints_json(w.coefficients()),
        "j_minus": labels(w.j_minus()),
        "j_zero": labels(w.j_zero()),
        "j_plus": labels(w.j_plus()),
        "exceptional_ray": vec_json(&w.exceptional_ray()),
        "is_flop": is_flop(w),
    })
}
