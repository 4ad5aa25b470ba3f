//! Canonical JSON for tensors, paths and polynomial one-forms.
//!
//! Keys are sorted and every float is printed with 17 significant digits, so
//! equal values always serialize to identical bytes.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

use crate::algebra::{Forest, Kind, System, Tensor};
use crate::error::{Error, Result};
use crate::forms::{Polynomial, Smooth};
use crate::paths::SampledGroupPath;

struct Canonical;

impl Formatter for Canonical {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

/// Serialize with sorted keys and fixed float formatting. Non-finite numbers are refused.
pub fn to_canonical_string(v: &Value) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Canonical);
    v.serialize(&mut ser)
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("serializer emits utf-8"))
}

fn num(x: f64) -> Result<Value> {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| Error::Overflow(format!("non-finite value {x}")))
}

fn index_json(sys: &System, i: usize) -> Value {
    match sys.kind() {
        Kind::Nilpotent => Value::from(sys.word(i).iter().map(|l| l + 1).collect::<Vec<_>>()),
        Kind::Butcher => Value::from(sys.forest(i).to_string()),
    }
}

fn index_from_json(sys: &System, v: &Value) -> Result<usize> {
    match (sys.kind(), v) {
        (Kind::Nilpotent, Value::Array(ls)) => {
            let mut w = Vec::with_capacity(ls.len());
            for l in ls {
                let l = l
                    .as_u64()
                    .ok_or_else(|| Error::Parse(format!("letter {l} is not a positive integer")))?
                    as usize;
                if l == 0 || l > sys.d() {
                    return Err(Error::Parse(format!("letter {l} outside 1..={}", sys.d())));
                }
                w.push(l - 1);
            }
            if w.len() > sys.n() {
                return Err(Error::Parse(format!(
                    "word of length {} above level {}",
                    w.len(),
                    sys.n()
                )));
            }
            Ok(sys.word_index(&w))
        }
        (Kind::Butcher, Value::String(s)) => {
            let f = Forest::parse(s, sys.d())?;
            sys.forest_index(&f)
                .ok_or_else(|| Error::Parse(format!("forest {s:?} above level {}", sys.n())))
        }
        _ => Err(Error::Parse(format!("malformed index {v}"))),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("field {key:?} must be a non-negative integer")))
}

fn f64_of(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::Parse(format!("{what} must be a number")))
}

fn system_of(v: &Value) -> Result<std::sync::Arc<System>> {
    let kind = Kind::parse(
        field(v, "system")?
            .as_str()
            .ok_or_else(|| Error::Parse("system must be a string".into()))?,
    )?;
    System::get(kind, usize_field(v, "d")?, usize_field(v, "n")?)
}

fn header(sys: &System) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("system".into(), Value::from(sys.kind().name()));
    m.insert("d".into(), Value::from(sys.d()));
    m.insert("n".into(), Value::from(sys.n()));
    m
}

/// `{system, d, n, coeffs: [{index, value}]}` in index order.
pub fn tensor_to_json(t: &Tensor) -> Result<Value> {
    let sys = t.sys();
    let mut m = header(sys);
    let coeffs = t
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| Ok(json!({ "index": index_json(sys, i), "value": num(c)? })))
        .collect::<Result<Vec<_>>>()?;
    m.insert("coeffs".into(), Value::from(coeffs));
    Ok(Value::Object(m))
}

/// Missing coefficients are zero.
pub fn tensor_from_json(v: &Value) -> Result<Tensor> {
    let sys = system_of(v)?;
    let mut c = vec![0.0; sys.dim()];
    for e in field(v, "coeffs")?
        .as_array()
        .ok_or_else(|| Error::Parse("coeffs must be an array".into()))?
    {
        let i = index_from_json(&sys, field(e, "index")?)?;
        c[i] = f64_of(field(e, "value")?, "coefficient")?;
    }
    Tensor::from_coeffs(&sys, c)
}

/// `{system, d, n, times, indices, values}` with dense value rows.
pub fn path_to_json(g: &SampledGroupPath) -> Result<Value> {
    let sys = g.sys();
    let mut m = header(sys);
    m.insert(
        "times".into(),
        Value::from(
            g.times()
                .iter()
                .map(|&t| num(t))
                .collect::<Result<Vec<_>>>()?,
        ),
    );
    m.insert(
        "indices".into(),
        Value::from(
            (0..sys.dim())
                .map(|i| index_json(sys, i))
                .collect::<Vec<_>>(),
        ),
    );
    let rows = g
        .values()
        .iter()
        .map(|v| {
            Ok(Value::from(
                v.coeffs()
                    .iter()
                    .map(|&c| num(c))
                    .collect::<Result<Vec<_>>>()?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    m.insert("values".into(), Value::from(rows));
    Ok(Value::Object(m))
}

pub fn path_from_json(v: &Value) -> Result<SampledGroupPath> {
    let sys = system_of(v)?;
    let times = field(v, "times")?
        .as_array()
        .ok_or_else(|| Error::Parse("times must be an array".into()))?
        .iter()
        .map(|t| f64_of(t, "time"))
        .collect::<Result<Vec<_>>>()?;
    let order = match v.get("indices") {
        Some(Value::Array(ix)) => ix
            .iter()
            .map(|i| index_from_json(&sys, i))
            .collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(Error::Parse("indices must be an array".into())),
        None => (0..sys.dim()).collect(),
    };
    let rows = field(v, "values")?
        .as_array()
        .ok_or_else(|| Error::Parse("values must be an array".into()))?;
    let mut values = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse(format!("values[{r}] must be an array")))?;
        if row.len() != order.len() {
            return Err(Error::Parse(format!(
                "values[{r}] has {} entries, expected {}",
                row.len(),
                order.len()
            )));
        }
        let mut c = vec![0.0; sys.dim()];
        for (x, &i) in row.iter().zip(&order) {
            c[i] = f64_of(x, "coefficient")?;
        }
        values.push(Tensor::from_coeffs(&sys, c)?);
    }
    SampledGroupPath::new(times, values)
}

fn flatten(v: &Value, out: &mut Vec<f64>) -> Result<()> {
    match v {
        Value::Array(xs) => xs.iter().try_for_each(|x| flatten(x, out)),
        x => {
            out.push(f64_of(x, "derivative entry")?);
            Ok(())
        }
    }
}

/// A polynomial from `{d, target_dim, degree, derivatives}`, where entry `l` holds
/// `(D^l p)(0)` as a flat or nested array. With `one_form` the output is
/// `target_dim × d` (a one-form on `R^d`); otherwise it is `target_dim`.
/// Returns the polynomial and `target_dim`.
pub fn polynomial_from_json(v: &Value, one_form: bool) -> Result<(Polynomial, usize)> {
    let d = usize_field(v, "d")?;
    let e = usize_field(v, "target_dim")?;
    let degree = usize_field(v, "degree")?;
    let ds = field(v, "derivatives")?
        .as_array()
        .ok_or_else(|| Error::Parse("derivatives must be an array".into()))?;
    if ds.len() != degree + 1 {
        return Err(Error::Parse(format!(
            "degree {degree} needs {} derivative arrays, found {}",
            degree + 1,
            ds.len()
        )));
    }
    let out = if one_form { e * d } else { e };
    let mut derivs = Vec::with_capacity(ds.len());
    for (l, a) in ds.iter().enumerate() {
        let mut flat = Vec::new();
        flatten(a, &mut flat)?;
        let want = out * d.pow(l as u32);
        if flat.len() != want {
            return Err(Error::Parse(format!(
                "derivatives[{l}] has {} entries, expected {want}",
                flat.len()
            )));
        }
        derivs.push(flat);
    }
    Ok((Polynomial::new(d, out, derivs)?, e))
}

pub fn polynomial_to_json(p: &Polynomial, target_dim: usize) -> Result<Value> {
    let ds = p
        .derivatives()
        .iter()
        .map(|a| {
            Ok(Value::from(
                a.iter().map(|&x| num(x)).collect::<Result<Vec<_>>>()?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(
        json!({ "d": p.dim_in(), "target_dim": target_dim, "degree": p.degree(), "derivatives": ds }),
    )
}

/// A vector as a JSON array.
pub fn vector_json(v: &[f64]) -> Result<Value> {
    Ok(Value::from(
        v.iter().map(|&x| num(x)).collect::<Result<Vec<_>>>()?,
    ))
}

/// A float as JSON, refusing non-finite values.
pub fn number(x: f64) -> Result<Value> {
    num(x)
}
