use std::fs;
use std::path::Path;

use cocycle::json::{path_from_json, polynomial_from_json};
use cocycle::{Error, Kind, Polynomial, Result, SampledGroupPath};
use serde_json::Value;

/// Times and points from a `t,x1,…,xd` CSV file.
pub fn read_csv(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let where_ = path.display();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{where_}: {e}")))?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("{where_}: {e}")))?
        .clone();
    let d = headers.len().saturating_sub(1);
    let expected: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=d).map(|i| format!("x{i}")))
        .collect();
    if d == 0 || headers.iter().zip(&expected).any(|(h, e)| h != e) {
        return Err(Error::Parse(format!(
            "{where_}:1: header must be t,x1,...,xd, found {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut times = Vec::new();
    let mut points = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let line = r + 2;
        let rec = rec.map_err(|e| Error::Parse(format!("{where_}:{line}: {e}")))?;
        let vals = rec
            .iter()
            .enumerate()
            .map(|(c, f)| {
                f.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| {
                        Error::Parse(format!(
                            "{where_}:{line}: column {} is not a finite number: {f:?}",
                            c + 1
                        ))
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(&prev) = times.last() {
            if vals[0] <= prev {
                return Err(Error::Parse(format!(
                    "{where_}:{line}: times must increase strictly"
                )));
            }
        }
        times.push(vals[0]);
        points.push(vals[1..].to_vec());
    }
    if points.len() < 2 {
        return Err(Error::Parse(format!("{where_}: need at least two samples")));
    }
    Ok((times, points))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Parse(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// A group path: CSV data lifted at `depth`, or a path JSON file truncated to `depth`.
pub fn load_path(path: &Path, kind: Kind, depth: usize, tol: f64) -> Result<SampledGroupPath> {
    if is_json(path) {
        let g = path_from_json(&read_json(path)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if let Some(t) = g.values().iter().position(|v| !v.is_grouplike(tol)) {
            return Err(Error::Parse(format!(
                "{}: value {t} is not grouplike at tolerance {tol}",
                path.display()
            )));
        }
        if depth < g.level() {
            return g.truncate(depth);
        }
        Ok(g)
    } else {
        let (times, points) = read_csv(path)?;
        SampledGroupPath::piecewise_linear(kind, depth, times, &points)
    }
}

/// The level of a path JSON file, if `path` is one.
pub fn json_level(path: &Path) -> Result<Option<usize>> {
    if !is_json(path) {
        return Ok(None);
    }
    Ok(read_json(path)?
        .get("n")
        .and_then(Value::as_u64)
        .map(|n| n as usize))
}

pub fn load_polynomial(path: &Path, one_form: bool) -> Result<(Polynomial, usize)> {
    polynomial_from_json(&read_json(path)?, one_form).map_err(|e| match e {
        Error::Parse(m) | Error::Domain(m) | Error::Mismatch(m) => {
            Error::Parse(format!("{}: {m}", path.display()))
        }
        other => other,
    })
}
