use std::path::Path;
use std::sync::Arc;

use cocycle::dominated::{
    compose as compose_map, enhance as enhance_path, iterated_integral, product,
};
use cocycle::extension::pvar_ratio;
use cocycle::forms::{
    integrable_condition_check, rough_one_form, slowly_varying, SlowVaryingReport,
};
use cocycle::json::{number, path_to_json, tensor_to_json, vector_json};
use cocycle::{
    extend_to_level, CellLift, CocyclicForm, Control, DominatedPath, Error, Kind, LengthControl,
    LinearForm, PvarControl, Result, SampledGroupPath, Schedule, SewingResult, Smooth,
};
use serde_json::{json, Value};

use crate::input::{json_level, load_path, load_polynomial};
use crate::{Common, Sewing};

/// Grids larger than this skip the cubic integrable-condition scan.
const INTEGRABLE_MAX_LEN: usize = 400;
/// Start times sampled for the multiplicativity check of an enhancement.
const ENHANCE_STARTS: usize = 8;

fn kind(common: &Common) -> Result<Kind> {
    Kind::parse(&common.system)
}

/// The base path at `--depth`, or at `default` for CSV input and at the file's own level for JSON.
fn base(common: &Common, default: usize) -> Result<SampledGroupPath> {
    let depth = match (common.depth, json_level(&common.input)?) {
        (Some(d), _) => d,
        (None, Some(n)) => n,
        (None, None) => default,
    };
    if depth == 0 {
        return Err(Error::Domain("depth must be positive".into()));
    }
    load_path(&common.input, kind(common)?, depth, common.tol)
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!(
            "p must be a finite number at least 1, got {p}"
        )));
    }
    Ok(())
}

fn rough_depth(p: f64) -> usize {
    (p.floor() as usize).max(1)
}

fn control(g: &SampledGroupPath, s: &Sewing) -> Result<Box<dyn Control>> {
    Ok(match s.control.as_str() {
        "pvar" => Box::new(PvarControl::new(g, s.p)?),
        _ => Box::new(LengthControl::new(g, s.p)?),
    })
}

fn theta(s: &Sewing, levels: usize) -> f64 {
    s.theta.unwrap_or((levels + 1) as f64 / s.p)
}

fn grid_pair(v: Option<(usize, usize)>) -> Value {
    v.map_or(Value::Null, |(a, b)| json!([a, b]))
}

fn sewing_json(r: &SewingResult) -> Result<Value> {
    Ok(json!({
        "schedule": r.schedule.name(),
        "theta": number(r.theta)?,
        "removals": r.removals.len(),
        "local_error": number(r.local_error)?,
        "constant": number(r.constant)?,
        "zeta_bound": number(r.zeta_bound)?,
        "merge_gap": number(r.merged.max_abs_diff(r.total()))?,
    }))
}

/// Refuses a certificate whose norm is not finite.
fn certificate_json(c: &SlowVaryingReport) -> Result<Value> {
    if !c.is_finite() {
        return Err(Error::Certificate(format!(
            "slowly-varying norm is not finite (theta = {}, p = {})",
            c.theta, c.p
        )));
    }
    let quotients = c
        .quotients
        .iter()
        .skip(1)
        .map(|&q| number(q))
        .collect::<Result<Vec<_>>>()?;
    let worst: Vec<Value> = c.worst.iter().skip(1).map(|&w| grid_pair(w)).collect();
    Ok(json!({
        "m": number(c.m)?,
        "theta": number(c.theta)?,
        "p": number(c.p)?,
        "quotients": quotients,
        "worst": worst,
        "norm": number(c.norm)?,
    }))
}

fn traces_json(d: &DominatedPath) -> Result<Value> {
    Ok(Value::from(
        d.traces()
            .iter()
            .map(|t| vector_json(t))
            .collect::<Result<Vec<_>>>()?,
    ))
}

/// Trace, final value, certificate and a sewing cross-check for a dominated path.
fn dominated_json(d: &DominatedPath, s: &Sewing, omega: &dyn Control) -> Result<Value> {
    let g = d.base();
    let th = theta(s, g.level());
    let cert = d.certificate(omega, th, s.p)?;
    let schedule = Schedule::parse(&s.schedule)?;
    let sewn = d.sewn(omega, th, schedule)?;
    let last = g.len() - 1;
    let end = d.trace(last);
    let gap = sewn
        .total()
        .level_one()
        .iter()
        .zip(d.increment(0, last))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(json!({
        "times": vector_json(g.times())?,
        "trace": traces_json(d)?,
        "value": vector_json(end)?,
        "certificate": certificate_json(&cert)?,
        "remainder_constant": number(d.remainder_constant(omega, th))?,
        "sewing": sewing_json(&sewn)?,
        "sewing_gap": number(gap)?,
    }))
}

/// A dominated path from a one-form file, or the level-one projection of the base.
fn dominated(g: &Arc<SampledGroupPath>, form: Option<&Path>, p: f64) -> Result<DominatedPath> {
    match form {
        Some(f) => {
            let (poly, _) = load_polynomial(f, true)?;
            if poly.dim_in() != g.sys().d() {
                return Err(Error::Parse(format!(
                    "{}: one-form on R^{} against a path in R^{}",
                    f.display(),
                    poly.dim_in(),
                    g.sys().d()
                )));
            }
            DominatedPath::from_form(rough_one_form(&poly, g.clone(), p)?)
        }
        None => DominatedPath::from_form(LinearForm::level_one(g.clone())?),
    }
}

pub fn signature(common: &Common) -> Result<Value> {
    let g = base(common, 2)?;
    let sig = g.increment(0, g.len() - 1);
    Ok(json!({ "path": path_to_json(&g)?, "signature": tensor_to_json(&sig)? }))
}

pub fn pvar(common: &Common, p: f64) -> Result<Value> {
    check_p(p)?;
    let g = base(common, rough_depth(p))?;
    let last = g.len() - 1;
    Ok(json!({
        "p": number(p)?,
        "level": g.level(),
        "p_variation": number(g.p_variation(p, 0, last)?)?,
        "pvar_sum": number(g.pvar_sum(p, 0, last)?)?,
    }))
}

pub fn extend(common: &Common, s: &Sewing, to_level: usize, cell: &str) -> Result<Value> {
    check_p(s.p)?;
    let g = base(common, rough_depth(s.p))?;
    let omega = control(&g, s)?;
    let lift = if cell == "pad" {
        CellLift::Pad
    } else {
        CellLift::Group
    };
    let ext = extend_to_level(
        &g,
        to_level,
        s.p,
        omega.as_ref(),
        Schedule::parse(&s.schedule)?,
        lift,
    )?;
    let h = &ext.path;
    let levels = ext
        .sewing
        .iter()
        .map(sewing_json)
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "path": path_to_json(h)?,
        "signature": tensor_to_json(&h.increment(0, h.len() - 1))?,
        "sewing": levels,
        "pvar_ratio": number(pvar_ratio(h, &g, s.p)?)?,
    }))
}

pub fn integrate(common: &Common, s: &Sewing, form: &Path) -> Result<Value> {
    check_p(s.p)?;
    let g = Arc::new(base(common, rough_depth(s.p))?);
    let omega = control(&g, s)?;
    let d = dominated(&g, Some(form), s.p)?;
    dominated_json(&d, s, omega.as_ref())
}

/// `iterate` and `product` over zero, one or two forms; a single form is paired with itself.
pub fn binary(
    common: &Common,
    s: &Sewing,
    forms: &[std::path::PathBuf],
    is_product: bool,
) -> Result<Value> {
    check_p(s.p)?;
    if forms.len() > 2 {
        return Err(Error::Parse(format!(
            "at most two --form files, got {}",
            forms.len()
        )));
    }
    let g = Arc::new(base(common, rough_depth(s.p).max(2))?);
    let omega = control(&g, s)?;
    let d1 = dominated(&g, forms.first().map(|p| p.as_path()), s.p)?;
    let d2 = match forms.get(1) {
        Some(f) => dominated(&g, Some(f), s.p)?,
        None => d1.clone(),
    };
    if !is_product {
        let r = iterated_integral(&d1, &d2)?;
        return dominated_json(&r, s, omega.as_ref());
    }
    let r = product(&d1, &d2)?;
    let residual = (0..g.len())
        .map(|t| {
            let want: Vec<f64> = d1
                .trace(t)
                .iter()
                .flat_map(|a| d2.trace(t).iter().map(move |b| a * b))
                .collect();
            r.trace(t)
                .iter()
                .zip(&want)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let mut out = dominated_json(&r, s, omega.as_ref())?;
    out["pointwise_residual"] = number(residual)?;
    Ok(out)
}

pub fn compose(common: &Common, s: &Sewing, form: Option<&Path>, map: &Path) -> Result<Value> {
    check_p(s.p)?;
    let g = Arc::new(base(common, rough_depth(s.p))?);
    let omega = control(&g, s)?;
    let d = dominated(&g, form, s.p)?;
    let (f, _) = load_polynomial(map, false)?;
    if f.dim_in() != d.dim() {
        return Err(Error::Parse(format!(
            "{}: map on R^{} applied to a path in R^{}",
            map.display(),
            f.dim_in(),
            d.dim()
        )));
    }
    let r = compose_map(&d, &f, s.p)?;
    let f0 = f.value(&vec![0.0; d.dim()]);
    let residual = (0..g.len())
        .map(|t| {
            let fx = f.value(d.trace(t));
            r.trace(t)
                .iter()
                .zip(fx.iter().zip(&f0))
                .map(|(x, (a, b))| (x - (a - b)).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let mut out = dominated_json(&r, s, omega.as_ref())?;
    out["pointwise_residual"] = number(residual)?;
    Ok(out)
}

pub fn enhance(
    common: &Common,
    s: &Sewing,
    form: Option<&Path>,
    levels: Option<usize>,
) -> Result<Value> {
    check_p(s.p)?;
    let g = Arc::new(base(common, rough_depth(s.p).max(2))?);
    let d = dominated(&g, form, s.p)?;
    let depth = levels.unwrap_or(rough_depth(s.p));
    let enh = enhance_path(&d, depth)?;
    let len = g.len();
    let step = (len / ENHANCE_STARTS).max(1);
    let starts: Vec<usize> = (0..len - 1).step_by(step).collect();
    Ok(json!({
        "depth": depth,
        "path": path_to_json(enh.path())?,
        "signature": tensor_to_json(&enh.path().increment(0, len - 1))?,
        "multiplicativity_starts": starts,
        "multiplicativity_residual": number(enh.multiplicativity_residual(&starts)?)?,
        "triangular_defect": number(enh.triangular_defect()?)?,
    }))
}

pub fn certify(common: &Common, s: &Sewing, form: &Path) -> Result<Value> {
    check_p(s.p)?;
    let g = Arc::new(base(common, rough_depth(s.p))?);
    let omega = control(&g, s)?;
    let (poly, _) = load_polynomial(form, true)?;
    if poly.dim_in() != g.sys().d() {
        return Err(Error::Parse(format!(
            "{}: one-form on R^{} against a path in R^{}",
            form.display(),
            poly.dim_in(),
            g.sys().d()
        )));
    }
    let beta = rough_one_form(&poly, g.clone(), s.p)?;
    let th = theta(s, g.level());
    let cert = slowly_varying(&beta, &g, omega.as_ref(), th, s.p)?;
    let integrable = if g.len() <= INTEGRABLE_MAX_LEN {
        let r = integrable_condition_check(&beta as &dyn CocyclicForm, &g, omega.as_ref(), th)?;
        if !r.max_quotient.is_finite() {
            return Err(Error::Certificate(format!(
                "integrable condition fails at theta = {th}"
            )));
        }
        json!({
            "m": number(r.m)?,
            "max_quotient": number(r.max_quotient)?,
            "worst": r.worst.map_or(Value::Null, |(a, b, c)| json!([a, b, c])),
        })
    } else {
        Value::Null
    };
    if th <= 1.0 {
        return Err(Error::Certificate(format!(
            "theta = {th} does not exceed 1"
        )));
    }
    Ok(json!({
        "gamma": number(poly.gamma()).unwrap_or(Value::Null),
        "slowly_varying": certificate_json(&cert)?,
        "integrable": integrable,
    }))
}
