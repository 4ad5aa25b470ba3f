//! The integral as the ordered product of one-step approximations over the grid.
//!
//! The value is always the left fold of the finest cells. A removal schedule
//! coarsens the partition one point at a time, as in the existence proof, and
//! each removal records the defect `‖β(prev,j)·β(j,next) − β(prev,next)‖`,
//! which is what the error bookkeeping sums.

use std::sync::Arc;

use crate::algebra::{System, Tensor};
use crate::error::{Error, Result};
use crate::forms::CocyclicForm;
use crate::paths::{Control, SampledGroupPath};

/// One-step approximations on grid pairs.
pub trait Integrand: Sync {
    fn target(&self) -> &Arc<System>;
    /// Number of grid points.
    fn len(&self) -> usize;
    /// `β_{t_i}(g_{t_i}, g_{t_i,t_j})`.
    fn step(&self, i: usize, j: usize) -> Result<Tensor>;
    /// The factor used for the finest cell `[t_j, t_{j+1}]`.
    fn cell(&self, j: usize) -> Result<Tensor> {
        self.step(j, j + 1)
    }
}

/// A cocyclic form evaluated along a path.
pub struct FormIntegrand<'a> {
    pub form: &'a dyn CocyclicForm,
    pub path: &'a SampledGroupPath,
}

impl<'a> FormIntegrand<'a> {
    pub fn new(form: &'a dyn CocyclicForm, path: &'a SampledGroupPath) -> Result<Self> {
        if **form.domain() != **path.sys() {
            return Err(Error::Mismatch(format!(
                "form on {:?} against a path in {:?}",
                form.domain(),
                path.sys()
            )));
        }
        Ok(FormIntegrand { form, path })
    }
}

impl Integrand for FormIntegrand<'_> {
    fn target(&self) -> &Arc<System> {
        self.form.target()
    }

    fn len(&self) -> usize {
        self.path.len()
    }

    fn step(&self, i: usize, j: usize) -> Result<Tensor> {
        self.form
            .apply(i, self.path.value(i), &self.path.increment(i, j))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Remove a point whose neighbours are close in `ω`, as in the existence proof.
    Omega,
    /// Remove every other point, repeatedly.
    Dyadic,
    /// Remove interior points from the left.
    LeftToRight,
}

impl Schedule {
    pub fn parse(s: &str) -> Result<Schedule> {
        match s {
            "omega" => Ok(Schedule::Omega),
            "dyadic" => Ok(Schedule::Dyadic),
            "ltr" => Ok(Schedule::LeftToRight),
            other => Err(Error::Parse(format!("unknown schedule {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Schedule::Omega => "omega",
            Schedule::Dyadic => "dyadic",
            Schedule::LeftToRight => "ltr",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Removal {
    pub point: usize,
    pub prev: usize,
    pub next: usize,
    pub defect: f64,
}

#[derive(Clone, Debug)]
pub struct SewingResult {
    /// Grid indices sewn over.
    pub grid: Vec<usize>,
    /// `values[k]` is the integral over `[t_{grid[0]}, t_{grid[k]}]`.
    pub values: Vec<Tensor>,
    pub schedule: Schedule,
    pub removals: Vec<Removal>,
    pub theta: f64,
    /// Sum of removal defects.
    pub local_error: f64,
    /// Largest `defect / ω(prev,next)^θ`.
    pub constant: f64,
    /// The total assembled by merging neighbouring pieces in removal order.
    /// Equal to the left fold up to roundoff; the gap is a uniqueness witness.
    pub merged: Tensor,
    /// `2^θ ζ(θ) C ω(s,t)^θ`.
    pub zeta_bound: f64,
}

impl SewingResult {
    pub fn total(&self) -> &Tensor {
        self.values.last().unwrap()
    }

    /// The integral between grid positions `a ≤ b` of this result.
    pub fn between(&self, a: usize, b: usize) -> Result<Tensor> {
        self.values[a].inverse()?.mul(&self.values[b])
    }
}

pub fn riemann_zeta(s: f64) -> f64 {
    // Euler–Maclaurin tail after K terms
    const K: usize = 64;
    let head: f64 = (1..K).map(|k| (k as f64).powf(-s)).sum();
    let k = K as f64;
    head + k.powf(1.0 - s) / (s - 1.0) + 0.5 * k.powf(-s) + s * k.powf(-s - 1.0) / 12.0
}

/// Sew over the whole grid.
pub fn sew(
    f: &dyn Integrand,
    omega: &dyn Control,
    theta: f64,
    schedule: Schedule,
) -> Result<SewingResult> {
    let grid: Vec<usize> = (0..f.len()).collect();
    sew_on(f, &grid, omega, theta, schedule)
}

fn piece(f: &dyn Integrand, i: usize, j: usize) -> Result<Tensor> {
    if j == i + 1 {
        f.cell(i)
    } else {
        f.step(i, j)
    }
}

/// Left fold of the pieces of a sub-grid.
pub fn ordered_product(f: &dyn Integrand, grid: &[usize]) -> Result<Vec<Tensor>> {
    let mut values = vec![Tensor::unit(f.target())];
    for w in grid.windows(2) {
        let next = values.last().unwrap().mul(&piece(f, w[0], w[1])?)?;
        values.push(next);
    }
    Ok(values)
}

/// Sew over an increasing list of grid indices.
pub fn sew_on(
    f: &dyn Integrand,
    grid: &[usize],
    omega: &dyn Control,
    theta: f64,
    schedule: Schedule,
) -> Result<SewingResult> {
    if !(theta > 1.0) {
        return Err(Error::Certificate(format!(
            "sewing needs theta > 1, got {theta}"
        )));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || *grid.last().unwrap() >= f.len()
    {
        return Err(Error::Domain(
            "sewing grid must be increasing and inside the sample grid".into(),
        ));
    }
    let values = ordered_product(f, grid)?;
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!(
            "integral is not finite at grid position {bad}"
        )));
    }
    let order = removal_order(grid, omega, schedule);
    let removals = order
        .iter()
        .map(|&(point, prev, next)| -> Result<Removal> {
            let joined = f.step(prev, point)?.mul(&f.step(point, next)?)?;
            let defect = joined.sub(&f.step(prev, next)?)?.norm_max();
            Ok(Removal {
                point,
                prev,
                next,
                defect,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let merged = merge_in_order(f, grid, &order)?;
    let local_error = removals.iter().map(|r| r.defect).sum();
    let constant = removals
        .iter()
        .map(|r| {
            let w = omega.omega(r.prev, r.next).powf(theta);
            if r.defect == 0.0 {
                0.0
            } else if w > 0.0 {
                r.defect / w
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    let span = omega.omega(grid[0], *grid.last().unwrap());
    let zeta_bound = 2f64.powf(theta) * riemann_zeta(theta) * constant * span.powf(theta);
    Ok(SewingResult {
        grid: grid.to_vec(),
        values,
        schedule,
        removals,
        theta,
        local_error,
        constant,
        merged,
        zeta_bound,
    })
}

// pieces keyed by their left endpoint; removing a point multiplies its two neighbours
fn merge_in_order(
    f: &dyn Integrand,
    grid: &[usize],
    order: &[(usize, usize, usize)],
) -> Result<Tensor> {
    let mut pieces = std::collections::BTreeMap::new();
    for w in grid.windows(2) {
        pieces.insert(w[0], piece(f, w[0], w[1])?);
    }
    for &(point, prev, _) in order {
        let right = pieces.remove(&point).unwrap();
        let left = pieces.get_mut(&prev).unwrap();
        *left = left.mul(&right)?;
    }
    Ok(pieces
        .into_values()
        .next()
        .unwrap_or_else(|| Tensor::unit(f.target())))
}

fn removal_order(
    grid: &[usize],
    omega: &dyn Control,
    schedule: Schedule,
) -> Vec<(usize, usize, usize)> {
    let mut pts = grid.to_vec();
    let mut out = Vec::new();
    let (s, t) = (grid[0], *grid.last().unwrap());
    match schedule {
        Schedule::LeftToRight => {
            while pts.len() > 2 {
                out.push((pts[1], pts[0], pts[2]));
                pts.remove(1);
            }
        }
        Schedule::Dyadic => {
            while pts.len() > 2 {
                let mut keep = vec![pts[0]];
                let mut q = 1;
                while q < pts.len() {
                    if q + 1 < pts.len() {
                        out.push((pts[q], *keep.last().unwrap(), pts[q + 1]));
                        keep.push(pts[q + 1]);
                        q += 2;
                    } else {
                        keep.push(pts[q]);
                        q += 1;
                    }
                }
                pts = keep;
            }
        }
        Schedule::Omega => {
            let total = omega.omega(s, t);
            while pts.len() > 2 {
                let l = pts.len() - 1;
                let pick = if l == 2 {
                    1
                } else {
                    let bound = 2.0 / (l as f64 - 1.0) * total * (1.0 + 1e-12);
                    let scores: Vec<f64> = (1..l)
                        .map(|j| omega.omega(pts[j - 1], pts[j + 1]))
                        .collect();
                    match scores.iter().position(|&w| w <= bound) {
                        Some(j) => j + 1,
                        None => {
                            let mut best = 0;
                            for (j, w) in scores.iter().enumerate() {
                                if *w < scores[best] {
                                    best = j;
                                }
                            }
                            best + 1
                        }
                    }
                };
                out.push((pts[pick], pts[pick - 1], pts[pick + 1]));
                pts.remove(pick);
            }
        }
    }
    out
}

/// `max_σ ‖σ(∫_s^t) − σ(β_s(g_s, g_{s,t}))‖` between grid positions `a < b` of a result.
pub fn local_estimate(f: &dyn Integrand, r: &SewingResult, a: usize, b: usize) -> Result<f64> {
    Ok(r.between(a, b)?
        .sub(&f.step(r.grid[a], r.grid[b])?)?
        .norm_max())
}

/// Least-squares slope of `log y` against `log x`, skipping non-positive entries.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[derive(Clone, Debug)]
pub struct ScaleReport {
    /// Per dyadic scale: `(max ω over windows, max deviation over windows)`.
    pub scales: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    /// `sup deviation / ω^θ` over all windows.
    pub constant: f64,
}

/// Deviation from the one-step approximation on dyadic windows of the result's grid.
/// Deviations below `floor` are treated as roundoff and left out of the fit.
pub fn local_scaling(
    f: &dyn Integrand,
    r: &SewingResult,
    omega: &dyn Control,
    floor: f64,
) -> Result<ScaleReport> {
    let len = r.grid.len();
    let mut scales = Vec::new();
    let mut constant = 0.0f64;
    let mut width = 2;
    while width < len {
        let mut worst_dev = 0.0f64;
        let mut worst_w = 0.0f64;
        let mut a = 0;
        while a + width < len {
            let dev = local_estimate(f, r, a, a + width)?;
            let w = omega.omega(r.grid[a], r.grid[a + width]);
            worst_dev = worst_dev.max(dev);
            worst_w = worst_w.max(w);
            if dev > 0.0 {
                constant = constant.max(dev / w.powf(r.theta));
            }
            a += width;
        }
        if worst_dev > floor {
            scales.push((worst_w, worst_dev));
        }
        width *= 2;
    }
    Ok(ScaleReport {
        slope: loglog_slope(&scales),
        scales,
        constant,
    })
}

#[derive(Clone, Debug)]
pub struct Refinement {
    /// `max_σ` distance between the two ordered products.
    pub deviation: f64,
    /// `sup ω` over the cells of the coarse grid.
    pub mesh: f64,
}

/// Compare ordered products over a fine grid and a coarse sub-grid of it.
pub fn refine_and_compare(
    f: &dyn Integrand,
    omega: &dyn Control,
    fine: &[usize],
    coarse: &[usize],
) -> Result<Refinement> {
    let nested = coarse.first() == fine.first()
        && coarse.last() == fine.last()
        && coarse.iter().all(|c| fine.binary_search(c).is_ok());
    if !nested {
        return Err(Error::Domain(
            "coarse grid is not a sub-grid of the fine grid with the same endpoints".into(),
        ));
    }
    let a = ordered_product(f, fine)?;
    let b = ordered_product(f, coarse)?;
    let deviation = a.last().unwrap().sub(b.last().unwrap())?.norm_max();
    let mesh = coarse
        .windows(2)
        .map(|w| omega.omega(w[0], w[1]))
        .fold(0.0, f64::max);
    Ok(Refinement { deviation, mesh })
}

/// Dyadic sub-grids of the full grid compared with the full grid.
pub fn convergence_study(
    f: &dyn Integrand,
    omega: &dyn Control,
    levels: usize,
) -> Result<(Vec<Refinement>, Option<f64>)> {
    let full: Vec<usize> = (0..f.len()).collect();
    let last = f.len() - 1;
    let mut out = Vec::new();
    for k in 1..=levels {
        let stride = 1usize << k;
        if stride >= last {
            break;
        }
        let mut coarse: Vec<usize> = (0..=last).step_by(stride).collect();
        if *coarse.last().unwrap() != last {
            coarse.push(last);
        }
        out.push(refine_and_compare(f, omega, &full, &coarse)?);
    }
    let slope = loglog_slope(
        &out.iter()
            .map(|r| (r.mesh, r.deviation))
            .collect::<Vec<_>>(),
    );
    Ok((out, slope))
}
