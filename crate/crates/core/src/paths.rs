//! Group-valued paths sampled on a time grid, p-variation and controls.
//!
//! Every partition in this crate is a sub-partition of the sample grid.

use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{Kind, System, Tensor};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SampledGroupPath {
    sys: Arc<System>,
    times: Vec<f64>,
    values: Vec<Tensor>,
    inverses: Vec<Tensor>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Domain("a path needs at least one sample".into()));
    }
    for (i, w) in times.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::Domain(format!(
                "times must increase strictly: t[{}]={} then t[{}]={}",
                i,
                w[0],
                i + 1,
                w[1]
            )));
        }
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("non-finite time".into()));
    }
    Ok(())
}

/// `0, 1, …, len-1`.
pub fn unit_times(len: usize) -> Vec<f64> {
    (0..len).map(|i| i as f64).collect()
}

impl SampledGroupPath {
    /// Values need degree-0 coefficient one; grouplike membership is checked separately.
    pub fn new(times: Vec<f64>, values: Vec<Tensor>) -> Result<Self> {
        check_times(&times)?;
        if times.len() != values.len() {
            return Err(Error::Mismatch(format!(
                "{} times for {} values",
                times.len(),
                values.len()
            )));
        }
        let sys = values[0].sys().clone();
        let mut inverses = Vec::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if **v.sys() != *sys {
                return Err(Error::Mismatch(format!("value {i} lives in {:?}", v.sys())));
            }
            inverses.push(
                v.inverse()
                    .map_err(|e| Error::Domain(format!("value {i}: {e}")))?,
            );
        }
        Ok(SampledGroupPath {
            sys,
            times,
            values,
            inverses,
        })
    }

    /// `start · c₀ · c₁ ⋯` from per-cell increments.
    pub fn from_cells(times: Vec<f64>, start: Tensor, cells: &[Tensor]) -> Result<Self> {
        if cells.len() + 1 != times.len() {
            return Err(Error::Mismatch(format!(
                "{} cells for {} times",
                cells.len(),
                times.len()
            )));
        }
        let mut values = Vec::with_capacity(times.len());
        values.push(start);
        for c in cells {
            let next = values.last().unwrap().mul(c)?;
            values.push(next);
        }
        SampledGroupPath::new(times, values)
    }

    /// Step-`n` lift of the piecewise-linear interpolation of `points`, starting at the unit.
    pub fn piecewise_linear(
        kind: Kind,
        n: usize,
        times: Vec<f64>,
        points: &[Vec<f64>],
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("no sample points".into()));
        }
        if points.len() != times.len() {
            return Err(Error::Mismatch(format!(
                "{} times for {} points",
                times.len(),
                points.len()
            )));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::Mismatch("points of different dimension".into()));
        }
        let sys = System::get(kind, d, n)?;
        let cells = points
            .windows(2)
            .map(|w| {
                let v: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
                Tensor::segment(&sys, &v)
            })
            .collect::<Result<Vec<_>>>()?;
        SampledGroupPath::from_cells(times, Tensor::unit(&sys), &cells)
    }

    /// Piecewise-linear signature on the unit time grid.
    pub fn signature(n: usize, points: &[Vec<f64>]) -> Result<Self> {
        SampledGroupPath::piecewise_linear(Kind::Nilpotent, n, unit_times(points.len()), points)
    }

    pub fn sys(&self) -> &Arc<System> {
        &self.sys
    }

    pub fn level(&self) -> usize {
        self.sys.n()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Tensor] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &Tensor {
        &self.values[i]
    }

    pub fn inverse(&self, i: usize) -> &Tensor {
        &self.inverses[i]
    }

    /// `g_{s,t} = g_s⁻¹ g_t`.
    pub fn increment(&self, s: usize, t: usize) -> Tensor {
        self.inverses[s].mul_unchecked(&self.values[t])
    }

    /// `π₁(g_t)`.
    pub fn level_one(&self, t: usize) -> Vec<f64> {
        self.values[t].level_one()
    }

    pub fn truncate(&self, m: usize) -> Result<Self> {
        let values = self
            .values
            .iter()
            .map(|v| v.truncate(m))
            .collect::<Result<Vec<_>>>()?;
        SampledGroupPath::new(self.times.clone(), values)
    }

    pub fn dilate(&self, c: f64) -> Result<Self> {
        SampledGroupPath::new(
            self.times.clone(),
            self.values.iter().map(|v| v.dilate(c)).collect(),
        )
    }

    /// Restriction to the listed grid indices.
    pub fn subgrid(&self, idx: &[usize]) -> Result<Self> {
        SampledGroupPath::new(
            idx.iter().map(|&i| self.times[i]).collect(),
            idx.iter().map(|&i| self.values[i].clone()).collect(),
        )
    }

    pub fn grouplike_defect(&self) -> f64 {
        self.values
            .par_iter()
            .map(Tensor::grouplike_defect)
            .reduce(|| 0.0, f64::max)
    }

    /// Largest coefficient of `g_{s,u} g_{u,t} - g_{s,t}` over all grid triples.
    pub fn chen_residual(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|s| {
                let mut worst = 0.0f64;
                for u in s..n {
                    let su = self.increment(s, u);
                    for t in u..n {
                        let lhs = su.mul_unchecked(&self.increment(u, t));
                        worst = worst.max(lhs.max_abs_diff(&self.increment(s, t)));
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Table of homogeneous increment norms `|g_{s,t}|`, `s < t`.
    pub fn increment_norms(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|s| {
                (0..n)
                    .map(|t| {
                        if t > s {
                            self.increment(s, t).homogeneous_norm()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// `sup_D Σ |g_{t_k,t_{k+1}}|^p` over grid partitions of `[s, t]`.
    pub fn pvar_sum(&self, p: f64, s: usize, t: usize) -> Result<f64> {
        check_p(p)?;
        if t <= s {
            return Ok(0.0);
        }
        Ok(*self.pvar_profile(p, s, t).last().unwrap())
    }

    /// `‖g‖_{p-var,[s,t]}`.
    pub fn p_variation(&self, p: f64, s: usize, t: usize) -> Result<f64> {
        Ok(self.pvar_sum(p, s, t)?.powf(1.0 / p))
    }

    // run[k] = best sum over partitions of [s, s+k]
    fn pvar_profile(&self, p: f64, s: usize, t: usize) -> Vec<f64> {
        let mut run = vec![0.0f64; t - s + 1];
        let norms: Vec<Vec<f64>> = (s..t)
            .into_par_iter()
            .map(|u| {
                (u + 1..=t)
                    .map(|v| self.increment(u, v).homogeneous_norm().powf(p))
                    .collect()
            })
            .collect();
        for v in s + 1..=t {
            let mut best = f64::NEG_INFINITY;
            for u in s..v {
                best = best.max(run[u - s] + norms[u - s][v - u - 1]);
            }
            run[v - s] = best;
        }
        run
    }

    /// Same recursion on a precomputed norm table; matches the brute-force oracle bit for bit.
    pub fn pvar_sum_from_table(dist: &[Vec<f64>], p: f64) -> Result<f64> {
        check_p(p)?;
        let n = dist.len();
        if n < 2 {
            return Ok(0.0);
        }
        let mut run = vec![0.0f64; n];
        for v in 1..n {
            let mut best = f64::NEG_INFINITY;
            for u in 0..v {
                best = best.max(run[u] + dist[u][v].powf(p));
            }
            run[v] = best;
        }
        Ok(run[n - 1])
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p-variation needs p >= 1, got {p}")));
    }
    Ok(())
}

/// A superadditive function on grid pairs vanishing on the diagonal.
pub trait Control: Sync {
    fn omega(&self, s: usize, t: usize) -> f64;
    fn len(&self) -> usize;
}

/// `ω(s,t) = sup_D Σ |g|^p`, tabulated for every grid pair. Cubic cost; small grids only.
pub struct PvarControl {
    table: Vec<Vec<f64>>,
}

impl PvarControl {
    pub fn new(g: &SampledGroupPath, p: f64) -> Result<Self> {
        check_p(p)?;
        let n = g.len();
        if n > 600 {
            return Err(Error::Domain(format!(
                "tabulated p-variation control is limited to 600 points, got {n}"
            )));
        }
        let table = (0..n)
            .into_par_iter()
            .map(|s| {
                let mut row = vec![0.0; n];
                if s + 1 < n {
                    row[s..].copy_from_slice(&g.pvar_profile(p, s, n - 1));
                }
                row
            })
            .collect();
        Ok(PvarControl { table })
    }
}

impl Control for PvarControl {
    fn omega(&self, s: usize, t: usize) -> f64 {
        if t <= s {
            0.0
        } else {
            self.table[s][t]
        }
    }

    fn len(&self) -> usize {
        self.table.len()
    }
}

/// `ω(s,t) = (ℓ(t) - ℓ(s))^p` with `ℓ` the cumulative ℓ1 length of the level-one trace.
pub struct LengthControl {
    cum: Vec<f64>,
    power: f64,
}

impl LengthControl {
    pub fn new(g: &SampledGroupPath, p: f64) -> Result<Self> {
        check_p(p)?;
        let mut cum = vec![0.0];
        for t in 1..g.len() {
            let a = g.level_one(t - 1);
            let b = g.level_one(t);
            let step: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
            cum.push(cum[t - 1] + step);
        }
        Ok(LengthControl { cum, power: p })
    }

    pub fn from_cumulative(cum: Vec<f64>, power: f64) -> Result<Self> {
        check_p(power)?;
        if cum.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain(
                "cumulative length must be non-decreasing".into(),
            ));
        }
        Ok(LengthControl { cum, power })
    }
}

impl Control for LengthControl {
    fn omega(&self, s: usize, t: usize) -> f64 {
        if t <= s {
            0.0
        } else {
            (self.cum[t] - self.cum[s]).powf(self.power)
        }
    }

    fn len(&self) -> usize {
        self.cum.len()
    }
}

/// `ω₁ + ω₂`.
pub struct SumControl<'a> {
    parts: Vec<&'a dyn Control>,
}

impl<'a> SumControl<'a> {
    pub fn new(parts: Vec<&'a dyn Control>) -> Self {
        SumControl { parts }
    }
}

impl Control for SumControl<'_> {
    fn omega(&self, s: usize, t: usize) -> f64 {
        self.parts.iter().map(|c| c.omega(s, t)).sum()
    }

    fn len(&self) -> usize {
        self.parts.iter().map(|c| c.len()).min().unwrap_or(0)
    }
}

/// Most negative value of `ω(s,t) - ω(s,u) - ω(u,t)` over all grid triples.
pub fn superadditivity_defect(c: &dyn Control) -> f64 {
    let n = c.len();
    (0..n)
        .into_par_iter()
        .map(|s| {
            let mut worst = 0.0f64;
            for u in s..n {
                for t in u..n {
                    worst = worst.min(c.omega(s, t) - c.omega(s, u) - c.omega(u, t));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::min)
}
