//! Slowly-varying norms and the integrable condition, evaluated exactly over
//! the coefficient basis (under ℓ1 the operator norm is the largest image of a
//! basis vector).

use rayon::prelude::*;

use super::CocyclicForm;
use crate::algebra::Tensor;
use crate::error::Result;
use crate::paths::{Control, SampledGroupPath};

#[derive(Clone, Debug)]
pub struct SlowVaryingReport {
    /// `sup_t ‖β_t(g_t, ·)‖`.
    pub m: f64,
    pub theta: f64,
    pub p: f64,
    /// Per domain degree `k`: `sup ‖(β_t − β_s)(g_t, ·)‖_k / ω(s,t)^{θ−k/p}` (entry 0 unused).
    pub quotients: Vec<f64>,
    /// Grid pair attaining each quotient.
    pub worst: Vec<Option<(usize, usize)>>,
    /// `M` plus the largest quotient.
    pub norm: f64,
}

impl SlowVaryingReport {
    pub fn is_finite(&self) -> bool {
        self.norm.is_finite()
    }
}

fn quotient(diff: f64, w: f64, exponent: f64) -> f64 {
    if diff == 0.0 {
        return 0.0;
    }
    let q = diff / w.powf(exponent);
    if q.is_nan() {
        f64::INFINITY
    } else {
        q
    }
}

fn basis_images(form: &dyn CocyclicForm, s: usize, a: &Tensor) -> Result<Vec<Tensor>> {
    let sys = form.domain();
    (1..sys.dim())
        .map(|i| form.apply(s, a, &Tensor::basis(sys, i)))
        .collect()
}

/// The slowly-varying certificate over all grid pairs.
pub fn slowly_varying(
    form: &dyn CocyclicForm,
    g: &SampledGroupPath,
    omega: &dyn Control,
    theta: f64,
    p: f64,
) -> Result<SlowVaryingReport> {
    let sys = form.domain().clone();
    let n = sys.n();
    let rows: Vec<(f64, Vec<(f64, Option<(usize, usize)>)>)> = (0..g.len())
        .into_par_iter()
        .map(|t| -> Result<_> {
            let here = basis_images(form, t, g.value(t))?;
            let m = here
                .iter()
                .map(|v| v.augmentation().norm_l1())
                .fold(0.0, f64::max);
            let mut best = vec![(0.0, None); n + 1];
            for s in 0..t {
                let there = basis_images(form, s, g.value(t))?;
                let w = omega.omega(s, t);
                for (q, (x, y)) in here.iter().zip(&there).enumerate() {
                    let k = sys.degree(q + 1);
                    let v = quotient(x.sub(y)?.norm_l1(), w, theta - k as f64 / p);
                    if v > best[k].0 {
                        best[k] = (v, Some((s, t)));
                    }
                }
            }
            Ok((m, best))
        })
        .collect::<Result<_>>()?;
    let m = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let mut quotients = vec![0.0; n + 1];
    let mut worst = vec![None; n + 1];
    for (_, best) in &rows {
        for k in 1..=n {
            if best[k].0 > quotients[k] {
                quotients[k] = best[k].0;
                worst[k] = best[k].1;
            }
        }
    }
    let norm = m + quotients.iter().cloned().fold(0.0, f64::max);
    Ok(SlowVaryingReport {
        m,
        theta,
        p,
        quotients,
        worst,
        norm,
    })
}

#[derive(Clone, Debug)]
pub struct IntegrableReport {
    /// `sup_t ‖β_t(g_t, ·)‖`.
    pub m: f64,
    /// `sup max_σ ‖σ((β_u − β_s)(g_u, g_{u,t}))‖ / ω(s,t)^θ` over grid triples.
    pub max_quotient: f64,
    pub worst: Option<(usize, usize, usize)>,
}

/// Both bounds of the integrable condition over all grid triples `s < u < t`. Cubic cost.
pub fn integrable_condition_check(
    form: &dyn CocyclicForm,
    g: &SampledGroupPath,
    omega: &dyn Control,
    theta: f64,
) -> Result<IntegrableReport> {
    let len = g.len();
    let m = (0..len)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            Ok(basis_images(form, t, g.value(t))?
                .iter()
                .map(|v| v.augmentation().norm_l1())
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let rows: Vec<(f64, Option<(usize, usize, usize)>)> = (0..len)
        .into_par_iter()
        .map(|s| -> Result<_> {
            let mut best = (0.0f64, None);
            for u in s + 1..len {
                for t in u + 1..len {
                    let inc = g.increment(u, t);
                    let diff = form
                        .apply(u, g.value(u), &inc)?
                        .sub(&form.apply(s, g.value(u), &inc)?)?
                        .norm_max();
                    let q = quotient(diff, omega.omega(s, t), theta);
                    if q > best.0 {
                        best = (q, Some((s, u, t)));
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let (max_quotient, worst) = rows
        .into_iter()
        .fold((0.0, None), |a, b| if b.0 > a.0 { b } else { a });
    Ok(IntegrableReport {
        m,
        max_quotient,
        worst,
    })
}
