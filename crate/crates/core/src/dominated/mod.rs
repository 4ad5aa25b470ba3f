//! Dominated paths: vector-valued traces `h` coupled to a group path `g`
//! through a linear cocyclic form, `h_t = h_0 + ∫ β(g) dg`.
//!
//! With a vector target the sewn product is a sum, and the left fold over the
//! finest cells is `h_0 + Σ_j L_j(g_{j,j+1} − 1)`. The stability operations
//! build new kernels from old ones and the trace follows by summation.

use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{Kind, System};
use crate::error::{Error, Result};
use crate::forms::{slowly_varying, LinearForm, SlowVaryingReport};
use crate::paths::{Control, SampledGroupPath};
use crate::sewing::{sew, FormIntegrand, Schedule, SewingResult};

mod calculus;
mod controlled;
mod enhance;

pub use calculus::{compose, iterated_integral, product, product_parts};
pub use controlled::{
    butcher_enhancement, controlled_integral_against_x, controlled_iterated_integral,
    ControlledIntegral, ControlledPath, MCertificate,
};
pub use enhance::{enhance, rebase, rough_integrate, GroupEnhancement, RoughIntegral};

/// `a ⊗ b` flattened with the first factor slowest.
pub(crate) fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        out.extend(b.iter().map(|y| x * y));
    }
    out
}

pub(crate) fn kron_add(out: &mut [f64], c: f64, a: &[f64], b: &[f64]) {
    let w = b.len();
    for (i, x) in a.iter().enumerate() {
        let cx = c * x;
        if cx != 0.0 {
            for (o, y) in out[i * w..(i + 1) * w].iter_mut().zip(b) {
                *o += cx * y;
            }
        }
    }
}

pub(crate) fn same_base(a: &LinearForm, b: &LinearForm) -> Result<()> {
    let (x, y) = (a.base(), b.base());
    if Arc::ptr_eq(x, y)
        || (x.len() == y.len()
            && **x.sys() == **y.sys()
            && x.values()
                .iter()
                .zip(y.values())
                .all(|(u, v)| u.coeffs() == v.coeffs()))
    {
        Ok(())
    } else {
        Err(Error::Mismatch(
            "dominated paths over different base paths".into(),
        ))
    }
}

#[derive(Clone)]
pub struct DominatedPath {
    form: LinearForm,
    h0: Vec<f64>,
    trace: Vec<Vec<f64>>,
}

impl DominatedPath {
    pub fn new(form: LinearForm, h0: Vec<f64>) -> Result<Self> {
        if h0.len() != form.dim_out() {
            return Err(Error::Mismatch(format!(
                "initial value of length {} for a form into R^{}",
                h0.len(),
                form.dim_out()
            )));
        }
        let len = form.base().len();
        let cells: Vec<Vec<f64>> = (0..len.saturating_sub(1))
            .into_par_iter()
            .map(|j| form.step(j, j + 1))
            .collect();
        let mut trace = Vec::with_capacity(len);
        trace.push(h0.clone());
        for c in cells {
            let next: Vec<f64> = trace
                .last()
                .unwrap()
                .iter()
                .zip(&c)
                .map(|(a, b)| a + b)
                .collect();
            trace.push(next);
        }
        if trace.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Overflow("trace is not finite".into()));
        }
        Ok(DominatedPath { form, h0, trace })
    }

    /// Zero initial value.
    pub fn from_form(form: LinearForm) -> Result<Self> {
        let m = form.dim_out();
        DominatedPath::new(form, vec![0.0; m])
    }

    pub fn base(&self) -> &Arc<SampledGroupPath> {
        self.form.base()
    }

    pub fn form(&self) -> &LinearForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.form.dim_out()
    }

    pub fn h0(&self) -> &[f64] {
        &self.h0
    }

    pub fn trace(&self, t: usize) -> &[f64] {
        &self.trace[t]
    }

    pub fn traces(&self) -> &[Vec<f64>] {
        &self.trace
    }

    pub fn increment(&self, s: usize, t: usize) -> Vec<f64> {
        self.trace[t]
            .iter()
            .zip(&self.trace[s])
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn add(&self, other: &DominatedPath) -> Result<Self> {
        let h0 = self.h0.iter().zip(&other.h0).map(|(a, b)| a + b).collect();
        DominatedPath::new(self.form.add(&other.form)?, h0)
    }

    /// The trace recomputed by the sewing integrator, with its error bookkeeping.
    pub fn sewn(
        &self,
        omega: &dyn Control,
        theta: f64,
        schedule: Schedule,
    ) -> Result<SewingResult> {
        sew(
            &FormIntegrand::new(&self.form, self.base())?,
            omega,
            theta,
            schedule,
        )
    }

    pub fn certificate(
        &self,
        omega: &dyn Control,
        theta: f64,
        p: f64,
    ) -> Result<SlowVaryingReport> {
        slowly_varying(&self.form, self.base(), omega, theta, p)
    }

    /// `sup ‖h_t − h_s − β_s(g_s, g_{s,t})‖ / ω(s,t)^θ` over grid pairs.
    pub fn remainder_constant(&self, omega: &dyn Control, theta: f64) -> f64 {
        let len = self.trace.len();
        (0..len)
            .into_par_iter()
            .map(|s| {
                let mut best = 0.0f64;
                for t in s + 1..len {
                    let pred = self.form.step(s, t);
                    let r = self
                        .increment(s, t)
                        .iter()
                        .zip(&pred)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    if r > 0.0 {
                        best = best.max(r / omega.omega(s, t).powf(theta));
                    }
                }
                best
            })
            .reduce(|| 0.0, f64::max)
    }

    /// p-variation of the trace under the ℓ1 norm.
    pub fn trace_pvariation(&self, p: f64) -> Result<f64> {
        let len = self.trace.len();
        let dist: Vec<Vec<f64>> = (0..len)
            .map(|i| {
                (0..len)
                    .map(|j| {
                        if j > i {
                            self.increment(i, j).iter().map(|x| x.abs()).sum()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(SampledGroupPath::pvar_sum_from_table(&dist, p)?.powf(1.0 / p))
    }
}

/// The step-1 nilpotent system over the trace space, used for enhancements.
pub(crate) fn tensor_space(m: usize, n: usize) -> Result<Arc<System>> {
    System::get(Kind::Nilpotent, m, n)
}
