//! Group enhancements `Γ` of a dominated path, transitivity, and rough integration.
//!
//! `Γ_{0,t} = 1 + x¹_t + x²_t + ⋯` with `x^{k+1} = ∫ x^k ⊗ dγ`. Started from an
//! arbitrary grid time `s`, the same recursion runs with the ladder of forms
//! `B_{s,u}(w) = Σ_k K^k_{s,u} w`, where `K¹ = L_u` and
//! `K^{k+1} e_σ = x^k_{s,u} ⊗ L_u e_σ + (K^k ⊗ L_u) I(e_σ)`.

use std::sync::Arc;

use rayon::prelude::*;

use super::calculus::iterated_integral;
use super::{kron, kron_add, tensor_space, DominatedPath};
use crate::algebra::maps::{map_i_basis, map_i_power};
use crate::algebra::system::Image;
use crate::algebra::{System, Tensor};
use crate::error::{Error, Result};
use crate::forms::{rough_one_form, LinearForm, Smooth};
use crate::paths::SampledGroupPath;

pub struct GroupEnhancement {
    driver: DominatedPath,
    levels: Vec<DominatedPath>,
    space: Arc<System>,
    path: Arc<SampledGroupPath>,
    images: Vec<Image>,
}

impl GroupEnhancement {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// The tensor algebra over the trace space, truncated at the depth.
    pub fn space(&self) -> &Arc<System> {
        &self.space
    }

    /// `t ↦ Γ_{0,t}`.
    pub fn path(&self) -> &Arc<SampledGroupPath> {
        &self.path
    }

    /// `x^k` as a dominated path, `1 ≤ k ≤ depth`.
    pub fn level(&self, k: usize) -> &DominatedPath {
        &self.levels[k - 1]
    }

    pub fn driver(&self) -> &DominatedPath {
        &self.driver
    }

    /// `B_{s,u}(e_σ)` for every `σ` (entry 0 is zero), given `x = Γ_{s,u}`.
    pub fn ladder(&self, u: usize, x: &Tensor) -> Result<Vec<Tensor>> {
        let form = self.driver.form();
        let dim = form.base().sys().dim();
        let m = self.driver.dim();
        let depth = self.depth();
        let mut cols = vec![vec![0.0; self.space.dim()]; dim];
        // K^k columns for all σ, one level at a time
        let mut k_prev: Vec<Vec<f64>> = (0..dim)
            .map(|q| {
                if q == 0 {
                    vec![0.0; m]
                } else {
                    form.column(u, q).to_vec()
                }
            })
            .collect();
        for k in 1..=depth {
            let r = self.space.block(k);
            for q in 1..dim {
                cols[q][r.clone()].copy_from_slice(&k_prev[q]);
            }
            if k == depth {
                break;
            }
            let xk = x.block(k);
            let width = m.pow(k as u32 + 1);
            let next: Vec<Vec<f64>> = (0..dim)
                .map(|q| {
                    let mut c = vec![0.0; width];
                    if q > 0 {
                        kron_add(&mut c, 1.0, xk, form.column(u, q));
                        for (key, coef) in &self.images[q] {
                            kron_add(&mut c, *coef, &k_prev[key[0]], form.column(u, key[1]));
                        }
                    }
                    c
                })
                .collect();
            k_prev = next;
        }
        cols.into_iter()
            .map(|c| Tensor::from_coeffs(&self.space, c))
            .collect()
    }

    /// `Γ_{s,t}` for `t = s, …, N−1`, from the running recursion started at `s`.
    pub fn running(&self, s: usize) -> Result<Vec<Tensor>> {
        let g = self.driver.base();
        let mut x = Tensor::unit(&self.space);
        let mut out = vec![x.clone()];
        for u in s..g.len() - 1 {
            let cell = g.increment(u, u + 1);
            let b = self.ladder(u, &x)?;
            let mut c = x.into_coeffs();
            for (q, &w) in cell.coeffs().iter().enumerate().skip(1) {
                if w != 0.0 {
                    for (o, v) in c.iter_mut().zip(b[q].coeffs()) {
                        *o += w * v;
                    }
                }
            }
            x = Tensor::from_coeffs(&self.space, c)?;
            out.push(x.clone());
        }
        Ok(out)
    }

    /// `max ‖Γ_{0,s} Γ_{s,t} − Γ_{0,t}‖` over `t ≥ s` for the given starts,
    /// with `Γ_{s,t}` from the running recursion.
    pub fn multiplicativity_residual(&self, starts: &[usize]) -> Result<f64> {
        let rows = starts
            .par_iter()
            .map(|&s| -> Result<f64> {
                let run = self.running(s)?;
                let mut worst = 0.0f64;
                for (q, gst) in run.iter().enumerate() {
                    let lhs = self.path.value(s).mul(gst)?;
                    worst = worst.max(lhs.max_abs_diff(self.path.value(s + q)));
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(rows.into_iter().fold(0.0, f64::max))
    }

    /// `max ‖B_{s,t}(e_σ) − Γ_{s,t} B_{t,t}(e_σ)‖` over `t ≥ s` and `σ`.
    pub fn factorization_residual(&self, s: usize) -> Result<f64> {
        let run = self.running(s)?;
        let unit = Tensor::unit(&self.space);
        let mut worst = 0.0f64;
        for (q, gst) in run.iter().enumerate() {
            let t = s + q;
            let here = self.ladder(t, gst)?;
            let there = self.ladder(t, &unit)?;
            for (a, b) in here.iter().zip(&there).skip(1) {
                worst = worst.max(a.max_abs_diff(&gst.mul(b)?));
            }
        }
        Ok(worst)
    }

    /// Largest coefficient of `B_{t,t}(e_σ)` in tensor degree above `|σ|`.
    pub fn triangular_defect(&self) -> Result<f64> {
        let unit = Tensor::unit(&self.space);
        let base = self.driver.base().sys().clone();
        let mut worst = 0.0f64;
        for t in 0..self.path.len() {
            for (q, b) in self.ladder(t, &unit)?.iter().enumerate().skip(1) {
                for k in base.degree(q) + 1..=self.depth() {
                    worst = worst.max(b.block(k).iter().fold(0.0, |a, x| a.max(x.abs())));
                }
            }
        }
        Ok(worst)
    }

    /// `1 + Σ_k (L_s ⊗ ⋯ ⊗ L_s) I^{k−1}(g_{s,t})`, the one-step comparator.
    pub fn comparator(&self, s: usize, t: usize) -> Result<Tensor> {
        let form = self.driver.form();
        let inc = form.base().increment(s, t);
        let n = inc.sys().n();
        let mut c = vec![0.0; self.space.dim()];
        c[0] = 1.0;
        let r = self.space.block(1);
        c[r].copy_from_slice(&form.eval(s, &inc));
        for k in 2..=self.depth().min(n) {
            let r = self.space.block(k);
            for (key, w) in map_i_power(&inc, k - 1)?.terms() {
                let mut v = form.column(s, key[0]).to_vec();
                for &q in &key[1..] {
                    v = kron(&v, form.column(s, q));
                }
                for (o, x) in c[r.clone()].iter_mut().zip(v) {
                    *o += w * x;
                }
            }
        }
        Tensor::from_coeffs(&self.space, c)
    }
}

/// The step-`depth` enhancement of `d` by repeated iterated integration.
pub fn enhance(d: &DominatedPath, depth: usize) -> Result<GroupEnhancement> {
    if depth == 0 {
        return Err(Error::Domain("enhancement depth must be positive".into()));
    }
    let g = d.base().clone();
    let sys = g.sys().clone();
    let images = (0..sys.dim())
        .map(|i| map_i_basis(&sys, i))
        .collect::<Result<Vec<_>>>()?;
    let m = d.dim();
    let space = tensor_space(m, depth)?;
    let x1 = DominatedPath::from_form(d.form().clone())?;
    let mut levels = vec![x1.clone()];
    while levels.len() < depth {
        let next = iterated_integral(levels.last().unwrap(), &x1)?;
        levels.push(next);
    }
    let values = (0..g.len())
        .map(|t| {
            let mut c = vec![0.0; space.dim()];
            c[0] = 1.0;
            for (k, x) in levels.iter().enumerate() {
                c[space.block(k + 1)].copy_from_slice(x.trace(t));
            }
            Tensor::from_coeffs(&space, c)
        })
        .collect::<Result<Vec<_>>>()?;
    let path = Arc::new(SampledGroupPath::new(g.times().to_vec(), values)?);
    Ok(GroupEnhancement {
        driver: d.clone(),
        levels,
        space,
        path,
        images,
    })
}

/// Pull a dominated path over `Γ` back to the base of the enhancement:
/// `L̃_s e_σ = Z_s B_{s,s}(e_σ)`.
pub fn rebase(outer: &DominatedPath, enh: &GroupEnhancement) -> Result<DominatedPath> {
    let over = outer.base();
    let same = Arc::ptr_eq(over, enh.path())
        || (over.len() == enh.path().len()
            && **over.sys() == **enh.space()
            && over
                .values()
                .iter()
                .zip(enh.path().values())
                .all(|(a, b)| a.max_abs_diff(b) == 0.0));
    if !same {
        return Err(Error::Mismatch(
            "outer path is not dominated over this enhancement".into(),
        ));
    }
    let g = enh.driver().base().clone();
    let dim = g.sys().dim();
    let w = outer.dim();
    let unit = Tensor::unit(enh.space());
    let kernels = (0..g.len())
        .into_par_iter()
        .map(|s| -> Result<Vec<f64>> {
            let ladder = enh.ladder(s, &unit)?;
            let mut k = vec![0.0; w * dim];
            for (q, b) in ladder.iter().enumerate().skip(1) {
                k[q * w..(q + 1) * w].copy_from_slice(&outer.form().eval(s, b));
            }
            Ok(k)
        })
        .collect::<Result<Vec<_>>>()?;
    DominatedPath::new(LinearForm::new(g, w, kernels)?, outer.h0().to_vec())
}

pub struct RoughIntegral {
    pub enhancement: GroupEnhancement,
}

impl RoughIntegral {
    /// `∫ f(x) dx` as a dominated path.
    pub fn integral(&self) -> &DominatedPath {
        self.enhancement.driver()
    }

    /// `Y_{0,t}`.
    pub fn value(&self, t: usize) -> &Tensor {
        self.enhancement.path().value(t)
    }
}

/// The rough integral `Y` of `f(x) dx` against `g`, enhanced to depth `max([p], 1)`.
pub fn rough_integrate(f: &dyn Smooth, g: Arc<SampledGroupPath>, p: f64) -> Result<RoughIntegral> {
    let form = rough_one_form(f, g, p)?;
    let d = DominatedPath::from_form(form)?;
    let depth = (p.floor() as usize).max(1);
    Ok(RoughIntegral {
        enhancement: enhance(&d, depth)?,
    })
}
