//! Weakly controlled paths and their iterated integrals.
//!
//! A controlled path carries a trace `γ` and a form `β` whose one-step
//! prediction matches the increments up to a remainder; the form itself need
//! not be integrable. The iterated integral sews
//! `(γ¹_s − γ¹_0) ⊗ (γ²_t − γ²_s) + (L¹_s ⊗ L²_s) I(g_{s,t})`
//! directly, which is the form of the augmented path `γ² ⊕ g` evaluated on
//! its own increments.

use std::sync::Arc;

use rayon::prelude::*;

use super::{kron_add, same_base, DominatedPath};
use crate::algebra::maps::{map_i_basis, map_i_prime_basis};
use crate::algebra::{Forest, Kind, System, Tensor, Tree};
use crate::error::{Error, Result};
use crate::forms::{vector_element, vector_target, LinearForm, Smooth};
use crate::paths::{Control, SampledGroupPath};
use crate::sewing::{sew, Integrand, Schedule, SewingResult};

#[derive(Clone)]
pub struct ControlledPath {
    form: LinearForm,
    trace: Vec<Vec<f64>>,
}

/// The three parts of the controlled-path norm.
#[derive(Clone, Debug)]
pub struct MCertificate {
    /// `sup_s ‖L_s‖`.
    pub bound: f64,
    /// `sup ‖γ_t − γ_s − β_s(g_s, g_{s,t})‖ / ω(s,t)^{θ−1/p}`.
    pub remainder: f64,
    pub worst_remainder: Option<(usize, usize)>,
    /// Per degree `k`: `sup ‖(β_t − β_s)(g_t, ·)‖_k / ω(s,t)^{θ−(1+k)/p}` (entry 0 unused).
    pub quotients: Vec<f64>,
    pub total: f64,
}

impl ControlledPath {
    pub fn new(form: LinearForm, trace: Vec<Vec<f64>>) -> Result<Self> {
        if trace.len() != form.base().len() || trace.iter().any(|v| v.len() != form.dim_out()) {
            return Err(Error::Mismatch("trace does not match the form".into()));
        }
        Ok(ControlledPath { form, trace })
    }

    pub fn from_dominated(d: &DominatedPath) -> Self {
        ControlledPath {
            form: d.form().clone(),
            trace: d.traces().to_vec(),
        }
    }

    /// `γ_t = f(x_t)` with derivative `L_s e_i = Df(x_s) e_i` on letters and zero elsewhere.
    pub fn of_function(f: &dyn Smooth, base: Arc<SampledGroupPath>) -> Result<Self> {
        let sys = base.sys().clone();
        let d = sys.d();
        if f.dim_in() != d {
            return Err(Error::Mismatch(format!(
                "function on R^{} over a path in R^{d}",
                f.dim_in()
            )));
        }
        let e = f.dim_out();
        let mut kernels = Vec::with_capacity(base.len());
        let mut trace = Vec::with_capacity(base.len());
        for s in 0..base.len() {
            let x = base.level_one(s);
            let df = f.deriv(1, &x);
            let mut k = vec![0.0; e * sys.dim()];
            for i in 0..d {
                let q = sys.letter(i);
                for u in 0..e {
                    k[q * e + u] = df[u * d + i];
                }
            }
            kernels.push(k);
            trace.push(f.deriv(0, &x));
        }
        ControlledPath::new(LinearForm::new(base, e, kernels)?, trace)
    }

    /// Keep only kernel columns of degree at most `depth`.
    pub fn truncated(&self, depth: usize) -> Result<Self> {
        let sys = self.form.base().sys().clone();
        let m = self.dim();
        let kernels = (0..self.trace.len())
            .map(|s| {
                let mut k = self.form.kernel(s).to_vec();
                for q in 1..sys.dim() {
                    if sys.degree(q) > depth {
                        k[q * m..(q + 1) * m].iter_mut().for_each(|x| *x = 0.0);
                    }
                }
                k
            })
            .collect();
        ControlledPath::new(
            LinearForm::new(self.form.base().clone(), m, kernels)?,
            self.trace.clone(),
        )
    }

    pub fn form(&self) -> &LinearForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.form.dim_out()
    }

    pub fn trace(&self, t: usize) -> &[f64] {
        &self.trace[t]
    }

    pub fn certificate(&self, omega: &dyn Control, theta: f64, p: f64) -> Result<MCertificate> {
        let g = self.form.base().clone();
        let sys = g.sys().clone();
        let n = sys.n();
        let m = self.dim();
        let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
        let q = |diff: f64, w: f64, e: f64| if diff == 0.0 { 0.0 } else { diff / w.powf(e) };
        let bound = (0..g.len())
            .map(|s| {
                (1..sys.dim())
                    .map(|c| l1(self.form.column(s, c)))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        type Row = ((f64, Option<(usize, usize)>), Vec<f64>);
        let rows: Vec<Row> = (0..g.len())
            .into_par_iter()
            .map(|t| -> Result<Row> {
                let mut rem = (0.0f64, None);
                let mut per = vec![0.0f64; n + 1];
                let here: Vec<Vec<f64>> = (1..sys.dim())
                    .map(|c| self.form.column(t, c).to_vec())
                    .collect();
                for s in 0..t {
                    let w = omega.omega(s, t);
                    let pred = self.form.step(s, t);
                    let r: Vec<f64> = (0..m)
                        .map(|u| self.trace[t][u] - self.trace[s][u] - pred[u])
                        .collect();
                    let v = q(l1(&r), w, theta - 1.0 / p);
                    if v > rem.0 {
                        rem = (v, Some((s, t)));
                    }
                    for (c, col) in here.iter().enumerate() {
                        let sigma = c + 1;
                        let there =
                            use_form(&self.form, s, g.value(t), &Tensor::basis(&sys, sigma))?;
                        let k = sys.degree(sigma);
                        let diff: f64 = col.iter().zip(&there).map(|(a, b)| (a - b).abs()).sum();
                        per[k] = per[k].max(q(diff, w, theta - (1 + k) as f64 / p));
                    }
                }
                Ok((rem, per))
            })
            .collect::<Result<_>>()?;
        let mut remainder = 0.0;
        let mut worst_remainder = None;
        let mut quotients = vec![0.0; n + 1];
        for ((r, at), per) in rows {
            if r > remainder {
                remainder = r;
                worst_remainder = at;
            }
            for k in 1..=n {
                quotients[k] = f64::max(quotients[k], per[k]);
            }
        }
        let total = bound + remainder + quotients.iter().cloned().fold(0.0, f64::max);
        Ok(MCertificate {
            bound,
            remainder,
            worst_remainder,
            quotients,
            total,
        })
    }
}

fn use_form(form: &LinearForm, s: usize, a: &Tensor, v: &Tensor) -> Result<Vec<f64>> {
    use crate::forms::CocyclicForm;
    Ok(form.apply(s, a, v)?.coeffs()[1..].to_vec())
}

struct Sewn<'a> {
    target: Arc<System>,
    c1: &'a ControlledPath,
    c2: &'a ControlledPath,
    // column-major (L¹_s ⊗ L²_s) I(e_σ), one matrix per grid time
    cross: Vec<Vec<f64>>,
}

impl Integrand for Sewn<'_> {
    fn target(&self) -> &Arc<System> {
        &self.target
    }

    fn len(&self) -> usize {
        self.cross.len()
    }

    fn step(&self, i: usize, j: usize) -> Result<Tensor> {
        let m = self.c1.dim() * self.c2.dim();
        let mut v = vec![0.0; m];
        let run: Vec<f64> = self.c1.trace[i]
            .iter()
            .zip(&self.c1.trace[0])
            .map(|(a, b)| a - b)
            .collect();
        let dg: Vec<f64> = self.c2.trace[j]
            .iter()
            .zip(&self.c2.trace[i])
            .map(|(a, b)| a - b)
            .collect();
        kron_add(&mut v, 1.0, &run, &dg);
        let inc = self.c1.form.base().increment(i, j);
        for (q, &w) in inc.coeffs().iter().enumerate().skip(1) {
            if w != 0.0 {
                for (o, x) in v.iter_mut().zip(&self.cross[i][q * m..(q + 1) * m]) {
                    *o += w * x;
                }
            }
        }
        Ok(vector_element(&self.target, &v))
    }
}

#[derive(Clone, Debug)]
pub struct ControlledIntegral {
    /// `∫_0^t (γ¹_u − γ¹_0) ⊗ dγ²_u` at every grid time.
    pub trace: Vec<Vec<f64>>,
    pub sewing: SewingResult,
}

fn sew_pair(
    c1: &ControlledPath,
    c2: &ControlledPath,
    primed: bool,
    omega: &dyn Control,
    theta: f64,
    schedule: Schedule,
) -> Result<ControlledIntegral> {
    same_base(&c1.form, &c2.form)?;
    let sys = c1.form.base().sys().clone();
    let images = (0..sys.dim())
        .map(|i| {
            if primed {
                Ok(map_i_prime_basis(&sys, i))
            } else {
                map_i_basis(&sys, i)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let m = c1.dim() * c2.dim();
    let cross = (0..c1.trace.len())
        .into_par_iter()
        .map(|s| {
            let mut k = vec![0.0; m * sys.dim()];
            for (q, img) in images.iter().enumerate().skip(1) {
                for (key, c) in img {
                    kron_add(
                        &mut k[q * m..(q + 1) * m],
                        *c,
                        c1.form.column(s, key[0]),
                        c2.form.column(s, key[1]),
                    );
                }
            }
            k
        })
        .collect();
    let f = Sewn {
        target: vector_target(m)?,
        c1,
        c2,
        cross,
    };
    let sewing = sew(&f, omega, theta, schedule)?;
    let trace = sewing
        .values
        .iter()
        .map(|v| v.coeffs()[1..].to_vec())
        .collect();
    Ok(ControlledIntegral { trace, sewing })
}

/// `∫ (γ¹ − γ¹_0) ⊗ dγ²` for two controlled paths over a base with map `I`.
pub fn controlled_iterated_integral(
    c1: &ControlledPath,
    c2: &ControlledPath,
    omega: &dyn Control,
    theta: f64,
    schedule: Schedule,
) -> Result<ControlledIntegral> {
    sew_pair(c1, c2, false, omega, theta, schedule)
}

/// `∫ (γ − γ_0) ⊗ dx` against the level-one path; needs only `I′`, so any butcher level works.
pub fn controlled_integral_against_x(
    c: &ControlledPath,
    omega: &dyn Control,
    theta: f64,
    schedule: Schedule,
) -> Result<ControlledIntegral> {
    let base = c.form.base().clone();
    let x =
        ControlledPath::from_dominated(&DominatedPath::from_form(LinearForm::level_one(base)?)?);
    sew_pair(c, &x, true, omega, theta, schedule)
}

/// The canonical step-2 branched lift of a controlled path `γ ∈ R^m`:
/// `•_i ↦ γ^i − γ^i_0`, `[•_j]_i ↦ ∫ (γ^j − γ^j_0) dγ^i`, forests by products.
pub fn butcher_enhancement(
    c: &ControlledPath,
    omega: &dyn Control,
    theta: f64,
    schedule: Schedule,
) -> Result<SampledGroupPath> {
    let m = c.dim();
    let area = controlled_iterated_integral(c, c, omega, theta, schedule)?;
    let target = System::get(Kind::Butcher, m, 2)?;
    let node = |i: usize| target.forest_index(&Forest::single(Tree::leaf(i))).unwrap();
    let values = (0..c.trace.len())
        .map(|t| {
            let mut a = vec![0.0; target.dim()];
            a[0] = 1.0;
            let x: Vec<f64> = (0..m).map(|i| c.trace[t][i] - c.trace[0][i]).collect();
            for i in 0..m {
                a[node(i)] = x[i];
                for j in 0..m {
                    let ladder = Tree::graft(Forest::single(Tree::leaf(j)), i);
                    a[target.forest_index(&Forest::single(ladder)).unwrap()] =
                        area.trace[t][j * m + i];
                    if i <= j {
                        let pair = Forest::from_trees(vec![Tree::leaf(i), Tree::leaf(j)]);
                        a[target.forest_index(&pair).unwrap()] = x[i] * x[j];
                    }
                }
            }
            Tensor::from_coeffs(&target, a)
        })
        .collect::<Result<Vec<_>>>()?;
    SampledGroupPath::new(c.form.base().times().to_vec(), values)
}
