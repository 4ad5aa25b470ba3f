//! Cocyclic one-forms `β_s(a, b)` and their certificates.
//!
//! Forms are evaluated through their linear extension in the second slot, so
//! `apply(s, a, v)` accepts any tensor `v`. Vector-valued forms take values in
//! the step-1 system over `R^m`, whose group `1 + u` is additive.

use std::sync::Arc;

use crate::algebra::{System, Tensor};
use crate::error::{Error, Result};
use crate::paths::SampledGroupPath;

pub mod certificate;
pub mod polynomial;
pub mod rough;
pub mod smooth;

pub use certificate::{
    integrable_condition_check, slowly_varying, IntegrableReport, SlowVaryingReport,
};
pub use polynomial::PolynomialForm;
pub use rough::{
    check_time_regularity, rough_one_form, rough_one_form_with, time_varying_rough_one_form,
    RegularityReport,
};
pub use smooth::{FnSmooth, Polynomial, Smooth};

pub trait CocyclicForm: Sync {
    fn domain(&self) -> &Arc<System>;
    fn target(&self) -> &Arc<System>;
    /// `β_s(a, v)`, linear in `v`.
    fn apply(&self, s: usize, a: &Tensor, v: &Tensor) -> Result<Tensor>;
}

fn check_domain(sys: &Arc<System>, x: &Tensor, what: &str) -> Result<()> {
    if **x.sys() != **sys {
        return Err(Error::Mismatch(format!(
            "{what} lives in {:?}, form expects {:?}",
            x.sys(),
            sys
        )));
    }
    Ok(())
}

/// The vector space `R^m` as the additive group of the step-1 system.
pub fn vector_target(m: usize) -> Result<Arc<System>> {
    System::nilpotent(m, 1)
}

/// `1 + u`.
pub fn vector_element(target: &Arc<System>, u: &[f64]) -> Tensor {
    Tensor::from_level_one(target, u)
}

/// `β_s(a, v) = σ₀(v) + L_s(g_s⁻¹ a (v − σ₀(v)))` with one kernel matrix per grid time.
///
/// Kernels are stored column-major: column `σ` is `L_s e_σ ∈ R^m`.
#[derive(Clone)]
pub struct LinearForm {
    base: Arc<SampledGroupPath>,
    target: Arc<System>,
    m: usize,
    kernels: Vec<Arc<[f64]>>,
}

impl LinearForm {
    pub fn new(base: Arc<SampledGroupPath>, m: usize, kernels: Vec<Vec<f64>>) -> Result<Self> {
        let dim = base.sys().dim();
        if kernels.len() != base.len() {
            return Err(Error::Mismatch(format!(
                "{} kernels for {} grid times",
                kernels.len(),
                base.len()
            )));
        }
        if let Some(k) = kernels.iter().find(|k| k.len() != m * dim) {
            return Err(Error::Mismatch(format!(
                "kernel of length {} where {m}x{dim} was expected",
                k.len()
            )));
        }
        Ok(LinearForm {
            target: vector_target(m)?,
            base,
            m,
            kernels: kernels.into_iter().map(Arc::from).collect(),
        })
    }

    pub fn constant(base: Arc<SampledGroupPath>, m: usize, kernel: Vec<f64>) -> Result<Self> {
        let dim = base.sys().dim();
        if kernel.len() != m * dim {
            return Err(Error::Mismatch(format!(
                "kernel of length {} where {m}x{dim} was expected",
                kernel.len()
            )));
        }
        let k: Arc<[f64]> = Arc::from(kernel);
        Ok(LinearForm {
            target: vector_target(m)?,
            kernels: vec![k; base.len()],
            base,
            m,
        })
    }

    pub fn zero(base: Arc<SampledGroupPath>, m: usize) -> Result<Self> {
        let dim = base.sys().dim();
        LinearForm::constant(base, m, vec![0.0; m * dim])
    }

    /// The projection onto degree one: `β(a, b) = π₁(b)` in `R^d`.
    pub fn level_one(base: Arc<SampledGroupPath>) -> Result<Self> {
        let sys = base.sys().clone();
        let d = sys.d();
        let mut k = vec![0.0; d * sys.dim()];
        for i in 0..d {
            k[sys.letter(i) * d + i] = 1.0;
        }
        LinearForm::constant(base, d, k)
    }

    pub fn base(&self) -> &Arc<SampledGroupPath> {
        &self.base
    }

    pub fn dim_out(&self) -> usize {
        self.m
    }

    pub fn kernel(&self, s: usize) -> &[f64] {
        &self.kernels[s]
    }

    pub fn column(&self, s: usize, sigma: usize) -> &[f64] {
        &self.kernels[s][sigma * self.m..(sigma + 1) * self.m]
    }

    /// `L_s w` over the positive-degree part of `w`.
    pub fn eval(&self, s: usize, w: &Tensor) -> Vec<f64> {
        let k = &self.kernels[s];
        let mut out = vec![0.0; self.m];
        for (sigma, &c) in w.coeffs().iter().enumerate().skip(1) {
            if c != 0.0 {
                for (o, l) in out.iter_mut().zip(&k[sigma * self.m..(sigma + 1) * self.m]) {
                    *o += c * l;
                }
            }
        }
        out
    }

    /// `β_s(g_s, g_{s,t})` as a vector.
    pub fn step(&self, s: usize, t: usize) -> Vec<f64> {
        self.eval(s, &self.base.increment(s, t))
    }

    fn same_shape(&self, other: &LinearForm) -> Result<()> {
        if !Arc::ptr_eq(&self.base, &other.base) && self.base.len() != other.base.len()
            || self.m != other.m
        {
            return Err(Error::Mismatch(
                "forms over different bases or targets".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &LinearForm) -> Result<Self> {
        self.same_shape(other)?;
        let kernels = self
            .kernels
            .iter()
            .zip(&other.kernels)
            .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| x + y).collect())
            .collect();
        LinearForm::new(self.base.clone(), self.m, kernels)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        let kernels = self
            .kernels
            .iter()
            .map(|a| a.iter().map(|x| c * x).collect())
            .collect();
        LinearForm::new(self.base.clone(), self.m, kernels)
    }

    /// Restrict the kernels to columns of degree at most `m`.
    pub fn truncated_kernels(&self, m: usize) -> Result<Vec<Vec<f64>>> {
        let sys = self.base.sys().at_level(m)?;
        Ok(self
            .kernels
            .iter()
            .map(|k| k[..sys.dim() * self.m].to_vec())
            .collect())
    }
}

impl CocyclicForm for LinearForm {
    fn domain(&self) -> &Arc<System> {
        self.base.sys()
    }

    fn target(&self) -> &Arc<System> {
        &self.target
    }

    fn apply(&self, s: usize, a: &Tensor, v: &Tensor) -> Result<Tensor> {
        check_domain(self.domain(), a, "base point")?;
        check_domain(self.domain(), v, "direction")?;
        let w = self
            .base
            .inverse(s)
            .mul_unchecked(&a.mul_unchecked(&v.augmentation()));
        let mut out = vector_element(&self.target, &self.eval(s, &w));
        out.coeffs_mut()[0] = v.scalar();
        Ok(out)
    }
}

type Alpha = dyn Fn(usize, &Tensor) -> Result<Tensor> + Send + Sync;

/// `β_s(a, b) = α_s(a)⁻¹ α_s(ab)` for linear maps `α_s` carrying the group into the target group.
pub struct AlphaForm {
    domain: Arc<System>,
    target: Arc<System>,
    alpha: Box<Alpha>,
}

impl AlphaForm {
    /// Probes must map into the target group; checked with a loose grouplike tolerance.
    pub fn new(
        domain: Arc<System>,
        target: Arc<System>,
        alpha: Box<Alpha>,
        probes: &[Tensor],
    ) -> Result<Self> {
        let form = AlphaForm {
            domain,
            target,
            alpha,
        };
        for (i, p) in probes.iter().enumerate() {
            let img = (form.alpha)(0, p)?;
            if **img.sys() != *form.target {
                return Err(Error::Mismatch(format!(
                    "alpha maps probe {i} into {:?}",
                    img.sys()
                )));
            }
            if !img.is_grouplike(1e-9) {
                return Err(Error::Domain(format!(
                    "alpha maps probe {i} outside the target group"
                )));
            }
        }
        Ok(form)
    }

    /// `α = 1_m`, so `β(a, b) = 1_m(b)`.
    pub fn truncation(domain: Arc<System>, m: usize) -> Result<Self> {
        let target = domain.at_level(m)?;
        Ok(AlphaForm {
            domain,
            target,
            alpha: Box::new(move |_, a| a.truncate(m)),
        })
    }

    /// `α = id`, so `β(a, b) = b`.
    pub fn identity(domain: Arc<System>) -> Self {
        AlphaForm {
            target: domain.clone(),
            domain,
            alpha: Box::new(|_, a| Ok(a.clone())),
        }
    }

    /// `α_s(a) = g_s⁻¹ a`, zero-padded one level up.
    pub fn level_raising(base: Arc<SampledGroupPath>) -> Result<Self> {
        let domain = base.sys().clone();
        let up = domain.n() + 1;
        let target = domain.at_level(up)?;
        Ok(AlphaForm {
            domain,
            target,
            alpha: Box::new(move |s, a| base.inverse(s).mul_unchecked(a).pad(up)),
        })
    }
}

impl CocyclicForm for AlphaForm {
    fn domain(&self) -> &Arc<System> {
        &self.domain
    }

    fn target(&self) -> &Arc<System> {
        &self.target
    }

    fn apply(&self, s: usize, a: &Tensor, v: &Tensor) -> Result<Tensor> {
        check_domain(&self.domain, a, "base point")?;
        check_domain(&self.domain, v, "direction")?;
        let left = (self.alpha)(s, a)?.inverse()?;
        left.mul(&(self.alpha)(s, &a.mul_unchecked(v))?)
    }
}

/// `max ‖β(a,b)β(ab,c) − β(a,bc)‖` over the given triples at grid time `s`.
pub fn cocycle_residual(
    form: &dyn CocyclicForm,
    s: usize,
    triples: &[(Tensor, Tensor, Tensor)],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (a, b, c) in triples {
        let lhs = form.apply(s, a, b)?.mul(&form.apply(s, &a.mul(b)?, c)?)?;
        let rhs = form.apply(s, a, &b.mul(c)?)?;
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    Ok(worst)
}
