//! One-forms for rough integration of `f(x) dx` with `f : R^d → L(R^d, R^e)`.
//!
//! Words: `L_s e_{(i₁…i_l, j)} = D^l f(x_s)[·][j][i₁…i_l]`.
//! Forests: only corollas `[•_{i₁}⋯•_{i_l}]_j` carry weight, `D^l f(x_s)[·][j][i₁…i_l]`
//! divided by the multiplicities of repeated leaves.

use std::sync::Arc;

use rayon::prelude::*;

use super::smooth::Smooth;
use super::LinearForm;
use crate::algebra::{Kind, System};
use crate::error::{Error, Result};
use crate::paths::{Control, SampledGroupPath};

fn levels_for(p: f64, base: &SampledGroupPath) -> usize {
    (p.floor() as usize).clamp(1, base.level())
}

fn check_gamma(f: &dyn Smooth, p: f64) -> Result<()> {
    if !(f.gamma() > p - 1.0) {
        return Err(Error::Certificate(format!(
            "rough integration needs gamma > p - 1, got gamma = {} and p = {p}",
            f.gamma()
        )));
    }
    Ok(())
}

/// `β_s(a, b) = Σ_{l<[p]} D^l f(x_s) π_{l+1}(g_s⁻¹ a (b − 1))`, with `x_s = π₁(g_s)`.
pub fn rough_one_form(f: &dyn Smooth, base: Arc<SampledGroupPath>, p: f64) -> Result<LinearForm> {
    let levels = levels_for(p, &base);
    let d = base.sys().d();
    rough_one_form_with(f, base, p, levels, &vec![0.0; d])
}

/// As [`rough_one_form`] with an explicit number of levels and `x_s = origin + π₁(g_s)`.
pub fn rough_one_form_with(
    f: &dyn Smooth,
    base: Arc<SampledGroupPath>,
    p: f64,
    levels: usize,
    origin: &[f64],
) -> Result<LinearForm> {
    check_gamma(f, p)?;
    let fs: Vec<&dyn Smooth> = vec![f; base.len()];
    build(&fs, base, levels, origin)
}

/// Time-varying forms: a different function at every grid time.
pub fn time_varying_rough_one_form(
    fs: &[Arc<dyn Smooth>],
    base: Arc<SampledGroupPath>,
    p: f64,
    origin: &[f64],
) -> Result<LinearForm> {
    if fs.len() != base.len() {
        return Err(Error::Mismatch(format!(
            "{} functions for {} grid times",
            fs.len(),
            base.len()
        )));
    }
    for f in fs {
        check_gamma(f.as_ref(), p)?;
    }
    let levels = levels_for(p, &base);
    let refs: Vec<&dyn Smooth> = fs.iter().map(|f| f.as_ref()).collect();
    build(&refs, base, levels, origin)
}

fn build(
    fs: &[&dyn Smooth],
    base: Arc<SampledGroupPath>,
    levels: usize,
    origin: &[f64],
) -> Result<LinearForm> {
    let sys = base.sys().clone();
    let d = sys.d();
    let f0 = fs[0];
    if f0.dim_in() != d || f0.dim_out() % d != 0 {
        return Err(Error::Mismatch(format!(
            "function R^{} -> R^{} does not act as a one-form on R^{d}",
            f0.dim_in(),
            f0.dim_out()
        )));
    }
    if origin.len() != d {
        return Err(Error::Mismatch("origin has the wrong dimension".into()));
    }
    if levels == 0 || levels > sys.n() {
        return Err(Error::Domain(format!("levels must lie in 1..={}", sys.n())));
    }
    let e = f0.dim_out() / d;
    let kernels = (0..base.len())
        .into_par_iter()
        .map(|s| {
            let x: Vec<f64> = base
                .level_one(s)
                .iter()
                .zip(origin)
                .map(|(a, b)| a + b)
                .collect();
            kernel(&sys, fs[s], &x, e, levels)
        })
        .collect();
    LinearForm::new(base, e, kernels)
}

fn kernel(sys: &System, f: &dyn Smooth, x: &[f64], e: usize, levels: usize) -> Vec<f64> {
    let d = sys.d();
    let mut k = vec![0.0; e * sys.dim()];
    for l in 0..levels {
        let df = f.deriv(l, x);
        let width = d.pow(l as u32);
        match sys.kind() {
            Kind::Nilpotent => {
                for w in sys.block(l + 1) {
                    let letters = sys.word(w);
                    let j = letters[l];
                    let slot = letters[..l].iter().fold(0, |s, &i| s * d + i);
                    for u in 0..e {
                        k[w * e + u] = df[(u * d + j) * width + slot];
                    }
                }
            }
            Kind::Butcher => {
                for t in sys.block(l + 1) {
                    let forest = sys.forest(t);
                    let [tree] = forest.trees() else { continue };
                    let leaves = tree.children.trees();
                    if leaves.len() != l || leaves.iter().any(|c| !c.children.is_empty()) {
                        continue;
                    }
                    let labels: Vec<usize> = leaves.iter().map(|c| c.label).collect();
                    let slot = labels.iter().fold(0, |s, &i| s * d + i);
                    let mut mult = 1.0;
                    let mut run = 1.0;
                    for q in 1..labels.len() {
                        run = if labels[q] == labels[q - 1] {
                            run + 1.0
                        } else {
                            1.0
                        };
                        mult *= run;
                    }
                    for u in 0..e {
                        k[t * e + u] = df[(u * d + tree.label) * width + slot] / mult;
                    }
                }
            }
        }
    }
    k
}

/// Outcome of the time-regularity check for a family of functions.
#[derive(Clone, Debug)]
pub struct RegularityReport {
    /// Largest `‖(D^l F_t − D^l F_s)(x_t)‖ / ω(s,t)^{θ−(l+1)/p}`.
    pub max_quotient: f64,
    /// `(s, t, l)` attaining it.
    pub worst: Option<(usize, usize, usize)>,
}

/// Check `‖(D^l F_t − D^l F_s)(x_t)‖ ≤ bound · ω(s,t)^{θ−(l+1)/p}` on every grid pair.
pub fn check_time_regularity(
    fs: &[Arc<dyn Smooth>],
    base: &SampledGroupPath,
    omega: &dyn Control,
    theta: f64,
    p: f64,
    bound: f64,
) -> Result<RegularityReport> {
    let levels = levels_for(p, base);
    let n = base.len();
    let (max_quotient, worst) = (0..n)
        .into_par_iter()
        .map(|t| {
            let x = base.level_one(t);
            let mut best = (0.0f64, None);
            for l in 0..levels {
                let now = fs[t].deriv(l, &x);
                for s in 0..t {
                    let then = fs[s].deriv(l, &x);
                    let diff: f64 = now.iter().zip(&then).map(|(a, b)| (a - b).abs()).sum();
                    let w = omega.omega(s, t);
                    let q = if diff == 0.0 {
                        0.0
                    } else {
                        diff / w.powf(theta - (l + 1) as f64 / p)
                    };
                    let q = if q.is_nan() { f64::INFINITY } else { q };
                    if q > best.0 {
                        best = (q, Some((s, t, l)));
                    }
                }
            }
            best
        })
        .reduce(|| (0.0, None), |a, b| if b.0 > a.0 { b } else { a });
    if !(max_quotient <= bound) {
        let (s, t, l) = worst.unwrap();
        return Err(Error::Certificate(format!(
            "time regularity fails at s={s}, t={t}, l={l}: quotient {max_quotient:e} above {bound:e}"
        )));
    }
    Ok(RegularityReport {
        max_quotient,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Tensor;
    use crate::forms::smooth::Polynomial;
    use crate::forms::CocyclicForm;

    #[test]
    fn linear_integrand_on_a_line() {
        // f(x) = x on R, p = 2: β = x_s Δx + Δx²/2, exact for a straight segment
        let f = Polynomial::new(1, 1, vec![vec![0.0], vec![1.0]]).unwrap();
        let g =
            Arc::new(SampledGroupPath::signature(2, &[vec![0.0], vec![0.4], vec![1.0]]).unwrap());
        let form = rough_one_form(&f, g.clone(), 2.0).unwrap();
        let total: f64 = form.step(0, 1)[0] + form.step(1, 2)[0];
        assert!((total - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gamma_threshold() {
        let f = FnSmoothStub(0.5);
        let g = Arc::new(SampledGroupPath::signature(2, &[vec![0.0], vec![1.0]]).unwrap());
        assert!(matches!(
            rough_one_form(&f, g, 2.0),
            Err(Error::Certificate(_))
        ));
    }

    struct FnSmoothStub(f64);
    impl Smooth for FnSmoothStub {
        fn dim_in(&self) -> usize {
            1
        }
        fn dim_out(&self) -> usize {
            1
        }
        fn gamma(&self) -> f64 {
            self.0
        }
        fn deriv(&self, _l: usize, _x: &[f64]) -> Vec<f64> {
            vec![0.0]
        }
    }

    #[test]
    fn butcher_corolla_weights() {
        // f(x) = A + B x on R²; the step-2 kernel carries f on •_j and ∂_i f on [•_i]_j
        let a = vec![1.0, 2.0];
        let b = vec![0.5, -1.0, 3.0, 0.25];
        let f = Polynomial::new(2, 2, vec![a.clone(), b.clone()]).unwrap();
        let base = Arc::new(
            SampledGroupPath::piecewise_linear(
                Kind::Butcher,
                2,
                vec![0.0, 1.0],
                &[vec![0.0, 0.0], vec![1.0, 1.0]],
            )
            .unwrap(),
        );
        let form = rough_one_form(&f, base.clone(), 2.5).unwrap();
        let sys = base.sys().clone();
        let tree = crate::algebra::Forest::parse("1[2]", 2).unwrap();
        let t = sys.forest_index(&tree).unwrap();
        // root label 1 is the integrator direction j = 0, leaf 2 the derivative slot i = 1
        assert_eq!(form.column(0, t), &[b[1]]);
        assert_eq!(form.column(0, sys.letter(1)), &[a[1]]);
        let v = form.apply(0, base.value(0), &Tensor::unit(&sys)).unwrap();
        assert_eq!(v.scalar(), 1.0);
    }
}
