//! Iterated integrals, products and compositions of dominated paths.

use rayon::prelude::*;

use super::{kron, kron_add, same_base, DominatedPath};
use crate::algebra::maps::{map_i_basis, star_basis};
use crate::error::{Error, Result};
use crate::forms::{LinearForm, Smooth};

/// `∫ (γ¹_u − γ¹_0) ⊗ dγ²_u` with kernel
/// `L_s e_σ = (γ¹_s − γ¹_0) ⊗ L²_s e_σ + (L¹_s ⊗ L²_s) I(e_σ)`.
pub fn iterated_integral(d1: &DominatedPath, d2: &DominatedPath) -> Result<DominatedPath> {
    same_base(d1.form(), d2.form())?;
    let g = d1.base().clone();
    let sys = g.sys().clone();
    let images = (0..sys.dim())
        .map(|i| map_i_basis(&sys, i))
        .collect::<Result<Vec<_>>>()?;
    let (m1, m2) = (d1.dim(), d2.dim());
    let m = m1 * m2;
    let kernels = (0..g.len())
        .into_par_iter()
        .map(|s| {
            let (l1, l2) = (d1.form(), d2.form());
            let run: Vec<f64> = d1
                .trace(s)
                .iter()
                .zip(d1.h0())
                .map(|(a, b)| a - b)
                .collect();
            let mut k = vec![0.0; m * sys.dim()];
            for (sigma, img) in images.iter().enumerate().skip(1) {
                let col = &mut k[sigma * m..(sigma + 1) * m];
                kron_add(col, 1.0, &run, l2.column(s, sigma));
                for (key, c) in img {
                    kron_add(col, *c, l1.column(s, key[0]), l2.column(s, key[1]));
                }
            }
            k
        })
        .collect();
    DominatedPath::from_form(LinearForm::new(g, m, kernels)?)
}

/// The three summands of the product kernel:
/// `L¹_s ⊗ γ²_s`, `γ¹_s ⊗ L²_s` and `(L¹_s ⊗ L²_s) ∘ (σ₁ ∗ σ₂)`.
pub fn product_parts(d1: &DominatedPath, d2: &DominatedPath) -> Result<[LinearForm; 3]> {
    same_base(d1.form(), d2.form())?;
    let g = d1.base().clone();
    let sys = g.sys().clone();
    let stars: Vec<_> = (0..sys.dim()).map(|i| star_basis(&sys, i, 2)).collect();
    let m = d1.dim() * d2.dim();
    let dim = sys.dim();
    let parts: Vec<[Vec<f64>; 3]> = (0..g.len())
        .into_par_iter()
        .map(|s| {
            let (l1, l2) = (d1.form(), d2.form());
            let mut k = [vec![0.0; m * dim], vec![0.0; m * dim], vec![0.0; m * dim]];
            for sigma in 1..dim {
                let r = sigma * m..(sigma + 1) * m;
                kron_add(&mut k[0][r.clone()], 1.0, l1.column(s, sigma), d2.trace(s));
                kron_add(&mut k[1][r.clone()], 1.0, d1.trace(s), l2.column(s, sigma));
                for (key, c) in &stars[sigma] {
                    kron_add(
                        &mut k[2][r.clone()],
                        *c,
                        l1.column(s, key[0]),
                        l2.column(s, key[1]),
                    );
                }
            }
            k
        })
        .collect();
    let mut out = Vec::with_capacity(3);
    for q in 0..3 {
        let kernels = parts.iter().map(|p| p[q].clone()).collect();
        out.push(LinearForm::new(g.clone(), m, kernels)?);
    }
    Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
}

/// `γ¹ ⊗ γ²` as a dominated path. The trace is exact when every pair of
/// non-zero kernel columns has degree sum at most the base level.
pub fn product(d1: &DominatedPath, d2: &DominatedPath) -> Result<DominatedPath> {
    let [a, b, c] = product_parts(d1, d2)?;
    DominatedPath::new(a.add(&b)?.add(&c)?, kron(d1.h0(), d2.h0()))
}

/// Contract the last slots of `D^l f` (row-major, `out × m^l`) with `vs`.
fn contract(mut t: Vec<f64>, vs: &[&[f64]]) -> Vec<f64> {
    for v in vs.iter().rev() {
        let m = v.len();
        t = t
            .chunks(m)
            .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
            .collect();
    }
    t
}

/// `f(X)` for `f : R^m → R^w` with `γ > p`. Kernel
/// `L̂_s e_σ = Σ_l (1/l!) D^l f(X_s)[(L_s ⊗ ⋯ ⊗ L_s)(σ₁ ∗ ⋯ ∗ σ_l)(e_σ)]`;
/// the trace is `f(X_t) − f(0)`.
pub fn compose(d: &DominatedPath, f: &dyn Smooth, p: f64) -> Result<DominatedPath> {
    if !(f.gamma() > p) {
        return Err(Error::Certificate(format!(
            "composition needs gamma > p, got gamma = {} and p = {p}",
            f.gamma()
        )));
    }
    let m = d.dim();
    if f.dim_in() != m {
        return Err(Error::Mismatch(format!(
            "function on R^{} composed with a path in R^{m}",
            f.dim_in()
        )));
    }
    let g = d.base().clone();
    let sys = g.sys().clone();
    let n = sys.n();
    let w = f.dim_out();
    let stars: Vec<Vec<_>> = (1..=n)
        .map(|l| (0..sys.dim()).map(|i| star_basis(&sys, i, l)).collect())
        .collect();
    let kernels = (0..g.len())
        .into_par_iter()
        .map(|s| {
            let x = d.trace(s);
            let mut k = vec![0.0; w * sys.dim()];
            let mut fact = 1.0;
            for l in 1..=n {
                fact *= l as f64;
                let df = f.deriv(l, x);
                for sigma in 1..sys.dim() {
                    for (key, c) in &stars[l - 1][sigma] {
                        let vs: Vec<&[f64]> = key.iter().map(|&q| d.form().column(s, q)).collect();
                        for (o, v) in k[sigma * w..(sigma + 1) * w]
                            .iter_mut()
                            .zip(contract(df.clone(), &vs))
                        {
                            *o += c * v / fact;
                        }
                    }
                }
            }
            k
        })
        .collect();
    let zero = vec![0.0; m];
    let h0 = f
        .deriv(0, d.h0())
        .iter()
        .zip(f.deriv(0, &zero))
        .map(|(a, b)| a - b)
        .collect();
    DominatedPath::new(LinearForm::new(g, w, kernels)?, h0)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::forms::Polynomial;
    use crate::paths::SampledGroupPath;

    fn line(n: usize, level: usize) -> Arc<SampledGroupPath> {
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect();
        Arc::new(SampledGroupPath::signature(level, &pts).unwrap())
    }

    #[test]
    fn iterated_integral_of_the_line() {
        let g = line(9, 2);
        let x = DominatedPath::from_form(LinearForm::level_one(g.clone()).unwrap()).unwrap();
        let xx = iterated_integral(&x, &x).unwrap();
        assert!((xx.trace(8)[0] - 0.5).abs() < 1e-14);
        let zero = DominatedPath::from_form(LinearForm::zero(g.clone(), 1).unwrap()).unwrap();
        assert_eq!(iterated_integral(&x, &zero).unwrap().trace(8)[0], 0.0);
    }

    #[test]
    fn product_and_integration_by_parts_on_the_line() {
        let g = line(9, 2);
        let x = DominatedPath::from_form(LinearForm::level_one(g.clone()).unwrap()).unwrap();
        let xx = product(&x, &x).unwrap();
        assert!((xx.trace(8)[0] - 1.0).abs() < 1e-14);
        assert!((2.0 * iterated_integral(&x, &x).unwrap().trace(8)[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn compose_square() {
        let pts: Vec<Vec<f64>> = (0..17)
            .map(|i| {
                let t = i as f64 / 16.0;
                vec![t.sin(), t * t]
            })
            .collect();
        let g = Arc::new(SampledGroupPath::signature(2, &pts).unwrap());
        let x =
            DominatedPath::new(LinearForm::level_one(g.clone()).unwrap(), vec![0.3, 0.0]).unwrap();
        // f(x) = x1^2 + x1 x2
        let f = Polynomial::new(
            2,
            1,
            vec![vec![0.0], vec![0.0, 0.0], vec![2.0, 1.0, 1.0, 0.0]],
        )
        .unwrap();
        let y = compose(&x, &f, 2.0).unwrap();
        for t in 0..17 {
            let v = x.trace(t);
            assert!((y.trace(t)[0] - (v[0] * v[0] + v[0] * v[1])).abs() < 1e-13);
        }
    }
}
