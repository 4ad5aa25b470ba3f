//! The polynomial cocyclic lift: a polynomial one-form `p` on `R^d` with values
//! in `L(R^d, R^e)` becomes a time-constant cocyclic form with values in the
//! step-`m` group over `R^e`.
//!
//! For target words `(u₁,…,u_k)` the coefficient of `P(a, v)` is
//!
//! `Σ_{l₁..l_k} Σ_w v[w] Σ_ρ Π_i D^{l_i} p(x)[u_i][j_i][w|ρ_i without its last letter]`
//!
//! where `x = π₁(a)`, `ρ` runs over ordered shuffles of block sizes `l_i + 1`
//! and `j_i` is the last letter of block `i`. Equality with the signature of the
//! integral path is exact once the domain level reaches `m·(deg p + 1)`; below
//! that longer words are dropped and the form is only approximately cocyclic.

use std::sync::Arc;

use super::smooth::{Polynomial, Smooth};
use super::{check_domain, CocyclicForm};
use crate::algebra::{words, Kind, System, Tensor};
use crate::error::{Error, Result};

pub struct PolynomialForm {
    domain: Arc<System>,
    target: Arc<System>,
    p: Polynomial,
    e: usize,
    // (l_1..l_k, ordered shuffles of sizes l_i + 1)
    shapes: Vec<(Vec<usize>, Vec<Vec<usize>>)>,
}

fn tuples(k: usize, max: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in tuples(k - 1, max) {
        for l in 0..=max {
            let mut t = rest.clone();
            t.push(l);
            out.push(t);
        }
    }
    out
}

impl PolynomialForm {
    /// `p` has `dim_out = e·d` laid out `[u][j]`; the form acts on step-`domain_level` words.
    pub fn new(p: Polynomial, e: usize, domain_level: usize, target_level: usize) -> Result<Self> {
        let d = p.dim_in();
        if p.dim_out() != e * d {
            return Err(Error::Mismatch(format!(
                "polynomial has {} outputs, expected {e}x{d}",
                p.dim_out()
            )));
        }
        let domain = System::get(Kind::Nilpotent, d, domain_level)?;
        let target = System::get(Kind::Nilpotent, e, target_level)?;
        let mut shapes = Vec::new();
        for k in 1..=target_level {
            for ls in tuples(k, p.degree()) {
                let sizes: Vec<usize> = ls.iter().map(|l| l + 1).collect();
                if sizes.iter().sum::<usize>() <= domain_level {
                    let os = words::ordered_shuffles(&sizes);
                    shapes.push((ls, os));
                }
            }
        }
        Ok(PolynomialForm {
            domain,
            target,
            p,
            e,
            shapes,
        })
    }

    /// Domain level at which the lift is exactly cocyclic.
    pub fn exact_level(&self) -> usize {
        self.target.n() * (self.p.degree() + 1)
    }
}

impl CocyclicForm for PolynomialForm {
    fn domain(&self) -> &Arc<System> {
        &self.domain
    }

    fn target(&self) -> &Arc<System> {
        &self.target
    }

    fn apply(&self, _s: usize, a: &Tensor, v: &Tensor) -> Result<Tensor> {
        check_domain(&self.domain, a, "base point")?;
        check_domain(&self.domain, v, "direction")?;
        let dom = &*self.domain;
        let d = dom.d();
        let e = self.e;
        let x = a.level_one();
        let derivs: Vec<Vec<f64>> = (0..=self.p.degree()).map(|l| self.p.deriv(l, &x)).collect();
        let mut out = Tensor::zero(&self.target);
        out.coeffs_mut()[0] = v.scalar();
        for (ls, shuffles) in &self.shapes {
            let k = ls.len();
            let len: usize = ls.iter().map(|l| l + 1).sum();
            let base = self.target.block(k).start;
            for w in dom.block(len) {
                let c = v.get(w);
                if c == 0.0 {
                    continue;
                }
                let letters = dom.word(w);
                for assign in shuffles {
                    let parts = words::split(&letters, assign, k);
                    // running outer product over blocks, indexed by the target word so far
                    let mut acc = vec![c];
                    for (part, &l) in parts.iter().zip(ls) {
                        let j = part[l];
                        let slot = part[..l].iter().fold(0, |s, &i| s * d + i);
                        let width = d.pow(l as u32);
                        let col: Vec<f64> = (0..e)
                            .map(|u| derivs[l][(u * d + j) * width + slot])
                            .collect();
                        acc = acc
                            .iter()
                            .flat_map(|x| col.iter().map(move |y| x * y))
                            .collect();
                    }
                    for (q, val) in acc.into_iter().enumerate() {
                        out.coeffs_mut()[base + q] += val;
                    }
                }
            }
        }
        Ok(out)
    }
}
