//! Sparse elements of the product spaces `T ⊗ ⋯ ⊗ T`, keyed by index tuples.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::system::System;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Multi {
    sys: Arc<System>,
    arity: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl Multi {
    pub fn zero(sys: &Arc<System>, arity: usize) -> Multi {
        Multi {
            sys: sys.clone(),
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn sys(&self) -> &Arc<System> {
        &self.sys
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &f64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, key: &[usize]) -> f64 {
        self.terms.get(key).copied().unwrap_or(0.0)
    }

    pub fn push(&mut self, key: Vec<usize>, c: f64) {
        debug_assert_eq!(key.len(), self.arity);
        if c != 0.0 {
            *self.terms.entry(key).or_insert(0.0) += c;
        }
    }

    pub fn add(&self, other: &Multi) -> Multi {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.push(k.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Multi) -> Multi {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Multi {
        Multi {
            sys: self.sys.clone(),
            arity: self.arity,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn norm_l1(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Multi) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn degrees(&self, key: &[usize]) -> Vec<usize> {
        key.iter().map(|&i| self.sys.degree(i)).collect()
    }

    pub fn filter(&self, keep: impl Fn(&[usize]) -> bool) -> Multi {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| keep(&self.degrees(k)))
            .map(|(k, c)| (k.clone(), *c))
            .collect();
        Multi {
            sys: self.sys.clone(),
            arity: self.arity,
            terms,
        }
    }

    /// `1_{n,2}`-style projection: every factor of positive degree, total at most `n`.
    pub fn project(&self) -> Multi {
        let n = self.sys.n();
        self.filter(|deg| deg.iter().all(|&k| k >= 1) && deg.iter().sum::<usize>() <= n)
    }

    /// The primed projection: the last factor has degree one.
    pub fn project_prime(&self) -> Multi {
        let n = self.sys.n();
        self.filter(|deg| {
            deg[..deg.len() - 1].iter().all(|&k| k >= 1)
                && deg[deg.len() - 1] == 1
                && deg.iter().sum::<usize>() <= n
        })
    }

    /// `Σ σ(a) τ(b) e_σ ⊗ e_τ` over all non-zero coefficient pairs.
    pub fn outer(a: &Tensor, b: &Tensor) -> Result<Multi> {
        if **a.sys() != **b.sys() {
            return Err(Error::Mismatch("outer product of different systems".into()));
        }
        let mut out = Multi::zero(a.sys(), 2);
        for (i, x) in a.coeffs().iter().enumerate().filter(|(_, x)| **x != 0.0) {
            for (j, y) in b.coeffs().iter().enumerate().filter(|(_, y)| **y != 0.0) {
                out.push(vec![i, j], x * y);
            }
        }
        Ok(out)
    }

    /// Concatenate keys: `X ⊗ Y`.
    pub fn tensor(&self, other: &Multi) -> Multi {
        let mut out = Multi::zero(&self.sys, self.arity + other.arity);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let mut k = k1.clone();
                k.extend_from_slice(k2);
                out.push(k, c1 * c2);
            }
        }
        out
    }

    /// `(a ⊗ ⋯ ⊗ a) X`, discarding terms whose total degree exceeds `n`.
    pub fn left_mul(&self, a: &Tensor) -> Result<Multi> {
        if **a.sys() != *self.sys {
            return Err(Error::Mismatch(
                "factorwise product with a foreign element".into(),
            ));
        }
        let n = self.sys.n();
        let mut columns: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
        let mut out = Multi::zero(&self.sys, self.arity);
        for (key, c) in &self.terms {
            for &i in key {
                columns.entry(i).or_insert_with(|| {
                    let col = a.mul_unchecked(&Tensor::basis(&self.sys, i));
                    col.coeffs()
                        .iter()
                        .enumerate()
                        .filter(|(_, x)| **x != 0.0)
                        .map(|(j, x)| (j, *x))
                        .collect()
                });
            }
            let cols: Vec<&Vec<(usize, f64)>> = key.iter().map(|i| &columns[i]).collect();
            let mut cur = Vec::with_capacity(key.len());
            expand(&self.sys, &cols, n, *c, &mut cur, &mut out);
        }
        Ok(out)
    }
}

fn expand(
    sys: &System,
    cols: &[&Vec<(usize, f64)>],
    budget: usize,
    c: f64,
    cur: &mut Vec<usize>,
    out: &mut Multi,
) {
    let depth = cur.len();
    if depth == cols.len() {
        out.push(cur.clone(), c);
        return;
    }
    for &(j, x) in cols[depth] {
        let k = sys.degree(j);
        if k <= budget {
            cur.push(j);
            expand(sys, cols, budget - k, c * x, cur, out);
            cur.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_mul_by_unit_is_identity() {
        let s = System::nilpotent(2, 3).unwrap();
        let mut x = Multi::zero(&s, 2);
        x.push(vec![1, 2], 0.5);
        x.push(vec![3, 1], -2.0);
        let y = x.left_mul(&Tensor::unit(&s)).unwrap();
        assert_eq!(y.max_abs_diff(&x), 0.0);
    }

    #[test]
    fn projection_drops_degree_zero_and_overflow() {
        let s = System::nilpotent(1, 2).unwrap();
        let mut x = Multi::zero(&s, 2);
        x.push(vec![0, 1], 1.0);
        x.push(vec![1, 1], 1.0);
        x.push(vec![2, 1], 1.0);
        let p = x.project();
        assert_eq!(p.len(), 1);
        assert_eq!(p.get(&[1, 1]), 1.0);
    }
}
