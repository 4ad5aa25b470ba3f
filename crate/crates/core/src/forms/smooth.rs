//! Functions with derivative stacks: `D^l f(x)` as flat arrays of shape `out × in^l`,
//! the last `l` slots holding the differentiation directions.

use std::sync::Arc;

use crate::error::{Error, Result};

pub trait Smooth: Sync + Send {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    /// Lipschitz regularity `γ`.
    fn gamma(&self) -> f64;
    /// `D^l f(x)`; zero beyond the available order.
    fn deriv(&self, l: usize, x: &[f64]) -> Vec<f64>;
}

/// A polynomial given by its derivatives at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    d: usize,
    out: usize,
    derivs: Vec<Vec<f64>>,
}

impl Polynomial {
    pub fn new(d: usize, out: usize, derivs: Vec<Vec<f64>>) -> Result<Self> {
        if derivs.is_empty() {
            return Err(Error::Domain(
                "a polynomial needs at least its value at the origin".into(),
            ));
        }
        for (l, a) in derivs.iter().enumerate() {
            let want = out * d.pow(l as u32);
            if a.len() != want {
                return Err(Error::Mismatch(format!(
                    "derivative {l} has {} entries, expected {want}",
                    a.len()
                )));
            }
            if let Some(defect) = asymmetry(a, d, l).filter(|x| *x > 1e-12) {
                return Err(Error::Domain(format!(
                    "derivative {l} is not symmetric (defect {defect:e})"
                )));
            }
        }
        Ok(Polynomial { d, out, derivs })
    }

    /// `u ↦ A u` for an `out × d` row-major matrix.
    pub fn linear(d: usize, out: usize, a: Vec<f64>) -> Result<Self> {
        Polynomial::new(d, out, vec![vec![0.0; out], a])
    }

    pub fn degree(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn derivatives(&self) -> &[Vec<f64>] {
        &self.derivs
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        self.deriv(0, x)
    }
}

/// Contract the last `r` slots of `a` (shape `rows × d^r`) with `x`.
fn contract(a: &[f64], x: &[f64], r: usize) -> Vec<f64> {
    let mut cur = a.to_vec();
    for _ in 0..r {
        let d = x.len();
        cur = cur
            .chunks(d)
            .map(|c| c.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect();
    }
    cur
}

/// Largest difference under swapping adjacent derivative slots.
fn asymmetry(a: &[f64], d: usize, l: usize) -> Option<f64> {
    if l < 2 {
        return None;
    }
    let block = d.pow(l as u32);
    let mut worst = 0.0f64;
    for chunk in a.chunks(block) {
        for idx in 0..block {
            let mut digits = vec![0; l];
            let mut v = idx;
            for q in (0..l).rev() {
                digits[q] = v % d;
                v /= d;
            }
            for q in 0..l - 1 {
                let mut sw = digits.clone();
                sw.swap(q, q + 1);
                let j = sw.iter().fold(0, |acc, &x| acc * d + x);
                worst = worst.max((chunk[idx] - chunk[j]).abs());
            }
        }
    }
    Some(worst)
}

/// Largest slot-swap asymmetry of `D^l f(x)`.
pub fn symmetry_defect(f: &dyn Smooth, l: usize, x: &[f64]) -> f64 {
    asymmetry(&f.deriv(l, x), f.dim_in(), l).unwrap_or(0.0)
}

impl Smooth for Polynomial {
    fn dim_in(&self) -> usize {
        self.d
    }

    fn dim_out(&self) -> usize {
        self.out
    }

    fn gamma(&self) -> f64 {
        f64::INFINITY
    }

    fn deriv(&self, l: usize, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out * self.d.pow(l as u32)];
        let mut fact = 1.0;
        for r in 0..self.derivs.len().saturating_sub(l) {
            if r > 0 {
                fact *= r as f64;
            }
            for (o, v) in out.iter_mut().zip(contract(&self.derivs[l + r], x, r)) {
                *o += v / fact;
            }
        }
        out
    }
}

type DerivFn = dyn Fn(usize, &[f64]) -> Vec<f64> + Send + Sync;

/// A function described by a closure returning `D^l f(x)` for `l ≤ order`.
#[derive(Clone)]
pub struct FnSmooth {
    d: usize,
    out: usize,
    gamma: f64,
    order: usize,
    f: Arc<DerivFn>,
}

impl FnSmooth {
    pub fn new(d: usize, out: usize, gamma: f64, order: usize, f: Arc<DerivFn>) -> Self {
        FnSmooth {
            d,
            out,
            gamma,
            order,
            f,
        }
    }
}

impl Smooth for FnSmooth {
    fn dim_in(&self) -> usize {
        self.d
    }

    fn dim_out(&self) -> usize {
        self.out
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn deriv(&self, l: usize, x: &[f64]) -> Vec<f64> {
        if l > self.order {
            return vec![0.0; self.out * self.d.pow(l as u32)];
        }
        (self.f)(l, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_in_one_variable() {
        // p(x) = 1 + 2x + 3x² + 4x³, derivatives at 0: 1, 2, 6, 24
        let p = Polynomial::new(1, 1, vec![vec![1.0], vec![2.0], vec![6.0], vec![24.0]]).unwrap();
        let x = 0.7;
        assert!((p.value(&[x])[0] - (1.0 + 2.0 * x + 3.0 * x * x + 4.0 * x * x * x)).abs() < 1e-14);
        assert!((p.deriv(1, &[x])[0] - (2.0 + 6.0 * x + 12.0 * x * x)).abs() < 1e-14);
        assert!((p.deriv(2, &[x])[0] - (6.0 + 24.0 * x)).abs() < 1e-14);
        assert_eq!(p.deriv(4, &[x]), vec![0.0]);
    }

    #[test]
    fn two_variable_quadratic() {
        // f(x, y) = x y: D²f = [[0,1],[1,0]]
        let p = Polynomial::new(
            2,
            1,
            vec![vec![0.0], vec![0.0, 0.0], vec![0.0, 1.0, 1.0, 0.0]],
        )
        .unwrap();
        assert!((p.value(&[2.0, 3.0])[0] - 6.0).abs() < 1e-15);
        assert_eq!(p.deriv(1, &[2.0, 3.0]), vec![3.0, 2.0]);
        assert_eq!(symmetry_defect(&p, 2, &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn asymmetric_derivative_rejected() {
        assert!(Polynomial::new(
            2,
            1,
            vec![vec![0.0], vec![0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]]
        )
        .is_err());
        assert!(Polynomial::new(2, 1, vec![vec![0.0], vec![0.0]]).is_err());
    }
}
