use std::sync::Arc;

use super::system::{Kind, System};
use super::words;
use crate::error::{Error, Result};

/// A truncated algebra element: dense coefficients over the system's index set.
#[derive(Clone, Debug)]
pub struct Tensor {
    sys: Arc<System>,
    c: Vec<f64>,
}

impl Tensor {
    pub fn zero(sys: &Arc<System>) -> Tensor {
        Tensor {
            sys: sys.clone(),
            c: vec![0.0; sys.dim()],
        }
    }

    pub fn unit(sys: &Arc<System>) -> Tensor {
        let mut t = Tensor::zero(sys);
        t.c[0] = 1.0;
        t
    }

    pub fn basis(sys: &Arc<System>, i: usize) -> Tensor {
        let mut t = Tensor::zero(sys);
        t.c[i] = 1.0;
        t
    }

    pub fn from_coeffs(sys: &Arc<System>, c: Vec<f64>) -> Result<Tensor> {
        if c.len() != sys.dim() {
            return Err(Error::Mismatch(format!(
                "{} coefficients for a system of dimension {}",
                c.len(),
                sys.dim()
            )));
        }
        Ok(Tensor {
            sys: sys.clone(),
            c,
        })
    }

    /// `1 + Σ v_i e_i`.
    pub fn from_level_one(sys: &Arc<System>, v: &[f64]) -> Tensor {
        let mut t = Tensor::unit(sys);
        for (i, x) in v.iter().enumerate() {
            t.c[sys.letter(i)] = *x;
        }
        t
    }

    pub fn sys(&self) -> &Arc<System> {
        &self.sys
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.c
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.c
    }

    pub fn get(&self, i: usize) -> f64 {
        self.c[i]
    }

    pub fn scalar(&self) -> f64 {
        self.c[0]
    }

    pub fn level(&self) -> usize {
        self.sys.n()
    }

    /// Degree-one coordinates.
    pub fn level_one(&self) -> Vec<f64> {
        (0..self.sys.d())
            .map(|i| self.c[self.sys.letter(i)])
            .collect()
    }

    pub fn block(&self, k: usize) -> &[f64] {
        &self.c[self.sys.block(k)]
    }

    fn same(&self, other: &Tensor) -> Result<()> {
        if Arc::ptr_eq(&self.sys, &other.sys) || *self.sys == *other.sys {
            Ok(())
        } else {
            Err(Error::Mismatch(format!(
                "{:?} against {:?}",
                self.sys, other.sys
            )))
        }
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        self.same(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, b: &Tensor) -> Tensor {
        let s = &*self.sys;
        let a = &self.c;
        let b = &b.c;
        let mut out = vec![0.0; s.dim()];
        match s.kind() {
            Kind::Nilpotent => {
                for k in 0..=s.n() {
                    let ok = s.block(k).start;
                    for i in 0..=k {
                        let ra = s.block(i);
                        let rb = s.block(k - i);
                        let width = rb.len();
                        for (ia, &x) in a[ra].iter().enumerate() {
                            if x == 0.0 {
                                continue;
                            }
                            let dst = &mut out[ok + ia * width..ok + (ia + 1) * width];
                            for (o, &y) in dst.iter_mut().zip(&b[rb.clone()]) {
                                *o += x * y;
                            }
                        }
                    }
                }
            }
            Kind::Butcher => {
                for (sigma, o) in out.iter_mut().enumerate() {
                    let mut acc = a[sigma] * b[0] + a[0] * b[sigma];
                    if sigma == 0 {
                        acc = a[0] * b[0];
                    }
                    for &(l, r, m) in s.coproduct(sigma) {
                        acc += a[l] * b[r] * m;
                    }
                    *o = acc;
                }
            }
        }
        Tensor {
            sys: self.sys.clone(),
            c: out,
        }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.same(other)?;
        Ok(self.zip(other, |x, y| x + y))
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.same(other)?;
        Ok(self.zip(other, |x, y| x - y))
    }

    fn zip(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
        Tensor {
            sys: self.sys.clone(),
            c: self
                .c
                .iter()
                .zip(&other.c)
                .map(|(x, y)| f(*x, *y))
                .collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Tensor {
        Tensor {
            sys: self.sys.clone(),
            c: self.c.iter().map(|x| x * k).collect(),
        }
    }

    /// `a - σ₀(a)·1`.
    pub fn augmentation(&self) -> Tensor {
        let mut t = self.clone();
        t.c[0] = 0.0;
        t
    }

    fn require_scalar(&self, want: f64, what: &str) -> Result<()> {
        if (self.c[0] - want).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "{what} needs degree-0 coefficient {want}, got {}",
                self.c[0]
            )));
        }
        Ok(())
    }

    /// Truncated Neumann series `Σ (1-a)^k`.
    pub fn inverse(&self) -> Result<Tensor> {
        self.require_scalar(1.0, "inverse")?;
        let x = self.augmentation();
        let one = Tensor::unit(&self.sys);
        let mut r = one.clone();
        for _ in 0..self.sys.n() {
            r = one.zip(&x.mul_unchecked(&r), |u, v| u - v);
        }
        Ok(r)
    }

    pub fn log(&self) -> Result<Tensor> {
        self.require_scalar(1.0, "log")?;
        let x = self.augmentation();
        let mut power = x.clone();
        let mut out = x.clone();
        for k in 2..=self.sys.n() {
            power = power.mul_unchecked(&x);
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            for (o, p) in out.c.iter_mut().zip(&power.c) {
                *o += sign * p / k as f64;
            }
        }
        Ok(out)
    }

    pub fn exp(&self) -> Result<Tensor> {
        self.require_scalar(0.0, "exp")?;
        let one = Tensor::unit(&self.sys);
        let mut r = one.clone();
        for k in (1..=self.sys.n()).rev() {
            r = one.zip(&self.mul_unchecked(&r), |u, v| u + v / k as f64);
        }
        Ok(r)
    }

    /// `δ_c`: degree-`k` coefficients scale by `c^k`.
    pub fn dilate(&self, c: f64) -> Tensor {
        let mut t = self.clone();
        for k in 1..=self.sys.n() {
            let f = c.powi(k as i32);
            for x in &mut t.c[self.sys.block(k)] {
                *x *= f;
            }
        }
        t
    }

    pub fn truncate(&self, m: usize) -> Result<Tensor> {
        if m > self.sys.n() {
            return Err(Error::Domain(format!(
                "cannot truncate level {} to {m}",
                self.sys.n()
            )));
        }
        let sys = self.sys.at_level(m)?;
        let c = self.c[..sys.dim()].to_vec();
        Ok(Tensor { sys, c })
    }

    /// Zero-extension into a higher level.
    pub fn pad(&self, m: usize) -> Result<Tensor> {
        if m < self.sys.n() {
            return Err(Error::Domain(format!(
                "cannot pad level {} to {m}",
                self.sys.n()
            )));
        }
        let sys = self.sys.at_level(m)?;
        let mut c = self.c.clone();
        c.resize(sys.dim(), 0.0);
        Ok(Tensor { sys, c })
    }

    pub fn norm_l1(&self) -> f64 {
        self.c.iter().map(|x| x.abs()).sum()
    }

    /// `max_σ ‖σ(a)‖`: degree blocks for words, single coefficients for forests.
    pub fn norm_max(&self) -> f64 {
        match self.sys.kind() {
            Kind::Nilpotent => (0..=self.sys.n())
                .map(|k| self.block(k).iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            Kind::Butcher => self.c.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// `|a| = Σ_σ ‖σ(a)‖^{1/|σ|}`.
    pub fn homogeneous_norm(&self) -> f64 {
        match self.sys.kind() {
            Kind::Nilpotent => (1..=self.sys.n())
                .map(|k| {
                    self.block(k)
                        .iter()
                        .map(|x| x.abs())
                        .sum::<f64>()
                        .powf(1.0 / k as f64)
                })
                .sum(),
            Kind::Butcher => (1..self.c.len())
                .map(|i| self.c[i].abs().powf(1.0 / self.sys.degree(i) as f64))
                .sum(),
        }
    }

    /// Largest violation of the grouplike relations, relative to `max(1, |lhs|, |rhs|)`.
    pub fn grouplike_defect(&self) -> f64 {
        let s = &*self.sys;
        let rel = |l: f64, r: f64| (l - r).abs() / 1f64.max(l.abs()).max(r.abs());
        let mut worst = rel(self.c[0], 1.0);
        match s.kind() {
            Kind::Butcher => {
                for i in 1..self.c.len() {
                    let trees = s.tree_factors(i);
                    if trees.len() > 1 {
                        let prod: f64 = trees.iter().map(|&t| self.c[t]).product();
                        worst = worst.max(rel(self.c[i], prod));
                    }
                }
            }
            Kind::Nilpotent => {
                let n = s.n();
                for k1 in 1..=n / 2 {
                    for k2 in k1..=n - k1 {
                        let masks = words::assignments(&[k1, k2]);
                        for u in s.block(k1) {
                            let wu = s.word(u);
                            for v in s.block(k2) {
                                let wv = s.word(v);
                                let mut rhs = 0.0;
                                for m in &masks {
                                    let (mut p, mut q) = (0, 0);
                                    let mut idx = 0;
                                    for &b in m {
                                        let l = if b == 0 {
                                            p += 1;
                                            wu[p - 1]
                                        } else {
                                            q += 1;
                                            wv[q - 1]
                                        };
                                        idx = idx * s.d() + l;
                                    }
                                    rhs += self.c[s.block(k1 + k2).start + idx];
                                }
                                worst = worst.max(rel(self.c[u] * self.c[v], rhs));
                            }
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn is_grouplike(&self, tol: f64) -> bool {
        self.grouplike_defect() <= tol
    }

    /// A grouplike element one level up whose truncation is `self`.
    pub fn lift_into_group(&self) -> Result<Tensor> {
        if !self.is_grouplike(1e-9) {
            return Err(Error::Domain("lift needs a grouplike element".into()));
        }
        let n = self.sys.n();
        match self.sys.kind() {
            Kind::Nilpotent => {
                let mut out = self.log()?.pad(n + 1)?.exp()?;
                // keep the low levels bit-identical
                out.c[..self.c.len()].copy_from_slice(&self.c);
                Ok(out)
            }
            Kind::Butcher => {
                let mut out = self.pad(n + 1)?;
                let sys = out.sys.clone();
                for i in sys.block(n + 1) {
                    let trees = sys.tree_factors(i);
                    if trees.len() > 1 {
                        out.c[i] = trees.iter().map(|&t| self.c[t]).product();
                    }
                }
                Ok(out)
            }
        }
    }

    /// Step-`n` signature of a straight segment with increment `v`.
    pub fn segment(sys: &Arc<System>, v: &[f64]) -> Result<Tensor> {
        if v.len() != sys.d() {
            return Err(Error::Mismatch(format!(
                "increment of length {} in dimension {}",
                v.len(),
                sys.d()
            )));
        }
        match sys.kind() {
            Kind::Nilpotent => {
                let mut t = Tensor::unit(sys);
                let d = sys.d();
                for k in 1..=sys.n() {
                    let (lo, hi) = t.c.split_at_mut(sys.block(k).start);
                    let prev = &lo[sys.block(k - 1)];
                    for (ia, x) in prev.iter().enumerate() {
                        for (j, y) in v.iter().enumerate() {
                            hi[ia * d + j] = x * y / k as f64;
                        }
                    }
                }
                Ok(t)
            }
            Kind::Butcher => {
                let mut t = Tensor::unit(sys);
                for i in 1..sys.dim() {
                    let f = sys.forest(i);
                    t.c[i] = f.labels().iter().map(|&l| v[l]).product::<f64>() / f.factorial();
                }
                Ok(t)
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        self.c
            .iter()
            .zip(&other.c)
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }
}
