//! The structural maps into product spaces: `I`, `I′`, their powers and the star maps.

use std::collections::HashMap;

use super::multi::Multi;
use super::system::{Image, Kind, System};
use super::tensor::Tensor;
use super::words;
use crate::error::{Error, Result};

fn apply_table(a: &Tensor, table: &[Image], arity: usize) -> Multi {
    let mut out = Multi::zero(a.sys(), arity);
    for (i, &c) in a.coeffs().iter().enumerate() {
        if c != 0.0 {
            for (k, m) in &table[i] {
                out.push(k.clone(), c * m);
            }
        }
    }
    out
}

/// Image of one basis element under `I`.
pub fn map_i_basis(sys: &System, i: usize) -> Result<Image> {
    let t = sys.map_i_table().ok_or_else(unsupported_i)?;
    Ok(t[i].clone())
}

fn unsupported_i() -> Error {
    Error::Unsupported("map I exists for butcher systems only at step 2".into())
}

pub fn map_i(a: &Tensor) -> Result<Multi> {
    let t = a.sys().map_i_table().ok_or_else(unsupported_i)?;
    Ok(apply_table(a, &t, 2))
}

pub fn map_i_prime_basis(sys: &System, i: usize) -> Image {
    sys.map_i_prime_table()[i].clone()
}

pub fn map_i_prime(a: &Tensor) -> Multi {
    apply_table(a, &a.sys().map_i_prime_table(), 2)
}

/// `I^m = (I^{m-1} ⊗ Id) ∘ I`, composed on basis images.
pub fn map_i_power(a: &Tensor, m: usize) -> Result<Multi> {
    let sys = a.sys();
    check_power(sys, m)?;
    let table = sys.map_i_table().ok_or_else(unsupported_i)?;
    let mut memo: HashMap<(usize, usize), Image> = HashMap::new();
    let mut out = Multi::zero(sys, m + 1);
    for (i, &c) in a.coeffs().iter().enumerate() {
        if c != 0.0 {
            for (k, x) in power_basis(&table, i, m, &mut memo) {
                out.push(k, c * x);
            }
        }
    }
    Ok(out)
}

fn check_power(sys: &System, m: usize) -> Result<()> {
    if m == 0 || m >= sys.n().max(1) {
        return Err(Error::Domain(format!(
            "I^{m} needs 1 <= m <= {}",
            sys.n().saturating_sub(1)
        )));
    }
    Ok(())
}

fn power_basis(
    table: &[Image],
    i: usize,
    m: usize,
    memo: &mut HashMap<(usize, usize), Image>,
) -> Image {
    if m == 1 {
        return table[i].clone();
    }
    if let Some(v) = memo.get(&(i, m)) {
        return v.clone();
    }
    let mut acc: std::collections::BTreeMap<Vec<usize>, f64> = Default::default();
    for (pair, c) in &table[i] {
        for (mut k, x) in power_basis(table, pair[0], m - 1, memo) {
            k.push(pair[1]);
            *acc.entry(k).or_insert(0.0) += c * x;
        }
    }
    let v: Image = acc.into_iter().collect();
    memo.insert((i, m), v.clone());
    v
}

/// `I^m` through the ordered-shuffle expansion; nilpotent systems only.
pub fn map_i_power_closed(a: &Tensor, m: usize) -> Result<Multi> {
    let sys = a.sys();
    if sys.kind() != Kind::Nilpotent {
        return Err(Error::Unsupported(
            "the ordered-shuffle expansion is for word systems".into(),
        ));
    }
    check_power(sys, m)?;
    let mut out = Multi::zero(sys, m + 1);
    let mut cache: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
    for (i, &c) in a.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let w = sys.word(i);
        for sizes in words::compositions(w.len(), m + 1) {
            let shuffles = cache
                .entry(sizes.clone())
                .or_insert_with(|| words::ordered_shuffles(&sizes));
            for blocks in shuffles.iter() {
                let key = words::split(&w, blocks, m + 1)
                    .iter()
                    .map(|p| sys.word_index(p))
                    .collect();
                out.push(key, c);
            }
        }
    }
    Ok(out)
}

/// Image of one basis element under `Σ σ₁∗⋯∗σ_l e_{σ₁}⊗⋯⊗e_{σ_l}`.
pub fn star_basis(sys: &System, i: usize, l: usize) -> Image {
    sys.star_table(l)[i].clone()
}

/// All `l`-fold star images: on grouplike `a` the entry at `(σ₁,…,σ_l)` is `Π σ_i(a)`.
pub fn star(a: &Tensor, l: usize) -> Multi {
    apply_table(a, &a.sys().star_table(l), l)
}

/// Star image restricted to the given factor degrees.
pub fn star_degrees(a: &Tensor, degrees: &[usize]) -> Result<Multi> {
    let total: usize = degrees.iter().sum();
    if total > a.sys().n() {
        return Err(Error::Domain(format!(
            "star map of total degree {total} above level {}",
            a.sys().n()
        )));
    }
    if degrees.contains(&0) {
        return Err(Error::Domain(
            "star map factors need positive degree".into(),
        ));
    }
    Ok(star(a, degrees.len()).filter(|deg| deg == degrees))
}

/// Residual of the splitting law for `I` (or `I′` when `primed`) on the pair `(a, b)`.
pub fn splitting_residual(a: &Tensor, b: &Tensor, primed: bool) -> Result<f64> {
    let ab = a.mul(b)?;
    let map = |x: &Tensor| -> Result<Multi> {
        if primed {
            Ok(map_i_prime(x))
        } else {
            map_i(x)
        }
    };
    let proj = |x: Multi| {
        if primed {
            x.project_prime()
        } else {
            x.project()
        }
    };
    let one = Tensor::unit(a.sys());
    let lhs = map(&ab)?;
    let cross = Multi::outer(&a.sub(&one)?, &a.mul(&b.sub(&one)?)?)?;
    let rhs = map(a)?.add(&proj(map(b)?.left_mul(a)?)).add(&proj(cross));
    Ok(lhs.max_abs_diff(&rhs))
}
