//! Brute-force references for the test suite.
//!
//! Nothing here touches the algebra, forms or sewing code: inputs are plain
//! `f64` polylines and closures, and every integral is a nested left-point
//! Riemann sum on a refined mesh, extrapolated over several mesh levels.

use crate::error::{Error, Result};

/// An extrapolated value with its error estimate.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub value: Vec<f64>,
    pub error: f64,
}

impl Estimate {
    pub fn scalar(&self) -> f64 {
        self.value[0]
    }
}

/// Split every segment of a polyline into `mesh` equal pieces.
pub fn refine(points: &[Vec<f64>], mesh: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity((points.len().saturating_sub(1)) * mesh + 1);
    if points.is_empty() {
        return out;
    }
    for w in points.windows(2) {
        for q in 0..mesh {
            let r = q as f64 / mesh as f64;
            out.push(
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| a + r * (b - a))
                    .collect(),
            );
        }
    }
    out.push(points[points.len() - 1].clone());
    out
}

/// Mesh levels in the Romberg tableau. On piecewise-linear data every Riemann
/// sum here is a polynomial in the mesh width, so each level removes one power.
const LEVELS: u32 = 5;

// Romberg tableau over meshes m, 2m, 4m, ...; the error is 4x the gap between
// the last two diagonal entries.
fn extrapolate(mesh: usize, eval: impl Fn(usize) -> Vec<f64>) -> Estimate {
    let mut rows: Vec<Vec<Vec<f64>>> = Vec::new();
    for i in 0..LEVELS as usize {
        let mut row = vec![eval(mesh << i)];
        for j in 1..=i {
            let f = (1u64 << j) as f64 - 1.0;
            let prev = &rows[i - 1][j - 1];
            let next: Vec<f64> = row[j - 1]
                .iter()
                .zip(prev)
                .map(|(a, b)| a + (a - b) / f)
                .collect();
            row.push(next);
        }
        rows.push(row);
    }
    let last = rows[LEVELS as usize - 1].last().unwrap().clone();
    let before = rows[LEVELS as usize - 2].last().unwrap();
    let gap = last
        .iter()
        .zip(before)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Estimate {
        value: last,
        error: 4.0 * gap,
    }
}

fn check_mesh(mesh: usize) -> Result<()> {
    if mesh < 64 {
        return Err(Error::Domain(format!(
            "oracle mesh must be at least 64, got {mesh}"
        )));
    }
    Ok(())
}

fn word_sum(points: &[Vec<f64>], word: &[usize]) -> f64 {
    // running[m] = iterated integral of the first m letters up to the current node
    let mut running = vec![0.0; word.len() + 1];
    running[0] = 1.0;
    for w in points.windows(2) {
        for m in (1..=word.len()).rev() {
            let dx = w[1][word[m - 1]] - w[0][word[m - 1]];
            running[m] += running[m - 1] * dx;
        }
    }
    running[word.len()]
}

/// Iterated integral of `word` (0-based letters) over the whole polyline.
pub fn quadrature_iterated_integral(
    points: &[Vec<f64>],
    word: &[usize],
    mesh: usize,
) -> Result<Estimate> {
    check_mesh(mesh)?;
    if word.is_empty() {
        return Ok(Estimate {
            value: vec![1.0],
            error: 0.0,
        });
    }
    Ok(extrapolate(mesh, |m| {
        vec![word_sum(&refine(points, m), word)]
    }))
}

/// A labelled rooted tree for the branched oracle; labels are 0-based.
#[derive(Clone, Debug)]
pub struct OracleTree {
    pub label: usize,
    pub children: Vec<OracleTree>,
}

impl OracleTree {
    pub fn leaf(label: usize) -> Self {
        OracleTree {
            label,
            children: Vec::new(),
        }
    }

    pub fn node(label: usize, children: Vec<OracleTree>) -> Self {
        OracleTree { label, children }
    }
}

// Values of X[tree]_{0,u} at every mesh node.
fn tree_trace(points: &[Vec<f64>], tree: &OracleTree) -> Vec<f64> {
    let kids: Vec<Vec<f64>> = tree
        .children
        .iter()
        .map(|c| tree_trace(points, c))
        .collect();
    let mut out = vec![0.0; points.len()];
    for q in 0..points.len() - 1 {
        let weight: f64 = kids.iter().map(|k| k[q]).product();
        out[q + 1] = out[q] + weight * (points[q + 1][tree.label] - points[q][tree.label]);
    }
    out
}

/// Branched iterated integral of a forest (product of its trees) over the polyline.
pub fn quadrature_forest_integral(
    points: &[Vec<f64>],
    forest: &[OracleTree],
    mesh: usize,
) -> Result<Estimate> {
    check_mesh(mesh)?;
    let eval = |m: usize| -> f64 {
        let pts = refine(points, m);
        forest
            .iter()
            .map(|t| *tree_trace(&pts, t).last().unwrap())
            .product()
    };
    Ok(extrapolate(mesh, |m| vec![eval(m)]))
}

/// Left-point Riemann sum of `f(x) dx` along the polyline, where `f(x)` is an
/// `e x d` matrix stored row-major.
pub fn riemann_one_form_integral(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    e: usize,
    points: &[Vec<f64>],
    mesh: usize,
) -> Result<Estimate> {
    check_mesh(mesh)?;
    let d = points.first().map_or(0, |p| p.len());
    let eval = |m: usize| -> Vec<f64> {
        let pts = refine(points, m);
        let mut acc = vec![0.0; e];
        for w in pts.windows(2) {
            let fx = f(&w[0]);
            for (u, a) in acc.iter_mut().enumerate() {
                for j in 0..d {
                    *a += fx[u * d + j] * (w[1][j] - w[0][j]);
                }
            }
        }
        acc
    };
    Ok(extrapolate(mesh, eval))
}

/// `∬_{s<u1<u2<t} dγ¹_{u1} ⊗ dγ²_{u2}` for curves given as functions of time,
/// flattened row-major (first factor slowest).
pub fn double_stieltjes(
    g1: &dyn Fn(f64) -> Vec<f64>,
    g2: &dyn Fn(f64) -> Vec<f64>,
    s: f64,
    t: f64,
    mesh: usize,
) -> Result<Estimate> {
    check_mesh(mesh)?;
    let eval = |m: usize| -> Vec<f64> {
        let a0 = g1(s);
        let mut prev2 = g2(s);
        let mut left1 = vec![0.0; a0.len()];
        let mut acc = vec![0.0; a0.len() * prev2.len()];
        for q in 0..m {
            let u1 = s + (t - s) * (q + 1) as f64 / m as f64;
            let next2 = g2(u1);
            for (i, l) in left1.iter().enumerate() {
                for j in 0..next2.len() {
                    acc[i * next2.len() + j] += l * (next2[j] - prev2[j]);
                }
            }
            let a = g1(u1);
            for (l, (x, x0)) in left1.iter_mut().zip(a.iter().zip(&a0)) {
                *l = x - x0;
            }
            prev2 = next2;
        }
        acc
    };
    Ok(extrapolate(mesh, eval))
}

/// Supremum of `Σ dist[t_k][t_{k+1}]^p` over every sub-partition of `0..N`
/// containing both endpoints. `dist` is an `N x N` table; only `i < j` is read.
pub fn exhaustive_pvariation(dist: &[Vec<f64>], p: f64) -> Result<f64> {
    let n = dist.len();
    if n > 14 {
        return Err(Error::Domain(format!(
            "exhaustive p-variation needs N <= 14, got {n}"
        )));
    }
    if n < 2 {
        return Ok(0.0);
    }
    let interior = n - 2;
    let mut best = 0.0f64;
    for mask in 0u32..(1u32 << interior) {
        let mut last = 0;
        let mut sum = 0.0;
        for k in 1..n {
            if k == n - 1 || mask & (1 << (k - 1)) != 0 {
                sum += dist[last][k].powf(p);
                last = k;
            }
        }
        best = best.max(sum);
    }
    Ok(best)
}
