//! One PASS/FAIL line per acceptance criterion. Report-only by default; with
//! `COCYCLE_ACCEPTANCE_STRICT=1` any FAIL makes the process exit nonzero.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use cocycle::algebra::maps::{map_i_power, map_i_power_closed, splitting_residual};
use cocycle::dominated::{compose, enhance, iterated_integral, product, rebase, rough_integrate};
use cocycle::extension::pvar_ratio;
use cocycle::forms::{
    cocycle_residual, rough_one_form, slowly_varying, AlphaForm, FnSmooth, PolynomialForm,
};
use cocycle::oracles::{
    double_stieltjes, exhaustive_pvariation, refine, riemann_one_form_integral,
};
use cocycle::sewing::{convergence_study, local_scaling, loglog_slope, FormIntegrand, ScaleReport};
use cocycle::{
    extend_to_level, sew, CellLift, DominatedPath, Forest, Kind, LengthControl, LinearForm,
    Polynomial, PvarControl, Result, SampledGroupPath, Schedule, System, Tensor, Tree,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHEN_TOL: f64 = 1e-12;
const GROUPLIKE_TOL: f64 = 1e-12;
const COCYCLE_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 1e-8;
const SLOPE_SLACK: f64 = 0.1;
const EXTENSION_TOL: f64 = 1e-9;
const UNIQUENESS_TOL: f64 = 1e-10;
const DILATION_TOL: f64 = 1e-10;
const RATIO_SPREAD: f64 = 0.10;
const SPLITTING_TOL: f64 = 1e-11;
const POWER_TOL: f64 = 1e-12;
const PRODUCT_TOL: f64 = 1e-9;
const CONSTANT_SPREAD: f64 = 0.10;
const COMPOSE_TOL: f64 = 1e-8;
const REBASE_TOL: f64 = 1e-8;
const MULTIPLICATIVITY_TOL: f64 = 1e-10;
const ROUGH_TOL: f64 = 1e-9;
const BUTCHER_ROUGH_TOL: f64 = 1e-8;
const PARTS_TOL: f64 = 1e-9;
const PARTS_DEFECT_FLOOR: f64 = 1e-6;
// deviations below this are roundoff and stay out of slope fits
const FIT_FLOOR: f64 = 1e-13;
// windows with ω above this span the whole curve and leave the asymptotic regime
const FIT_CEILING: f64 = 1.0;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn walk(r: &mut ChaCha8Rng, len: usize, d: usize, step: f64) -> Vec<Vec<f64>> {
    let mut x = vec![0.0; d];
    let mut out = vec![x.clone()];
    for _ in 1..len {
        for c in x.iter_mut() {
            *c += step * r.gen_range(-1.0..1.0);
        }
        out.push(x.clone());
    }
    out
}

/// A sum of three random sinusoids per coordinate sampled on `[0, 1]`.
fn smooth_curve(r: &mut ChaCha8Rng, len: usize, d: usize) -> Vec<Vec<f64>> {
    let modes: Vec<Vec<(f64, f64, f64)>> = (0..d)
        .map(|_| {
            (0..3)
                .map(|k| {
                    (
                        r.gen_range(-0.6..0.6),
                        (k + 1) as f64 * r.gen_range(1.0..2.0),
                        r.gen_range(0.0..2.0 * PI),
                    )
                })
                .collect()
        })
        .collect();
    (0..len)
        .map(|i| {
            let t = i as f64 / (len - 1) as f64;
            modes
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|(a, w, ph)| a * (w * t + ph).sin() - a * ph.sin())
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn random_element(r: &mut ChaCha8Rng, sys: &Arc<System>, scale: f64) -> Tensor {
    let mut a = Tensor::unit(sys);
    for _ in 0..3 {
        let v: Vec<f64> = (0..sys.d())
            .map(|_| scale * r.gen_range(-1.0..1.0))
            .collect();
        a = a.mul(&Tensor::segment(sys, &v).unwrap()).unwrap();
    }
    a
}

/// A random character of the forest algebra: free tree coefficients, forests by products.
fn random_character(r: &mut ChaCha8Rng, sys: &Arc<System>, scale: f64) -> Tensor {
    let mut c = vec![0.0; sys.dim()];
    c[0] = 1.0;
    let is_tree = |i: usize| sys.tree_factors(i) == [i];
    for (i, x) in c.iter_mut().enumerate().skip(1) {
        if is_tree(i) {
            *x = scale * r.gen_range(-1.0..1.0);
        }
    }
    for i in 1..sys.dim() {
        if !is_tree(i) {
            c[i] = sys.tree_factors(i).iter().map(|&j| c[j]).product();
        }
    }
    Tensor::from_coeffs(sys, c).unwrap()
}

/// Flat symmetric array of shape `out × d^l` with entries filled per sorted multi-index.
fn symmetric(r: &mut ChaCha8Rng, out: usize, d: usize, l: usize, scale: f64) -> Vec<f64> {
    let width = d.pow(l as u32);
    let mut a = vec![0.0; out * width];
    for o in 0..out {
        let mut cache = std::collections::HashMap::new();
        for flat in 0..width {
            let mut idx: Vec<usize> = (0..l)
                .map(|k| flat / d.pow((l - 1 - k) as u32) % d)
                .collect();
            idx.sort();
            let v = *cache
                .entry(idx)
                .or_insert_with(|| scale * r.gen_range(-1.0..1.0));
            a[o * width + flat] = v;
        }
    }
    a
}

fn random_polynomial(
    r: &mut ChaCha8Rng,
    d: usize,
    out: usize,
    degree: usize,
    scale: f64,
) -> Polynomial {
    Polynomial::new(
        d,
        out,
        (0..=degree)
            .map(|l| symmetric(r, out, d, l, scale))
            .collect(),
    )
    .unwrap()
}

/// `Σ_l (1/l!) D^l[x, …, x]`, evaluated independently of the library.
fn taylor(derivs: &[Vec<f64>], out: usize, d: usize, x: &[f64]) -> Vec<f64> {
    let mut val = vec![0.0; out];
    let mut fact = 1.0;
    for (l, a) in derivs.iter().enumerate() {
        if l > 0 {
            fact *= l as f64;
        }
        let width = d.pow(l as u32);
        for (o, v) in val.iter_mut().enumerate() {
            for flat in 0..width {
                let mut w = a[o * width + flat];
                for k in 0..l {
                    w *= x[flat / d.pow((l - 1 - k) as u32) % d];
                }
                *v += w / fact;
            }
        }
    }
    val
}

/// A non-polynomial one-form `R^d → L(R^d, R^e)`: row `r` is `sin(a_r · x + φ_r)`.
fn trig_form(r: &mut ChaCha8Rng, d: usize, e: usize, gamma: f64) -> FnSmooth {
    let out = e * d;
    let rows: Vec<(Vec<f64>, f64)> = (0..out)
        .map(|_| {
            (
                (0..d).map(|_| r.gen_range(-1.5..1.5)).collect(),
                r.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let f = move |l: usize, x: &[f64]| -> Vec<f64> {
        let width = d.pow(l as u32);
        let mut v = vec![0.0; out * width];
        for (o, (a, ph)) in rows.iter().enumerate() {
            let z: f64 =
                a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + ph + l as f64 * PI / 2.0;
            for flat in 0..width {
                let mut w = z.sin();
                for k in 0..l {
                    w *= a[flat / d.pow((l - 1 - k) as u32) % d];
                }
                v[o * width + flat] = w;
            }
        }
        v
    };
    FnSmooth::new(d, out, gamma, 6, Arc::new(f))
}

/// `R^d → L(R^d, R^e)` with rows `φ(a_r · x + b_r)`, `φ(z) = sign(z)|z|^γ`: exactly `γ`-Lipschitz,
/// with every kink hyperplane crossed by `through`.
fn kink_form(r: &mut ChaCha8Rng, d: usize, e: usize, gamma: f64, through: &[Vec<f64>]) -> FnSmooth {
    let out = e * d;
    let rows: Vec<(Vec<f64>, f64)> = (0..out)
        .map(|_| {
            let a: Vec<f64> = (0..d).map(|_| r.gen_range(-1.5..1.5)).collect();
            let x = &through[r.gen_range(through.len() / 10..9 * through.len() / 10)];
            let b = -a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
            (a, b)
        })
        .collect();
    let f = move |l: usize, x: &[f64]| -> Vec<f64> {
        let width = d.pow(l as u32);
        let mut v = vec![0.0; out * width];
        for (o, (a, b)) in rows.iter().enumerate() {
            let z = a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b;
            let s = if l == 0 {
                z.signum() * z.abs().powf(gamma)
            } else {
                gamma * z.abs().powf(gamma - 1.0)
            };
            for flat in 0..width {
                let mut w = s;
                for k in 0..l {
                    w *= a[flat / d.pow((l - 1 - k) as u32) % d];
                }
                v[o * width + flat] = w;
            }
        }
        v
    };
    FnSmooth::new(d, out, gamma, 1, Arc::new(f))
}

fn asymptotic_slope(rep: &ScaleReport) -> f64 {
    let pts: Vec<(f64, f64)> = rep
        .scales
        .iter()
        .cloned()
        .filter(|(w, _)| *w <= FIT_CEILING)
        .collect();
    loglog_slope(&pts).unwrap_or(f64::NAN)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn spread(xs: &[f64]) -> f64 {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(0.0, f64::max);
    hi / lo - 1.0
}

fn chen() -> Result<Verdict> {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let g = SampledGroupPath::signature(4, &walk(&mut r, 64, 2, 0.15))?;
        worst = worst.max(g.chen_residual());
    }
    verdict(
        worst <= CHEN_TOL,
        format!("max residual {worst:.2e} over 50 paths (tol {CHEN_TOL:.0e})"),
    )
}

fn grouplike() -> Result<Verdict> {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut all = true;
    for _ in 0..50 {
        let g = SampledGroupPath::signature(4, &walk(&mut r, 64, 2, 0.15))?;
        all &= g.values().iter().all(|v| v.is_grouplike(GROUPLIKE_TOL));
        worst = worst.max(g.grouplike_defect());
    }
    verdict(
        all,
        format!("max defect {worst:.2e} on 3200 values (tol {GROUPLIKE_TOL:.0e})"),
    )
}

fn cocycle_law() -> Result<Verdict> {
    let mut r = rng(3);
    let p = random_polynomial(&mut r, 2, 4, 2, 0.8);
    let poly = PolynomialForm::new(p, 2, 6, 2)?;
    let sys = System::nilpotent(2, 6)?;
    let triples: Vec<_> = (0..200)
        .map(|_| {
            (
                random_element(&mut r, &sys, 0.3),
                random_element(&mut r, &sys, 0.3),
                random_element(&mut r, &sys, 0.3),
            )
        })
        .collect();
    let a = cocycle_residual(&poly, 0, &triples)?;

    let base = Arc::new(SampledGroupPath::signature(3, &walk(&mut r, 20, 2, 0.3))?);
    let raise = AlphaForm::level_raising(base.clone())?;
    let sys3 = base.sys().clone();
    let triples: Vec<_> = (0..200)
        .map(|_| {
            (
                random_element(&mut r, &sys3, 0.4),
                random_element(&mut r, &sys3, 0.4),
                random_element(&mut r, &sys3, 0.4),
            )
        })
        .collect();
    let mut b = 0.0f64;
    for s in [0, 7, 19] {
        b = b.max(cocycle_residual(&raise, s, &triples)?);
    }
    verdict(
        a.max(b) <= COCYCLE_TOL,
        format!("polynomial {a:.2e}, level-raising {b:.2e} on 200 triples (tol {COCYCLE_TOL:.0e})"),
    )
}

/// Three-point Gauss–Legendre per segment; exact for a cubic integrand.
fn gauss_line_integral(derivs: &[Vec<f64>], d: usize, pts: &[Vec<f64>]) -> f64 {
    let nodes = [
        (-(0.6f64).sqrt(), 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        ((0.6f64).sqrt(), 5.0 / 9.0),
    ];
    let mut total = 0.0;
    for w in pts.windows(2) {
        let v: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
        for (z, wt) in nodes {
            let lam = 0.5 * (z + 1.0);
            let x: Vec<f64> = w[0].iter().zip(&v).map(|(a, b)| a + lam * b).collect();
            let fx = taylor(derivs, d, d, &x);
            total += 0.5 * wt * fx.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    total
}

fn sewing_vs_closed_form() -> Result<Verdict> {
    let mut r = rng(4);
    let pts = smooth_curve(&mut r, 1025, 2);
    let p = random_polynomial(&mut r, 2, 2, 3, 1.0);
    let exact = gauss_line_integral(p.derivatives(), 2, &pts);

    let g4 = SampledGroupPath::signature(4, &pts)?;
    let form = PolynomialForm::new(p.clone(), 1, 4, 1)?;
    let f = FormIntegrand::new(&form, &g4)?;
    let omega = LengthControl::new(&g4, 2.5)?;
    let res = sew(&f, &omega, 2.0, Schedule::Omega)?;
    let err = (res.total().get(1) - exact).abs();

    let theta = 1.2;
    let g2 = SampledGroupPath::signature(2, &pts)?;
    let truncated = PolynomialForm::new(p, 1, 2, 1)?;
    let f2 = FormIntegrand::new(&truncated, &g2)?;
    let omega2 = LengthControl::new(&g2, 2.5)?;
    let (_, slope) = convergence_study(&f2, &omega2, 6)?;
    let slope = slope.unwrap_or(f64::NAN);
    let need = theta - 1.0 - SLOPE_SLACK;
    verdict(
        err <= CLOSED_FORM_TOL && slope >= need,
        format!("|sewn - closed form| {err:.2e} (tol {CLOSED_FORM_TOL:.0e}); mesh-halving slope {slope:.3} (need >= {need:.2})"),
    )
}

fn local_estimate_law() -> Result<Verdict> {
    let mut details = Vec::new();
    let mut pass = true;
    for (seed, p, gamma) in [(5u64, 2.5, 2.0), (6, 2.2, 1.5)] {
        let mut r = rng(seed);
        let pts = smooth_curve(&mut r, 1025, 2);
        let g = Arc::new(SampledGroupPath::signature(2, &pts)?);
        let f = kink_form(&mut r, 2, 1, gamma, &pts);
        let form = rough_one_form(&f, g.clone(), p)?;
        let theta = (gamma + 1.0) / p;
        let omega = LengthControl::new(&g, p)?;
        let integrand = FormIntegrand::new(&form, &g)?;
        let res = sew(&integrand, &omega, theta, Schedule::Omega)?;
        let slope = asymptotic_slope(&local_scaling(&integrand, &res, &omega, FIT_FLOOR)?);
        pass &= slope >= theta - SLOPE_SLACK;
        details.push(format!(
            "p={p} gamma={gamma}: slope {slope:.3} (need >= {:.3})",
            theta - SLOPE_SLACK
        ));
    }
    verdict(pass, details.join("; "))
}

fn extension() -> Result<Verdict> {
    let mut r = rng(7);
    let p = 2.5;
    let pts = walk(&mut r, 33, 2, 0.2);
    let g2 = SampledGroupPath::signature(2, &pts)?;
    let omega = LengthControl::new(&g2, p)?;
    let ext = extend_to_level(&g2, 4, p, &omega, Schedule::Omega, CellLift::Group)?;
    let mut reproduce = 0.0f64;
    for n in [3, 4] {
        let direct = SampledGroupPath::signature(n, &pts)?;
        let got = ext.path.truncate(n)?;
        for t in 0..direct.len() {
            reproduce = reproduce.max(got.value(t).max_abs_diff(direct.value(t)));
        }
    }

    let dy = extend_to_level(&g2, 4, p, &omega, Schedule::Dyadic, CellLift::Group)?;
    let mut unique = 0.0f64;
    for (a, b) in ext.sewing.iter().zip(&dy.sewing) {
        unique = unique
            .max(a.merged.max_abs_diff(&b.merged))
            .max(a.merged.max_abs_diff(a.total()));
    }

    let c = 3.0;
    let gc = g2.dilate(c)?;
    let ext_c = extend_to_level(
        &gc,
        4,
        p,
        &LengthControl::new(&gc, p)?,
        Schedule::Omega,
        CellLift::Group,
    )?;
    let scaled = ext.path.dilate(c)?;
    let mut dil = 0.0f64;
    for t in 0..scaled.len() {
        dil = dil.max(
            ext_c.path.value(t).max_abs_diff(scaled.value(t)) / (1.0 + scaled.value(t).norm_max()),
        );
    }

    let mut ratios = Vec::new();
    for mesh in [1, 2, 4] {
        let fine = refine(&pts, mesh);
        let g = SampledGroupPath::signature(2, &fine)?;
        let h = extend_to_level(
            &g,
            4,
            p,
            &LengthControl::new(&g, p)?,
            Schedule::Omega,
            CellLift::Group,
        )?;
        ratios.push(pvar_ratio(&h.path, &g, p)?);
    }
    let sp = spread(&ratios);
    verdict(
        reproduce <= EXTENSION_TOL && unique <= UNIQUENESS_TOL && dil <= DILATION_TOL && sp <= RATIO_SPREAD,
        format!(
            "S3/S4 gap {reproduce:.2e}; schedules {unique:.2e}; dilation {dil:.2e}; p-var ratios {:.4}/{:.4}/{:.4} spread {:.1}%",
            ratios[0],
            ratios[1],
            ratios[2],
            100.0 * sp
        ),
    )
}

fn maps_i() -> Result<Verdict> {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    let mut cases = Vec::new();
    for n in 2..=4 {
        let sys = System::nilpotent(2, n)?;
        for primed in [false, true] {
            for _ in 0..200 {
                let (a, b) = (
                    random_element(&mut r, &sys, 0.5),
                    random_element(&mut r, &sys, 0.5),
                );
                worst = worst.max(splitting_residual(&a, &b, primed)?);
            }
            cases.push(format!("nil{n}{}", if primed { "'" } else { "" }));
        }
    }
    for (n, primed) in [(2, false), (2, true), (3, true)] {
        let sys = System::butcher(2, n)?;
        for _ in 0..200 {
            let (a, b) = (
                random_character(&mut r, &sys, 0.7),
                random_character(&mut r, &sys, 0.7),
            );
            worst = worst.max(splitting_residual(&a, &b, primed)?);
        }
        cases.push(format!("bch{n}{}", if primed { "'" } else { "" }));
    }
    let sys = System::nilpotent(2, 4)?;
    let mut power = 0.0f64;
    for _ in 0..20 {
        let a = random_element(&mut r, &sys, 0.6);
        for m in 1..=3 {
            power = power.max(map_i_power(&a, m)?.max_abs_diff(&map_i_power_closed(&a, m)?));
        }
    }
    verdict(
        worst <= SPLITTING_TOL && power <= POWER_TOL,
        format!("splitting {worst:.2e} over {} (tol {SPLITTING_TOL:.0e}); I^m closed form {power:.2e} (tol {POWER_TOL:.0e})", cases.join(",")),
    )
}

fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

fn dominated_algebra() -> Result<Verdict> {
    let mut r = rng(9);
    let p = 2.5;
    let theta = 1.2;
    let pts = walk(&mut r, 33, 2, 0.15);
    let f1 = trig_form(&mut r, 2, 1, 3.0);
    let f2 = random_polynomial(&mut r, 2, 4, 2, 0.7);
    let mut trace_gap = 0.0f64;
    let mut constants = Vec::new();
    for mesh in [1, 2, 4] {
        let g = Arc::new(SampledGroupPath::signature(4, &refine(&pts, mesh))?);
        let d1 = DominatedPath::from_form(rough_one_form(&f1, g.clone(), p)?)?;
        let d2 = DominatedPath::from_form(rough_one_form(&f2, g.clone(), p)?)?;
        let prod = product(&d1, &d2)?;
        for t in 0..g.len() {
            trace_gap = trace_gap.max(max_diff(prod.trace(t), &kron(d1.trace(t), d2.trace(t))));
        }
        let omega = PvarControl::new(&g, p)?;
        let n1 = slowly_varying(d1.form(), &g, &omega, theta, p)?.norm;
        let n2 = slowly_varying(d2.form(), &g, &omega, theta, p)?.norm;
        let n12 = slowly_varying(prod.form(), &g, &omega, theta, p)?.norm;
        constants.push(n12 / (n1 * n2));
    }
    let sp = spread(&constants);
    verdict(
        trace_gap <= PRODUCT_TOL && sp <= CONSTANT_SPREAD,
        format!(
            "trace vs tensor of traces {trace_gap:.2e} (tol {PRODUCT_TOL:.0e}); C = {:.4}/{:.4}/{:.4} at N=33/65/129, spread {:.1}%",
            constants[0],
            constants[1],
            constants[2],
            100.0 * sp
        ),
    )
}

fn composition() -> Result<Verdict> {
    let mut r = rng(10);
    let p = 2.5;
    let pts = walk(&mut r, 41, 2, 0.15);
    let g = Arc::new(SampledGroupPath::signature(3, &pts)?);
    let x = DominatedPath::from_form(LinearForm::level_one(g.clone())?)?;
    // x1², and x1³ + 3 x1 x2² − 2 x2
    let square = Polynomial::new(
        2,
        1,
        vec![vec![0.0], vec![0.0, 0.0], vec![2.0, 0.0, 0.0, 0.0]],
    )?;
    let cubic = Polynomial::new(
        2,
        1,
        vec![
            vec![0.0],
            vec![0.0, -2.0],
            vec![0.0; 4],
            vec![6.0, 0.0, 0.0, 6.0, 0.0, 6.0, 6.0, 0.0],
        ],
    )?;
    let exact_sq = |x: &[f64]| x[0] * x[0];
    let exact_cu = |x: &[f64]| x[0].powi(3) + 3.0 * x[0] * x[1] * x[1] - 2.0 * x[1];
    let mut gap = 0.0f64;
    for (f, exact) in [
        (&square, &exact_sq as &dyn Fn(&[f64]) -> f64),
        (&cubic, &exact_cu),
    ] {
        let c = compose(&x, f, p)?;
        for t in 0..g.len() {
            gap = gap.max((c.trace(t)[0] - (exact(&pts[t]) - exact(&[0.0, 0.0]))).abs());
        }
    }

    let smooth = Arc::new(SampledGroupPath::signature(
        2,
        &smooth_curve(&mut r, 1025, 2),
    )?);
    let x2 = DominatedPath::from_form(LinearForm::level_one(smooth.clone())?)?;
    let c = compose(&x2, &cubic, p)?;
    let expected = (p.floor() + 1.0) / p;
    let omega = LengthControl::new(&smooth, p)?;
    let integrand = FormIntegrand::new(c.form(), &smooth)?;
    let res = sew(&integrand, &omega, expected, Schedule::Omega)?;
    let slope = asymptotic_slope(&local_scaling(&integrand, &res, &omega, FIT_FLOOR)?);
    verdict(
        gap <= COMPOSE_TOL && (slope - expected).abs() <= SLOPE_SLACK,
        format!("|trace - (f(X) - f(0))| {gap:.2e} (tol {COMPOSE_TOL:.0e}); slope {slope:.3} vs {expected:.2}"),
    )
}

fn transitivity() -> Result<Verdict> {
    let mut r = rng(11);
    let p = 2.5;
    let g = Arc::new(SampledGroupPath::signature(3, &walk(&mut r, 33, 2, 0.15))?);
    let f = trig_form(&mut r, 2, 2, 3.0);
    let d = DominatedPath::from_form(rough_one_form(&f, g.clone(), p)?)?;
    let enh = enhance(&d, 2)?;
    let z = DominatedPath::from_form(LinearForm::level_one(enh.path().clone())?)?;
    let outer = iterated_integral(&z, &z)?;
    let pulled = rebase(&outer, &enh)?;
    let direct = iterated_integral(&d, &d)?;
    let mut gap = 0.0f64;
    for t in 0..g.len() {
        gap = gap.max(max_diff(pulled.trace(t), direct.trace(t)));
    }
    let starts: Vec<usize> = (0..g.len()).collect();
    let mult = enh.multiplicativity_residual(&starts)?;
    verdict(
        gap <= REBASE_TOL && mult <= MULTIPLICATIVITY_TOL,
        format!("rebased vs direct {gap:.2e} (tol {REBASE_TOL:.0e}); multiplicativity {mult:.2e} (tol {MULTIPLICATIVITY_TOL:.0e})"),
    )
}

fn rough_integration() -> Result<Verdict> {
    // d = 1, f(x) = x, x_t = t
    let pts: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64 / 8.0]).collect();
    let g = Arc::new(SampledGroupPath::signature(4, &pts)?);
    let id = Polynomial::linear(1, 1, vec![1.0])?;
    let y = rough_integrate(&id, g.clone(), 2.0)?;
    let end = y.value(g.len() - 1);
    let (y1, y2) = (end.get(1), end.get(2));
    let q1 = riemann_one_form_integral(&|x: &[f64]| vec![x[0]], 1, &[vec![0.0], vec![1.0]], 64)?
        .scalar();
    let half_square = |t: f64| vec![0.5 * t * t];
    let q2 = double_stieltjes(&half_square, &half_square, 0.0, 1.0, 64)?.scalar();
    let line = (y1 - 0.5)
        .abs()
        .max((y2 - 0.125).abs())
        .max((q1 - 0.5).abs())
        .max((q2 - 0.125).abs());

    // the same line in the step-2 forest system, N = 64, 256, 1024 cells
    let mut errs = Vec::new();
    for n in [64usize, 256, 1024] {
        let pts: Vec<Vec<f64>> = (0..=n).map(|i| vec![i as f64 / n as f64]).collect();
        let times: Vec<f64> = pts.iter().map(|x| x[0]).collect();
        let g = Arc::new(SampledGroupPath::piecewise_linear(
            Kind::Butcher,
            2,
            times,
            &pts,
        )?);
        let y = rough_integrate(&id, g, 2.0)?;
        let end = y.value(n);
        errs.push((end.get(1) - q1).abs().max((end.get(2) - q2).abs()));
    }
    let butcher = errs[2];
    verdict(
        line <= ROUGH_TOL && butcher <= BUTCHER_ROUGH_TOL,
        format!(
            "line: Y1 {y1:.15}, Y2 {y2:.15}, oracles {q1:.15}/{q2:.15} (tol {ROUGH_TOL:.0e}); butcher step 2 vs oracle: {:.2e}/{:.2e}/{:.2e} at N=64/256/1024 (tol {BUTCHER_ROUGH_TOL:.0e})",
            errs[0], errs[1], errs[2]
        ),
    )
}

fn pvariation() -> Result<Verdict> {
    let mut r = rng(13);
    let mut mismatches = 0;
    for _ in 0..100 {
        let d = r.gen_range(1..=3);
        let n = r.gen_range(1..=3);
        let p = r.gen_range(1.0..4.0);
        let g = SampledGroupPath::signature(n, &walk(&mut r, 10, d, 0.5))?;
        let dist = g.increment_norms();
        let brute = exhaustive_pvariation(&dist, p)?;
        let dp = SampledGroupPath::pvar_sum_from_table(&dist, p)?;
        let direct = g.pvar_sum(p, 0, 9)?;
        if dp.to_bits() != brute.to_bits() || direct.to_bits() != brute.to_bits() {
            mismatches += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!("{mismatches} of 100 instances differ from exhaustive enumeration"),
    )
}

fn swap(v: &[f64], m: usize) -> Vec<f64> {
    (0..m * m).map(|k| v[(k % m) * m + k / m]).collect()
}

fn parts_defect(g: Arc<SampledGroupPath>) -> Result<f64> {
    let x = DominatedPath::from_form(LinearForm::level_one(g.clone())?)?;
    let prod = product(&x, &x)?;
    let it = iterated_integral(&x, &x)?;
    let m = x.dim();
    let mut worst = 0.0f64;
    for t in 0..g.len() {
        let sym: Vec<f64> = it
            .trace(t)
            .iter()
            .zip(swap(it.trace(t), m))
            .map(|(a, b)| a + b)
            .collect();
        worst = worst.max(max_diff(prod.trace(t), &sym));
    }
    Ok(worst)
}

fn integration_by_parts() -> Result<Verdict> {
    let mut r = rng(14);
    let len = 65;
    let pts = walk(&mut r, len, 2, 0.15);
    let times: Vec<f64> = (0..len).map(|i| i as f64 / (len - 1) as f64).collect();
    let h = times[1] - times[0];
    let nil = Arc::new(SampledGroupPath::signature(2, &pts)?);
    let sys = System::butcher(2, 2)?;
    let cells = pts
        .windows(2)
        .map(|w| {
            let v: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
            let mut c = Tensor::segment(&sys, &v)?.into_coeffs();
            for i in 0..2 {
                let ladder = Forest::single(Tree::graft(Forest::single(Tree::leaf(i)), i));
                c[sys.forest_index(&ladder).unwrap()] -= h / 2.0;
            }
            Tensor::from_coeffs(&sys, c)
        })
        .collect::<Result<Vec<_>>>()?;
    let bch = Arc::new(SampledGroupPath::from_cells(
        times,
        Tensor::unit(&sys),
        &cells,
    )?);
    let a = parts_defect(nil)?;
    let b = parts_defect(bch)?;
    verdict(
        a <= PARTS_TOL && b > PARTS_DEFECT_FLOOR,
        format!("nilpotent defect {a:.2e} (tol {PARTS_TOL:.0e}); butcher defect {b:.4} (expected about T = 1, floor {PARTS_DEFECT_FLOOR:.0e})"),
    )
}

fn cli_determinism() -> Result<Verdict> {
    let fx = |n: &str| {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(n)
            .to_string_lossy()
            .into_owned()
    };
    let (walk, form) = (fx("walk.csv"), fx("form.json"));
    let runs: Vec<Vec<String>> = vec![
        vec![
            "signature".into(),
            walk.clone(),
            "--depth".into(),
            "3".into(),
        ],
        vec![
            "signature".into(),
            walk.clone(),
            "--system".into(),
            "butcher".into(),
            "--depth".into(),
            "3".into(),
        ],
        vec!["pvar".into(), walk.clone(), "--p".into(), "2.5".into()],
        vec![
            "extend".into(),
            fx("sig2.json"),
            "--p".into(),
            "2.5".into(),
            "--to-level".into(),
            "4".into(),
        ],
        vec![
            "integrate".into(),
            walk.clone(),
            "--p".into(),
            "2.5".into(),
            "--form".into(),
            form.clone(),
        ],
        vec![
            "iterate".into(),
            walk.clone(),
            "--p".into(),
            "2.5".into(),
            "--form".into(),
            form.clone(),
            "--schedule".into(),
            "dyadic".into(),
        ],
        vec![
            "product".into(),
            walk.clone(),
            "--p".into(),
            "2.5".into(),
            "--form".into(),
            form.clone(),
        ],
        vec![
            "compose".into(),
            walk.clone(),
            "--p".into(),
            "2.5".into(),
            "--form".into(),
            form.clone(),
            "--map".into(),
            fx("map1.json"),
        ],
        vec![
            "enhance".into(),
            walk.clone(),
            "--p".into(),
            "2.5".into(),
            "--form".into(),
            form.clone(),
            "--levels".into(),
            "3".into(),
        ],
        vec![
            "certify".into(),
            walk.clone(),
            "--p".into(),
            "2.5".into(),
            "--form".into(),
            form.clone(),
            "--control".into(),
            "pvar".into(),
        ],
    ];
    let mut differing = Vec::new();
    let mut failed = Vec::new();
    for args in &runs {
        let outs: Vec<_> = (0..3)
            .map(|_| {
                Command::new(env!("CARGO_BIN_EXE_cocycle"))
                    .args(args)
                    .output()
                    .expect("binary runs")
            })
            .collect();
        if outs
            .iter()
            .any(|o| !o.status.success() || o.stdout.is_empty())
        {
            failed.push(args[0].clone());
        } else if outs.windows(2).any(|w| w[0].stdout != w[1].stdout) {
            differing.push(args[0].clone());
        }
    }
    verdict(
        differing.is_empty() && failed.is_empty(),
        format!(
            "{} invocations x 3 runs; differing: {:?}; failed: {:?}",
            runs.len(),
            differing,
            failed
        ),
    )
}

fn main() {
    cocycle::init_threads();
    let criteria: Vec<(&str, fn() -> Result<Verdict>)> = vec![
        ("chen identity", chen),
        ("grouplike values", grouplike),
        ("cocycle law", cocycle_law),
        ("sewing vs closed form", sewing_vs_closed_form),
        ("local estimate scaling", local_estimate_law),
        ("extension", extension),
        ("maps I and I'", maps_i),
        ("dominated-path algebra", dominated_algebra),
        ("composition", composition),
        ("transitivity", transitivity),
        ("rough integration", rough_integration),
        ("p-variation", pvariation),
        ("integration by parts", integration_by_parts),
        ("cli determinism", cli_determinism),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check().unwrap_or_else(|e| Verdict {
            pass: false,
            detail: format!("error: {e}"),
        });
        if !v.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s]",
            k + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 && std::env::var("COCYCLE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
