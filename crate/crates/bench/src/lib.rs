//! Deterministic inputs shared by the benchmarks.

/// A closed Lissajous-type curve in `R^d`, sampled at `len` points.
pub fn curve(len: usize, d: usize) -> Vec<Vec<f64>> {
    (0..len)
        .map(|i| {
            let t = i as f64 / (len - 1) as f64;
            (0..d)
                .map(|k| {
                    ((k + 2) as f64 * 3.0 * t).sin() * (1.0 + 0.3 * (7.0 * t + k as f64).cos())
                })
                .collect()
        })
        .collect()
}
