//! Reference computations kept apart from the library's own code paths.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `(1 - x²)² + x²/Q²`, evaluated directly.
pub fn direct_denominator(x: f64, q: f64) -> f64 {
    let a = 1.0 - x * x;
    a * a + x * x / (q * q)
}

const GL5_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// `∫₀^∞ S(f) cos(2πft) df` for a resonant density falling as `x⁻⁴`,
/// by fixed-panel 5-point Gauss–Legendre in `x = f/f0`. Panels resolve both
/// the resonance width and the cosine period; the range stops at `x = 1000`
/// with the `x⁻⁴` tail added analytically at `t = 0`.
pub fn cosine_transform<S: Fn(f64) -> f64>(density: S, f0: f64, q: f64, t: f64) -> f64 {
    let cycles_per_x = f0 * t;
    let h_osc = if cycles_per_x > 0.0 { 0.125 / cycles_per_x } else { f64::INFINITY };
    let h_near = h_osc.min(0.125 / q.max(1.0)).min(0.01);
    let h_far = h_osc.min(0.5);
    let g = |x: f64| density(x * f0) * (2.0 * PI * cycles_per_x * x).cos();
    let x_max = 1000.0;
    let near = gauss_legendre(&g, 0.0, 4.0, (4.0 / h_near).ceil() as usize);
    let far = gauss_legendre(&g, 4.0, x_max, ((x_max - 4.0) / h_far).ceil() as usize);
    let tail = if t == 0.0 { density(x_max * f0) * x_max / 3.0 } else { 0.0 };
    f0 * (near + far + tail)
}

/// Sample variance (n - 1 denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}

/// Means of consecutive non-overlapping blocks of `block` samples.
pub fn block_means(xs: &[f64], block: usize) -> Vec<f64> {
    xs.chunks_exact(block)
        .map(|c| c.iter().sum::<f64>() / block as f64)
        .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}
