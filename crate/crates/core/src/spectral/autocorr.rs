use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sim::TimeSeries;

/// Work threshold (samples × lags) below which the direct sum is used.
const DIRECT_LIMIT: usize = 20_000_000;

/// Biased (1/N) autocovariance of the mean-removed record for lags
/// `0..=max_lag` samples. Element `k` corresponds to lag `k · dt`.
pub fn estimate_autocorr(ts: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    let n = ts.len();
    if max_lag >= n / 10 {
        return Err(Error::InvalidParameter {
            name: "max_lag",
            reason: format!("must be below length/10 = {} for a stable estimate, got {max_lag}", n / 10),
        });
    }
    let mean = ts.mean();
    let x: Vec<f64> = ts.values().iter().map(|v| v - mean).collect();
    if n.saturating_mul(max_lag + 1) <= DIRECT_LIMIT {
        Ok((0..=max_lag)
            .map(|k| x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
            .collect())
    } else {
        Ok(via_fft(&x, max_lag))
    }
}

fn via_fft(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let m = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(m);
    let inverse = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex64> = x
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(m)
        .collect();
    forward.process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex64::new(c.norm_sqr(), 0.0);
    }
    inverse.process(&mut buf);
    let scale = 1.0 / (m as f64 * n as f64);
    buf[..=max_lag].iter().map(|c| c.re * scale).collect()
}
