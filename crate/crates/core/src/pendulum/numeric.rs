//! Quadrature routes through the spectral densities.
//!
//! These take a density as an opaque function of frequency and never touch
//! the ringdown kernel, so they serve as an independent check on the closed
//! forms: integrating a density gives the variance, and its cosine transform
//! gives the autocorrelation.

use std::f64::consts::PI;

use crate::error::Result;
use crate::quadrature::{Estimate, Quadrature};

/// Reduced-frequency cutoff beyond which the `x^-p` tail is used at zero lag.
pub const TAIL_CUTOFF_X: f64 = 100.0;

/// Same, for tails no steeper than `x^-3`, whose relative correction
/// `O(x^-2)` decays too slowly for the shorter cutoff.
pub const SLOW_TAIL_CUTOFF_X: f64 = 1e4;

/// Reduced-frequency cutoff for nonzero lags, where the tail is only bounded.
pub const LAG_CUTOFF_X: f64 = 1000.0;

/// A resonance at `f0` (Hz) with quality factor `q`, used to place panels.
#[derive(Debug, Clone, Copy)]
pub struct Resonance {
    pub f0: f64,
    pub q: f64,
}

impl Resonance {
    pub fn from_angular(omega0: f64, q: f64) -> Self {
        Self {
            f0: omega0 / (2.0 * PI),
            q,
        }
    }

    fn breakpoints(&self, cut_x: f64) -> Vec<f64> {
        let half_width = 0.5 / self.q;
        let mut xs = vec![0.0, cut_x];
        for k in [1.0, 3.0, 10.0, 30.0] {
            xs.push(1.0 - k * half_width);
            xs.push(1.0 + k * half_width);
        }
        xs.extend([1.0, 2.0, 10.0, 100.0, 1000.0]);
        let mut fs: Vec<f64> = xs
            .into_iter()
            .filter(|&x| (0.0..=cut_x).contains(&x))
            .map(|x| x * self.f0)
            .collect();
        fs.sort_by(f64::total_cmp);
        fs.dedup();
        fs
    }
}

/// `∫₀^∞ S(f) df` with an `f^-tail_exponent` tail beyond `x = 100`
/// (`x = 10⁴` for tails of exponent below 3).
pub fn integrate_density<F: Fn(f64) -> f64>(
    density: F,
    resonance: Resonance,
    tail_exponent: f64,
) -> Result<Estimate> {
    let cut = if tail_exponent < 3.0 {
        SLOW_TAIL_CUTOFF_X
    } else {
        TAIL_CUTOFF_X
    };
    Quadrature::default().integrate_with_power_tail(
        density,
        &resonance.breakpoints(cut),
        tail_exponent,
    )
}

/// Numerical Wiener–Khinchin inversion `R(t) = ∫₀^∞ S(f) cos(2πft) df`.
pub struct WienerKhinchin<F> {
    density: F,
    resonance: Resonance,
    tail_exponent: f64,
    zero_lag: f64,
}

impl<F: Fn(f64) -> f64> WienerKhinchin<F> {
    pub fn new(density: F, resonance: Resonance, tail_exponent: f64) -> Result<Self> {
        let zero_lag = integrate_density(&density, resonance, tail_exponent)?.value;
        Ok(Self {
            density,
            resonance,
            tail_exponent,
            zero_lag,
        })
    }

    pub fn zero_lag(&self) -> f64 {
        self.zero_lag
    }

    /// Autocorrelation at lag `t` (s). For `t > 0` the integral is truncated
    /// at `x = 1000` and the neglected tail magnitude is added to the error.
    pub fn autocorrelation(&self, t: f64) -> Result<Estimate> {
        if t == 0.0 {
            return Ok(Estimate {
                value: self.zero_lag,
                error: 0.0,
            });
        }
        let cut = LAG_CUTOFF_X * self.resonance.f0;
        let mut points = self.resonance.breakpoints(LAG_CUTOFF_X);
        let period = 1.0 / t.abs();
        let n = (cut / period).ceil() as usize;
        points.extend((1..n).map(|k| k as f64 * period));
        points.sort_by(f64::total_cmp);
        points.dedup();
        let quad = Quadrature::with_tolerances(1e-9, 1e-11 * self.zero_lag.abs());
        let body = quad.integrate_breakpoints(
            |f| (self.density)(f) * (2.0 * PI * f * t).cos(),
            &points,
        )?;
        let tail_bound = (self.density)(cut) * cut / (self.tail_exponent - 1.0);
        Ok(Estimate {
            value: body.value,
            error: body.error + tail_bound.abs(),
        })
    }
}

/// Variance of the time average of a stationary process over `[0, window]`:
/// `(2/T) ∫₀^T (1 - t/T) R(t) dt`.
///
/// The integrand is truncated where the envelope has decayed below e^-45 of
/// its initial value, `45 * relaxation_time`. Panels are one `period` wide.
pub fn windowed_mean_variance<R: Fn(f64) -> f64>(
    autocorr: R,
    window: f64,
    relaxation_time: f64,
    period: f64,
) -> Result<f64> {
    let upper = window.min(45.0 * relaxation_time);
    let panels = ((upper / period).ceil() as usize).clamp(16, 20_000);
    let points: Vec<f64> = (0..=panels)
        .map(|k| upper * k as f64 / panels as f64)
        .collect();
    let scale = autocorr(0.0).abs() * upper;
    let quad = Quadrature::with_tolerances(1e-9, 1e-13 * scale);
    let integral = quad.integrate_breakpoints(|t| (1.0 - t / window) * autocorr(t), &points)?;
    Ok(2.0 * integral.value / window)
}
