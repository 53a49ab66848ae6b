//! Averaged-periodogram (Welch) PSD, one-sided and per Hz.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    /// Periodic window coefficients of length `n`.
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| {
                    let phase = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    0.5 * (1.0 - phase.cos())
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    pub n_segments: usize,
    pub window: Window,
    pub overlap_fraction: f64,
}

impl PsdEstimate {
    pub fn bin_width(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    /// `Σ S(f) Δf`, the variance the estimate accounts for.
    pub fn integrated_power(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bin_width()
    }

    pub fn to_text(&self, header: &[String]) -> String {
        let mut h = header.to_vec();
        h.push(format!("n_segments = {}", self.n_segments));
        h.push(format!("window = {:?}", self.window).to_lowercase());
        h.push(format!("overlap_fraction = {}", self.overlap_fraction));
        let rows: Vec<Vec<f64>> = self
            .frequencies
            .iter()
            .zip(&self.values)
            .map(|(&f, &s)| vec![f, s])
            .collect();
        super::columns_to_text(&h, &["frequency_hz", "density"], &rows)
    }
}

/// Largest power of two not exceeding `len / 8`, the default segment length.
pub fn default_segment_len(len: usize) -> Result<usize> {
    let eighth = len / 8;
    if eighth < 2 {
        return Err(Error::InsufficientData(format!(
            "record of {len} samples is too short for default segmentation"
        )));
    }
    Ok(1usize << (usize::BITS - 1 - eighth.leading_zeros()))
}

/// Welch estimate with Hann window, 50% overlap and segments of 1/8 of the
/// record (rounded down to a power of two).
pub fn estimate_psd_default(ts: &TimeSeries) -> Result<PsdEstimate> {
    estimate_psd(ts, default_segment_len(ts.len())?, 0.5, Window::Hann)
}

pub fn estimate_psd(
    ts: &TimeSeries,
    segment_len: usize,
    overlap_fraction: f64,
    window: Window,
) -> Result<PsdEstimate> {
    if segment_len < 2 || !segment_len.is_power_of_two() {
        return Err(Error::InvalidParameter {
            name: "segment_len",
            reason: format!("must be a power of two ≥ 2, got {segment_len}"),
        });
    }
    if segment_len > ts.len() {
        return Err(Error::InsufficientData(format!(
            "segment of {segment_len} samples exceeds record of {}",
            ts.len()
        )));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::InvalidParameter {
            name: "overlap_fraction",
            reason: format!("must lie in [0, 1), got {overlap_fraction}"),
        });
    }
    let overlap = (overlap_fraction * segment_len as f64).round() as usize;
    let step = (segment_len - overlap).max(1);
    let n_segments = (ts.len() - segment_len) / step + 1;

    let coeffs = window.coefficients(segment_len);
    let window_power: f64 = coeffs.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_len);
    let data = ts.values();
    let half = segment_len / 2;

    let periodograms: Vec<Vec<f64>> = (0..n_segments)
        .into_par_iter()
        .map(|s| {
            let seg = &data[s * step..s * step + segment_len];
            let mean = seg.iter().sum::<f64>() / segment_len as f64;
            let mut buf: Vec<Complex64> = seg
                .iter()
                .zip(&coeffs)
                .map(|(x, w)| Complex64::new((x - mean) * w, 0.0))
                .collect();
            fft.process(&mut buf);
            buf[..=half].iter().map(|c| c.norm_sqr()).collect()
        })
        .collect();

    // Fixed-order reduction keeps the result independent of thread scheduling.
    let mut acc = vec![0.0; half + 1];
    for p in &periodograms {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    let fs = 1.0 / ts.dt();
    let norm = 1.0 / (fs * window_power * n_segments as f64);
    let values: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || k == half { 1.0 } else { 2.0 };
            p * norm * one_sided
        })
        .collect();
    let frequencies = (0..=half)
        .map(|k| k as f64 * fs / segment_len as f64)
        .collect();
    Ok(PsdEstimate {
        frequencies,
        values,
        n_segments,
        window,
        overlap_fraction,
    })
}
