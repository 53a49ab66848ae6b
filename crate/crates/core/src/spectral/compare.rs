use serde::{Deserialize, Serialize};

use super::welch::PsdEstimate;
use crate::error::{Error, Result};
use crate::pendulum::NoiseSpectrum;

/// Half-open frequency band `[lo, hi)` in Hz; the last band of a set is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

/// Decade-wide bands tiling `[lo, hi]`; the last band is shortened to end at `hi`.
pub fn decade_bands(lo: f64, hi: f64) -> Result<Vec<Band>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "bands",
            reason: format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        });
    }
    let mut bands = Vec::new();
    let mut edge = lo;
    while edge < hi * (1.0 - 1e-12) {
        let next = (edge * 10.0).min(hi);
        bands.push(Band { lo: edge, hi: next });
        edge = next;
    }
    Ok(bands)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandDeviation {
    pub band: Band,
    pub n_bins: usize,
    pub estimate_mean: f64,
    pub model_mean: f64,
    /// `estimate_mean / model_mean - 1`
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub bands: Vec<BandDeviation>,
    /// Sum of squared band deviations.
    pub chi_square: f64,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Band-averaged relative deviation of a PSD estimate from a model spectrum.
///
/// The model is linearly interpolated onto the estimate's bins. Bands must be
/// contiguous and every band must contain at least one bin inside both
/// supports.
pub fn compare_psd(
    estimate: &PsdEstimate,
    model: &NoiseSpectrum,
    bands: &[Band],
    tolerance: f64,
) -> Result<ComparisonReport> {
    if bands.is_empty() {
        return Err(Error::InvalidParameter {
            name: "bands",
            reason: "no bands requested".into(),
        });
    }
    for b in bands {
        if !(b.hi > b.lo) {
            return Err(Error::InvalidParameter {
                name: "bands",
                reason: format!("empty band [{}, {}]", b.lo, b.hi),
            });
        }
    }
    for w in bands.windows(2) {
        if w[0].hi != w[1].lo {
            return Err(Error::InvalidParameter {
                name: "bands",
                reason: format!("gap or overlap between {} and {}", w[0].hi, w[1].lo),
            });
        }
    }
    let m_lo = model.frequencies()[0];
    let m_hi = *model.frequencies().last().expect("spectrum is non-empty");
    let e_lo = estimate.frequencies.first().copied().unwrap_or(f64::NAN);
    let e_hi = estimate.frequencies.last().copied().unwrap_or(f64::NAN);
    if !(m_hi >= e_lo && e_hi >= m_lo) {
        return Err(Error::InvalidParameter {
            name: "model",
            reason: format!("model support [{m_lo}, {m_hi}] Hz is disjoint from estimate [{e_lo}, {e_hi}] Hz"),
        });
    }

    let last = bands.len() - 1;
    let mut out = Vec::with_capacity(bands.len());
    for (i, band) in bands.iter().enumerate() {
        let (mut est_sum, mut mod_sum, mut n) = (0.0, 0.0, 0usize);
        for (&f, &s) in estimate.frequencies.iter().zip(&estimate.values) {
            let inside = f >= band.lo && (f < band.hi || (i == last && f <= band.hi));
            if !inside {
                continue;
            }
            if let Some(m) = model.interpolate(f) {
                est_sum += s;
                mod_sum += m;
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::InsufficientData(format!(
                "band [{}, {}] Hz holds no estimate bins inside the model support",
                band.lo, band.hi
            )));
        }
        let estimate_mean = est_sum / n as f64;
        let model_mean = mod_sum / n as f64;
        out.push(BandDeviation {
            band: *band,
            n_bins: n,
            estimate_mean,
            model_mean,
            deviation: estimate_mean / model_mean - 1.0,
        });
    }
    let chi_square = out.iter().map(|b| b.deviation * b.deviation).sum();
    let max_abs_deviation = out.iter().map(|b| b.deviation.abs()).fold(0.0, f64::max);
    Ok(ComparisonReport {
        bands: out,
        chi_square,
        max_abs_deviation,
        tolerance,
        pass: max_abs_deviation <= tolerance,
    })
}
