use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::TimeSeries;

pub const MIN_RECORDS: usize = 100;

/// Variance across records of their time averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanVariance {
    pub variance: f64,
    /// `variance · sqrt(2/(n-1))`, the standard error of a Gaussian sample variance.
    pub standard_error: f64,
    pub n_records: usize,
    pub samples_per_record: usize,
}

/// Unbiased variance of the per-record means over the first `window`
/// seconds of each record.
pub fn ensemble_mean_variance(records: &[TimeSeries], window: f64) -> Result<MeanVariance> {
    if records.len() < MIN_RECORDS {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_RECORDS} independent records, got {}",
            records.len()
        )));
    }
    let dt = records[0].dt();
    if records.iter().any(|r| r.dt() != dt) {
        return Err(Error::InvalidParameter {
            name: "records",
            reason: "all records must share the same dt".into(),
        });
    }
    let means = records
        .iter()
        .map(|r| window_mean(r, window))
        .collect::<Result<Vec<_>>>()?;
    let m = samples_in_window(dt, window)?;
    MeanVariance::from_means(&means, m)
}

fn samples_in_window(dt: f64, window: f64) -> Result<usize> {
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("must be finite and > 0, got {window}"),
        });
    }
    let m = (window / dt).round() as usize;
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("window {window} s is shorter than one sample ({dt} s)"),
        });
    }
    Ok(m)
}

/// Average of the samples falling in the first `window` seconds of `record`.
pub fn window_mean(record: &TimeSeries, window: f64) -> Result<f64> {
    let m = samples_in_window(record.dt(), window)?;
    if record.len() < m {
        return Err(Error::InsufficientData(format!(
            "record of {} samples does not span the {m}-sample window",
            record.len()
        )));
    }
    Ok(record.values()[..m].iter().sum::<f64>() / m as f64)
}

impl MeanVariance {
    /// Unbiased variance of already-computed per-record means. Lets large
    /// ensembles be reduced record by record without holding every series.
    pub fn from_means(means: &[f64], samples_per_record: usize) -> Result<Self> {
        if means.len() < MIN_RECORDS {
            return Err(Error::InsufficientData(format!(
                "need at least {MIN_RECORDS} independent records, got {}",
                means.len()
            )));
        }
        let n = means.len() as f64;
        let grand = means.iter().sum::<f64>() / n;
        let variance = means.iter().map(|x| (x - grand) * (x - grand)).sum::<f64>() / (n - 1.0);
        Ok(Self {
            variance,
            standard_error: variance * (2.0 / (n - 1.0)).sqrt(),
            n_records: means.len(),
            samples_per_record,
        })
    }
}
