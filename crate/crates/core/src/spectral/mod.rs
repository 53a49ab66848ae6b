//! Estimators that turn simulated records into quantities comparable with
//! the closed forms.

pub mod autocorr;
pub mod compare;
pub mod ensemble;
pub mod welch;

pub use autocorr::estimate_autocorr;
pub use compare::{compare_psd, decade_bands, Band, BandDeviation, ComparisonReport};
pub use ensemble::{ensemble_mean_variance, window_mean, MeanVariance};
pub use welch::{default_segment_len, estimate_psd, estimate_psd_default, PsdEstimate, Window};

use std::fmt::Write as _;

/// Renders `#` header lines followed by whitespace-separated columns.
pub fn columns_to_text(header: &[String], names: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    let _ = writeln!(out, "# columns = {}", names.join(" "));
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}
