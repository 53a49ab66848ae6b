//! PI-locked pendulum with the inertial term dropped:
//! `γθ̇ + αθ = τ(t) - βθ - κ∫θ dt`. The integrator output `κ∫θ dt` is the
//! torque readout; dividing by the lever arm gives the measured force.

use std::f64::consts::PI;

use super::kernel::{resonance_denominator, ringdown};
use super::{
    check_frequency, check_lag, derive_feedback, FeedbackParams, NoiseSpectrum, PendulumParams,
    SpectrumKind,
};
use crate::error::{positive, Error, Result};

/// Minimum `T_m · ω0_fb · min(Q_fb, 1)` for the long-average noise formula.
pub const LONG_AVERAGE_GUARD: f64 = 100.0;

/// Closed-loop angle noise density, rad²/Hz:
/// `(4kTγ/κ²) ω² / ((1 - x²)² + x²/Q_fb²)`, zero at DC.
pub fn feedback_angle_psd(params: &PendulumParams, fb: &FeedbackParams, f: f64) -> Result<f64> {
    let f = check_frequency(f)?;
    let d = derive_feedback(params, fb);
    let omega = 2.0 * PI * f;
    let x = omega / d.omega0_fb;
    let scale = 4.0 * params.thermal_energy() * params.damping() / (fb.kappa() * fb.kappa());
    Ok(scale * omega * omega / resonance_denominator(x, d.q_fb))
}

/// Integrator-output force noise density at lever arm `arm`, dyne²/Hz:
/// `(4kTγ/R²) / ((1 - x²)² + x²/Q_fb²)`.
pub fn feedback_force_psd(
    params: &PendulumParams,
    fb: &FeedbackParams,
    arm: f64,
    f: f64,
) -> Result<f64> {
    let f = check_frequency(f)?;
    let arm = positive("arm", arm)?;
    let d = derive_feedback(params, fb);
    let x = 2.0 * PI * f / d.omega0_fb;
    Ok(4.0 * params.thermal_energy() * params.damping() / (arm * arm)
        / resonance_denominator(x, d.q_fb))
}

pub fn feedback_angle_spectrum(
    params: &PendulumParams,
    fb: &FeedbackParams,
    frequencies: &[f64],
) -> Result<NoiseSpectrum> {
    NoiseSpectrum::from_fn(SpectrumKind::AngleDensity, frequencies, |f| {
        feedback_angle_psd(params, fb, f)
    })
}

pub fn feedback_force_spectrum(
    params: &PendulumParams,
    fb: &FeedbackParams,
    arm: f64,
    frequencies: &[f64],
) -> Result<NoiseSpectrum> {
    NoiseSpectrum::from_fn(SpectrumKind::ForceDensity, frequencies, |f| {
        feedback_force_psd(params, fb, arm, f)
    })
}

/// Integrator-output force density of the loop with the inertial term kept:
/// `(4kTγ/R²) κ² / |κ - γω² + i ω (α + β - I ω²)|²`.
pub fn feedback_force_psd_with_inertia(
    params: &PendulumParams,
    fb: &FeedbackParams,
    arm: f64,
    f: f64,
) -> Result<f64> {
    let f = check_frequency(f)?;
    let arm = positive("arm", arm)?;
    let w = 2.0 * PI * f;
    let re = fb.kappa() - params.damping() * w * w;
    let im = w * (params.stiffness() + fb.beta() - params.inertia() * w * w);
    let kappa2 = fb.kappa() * fb.kappa();
    Ok(4.0 * params.thermal_energy() * params.damping() / (arm * arm) * kappa2 / (re * re + im * im))
}

/// Autocorrelation of the integrator-output force, dyne²:
/// `(ω0_fb γ kT / R²) e^{-u/2Q} [Q cos(Ωu) + sin(Ωu)/(2Ω)]`, `u = ω0_fb t`.
pub fn feedback_force_autocorr(
    params: &PendulumParams,
    fb: &FeedbackParams,
    arm: f64,
    t: f64,
) -> Result<f64> {
    let t = check_lag(t)?;
    let arm = positive("arm", arm)?;
    let d = derive_feedback(params, fb);
    let zero_lag = d.omega0_fb * params.damping() * params.thermal_energy() * d.q_fb / (arm * arm);
    Ok(zero_lag * ringdown(d.q_fb, d.omega0_fb * t))
}

/// Closed-loop angle variance `kT/(α + β)`, the integral of [`feedback_angle_psd`].
pub fn feedback_angle_variance(params: &PendulumParams, fb: &FeedbackParams) -> f64 {
    params.thermal_energy() / (params.stiffness() + fb.beta())
}

/// RMS force noise of the integrator output averaged over `window` (s),
/// `sqrt(2γkT/(R² T_m))`. Requires the window to span many loop
/// correlation times.
pub fn feedback_rms_force_noise(
    params: &PendulumParams,
    fb: &FeedbackParams,
    arm: f64,
    window: f64,
) -> Result<f64> {
    let arm = positive("arm", arm)?;
    let window = positive("averaging time", window)?;
    let d = derive_feedback(params, fb);
    let span = window * d.omega0_fb * d.q_fb.min(1.0);
    if span <= LONG_AVERAGE_GUARD {
        return Err(Error::AveragingTooShort(format!(
            "T_m·ω0_fb·min(Q_fb,1) = {span:.4} must exceed {LONG_AVERAGE_GUARD}; the formula \
             assumes an average over many loop correlation times (ω0_fb = {:.4e} rad/s, Q_fb = {:.4})",
            d.omega0_fb, d.q_fb
        )));
    }
    Ok((2.0 * params.damping() * params.thermal_energy() / (arm * arm * window)).sqrt())
}
