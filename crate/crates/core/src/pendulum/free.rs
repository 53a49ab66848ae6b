//! Free pendulum: no applied torque besides the thermal drive.

use std::f64::consts::PI;

use super::kernel::{resonance_denominator, ringdown, Ringing};
use super::numeric::windowed_mean_variance;
use super::{check_frequency, check_lag, NoiseSpectrum, PendulumParams, SpectrumKind, STANDARD_GRAVITY};
use crate::error::{positive, Result};

/// RMS torsion angle from equipartition, sqrt(kT/α), rad.
pub fn equipartition_angle_rms(params: &PendulumParams) -> f64 {
    (params.thermal_energy() / params.stiffness()).sqrt()
}

/// Ratio of torsion-mode to swing-mode RMS angle noise, sqrt(m g ℓ / α).
///
/// `mass` in g, `length` (pendulum length, not the fiber) in cm.
pub fn swing_to_torsion_ratio(params: &PendulumParams, mass: f64, length: f64) -> Result<f64> {
    let mass = positive("mass", mass)?;
    let length = positive("length", length)?;
    Ok((mass * STANDARD_GRAVITY * length / params.stiffness()).sqrt())
}

/// One-sided angle noise density, rad²/Hz:
/// `(4kTγ/α²) / ((1 - x²)² + x²/Q²)` with `x = 2πf/ω₀`.
pub fn free_angle_psd(params: &PendulumParams, f: f64) -> Result<f64> {
    let f = check_frequency(f)?;
    let d = params.derive();
    let x = 2.0 * PI * f / d.omega0;
    let dc = 4.0 * params.thermal_energy() * params.damping() / params.stiffness().powi(2);
    Ok(dc / resonance_denominator(x, d.q))
}

pub fn free_angle_spectrum(params: &PendulumParams, frequencies: &[f64]) -> Result<NoiseSpectrum> {
    NoiseSpectrum::from_fn(SpectrumKind::AngleDensity, frequencies, |f| {
        free_angle_psd(params, f)
    })
}

/// Angle autocorrelation `R_θ(t)`, rad². `R_θ(0) = kT/α`.
pub fn free_angle_autocorr(params: &PendulumParams, t: f64) -> Result<f64> {
    let t = check_lag(t)?;
    let d = params.derive();
    Ok(params.thermal_energy() / params.stiffness() * ringdown(d.q, d.omega0 * t))
}

/// Variance of the sample mean of θ over an averaging window `window` (s),
/// by quadrature of the autocorrelation.
pub fn sample_mean_variance(params: &PendulumParams, window: f64) -> Result<f64> {
    let window = positive("averaging time", window)?;
    let d = params.derive();
    let period = match d.ringing {
        Ringing::Underdamped { omega } => d.tau0 / omega,
        _ => d.relaxation_time(),
    };
    let variance = params.thermal_energy() / params.stiffness();
    windowed_mean_variance(
        |t| variance * ringdown(d.q, d.omega0 * t),
        window,
        d.relaxation_time(),
        period,
    )
}

/// Long-window limit of [`sample_mean_variance`]: `2kT / (α Q ω₀ T_m)`.
pub fn sample_mean_variance_asymptote(params: &PendulumParams, window: f64) -> Result<f64> {
    let window = positive("averaging time", window)?;
    let d = params.derive();
    Ok(2.0 * params.thermal_energy() / (params.stiffness() * d.q * d.omega0 * window))
}

/// RMS angle of a long average, `sqrt(4kT/(I τ_d T_m)) (τ₀/2π)²`.
pub fn free_rms_angle_noise(params: &PendulumParams, window: f64) -> Result<f64> {
    let window = positive("averaging time", window)?;
    let d = params.derive();
    let scale = d.tau0 / (2.0 * PI);
    Ok((4.0 * params.thermal_energy() / (params.inertia() * d.tau_d * window)).sqrt() * scale * scale)
}

/// RMS force noise of a long average at lever arm `arm` (cm),
/// `sqrt(2γkT/(R² T_m))`, dyne.
pub fn free_rms_force_noise(params: &PendulumParams, arm: f64, window: f64) -> Result<f64> {
    let arm = positive("arm", arm)?;
    let window = positive("averaging time", window)?;
    Ok((2.0 * params.damping() * params.thermal_energy() / (arm * arm * window)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pendulum::BOLTZMANN;

    fn q10() -> PendulumParams {
        PendulumParams::new(1.0, 0.1, 1.0, 300.0).unwrap()
    }

    #[test]
    fn equipartition_value_at_room_temperature() {
        let p = q10();
        let kt = BOLTZMANN * 300.0;
        assert!((kt - 4.141_947e-14).abs() < 1e-19);
        assert!((equipartition_angle_rms(&p) - 2.035_177e-7).abs() < 1e-12);
        let stiff = PendulumParams::new(1.0, 0.1, 4.0, 300.0).unwrap();
        assert!((equipartition_angle_rms(&stiff) * 2.0 - equipartition_angle_rms(&p)).abs() < 1e-20);
    }

    #[test]
    fn swing_ratio() {
        let p = q10();
        let r = swing_to_torsion_ratio(&p, 100.0, 10.0).unwrap();
        assert!((r - 990.285_312).abs() < 1e-5);
        let r100 = swing_to_torsion_ratio(&p, 1e4, 10.0).unwrap();
        assert!((r100 / r - 10.0).abs() < 1e-12);
        let matched = PendulumParams::new(1.0, 0.1, 100.0 * STANDARD_GRAVITY * 10.0, 300.0).unwrap();
        assert!((swing_to_torsion_ratio(&matched, 100.0, 10.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(swing_to_torsion_ratio(&p, 0.0, 10.0).is_err());
    }

    #[test]
    fn psd_at_dc_and_resonance() {
        let p = q10();
        let d = p.derive();
        let dc = 4.0 * p.thermal_energy() * p.damping() / (p.stiffness() * p.stiffness());
        assert_eq!(free_angle_psd(&p, 0.0).unwrap(), dc);
        let peak = free_angle_psd(&p, d.omega0 / (2.0 * PI)).unwrap();
        assert!((peak / (dc * d.q * d.q) - 1.0).abs() < 1e-12);
        assert!(free_angle_psd(&p, -1.0).is_err());
    }

    #[test]
    fn autocorr_at_zero_is_variance() {
        for g in [0.1, 1.0, 2.0, 5.0] {
            let p = PendulumParams::new(1.0, g, 1.0, 300.0).unwrap();
            assert_eq!(free_angle_autocorr(&p, 0.0).unwrap(), p.thermal_energy() / p.stiffness());
        }
        assert!(free_angle_autocorr(&q10(), -0.1).is_err());
    }

    #[test]
    fn critical_autocorr_closed_form() {
        let p = PendulumParams::new(1.0, 2.0, 1.0, 300.0).unwrap();
        let var = p.thermal_energy();
        for &t in &[0.5, 1.0, 3.0] {
            let expected = var * (-t as f64).exp() * (1.0 + t);
            assert!((free_angle_autocorr(&p, t).unwrap() - expected).abs() < 1e-15 * var);
        }
    }

    #[test]
    fn short_window_variance_is_equipartition() {
        let p = q10();
        let tau0 = p.derive().tau0;
        let v = sample_mean_variance(&p, tau0 * 1e-4).unwrap();
        let var = p.thermal_energy() / p.stiffness();
        assert!((v / var - 1.0).abs() < 1e-3);
        assert!(sample_mean_variance(&p, 0.0).is_err());
    }

    #[test]
    fn long_window_variance_matches_asymptote() {
        let p = PendulumParams::from_resonance(1.0, 100.0, 1.0, 300.0).unwrap();
        let v = sample_mean_variance(&p, 1e5).unwrap();
        let asym = sample_mean_variance_asymptote(&p, 1e5).unwrap();
        assert!((v / asym - 1.0).abs() < 0.05);
        // Finite-window correction: 1 + Q (1 - 1/Q²) / (ω₀ T_m).
        let expected = asym * (1.0 + 100.0 * (1.0 - 1e-4) / 1e5);
        assert!((v / expected - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rms_angle_forms_agree() {
        for (q, w) in [(10.0, 1e3), (0.6, 50.0), (300.0, 1e6)] {
            let p = PendulumParams::from_resonance(2.5, q, 0.7, 300.0).unwrap();
            let eq16 = free_rms_angle_noise(&p, w).unwrap();
            let eq14 = sample_mean_variance_asymptote(&p, w).unwrap().sqrt();
            assert!((eq16 / eq14 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn force_noise_worked_value() {
        let p = PendulumParams::new(1.0, 10.0, 1.0, 300.0).unwrap();
        let df = free_rms_force_noise(&p, 10.0, 1000.0).unwrap();
        assert!((df - 2.878_175e-9).abs() < 1e-14);
        let df4 = free_rms_force_noise(&p, 10.0, 4000.0).unwrap();
        assert!((df / df4 - 2.0).abs() < 1e-12);
        assert!(free_rms_force_noise(&p, 0.0, 1.0).is_err());
    }
}
