//! Simulated trajectories against the closed forms.

mod common;

use std::f64::consts::PI;

use common::{rel, sample_variance};
use torsion_noise::pendulum::feedback::{
    feedback_angle_spectrum, feedback_force_psd, feedback_force_psd_with_inertia,
    feedback_force_spectrum,
};
use torsion_noise::pendulum::free::{free_angle_autocorr, free_angle_spectrum};
use torsion_noise::pendulum::kernel::ringdown;
use torsion_noise::sim::{
    simulate_feedback, simulate_free, Hooks, SimConfig, Stepper, INERTIA_WARNING_RATIO,
};
use torsion_noise::spectral::{
    compare_psd, decade_bands, estimate_autocorr, estimate_psd, estimate_psd_default, PsdEstimate,
    Window,
};
use torsion_noise::{derive_feedback, Error, FeedbackParams, NoiseSpectrum, PendulumParams};

fn oscillator(q: f64, temperature: f64) -> PendulumParams {
    PendulumParams::from_resonance(1.0, q, 1.0, temperature).unwrap()
}

fn locked(q_fb: f64) -> (PendulumParams, FeedbackParams) {
    let p = PendulumParams::new(1.0, 10.0, 1.0, 300.0).unwrap();
    let fb = FeedbackParams::for_loop(&p, 1.0, q_fb).unwrap();
    (p, fb)
}

fn band_frequencies(est: &PsdEstimate, lo: f64, hi: f64) -> Vec<f64> {
    est.frequencies
        .iter()
        .copied()
        .filter(|&f| f >= lo && f <= hi)
        .collect()
}

#[test]
fn temperature_scales_trajectory_by_its_square_root() {
    let cool = SimConfig::free(oscillator(5.0, 300.0), 0.05, 50_000, 3);
    let hot = SimConfig {
        pendulum: oscillator(5.0, 1200.0),
        ..cool.clone()
    };
    let a = simulate_free(&cool).unwrap().angle;
    let b = simulate_free(&hot).unwrap().angle;
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((y - 2.0 * x).abs() <= 1e-9 * a.variance().sqrt(), "{x} {y}");
    }
    let pa = estimate_psd_default(&a).unwrap();
    let pb = estimate_psd_default(&b).unwrap();
    for (x, y) in pa.values.iter().zip(&pb.values).skip(1) {
        assert!(rel(*y, 4.0 * x) < 1e-8);
    }
}

#[test]
fn ringdown_without_noise() {
    let q = 8.0;
    let theta0 = 1e-3;
    let dt = 0.01;
    let cfg = SimConfig {
        n_burnin: Some(0),
        hooks: Hooks {
            thermal_noise: false,
            initial_angle: theta0,
            ..Hooks::default()
        },
        ..SimConfig::free(oscillator(q, 300.0), dt, 5000, 0)
    };
    let run = simulate_free(&cfg).unwrap();
    for (k, &theta) in run.angle.values().iter().enumerate() {
        let t = (k + 1) as f64 * dt;
        assert!((theta - theta0 * ringdown(q, t)).abs() < 1e-12 * theta0, "t={t}");
    }
}

#[test]
fn constant_torque_is_taken_up_by_the_integrator() {
    let (p, fb) = locked(0.7);
    let torque = 3e-6;
    let cfg = SimConfig {
        n_burnin: Some(0),
        hooks: Hooks {
            thermal_noise: false,
            external_torque: torque,
            ..Hooks::default()
        },
        ..SimConfig::locked(p, fb, 0.05, 0, 0)
    };
    let relax = cfg.relaxation_time();
    let cfg = SimConfig {
        n_steps: (30.0 * relax / cfg.dt) as usize,
        ..cfg
    };
    let run = simulate_feedback(&cfg).unwrap();
    let last = *run.integrator_torque.values().last().unwrap();
    assert!(rel(last, torque) < 1e-9, "{last}");
    assert!(run.angle.values().last().unwrap().abs() < 1e-9 * torque / p.stiffness());
}

#[test]
fn short_burnin_needs_noise_off() {
    let cfg = SimConfig {
        n_burnin: Some(0),
        ..SimConfig::free(oscillator(3.0, 300.0), 0.05, 100, 0)
    };
    assert!(matches!(simulate_free(&cfg), Err(Error::InvalidParameter { .. })));
}

#[test]
fn oversized_step_rejected() {
    let cfg = SimConfig::free(oscillator(3.0, 300.0), 0.2, 100, 0);
    assert!(simulate_free(&cfg).is_err());
}

#[test]
fn free_autocorrelation_matches_closed_form() {
    let p = oscillator(10.0, 300.0);
    let dt = 0.05;
    let run = simulate_free(&SimConfig::free(p, dt, 1 << 22, 21)).unwrap();
    let relax = p.derive().relaxation_time();
    let lags = (3.0 * relax / dt) as usize;
    let acf = estimate_autocorr(&run.angle, lags).unwrap();
    let r0 = free_angle_autocorr(&p, 0.0).unwrap();
    for (k, r) in acf.iter().enumerate() {
        let model = free_angle_autocorr(&p, k as f64 * dt).unwrap();
        assert!((r - model).abs() < 0.05 * r0, "lag {k}: {r} vs {model}");
    }
}

#[test]
fn locked_spectra_match_closed_forms() {
    let (p, fb) = locked(0.5);
    let arm = 2.0;
    let d = derive_feedback(&p, &fb);
    let f0 = d.omega0_fb / (2.0 * PI);
    let run = simulate_feedback(&SimConfig::locked(p, fb, 0.05, 1 << 22, 5)).unwrap();
    assert!(run.warnings.is_empty());
    let (lo, hi) = (0.01 * f0, 5.0 * f0);
    let bands = decade_bands(lo, hi).unwrap();

    let force = run.integrator_torque.scaled(1.0 / arm);
    let est = estimate_psd_default(&force).unwrap();
    let model = feedback_force_spectrum(&p, &fb, arm, &band_frequencies(&est, lo, hi)).unwrap();
    let report = compare_psd(&est, &model, &bands, 0.10).unwrap();
    assert!(report.pass, "{report:?}");

    let est = estimate_psd_default(&run.angle).unwrap();
    let model = feedback_angle_spectrum(&p, &fb, &band_frequencies(&est, lo, hi)).unwrap();
    let report = compare_psd(&est, &model, &bands, 0.10).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn light_pendulum_with_inertia_matches_inertia_free_forms() {
    // I ω0_fb / γ = 1e-3
    let heavy = PendulumParams::new(1.0, 10.0, 1.0, 300.0).unwrap();
    let fb = FeedbackParams::for_loop(&heavy, 1.0, 0.5).unwrap();
    let p = PendulumParams::new(1e-2, 10.0, 1.0, 300.0).unwrap();
    let d = derive_feedback(&p, &fb);
    assert!((p.inertia() * d.omega0_fb / p.damping() - 1e-3).abs() < 1e-15);
    let arm = 1.0;

    let f0 = d.omega0_fb / (2.0 * PI);
    for i in 0..=200 {
        let f = f0 * 0.01 * 300f64.powf(i as f64 / 200.0);
        let with = feedback_force_psd_with_inertia(&p, &fb, arm, f).unwrap();
        let without = feedback_force_psd(&p, &fb, arm, f).unwrap();
        assert!(rel(with, without) < 0.01);
    }

    let cfg = SimConfig {
        include_inertia: true,
        ..SimConfig::locked(p, fb, 0.05, 1 << 22, 8)
    };
    let run = simulate_feedback(&cfg).unwrap();
    assert!(run.warnings.is_empty());
    // Short segments: the low band is flat, and many averages keep its
    // scatter well inside the tolerance.
    let est = estimate_psd(&run.integrator_torque, 1 << 15, 0.5, Window::Hann).unwrap();
    let (lo, hi) = (0.01 * f0, 3.0 * f0);
    let model = feedback_force_spectrum(&p, &fb, arm, &band_frequencies(&est, lo, hi)).unwrap();
    let report = compare_psd(&est, &model, &decade_bands(lo, hi).unwrap(), 0.05).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn heavy_pendulum_with_inertia_warns() {
    let (_, fb) = locked(0.5);
    let p = PendulumParams::new(1.0, 10.0, 1.0, 300.0).unwrap();
    let d = derive_feedback(&p, &fb);
    assert!(p.inertia() * d.omega0_fb / p.damping() > INERTIA_WARNING_RATIO);
    let cfg = SimConfig {
        include_inertia: true,
        ..SimConfig::locked(p, fb, 0.05, 1000, 1)
    };
    assert_eq!(simulate_feedback(&cfg).unwrap().warnings.len(), 1);
}

/// Average of Welch estimates over independent records.
fn averaged_psd(cfg: &SimConfig, records: u64, segment: usize) -> PsdEstimate {
    let mut acc: Option<PsdEstimate> = None;
    for r in 0..records {
        let run = simulate_free(&SimConfig {
            seed: cfg.seed + r,
            ..cfg.clone()
        })
        .unwrap();
        let est = estimate_psd(&run.angle, segment, 0.5, Window::Hann).unwrap();
        match &mut acc {
            None => acc = Some(est),
            Some(a) => a.values.iter_mut().zip(&est.values).for_each(|(s, v)| *s += v),
        }
    }
    let mut a = acc.unwrap();
    a.values.iter_mut().for_each(|v| *v /= records as f64);
    a
}

#[test]
fn euler_maruyama_agrees_with_exact_propagation_at_small_step() {
    let p = oscillator(2.0, 300.0);
    let dt = 0.01;
    let exact = SimConfig::free(p, dt, 1 << 22, 100);
    let euler = SimConfig {
        stepper: Stepper::EulerMaruyama,
        seed: 200,
        ..exact.clone()
    };
    let a = averaged_psd(&exact, 16, 1 << 16);
    let b = averaged_psd(&euler, 16, 1 << 16);
    let f0 = p.derive().omega0 / (2.0 * PI);
    let (lo, hi) = (0.1 * f0, 10.0 * f0);
    let reference = NoiseSpectrum::new(
        torsion_noise::SpectrumKind::AngleDensity,
        a.frequencies.clone(),
        a.values.clone(),
    )
    .unwrap();
    let report = compare_psd(&b, &reference, &decade_bands(lo, hi).unwrap(), 0.02).unwrap();
    assert!(report.pass, "{report:?}");

    let model = free_angle_spectrum(&p, &band_frequencies(&a, lo, hi)).unwrap();
    let report = compare_psd(&a, &model, &decade_bands(lo, hi).unwrap(), 0.02).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn velocity_variance_is_equipartitioned() {
    for q in [0.6, 3.0] {
        let p = oscillator(q, 300.0);
        let run = simulate_free(&SimConfig::free(p, 0.05, 1 << 21, 4)).unwrap();
        let kt = p.thermal_energy();
        assert!(rel(sample_variance(run.velocity.values()), kt / p.inertia()) < 0.05);
        assert!(rel(sample_variance(run.angle.values()), kt / p.stiffness()) < 0.05);
    }
}
