//! Closed-form identity suite run by `torsion-noise validate`.

use std::fmt::Write as _;

use crate::error::Result;
use crate::pendulum::feedback::{
    feedback_angle_psd, feedback_angle_variance, feedback_force_autocorr, feedback_force_psd,
    feedback_rms_force_noise,
};
use crate::pendulum::free::{
    free_angle_autocorr, free_angle_psd, free_rms_angle_noise, free_rms_force_noise,
    sample_mean_variance, sample_mean_variance_asymptote,
};
use crate::pendulum::kernel::{factored_denominator, resonance_denominator};
use crate::pendulum::numeric::{integrate_density, Resonance, WienerKhinchin};
use crate::pendulum::{derive_feedback, FeedbackParams, PendulumParams};

/// One checked identity: `residual` is a relative (or normalized) error.
#[derive(Debug, Clone, PartialEq)]
pub struct Identity {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Identity {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn free(q: f64) -> Result<PendulumParams> {
    PendulumParams::from_resonance(1.0, q, 1.0, 300.0)
}

fn locked(q_fb: f64) -> Result<(PendulumParams, FeedbackParams)> {
    let p = PendulumParams::new(1.0, 10.0, 1.0, 300.0)?;
    let fb = FeedbackParams::for_loop(&p, 1.0, q_fb)?;
    Ok((p, fb))
}

const LAG_POINTS: usize = 41;
const ARM: f64 = 5.0;

/// Runs every identity. `fault` scales each closed-form side by `1 + fault`
/// so tests can check that a broken model is caught.
pub fn identity_suite(fault: f64) -> Result<Vec<Identity>> {
    let skew = 1.0 + fault;
    let mut out = Vec::new();
    let mut push = |name: String, residual: f64, tolerance: f64| {
        out.push(Identity {
            name,
            residual,
            tolerance,
        })
    };

    for q in [0.6, 2.0, 10.0, 100.0] {
        let p = free(q)?;
        let d = p.derive();
        let total = integrate_density(
            |f| free_angle_psd(&p, f).expect("f ≥ 0"),
            Resonance::from_angular(d.omega0, d.q),
            4.0,
        )?;
        let expected = skew * p.thermal_energy() / p.stiffness();
        push(format!("free equipartition Q={q}"), rel(total.value, expected), 1e-6);
    }

    for q_fb in [0.6, 2.0, 10.0] {
        let (p, fb) = locked(q_fb)?;
        let d = derive_feedback(&p, &fb);
        // x² / x⁴ tail
        let total = integrate_density(
            |f| feedback_angle_psd(&p, &fb, f).expect("f ≥ 0"),
            Resonance::from_angular(d.omega0_fb, d.q_fb),
            2.0,
        )?;
        let expected = skew * feedback_angle_variance(&p, &fb);
        push(format!("feedback equipartition Q_fb={q_fb}"), rel(total.value, expected), 1e-6);
    }

    let mut worst: f64 = 0.0;
    for q in [0.51, 0.6, 1.0, 2.0, 10.0, 100.0] {
        for i in 0..=1000 {
            let x = 0.01 * i as f64;
            let direct = skew * resonance_denominator(x, q);
            let product = factored_denominator(x, q)?;
            worst = worst
                .max((product.re - direct).abs() / direct)
                .max(product.im.abs() / direct);
        }
    }
    push("denominator factorization".into(), worst, 1e-12);

    let p = free(10.0)?;
    let window = 1000.0;
    let asymptote = sample_mean_variance_asymptote(&p, window)?;
    push(
        "long-average angle noise form".into(),
        rel(free_rms_angle_noise(&p, window)?, skew * asymptote.sqrt()),
        1e-12,
    );
    push(
        "angle-to-force noise scaling".into(),
        rel(
            free_rms_force_noise(&p, ARM, window)?,
            skew * p.stiffness() / ARM * free_rms_angle_noise(&p, window)?,
        ),
        1e-12,
    );
    let d = p.derive();
    let correction = 1.0 + d.q * (1.0 - 1.0 / (d.q * d.q)) / (d.omega0 * window);
    push(
        "sample-mean variance quadrature".into(),
        rel(sample_mean_variance(&p, window)?, skew * asymptote * correction),
        1e-7,
    );
    let (lp, fb) = locked(0.5)?;
    let long = 1000.0;
    push(
        "feedback force noise equals free".into(),
        rel(
            feedback_rms_force_noise(&lp, &fb, ARM, long)?,
            skew * free_rms_force_noise(&lp, ARM, long)?,
        ),
        1e-12,
    );

    for q in [0.6, 2.0, 10.0] {
        let p = free(q)?;
        let d = p.derive();
        let wk = WienerKhinchin::new(
            |f| free_angle_psd(&p, f).expect("f ≥ 0"),
            Resonance::from_angular(d.omega0, d.q),
            4.0,
        )?;
        let r0 = p.thermal_energy() / p.stiffness();
        let mut worst: f64 = 0.0;
        for k in 0..LAG_POINTS {
            let t = 10.0 * d.tau0 * k as f64 / (LAG_POINTS - 1) as f64;
            let numeric = wk.autocorrelation(t)?.value;
            worst = worst.max((numeric - skew * free_angle_autocorr(&p, t)?).abs() / r0);
        }
        push(format!("free Wiener-Khinchin Q={q}"), worst, 1e-6);
    }

    for q_fb in [0.6, 2.0, 10.0] {
        let (p, fb) = locked(q_fb)?;
        let d = derive_feedback(&p, &fb);
        let wk = WienerKhinchin::new(
            |f| feedback_force_psd(&p, &fb, ARM, f).expect("f ≥ 0"),
            Resonance::from_angular(d.omega0_fb, d.q_fb),
            4.0,
        )?;
        let r0 = feedback_force_autocorr(&p, &fb, ARM, 0.0)?;
        let tau0 = 2.0 * std::f64::consts::PI / d.omega0_fb;
        let mut worst: f64 = 0.0;
        for k in 0..LAG_POINTS {
            let t = 10.0 * tau0 * k as f64 / (LAG_POINTS - 1) as f64;
            let numeric = wk.autocorrelation(t)?.value;
            worst = worst.max((numeric - skew * feedback_force_autocorr(&p, &fb, ARM, t)?).abs() / r0);
        }
        push(format!("feedback force Wiener-Khinchin Q_fb={q_fb}"), worst, 1e-6);
    }

    Ok(out)
}

/// One line per identity: status, name, residual and tolerance.
pub fn render(identities: &[Identity]) -> String {
    let mut s = String::new();
    for id in identities {
        let _ = writeln!(
            s,
            "{:<4}  {:<40}  residual = {:.6e}  tolerance = {:.1e}",
            if id.passed() { "PASS" } else { "FAIL" },
            id.name,
            id.residual,
            id.tolerance
        );
    }
    s
}
