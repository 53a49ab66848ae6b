//! Lock the pendulum with proportional-integral feedback and read the force
//! off the integrator.

use std::f64::consts::PI;

use torsion_noise::pendulum::feedback::{
    feedback_angle_variance, feedback_force_spectrum, feedback_rms_force_noise,
};
use torsion_noise::pendulum::free::free_rms_force_noise;
use torsion_noise::sim::{simulate_feedback, SimConfig};
use torsion_noise::spectral::{compare_psd, decade_bands, estimate_psd_default};
use torsion_noise::{derive_feedback, FeedbackParams, PendulumParams};

fn main() -> torsion_noise::Result<()> {
    let arm = 5.0;
    let p = PendulumParams::new(1.0, 10.0, 1.0, 300.0)?;
    let fb = FeedbackParams::for_loop(&p, 1.0, 0.5)?;
    let d = derive_feedback(&p, &fb);
    println!("β = {:.3}, κ = {:.3}", fb.beta(), fb.kappa());
    println!("ω0_fb = {:.3} rad/s, Q_fb = {:.3}", d.omega0_fb, d.q_fb);

    let run = simulate_feedback(&SimConfig::locked(p, fb, 0.05, 1 << 21, 3))?;
    for w in &run.warnings {
        println!("warning: {w}");
    }
    println!(
        "angle variance {:.4e} (model {:.4e})",
        run.angle.variance(),
        feedback_angle_variance(&p, &fb)
    );

    let force = run.integrator_torque.scaled(1.0 / arm);
    let est = estimate_psd_default(&force)?;
    let f0 = d.omega0_fb / (2.0 * PI);
    let (lo, hi) = (0.01 * f0, 5.0 * f0);
    let freqs: Vec<f64> = est.frequencies.iter().copied().filter(|f| (lo..=hi).contains(f)).collect();
    let model = feedback_force_spectrum(&p, &fb, arm, &freqs)?;
    let report = compare_psd(&est, &model, &decade_bands(lo, hi)?, 0.1)?;
    println!("force spectrum max deviation {:.2}%", 100.0 * report.max_abs_deviation);

    let t_m = 3600.0;
    println!(
        "force noise over 1 h: locked {:.4e}, free {:.4e} dyne",
        feedback_rms_force_noise(&p, &fb, arm, t_m)?,
        free_rms_force_noise(&p, arm, t_m)?
    );
    Ok(())
}
