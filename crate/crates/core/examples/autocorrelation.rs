//! Numerical cosine transform of a density against the closed-form
//! autocorrelation.

use std::f64::consts::PI;

use torsion_noise::pendulum::free::{free_angle_autocorr, free_angle_psd};
use torsion_noise::pendulum::numeric::{Resonance, WienerKhinchin};
use torsion_noise::PendulumParams;

fn main() -> torsion_noise::Result<()> {
    for q in [0.6, 2.0, 10.0] {
        let p = PendulumParams::from_resonance(1.0, q, 1.0, 300.0)?;
        let d = p.derive();
        let wk = WienerKhinchin::new(
            |f| free_angle_psd(&p, f).unwrap(),
            Resonance::from_angular(d.omega0, d.q),
            4.0,
        )?;
        println!("Q = {q}");
        for k in 0..=8 {
            let t = k as f64 * 2.0 * PI / d.omega0;
            let numeric = wk.autocorrelation(t)?;
            let exact = free_angle_autocorr(&p, t)?;
            println!(
                "  t = {t:>7.3} s  numeric = {:+.6e}  closed = {exact:+.6e}  err bound = {:.1e}",
                numeric.value, numeric.error
            );
        }
    }
    Ok(())
}
