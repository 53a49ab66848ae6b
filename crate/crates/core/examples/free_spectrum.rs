//! Closed-form noise of a free torsion pendulum.

use std::f64::consts::PI;

use torsion_noise::pendulum::free::{
    equipartition_angle_rms, free_angle_psd, free_rms_force_noise, swing_to_torsion_ratio,
};
use torsion_noise::PendulumParams;

fn main() -> torsion_noise::Result<()> {
    let p = PendulumParams::from_resonance(2.0 * PI / 300.0, 1000.0, 1.0, 300.0)?;
    let d = p.derive();
    println!("f0 = {:.4e} Hz, Q = {}", d.omega0 / (2.0 * PI), d.q);
    println!("equipartition rms angle = {:.4e} rad", equipartition_angle_rms(&p));

    let f0 = d.omega0 / (2.0 * PI);
    for x in [0.01, 0.1, 0.5, 0.9, 1.0, 1.1, 2.0, 10.0] {
        println!("x = {x:>5}  S = {:.4e} rad²/Hz", free_angle_psd(&p, x * f0)?);
    }

    for hours in [1.0, 24.0] {
        let f = free_rms_force_noise(&p, 5.0, hours * 3600.0)?;
        println!("force noise over {hours} h at 5 cm: {f:.3e} dyne");
    }
    println!("swing / torsion rms: {:.1}", swing_to_torsion_ratio(&p, 100.0, 50.0)?);
    Ok(())
}
