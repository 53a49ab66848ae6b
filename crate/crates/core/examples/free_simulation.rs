//! Simulate a free pendulum and compare its Welch spectrum with the model.

use std::f64::consts::PI;

use torsion_noise::pendulum::free::free_angle_spectrum;
use torsion_noise::sim::{simulate_free, SimConfig};
use torsion_noise::spectral::{compare_psd, decade_bands, estimate_psd_default};
use torsion_noise::PendulumParams;

fn main() -> torsion_noise::Result<()> {
    let p = PendulumParams::from_resonance(1.0, 10.0, 1.0, 300.0)?;
    let cfg = SimConfig::free(p, 0.05, 1 << 21, 7);
    let run = simulate_free(&cfg)?;
    println!("fingerprint {}", cfg.fingerprint());
    println!(
        "angle variance {:.4e} (kT/α = {:.4e})",
        run.angle.variance(),
        p.thermal_energy() / p.stiffness()
    );

    let est = estimate_psd_default(&run.angle)?;
    let f0 = p.derive().omega0 / (2.0 * PI);
    let (lo, hi) = (0.01 * f0, 5.0 * f0);
    let freqs: Vec<f64> = est.frequencies.iter().copied().filter(|f| (lo..=hi).contains(f)).collect();
    let model = free_angle_spectrum(&p, &freqs)?;
    let report = compare_psd(&est, &model, &decade_bands(lo, hi)?, 0.1)?;
    for b in &report.bands {
        println!(
            "[{:.3e}, {:.3e}] Hz  {:>4} bins  {:+.2}%",
            b.band.lo,
            b.band.hi,
            b.n_bins,
            100.0 * b.deviation
        );
    }
    println!("pass at 10%: {}", report.pass);
    Ok(())
}
