//! Variance of time averages across an ensemble of independent records.

use torsion_noise::pendulum::free::{sample_mean_variance, sample_mean_variance_asymptote};
use torsion_noise::sim::{run_ensemble, simulate_free, SimConfig};
use torsion_noise::spectral::{window_mean, MeanVariance};
use torsion_noise::PendulumParams;

fn main() -> torsion_noise::Result<()> {
    let p = PendulumParams::from_resonance(1.0, 2.0, 1.0, 300.0)?;
    let window = 200.0;
    let dt = 0.05;
    let cfg = SimConfig::free(p, dt, (window / dt) as usize, 11);
    let n_records = 1000;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());

    let means = run_ensemble(&cfg, n_records, workers, |_, member| {
        window_mean(&simulate_free(member)?.angle, window)
    })?;
    let mv = MeanVariance::from_means(&means, cfg.n_steps)?;
    let exact = sample_mean_variance(&p, window)?;
    let asymptote = sample_mean_variance_asymptote(&p, window)?;
    println!("{n_records} records of {window} s");
    println!("ensemble   {:.4e} ± {:.1e}", mv.variance, mv.standard_error);
    println!("quadrature {exact:.4e}  ({:+.2} SE)", (mv.variance - exact) / mv.standard_error);
    println!("asymptote  {asymptote:.4e}");
    Ok(())
}
