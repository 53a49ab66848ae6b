//! Seeded Langevin simulation of the free and PI-locked pendulum.
//!
//! The default [`Stepper::Exact`] propagates the linear system exactly over
//! each step, so sampled statistics carry no time-step bias. The
//! [`Stepper::EulerMaruyama`] stepper exists as an independent cross-check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pendulum::{derive_feedback, FeedbackParams, PendulumParams};

pub mod linear;
pub mod rng;
pub mod series;

use linear::{EulerMaruyama, ExactPropagator, LinearModel, MAX_DIM};
pub use rng::{derive_seed, GaussianSource, RNG_ALGORITHM};
pub use series::{Channel, TimeSeries};

/// Largest allowed `dt · ω₀` (or `dt · ω0_fb`).
pub const MAX_STEP_PHASE: f64 = 0.1;

/// Default burn-in, in relaxation times.
pub const BURNIN_RELAXATION_TIMES: f64 = 10.0;

/// `I ω0_fb / γ` above which the inertia-free loop model is flagged.
pub const INERTIA_WARNING_RATIO: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    #[default]
    Exact,
    EulerMaruyama,
}

/// Deterministic perturbations used to check loop behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hooks {
    /// Thermal torque on/off.
    pub thermal_noise: bool,
    /// Constant applied torque, dyne·cm.
    pub external_torque: f64,
    /// Angle at the start of burn-in, rad.
    pub initial_angle: f64,
}

impl Default for Hooks {
    fn default() -> Self {
        Self {
            thermal_noise: true,
            external_torque: 0.0,
            initial_angle: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub pendulum: PendulumParams,
    pub feedback: Option<FeedbackParams>,
    /// Keep `I θ̈` in the feedback loop.
    pub include_inertia: bool,
    pub dt: f64,
    pub n_steps: usize,
    /// `None` means ten relaxation times.
    pub n_burnin: Option<usize>,
    pub seed: u64,
    pub stepper: Stepper,
    pub hooks: Hooks,
}

impl SimConfig {
    pub fn free(pendulum: PendulumParams, dt: f64, n_steps: usize, seed: u64) -> Self {
        Self {
            pendulum,
            feedback: None,
            include_inertia: false,
            dt,
            n_steps,
            n_burnin: None,
            seed,
            stepper: Stepper::Exact,
            hooks: Hooks::default(),
        }
    }

    pub fn locked(
        pendulum: PendulumParams,
        feedback: FeedbackParams,
        dt: f64,
        n_steps: usize,
        seed: u64,
    ) -> Self {
        Self {
            feedback: Some(feedback),
            ..Self::free(pendulum, dt, n_steps, seed)
        }
    }

    /// Natural frequency that sets the step-size guard, rad/s.
    pub fn characteristic_frequency(&self) -> f64 {
        match &self.feedback {
            Some(fb) => derive_feedback(&self.pendulum, fb).omega0_fb,
            None => self.pendulum.derive().omega0,
        }
    }

    /// Time constant of the slowest mode, s.
    pub fn relaxation_time(&self) -> f64 {
        match &self.feedback {
            Some(fb) => derive_feedback(&self.pendulum, fb).relaxation_time(),
            None => self.pendulum.derive().relaxation_time(),
        }
    }

    pub fn burnin_steps(&self) -> usize {
        self.n_burnin.unwrap_or_else(|| self.min_burnin_steps())
    }

    fn min_burnin_steps(&self) -> usize {
        (BURNIN_RELAXATION_TIMES * self.relaxation_time() / self.dt).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be finite and > 0, got {}", self.dt),
            });
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "n_steps",
                reason: "must record at least one sample".into(),
            });
        }
        let phase = self.dt * self.characteristic_frequency();
        if phase >= MAX_STEP_PHASE {
            return Err(Error::Unstable(format!(
                "dt·ω0 = {phase:.4} must be below {MAX_STEP_PHASE}"
            )));
        }
        if self.include_inertia && self.feedback.is_none() {
            return Err(Error::InvalidParameter {
                name: "include_inertia",
                reason: "only meaningful with feedback".into(),
            });
        }
        // Burn-in may be shortened only for noise-free transient studies.
        if let Some(n) = self.n_burnin {
            let min = self.min_burnin_steps();
            if self.hooks.thermal_noise && n < min {
                return Err(Error::InvalidParameter {
                    name: "n_burnin",
                    reason: format!(
                        "{n} steps is less than ten relaxation times ({min} steps)"
                    ),
                });
            }
        }
        if !self.hooks.external_torque.is_finite() || !self.hooks.initial_angle.is_finite() {
            return Err(Error::InvalidParameter {
                name: "hooks",
                reason: "hook values must be finite".into(),
            });
        }
        Ok(())
    }

    /// SHA-256 over the generating configuration and the RNG algorithm.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(&FingerprintView {
            format: "torsion-noise/sim/v1",
            rng: RNG_ALGORITHM,
            config: self,
            n_burnin: self.burnin_steps(),
        })
        .expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    fn model(&self) -> LinearModel {
        let p = &self.pendulum;
        let q = 2.0 * p.damping() * p.thermal_energy();
        match (&self.feedback, self.include_inertia) {
            (None, _) => LinearModel {
                // (θ, θ̇)
                row: vec![-p.stiffness() / p.inertia(), -p.damping() / p.inertia()],
                gain: 1.0 / p.inertia(),
                noise_density: q,
            },
            (Some(fb), false) => LinearModel {
                // (∫θ, θ)
                row: vec![-fb.kappa() / p.damping(), -(p.stiffness() + fb.beta()) / p.damping()],
                gain: 1.0 / p.damping(),
                noise_density: q,
            },
            (Some(fb), true) => LinearModel {
                // (∫θ, θ, θ̇)
                row: vec![
                    -fb.kappa() / p.inertia(),
                    -(p.stiffness() + fb.beta()) / p.inertia(),
                    -p.damping() / p.inertia(),
                ],
                gain: 1.0 / p.inertia(),
                noise_density: q,
            },
        }
    }
}

#[derive(Serialize)]
struct FingerprintView<'a> {
    format: &'static str,
    rng: &'static str,
    config: &'a SimConfig,
    n_burnin: usize,
}

/// Free-pendulum trajectory.
#[derive(Debug, Clone)]
pub struct FreeRun {
    pub angle: TimeSeries,
    pub velocity: TimeSeries,
}

/// Locked-pendulum trajectory.
#[derive(Debug, Clone)]
pub struct FeedbackRun {
    pub angle: TimeSeries,
    /// κ∫θ dt, dyne·cm.
    pub integrator_torque: TimeSeries,
    pub warnings: Vec<String>,
}

enum Propagator {
    Exact(ExactPropagator),
    Euler(EulerMaruyama),
}

impl Propagator {
    #[inline]
    fn step(&self, s: &mut [f64; MAX_DIM], torque: f64, noise: Option<&mut GaussianSource>) {
        match self {
            Propagator::Exact(p) => p.step(s, torque, noise),
            Propagator::Euler(p) => p.step(s, torque, noise),
        }
    }
}

/// Runs the configured model and returns the recorded state components.
fn run(cfg: &SimConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let model = cfg.model();
    let n = model.dim();
    let prop = match cfg.stepper {
        Stepper::Exact => Propagator::Exact(ExactPropagator::new(&model, cfg.dt)?),
        Stepper::EulerMaruyama => Propagator::Euler(EulerMaruyama::new(&model, cfg.dt)?),
    };
    let mut source = GaussianSource::new(cfg.seed);
    let mut state = [0.0; MAX_DIM];
    // Angle is the first component for the free model, the second otherwise.
    let angle_idx = usize::from(cfg.feedback.is_some());
    state[angle_idx] = cfg.hooks.initial_angle;
    let torque = cfg.hooks.external_torque;
    let noisy = cfg.hooks.thermal_noise;

    for _ in 0..cfg.burnin_steps() {
        prop.step(&mut state, torque, noisy.then_some(&mut source));
    }
    let mut out = vec![Vec::with_capacity(cfg.n_steps); n];
    for k in 0..cfg.n_steps {
        prop.step(&mut state, torque, noisy.then_some(&mut source));
        if state[..n].iter().any(|v| !v.is_finite()) {
            return Err(Error::Unstable(format!("non-finite state at step {k}")));
        }
        for (col, v) in out.iter_mut().zip(state.iter()) {
            col.push(*v);
        }
    }
    Ok(out)
}

pub fn simulate_free(cfg: &SimConfig) -> Result<FreeRun> {
    if cfg.feedback.is_some() {
        return Err(Error::InvalidParameter {
            name: "feedback",
            reason: "simulate_free needs a configuration without feedback".into(),
        });
    }
    let mut cols = run(cfg)?.into_iter();
    let fp = cfg.fingerprint();
    let angle = cols.next().expect("two state components");
    let velocity = cols.next().expect("two state components");
    Ok(FreeRun {
        angle: TimeSeries::new(Channel::Angle, cfg.dt, angle, cfg.seed, fp.clone())?,
        velocity: TimeSeries::new(Channel::AngularVelocity, cfg.dt, velocity, cfg.seed, fp)?,
    })
}

pub fn simulate_feedback(cfg: &SimConfig) -> Result<FeedbackRun> {
    let fb = cfg.feedback.ok_or_else(|| Error::InvalidParameter {
        name: "feedback",
        reason: "simulate_feedback needs feedback gains".into(),
    })?;
    let mut warnings = Vec::new();
    if cfg.include_inertia {
        let d = derive_feedback(&cfg.pendulum, &fb);
        let ratio = cfg.pendulum.inertia() * d.omega0_fb / cfg.pendulum.damping();
        if ratio > INERTIA_WARNING_RATIO {
            warnings.push(format!(
                "I·ω0_fb/γ = {ratio:.3e}: inertia is not negligible, closed-form loop spectra \
                 (which drop I·θ̈) are not expected to match"
            ));
        }
    }
    let cols = run(cfg)?;
    let fp = cfg.fingerprint();
    let torque: Vec<f64> = cols[0].iter().map(|phi| fb.kappa() * phi).collect();
    Ok(FeedbackRun {
        angle: TimeSeries::new(Channel::Angle, cfg.dt, cols[1].clone(), cfg.seed, fp.clone())?,
        integrator_torque: TimeSeries::new(
            Channel::IntegratorTorque,
            cfg.dt,
            torque,
            cfg.seed,
            fp,
        )?,
        warnings,
    })
}

/// Configuration of ensemble member `index`: same physics, derived seed.
pub fn member_config(cfg: &SimConfig, index: usize) -> SimConfig {
    SimConfig {
        seed: derive_seed(cfg.seed, index as u64),
        ..cfg.clone()
    }
}

/// Runs `n_records` independent members of `cfg` on `workers` threads,
/// calling `f(index, member)`. Output order is by member index, independent
/// of scheduling.
pub fn run_ensemble<T, F>(cfg: &SimConfig, n_records: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &SimConfig) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| {
        (0..n_records)
            .into_par_iter()
            .map(|i| f(i, &member_config(cfg, i)))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> PendulumParams {
        PendulumParams::from_resonance(1.0, 10.0, 1.0, 300.0).unwrap()
    }

    #[test]
    fn same_seed_bit_identical() {
        let cfg = SimConfig::free(base(), 0.05, 5000, 11);
        let a = simulate_free(&cfg).unwrap();
        let b = simulate_free(&cfg).unwrap();
        assert_eq!(a.angle, b.angle);
        let c = simulate_free(&SimConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.angle.values(), c.angle.values());
    }

    #[test]
    fn step_guard() {
        let cfg = SimConfig::free(base(), 0.1, 10, 0);
        assert!(matches!(simulate_free(&cfg), Err(Error::Unstable(_))));
    }

    #[test]
    fn short_burnin_rejected_with_noise() {
        let mut cfg = SimConfig::free(base(), 0.05, 10, 0);
        cfg.n_burnin = Some(10);
        assert!(cfg.validate().is_err());
        cfg.hooks.thermal_noise = false;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn wrong_mode_rejected() {
        let p = base();
        let fb = FeedbackParams::new(1.0, 1.0).unwrap();
        assert!(simulate_free(&SimConfig::locked(p, fb, 0.01, 10, 0)).is_err());
        assert!(simulate_feedback(&SimConfig::free(p, 0.01, 10, 0)).is_err());
    }

    #[test]
    fn fingerprint_tracks_config() {
        let cfg = SimConfig::free(base(), 0.05, 100, 1);
        assert_eq!(cfg.fingerprint(), cfg.clone().fingerprint());
        assert_ne!(cfg.fingerprint(), SimConfig { seed: 2, ..cfg.clone() }.fingerprint());
        let warmer = SimConfig {
            pendulum: base().with_temperature(301.0).unwrap(),
            ..cfg.clone()
        };
        assert_ne!(cfg.fingerprint(), warmer.fingerprint());
    }

    #[test]
    fn ensemble_order_is_deterministic() {
        let cfg = SimConfig::free(base(), 0.05, 50, 5);
        let a = run_ensemble(&cfg, 16, 4, |_, c| Ok(simulate_free(c)?.angle.values()[49])).unwrap();
        let b = run_ensemble(&cfg, 16, 1, |_, c| Ok(simulate_free(c)?.angle.values()[49])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inertia_warning() {
        let p = PendulumParams::new(1.0, 1.0, 1.0, 300.0).unwrap();
        let fb = FeedbackParams::for_loop(&p, 1.0, 0.5).unwrap();
        let mut cfg = SimConfig::locked(p, fb, 0.01, 10, 0);
        cfg.include_inertia = true;
        let run = simulate_feedback(&cfg).unwrap();
        assert_eq!(run.warnings.len(), 1);
    }
}
