//! Pendulum parameters and the closed-form noise expressions for free and
//! PI-feedback operation. All quantities are CGS.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};

pub mod feedback;
pub mod free;
pub mod kernel;
pub mod numeric;

pub use kernel::Ringing;

/// Boltzmann's constant, erg/K.
pub const BOLTZMANN: f64 = 1.380_649e-16;

/// Standard gravitational acceleration, cm/s².
pub const STANDARD_GRAVITY: f64 = 980.665;

/// Physical description of a torsion pendulum.
///
/// `inertia` in g·cm², `damping` in dyne·cm·s, `stiffness` in dyne·cm/rad,
/// `temperature` in K. All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPendulum")]
pub struct PendulumParams {
    inertia: f64,
    damping: f64,
    stiffness: f64,
    temperature: f64,
}

#[derive(Deserialize)]
struct RawPendulum {
    inertia: f64,
    damping: f64,
    stiffness: f64,
    temperature: f64,
}

impl TryFrom<RawPendulum> for PendulumParams {
    type Error = Error;
    fn try_from(raw: RawPendulum) -> Result<Self> {
        PendulumParams::new(raw.inertia, raw.damping, raw.stiffness, raw.temperature)
    }
}

impl PendulumParams {
    pub fn new(inertia: f64, damping: f64, stiffness: f64, temperature: f64) -> Result<Self> {
        Ok(Self {
            inertia: positive("inertia", inertia)?,
            damping: positive("damping", damping)?,
            stiffness: positive("stiffness", stiffness)?,
            temperature: positive("temperature", temperature)?,
        })
    }

    /// Builds parameters with the given natural frequency (rad/s), quality factor and stiffness.
    pub fn from_resonance(omega0: f64, q: f64, stiffness: f64, temperature: f64) -> Result<Self> {
        let omega0 = positive("omega0", omega0)?;
        let q = positive("q", q)?;
        let stiffness = positive("stiffness", stiffness)?;
        Self::new(
            stiffness / (omega0 * omega0),
            stiffness / (omega0 * q),
            stiffness,
            temperature,
        )
    }

    pub fn inertia(&self) -> f64 {
        self.inertia
    }
    pub fn damping(&self) -> f64 {
        self.damping
    }
    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Thermal energy kT in erg.
    pub fn thermal_energy(&self) -> f64 {
        BOLTZMANN * self.temperature
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(self.inertia, self.damping, self.stiffness, temperature)
    }

    pub fn with_damping(&self, damping: f64) -> Result<Self> {
        Self::new(self.inertia, damping, self.stiffness, self.temperature)
    }

    pub fn derive(&self) -> DerivedQuantities {
        derive(self)
    }
}

/// Resonance quantities that follow from [`PendulumParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// Natural frequency sqrt(α/I), rad/s.
    pub omega0: f64,
    /// Quality factor α/(ω₀γ).
    pub q: f64,
    pub ringing: Ringing,
    /// Oscillation period 2π/ω₀, s.
    pub tau0: f64,
    /// 1/e amplitude damping time 2Q/ω₀, s.
    pub tau_d: f64,
}

impl DerivedQuantities {
    /// Ω = sqrt(1 - 1/(4Q²)); zero at or below critical damping.
    pub fn omega(&self) -> f64 {
        self.ringing.omega()
    }

    /// Time constant of the slowest decaying mode, s.
    pub fn relaxation_time(&self) -> f64 {
        1.0 / (self.omega0 * kernel::slowest_decay_rate(self.q))
    }
}

pub fn derive(params: &PendulumParams) -> DerivedQuantities {
    let omega0 = (params.stiffness / params.inertia).sqrt();
    let q = params.stiffness / (omega0 * params.damping);
    DerivedQuantities {
        omega0,
        q,
        ringing: Ringing::from_q(q),
        tau0: 2.0 * PI / omega0,
        tau_d: 2.0 * q / omega0,
    }
}

/// Gains of the proportional-plus-integral angle lock.
///
/// `beta` (dyne·cm/rad) ≥ 0, `kappa` (dyne·cm/(rad·s)) > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFeedback")]
pub struct FeedbackParams {
    beta: f64,
    kappa: f64,
}

#[derive(Deserialize)]
struct RawFeedback {
    beta: f64,
    kappa: f64,
}

impl TryFrom<RawFeedback> for FeedbackParams {
    type Error = Error;
    fn try_from(raw: RawFeedback) -> Result<Self> {
        FeedbackParams::new(raw.beta, raw.kappa)
    }
}

impl FeedbackParams {
    pub fn new(beta: f64, kappa: f64) -> Result<Self> {
        Ok(Self {
            beta: non_negative("beta", beta)?,
            kappa: positive("kappa", kappa)?,
        })
    }

    /// Chooses gains that give the requested loop frequency and quality
    /// factor for the given pendulum. Fails if that would need `beta < 0`.
    pub fn for_loop(params: &PendulumParams, omega0_fb: f64, q_fb: f64) -> Result<Self> {
        let omega0_fb = positive("omega0_fb", omega0_fb)?;
        let q_fb = positive("q_fb", q_fb)?;
        let kappa = params.damping * omega0_fb * omega0_fb;
        let beta = kappa / (omega0_fb * q_fb) - params.stiffness;
        if beta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "q_fb",
                reason: format!(
                    "Q_fb = {q_fb} at ω0_fb = {omega0_fb} needs negative proportional gain ({beta:e})"
                ),
            });
        }
        Self::new(beta, kappa)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Closed-loop resonance of the inertia-free PI lock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackDerived {
    /// sqrt(κ/γ), rad/s.
    pub omega0_fb: f64,
    /// κ/(ω0_fb (α + β)).
    pub q_fb: f64,
    pub ringing: Ringing,
}

impl FeedbackDerived {
    pub fn omega(&self) -> f64 {
        self.ringing.omega()
    }

    pub fn relaxation_time(&self) -> f64 {
        1.0 / (self.omega0_fb * kernel::slowest_decay_rate(self.q_fb))
    }
}

pub fn derive_feedback(params: &PendulumParams, fb: &FeedbackParams) -> FeedbackDerived {
    let omega0_fb = (fb.kappa / params.damping).sqrt();
    let q_fb = fb.kappa / (omega0_fb * (params.stiffness + fb.beta));
    FeedbackDerived {
        omega0_fb,
        q_fb,
        ringing: Ringing::from_q(q_fb),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// rad²/Hz
    AngleDensity,
    /// dyne²/Hz
    ForceDensity,
}

/// One-sided spectral density sampled on a frequency grid (Hz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpectrum {
    kind: SpectrumKind,
    frequencies: Vec<f64>,
    values: Vec<f64>,
}

impl NoiseSpectrum {
    pub fn new(kind: SpectrumKind, frequencies: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if frequencies.len() != values.len() {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!(
                    "{} values for {} frequencies",
                    values.len(),
                    frequencies.len()
                ),
            });
        }
        if frequencies.is_empty() {
            return Err(Error::InvalidParameter {
                name: "frequencies",
                reason: "empty grid".into(),
            });
        }
        if frequencies[0] < 0.0 || frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                name: "frequencies",
                reason: "must be non-negative and strictly increasing".into(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!("density samples must be finite and >= 0, found {v}"),
            });
        }
        Ok(Self {
            kind,
            frequencies,
            values,
        })
    }

    /// Samples `density` on `frequencies`.
    pub fn from_fn(
        kind: SpectrumKind,
        frequencies: &[f64],
        density: impl Fn(f64) -> Result<f64>,
    ) -> Result<Self> {
        let values = frequencies
            .iter()
            .map(|&f| density(f))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, frequencies.to_vec(), values)
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation inside the grid; `None` outside it.
    pub fn interpolate(&self, f: f64) -> Option<f64> {
        let fr = &self.frequencies;
        if f < fr[0] || f > *fr.last()? {
            return None;
        }
        let hi = fr.partition_point(|&x| x < f);
        if hi == 0 {
            return Some(self.values[0]);
        }
        let lo = hi - 1;
        if fr[hi] == f {
            return Some(self.values[hi]);
        }
        let w = (f - fr[lo]) / (fr[hi] - fr[lo]);
        Some(self.values[lo] + w * (self.values[hi] - self.values[lo]))
    }
}

pub(crate) fn check_frequency(f: f64) -> Result<f64> {
    non_negative("frequency", f)
}

pub(crate) fn check_lag(t: f64) -> Result<f64> {
    non_negative("lag", t)
}
