//! Shared damped-oscillator kernel.
//!
//! Both the free pendulum and the PI-locked loop have a closed-loop
//! denominator `(1 - x²)² + x²/Q²`. Their autocorrelations are the same
//! ringdown shape `e^{-u/2Q} [cos(Ωu) + sin(Ωu)/(2ΩQ)]` in the reduced
//! time `u = ω₀ t`, with `Ω = sqrt(1 - 1/(4Q²))`.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// Width of the band around critical damping where the series branch is used.
pub const CRITICAL_BAND: f64 = 1e-10;

/// Oscillation factor Ω of a second-order resonance, by damping regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ringing {
    /// `Q > 1/2`: `Ω = sqrt(1 - 1/(4Q²))`.
    Underdamped { omega: f64 },
    /// `|1 - 1/(4Q²)| < CRITICAL_BAND`; `s` keeps the signed value of `Ω²`.
    Critical { s: f64 },
    /// `Q < 1/2`: `Ω = i Ω̃` with `Ω̃ = sqrt(1/(4Q²) - 1)`.
    Overdamped { omega_tilde: f64 },
}

impl Ringing {
    pub fn from_q(q: f64) -> Self {
        let s = 1.0 - 1.0 / (4.0 * q * q);
        if s.abs() < CRITICAL_BAND {
            Ringing::Critical { s }
        } else if s > 0.0 {
            Ringing::Underdamped { omega: s.sqrt() }
        } else {
            Ringing::Overdamped {
                omega_tilde: (-s).sqrt(),
            }
        }
    }

    /// Real Ω; zero at and below critical damping.
    pub fn omega(&self) -> f64 {
        match *self {
            Ringing::Underdamped { omega } => omega,
            _ => 0.0,
        }
    }
}

/// Normalized ringdown `R(u)/R(0)` for quality factor `q` at reduced time `u ≥ 0`.
pub fn ringdown(q: f64, u: f64) -> f64 {
    let a = 0.5 / q;
    match Ringing::from_q(q) {
        Ringing::Underdamped { omega } => {
            let (sin, cos) = (omega * u).sin_cos();
            (-a * u).exp() * (cos + a * sin / omega)
        }
        Ringing::Critical { s } => {
            let u2 = u * u;
            (-a * u).exp() * ((1.0 - 0.5 * s * u2) + a * u * (1.0 - s * u2 / 6.0))
        }
        Ringing::Overdamped { omega_tilde } => {
            // e^{-au}[cosh(Ω̃u) + a sinh(Ω̃u)/Ω̃] written as decaying exponentials.
            let slow = (-(a - omega_tilde) * u).exp();
            let fast = (-(a + omega_tilde) * u).exp();
            0.5 * (slow + fast) + 0.5 * a * (slow - fast) / omega_tilde
        }
    }
}

/// Slowest decay rate of the ringdown, in units of ω₀.
pub fn slowest_decay_rate(q: f64) -> f64 {
    let a = 0.5 / q;
    match Ringing::from_q(q) {
        Ringing::Overdamped { omega_tilde } => a - omega_tilde,
        _ => a,
    }
}

/// `(1 - x²)² + x²/Q²` evaluated directly.
pub fn resonance_denominator(x: f64, q: f64) -> f64 {
    let one_minus = 1.0 - x * x;
    one_minus * one_minus + x * x / (q * q)
}

/// Product of the four complex pole factors
/// `(x ∓ Ω + i/2Q)(x ∓ Ω - i/2Q)`, which must equal the real denominator.
pub fn factored_denominator(x: f64, q: f64) -> Result<Complex64> {
    if !(q.is_finite() && q > 0.5) {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: format!("pole factorization needs Q > 1/2 (real Ω), got {q}"),
        });
    }
    let omega = (1.0 - 1.0 / (4.0 * q * q)).sqrt();
    let half_width = Complex64::new(0.0, 0.5 / q);
    let x = Complex64::new(x, 0.0);
    let om = Complex64::new(omega, 0.0);
    Ok((x - om + half_width) * (x + om + half_width) * (x - om - half_width) * (x + om - half_width))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert!(matches!(Ringing::from_q(10.0), Ringing::Underdamped { .. }));
        assert!(matches!(Ringing::from_q(0.5), Ringing::Critical { .. }));
        assert!(matches!(Ringing::from_q(0.3), Ringing::Overdamped { .. }));
        assert_eq!(Ringing::from_q(0.5).omega(), 0.0);
    }

    #[test]
    fn critical_branch_is_one_plus_u() {
        for &u in &[0.0, 0.3, 1.0, 4.0, 20.0] {
            let expected = (-u as f64).exp() * (1.0 + u);
            assert!((ringdown(0.5, u) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn continuous_across_critical_damping() {
        for i in 0..200 {
            let u = i as f64 * 0.1;
            let at = ringdown(0.5, u);
            for q in [0.5 - 1e-6, 0.5 + 1e-6, 0.5 - 1e-11, 0.5 + 1e-11] {
                assert!((ringdown(q, u) - at).abs() < 1e-6, "q={q} u={u}");
            }
        }
    }

    #[test]
    fn factorization_rejects_overdamped() {
        assert!(factored_denominator(1.0, 0.5).is_err());
        assert!(factored_denominator(1.0, 0.2).is_err());
    }

    #[test]
    fn factorization_worked_values() {
        let p = factored_denominator(0.0, 3.7).unwrap();
        assert!((p.re - 1.0).abs() < 1e-15 && p.im.abs() < 1e-15);
        let p = factored_denominator(1.0, 2.0).unwrap();
        assert!((p.re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unit_ringdown_at_origin() {
        for q in [0.1, 0.5, 0.6, 2.0, 100.0] {
            assert_eq!(ringdown(q, 0.0), 1.0);
        }
    }
}
