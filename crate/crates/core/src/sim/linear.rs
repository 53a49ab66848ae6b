//! Linear Langevin systems in companion form.
//!
//! Every model here is a chain `x_i' = x_{i+1}` whose last component obeys
//! `x_n' = row · x + b (τ_ext + τ(t))`, with white torque noise of two-sided
//! density `2γkT`. The exact stepper propagates the state over `dt` with
//! `Φ = e^{A dt}` and draws the increment from the exact step covariance
//! `P - Φ P Φᵀ`, where `P` solves the Lyapunov equation
//! `A P + P Aᵀ + b q bᵀ = 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::rng::GaussianSource;
use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Continuous-time model `dx = (A x + b τ_ext) dt + b dW`, `⟨dW²⟩ = q dt`.
#[derive(Debug, Clone)]
pub struct LinearModel {
    /// Last row of the companion matrix.
    pub row: Vec<f64>,
    /// Torque-to-acceleration gain of the last component.
    pub gain: f64,
    /// Two-sided torque noise density, 2γkT.
    pub noise_density: f64,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.row.len()
    }

    pub fn drift_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
        }
        for (j, &v) in self.row.iter().enumerate() {
            a[(n - 1, j)] = v;
        }
        a
    }

    fn input(&self) -> DVector<f64> {
        let mut b = DVector::zeros(self.dim());
        b[self.dim() - 1] = self.gain;
        b
    }

    /// Stationary covariance from the Lyapunov equation, solved as a
    /// Kronecker-product linear system.
    pub fn stationary_covariance(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let a = self.drift_matrix();
        let b = self.input();
        let noise = &b * b.transpose() * self.noise_density;
        let eye = DMatrix::<f64>::identity(n, n);
        let lhs = eye.kronecker(&a) + a.kronecker(&eye);
        let rhs = -DVector::from_column_slice(noise.as_slice());
        let sol = lhs.lu().solve(&rhs).ok_or_else(|| {
            Error::Unstable("drift matrix has no stationary covariance".into())
        })?;
        let p = DMatrix::from_column_slice(n, n, sol.as_slice());
        Ok((&p + p.transpose()) * 0.5)
    }
}

/// Exact one-step propagator for a [`LinearModel`].
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    n: usize,
    transition: [[f64; MAX_DIM]; MAX_DIM],
    forcing: [f64; MAX_DIM],
    noise_factor: [[f64; MAX_DIM]; MAX_DIM],
}

impl ExactPropagator {
    pub fn new(model: &LinearModel, dt: f64) -> Result<Self> {
        let n = model.dim();
        assert!((1..=MAX_DIM).contains(&n));
        let a = model.drift_matrix();
        let phi = (&a * dt).exp();
        let eye = DMatrix::<f64>::identity(n, n);
        // ∫₀^dt e^{As} b ds = A⁻¹ (Φ - 1) b
        let forcing = a
            .clone()
            .lu()
            .solve(&((&phi - &eye) * model.input()))
            .ok_or_else(|| Error::Unstable("singular drift matrix".into()))?;
        let p = model.stationary_covariance()?;
        let step_cov = &p - &phi * &p * phi.transpose();
        let step_cov = (&step_cov + step_cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(step_cov);
        let mut factor = eig.eigenvectors.clone();
        for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
            let s = lambda.max(0.0).sqrt();
            for i in 0..n {
                factor[(i, j)] *= s;
            }
        }
        let mut out = Self {
            n,
            transition: [[0.0; MAX_DIM]; MAX_DIM],
            forcing: [0.0; MAX_DIM],
            noise_factor: [[0.0; MAX_DIM]; MAX_DIM],
        };
        for i in 0..n {
            out.forcing[i] = forcing[i];
            for j in 0..n {
                out.transition[i][j] = phi[(i, j)];
                out.noise_factor[i][j] = factor[(i, j)];
            }
        }
        Ok(out)
    }

    pub fn transition(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.transition[i][j])
    }

    pub fn step_covariance(&self) -> DMatrix<f64> {
        let l = DMatrix::from_fn(self.n, self.n, |i, j| self.noise_factor[i][j]);
        &l * l.transpose()
    }

    #[inline]
    pub fn step(
        &self,
        state: &mut [f64; MAX_DIM],
        torque: f64,
        noise: Option<&mut GaussianSource>,
    ) {
        let n = self.n;
        let mut next = [0.0; MAX_DIM];
        for i in 0..n {
            let mut acc = self.forcing[i] * torque;
            for j in 0..n {
                acc += self.transition[i][j] * state[j];
            }
            next[i] = acc;
        }
        if let Some(src) = noise {
            let mut z = [0.0; MAX_DIM];
            for zj in z.iter_mut().take(n) {
                *zj = src.standard_normal();
            }
            for i in 0..n {
                for j in 0..n {
                    next[i] += self.noise_factor[i][j] * z[j];
                }
            }
        }
        *state = next;
    }
}

/// Semi-implicit Euler–Maruyama: the last component takes an explicit
/// Euler–Maruyama step, then the chain is integrated upward with the
/// freshly updated values (Euler–Cromer ordering).
#[derive(Debug, Clone)]
pub struct EulerMaruyama {
    n: usize,
    row: [f64; MAX_DIM],
    gain: f64,
    dt: f64,
    noise_scale: f64,
}

impl EulerMaruyama {
    pub fn new(model: &LinearModel, dt: f64) -> Result<Self> {
        let n = model.dim();
        let stiff = model.row[n - 1].abs() * dt;
        if stiff >= 0.5 {
            return Err(Error::Unstable(format!(
                "Euler–Maruyama needs dt·|damping rate| < 0.5, got {stiff:.3}"
            )));
        }
        let mut row = [0.0; MAX_DIM];
        row[..n].copy_from_slice(&model.row);
        Ok(Self {
            n,
            row,
            gain: model.gain,
            dt,
            noise_scale: model.gain * (model.noise_density * dt).sqrt(),
        })
    }

    #[inline]
    pub fn step(
        &self,
        state: &mut [f64; MAX_DIM],
        torque: f64,
        noise: Option<&mut GaussianSource>,
    ) {
        let n = self.n;
        let mut drift = self.gain * torque;
        for j in 0..n {
            drift += self.row[j] * state[j];
        }
        state[n - 1] += drift * self.dt;
        if let Some(src) = noise {
            state[n - 1] += self.noise_scale * src.standard_normal();
        }
        for i in (0..n - 1).rev() {
            state[i] += state[i + 1] * self.dt;
        }
    }
}
