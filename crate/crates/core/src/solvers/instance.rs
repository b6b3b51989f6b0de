use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::datagen::{gen_design, gen_noise, gen_signal, DesignSpec, SignalSpec};
use crate::error::{check_finite, check_len, Error, Result};

/// A regression problem `y = A x + z`.
#[derive(Debug, Clone)]
pub struct LinearModelInstance {
    pub a: DMatrix<f64>,
    pub x_true: Option<Vec<f64>>,
    pub z: Option<Vec<f64>>,
    pub y: Vec<f64>,
    pub sigma_z: f64,
}

/// Dimensions and ratios of an instance, for reporting.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InstanceShape {
    pub n: usize,
    pub p: usize,
    pub delta: f64,
    pub epsilon: Option<f64>,
}

impl LinearModelInstance {
    /// An instance with only the response known.
    pub fn new(a: DMatrix<f64>, y: Vec<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidArgument("design must be nonempty".into()));
        }
        check_len(a.nrows(), y.len())?;
        check_finite("design", a.as_slice())?;
        check_finite("response", &y)?;
        Ok(Self {
            a,
            x_true: None,
            z: None,
            y,
            sigma_z: 0.0,
        })
    }

    /// Builds `y = A x + z` from its parts.
    pub fn from_parts(a: DMatrix<f64>, x_true: Vec<f64>, z: Vec<f64>, sigma_z: f64) -> Result<Self> {
        check_len(a.ncols(), x_true.len())?;
        check_len(a.nrows(), z.len())?;
        check_finite("signal", &x_true)?;
        check_finite("noise", &z)?;
        let mut y = &a * DVector::from_column_slice(&x_true);
        for (yi, zi) in y.iter_mut().zip(&z) {
            *yi += zi;
        }
        let mut inst = Self::new(a, y.data.into())?;
        inst.x_true = Some(x_true);
        inst.z = Some(z);
        inst.sigma_z = sigma_z;
        Ok(inst)
    }

    /// Draws design, signal and noise from their specs with a single seed.
    pub fn generate(design: &DesignSpec, signal: &SignalSpec, sigma_z: f64, seed: u64) -> Result<Self> {
        if design.p != signal.p {
            return Err(Error::DimensionMismatch {
                expected: design.p,
                got: signal.p,
            });
        }
        let a = gen_design(design, seed)?;
        let x = gen_signal(signal, seed)?;
        let z = gen_noise(design.n, sigma_z, seed)?;
        Self::from_parts(a, x, z, sigma_z)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn p(&self) -> usize {
        self.a.ncols()
    }

    pub fn delta(&self) -> f64 {
        self.n() as f64 / self.p() as f64
    }

    /// Fraction of nonzero entries in the true signal, when known.
    pub fn epsilon(&self) -> Option<f64> {
        self.x_true
            .as_ref()
            .map(|x| x.iter().filter(|&&v| v != 0.0).count() as f64 / x.len() as f64)
    }

    pub fn shape(&self) -> InstanceShape {
        InstanceShape {
            n: self.n(),
            p: self.p(),
            delta: self.delta(),
            epsilon: self.epsilon(),
        }
    }

    /// `(1/p)‖x̂ − x‖²` against the true signal.
    pub fn mse(&self, x_hat: &[f64]) -> Result<f64> {
        let x = self
            .x_true
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("instance has no true signal".into()))?;
        check_len(x.len(), x_hat.len())?;
        Ok(x.iter().zip(x_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64)
    }

    /// The sub-problem on the given rows.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            a: self.a.select_rows(rows),
            x_true: self.x_true.clone(),
            z: self.z.as_ref().map(|z| rows.iter().map(|&i| z[i]).collect()),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            sigma_z: self.sigma_z,
        }
    }

    /// `‖Aᵀy‖∞`, the scale above which the LASSO solution is zero.
    pub fn gradient_scale(&self) -> f64 {
        let aty = self.a.tr_mul(&DVector::from_column_slice(&self.y));
        aty.amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{DesignKind, SignalKind};

    #[test]
    fn response_matches_parts() {
        let d = DesignSpec::new(DesignKind::IidGaussian, 30, 20);
        let s = SignalSpec::new(SignalKind::UniformNonzero, 0.3, 20);
        let inst = LinearModelInstance::generate(&d, &s, 0.5, 11).unwrap();
        let ax = &inst.a * DVector::from_column_slice(inst.x_true.as_ref().unwrap());
        for i in 0..30 {
            let r = inst.y[i] - ax[i] - inst.z.as_ref().unwrap()[i];
            assert!(r.abs() <= 1e-12);
        }
        assert_eq!(inst.delta(), 1.5);
        assert_eq!(inst.epsilon(), Some(0.3));
    }

    #[test]
    fn rejects_bad_input() {
        let a = DMatrix::zeros(3, 2);
        assert!(LinearModelInstance::new(a.clone(), vec![0.0; 2]).is_err());
        assert!(LinearModelInstance::new(a, vec![0.0, f64::NAN, 0.0]).is_err());
    }
}
