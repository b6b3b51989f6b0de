//! Nonincreasing, nonnegative weight sequences for the sorted-L1 norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated SLOPE weight sequence `λ_1 ≥ λ_2 ≥ … ≥ λ_p ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidWeights(format!("weight {i} is not finite")));
        }
        if let Some(i) = weights.iter().position(|&w| w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weight {i} is negative ({})",
                weights[i]
            )));
        }
        if let Some(i) = weights.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::InvalidWeights(format!(
                "weights increase at position {i} ({} < {})",
                weights[i],
                weights[i + 1]
            )));
        }
        Ok(Self { weights })
    }

    /// All-ones weights, i.e. the LASSO penalty.
    pub fn constant(p: usize) -> Self {
        Self {
            weights: vec![1.0; p.max(1)],
        }
    }

    pub fn p(&self) -> usize {
        self.weights.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn max(&self) -> f64 {
        self.weights[0]
    }

    pub fn is_zero(&self) -> bool {
        self.weights[0] == 0.0
    }

    pub fn norm2_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.norm2_sq().sqrt()
    }

    /// Weights rescaled so that the largest one equals 1.
    pub fn normalized(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidWeights(
                "cannot normalize an all-zero weight vector".into(),
            ));
        }
        Ok(self.scaled(1.0 / self.max()))
    }

    pub fn scaled(&self, t: f64) -> Self {
        assert!(t >= 0.0 && t.is_finite(), "scale must be finite and nonnegative");
        Self {
            weights: self.weights.iter().map(|w| w * t).collect(),
        }
    }

    /// Contiguous sub-sequence `λ[start..end]`, still a valid weight vector.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.p() {
            return Err(Error::InvalidArgument(format!(
                "invalid weight range {start}..{end} for p = {}",
                self.p()
            )));
        }
        Ok(Self {
            weights: self.weights[start..end].to_vec(),
        })
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(value: WeightVector) -> Self {
        value.weights
    }
}
