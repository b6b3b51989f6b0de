//! Seeded generators for designs, signals, noise and weight sequences.
//!
//! Every generator is a pure function of `(spec, seed)`.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};
use crate::special::normal_quantile;
use crate::weights::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignKind {
    IidGaussian,
    Correlated,
    HeavyTail,
    CorrelatedHeavyTail,
}

impl DesignKind {
    fn correlated(self) -> bool {
        matches!(self, Self::Correlated | Self::CorrelatedHeavyTail)
    }

    fn heavy_tailed(self) -> bool {
        matches!(self, Self::HeavyTail | Self::CorrelatedHeavyTail)
    }
}

fn default_df() -> u32 {
    3
}

fn default_amplitude() -> f64 {
    5.0
}

fn default_q_bh() -> f64 {
    0.5
}

/// Design family `A = Ã Σ^{1/2}` with `Σ_ij = ρ^{|i−j|}`, entries of `Ã`
/// Gaussian or Student-t, scaled to variance `1/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub kind: DesignKind,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "default_df")]
    pub df: u32,
    /// Filled in from the experiment dimensions when omitted.
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub p: usize,
}

impl DesignSpec {
    pub fn new(kind: DesignKind, n: usize, p: usize) -> Self {
        Self {
            kind,
            rho: 0.0,
            df: 3,
            n,
            p,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidArgument(format!(
                "design dimensions must be positive, got {}x{}",
                self.n, self.p
            )));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidArgument(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if self.kind.heavy_tailed() && self.df <= 2 {
            return Err(Error::InvalidArgument(format!(
                "t design needs df > 2 for finite variance, got {}",
                self.df
            )));
        }
        Ok(())
    }
}

pub fn gen_design(spec: &DesignSpec, seed: u64) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut rng = stream_rng(seed, stream::DESIGN);
    let mut data = Vec::with_capacity(n * p);
    if spec.kind.heavy_tailed() {
        let df = spec.df as f64;
        let t = StudentT::new(df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let scale = 1.0 / (n as f64 * df / (df - 2.0)).sqrt();
        data.extend((0..n * p).map(|_| t.sample(&mut rng) * scale));
    } else {
        let scale = 1.0 / (n as f64).sqrt();
        data.extend((0..n * p).map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        }));
    }
    // column-major: column j occupies data[j*n..(j+1)*n]
    if spec.kind.correlated() && spec.rho > 0.0 {
        // Right-multiplying by the transposed Cholesky factor of the AR(1)
        // matrix is the recursion a_j = ρ a_{j−1} + √(1−ρ²) ã_j.
        let rho = spec.rho;
        let c = (1.0 - rho * rho).sqrt();
        for j in 1..p {
            let (prev, cur) = data.split_at_mut(j * n);
            let prev = &prev[(j - 1) * n..];
            for (a, b) in cur[..n].iter_mut().zip(prev) {
                *a = rho * b + c * *a;
            }
        }
    }
    Ok(DMatrix::from_vec(n, p, data))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    /// Nonzeros iid `Uniform(0, amplitude]`.
    UniformNonzero,
    /// All nonzeros equal to `amplitude`.
    ConstantNonzero,
    /// `amplitude · Bernoulli(ε)` with the support size fixed at `round(εp)`.
    BernoulliScaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub epsilon: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub p: usize,
}

impl SignalSpec {
    pub fn new(kind: SignalKind, epsilon: f64, p: usize) -> Self {
        Self {
            kind,
            epsilon,
            amplitude: 5.0,
            p,
        }
    }

    pub fn support_size(&self) -> usize {
        (self.epsilon * self.p as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if self.support_size() == 0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon * p = {} rounds to an empty support",
                self.epsilon * self.p as f64
            )));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }
}

pub fn gen_signal(spec: &SignalSpec, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut rng = stream_rng(seed, stream::SIGNAL);
    let k = spec.support_size();
    let mut support = index::sample(&mut rng, spec.p, k).into_vec();
    support.sort_unstable();
    let mut x = vec![0.0; spec.p];
    for i in support {
        x[i] = match spec.kind {
            SignalKind::UniformNonzero => spec.amplitude * (1.0 - rng.random::<f64>()),
            SignalKind::ConstantNonzero | SignalKind::BernoulliScaled => spec.amplitude,
        };
    }
    Ok(x)
}

/// iid `N(0, σ_z²)` noise of length `n`.
pub fn gen_noise(n: usize, sigma_z: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma_z >= 0.0 && sigma_z.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise level must be nonnegative, got {sigma_z}")));
    }
    let mut rng = stream_rng(seed, stream::NOISE);
    Ok((0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma_z * z
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// All ones (LASSO).
    Constant,
    /// `λ_i = 1 − 0.99(i−1)/p`.
    LinearUniform,
    /// `λ_i = Φ⁻¹(1 − iq/2p) / Φ⁻¹(1 − q/2p)`.
    Bh,
    /// `λ_1 = λ_2 = 1`, the rest zero.
    Max2,
    /// Equally spaced from 1 down to 0.01.
    Equispaced,
    /// Explicit values, normalized to a unit maximum.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub kind: WeightKind,
    #[serde(default = "default_q_bh")]
    pub q_bh: f64,
    #[serde(default)]
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl WeightSpec {
    pub fn new(kind: WeightKind, p: usize) -> Self {
        Self {
            kind,
            q_bh: 0.5,
            p,
            values: None,
        }
    }
}

pub fn gen_weights(spec: &WeightSpec) -> Result<WeightVector> {
    let p = spec.p;
    if p == 0 && spec.kind != WeightKind::Custom {
        return Err(Error::InvalidArgument("weight dimension must be positive".into()));
    }
    let w = match spec.kind {
        WeightKind::Constant => vec![1.0; p],
        WeightKind::LinearUniform => (0..p).map(|i| 1.0 - 0.99 * i as f64 / p as f64).collect(),
        WeightKind::Bh => {
            let q = spec.q_bh;
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::InvalidArgument(format!("q_bh must lie in (0, 1), got {q}")));
            }
            let top = normal_quantile(1.0 - q / (2.0 * p as f64));
            (1..=p)
                .map(|i| normal_quantile(1.0 - i as f64 * q / (2.0 * p as f64)) / top)
                .collect()
        }
        WeightKind::Max2 => (0..p).map(|i| if i < 2 { 1.0 } else { 0.0 }).collect(),
        WeightKind::Equispaced => {
            if p == 1 {
                vec![1.0]
            } else {
                (0..p).map(|i| 1.0 - 0.99 * i as f64 / (p - 1) as f64).collect()
            }
        }
        WeightKind::Custom => {
            let values = spec
                .values
                .clone()
                .ok_or_else(|| Error::InvalidArgument("custom weights need `values`".into()))?;
            if p != 0 && values.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: values.len(),
                });
            }
            return WeightVector::new(values)?.normalized();
        }
    };
    WeightVector::new(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_columns_have_unit_norm() {
        let a = gen_design(&DesignSpec::new(DesignKind::IidGaussian, 500, 200), 1).unwrap();
        let mean: f64 = a.column_iter().map(|c| c.norm_squared()).sum::<f64>() / 200.0;
        assert!((0.9..=1.1).contains(&mean), "{mean}");
    }

    #[test]
    fn correlated_lag_one() {
        let a = gen_design(&DesignSpec::new(DesignKind::Correlated, 400, 500).with_rho(0.8), 2).unwrap();
        let n = a.nrows() as f64;
        let mut corr = 0.0;
        for j in 1..a.ncols() {
            corr += a.column(j).dot(&a.column(j - 1)) * n / n;
        }
        corr /= (a.ncols() - 1) as f64;
        assert!((corr - 0.8).abs() < 0.05, "{corr}");
    }

    #[test]
    fn heavy_tail_variance() {
        let spec = DesignSpec::new(DesignKind::HeavyTail, 1000, 1000);
        let a = gen_design(&spec, 3).unwrap();
        let var = a.iter().map(|v| v * v).sum::<f64>() / 1e6;
        let target = 1.0 / 1000.0;
        assert!((var - target).abs() < 0.2 * target, "{var}");
    }

    #[test]
    fn invalid_designs() {
        let mut spec = DesignSpec::new(DesignKind::HeavyTail, 10, 10);
        spec.df = 2;
        assert!(gen_design(&spec, 0).is_err());
        assert!(gen_design(&DesignSpec::new(DesignKind::Correlated, 10, 10).with_rho(1.0), 0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let spec = DesignSpec::new(DesignKind::CorrelatedHeavyTail, 20, 30).with_rho(0.5);
        assert_eq!(gen_design(&spec, 9).unwrap(), gen_design(&spec, 9).unwrap());
        assert_ne!(gen_design(&spec, 9).unwrap(), gen_design(&spec, 10).unwrap());
        let s = SignalSpec::new(SignalKind::UniformNonzero, 0.3, 100);
        assert_eq!(gen_signal(&s, 4).unwrap(), gen_signal(&s, 4).unwrap());
        assert_eq!(gen_noise(10, 1.0, 4).unwrap(), gen_noise(10, 1.0, 4).unwrap());
    }

    #[test]
    fn signal_support_and_values() {
        let dense = gen_signal(&SignalSpec::new(SignalKind::UniformNonzero, 1.0, 50), 0).unwrap();
        assert!(dense.iter().all(|&v| v != 0.0));

        let c = gen_signal(&SignalSpec::new(SignalKind::ConstantNonzero, 0.7, 100), 1).unwrap();
        assert_eq!(c.iter().filter(|&&v| v != 0.0).count(), 70);
        assert!(c.iter().all(|&v| v == 0.0 || v == 5.0));

        let u = gen_signal(&SignalSpec::new(SignalKind::UniformNonzero, 0.5, 500), 2).unwrap();
        let mut nz: Vec<f64> = u.into_iter().filter(|&v| v != 0.0).collect();
        assert_eq!(nz.len(), 250);
        nz.sort_by(f64::total_cmp);
        assert!(nz.windows(2).all(|w| w[0] < w[1]));
        assert!(nz.iter().all(|&v| v > 0.0 && v <= 5.0));

        assert!(gen_signal(&SignalSpec::new(SignalKind::ConstantNonzero, 0.001, 100), 0).is_err());
    }

    #[test]
    fn weight_families() {
        assert_eq!(gen_weights(&WeightSpec::new(WeightKind::Constant, 3)).unwrap().as_slice(), &[1.0; 3]);
        assert_eq!(
            gen_weights(&WeightSpec::new(WeightKind::Max2, 5)).unwrap().as_slice(),
            &[1.0, 1.0, 0.0, 0.0, 0.0]
        );
        let eq = gen_weights(&WeightSpec::new(WeightKind::Equispaced, 100)).unwrap();
        assert_eq!(eq.as_slice()[0], 1.0);
        assert!((eq.as_slice()[99] - 0.01).abs() < 1e-15);
        let lu = gen_weights(&WeightSpec::new(WeightKind::LinearUniform, 4)).unwrap();
        assert_eq!(lu.as_slice(), &[1.0, 1.0 - 0.99 / 4.0, 1.0 - 0.99 / 2.0, 1.0 - 0.99 * 3.0 / 4.0]);

        let bh = gen_weights(&WeightSpec::new(WeightKind::Bh, 1000)).unwrap();
        assert_eq!(bh.as_slice()[0], 1.0);
        assert!(bh.as_slice().windows(2).all(|w| w[0] > w[1]));
        assert!(bh.as_slice()[999] > 0.0);

        let mut bad = WeightSpec::new(WeightKind::Bh, 10);
        bad.q_bh = 1.0;
        assert!(gen_weights(&bad).is_err());
    }
}
