use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::datagen::{gen_weights, DesignSpec, SignalSpec, WeightKind, WeightSpec};
use crate::error::{Error, Result};
use crate::solvers::{EstimatorKind, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorName {
    Slope,
    Lasso,
    Ridge,
    Bridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TuningMode {
    /// Use the spec's `gamma`, or the grid value on a penalty-grid experiment.
    #[default]
    Fixed,
    /// K-fold cross-validation on each generated instance.
    Cv,
    /// The state-evolution optimal penalty for the true signal.
    SeOptimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub label: String,
    pub kind: EstimatorName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default)]
    pub tuning: TuningMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl EstimatorSpec {
    /// The concrete estimator at dimension `p`.
    pub fn resolve(&self, p: usize) -> Result<EstimatorKind> {
        Ok(match self.kind {
            EstimatorName::Slope => {
                let mut w = self.weights.clone().ok_or_else(|| {
                    Error::InvalidArgument(format!("estimator {:?} needs a weight spec", self.label))
                })?;
                if w.kind != WeightKind::Custom || w.p == 0 {
                    w.p = p;
                }
                EstimatorKind::Slope {
                    weights: gen_weights(&w)?,
                }
            }
            EstimatorName::Lasso => EstimatorKind::Lasso,
            EstimatorName::Ridge => EstimatorKind::Ridge,
            EstimatorName::Bridge => EstimatorKind::Bridge {
                q: self.q.ok_or_else(|| {
                    Error::InvalidArgument(format!("bridge estimator {:?} needs q", self.label))
                })?,
            },
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

/// A check evaluated on the finished table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Assertion {
    /// `mean(worse) − mean(better) ≥ margin · √(se_better² + se_worse²)` at `x`.
    Less {
        better: String,
        worse: String,
        x: f64,
        #[serde(default = "default_margin")]
        margin: f64,
    },
    /// On at least `fraction` of the grid, the empirical mean of `label`
    /// lies within `k` combined standard errors of its `label:SE` row.
    SeAgreement {
        label: String,
        #[serde(default = "default_fraction")]
        fraction: f64,
        #[serde(default = "default_k")]
        k: f64,
    },
}

fn default_margin() -> f64 {
    2.0
}

fn default_fraction() -> f64 {
    0.9
}

fn default_k() -> f64 {
    3.0
}

fn default_replications() -> usize {
    20
}

fn default_folds() -> usize {
    5
}

fn default_grid_points() -> usize {
    40
}

fn default_mc_samples() -> usize {
    2000
}

fn default_max_drop() -> f64 {
    0.2
}

/// Declarative description of one replicated comparison.
///
/// Exactly one of `gamma_grid` (penalty on the x-axis, one noise level) or
/// `noise_grid` (noise level on the x-axis, tuned penalties) is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub p: usize,
    pub delta: f64,
    pub design: DesignSpec,
    pub signal: SignalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub sigma_z: f64,
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_grid_points")]
    pub cv_grid_points: usize,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    /// Largest tolerated fraction of dropped replications per table cell.
    #[serde(default = "default_max_drop")]
    pub max_drop_fraction: f64,
    #[serde(default)]
    pub outputs: OutputPaths,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assertions: Vec<Assertion>,
}

/// Which x-axis an experiment sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    PenaltyGrid,
    NoiseSweep,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        Ok(spec.normalized())
    }

    /// Fills in dimensions the nested specs may leave out.
    pub fn normalized(mut self) -> Self {
        let n = self.n();
        if self.design.n == 0 {
            self.design.n = n;
        }
        if self.design.p == 0 {
            self.design.p = self.p;
        }
        if self.signal.p == 0 {
            self.signal.p = self.p;
        }
        self
    }

    /// `round(δp)`.
    pub fn n(&self) -> usize {
        (self.delta * self.p as f64).round() as usize
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        match (&self.gamma_grid, &self.noise_grid) {
            (Some(_), None) => Ok(ExperimentKind::PenaltyGrid),
            (None, Some(_)) => Ok(ExperimentKind::NoiseSweep),
            _ => Err(Error::InvalidArgument(
                "exactly one of gamma_grid and noise_grid must be given".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.kind()?;
        if self.p == 0 || self.n() == 0 {
            return Err(Error::InvalidArgument(format!("dimensions p={} n={} must be positive", self.p, self.n())));
        }
        if self.design.n != self.n() || self.design.p != self.p || self.signal.p != self.p {
            return Err(Error::InvalidArgument("design and signal dimensions disagree with p and delta".into()));
        }
        self.design.validate()?;
        self.signal.validate()?;
        if self.estimators.is_empty() {
            return Err(Error::InvalidArgument("estimator list is empty".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument("need at least one replication".into()));
        }
        let grid = self.gamma_grid.as_ref().or(self.noise_grid.as_ref()).unwrap();
        if grid.is_empty() {
            return Err(Error::InvalidArgument("grid is empty".into()));
        }
        let mut labels = std::collections::HashSet::new();
        for e in &self.estimators {
            if !labels.insert(e.label.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate estimator label {:?}", e.label)));
            }
            e.resolve(self.p)?;
            if kind == ExperimentKind::NoiseSweep {
                match e.tuning {
                    TuningMode::Fixed if e.gamma.is_none() => {
                        return Err(Error::InvalidArgument(format!("fixed-tuned {:?} needs gamma", e.label)))
                    }
                    TuningMode::SeOptimal if matches!(e.kind, EstimatorName::Ridge | EstimatorName::Bridge) => {
                        return Err(Error::InvalidArgument(format!(
                            "se-optimal tuning applies to SLOPE and LASSO only ({:?})",
                            e.label
                        )))
                    }
                    _ => {}
                }
            }
        }
        match kind {
            ExperimentKind::PenaltyGrid => {
                if let Some(g) = grid.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
                    return Err(Error::InvalidArgument(format!("penalty grid values must be positive, got {g}")));
                }
                if !(self.sigma_z >= 0.0 && self.sigma_z.is_finite()) {
                    return Err(Error::InvalidArgument("sigma_z must be nonnegative".into()));
                }
            }
            ExperimentKind::NoiseSweep => {
                if let Some(g) = grid.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
                    return Err(Error::InvalidArgument(format!("noise levels must be nonnegative, got {g}")));
                }
            }
        }
        if !(0.0..1.0).contains(&self.max_drop_fraction) {
            return Err(Error::InvalidArgument("max_drop_fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"{
        "name": "t",
        "p": 50,
        "delta": 0.8,
        "design": {"kind": "iid-gaussian"},
        "signal": {"kind": "uniform-nonzero", "epsilon": 0.2},
        "noise_grid": [0.5, 1.0],
        "estimators": [
            {"label": "LASSO", "kind": "lasso", "tuning": "cv"},
            {"label": "SLOPE:BH", "kind": "slope", "weights": {"kind": "bh"}, "tuning": "cv"}
        ]
    }"#;

    #[test]
    fn parses_and_fills_dimensions() {
        let s = ExperimentSpec::from_json(SPEC).unwrap();
        assert_eq!(s.design.n, 40);
        assert_eq!(s.signal.p, 50);
        assert_eq!(s.replications, 20);
        assert_eq!(s.kind().unwrap(), ExperimentKind::NoiseSweep);
        s.validate().unwrap();
        assert_eq!(s.hash(), s.clone().hash());
        assert_eq!(s.hash().len(), 64);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ExperimentSpec::from_json(&SPEC.replace("\"p\": 50", "\"p\": 50, \"bogus\": 1")).is_err());
        let mut s = ExperimentSpec::from_json(SPEC).unwrap();
        s.estimators.clear();
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::from_json(SPEC).unwrap();
        s.gamma_grid = Some(vec![1.0]);
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::from_json(SPEC).unwrap();
        s.estimators[1].weights = None;
        assert!(s.validate().is_err());
    }
}
