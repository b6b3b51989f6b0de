use log::{info, warn};
use rayon::prelude::*;

use crate::datagen::gen_signal;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::solvers::{cross_validate, EstimatorKind, LinearModelInstance, PathSolver};
use crate::state_evolution::{optimal_risk, solve_se, SEProblem};
use crate::weights::WeightVector;

use super::spec::{EstimatorSpec, ExperimentKind, ExperimentSpec, TuningMode};
use super::{Provenance, ResultRow, ResultTable};

/// Noise level substituted for the state-evolution curve of a noiseless
/// penalty-grid experiment.
pub const NOISELESS_SE_SIGMA: f64 = 1e-3;

const CV_GRID_LO: f64 = 1e-3;
const CV_GRID_HI: f64 = 1e2;

/// Runs whichever experiment the spec describes.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    match spec.kind()? {
        ExperimentKind::PenaltyGrid => run_figure1(spec),
        ExperimentKind::NoiseSweep => run_noise_sweep(spec),
    }
}

/// Mean and `sd/√m` of the kept values. The standard error is NaN for a
/// single value.
fn summarize(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Collects replication outcomes for one table cell; `None` marks a drop.
fn aggregate(
    spec: &ExperimentSpec,
    label: &str,
    x: f64,
    outcomes: impl Iterator<Item = Option<f64>>,
    notes: &mut Vec<String>,
) -> Result<ResultRow> {
    let mut kept = Vec::with_capacity(spec.replications);
    let mut dropped = 0usize;
    for o in outcomes {
        match o {
            Some(v) => kept.push(v),
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        notes.push(format!("{label} at x={x}: {dropped} of {} replications dropped (no convergence)", spec.replications));
        if dropped as f64 > spec.max_drop_fraction * spec.replications as f64 || kept.is_empty() {
            return Err(Error::Convergence(format!(
                "{label} at x={x}: {dropped} of {} replications dropped",
                spec.replications
            )));
        }
    }
    let (mean, stderr) = summarize(&kept);
    Ok(ResultRow {
        estimator: label.to_string(),
        x,
        mean,
        stderr,
        m: kept.len(),
    })
}

fn resolve_all(spec: &ExperimentSpec) -> Result<Vec<EstimatorKind>> {
    spec.estimators.iter().map(|e| e.resolve(spec.p)).collect()
}

/// Weight sequence the state evolution uses for an estimator, if any.
fn se_weights(kind: &EstimatorKind, p: usize) -> Option<WeightVector> {
    match kind {
        EstimatorKind::Slope { weights } => Some(weights.clone()),
        EstimatorKind::Lasso => Some(WeightVector::constant(p)),
        EstimatorKind::Ridge | EstimatorKind::Bridge { .. } => None,
    }
}

/// The signal draw handed to the state evolution. Only its empirical
/// distribution matters there.
fn reference_signal(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    gen_signal(&spec.signal, spec.base_seed)
}

fn provenance(spec: &ExperimentSpec, notes: Vec<String>) -> Provenance {
    Provenance {
        spec_hash: spec.hash(),
        base_seed: spec.base_seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        notes,
    }
}

/// Penalty on the x-axis: per replication one instance is fitted along the
/// whole grid with warm starts, and each SLOPE or LASSO series is paired
/// with a `<label>:SE` series of state-evolution predictions.
pub fn run_figure1(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let grid = spec
        .gamma_grid
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("penalty-grid experiment needs gamma_grid".into()))?;
    let kinds = resolve_all(spec)?;
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| grid[j].total_cmp(&grid[i]).then(i.cmp(&j)));

    info!("{}: {} replications over {} penalty values", spec.name, spec.replications, grid.len());
    // per replication, per estimator, per grid index
    let reps: Vec<Vec<Vec<Option<f64>>>> = (0..spec.replications)
        .into_par_iter()
        .map(|r| -> Result<Vec<Vec<Option<f64>>>> {
            let seed = derive_seed(spec.base_seed, r as u64);
            let inst = LinearModelInstance::generate(&spec.design, &spec.signal, spec.sigma_z, seed)?;
            kinds
                .iter()
                .map(|kind| {
                    let solver = PathSolver::new(&inst, kind, &spec.solver)?;
                    let mut out = vec![None; grid.len()];
                    let mut warm: Option<Vec<f64>> = None;
                    for &g in &order {
                        let fit = solver.fit(grid[g], warm.as_deref())?;
                        if fit.converged {
                            out[g] = Some(inst.mse(&fit.x_hat)?);
                        }
                        warm = Some(fit.x_hat);
                    }
                    Ok(out)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut notes = Vec::new();
    let se_sigma = if spec.sigma_z > 0.0 {
        spec.sigma_z
    } else {
        notes.push(format!(
            "state-evolution curves use sigma_z={NOISELESS_SE_SIGMA} in place of the noiseless setting"
        ));
        NOISELESS_SE_SIGMA
    };
    let x_ref = reference_signal(spec)?;

    let mut rows = Vec::new();
    for (e, (est, kind)) in spec.estimators.iter().zip(&kinds).enumerate() {
        for (g, &gamma) in grid.iter().enumerate() {
            rows.push(aggregate(spec, &est.label, gamma, reps.iter().map(|rep| rep[e][g]), &mut notes)?);
        }
        let Some(lambda) = se_weights(kind, spec.p) else {
            continue;
        };
        let prob = SEProblem::new(x_ref.clone(), lambda, spec.delta, se_sigma)
            .with_seed(spec.base_seed)
            .with_mc_samples(spec.mc_samples);
        let label = format!("{}:SE", est.label);
        let predictions: Vec<ResultRow> = grid
            .par_iter()
            .map(|&gamma| {
                let (mean, stderr) = match solve_se(&prob, gamma) {
                    Ok(st) => (st.predicted_mse, st.mc_std_err),
                    Err(err) => {
                        warn!("{label} at gamma={gamma}: {err}");
                        (f64::NAN, f64::NAN)
                    }
                };
                ResultRow {
                    estimator: label.clone(),
                    x: gamma,
                    mean,
                    stderr,
                    m: spec.mc_samples,
                }
            })
            .collect();
        for row in &predictions {
            if row.mean.is_nan() {
                notes.push(format!("{label} at x={}: state evolution did not solve", row.x));
            }
        }
        rows.extend(predictions);
    }
    Ok(ResultTable {
        name: spec.name.clone(),
        rows,
        provenance: provenance(spec, notes),
    })
}

/// Log-spaced penalties over `[1e-3, 1e2]·scale`.
pub fn cv_grid(scale: f64, points: usize) -> Vec<f64> {
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    if points == 1 {
        return vec![scale];
    }
    let (lo, hi) = (CV_GRID_LO.ln(), CV_GRID_HI.ln());
    (0..points)
        .map(|i| scale * (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Chooses the penalty for one estimator on one instance.
fn tune(
    spec: &ExperimentSpec,
    est: &EstimatorSpec,
    kind: &EstimatorKind,
    inst: &LinearModelInstance,
    optimal_gamma: Option<f64>,
    seed: u64,
) -> Result<f64> {
    match est.tuning {
        TuningMode::Fixed => Ok(est.gamma.expect("validated")),
        TuningMode::SeOptimal => Ok(optimal_gamma.expect("computed for se-optimal estimators")),
        TuningMode::Cv => {
            let grid = cv_grid(inst.gradient_scale(), spec.cv_grid_points);
            Ok(cross_validate(inst, kind, &grid, spec.cv_folds, seed, &spec.solver)?.best_gamma)
        }
    }
}

/// Noise level on the x-axis: fresh data per (noise level, replication),
/// each estimator tuned on the instance and refitted on all rows.
/// Estimators tuned by state evolution also get a `<label>:SE` series.
pub fn run_noise_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let grid = spec
        .noise_grid
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("noise-sweep experiment needs noise_grid".into()))?;
    let kinds = resolve_all(spec)?;
    let x_ref = reference_signal(spec)?;

    // optimal SE tuning per (estimator, noise level)
    let mut optimal: Vec<Vec<Option<(f64, f64, f64)>>> = Vec::with_capacity(kinds.len());
    for (est, kind) in spec.estimators.iter().zip(&kinds) {
        if est.tuning != TuningMode::SeOptimal {
            optimal.push(vec![None; grid.len()]);
            continue;
        }
        let lambda = se_weights(kind, spec.p).expect("validated");
        let per_noise = grid
            .iter()
            .map(|&sz| {
                if sz == 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "{}: se-optimal tuning is undefined at sigma_z=0",
                        est.label
                    )));
                }
                let prob = SEProblem::new(x_ref.clone(), lambda.clone(), spec.delta, sz)
                    .with_seed(spec.base_seed)
                    .with_mc_samples(spec.mc_samples);
                let opt = optimal_risk(&prob)?;
                Ok(Some((opt.gamma_star, opt.e_star, opt.se.mc_std_err)))
            })
            .collect::<Result<Vec<_>>>()?;
        optimal.push(per_noise);
    }

    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..spec.replications).map(move |r| (g, r)))
        .collect();
    info!("{}: {} instances, {} estimators", spec.name, tasks.len(), kinds.len());
    let results: Vec<Vec<Option<f64>>> = tasks
        .par_iter()
        .map(|&(g, r)| -> Result<Vec<Option<f64>>> {
            let seed = derive_seed(derive_seed(spec.base_seed, g as u64), r as u64);
            let inst = LinearModelInstance::generate(&spec.design, &spec.signal, grid[g], seed)?;
            spec.estimators
                .iter()
                .zip(&kinds)
                .enumerate()
                .map(|(e, (est, kind))| {
                    let gamma = tune(spec, est, kind, &inst, optimal[e][g].map(|o| o.0), seed)?;
                    let fit = PathSolver::new(&inst, kind, &spec.solver)?.fit(gamma, None)?;
                    Ok(if fit.converged { Some(inst.mse(&fit.x_hat)?) } else { None })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut notes = Vec::new();
    let mut rows = Vec::new();
    for (e, est) in spec.estimators.iter().enumerate() {
        for (g, &sz) in grid.iter().enumerate() {
            let cell = (0..spec.replications).map(|r| results[g * spec.replications + r][e]);
            rows.push(aggregate(spec, &est.label, sz, cell, &mut notes)?);
        }
        if est.tuning == TuningMode::SeOptimal {
            for (g, &sz) in grid.iter().enumerate() {
                let (_, mean, stderr) = optimal[e][g].expect("computed");
                rows.push(ResultRow {
                    estimator: format!("{}:SE", est.label),
                    x: sz,
                    mean,
                    stderr,
                    m: spec.mc_samples,
                });
            }
        }
    }
    Ok(ResultTable {
        name: spec.name.clone(),
        rows,
        provenance: provenance(spec, notes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let (m, se) = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((se - sd / 2.0).abs() < 1e-15);
        assert!(summarize(&[1.0]).1.is_nan());
    }

    #[test]
    fn cv_grid_spans_scale() {
        let g = cv_grid(2.0, 40);
        assert_eq!(g.len(), 40);
        assert!((g[0] - 2e-3).abs() < 1e-15);
        assert!((g[39] - 200.0).abs() < 1e-10);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(cv_grid(0.0, 1), vec![1.0]);
    }
}
