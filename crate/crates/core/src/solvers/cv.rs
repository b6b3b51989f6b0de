//! K-fold cross-validation over a penalty grid.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};

use super::{EstimatorKind, LinearModelInstance, PathSolver, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvPoint {
    pub gamma: f64,
    /// Mean over folds of `½‖y_test − A_test x̂‖² / n_test`.
    pub score: f64,
    /// Fits on this grid point that stopped before reaching tolerance.
    pub unconverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub best_gamma: f64,
    pub best_index: usize,
    pub curve: Vec<CvPoint>,
}

/// Row indices of each fold: a seeded shuffle cut into contiguous chunks.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    if folds > n {
        return Err(Error::InvalidArgument(format!(
            "{folds} folds over {n} rows leaves a fold with zero rows"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, stream::FOLDS));
    Ok((0..folds)
        .map(|f| {
            let mut rows = order[f * n / folds..(f + 1) * n / folds].to_vec();
            rows.sort_unstable();
            rows
        })
        .collect())
}

/// Scores every grid value by held-out prediction error.
///
/// Each fold trains at `γ · n_train / n` so that the penalty keeps its
/// weight relative to a loss summed over fewer rows. Within a fold the grid
/// is traversed from the largest `γ` down with warm starts. The argmin
/// breaks ties toward the smaller `γ`, then the earlier grid index.
pub fn cross_validate(
    inst: &LinearModelInstance,
    kind: &EstimatorKind,
    grid: &[f64],
    folds: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty penalty grid".into()));
    }
    if let Some(g) = grid.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::InvalidArgument(format!("grid values must be positive, got {g}")));
    }
    let n = inst.n();
    let assignment = fold_assignment(n, folds, seed)?;

    let mut path: Vec<usize> = (0..grid.len()).collect();
    path.sort_by(|&i, &j| grid[j].total_cmp(&grid[i]).then(i.cmp(&j)));

    let per_fold: Vec<Result<Vec<(f64, bool)>>> = assignment
        .par_iter()
        .map(|test_rows| {
            let mut in_test = vec![false; n];
            for &i in test_rows {
                in_test[i] = true;
            }
            let train_rows: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
            let train = inst.select_rows(&train_rows);
            let test = inst.select_rows(test_rows);
            let test_y = DVector::from_column_slice(&test.y);
            let scale = train_rows.len() as f64 / n as f64;
            let solver = PathSolver::new(&train, kind, opts)?;

            let mut out = vec![(0.0, true); grid.len()];
            let mut warm: Option<Vec<f64>> = None;
            for &g in &path {
                let fit = solver.fit(grid[g] * scale, warm.as_deref())?;
                let pred = &test.a * DVector::from_column_slice(&fit.x_hat);
                let score = 0.5 * (pred - &test_y).norm_squared() / test_rows.len() as f64;
                out[g] = (score, fit.converged);
                warm = Some(fit.x_hat);
            }
            Ok(out)
        })
        .collect();

    let mut curve: Vec<CvPoint> = grid
        .iter()
        .map(|&gamma| CvPoint {
            gamma,
            score: 0.0,
            unconverged: 0,
        })
        .collect();
    for fold in per_fold {
        for (point, (score, converged)) in curve.iter_mut().zip(fold?) {
            point.score += score / folds as f64;
            point.unconverged += usize::from(!converged);
        }
    }

    let mut best = 0;
    for (i, pt) in curve.iter().enumerate() {
        let b = &curve[best];
        if pt.score < b.score || (pt.score == b.score && pt.gamma < b.gamma) {
            best = i;
        }
    }
    Ok(CvResult {
        best_gamma: grid[best],
        best_index: best,
        curve,
    })
}
