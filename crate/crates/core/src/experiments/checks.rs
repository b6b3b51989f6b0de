use serde::Serialize;

use super::spec::Assertion;
use super::ResultTable;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssertionOutcome {
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

fn combined(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

/// Evaluates each assertion against the table. A missing row fails.
pub fn evaluate_assertions(table: &ResultTable, assertions: &[Assertion]) -> Vec<AssertionOutcome> {
    assertions.iter().map(|a| evaluate(table, a)).collect()
}

fn evaluate(table: &ResultTable, a: &Assertion) -> AssertionOutcome {
    match a {
        Assertion::Less { better, worse, x, margin } => {
            let description = format!("{better} < {worse} at x={x} by {margin} std errs");
            match (table.row(better, *x), table.row(worse, *x)) {
                (Some(b), Some(w)) => {
                    let se = combined(b.stderr, w.stderr);
                    let gap = w.mean - b.mean;
                    AssertionOutcome {
                        description,
                        passed: gap >= margin * se,
                        detail: format!("{:.6} vs {:.6}, gap {:.6} = {:.2} std errs", b.mean, w.mean, gap, gap / se),
                    }
                }
                _ => AssertionOutcome {
                    description,
                    passed: false,
                    detail: "missing row".into(),
                },
            }
        }
        Assertion::SeAgreement { label, fraction, k } => {
            let description = format!("{label} within {k} std errs of {label}:SE on {fraction} of the grid");
            let se_label = format!("{label}:SE");
            let emp = table.series(label);
            let mut hits = 0usize;
            let mut total = 0usize;
            for e in &emp {
                total += 1;
                if let Some(s) = table.row(&se_label, e.x) {
                    if (e.mean - s.mean).abs() <= k * combined(e.stderr, s.stderr) {
                        hits += 1;
                    }
                }
            }
            let share = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
            AssertionOutcome {
                description,
                passed: total > 0 && share >= *fraction,
                detail: format!("{hits} of {total} points agree"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{Provenance, ResultRow};

    fn row(e: &str, x: f64, mean: f64, stderr: f64) -> ResultRow {
        ResultRow {
            estimator: e.into(),
            x,
            mean,
            stderr,
            m: 20,
        }
    }

    fn table() -> ResultTable {
        ResultTable {
            name: "t".into(),
            rows: vec![
                row("A", 1.0, 1.0, 0.1),
                row("B", 1.0, 1.5, 0.1),
                row("A", 2.0, 1.0, 0.1),
                row("A:SE", 1.0, 1.05, 0.01),
                row("A:SE", 2.0, 3.0, 0.01),
            ],
            provenance: Provenance {
                spec_hash: String::new(),
                base_seed: 0,
                version: String::new(),
                notes: vec![],
            },
        }
    }

    #[test]
    fn less_uses_combined_error() {
        let t = table();
        let pass = Assertion::Less { better: "A".into(), worse: "B".into(), x: 1.0, margin: 2.0 };
        let fail = Assertion::Less { better: "A".into(), worse: "B".into(), x: 1.0, margin: 4.0 };
        let missing = Assertion::Less { better: "A".into(), worse: "B".into(), x: 2.0, margin: 0.0 };
        let out = evaluate_assertions(&t, &[pass, fail, missing]);
        assert_eq!(out.iter().map(|o| o.passed).collect::<Vec<_>>(), vec![true, false, false]);
    }

    #[test]
    fn agreement_fraction() {
        let t = table();
        let half = Assertion::SeAgreement { label: "A".into(), fraction: 0.5, k: 3.0 };
        let all = Assertion::SeAgreement { label: "A".into(), fraction: 0.9, k: 3.0 };
        let out = evaluate_assertions(&t, &[half, all]);
        assert!(out[0].passed);
        assert!(!out[1].passed);
    }
}
