//! Stack-of-blocks pool-adjacent-violators for nonincreasing isotonic fits.

use crate::error::{check_finite, Result};

/// One pooled run `[start, start + len)` of the fitted sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Block {
    pub start: usize,
    pub len: usize,
    pub sum: f64,
}

impl Block {
    #[inline]
    pub fn mean(&self) -> f64 {
        self.sum / self.len as f64
    }

    #[inline]
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// Runs PAVA over `values(0..n)`, leaving the pooled blocks in `blocks`.
///
/// Adjacent blocks with equal means are pooled as well, so every block
/// boundary is a strict decrease in fitted value.
pub(crate) fn pava_blocks(n: usize, mut values: impl FnMut(usize) -> f64, blocks: &mut Vec<Block>) {
    blocks.clear();
    for i in 0..n {
        let mut cur = Block {
            start: i,
            len: 1,
            sum: values(i),
        };
        while let Some(prev) = blocks.last() {
            // prev.mean <= cur.mean, cross-multiplied
            if prev.sum * cur.len as f64 <= cur.sum * prev.len as f64 {
                cur = Block {
                    start: prev.start,
                    len: prev.len + cur.len,
                    sum: prev.sum + cur.sum,
                };
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
}

/// Least-squares projection of `a` onto `{b : b_1 ≥ b_2 ≥ … ≥ b_p}`.
pub fn isotonic_regression_nonincreasing(a: &[f64]) -> Result<Vec<f64>> {
    check_finite("isotonic regression input", a)?;
    let mut blocks = Vec::with_capacity(a.len());
    pava_blocks(a.len(), |i| a[i], &mut blocks);
    let mut out = vec![0.0; a.len()];
    for b in &blocks {
        out[b.start..b.end()].fill(b.mean());
    }
    Ok(out)
}
