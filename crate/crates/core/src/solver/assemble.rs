//! Stacking of block residuals into one penalized residual vector and a
//! sparse Jacobian.

use faer::sparse::{SparseColMat, Triplet};

use crate::constraints::{penalize, Family, PenaltyKind, RawBlock, ResidualBlock};
use crate::error::{Error, Result};

use super::problem::Problem;

/// How blocks are evaluated. Both modes produce bit-identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

pub type SparseMatrix = SparseColMat<usize, f64>;

/// Penalized residual, its Jacobian and the raw per-family violations.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub residual: Vec<f64>,
    pub jacobian: SparseMatrix,
    pub violations: Vec<(Family, f64)>,
}

impl Assembly {
    /// `½ ‖r‖²`.
    pub fn objective(&self) -> f64 {
        0.5 * self.residual.iter().map(|r| r * r).sum::<f64>()
    }

    /// `Jᵀ r`.
    pub fn gradient(&self) -> Vec<f64> {
        let jac = &self.jacobian;
        let (ptr, rows, vals) = (jac.symbolic().col_ptr(), jac.symbolic().row_idx(), jac.val());
        (0..jac.ncols())
            .map(|j| (ptr[j]..ptr[j + 1]).map(|k| vals[k] * self.residual[rows[k]]).sum())
            .collect()
    }
}

/// Evaluates every block at `x`, in declaration order.
pub fn evaluate_blocks(problem: &Problem, x: &[f64], execution: Execution) -> Vec<RawBlock> {
    match execution {
        Execution::Sequential => problem.blocks.iter().map(|b| b.evaluate(x)).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            problem.blocks.par_iter().map(|b| b.evaluate(x)).collect()
        }
    }
}

/// Effective penalty weight of one row: the block weight times the sample
/// scale for objective terms, or times `penalty_scale` for constraints.
fn row_weight(block: &ResidualBlock, row: usize, penalty_scale: f64) -> f64 {
    match block.kind {
        PenaltyKind::Objective => block.weight * block.samples[row / block.rows_per_sample()].scale,
        _ => block.weight * penalty_scale,
    }
}

fn check_block(block: &ResidualBlock, raw: &RawBlock, len: usize) -> Result<()> {
    if let Some(e) = raw.entries.iter().find(|e| e.col >= len) {
        return Err(Error::IndexOutOfLayout {
            block: block.label.clone(),
            index: e.col,
            len,
        });
    }
    if raw
        .values
        .iter()
        .chain(raw.entries.iter().map(|e| &e.value))
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite {
            block: block.label.clone(),
        });
    }
    Ok(())
}

fn violations(problem: &Problem, raws: &[RawBlock]) -> Vec<(Family, f64)> {
    let mut out: Vec<(Family, f64)> = Vec::new();
    for (block, raw) in problem.blocks.iter().zip(raws) {
        if block.kind == PenaltyKind::Objective {
            continue;
        }
        let worst = raw.values.iter().map(|&c| block.violation(c)).fold(0.0, f64::max);
        match out.iter_mut().find(|(f, _)| *f == block.family) {
            Some((_, v)) => *v = v.max(worst),
            None => out.push((block.family, worst)),
        }
    }
    out.sort_by_key(|(f, _)| *f);
    out
}

pub fn assemble(problem: &Problem, x: &[f64], penalty_scale: f64, execution: Execution) -> Result<Assembly> {
    if x.len() != problem.variable_count {
        return Err(Error::DimensionMismatch {
            context: "assemble",
            expected: problem.variable_count,
            actual: x.len(),
        });
    }
    let raws = evaluate_blocks(problem, x, execution);
    let rows = problem.row_count();
    let mut residual = Vec::with_capacity(rows);
    let mut triplets = Vec::new();
    let mut offset = 0;
    for (block, raw) in problem.blocks.iter().zip(&raws) {
        check_block(block, raw, problem.variable_count)?;
        let mut slope = Vec::with_capacity(raw.values.len());
        for (k, &c) in raw.values.iter().enumerate() {
            let (r, d) = penalize(block.kind, row_weight(block, k, penalty_scale), c);
            residual.push(r);
            slope.push(d);
        }
        for e in &raw.entries {
            triplets.push(Triplet::new(offset + e.row, e.col, slope[e.row] * e.value));
        }
        offset += raw.values.len();
    }
    Ok(Assembly {
        residual,
        jacobian: SparseMatrix::try_new_from_triplets(rows, problem.variable_count, &triplets)
            .expect("triplet indices checked against the layout"),
        violations: violations(problem, &raws),
    })
}

/// `½ ‖r(x)‖²` without building the Jacobian.
pub fn objective(problem: &Problem, x: &[f64], penalty_scale: f64, execution: Execution) -> Result<f64> {
    let raws = evaluate_blocks(problem, x, execution);
    let mut total = 0.0;
    for (block, raw) in problem.blocks.iter().zip(&raws) {
        if raw.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                block: block.label.clone(),
            });
        }
        for (k, &c) in raw.values.iter().enumerate() {
            let (r, _) = penalize(block.kind, row_weight(block, k, penalty_scale), c);
            total += r * r;
        }
    }
    Ok(0.5 * total)
}

/// Raw per-family violations at `x`.
pub fn family_violations(problem: &Problem, x: &[f64]) -> Vec<(Family, f64)> {
    violations(problem, &evaluate_blocks(problem, x, Execution::default()))
}
