//! Damped normal equations on the free columns.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::matmul::sparse_sparse_matmul;
use faer::sparse::{SymbolicSparseColMat, Triplet};
use faer::{Col, Par, Side};

use crate::error::{Error, Result};

use super::assemble::SparseMatrix;

/// Solution of one damped step and the damping that made the system
/// factorizable.
#[derive(Debug, Clone)]
pub struct Step {
    pub delta: Vec<f64>,
    pub damping: f64,
}

/// Solves `(JᵀJ + λI) δ = −Jᵀr` over the columns with `frozen[j] == false`
/// by a fill-reducing sparse Cholesky factorization; frozen entries of `δ`
/// are zero. A failed factorization multiplies `λ` by `increase` (starting
/// from at least `floor`) up to `retries` times.
pub fn gauss_newton_step(
    jacobian: &SparseMatrix,
    residual: &[f64],
    damping: f64,
    frozen: &[bool],
    retries: usize,
    increase: f64,
    floor: f64,
) -> Result<Step> {
    let n = jacobian.ncols();
    let free: Vec<usize> = (0..n).filter(|&j| !frozen.get(j).copied().unwrap_or(false)).collect();
    let mut delta = vec![0.0; n];
    if free.is_empty() {
        return Ok(Step { delta, damping });
    }

    let (ptr, rows, vals) = (
        jacobian.symbolic().col_ptr(),
        jacobian.symbolic().row_idx(),
        jacobian.val(),
    );
    let mut col_ptr = Vec::with_capacity(free.len() + 1);
    let mut row_idx = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(vals.len());
    let mut rhs = Col::<f64>::zeros(free.len());
    col_ptr.push(0);
    for (m, &j) in free.iter().enumerate() {
        let range = ptr[j]..ptr[j + 1];
        rhs[m] = -range.clone().map(|k| vals[k] * residual[rows[k]]).sum::<f64>();
        row_idx.extend_from_slice(&rows[range.clone()]);
        values.extend_from_slice(&vals[range]);
        col_ptr.push(row_idx.len());
    }
    let failed = |lambda| Error::Factorization {
        attempts: retries,
        damping: lambda,
    };
    let pattern = SymbolicSparseColMat::new_checked(jacobian.nrows(), free.len(), col_ptr, None, row_idx);
    let reduced = SparseMatrix::new(pattern, values);
    let transposed = reduced.transpose().to_col_major().map_err(|_| failed(damping))?;
    let normal =
        sparse_sparse_matmul(transposed.as_ref(), reduced.as_ref(), 1.0, Par::Seq).map_err(|_| failed(damping))?;

    let (nptr, nrows, nvals) = (normal.symbolic().col_ptr(), normal.symbolic().row_idx(), normal.val());
    let mut lower = Vec::with_capacity(nvals.len() / 2 + free.len());
    for j in 0..free.len() {
        for k in nptr[j]..nptr[j + 1] {
            if nrows[k] >= j {
                lower.push(Triplet::new(nrows[k], j, nvals[k]));
            }
        }
    }
    let diagonal = lower.len();
    lower.extend((0..free.len()).map(|k| Triplet::new(k, k, 0.0)));

    let mut lambda = damping;
    for attempt in 0..=retries {
        for t in &mut lower[diagonal..] {
            t.val = lambda;
        }
        let system = SparseMatrix::try_new_from_triplets(free.len(), free.len(), &lower).map_err(|_| failed(lambda))?;
        if let Ok(llt) = system.sp_cholesky(Side::Lower) {
            let sol = llt.solve(&rhs);
            if sol.iter().all(|v| v.is_finite()) {
                for (k, &j) in free.iter().enumerate() {
                    delta[j] = sol[k];
                }
                return Ok(Step { delta, damping: lambda });
            }
        }
        if attempt < retries {
            lambda = lambda.max(floor) * increase;
        }
    }
    Err(failed(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_to_csc(m: &DMatrix<f64>) -> SparseMatrix {
        let mut t = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != 0.0 {
                    t.push(Triplet::new(i, j, m[(i, j)]));
                }
            }
        }
        SparseMatrix::try_new_from_triplets(m.nrows(), m.ncols(), &t).unwrap()
    }

    #[test]
    fn identity_residual_converges_in_one_step() {
        let x = [0.3, -1.2, 2.5];
        let j = dense_to_csc(&DMatrix::identity(3, 3));
        let step = gauss_newton_step(&j, &x, 0.0, &[false; 3], 10, 10.0, 1e-10).unwrap();
        for k in 0..3 {
            assert!((step.delta[k] + x[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn heavy_damping_follows_the_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(8, 5, |_, _| rng.random_range(-1.0..1.0));
        let r: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let step = gauss_newton_step(&dense_to_csc(&a), &r, 1e12, &[false; 5], 10, 10.0, 1e-10).unwrap();
        let g = a.transpose() * nalgebra::DVector::from_vec(r);
        let d = nalgebra::DVector::from_vec(step.delta);
        let cos = -d.dot(&g) / (d.norm() * g.norm());
        assert!(cos.clamp(-1.0, 1.0).acos() < 1f64.to_radians());
    }

    #[test]
    fn matches_dense_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(12, 6, |_, _| rng.random_range(-1.0..1.0));
        let r: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lambda = 0.1;
        let step = gauss_newton_step(&dense_to_csc(&a), &r, lambda, &[false; 6], 10, 10.0, 1e-10).unwrap();
        let lhs = a.transpose() * &a + DMatrix::identity(6, 6) * lambda;
        let rhs = -(a.transpose() * nalgebra::DVector::from_vec(r));
        let oracle = lhs.cholesky().unwrap().solve(&rhs);
        for k in 0..6 {
            assert!((step.delta[k] - oracle[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn frozen_columns_get_zero_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..1.0));
        let r = vec![1.0; 6];
        let frozen = [false, true, false, true];
        let step = gauss_newton_step(&dense_to_csc(&a), &r, 1e-3, &frozen, 10, 10.0, 1e-10).unwrap();
        assert_eq!(step.delta[1], 0.0);
        assert_eq!(step.delta[3], 0.0);
        assert!(step.delta[0] != 0.0);
    }

    #[test]
    fn singular_system_is_rescued_by_damping() {
        // A zero column makes JᵀJ singular; λ = 0 fails, the retry succeeds.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        let step = gauss_newton_step(&dense_to_csc(&a), &[1.0, 1.0], 0.0, &[false; 2], 10, 10.0, 1e-10).unwrap();
        assert!(step.damping > 0.0);
        assert_eq!(step.delta[1], 0.0);
    }
}
