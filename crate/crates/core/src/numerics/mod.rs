//! Dense matrix kernels used by the decomposition and TCCA code.

mod schur;

pub use schur::{schur_decompose, schur_decompose_real, SchurResult};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Singular values below `DEFAULT_RCOND · σ_max` are treated as zero.
pub const DEFAULT_RCOND: f64 = 1e-12;

/// Minimum-norm least-squares solution of `A X ≈ B`.
pub fn least_squares_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    least_squares_solve_with_cutoff(a, b, DEFAULT_RCOND)
}

/// As [`least_squares_solve`] with an explicit relative singular-value cutoff.
pub fn least_squares_solve_with_cutoff(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    rcond: f64,
) -> Result<DMatrix<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::shape(format!(
            "least squares: A has {} rows, B has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let (q, r) = a.shape();
    if q == 0 || r == 0 {
        return Ok(DMatrix::zeros(r, b.ncols()));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sigma_max = svd.singular_values.max();
    if sigma_max.is_nan() || sigma_max <= 0.0 {
        if sigma_max.is_nan() {
            return Err(Error::NumericalFailure {
                routine: "least squares",
                iterations: 0,
            });
        }
        return Ok(DMatrix::zeros(r, b.ncols()));
    }
    let cutoff = rcond * sigma_max;
    // X = V Σ⁺ Uᵀ B
    let mut ut_b = u.transpose() * b;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let inv = if s > cutoff { 1.0 / s } else { 0.0 };
        ut_b.row_mut(i).scale_mut(inv);
    }
    Ok(v_t.transpose() * ut_b)
}

fn symmetry_defect(c: &DMatrix<f64>) -> f64 {
    (c - c.transpose()).norm()
}

/// `V diag(1/√max(d_i, eps)) Vᵀ` for the eigendecomposition `C = V diag(d) Vᵀ`.
pub fn sym_inv_sqrt(c: &DMatrix<f64>, eps: f64) -> Result<DMatrix<f64>> {
    if !c.is_square() {
        return Err(Error::shape(format!(
            "inverse square root of a {}x{} matrix",
            c.nrows(),
            c.ncols()
        )));
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::contract(format!("eigenvalue floor {eps} must be >= 0")));
    }
    let scale = c.norm();
    if symmetry_defect(c) > 1e-10 * scale {
        return Err(Error::contract("matrix is not symmetric"));
    }
    let sym = (c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut inv_sqrt = Vec::with_capacity(eig.eigenvalues.len());
    for &d in eig.eigenvalues.iter() {
        let floored = d.max(eps);
        if floored.is_nan() || floored <= 0.0 {
            return Err(Error::contract(
                "matrix is singular and no eigenvalue floor was given",
            ));
        }
        inv_sqrt.push(1.0 / floored.sqrt());
    }
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, s) in inv_sqrt.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }
    let out = scaled * v.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

/// Symmetric eigendecomposition with eigenvalues in descending order.
/// Ties keep the solver's original order.
pub(crate) fn sorted_sym_eigen(c: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new((c + c.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(c.nrows(), order.len(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    (values, vectors)
}

/// Flips the sign of each column so its largest-magnitude entry is positive.
/// The first entry attaining the maximum decides.
pub(crate) fn fix_column_signs(m: &mut DMatrix<f64>) -> Vec<f64> {
    let mut signs = Vec::with_capacity(m.ncols());
    for mut col in m.column_iter_mut() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for &x in col.iter() {
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
        signs.push(sign);
    }
    signs
}

/// Principal axes of the column-centered covariance of `y` (`N × n`), as an
/// `n × d` matrix ordered by descending variance.
pub fn pca_basis(y: &DMatrix<f64>, d: usize) -> Result<DMatrix<f64>> {
    let (n_samples, n) = y.shape();
    if d == 0 || d > n_samples.min(n) {
        return Err(Error::contract(format!(
            "pca_dim {d} must be between 1 and min(samples, features) = {}",
            n_samples.min(n)
        )));
    }
    let mean = y.row_mean();
    let mut centered = y.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered / n_samples as f64;
    let (_, vectors) = sorted_sym_eigen(&cov);
    let mut basis = vectors.columns(0, d).into_owned();
    fix_column_signs(&mut basis);
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn lstsq_identity() {
        let b = rand_matrix(4, 3, 1);
        let x = least_squares_solve(&DMatrix::identity(4, 4), &b).unwrap();
        assert!((x - b).norm() < 1e-14);
    }

    #[test]
    fn lstsq_orthonormal_columns() {
        let q = rand_matrix(9, 4, 2).qr().q();
        let x0 = rand_matrix(4, 2, 3);
        let b = &q * &x0;
        let x = least_squares_solve(&q, &b).unwrap();
        assert!((x - x0).norm() < 1e-12);
    }

    #[test]
    fn lstsq_zero_matrix_gives_zero() {
        let x = least_squares_solve(&DMatrix::zeros(5, 3), &rand_matrix(5, 2, 4)).unwrap();
        assert_eq!(x, DMatrix::zeros(3, 2));
    }

    #[test]
    fn lstsq_rank_deficient_is_min_norm() {
        // two identical columns: min-norm splits the coefficient evenly
        let col = rand_matrix(6, 1, 5);
        let a = DMatrix::from_fn(6, 2, |i, _| col[(i, 0)]);
        let b = &col * 2.0;
        let x = least_squares_solve(&a, &b).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((x[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inv_sqrt_examples() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!((sym_inv_sqrt(&i, 0.0).unwrap() - &i).norm() < 1e-15);

        let c = DMatrix::from_diagonal(&nalgebra::dvector![4.0, 9.0]);
        let s = sym_inv_sqrt(&c, 0.0).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::dvector![0.5, 1.0 / 3.0]);
        assert!((s - expected).norm() < 1e-15);

        let c = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 1e-20]);
        let s = sym_inv_sqrt(&c, 1e-8).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 1e4]);
        assert!((s - expected).norm() < 1e-10);
    }

    #[test]
    fn inv_sqrt_rejects_asymmetric_and_singular() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(sym_inv_sqrt(&c, 0.0), Err(Error::Contract(_))));
        let z = DMatrix::<f64>::zeros(2, 2);
        assert!(matches!(sym_inv_sqrt(&z, 0.0), Err(Error::Contract(_))));
        assert!(sym_inv_sqrt(&z, 1e-6).is_ok());
    }

    #[test]
    fn pca_full_basis_reconstructs() {
        let y = rand_matrix(30, 5, 6);
        let b = pca_basis(&y, 5).unwrap();
        let mean = y.row_mean();
        let mut centered = y.clone();
        for mut row in centered.row_iter_mut() {
            row -= &mean;
        }
        let back = &centered * &b * b.transpose();
        assert!((back - centered).norm() < 1e-10);
    }

    #[test]
    fn pca_zero_variance_column_ranks_last() {
        let mut y = rand_matrix(20, 4, 7);
        for i in 0..20 {
            y[(i, 2)] = 3.0;
        }
        let b = pca_basis(&y, 3).unwrap();
        for j in 0..3 {
            assert!(b[(2, j)].abs() < 1e-10);
        }
    }

    #[test]
    fn pca_sign_convention_and_range() {
        let y = rand_matrix(15, 6, 8);
        let b = pca_basis(&y, 4).unwrap();
        for col in b.column_iter() {
            let max = col.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(max > 0.0);
        }
        assert!(pca_basis(&y, 0).is_err());
        assert!(pca_basis(&y, 7).is_err());
    }
}
