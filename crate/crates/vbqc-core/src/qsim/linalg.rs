//! Hermitian eigendecomposition and the trace-norm machinery built on it.

use num_complex::Complex64;

use super::state::{CMat, DensityOperator, TOL_EIGEN};
use crate::{Error, Result};

/// Largest absolute entry of M − M†.
pub fn hermitian_deviation(mat: &CMat) -> f64 {
    (mat - mat.adjoint()).camax()
}

/// Tr(A·B) without materializing the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues are returned
/// sorted ascending, with the eigenvector columns permuted to match, so
/// that M = V diag(λ) V† within 1e-8. Non-Hermitian input is rejected.
pub fn hermitian_eigendecomposition(mat: &CMat) -> Result<(Vec<f64>, CMat)> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::BadParameter(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    let dev = hermitian_deviation(mat);
    if dev > TOL_EIGEN {
        return Err(Error::NotHermitian { deviation: dev });
    }
    // nalgebra's solver assumes exact hermiticity; symmetrize the rounding
    // noise away first.
    let sym = (mat + mat.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dim = mat.nrows();
    let mut vectors = CMat::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Σ |λ_i(M)| for Hermitian M.
pub fn trace_norm_hermitian(mat: &CMat) -> Result<f64> {
    let (eigs, _) = hermitian_eigendecomposition(mat)?;
    Ok(eigs.iter().map(|e| e.abs()).sum())
}

/// Largest singular value, for residuals that need an operator norm.
pub fn spectral_norm(mat: &CMat) -> Result<f64> {
    let gram = mat.adjoint() * mat;
    let (eigs, _) = hermitian_eigendecomposition(&gram)?;
    Ok(eigs.last().map(|e| e.max(0.0).sqrt()).unwrap_or(0.0))
}

/// Trace distance (1/2)‖a − b‖₁ between two density operators.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: a.n_qubits(),
            got: b.n_qubits(),
        });
    }
    Ok(0.5 * trace_norm_hermitian(&(a.matrix() - b.matrix()))?)
}

#[cfg(test)]
mod tests {
    use super::super::state::StateVector;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pauli_z_eigenvalues() {
        let z = super::super::gates::pauli_z();
        let (eigs, vecs) = hermitian_eigendecomposition(&z).unwrap();
        assert_abs_diff_eq!(eigs[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], 1.0, epsilon = 1e-12);
        let recon = &vecs
            * CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                2,
                eigs.iter().map(|&e| Complex64::new(e, 0.0)),
            ))
            * vecs.adjoint();
        assert!((recon - z).camax() < 1e-8);
    }

    #[test]
    fn identity_eigenvalues_on_two_qubits() {
        let id = CMat::identity(4, 4);
        let (eigs, _) = hermitian_eigendecomposition(&id).unwrap();
        for e in eigs {
            assert_abs_diff_eq!(e, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pauli_x_eigenvectors_are_plus_minus() {
        let x = super::super::gates::pauli_x();
        let (eigs, vecs) = hermitian_eigendecomposition(&x).unwrap();
        assert_abs_diff_eq!(eigs[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], 1.0, epsilon = 1e-12);
        // the +1 eigenvector is |+⟩ up to phase
        let v = vecs.column(1);
        let overlap = (v[0].conj() + v[1].conj()) * std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(overlap.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(
            hermitian_eigendecomposition(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn trace_distance_basics() {
        let zero = StateVector::zero_state(1).density();
        let one = StateVector::basis_state(1, 1).unwrap().density();
        let plus = StateVector::plus_state(1).density();
        assert_abs_diff_eq!(trace_distance(&zero, &zero).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_distance(&zero, &one).unwrap(), 1.0, epsilon = 1e-12);
        // Frozen from the 2x2 eigenvalue computation: eigenvalues of
        // |0⟩⟨0| − |+⟩⟨+| are ±1/2·√2, so the distance is 1/√2.
        assert_abs_diff_eq!(
            trace_distance(&zero, &plus).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-10
        );
    }
}
