//! Fixed 2x2 gate matrices.

use num_complex::Complex64;

use super::state::CMat;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn hadamard() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// diag(1, e^{iθ}).
pub fn rz(theta: f64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, theta),
        ],
    )
}

/// Unitary whose columns are the ±1 eigenvectors of cosφ·X + sinφ·Y,
/// i.e. it maps |0⟩ ↦ |+_φ⟩ and |1⟩ ↦ |−_φ⟩. Applying its adjoint turns an
/// equatorial measurement at angle φ into a Z measurement.
pub fn xy_eigenbasis(phi: f64) -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = Complex64::from_polar(h, phi);
    CMat::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), e, -e])
}
