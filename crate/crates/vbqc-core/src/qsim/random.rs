//! Seeded random quantum objects for tests, invariant suites, and
//! adversary construction.

use num_complex::Complex64;
use rand::Rng;

use super::state::{CMat, CVec, DensityOperator, PovmElement, StateVector};
use crate::Result;

/// Standard complex Gaussian via Box-Muller.
fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * theta.cos(), r * theta.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-like random pure state.
pub fn random_state_vector<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> StateVector {
    let dim = 1usize << n_qubits;
    let mut v = CVec::from_fn(dim, |_, _| gaussian_complex(rng));
    v.unscale_mut(v.norm());
    StateVector::from_amplitudes(v.iter().copied().collect()).expect("normalized by construction")
}

/// Full-rank random density operator (Ginibre construction).
pub fn random_density_operator<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityOperator {
    let dim = 1usize << n_qubits;
    let g = gaussian_matrix(dim, dim, rng);
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho.unscale_mut(tr.re);
    DensityOperator::from_matrix(rho).expect("Ginibre matrix is a valid density operator")
}

/// Haar-distributed random unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let g = gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random POVM element: random eigenbasis, eigenvalues uniform in [0, 1].
pub fn random_povm_element<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> PovmElement {
    let dim = 1usize << n_qubits;
    let v = random_unitary(dim, rng);
    let d = CMat::from_diagonal(&CVec::from_fn(dim, |_, _| {
        Complex64::new(rng.gen::<f64>(), 0.0)
    }));
    let m = &v * d * v.adjoint();
    PovmElement::from_matrix(m).expect("spectrum in [0,1] by construction")
}

/// A random CPTP map on `n_qubits` with `n_kraus` Kraus operators,
/// obtained by slicing a Haar-random isometry.
pub fn random_kraus_channel<R: Rng + ?Sized>(
    n_qubits: usize,
    n_kraus: usize,
    rng: &mut R,
) -> Vec<CMat> {
    let dim = 1usize << n_qubits;
    let tall = gaussian_matrix(dim * n_kraus, dim, rng);
    let qr = tall.qr();
    let q = qr.q(); // (dim*n_kraus) x dim, orthonormal columns
    (0..n_kraus)
        .map(|k| q.rows(k * dim, dim).into_owned())
        .collect()
}

/// Σ E ρ E† without revalidating the family (used by test oracles that
/// build their channels via [`random_kraus_channel`]).
pub fn apply_kraus(rho: &DensityOperator, kraus: &[CMat]) -> Result<DensityOperator> {
    rho.apply_channel(kraus)
}
