//! Dense pure and mixed quantum states with the gate set the protocol needs.
//!
//! Qubit 0 is the leftmost tensor factor; bit strings map to basis indices
//! big-endian, so qubit `q` of an `n`-qubit state owns bit `n-1-q` of the
//! index. One convention, asserted by tests, used everywhere.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::linalg::{hermitian_deviation, hermitian_eigendecomposition};
use super::pauli::PauliString;
use crate::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Exact-arithmetic assertion tolerance.
pub const TOL_EXACT: f64 = 1e-10;
/// Eigensolver reconstruction tolerance.
pub const TOL_EIGEN: f64 = 1e-8;
/// Measurement probabilities below this are clamped to zero before
/// sampling, so a zero-probability branch is never taken.
pub const PROB_FLOOR: f64 = 1e-12;

#[inline]
pub(crate) fn bit_shift(n_qubits: usize, qubit: usize) -> usize {
    n_qubits - 1 - qubit
}

#[inline]
pub(crate) fn bit_of(index: usize, n_qubits: usize, qubit: usize) -> usize {
    (index >> bit_shift(n_qubits, qubit)) & 1
}

fn check_qubit(n_qubits: usize, qubit: usize) -> Result<()> {
    if qubit >= n_qubits {
        return Err(Error::QubitIndex {
            index: qubit,
            n_qubits,
        });
    }
    Ok(())
}

fn check_unitary_2x2(gate: &CMat) -> Result<()> {
    if gate.nrows() != 2 || gate.ncols() != 2 {
        return Err(Error::BadParameter(format!(
            "single-qubit gate must be 2x2, got {}x{}",
            gate.nrows(),
            gate.ncols()
        )));
    }
    let dev = (gate.adjoint() * gate - CMat::identity(2, 2)).camax();
    if dev > TOL_EXACT {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(())
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::BadPermutation(n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::BadPermutation(n));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Image of a basis index under a qubit permutation: bit `j` of the input
/// becomes bit `perm[j]` of the output.
#[inline]
fn permute_index(index: usize, perm: &[usize], n: usize) -> usize {
    let mut out = 0usize;
    for (j, &dest) in perm.iter().enumerate() {
        let bit = bit_of(index, n, j);
        out |= bit << bit_shift(n, dest);
    }
    out
}

/// Operations shared by pure and mixed states. All unitary operations
/// preserve norm/trace; callers own the state exclusively for the duration
/// of a trial.
pub trait QuantumState: Sized {
    fn n_qubits(&self) -> usize;

    /// Apply a 2x2 unitary to one qubit. Rejects non-unitary matrices.
    fn apply_single_qubit_gate(&mut self, qubit: usize, gate: &CMat) -> Result<()>;

    /// Controlled-Z on a pair of distinct qubits; symmetric in its arguments.
    fn apply_cz(&mut self, a: usize, b: usize) -> Result<()>;

    /// Apply a signed Pauli string (multiplication for vectors,
    /// conjugation for density operators).
    fn apply_pauli_string(&mut self, p: &PauliString) -> Result<()>;

    /// `Tr(P ρ)` (or `⟨ψ|P|ψ⟩`), sign included. Real within 1e-10.
    fn expectation_pauli(&self, p: &PauliString) -> Result<f64>;

    /// Project onto the ±1 eigenspace of a Pauli string and renormalize.
    /// The caller guarantees the branch probability is positive.
    fn project_pauli(&mut self, p: &PauliString, outcome: super::pauli::Sign) -> Result<()>;

    /// Probability that a Z measurement of `qubit` returns bit 1.
    fn prob_qubit_one(&self, qubit: usize) -> Result<f64>;

    /// Collapse `qubit` to the given Z outcome and renormalize.
    fn project_qubit_z(&mut self, qubit: usize, bit: bool) -> Result<()>;

    /// Relabel qubits: qubit `j` moves to position `perm[j]`.
    fn permute_qubits(&mut self, perm: &[usize]) -> Result<()>;
}

/// A normalized pure state on `n` qubits, stored as 2^n amplitudes.
#[derive(Clone, Debug)]
pub struct StateVector {
    n_qubits: usize,
    amps: CVec,
}

impl StateVector {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// |0…0⟩.
    pub fn zero_state(n_qubits: usize) -> Self {
        let mut amps = CVec::zeros(1 << n_qubits);
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// |+⟩^{⊗n}.
    pub fn plus_state(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        StateVector {
            n_qubits,
            amps: CVec::from_element(dim, a),
        }
    }

    /// The computational basis state with the given big-endian index.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::BadParameter(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = CVec::zeros(dim);
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Build from raw amplitudes; the length must be a power of two and the
    /// Euclidean norm must be 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::BadAmplitudeCount { len });
        }
        let n_qubits = len.trailing_zeros() as usize;
        let amps = CVec::from_vec(amps);
        let norm = amps.norm();
        if (norm - 1.0).abs() > TOL_EXACT {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Tensor product `self ⊗ other` (self on the left / more significant).
    pub fn kron(&self, other: &StateVector) -> StateVector {
        StateVector {
            n_qubits: self.n_qubits + other.n_qubits,
            amps: self.amps.kronecker(&other.amps),
        }
    }

    /// |ψ⟩⟨ψ| as a density operator.
    pub fn density(&self) -> DensityOperator {
        let mat = &self.amps * self.amps.adjoint();
        DensityOperator {
            n_qubits: self.n_qubits,
            mat,
        }
    }

    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }
}

impl QuantumState for StateVector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_single_qubit_gate(&mut self, qubit: usize, gate: &CMat) -> Result<()> {
        check_qubit(self.n_qubits, qubit)?;
        check_unitary_2x2(gate)?;
        let stride = 1usize << bit_shift(self.n_qubits, qubit);
        let (g00, g01, g10, g11) = (gate[(0, 0)], gate[(0, 1)], gate[(1, 0)], gate[(1, 1)]);
        let dim = self.amps.len();
        for i in 0..dim {
            if i & stride == 0 {
                let j = i | stride;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = g00 * a + g01 * b;
                self.amps[j] = g10 * a + g11 * b;
            }
        }
        Ok(())
    }

    fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        check_qubit(self.n_qubits, a)?;
        check_qubit(self.n_qubits, b)?;
        if a == b {
            return Err(Error::EqualQubits(a));
        }
        let ma = 1usize << bit_shift(self.n_qubits, a);
        let mb = 1usize << bit_shift(self.n_qubits, b);
        for i in 0..self.amps.len() {
            if i & ma != 0 && i & mb != 0 {
                self.amps[i] = -self.amps[i];
            }
        }
        Ok(())
    }

    fn apply_pauli_string(&mut self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                got: p.n_qubits(),
            });
        }
        let mut out = CVec::zeros(self.amps.len());
        for c in 0..self.amps.len() {
            let (phase, r) = p.act_on_index(c);
            out[r] = phase * self.amps[c];
        }
        self.amps = out;
        Ok(())
    }

    fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                got: p.n_qubits(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..self.amps.len() {
            let (phase, r) = p.act_on_index(c);
            acc += self.amps[r].conj() * phase * self.amps[c];
        }
        debug_assert!(acc.im.abs() < TOL_EXACT);
        Ok(acc.re)
    }

    fn project_pauli(&mut self, p: &PauliString, outcome: super::pauli::Sign) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                got: p.n_qubits(),
            });
        }
        let s = Complex64::new(outcome.value(), 0.0);
        let mut out = self.amps.clone();
        for c in 0..self.amps.len() {
            let (phase, r) = p.act_on_index(c);
            out[r] += s * phase * self.amps[c];
        }
        out.scale_mut(0.5);
        let norm = out.norm();
        if norm < PROB_FLOOR {
            return Err(Error::ZeroPassProbability);
        }
        out.unscale_mut(norm);
        self.amps = out;
        Ok(())
    }

    fn prob_qubit_one(&self, qubit: usize) -> Result<f64> {
        check_qubit(self.n_qubits, qubit)?;
        let mask = 1usize << bit_shift(self.n_qubits, qubit);
        let mut p = 0.0;
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                p += self.amps[i].norm_sqr();
            }
        }
        Ok(p.clamp(0.0, 1.0))
    }

    fn project_qubit_z(&mut self, qubit: usize, bit: bool) -> Result<()> {
        check_qubit(self.n_qubits, qubit)?;
        let mask = 1usize << bit_shift(self.n_qubits, qubit);
        let want = if bit { mask } else { 0 };
        for i in 0..self.amps.len() {
            if i & mask != want {
                self.amps[i] = Complex64::new(0.0, 0.0);
            }
        }
        let norm = self.amps.norm();
        if norm < PROB_FLOOR {
            return Err(Error::ZeroPassProbability);
        }
        self.amps.unscale_mut(norm);
        Ok(())
    }

    fn permute_qubits(&mut self, perm: &[usize]) -> Result<()> {
        check_permutation(perm, self.n_qubits)?;
        let mut out = CVec::zeros(self.amps.len());
        for s in 0..self.amps.len() {
            out[permute_index(s, perm, self.n_qubits)] = self.amps[s];
        }
        self.amps = out;
        Ok(())
    }
}

/// A density operator on `n` qubits: Hermitian, unit trace, positive
/// semidefinite (eigenvalues ≥ −1e-10).
#[derive(Clone, Debug)]
pub struct DensityOperator {
    n_qubits: usize,
    mat: CMat,
}

impl DensityOperator {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Build from a full matrix, validating all three invariants.
    pub fn from_matrix(mat: CMat) -> Result<Self> {
        let dim = mat.nrows();
        if dim == 0 || !dim.is_power_of_two() || mat.ncols() != dim {
            return Err(Error::NotDensity {
                reason: format!("shape {}x{} is not square 2^n", mat.nrows(), mat.ncols()),
            });
        }
        let dev = hermitian_deviation(&mat);
        if dev > TOL_EXACT {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL_EXACT || tr.im.abs() > TOL_EXACT {
            return Err(Error::NotDensity {
                reason: format!("trace {} instead of 1", tr),
            });
        }
        let (eigs, _) = hermitian_eigendecomposition(&mat)?;
        if let Some(min) = eigs.first() {
            if *min < -TOL_EXACT {
                return Err(Error::NotDensity {
                    reason: format!("negative eigenvalue {min:.3e}"),
                });
            }
        }
        Ok(DensityOperator {
            n_qubits: dim.trailing_zeros() as usize,
            mat,
        })
    }

    /// Internal constructor for matrices produced by trace-preserving
    /// operations on already-validated states.
    pub(crate) fn from_matrix_unchecked(n_qubits: usize, mat: CMat) -> Self {
        debug_assert_eq!(mat.nrows(), 1 << n_qubits);
        DensityOperator { n_qubits, mat }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        state.density()
    }

    /// I / 2^n.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mat = CMat::identity(dim, dim) / Complex64::new(dim as f64, 0.0);
        DensityOperator { n_qubits, mat }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Re-run the full invariant check (Hermitian, trace 1, PSD).
    pub fn validate(&self) -> Result<()> {
        Self::from_matrix(self.mat.clone()).map(|_| ())
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            n_qubits: self.n_qubits + other.n_qubits,
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// Reduced state on the (distinct, in-range, nonempty) qubits in `keep`,
    /// in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::BadParameter("empty keep set".into()));
        }
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        for &q in keep {
            check_qubit(n, q)?;
            if seen[q] {
                return Err(Error::BadParameter(format!("duplicate keep index {q}")));
            }
            seen[q] = true;
        }
        let traced: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
        let k = keep.len();
        let kd = 1usize << k;
        let td = 1usize << traced.len();
        let mut out = CMat::zeros(kd, kd);
        // Embed (kept bits, traced bits) back into a full index.
        let embed = |kept_idx: usize, tr_idx: usize| -> usize {
            let mut full = 0usize;
            for (i, &q) in keep.iter().enumerate() {
                full |= bit_of(kept_idx, k, i) << bit_shift(n, q);
            }
            for (i, &q) in traced.iter().enumerate() {
                full |= bit_of(tr_idx, traced.len().max(1), i) << bit_shift(n, q);
            }
            full
        };
        for a in 0..kd {
            for b in 0..kd {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..td {
                    acc += self.mat[(embed(a, t), embed(b, t))];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(DensityOperator {
            n_qubits: k,
            mat: out,
        })
    }

    /// Apply a CPTP map given by its Kraus operators (full-dimension
    /// matrices). The family must satisfy Σ E†E = I within 1e-8.
    pub fn apply_channel(&self, kraus: &[CMat]) -> Result<DensityOperator> {
        let dim = self.mat.nrows();
        let mut sum = CMat::zeros(dim, dim);
        for e in kraus {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::SizeMismatch {
                    expected: dim,
                    got: e.nrows(),
                });
            }
            sum += e.adjoint() * e;
        }
        let dev = (&sum - CMat::identity(dim, dim)).camax();
        if dev > TOL_EIGEN {
            return Err(Error::BadKraus { deviation: dev });
        }
        let mut out = CMat::zeros(dim, dim);
        for e in kraus {
            out += e * &self.mat * e.adjoint();
        }
        Ok(DensityOperator {
            n_qubits: self.n_qubits,
            mat: out,
        })
    }

    fn pauli_left_mul(&self, p: &PauliString) -> CMat {
        let dim = self.mat.nrows();
        let mut out = CMat::zeros(dim, dim);
        for r in 0..dim {
            let (phase, fr) = p.act_on_index(r);
            for c in 0..dim {
                out[(fr, c)] += phase * self.mat[(r, c)];
            }
        }
        out
    }
}

impl QuantumState for DensityOperator {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_single_qubit_gate(&mut self, qubit: usize, gate: &CMat) -> Result<()> {
        check_qubit(self.n_qubits, qubit)?;
        check_unitary_2x2(gate)?;
        let stride = 1usize << bit_shift(self.n_qubits, qubit);
        let (g00, g01, g10, g11) = (gate[(0, 0)], gate[(0, 1)], gate[(1, 0)], gate[(1, 1)]);
        let dim = self.mat.nrows();
        // U ρ: combine row pairs per column.
        for c in 0..dim {
            for i in 0..dim {
                if i & stride == 0 {
                    let j = i | stride;
                    let a = self.mat[(i, c)];
                    let b = self.mat[(j, c)];
                    self.mat[(i, c)] = g00 * a + g01 * b;
                    self.mat[(j, c)] = g10 * a + g11 * b;
                }
            }
        }
        // (Uρ) U†: combine column pairs per row.
        for r in 0..dim {
            for i in 0..dim {
                if i & stride == 0 {
                    let j = i | stride;
                    let a = self.mat[(r, i)];
                    let b = self.mat[(r, j)];
                    self.mat[(r, i)] = a * g00.conj() + b * g01.conj();
                    self.mat[(r, j)] = a * g10.conj() + b * g11.conj();
                }
            }
        }
        Ok(())
    }

    fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        check_qubit(self.n_qubits, a)?;
        check_qubit(self.n_qubits, b)?;
        if a == b {
            return Err(Error::EqualQubits(a));
        }
        let ma = 1usize << bit_shift(self.n_qubits, a);
        let mb = 1usize << bit_shift(self.n_qubits, b);
        let dim = self.mat.nrows();
        let flip = |i: usize| i & ma != 0 && i & mb != 0;
        for r in 0..dim {
            for c in 0..dim {
                if flip(r) != flip(c) {
                    self.mat[(r, c)] = -self.mat[(r, c)];
                }
            }
        }
        Ok(())
    }

    fn apply_pauli_string(&mut self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                got: p.n_qubits(),
            });
        }
        let dim = self.mat.nrows();
        let mut out = CMat::zeros(dim, dim);
        for r in 0..dim {
            let (ph_r, fr) = p.act_on_index(r);
            for c in 0..dim {
                let (ph_c, fc) = p.act_on_index(c);
                out[(fr, fc)] = ph_r * ph_c.conj() * self.mat[(r, c)];
            }
        }
        self.mat = out;
        Ok(())
    }

    fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                got: p.n_qubits(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..self.mat.nrows() {
            let (phase, r) = p.act_on_index(c);
            acc += phase * self.mat[(c, r)];
        }
        debug_assert!(acc.im.abs() < 1e-9, "Tr(Pρ) imaginary part {}", acc.im);
        Ok(acc.re)
    }

    fn project_pauli(&mut self, p: &PauliString, outcome: super::pauli::Sign) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                got: p.n_qubits(),
            });
        }
        // Π ρ Π with Π = (I + sP)/2, computed as (I+sP)/2 · ρ · (I+sP)/2.
        let s = outcome.value();
        let mut half = self.pauli_left_mul(p);
        half.scale_mut(s);
        half += &self.mat;
        half.scale_mut(0.5);
        // right multiply: (A P)[r, c] = A[r, f(c)] * phase(c)
        let dim = self.mat.nrows();
        let mut out = CMat::zeros(dim, dim);
        for c in 0..dim {
            let (phase, fc) = p.act_on_index(c);
            for r in 0..dim {
                out[(r, c)] = half[(r, fc)] * phase;
            }
        }
        out.scale_mut(s);
        out += &half;
        out.scale_mut(0.5);
        let tr = out.trace().re;
        if tr < PROB_FLOOR {
            return Err(Error::ZeroPassProbability);
        }
        out.unscale_mut(tr);
        self.mat = out;
        Ok(())
    }

    fn prob_qubit_one(&self, qubit: usize) -> Result<f64> {
        check_qubit(self.n_qubits, qubit)?;
        let mask = 1usize << bit_shift(self.n_qubits, qubit);
        let mut p = 0.0;
        for i in 0..self.mat.nrows() {
            if i & mask != 0 {
                p += self.mat[(i, i)].re;
            }
        }
        Ok(p.clamp(0.0, 1.0))
    }

    fn project_qubit_z(&mut self, qubit: usize, bit: bool) -> Result<()> {
        check_qubit(self.n_qubits, qubit)?;
        let mask = 1usize << bit_shift(self.n_qubits, qubit);
        let want = if bit { mask } else { 0 };
        let dim = self.mat.nrows();
        for r in 0..dim {
            for c in 0..dim {
                if r & mask != want || c & mask != want {
                    self.mat[(r, c)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        let tr = self.mat.trace().re;
        if tr < PROB_FLOOR {
            return Err(Error::ZeroPassProbability);
        }
        self.mat.unscale_mut(tr);
        Ok(())
    }

    fn permute_qubits(&mut self, perm: &[usize]) -> Result<()> {
        check_permutation(perm, self.n_qubits)?;
        let dim = self.mat.nrows();
        let mut out = CMat::zeros(dim, dim);
        let images: Vec<usize> = (0..dim)
            .map(|i| permute_index(i, perm, self.n_qubits))
            .collect();
        for r in 0..dim {
            for c in 0..dim {
                out[(images[r], images[c])] = self.mat[(r, c)];
            }
        }
        self.mat = out;
        Ok(())
    }
}

/// A POVM element: Hermitian with spectrum in [0, 1] (within 1e-10).
#[derive(Clone, Debug)]
pub struct PovmElement {
    n_qubits: usize,
    mat: CMat,
}

impl PovmElement {
    pub fn from_matrix(mat: CMat) -> Result<Self> {
        let dim = mat.nrows();
        if dim == 0 || !dim.is_power_of_two() || mat.ncols() != dim {
            return Err(Error::NotPovm {
                reason: format!("shape {}x{} is not square 2^n", mat.nrows(), mat.ncols()),
            });
        }
        let dev = hermitian_deviation(&mat);
        if dev > TOL_EXACT {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let (eigs, _) = hermitian_eigendecomposition(&mat)?;
        for &e in &eigs {
            if !(-TOL_EXACT..=1.0 + TOL_EXACT).contains(&e) {
                return Err(Error::NotPovm {
                    reason: format!("eigenvalue {e} outside [0, 1]"),
                });
            }
        }
        Ok(PovmElement {
            n_qubits: dim.trailing_zeros() as usize,
            mat,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        PovmElement {
            n_qubits,
            mat: CMat::identity(dim, dim),
        }
    }

    /// Constructor for operators that are POVM elements by construction
    /// (products of commuting stabilizer projectors); skips the
    /// eigendecomposition, which dominates at 9+ qubits.
    pub(crate) fn from_matrix_unchecked(n_qubits: usize, mat: CMat) -> Self {
        debug_assert_eq!(mat.nrows(), 1 << n_qubits);
        PovmElement { n_qubits, mat }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Tr(M ρ).
    pub fn expectation(&self, rho: &DensityOperator) -> Result<f64> {
        if rho.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                got: rho.n_qubits(),
            });
        }
        Ok(super::linalg::trace_product(&self.mat, rho.matrix()).re)
    }

    /// ⟨ψ|M|ψ⟩ for a pure state.
    pub fn expectation_pure(&self, psi: &StateVector) -> Result<f64> {
        if psi.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                got: psi.n_qubits(),
            });
        }
        Ok(psi.amplitudes().dotc(&(&self.mat * psi.amplitudes())).re)
    }
}

#[cfg(test)]
mod tests {
    use super::super::gates;
    use super::super::pauli::{Pauli, Sign};
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hadamard_takes_zero_to_plus() {
        let mut psi = StateVector::zero_state(1);
        psi.apply_single_qubit_gate(0, &gates::hadamard()).unwrap();
        let plus = StateVector::plus_state(1);
        let overlap = psi.inner_product(&plus).unwrap();
        assert_abs_diff_eq!(overlap.re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn x_twice_is_identity() {
        let mut psi = StateVector::plus_state(2);
        psi.apply_single_qubit_gate(1, &gates::pauli_x()).unwrap();
        psi.apply_single_qubit_gate(1, &gates::pauli_x()).unwrap();
        let plus = StateVector::plus_state(2);
        assert!((psi.amplitudes() - plus.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn z_takes_plus_to_minus() {
        let mut psi = StateVector::plus_state(1);
        psi.apply_single_qubit_gate(0, &gates::pauli_z()).unwrap();
        // |−⟩ has ⟨X⟩ = −1
        let x = PauliString::single(1, 0, Pauli::X).unwrap();
        assert_abs_diff_eq!(psi.expectation_pauli(&x).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn non_unitary_gate_rejected() {
        let mut psi = StateVector::zero_state(1);
        let bad = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(
            psi.apply_single_qubit_gate(0, &bad),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn cz_definition_and_involution() {
        let mut psi = StateVector::basis_state(2, 0b11).unwrap();
        psi.apply_cz(0, 1).unwrap();
        assert_abs_diff_eq!(psi.amplitudes()[3].re, -1.0, epsilon = 1e-15);
        psi.apply_cz(1, 0).unwrap(); // symmetric in (a, b)
        assert_abs_diff_eq!(psi.amplitudes()[3].re, 1.0, epsilon = 1e-15);
        assert!(matches!(psi.apply_cz(1, 1), Err(Error::EqualQubits(1))));
    }

    #[test]
    fn pauli_application_on_basis_states() {
        // X on qubit 0 of |00⟩ -> |10⟩
        let mut psi = StateVector::zero_state(2);
        let x0 = PauliString::single(2, 0, Pauli::X).unwrap();
        psi.apply_pauli_string(&x0).unwrap();
        assert_abs_diff_eq!(psi.amplitudes()[0b10].re, 1.0, epsilon = 1e-15);
        // (X⊗Z) twice -> identity
        let xz = PauliString::from_support(2, [(0, Pauli::X), (1, Pauli::Z)]).unwrap();
        let before = psi.clone();
        psi.apply_pauli_string(&xz).unwrap();
        psi.apply_pauli_string(&xz).unwrap();
        assert!((psi.amplitudes() - before.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn identity_string_leaves_state_unchanged() {
        let mut rho = DensityOperator::maximally_mixed(2);
        let before = rho.matrix().clone();
        rho.apply_pauli_string(&PauliString::identity(2)).unwrap();
        assert!((rho.matrix() - before).camax() < 1e-15);
    }

    #[test]
    fn expectations_on_plus_state() {
        let rho = StateVector::plus_state(1).density();
        let x = PauliString::single(1, 0, Pauli::X).unwrap();
        let z = PauliString::single(1, 0, Pauli::Z).unwrap();
        assert_abs_diff_eq!(rho.expectation_pauli(&x).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.expectation_pauli(&z).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state_is_mixed() {
        let amps = vec![
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ];
        let bell = StateVector::from_amplitudes(amps).unwrap().density();
        let red = bell.partial_trace(&[0]).unwrap();
        let mixed = DensityOperator::maximally_mixed(1);
        assert!((red.matrix() - mixed.matrix()).camax() < 1e-12);
    }

    #[test]
    fn partial_trace_keep_all_is_identity_map() {
        let rho = StateVector::plus_state(2).density();
        let same = rho.partial_trace(&[0, 1]).unwrap();
        assert!((same.matrix() - rho.matrix()).camax() < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let zero = StateVector::zero_state(1);
        let plus = StateVector::plus_state(1);
        let prod = zero.kron(&plus).density();
        let red = prod.partial_trace(&[0]).unwrap();
        assert_abs_diff_eq!(red.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert!(prod.partial_trace(&[2]).is_err());
        assert!(prod.partial_trace(&[0, 0]).is_err());
    }

    #[test]
    fn density_validation_rejects_garbage() {
        let bad = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.9, 0.0),
                Complex64::new(0.3, 0.1),
                Complex64::new(0.3, 0.1),
                Complex64::new(0.1, 0.0),
            ],
        );
        assert!(DensityOperator::from_matrix(bad).is_err());
        // PSD violation with correct trace and hermiticity
        let neg = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.2, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-0.2, 0.0),
            ],
        );
        assert!(matches!(
            DensityOperator::from_matrix(neg),
            Err(Error::NotDensity { .. })
        ));
    }

    #[test]
    fn project_pauli_matches_manual_projection() {
        let mut rho = StateVector::plus_state(1).density();
        let z = PauliString::single(1, 0, Pauli::Z).unwrap();
        rho.project_pauli(&z, Sign::Plus).unwrap();
        // Post state should be |0⟩⟨0|
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn out_of_range_and_size_mismatches_are_rejected() {
        let mut psi = StateVector::zero_state(2);
        assert!(matches!(
            psi.apply_single_qubit_gate(5, &gates::hadamard()),
            Err(Error::QubitIndex { .. })
        ));
        let p3 = PauliString::identity(3);
        assert!(matches!(
            psi.apply_pauli_string(&p3),
            Err(Error::SizeMismatch { .. })
        ));
        assert!(matches!(
            psi.expectation_pauli(&p3),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn permutation_moves_qubits() {
        // |01⟩ with perm [1,0] -> |10⟩
        let mut psi = StateVector::basis_state(2, 0b01).unwrap();
        psi.permute_qubits(&[1, 0]).unwrap();
        assert_abs_diff_eq!(psi.amplitudes()[0b10].re, 1.0, epsilon = 1e-15);
        assert!(psi.permute_qubits(&[0, 0]).is_err());
    }
}
