//! Signed Pauli strings: tensor products of I/X/Y/Z with a ±1 sign.
//!
//! These carry the stabilizer generators, the test operators built from
//! them, the one-time-pad operators, and the twirl elements. Products are
//! tracked with the full {1, i, −1, −i} phase group internally; the public
//! string type only admits real signs, which is all the stabilizer-group
//! usage ever produces.

use num_complex::Complex64;

use crate::{Error, Result};

/// One single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// All four letters in the fixed I < X < Y < Z order used for
    /// lexicographic enumeration of Pauli strings.
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Whether two letters anticommute (both non-identity and distinct).
    #[inline]
    pub fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }

    /// Single-letter product `self * other` as (power of i, letter).
    #[inline]
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, b) => (0, b),
            (a, I) => (0, a),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    /// Action on a computational basis bit: returns the phase and the
    /// resulting bit. `Y|0⟩ = i|1⟩`, `Y|1⟩ = −i|0⟩`.
    #[inline]
    pub fn act_on_bit(self, bit: usize) -> (Complex64, usize) {
        match self {
            Pauli::I => (Complex64::new(1.0, 0.0), bit),
            Pauli::X => (Complex64::new(1.0, 0.0), bit ^ 1),
            Pauli::Y => {
                if bit == 0 {
                    (Complex64::new(0.0, 1.0), 1)
                } else {
                    (Complex64::new(0.0, -1.0), 0)
                }
            }
            Pauli::Z => {
                let s = if bit == 0 { 1.0 } else { -1.0 };
                (Complex64::new(s, 0.0), bit)
            }
        }
    }
}

/// Sign of a Pauli string (or of a ±1-valued measurement outcome).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    #[inline]
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A signed tensor product of Pauli letters on a fixed number of qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    sign: Sign,
}

impl PauliString {
    /// The positive identity string, `+I⊗…⊗I`.
    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            letters: vec![Pauli::I; n_qubits],
            sign: Sign::Plus,
        }
    }

    pub fn new(letters: Vec<Pauli>, sign: Sign) -> Self {
        PauliString { letters, sign }
    }

    /// A single non-identity letter at `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, letter: Pauli) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                n_qubits,
            });
        }
        let mut letters = vec![Pauli::I; n_qubits];
        letters[qubit] = letter;
        Ok(PauliString {
            letters,
            sign: Sign::Plus,
        })
    }

    /// Positive string with the given letters on the given qubits.
    pub fn from_support<I>(n_qubits: usize, support: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Pauli)>,
    {
        let mut letters = vec![Pauli::I; n_qubits];
        for (q, p) in support {
            if q >= n_qubits {
                return Err(Error::QubitIndex {
                    index: q,
                    n_qubits,
                });
            }
            letters[q] = p;
        }
        Ok(PauliString {
            letters,
            sign: Sign::Plus,
        })
    }

    /// The `index`-th string in lexicographic I < X < Y < Z order, qubit 0
    /// being the most significant base-4 digit. Index 0 is the identity.
    pub fn from_lex_index(n_qubits: usize, index: usize) -> Result<Self> {
        let count = 1usize << (2 * n_qubits);
        if index >= count {
            return Err(Error::BadParameter(format!(
                "Pauli index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut letters = vec![Pauli::I; n_qubits];
        let mut rem = index;
        for q in (0..n_qubits).rev() {
            letters[q] = Pauli::ALL[rem & 3];
            rem >>= 2;
        }
        Ok(PauliString {
            letters,
            sign: Sign::Plus,
        })
    }

    /// Lexicographic index of the letter pattern (sign ignored).
    pub fn lex_index(&self) -> usize {
        self.letters.iter().fold(0, |acc, &p| {
            (acc << 2)
                | match p {
                    Pauli::I => 0,
                    Pauli::X => 1,
                    Pauli::Y => 2,
                    Pauli::Z => 3,
                }
        })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    #[inline]
    pub fn sign(&self) -> Sign {
        self.sign
    }

    #[inline]
    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn negated(&self) -> Self {
        PauliString {
            letters: self.letters.clone(),
            sign: self.sign.flip(),
        }
    }

    /// Symplectic commutation check: strings commute iff the number of
    /// anticommuting letter pairs is even.
    pub fn commutes_with(&self, other: &PauliString) -> Result<bool> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits(),
                got: other.n_qubits(),
            });
        }
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| a.anticommutes(**b))
            .count();
        Ok(anti % 2 == 0)
    }

    /// Product `self * other`. Fails if the accumulated phase is ±i, which
    /// cannot be represented with a real sign; products within a commuting
    /// stabilizer group always stay real.
    pub fn product(&self, other: &PauliString) -> Result<PauliString> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits(),
                got: other.n_qubits(),
            });
        }
        let mut ipow = 0u8;
        let letters: Vec<Pauli> = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, l) = a.mul(b);
                ipow = (ipow + p) % 4;
                l
            })
            .collect();
        let sign = match ipow {
            0 => self.sign * other.sign,
            2 => (self.sign * other.sign).flip(),
            _ => return Err(Error::ImaginaryPhase),
        };
        Ok(PauliString { letters, sign })
    }

    /// Action on a basis index: the image index and the full phase,
    /// including this string's sign.
    pub fn act_on_index(&self, index: usize) -> (Complex64, usize) {
        let n = self.n_qubits();
        let mut phase = Complex64::new(self.sign.value(), 0.0);
        let mut out = index;
        for (q, &p) in self.letters.iter().enumerate() {
            let shift = n - 1 - q;
            let bit = (index >> shift) & 1;
            let (ph, new_bit) = p.act_on_bit(bit);
            phase *= ph;
            if new_bit != bit {
                out ^= 1 << shift;
            }
        }
        (phase, out)
    }

    /// Dense matrix representation, sign included.
    pub fn matrix(&self) -> nalgebra::DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits();
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let (phase, r) = self.act_on_index(c);
            m[(r, c)] = phase;
        }
        m
    }

    /// P·M computed through the index action, O(dim²) instead of a dense
    /// product.
    pub fn left_apply(&self, m: &nalgebra::DMatrix<Complex64>) -> nalgebra::DMatrix<Complex64> {
        let dim = m.nrows();
        debug_assert_eq!(dim, 1usize << self.n_qubits());
        let mut out = nalgebra::DMatrix::zeros(dim, m.ncols());
        for r in 0..dim {
            let (phase, fr) = self.act_on_index(r);
            for c in 0..m.ncols() {
                out[(fr, c)] += phase * m[(r, c)];
            }
        }
        out
    }

    /// GF(2) symplectic representation: (x bits, z bits) per qubit.
    /// Y contributes to both. Signs are not represented.
    pub fn symplectic_bits(&self) -> (Vec<bool>, Vec<bool>) {
        let x = self
            .letters
            .iter()
            .map(|&p| matches!(p, Pauli::X | Pauli::Y))
            .collect();
        let z = self
            .letters
            .iter()
            .map(|&p| matches!(p, Pauli::Z | Pauli::Y))
            .collect();
        (x, z)
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", if self.sign == Sign::Plus { '+' } else { '-' })?;
        for p in &self.letters {
            write!(f, "{:?}", p)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_letter_products() {
        let n = 1;
        let x = PauliString::single(n, 0, Pauli::X).unwrap();
        let z = PauliString::single(n, 0, Pauli::Z).unwrap();
        // XZ = -iY: imaginary phase is rejected at the string level
        assert!(matches!(x.product(&z), Err(Error::ImaginaryPhase)));
        // XX = +I
        let xx = x.product(&x).unwrap();
        assert!(xx.is_identity());
        assert_eq!(xx.sign(), Sign::Plus);
    }

    #[test]
    fn two_qubit_product_signs() {
        // (X⊗X)(Y⊗Y) = (XY)⊗(XY) = (iZ)⊗(iZ) = -Z⊗Z
        let xx = PauliString::from_support(2, [(0, Pauli::X), (1, Pauli::X)]).unwrap();
        let yy = PauliString::from_support(2, [(0, Pauli::Y), (1, Pauli::Y)]).unwrap();
        let prod = xx.product(&yy).unwrap();
        assert_eq!(prod.letters(), &[Pauli::Z, Pauli::Z]);
        assert_eq!(prod.sign(), Sign::Minus);
        assert!(xx.commutes_with(&yy).unwrap());
    }

    #[test]
    fn commutation_is_symplectic() {
        let xz = PauliString::from_support(2, [(0, Pauli::X), (1, Pauli::Z)]).unwrap();
        let zx = PauliString::from_support(2, [(0, Pauli::Z), (1, Pauli::X)]).unwrap();
        let xi = PauliString::single(2, 0, Pauli::X).unwrap();
        assert!(xz.commutes_with(&zx).unwrap());
        // X⊗I vs X⊗Z commute; Z⊗X vs X⊗I anticommute
        assert!(xi.commutes_with(&xz).unwrap());
        assert!(!xi.commutes_with(&zx).unwrap());
    }

    #[test]
    fn lex_enumeration_round_trips() {
        for idx in 0..64 {
            let p = PauliString::from_lex_index(3, idx).unwrap();
            assert_eq!(p.lex_index(), idx);
        }
        assert!(PauliString::from_lex_index(3, 0).unwrap().is_identity());
    }

    #[test]
    fn index_action_matches_matrix() {
        let p = PauliString::from_support(2, [(0, Pauli::Y), (1, Pauli::Z)]).unwrap();
        let m = p.matrix();
        for c in 0..4 {
            let (phase, r) = p.act_on_index(c);
            assert_eq!(m[(r, c)], phase);
        }
    }
}
