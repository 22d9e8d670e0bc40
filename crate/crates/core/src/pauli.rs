//! Pauli strings and their matrices.
//!
//! Single-qubit matrices follow the register convention `|0> = sigma^z = -1`:
//! `Z = diag(-1, 1)`, `X = [[0, 1], [1, 0]]`, `Y = [[0, i], [-i, 0]]`, which
//! keeps `XY = iZ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{c, OperatorMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(ch: char) -> Option<Self> {
        match ch {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Whether the letter flips the computational bit.
    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Phase picked up acting on the single-qubit basis state `|bit>`.
    fn phase(self, bit: bool) -> C64 {
        match (self, bit) {
            (Pauli::I, _) | (Pauli::X, _) => c(1.0, 0.0),
            (Pauli::Y, false) => c(0.0, -1.0),
            (Pauli::Y, true) => c(0.0, 1.0),
            (Pauli::Z, false) => c(-1.0, 0.0),
            (Pauli::Z, true) => c(1.0, 0.0),
        }
    }

    pub fn matrix(self) -> OperatorMatrix {
        pauli_operator(&PauliString::new(vec![self])).expect("single letter is non-empty")
    }
}

/// A coefficient times a tensor product of Pauli letters, qubit 0 leftmost.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub letters: Vec<Pauli>,
    pub coefficient: C64,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters, coefficient: c(1.0, 0.0) }
    }

    pub fn with_coefficient(letters: Vec<Pauli>, coefficient: C64) -> Self {
        Self { letters, coefficient }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![Pauli::I; n])
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = letter;
        Self::new(letters)
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// The letters alone, e.g. `"XIZ"`.
    pub fn label(&self) -> String {
        self.letters.iter().map(|p| p.letter()).collect()
    }

    /// Two strings commute iff they anticommute on an even number of sites.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = c(1.0, 0.0);
        if self.coefficient == -one {
            write!(f, "-")?;
        } else if self.coefficient != one {
            write!(f, "({})", self.coefficient)?;
        }
        write!(f, "{}", self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional leading `+` or `-` followed by letters from `IXYZ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, body, offset) = match s.chars().next() {
            Some('-') => (-1.0, &s[1..], 1),
            Some('+') => (1.0, &s[1..], 1),
            _ => (1.0, s, 0),
        };
        if body.is_empty() {
            return Err(Error::EmptyPauliString);
        }
        let letters = body
            .chars()
            .enumerate()
            .map(|(i, ch)| {
                Pauli::from_letter(ch.to_ascii_uppercase())
                    .ok_or(Error::InvalidPauliLetter { letter: ch, position: i + offset })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::with_coefficient(letters, c(sign, 0.0)))
    }
}

/// Bit mask of flipped qubits in basis-index order (qubit 0 is the MSB).
fn flip_mask(ps: &PauliString) -> usize {
    let n = ps.n_qubits();
    ps.letters
        .iter()
        .enumerate()
        .filter(|(_, p)| p.flips())
        .fold(0usize, |m, (q, _)| m | 1 << (n - 1 - q))
}

/// Phase with which the string maps `|k>` onto `|k ^ mask>`, coefficient included.
fn column_phase(ps: &PauliString, k: usize) -> C64 {
    let n = ps.n_qubits();
    ps.letters
        .iter()
        .enumerate()
        .fold(ps.coefficient, |acc, (q, p)| acc * p.phase(k >> (n - 1 - q) & 1 == 1))
}

/// Dense matrix of a Pauli string. Each column has exactly one non-zero entry.
pub fn pauli_operator(ps: &PauliString) -> Result<OperatorMatrix> {
    if ps.letters.is_empty() {
        return Err(Error::EmptyPauliString);
    }
    let dim = 1usize << ps.n_qubits();
    let mask = flip_mask(ps);
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for k in 0..dim {
        m[(k ^ mask, k)] = column_phase(ps, k);
    }
    Ok(OperatorMatrix::from_raw(m))
}

/// All `4^n` unit-coefficient strings in lexicographic `I < X < Y < Z` order.
pub fn all_pauli_strings(n: usize) -> Vec<PauliString> {
    (0..1usize << (2 * n))
        .map(|code| {
            let letters = (0..n).map(|q| Pauli::ALL[(code >> (2 * (n - 1 - q))) & 3]).collect();
            PauliString::new(letters)
        })
        .collect()
}

/// Expansion `H = sum_P c_P P` with `c_P = Tr(P H) / 2^n`; terms with
/// `|c_P| <= cutoff` are dropped. Output is in lexicographic string order.
pub fn pauli_decompose(h: &OperatorMatrix, cutoff: f64) -> Vec<PauliString> {
    let n = h.n_qubits();
    let dim = h.dim() as f64;
    all_pauli_strings(n)
        .into_iter()
        .filter_map(|p| {
            let mask = flip_mask(&p);
            // Tr(P H) = sum_k P[k^m, k] H[k, k^m]
            let tr: C64 = (0..h.dim()).map(|k| column_phase(&p, k) * h.get(k, k ^ mask)).sum();
            let coeff = tr / dim;
            (coeff.norm() > cutoff).then(|| PauliString::with_coefficient(p.letters, coeff))
        })
        .collect()
}

/// Inverse of [`pauli_decompose`].
pub fn pauli_reconstruct(terms: &[PauliString], n_qubits: usize) -> Result<OperatorMatrix> {
    let mut out = OperatorMatrix::zeros(1 << n_qubits);
    for t in terms {
        if t.n_qubits() != n_qubits {
            return Err(Error::DimensionMismatch { expected: n_qubits, found: t.n_qubits() });
        }
        out = &out + &pauli_operator(t)?;
    }
    Ok(out)
}
