use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::Statevector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// `self · other = phase · letter`
    pub fn product(self, other: Pauli) -> (C64, Pauli) {
        use Pauli::*;
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (a, b) if a == b => (one, I),
            (X, Y) => (i, Z),
            (Y, Z) => (i, X),
            (Z, X) => (i, Y),
            (Y, X) => (-i, Z),
            (Z, Y) => (-i, X),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// Coefficient times a tensor product of Pauli letters. Words are written
/// with qubit 0 first, so `"YXYY"` is `Y₀X₁Y₂Y₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    letters: Vec<Pauli>,
    coeff: C64,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, coeff: C64) -> Self {
        PauliString { letters, coeff }
    }

    pub fn identity(n_qubits: usize, coeff: C64) -> Self {
        PauliString { letters: vec![Pauli::I; n_qubits], coeff }
    }

    /// String on `n_qubits` with the listed non-identity letters.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)], coeff: C64) -> Result<Self> {
        let mut letters = vec![Pauli::I; n_qubits];
        for &(q, p) in ops {
            if q >= n_qubits {
                return Err(Error::IndexOutOfRange { index: q, limit: n_qubits });
            }
            letters[q] = p;
        }
        Ok(PauliString { letters, coeff })
    }

    pub fn parse(word: &str, coeff: C64) -> Result<Self> {
        let letters = word
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Validation(format!("bad Pauli letter {c:?} in {word:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { letters, coeff })
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn coeff(&self) -> C64 {
        self.coeff
    }

    pub fn with_coeff(mut self, coeff: C64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn word(&self) -> String {
        self.letters.iter().map(|p| p.to_char()).collect()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.letters.len()).filter(|&q| self.letters[q] != Pauli::I).collect()
    }

    /// Bits flipped by the string (X or Y letters).
    pub fn x_mask(&self) -> u64 {
        self.mask(|p| matches!(p, Pauli::X | Pauli::Y))
    }

    /// Bits contributing a sign (Z or Y letters).
    pub fn z_mask(&self) -> u64 {
        self.mask(|p| matches!(p, Pauli::Z | Pauli::Y))
    }

    fn mask(&self, f: impl Fn(Pauli) -> bool) -> u64 {
        self.letters.iter().enumerate().filter(|(_, &p)| f(p)).fold(0, |m, (q, _)| m | 1 << q)
    }

    /// Commutes with the number-parity operator `Z⊗…⊗Z`.
    pub fn conserves_parity(&self) -> bool {
        self.x_mask().count_ones() % 2 == 0
    }

    /// `P|b⟩ = phase |b'⟩`, coefficient included.
    pub fn apply_to_basis(&self, b: u64) -> (C64, u64) {
        let ny = self.letters.iter().filter(|&&p| p == Pauli::Y).count();
        let mut phase = self.coeff * C64::new(0.0, 1.0).powu(ny as u32);
        if (b & self.z_mask()).count_ones() % 2 == 1 {
            phase = -phase;
        }
        (phase, b ^ self.x_mask())
    }

    /// Letters agree or one is `I` at every position.
    pub fn qubitwise_commutes(&self, other: &PauliString) -> bool {
        self.letters.iter().zip(&other.letters).all(|(&a, &b)| a == b || a == Pauli::I || b == Pauli::I)
    }

    /// Full commutation: an even number of positions with distinct non-identity letters.
    pub fn commutes(&self, other: &PauliString) -> bool {
        self.letters.iter().zip(&other.letters).filter(|(&a, &b)| a != b && a != Pauli::I && b != Pauli::I).count() % 2 == 0
    }

    pub fn try_mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::LengthMismatch { expected: self.n_qubits(), actual: other.n_qubits() });
        }
        let mut coeff = self.coeff * other.coeff;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (ph, p) = a.product(b);
                coeff *= ph;
                p
            })
            .collect();
        Ok(PauliString { letters, coeff })
    }

    /// `⟨ψ|P|ψ⟩`, complex in general.
    pub fn expectation(&self, state: &Statevector) -> Result<C64> {
        if state.n_qubits() != self.n_qubits() {
            return Err(Error::LengthMismatch { expected: self.n_qubits(), actual: state.n_qubits() });
        }
        let amps = state.amplitudes();
        Ok((0..amps.len() as u64)
            .map(|b| {
                let (ph, b2) = self.apply_to_basis(b);
                amps[b2 as usize].conj() * ph * amps[b as usize]
            })
            .sum())
    }

    pub fn dense_matrix(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n_qubits();
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim as u64 {
            let (ph, b2) = self.apply_to_basis(b);
            m[(b2 as usize, b as usize)] = ph;
        }
        m
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    /// Panics on width mismatch; see [`PauliString::try_mul`].
    fn mul(self, rhs: &PauliString) -> PauliString {
        self.try_mul(rhs).expect("Pauli strings of equal width")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+.12}{:+.12}i) {}", self.coeff.re, self.coeff.im, self.word())
    }
}

/// Linear combination of Pauli strings on a fixed register width.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        PauliSum { n_qubits, terms: Vec::new() }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        let mut s = PauliSum::new(n_qubits);
        for t in terms {
            s.push(t)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, term: PauliString) -> Result<()> {
        if term.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, actual: term.n_qubits() });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&mut self, c: C64) {
        self.terms.iter_mut().for_each(|t| t.coeff *= c);
    }

    pub fn add(&mut self, other: &PauliSum) -> Result<()> {
        for t in &other.terms {
            self.push(t.clone())?;
        }
        Ok(())
    }

    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut out = PauliSum::new(self.n_qubits);
        for a in &self.terms {
            for b in &other.terms {
                out.push(a.try_mul(b)?)?;
            }
        }
        Ok(out)
    }

    /// Merges repeated words and drops coefficients below `tol` in modulus.
    /// Terms come out ordered by word.
    pub fn simplify(&self, tol: f64) -> PauliSum {
        let mut acc: BTreeMap<Vec<Pauli>, C64> = BTreeMap::new();
        for t in &self.terms {
            *acc.entry(t.letters.clone()).or_default() += t.coeff;
        }
        let terms = acc.into_iter().filter(|(_, c)| c.norm() > tol).map(|(letters, coeff)| PauliString { letters, coeff }).collect();
        PauliSum { n_qubits: self.n_qubits, terms }
    }

    /// Hermitian iff every merged coefficient is real.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.simplify(0.0).terms.iter().all(|t| t.coeff.im.abs() <= tol)
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// Real expectation value; rejects non-Hermitian operators.
    pub fn expectation(&self, state: &Statevector) -> Result<f64> {
        if !self.is_hermitian(1e-12) {
            return Err(Error::Validation("expectation of a non-Hermitian operator".into()));
        }
        let mut total = C64::new(0.0, 0.0);
        for t in &self.terms {
            total += t.expectation(state)?;
        }
        Ok(total.re)
    }

    pub fn dense_matrix(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            for b in 0..dim as u64 {
                let (ph, b2) = t.apply_to_basis(b);
                m[(b2 as usize, b as usize)] += ph;
            }
        }
        m
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Bare word such as `"XIZY"`, coefficient 1.
    fn from_str(s: &str) -> Result<Self> {
        PauliString::parse(s.trim(), C64::new(1.0, 0.0))
    }
}
