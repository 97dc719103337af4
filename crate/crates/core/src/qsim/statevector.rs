use num_complex::Complex64 as C64;

use super::{Circuit, Gate, Matrix2, Matrix4, Pauli};
use crate::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Dense `2ⁿ` amplitude vector. Basis index bit `q` is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// `|0…0⟩`
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::IndexOutOfRange { index: n_qubits, limit: MAX_QUBITS + 1 });
        }
        let dim = 1usize << n_qubits;
        if index as usize >= dim {
            return Err(Error::IndexOutOfRange { index: index as usize, limit: dim });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index as usize] = C64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    /// Wraps amplitudes; the vector must be normalized within 1e-10.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::LengthMismatch { expected: 1 << n_qubits, actual: amps.len() });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("state norm² is {norm}")));
        }
        Ok(Statevector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> C64 {
        self.amps[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        self.amps.iter_mut().for_each(|a| *a /= n);
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Probability that qubit `q` reads 1.
    pub fn excited_probability(&self, q: usize) -> f64 {
        self.amps.iter().enumerate().filter(|(i, _)| i >> q & 1 == 1).map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() > self.n_qubits {
            return Err(Error::IndexOutOfRange { index: circuit.n_qubits() - 1, limit: self.n_qubits });
        }
        for g in circuit.gates() {
            self.apply_unchecked(g);
        }
        Ok(())
    }

    /// Applies a gate already known to be valid for this register.
    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        match *gate {
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
            Gate::Custom2 { qubits, ref matrix } => self.apply_matrix2(qubits[0], qubits[1], matrix),
            Gate::Z(q) => self.apply_phase(q, C64::new(-1.0, 0.0)),
            Gate::S(q) => self.apply_phase(q, C64::new(0.0, 1.0)),
            Gate::Sdg(q) => self.apply_phase(q, C64::new(0.0, -1.0)),
            Gate::X(q) => self.apply_x(q),
            ref g => {
                let crate::qsim::Support::One(q) = g.support() else { unreachable!() };
                self.apply_matrix1(q, &g.matrix1().expect("single-qubit gate"));
            }
        }
    }

    pub(crate) fn apply_pauli(&mut self, q: usize, p: Pauli) {
        match p {
            Pauli::I => {}
            Pauli::X => self.apply_x(q),
            Pauli::Y => self.apply_matrix1(q, &Gate::Y(q).matrix1().unwrap()),
            Pauli::Z => self.apply_phase(q, C64::new(-1.0, 0.0)),
        }
    }

    fn apply_x(&mut self, q: usize) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                self.amps.swap(i, i | bit);
            }
        }
    }

    fn apply_phase(&mut self, q: usize, phase: C64) {
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= phase;
            }
        }
    }

    pub(crate) fn apply_matrix1(&mut self, q: usize, m: &Matrix2) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let (a, b) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[j] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let (c, t) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    fn apply_matrix2(&mut self, q0: usize, q1: usize, m: &Matrix4) {
        let (b0, b1) = (1usize << q0, 1usize << q1);
        for i in 0..self.amps.len() {
            if i & (b0 | b1) == 0 {
                let idx = [i, i | b0, i | b1, i | b0 | b1];
                let v = idx.map(|k| self.amps[k]);
                for (r, &k) in idx.iter().enumerate() {
                    self.amps[k] = (0..4).map(|c| m[r][c] * v[c]).sum();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: &Statevector, b: &Statevector) -> bool {
        a.amps.iter().zip(&b.amps).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn x_flips_zero() {
        let mut s = Statevector::zero(1).unwrap();
        s.apply_gate(&Gate::X(0)).unwrap();
        assert_eq!(s, Statevector::basis(1, 1).unwrap());
    }

    #[test]
    fn hadamard_is_involution() {
        let mut s = Statevector::zero(3).unwrap();
        for g in [Gate::Ry(0, 0.4), Gate::H(1), Gate::cnot(1, 2), Gate::Rz(2, 1.1)] {
            s.apply_gate(&g).unwrap();
        }
        let before = s.clone();
        s.apply_gate(&Gate::H(2)).unwrap();
        s.apply_gate(&Gate::H(2)).unwrap();
        assert!(close(&s, &before));
    }

    #[test]
    fn cnot_builds_bell_pair() {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        // qubit 0 in |+⟩, qubit 1 in |0⟩
        let mut s = Statevector::from_amplitudes(2, vec![h, h, z, z]).unwrap();
        s.apply_gate(&Gate::cnot(0, 1)).unwrap();
        let bell = Statevector::from_amplitudes(2, vec![h, z, z, h]).unwrap();
        assert!(close(&s, &bell));
    }

    #[test]
    fn out_of_range_gate_rejected() {
        let mut s = Statevector::zero(2).unwrap();
        assert!(matches!(s.apply_gate(&Gate::H(2)), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn custom2_matches_cnot() {
        let g = Gate::cnot(2, 0);
        let m = g.local_matrix();
        let mut matrix = [[C64::new(0.0, 0.0); 4]; 4];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[(i, j)];
            }
        }
        let custom = Gate::Custom2 { qubits: [2, 0], matrix };
        let mut a = Statevector::zero(3).unwrap();
        for g in [Gate::H(0), Gate::Ry(1, 0.3), Gate::H(2), Gate::S(2)] {
            a.apply_gate(&g).unwrap();
        }
        let mut b = a.clone();
        a.apply_gate(&g).unwrap();
        b.apply_gate(&custom).unwrap();
        assert!(close(&a, &b));
    }
}
