use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{Gate, Statevector, Support};
use crate::{Error, Result};

/// Ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new() }
    }

    pub fn from_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::IndexOutOfRange { index: other.n_qubits - 1, limit: self.n_qubits });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
    }

    /// Number of layers when every gate is scheduled as early as possible.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.n_qubits];
        for g in &self.gates {
            match g.support() {
                Support::One(q) => level[q] += 1,
                Support::Two(a, b) => {
                    let l = level[a].max(level[b]) + 1;
                    level[a] = l;
                    level[b] = l;
                }
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit { n_qubits: self.n_qubits, gates: self.gates.iter().rev().map(Gate::inverse).collect() }
    }

    /// Relabels qubits, `mapping[q]` being the new index of qubit `q`.
    pub fn remap(&self, mapping: &[usize], n_qubits: usize) -> Result<Circuit> {
        if mapping.len() < self.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, actual: mapping.len() });
        }
        let m = |q: usize| mapping[q];
        let gates = self.gates.iter().map(|g| match g.clone() {
            Gate::X(q) => Gate::X(m(q)),
            Gate::Y(q) => Gate::Y(m(q)),
            Gate::Z(q) => Gate::Z(m(q)),
            Gate::H(q) => Gate::H(m(q)),
            Gate::S(q) => Gate::S(m(q)),
            Gate::Sdg(q) => Gate::Sdg(m(q)),
            Gate::Rx(q, t) => Gate::Rx(m(q), t),
            Gate::Ry(q, t) => Gate::Ry(m(q), t),
            Gate::Rz(q, t) => Gate::Rz(m(q), t),
            Gate::Cnot { control, target } => Gate::cnot(m(control), m(target)),
            Gate::Custom1 { qubit, matrix } => Gate::Custom1 { qubit: m(qubit), matrix },
            Gate::Custom2 { qubits, matrix } => Gate::Custom2 { qubits: qubits.map(m), matrix },
        });
        Circuit::from_gates(n_qubits, gates)
    }

    /// Dense unitary, column `j` being the image of basis state `j`.
    pub fn unitary(&self) -> Result<DMatrix<C64>> {
        let dim = 1usize << self.n_qubits;
        let mut u = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut s = Statevector::basis(self.n_qubits, j as u64)?;
            s.apply_circuit(self)?;
            for (i, a) in s.amplitudes().iter().enumerate() {
                u[(i, j)] = *a;
            }
        }
        Ok(u)
    }

    /// Line-based listing: a `qubits n` header, then one gate per line.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Operator-norm distance between two unitaries after aligning the global
/// phase to `arg tr(B†A)`. An upper bound on the phase-minimized distance.
pub fn unitary_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let tr: C64 = (b.adjoint() * a).trace();
    let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { C64::new(1.0, 0.0) };
    let diff = a - b * phase;
    diff.svd(false, false).singular_values.max()
}
