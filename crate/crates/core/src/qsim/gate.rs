use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub type Matrix2 = [[C64; 2]; 2];
/// Two-qubit matrix over the local basis `b0 + 2 b1`, where `b0` is the bit of
/// the first listed qubit.
pub type Matrix4 = [[C64; 4]; 4];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Qubits a gate acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    One(usize),
    Two(usize, usize),
}

impl Support {
    pub fn contains(&self, q: usize) -> bool {
        match *self {
            Support::One(a) => a == q,
            Support::Two(a, b) => a == q || b == q,
        }
    }

    pub fn max(&self) -> usize {
        match *self {
            Support::One(a) => a,
            Support::Two(a, b) => a.max(b),
        }
    }
}

/// How a gate is realized on hardware, which decides the error rate the noise
/// model charges for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateClass {
    /// Frame change (Z rotations), error free.
    Virtual,
    /// One pulse, e.g. `H`.
    U2,
    /// Two pulses: general single-qubit rotation.
    U3,
    /// Two-qubit entangling gate.
    TwoQubit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    /// `exp(−iθX/2)`
    Rx(usize, f64),
    /// `exp(−iθY/2)`
    Ry(usize, f64),
    /// `exp(−iθZ/2)`
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
    Custom1 { qubit: usize, matrix: Matrix2 },
    Custom2 { qubits: [usize; 2], matrix: Matrix4 },
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::Cnot { control, target }
    }

    pub fn support(&self) -> Support {
        match *self {
            Gate::X(q) | Gate::Y(q) | Gate::Z(q) | Gate::H(q) | Gate::S(q) | Gate::Sdg(q) => Support::One(q),
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => Support::One(q),
            Gate::Custom1 { qubit, .. } => Support::One(qubit),
            Gate::Cnot { control, target } => Support::Two(control, target),
            Gate::Custom2 { qubits, .. } => Support::Two(qubits[0], qubits[1]),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::H(_) => "h",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::Rx(..) => "rx",
            Gate::Ry(..) => "ry",
            Gate::Rz(..) => "rz",
            Gate::Cnot { .. } => "cx",
            Gate::Custom1 { .. } => "u1q",
            Gate::Custom2 { .. } => "u2q",
        }
    }

    pub fn class(&self) -> GateClass {
        match self {
            Gate::Z(_) | Gate::S(_) | Gate::Sdg(_) | Gate::Rz(..) => GateClass::Virtual,
            Gate::H(_) => GateClass::U2,
            Gate::X(_) | Gate::Y(_) | Gate::Rx(..) | Gate::Ry(..) | Gate::Custom1 { .. } => GateClass::U3,
            Gate::Cnot { .. } | Gate::Custom2 { .. } => GateClass::TwoQubit,
        }
    }

    /// Single-qubit unitary, `None` for two-qubit gates.
    pub fn matrix1(&self) -> Option<Matrix2> {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Some(match *self {
            Gate::X(_) => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Y(_) => [[ZERO, -I], [I, ZERO]],
            Gate::Z(_) => [[ONE, ZERO], [ZERO, -ONE]],
            Gate::H(_) => [[h, h], [h, -h]],
            Gate::S(_) => [[ONE, ZERO], [ZERO, I]],
            Gate::Sdg(_) => [[ONE, ZERO], [ZERO, -I]],
            Gate::Rx(_, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
            }
            Gate::Ry(_, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
            }
            Gate::Rz(_, t) => [[C64::from_polar(1.0, -t / 2.0), ZERO], [ZERO, C64::from_polar(1.0, t / 2.0)]],
            Gate::Custom1 { matrix, .. } => matrix,
            Gate::Cnot { .. } | Gate::Custom2 { .. } => return None,
        })
    }

    /// Local unitary over the gate's support, ordered as in [`Gate::support`].
    pub fn local_matrix(&self) -> DMatrix<C64> {
        if let Some(m) = self.matrix1() {
            return DMatrix::from_fn(2, 2, |i, j| m[i][j]);
        }
        match self {
            // control is local bit 0, target local bit 1
            Gate::Cnot { .. } => DMatrix::from_fn(4, 4, |i, j| {
                let image = if j & 1 == 1 { j ^ 2 } else { j };
                if i == image {
                    ONE
                } else {
                    ZERO
                }
            }),
            Gate::Custom2 { matrix, .. } => DMatrix::from_fn(4, 4, |i, j| matrix[i][j]),
            _ => unreachable!(),
        }
    }

    pub fn inverse(&self) -> Gate {
        match self.clone() {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::Rx(q, t) => Gate::Rx(q, -t),
            Gate::Ry(q, t) => Gate::Ry(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::Custom1 { qubit, matrix } => {
                let mut inv = [[ZERO; 2]; 2];
                for (i, row) in inv.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = matrix[j][i].conj();
                    }
                }
                Gate::Custom1 { qubit, matrix: inv }
            }
            Gate::Custom2 { qubits, matrix } => {
                let mut inv = [[ZERO; 4]; 4];
                for (i, row) in inv.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = matrix[j][i].conj();
                    }
                }
                Gate::Custom2 { qubits, matrix: inv }
            }
            g => g,
        }
    }

    /// Checks indices against a register of `n_qubits` and that custom
    /// matrices are unitary.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let support = self.support();
        if support.max() >= n_qubits {
            return Err(Error::IndexOutOfRange { index: support.max(), limit: n_qubits });
        }
        if let Support::Two(a, b) = support {
            if a == b {
                return Err(Error::Validation(format!("{} acts twice on qubit {a}", self.name())));
            }
        }
        if matches!(self, Gate::Custom1 { .. } | Gate::Custom2 { .. }) {
            let u = self.local_matrix();
            let dev = (u.adjoint() * &u - DMatrix::identity(u.nrows(), u.ncols())).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if dev > 1e-10 {
                return Err(Error::Validation(format!("{} matrix is not unitary (deviation {dev:.2e})", self.name())));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rx(q, t) | Gate::Ry(q, t) | Gate::Rz(q, t) => write!(f, "{} {q} {t:.12}", self.name()),
            Gate::Cnot { control, target } => write!(f, "cx {control} {target}"),
            Gate::Custom1 { qubit, matrix } => {
                write!(f, "u1q {qubit}")?;
                for z in matrix.iter().flatten() {
                    write!(f, " {:.12}{:+.12}i", z.re, z.im)?;
                }
                Ok(())
            }
            Gate::Custom2 { qubits, matrix } => {
                write!(f, "u2q {} {}", qubits[0], qubits[1])?;
                for z in matrix.iter().flatten() {
                    write!(f, " {:.12}{:+.12}i", z.re, z.im)?;
                }
                Ok(())
            }
            g => {
                let Support::One(q) = g.support() else { unreachable!() };
                write!(f, "{} {q}", g.name())
            }
        }
    }
}
