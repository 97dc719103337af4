use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Circuit, DeviceCalibration, Gate, GateClass, Pauli, Statevector, Support};
use crate::seed::Rng;
use crate::{Error, Result};

/// Nominal gate durations for the relaxation channel.
pub const SINGLE_QUBIT_DURATION_US: f64 = 0.1;
pub const CNOT_DURATION_US: f64 = 0.3;

/// Which noise channels are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseChannels {
    /// Random Pauli insertion after gates.
    pub gate: bool,
    /// Symmetric bit flips at readout.
    pub readout: bool,
    /// T1/T2 damping during gates.
    pub relaxation: bool,
}

impl Default for NoiseChannels {
    fn default() -> Self {
        NoiseChannels { gate: true, readout: true, relaxation: false }
    }
}

/// Phenomenological noise on a logical register. Each logical qubit carries
/// the rates of the physical qubit it is placed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub label: String,
    n_qubits: usize,
    readout: Vec<f64>,
    u2: Vec<f64>,
    u3: Vec<f64>,
    /// `(T1, T2)` in μs per qubit, when known.
    relaxation: Option<Vec<(f64, f64)>>,
    /// Keyed by `(min, max)` logical qubit.
    two_qubit: BTreeMap<(usize, usize), f64>,
    pub channels: NoiseChannels,
}

fn pair_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl NoiseModel {
    /// Every rate zero.
    pub fn ideal(n_qubits: usize) -> Self {
        Self::uniform(n_qubits, 0.0, 0.0, 0.0)
    }

    /// Same rates everywhere, all pairs coupled, no relaxation data.
    pub fn uniform(n_qubits: usize, single: f64, two: f64, readout: f64) -> Self {
        let mut two_qubit = BTreeMap::new();
        for a in 0..n_qubits {
            for b in a + 1..n_qubits {
                two_qubit.insert((a, b), two);
            }
        }
        NoiseModel {
            label: format!("uniform(p1={single}, p2={two}, ro={readout})"),
            n_qubits,
            readout: vec![readout; n_qubits],
            u2: vec![single; n_qubits],
            u3: vec![single; n_qubits],
            relaxation: None,
            two_qubit,
            channels: NoiseChannels::default(),
        }
    }

    /// Places logical qubit `q` on physical qubit `layout[q]`.
    pub fn from_calibration(cal: &DeviceCalibration, layout: &[usize]) -> Result<Self> {
        let mut seen = vec![false; cal.n_qubits()];
        for &p in layout {
            if p >= cal.n_qubits() {
                return Err(Error::Configuration(format!("layout names physical qubit {p}, but {} has {} qubits", cal.label, cal.n_qubits())));
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::Configuration(format!("physical qubit {p} used twice in layout")));
            }
        }
        let qs: Vec<_> = layout.iter().map(|&p| cal.qubits[p]).collect();
        let mut two_qubit = BTreeMap::new();
        for a in 0..layout.len() {
            for b in a + 1..layout.len() {
                if let Some(e) = cal.cx_error(layout[a], layout[b]) {
                    two_qubit.insert((a, b), e);
                }
            }
        }
        Ok(NoiseModel {
            label: format!("{} on {:?}", cal.label, layout),
            n_qubits: layout.len(),
            readout: qs.iter().map(|q| q.readout_error).collect(),
            u2: qs.iter().map(|q| q.u2_error).collect(),
            u3: qs.iter().map(|q| q.u3_error).collect(),
            relaxation: Some(qs.iter().map(|q| (q.t1_us, q.t2_us)).collect()),
            two_qubit,
            channels: NoiseChannels::default(),
        })
    }

    pub fn with_channels(mut self, channels: NoiseChannels) -> Self {
        self.channels = channels;
        self
    }

    /// Overrides every single-qubit gate error.
    pub fn with_single_qubit_error(mut self, p: f64) -> Self {
        self.u2.iter_mut().chain(self.u3.iter_mut()).for_each(|x| *x = p);
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Readout flip probability of qubit `q` with the readout channel on, else 0.
    pub fn readout_error(&self, q: usize) -> f64 {
        if self.channels.readout {
            self.readout[q]
        } else {
            0.0
        }
    }

    /// `m[measured][prepared]`; columns sum to 1.
    pub fn confusion(&self, q: usize) -> [[f64; 2]; 2] {
        let p = self.readout_error(q);
        [[1.0 - p, p], [p, 1.0 - p]]
    }

    /// Whether execution needs per-shot trajectories.
    pub fn is_stochastic(&self) -> bool {
        (self.channels.gate && (self.u2.iter().chain(&self.u3).chain(self.two_qubit.values()).any(|&p| p > 0.0)))
            || (self.channels.relaxation && self.relaxation.is_some())
    }

    /// Probability of a Pauli error after `gate`, independent of channel flags.
    pub fn gate_error(&self, gate: &Gate) -> Result<f64> {
        match (gate.class(), gate.support()) {
            (GateClass::Virtual, _) => Ok(0.0),
            (GateClass::U2, Support::One(q)) => Ok(self.u2[q]),
            (GateClass::U3, Support::One(q)) => Ok(self.u3[q]),
            (_, Support::Two(a, b)) => self
                .two_qubit
                .get(&pair_key(a, b))
                .copied()
                .ok_or_else(|| Error::Configuration(format!("no coupling calibrated between logical qubits {a} and {b} ({})", self.label))),
            _ => unreachable!(),
        }
    }

    /// Checks that every gate of `circuit` has calibration data.
    pub fn check_circuit(&self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::Configuration(format!("circuit has {} qubits, noise model {}", circuit.n_qubits(), self.n_qubits)));
        }
        if self.channels.gate {
            for g in circuit.gates() {
                self.gate_error(g)?;
            }
        }
        Ok(())
    }

    /// Applies `gate` and then samples its error channels. The circuit must
    /// have passed [`NoiseModel::check_circuit`].
    pub(crate) fn apply_noisy(&self, state: &mut Statevector, gate: &Gate, rng: &mut Rng) {
        state.apply_unchecked(gate);
        if self.channels.gate {
            let p = self.gate_error(gate).unwrap_or(0.0);
            if p > 0.0 && rng.random::<f64>() < p {
                match gate.support() {
                    Support::One(q) => state.apply_pauli(q, LETTERS[rng.random_range(1..4)]),
                    Support::Two(a, b) => {
                        let k = rng.random_range(1..16);
                        state.apply_pauli(a, LETTERS[k % 4]);
                        state.apply_pauli(b, LETTERS[k / 4]);
                    }
                }
            }
        }
        if let (true, Some(times)) = (self.channels.relaxation, &self.relaxation) {
            let duration = match gate.class() {
                GateClass::Virtual => return,
                GateClass::TwoQubit => CNOT_DURATION_US,
                _ => SINGLE_QUBIT_DURATION_US,
            };
            let mut damp = |q: usize| relax(state, q, duration, times[q], rng);
            match gate.support() {
                Support::One(q) => damp(q),
                Support::Two(a, b) => {
                    damp(a);
                    damp(b);
                }
            }
        }
    }
}

const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// One quantum-jump step of amplitude damping followed by pure dephasing.
fn relax(state: &mut Statevector, q: usize, duration: f64, (t1, t2): (f64, f64), rng: &mut Rng) {
    let gamma = 1.0 - (-duration / t1).exp();
    let p1 = state.excited_probability(q);
    let jump = rng.random::<f64>() < gamma * p1;
    let bit = 1usize << q;
    let s = (1.0 - gamma).sqrt();
    let amps = state.amplitudes_mut();
    for i in 0..amps.len() {
        if i & bit == 0 {
            if jump {
                amps[i] = amps[i | bit];
                amps[i | bit] = num_complex::Complex64::new(0.0, 0.0);
            } else {
                amps[i | bit] *= s;
            }
        }
    }
    state.renormalize();
    let rate_phi = 1.0 / t2 - 0.5 / t1;
    if rate_phi > 0.0 {
        let pz = 0.5 * (1.0 - (-duration * rate_phi).exp());
        if rng.random::<f64>() < pz {
            state.apply_pauli(q, Pauli::Z);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_is_column_stochastic() {
        let m = NoiseModel::from_calibration(&DeviceCalibration::ibm14(), &[0, 1, 2, 3]).unwrap();
        for q in 0..4 {
            let c = m.confusion(q);
            for col in 0..2 {
                assert!((c[0][col] + c[1][col] - 1.0).abs() < 1e-15);
            }
        }
        assert_eq!(m.readout_error(3), 0.27);
    }

    #[test]
    fn gate_rates_follow_hardware_class() {
        let m = NoiseModel::from_calibration(&DeviceCalibration::ibm5(), &[0, 1, 2, 3]).unwrap();
        assert_eq!(m.gate_error(&Gate::Rz(0, 0.3)).unwrap(), 0.0);
        assert_eq!(m.gate_error(&Gate::H(0)).unwrap(), 2.7e-3);
        assert_eq!(m.gate_error(&Gate::Ry(0, 0.3)).unwrap(), 5.5e-3);
        assert_eq!(m.gate_error(&Gate::cnot(1, 0)).unwrap(), 5.1e-2);
    }

    #[test]
    fn uncalibrated_coupling_is_configuration_error() {
        // ibm-5 qubits 1 and 3 share no coupling
        let m = NoiseModel::from_calibration(&DeviceCalibration::ibm5(), &[0, 1, 2, 3]).unwrap();
        let c = Circuit::from_gates(4, [Gate::cnot(1, 3)]).unwrap();
        assert!(matches!(m.check_circuit(&c), Err(Error::Configuration(_))));
    }

    #[test]
    fn bad_layouts_rejected() {
        let cal = DeviceCalibration::ibm5();
        assert!(NoiseModel::from_calibration(&cal, &[0, 5]).is_err());
        assert!(NoiseModel::from_calibration(&cal, &[1, 1]).is_err());
    }
}
