//! Dense statevector simulation, Pauli algebra, shot sampling and a
//! calibration-driven trajectory noise model.

mod calibration;
mod circuit;
mod gate;
mod noise;
mod pauli;
mod sampling;
mod statevector;

pub use calibration::{load_calibration, CouplingCalibration, DeviceCalibration, QubitCalibration};
pub use circuit::{unitary_distance, Circuit};
pub use gate::{Gate, GateClass, Matrix2, Matrix4, Support};
pub use noise::{NoiseChannels, NoiseModel, CNOT_DURATION_US, SINGLE_QUBIT_DURATION_US};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use sampling::{exact_distribution, format_word, run_noisy, sample, OutcomeDistribution, Outcomes, ShotHistogram, TrajectorySampler};
pub use statevector::{Statevector, MAX_QUBITS};
