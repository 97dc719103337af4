//! Electronic-structure side of the workbench: geometries, STO-3G s-shell
//! integrals, closed-shell SCF, orbital rotations and the two-electron FCI
//! reference.

mod basis;
mod boys;
mod fci;
mod geometry;
mod integrals;
mod orbitals;
mod scf;

pub use basis::{BasisSet, Shell};
pub use boys::boys_function;
pub use fci::{fci_two_electron, fci_two_electron_in_sector, FciResult, FciSector, SpinOrbitalDeterminant};
pub use geometry::{Atom, MolecularGeometry};
pub use integrals::{compute_integrals, IntegralSet};
pub use orbitals::{apply_givens_rotations, transform_integrals, GivensRotation, OrbitalCoefficients};
pub use scf::{run_rhf, RhfResult, ScfOptions};
