use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::MolecularGeometry;
use crate::{Error, Result};

/// STO-3G hydrogen 1s (ζ = 1.24): exponents and contraction coefficients over
/// normalized primitives.
const STO3G_H_EXPONENTS: [f64; 3] = [3.425_250_91, 0.623_913_73, 0.168_855_40];
const STO3G_H_COEFFS: [f64; 3] = [0.154_328_97, 0.535_328_14, 0.444_634_54];

/// One contracted s shell. `primitives` holds `(exponent, coefficient)` with
/// the coefficient already including the primitive normalization and the
/// contraction renormalization, so the function is `Σ c_i exp(−α_i |r−A|²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub center: usize,
    pub primitives: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSet {
    pub shells: Vec<Shell>,
}

impl BasisSet {
    /// One STO-3G 1s shell per hydrogen.
    pub fn sto3g(geometry: &MolecularGeometry) -> Result<Self> {
        let mut shells = Vec::with_capacity(geometry.atoms().len());
        for (center, atom) in geometry.atoms().iter().enumerate() {
            if atom.element != "H" {
                return Err(Error::Geometry(format!(
                    "STO-3G is only tabulated for hydrogen, got {}",
                    atom.element
                )));
            }
            let mut primitives: Vec<(f64, f64)> = STO3G_H_EXPONENTS
                .iter()
                .zip(STO3G_H_COEFFS)
                .map(|(&a, d)| (a, d * (2.0 * a / PI).powf(0.75)))
                .collect();
            let norm = self_overlap(&primitives).sqrt();
            for p in &mut primitives {
                p.1 /= norm;
            }
            shells.push(Shell { center, primitives });
        }
        Ok(Self { shells })
    }

    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }
}

fn self_overlap(prims: &[(f64, f64)]) -> f64 {
    let mut s = 0.0;
    for &(a, ca) in prims {
        for &(b, cb) in prims {
            s += ca * cb * (PI / (a + b)).powf(1.5);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contracted_functions_are_normalized() {
        let g = MolecularGeometry::h3_plus(1.7).unwrap();
        let basis = BasisSet::sto3g(&g).unwrap();
        assert_eq!(basis.len(), 3);
        for shell in &basis.shells {
            assert!((self_overlap(&shell.primitives) - 1.0).abs() < 1e-10);
        }
    }
}
