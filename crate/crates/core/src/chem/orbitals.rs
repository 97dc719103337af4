use nalgebra::DMatrix;

use super::IntegralSet;
use crate::{Error, Result};

/// Molecular-orbital coefficients; column `p` is orbital `p` expanded in the
/// atomic basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalCoefficients(pub DMatrix<f64>);

impl OrbitalCoefficients {
    pub fn identity(rank: usize) -> Self {
        Self(DMatrix::identity(rank, rank))
    }

    pub fn rank(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `‖Cᵀ S C − 1‖_max`.
    pub fn orthonormality_residual(&self, overlap: &DMatrix<f64>) -> f64 {
        let m = self.0.transpose() * overlap * &self.0;
        let r = m.nrows();
        (m - DMatrix::<f64>::identity(r, r)).amax()
    }
}

/// A plane rotation of orbitals `p` and `q` by `theta` radians:
/// `φ_p ← cos θ φ_p + sin θ φ_q`, `φ_q ← −sin θ φ_p + cos θ φ_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensRotation {
    pub p: usize,
    pub q: usize,
    pub theta: f64,
}

impl GivensRotation {
    pub fn new(p: usize, q: usize, theta: f64) -> Self {
        Self { p, q, theta }
    }
}

/// Right-multiplies `C` by the product of plane rotations, applied in list
/// order.
pub fn apply_givens_rotations(c: &OrbitalCoefficients, rotations: &[GivensRotation]) -> Result<OrbitalCoefficients> {
    let r = c.rank();
    let mut m = c.0.clone();
    for rot in rotations {
        for idx in [rot.p, rot.q] {
            if idx >= r {
                return Err(Error::IndexOutOfRange { index: idx, limit: r });
            }
        }
        if rot.p == rot.q {
            return Err(Error::Precondition(format!("Givens rotation needs p != q, got {}", rot.p)));
        }
        let (s, co) = rot.theta.sin_cos();
        for row in 0..m.nrows() {
            let a = m[(row, rot.p)];
            let b = m[(row, rot.q)];
            m[(row, rot.p)] = co * a + s * b;
            m[(row, rot.q)] = -s * a + co * b;
        }
    }
    Ok(OrbitalCoefficients(m))
}

/// Re-expresses `hcore` and `eri` in the orbital basis `C`. The overlap
/// becomes the identity and `enuc` is unchanged.
pub fn transform_integrals(ints: &IntegralSet, c: &OrbitalCoefficients) -> Result<IntegralSet> {
    let r = ints.rank();
    if c.0.shape() != (r, r) {
        return Err(Error::LengthMismatch {
            expected: r,
            actual: c.rank(),
        });
    }
    let residual = c.orthonormality_residual(&ints.overlap);
    if residual > 1e-8 {
        return Err(Error::Precondition(format!(
            "orbitals are not orthonormal under the overlap (residual {residual:.3e})"
        )));
    }
    let cm = &c.0;
    let hcore = cm.transpose() * &ints.hcore * cm;

    // Four quarter transformations, each O(r⁵).
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * r + j) * r + k) * r + l;
    let mut a = ints.eri_raw().to_vec();
    let mut b = vec![0.0; a.len()];
    for slot in 0..4 {
        b.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        let v = a[idx(i, j, k, l)];
                        if v == 0.0 {
                            continue;
                        }
                        for p in 0..r {
                            match slot {
                                0 => b[idx(p, j, k, l)] += cm[(i, p)] * v,
                                1 => b[idx(i, p, k, l)] += cm[(j, p)] * v,
                                2 => b[idx(i, j, p, l)] += cm[(k, p)] * v,
                                _ => b[idx(i, j, k, p)] += cm[(l, p)] * v,
                            }
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    IntegralSet::new(DMatrix::identity(r, r), hcore, a, ints.enuc)
}
