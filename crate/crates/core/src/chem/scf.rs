use nalgebra::{DMatrix, DVector};

use super::{IntegralSet, OrbitalCoefficients};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ScfOptions {
    pub max_iterations: usize,
    /// Convergence threshold on `‖F P S − S P F‖_max`.
    pub tolerance: f64,
    /// Density mixing weight kept from the previous iteration once the
    /// residual starts to oscillate.
    pub damping: f64,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-8,
            damping: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RhfResult {
    /// Total energy including nuclear repulsion.
    pub energy: f64,
    pub orbitals: OrbitalCoefficients,
    pub orbital_energies: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
}

pub(crate) fn symmetric_orthogonalizer(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = s.clone().symmetric_eigen();
    if eig.eigenvalues.min() <= 1e-10 {
        return Err(Error::Precondition("overlap matrix is not positive definite".into()));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Eigenpairs of `F` in the orthogonalized basis, back-transformed and sorted
/// by ascending orbital energy.
fn diagonalize_fock(f: &DMatrix<f64>, x: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let fp = x.transpose() * f * x;
    let eig = fp.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let r = f.nrows();
    let mut c = DMatrix::zeros(r, r);
    let mut e = DVector::zeros(r);
    for (col, &k) in order.iter().enumerate() {
        e[col] = eig.eigenvalues[k];
        c.set_column(col, &(x * eig.eigenvectors.column(k)));
    }
    (e, c)
}

fn fock(ints: &IntegralSet, p: &DMatrix<f64>) -> DMatrix<f64> {
    let r = ints.rank();
    let mut f = ints.hcore.clone();
    for m in 0..r {
        for n in 0..r {
            let mut g = 0.0;
            for l in 0..r {
                for s in 0..r {
                    g += p[(l, s)] * (ints.eri(m, n, l, s) - 0.5 * ints.eri(m, l, n, s));
                }
            }
            f[(m, n)] += g;
        }
    }
    f
}

/// Closed-shell SCF for two electrons (one doubly occupied orbital).
///
/// The starting orbitals diagonalize the core Hamiltonian in the
/// symmetrically orthogonalized (S^{-1/2}) atomic basis.
pub fn run_rhf(ints: &IntegralSet, n_electrons: usize, options: ScfOptions) -> Result<RhfResult> {
    if n_electrons != 2 {
        return Err(Error::Precondition(format!("RHF supports 2 electrons, got {n_electrons}")));
    }
    let x = symmetric_orthogonalizer(&ints.overlap)?;
    let (_, c0) = diagonalize_fock(&ints.hcore, &x);
    let occ = c0.column(0).into_owned();
    let mut p = 2.0 * &occ * occ.transpose();

    let mut previous_residual = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut mixing = 0.0;
    for iteration in 1..=options.max_iterations {
        let f = fock(ints, &p);
        let fps = &f * &p * &ints.overlap;
        residual = (&fps - fps.transpose()).amax();
        let (e, c) = diagonalize_fock(&f, &x);
        if residual < options.tolerance {
            let electronic = 0.5 * p.component_mul(&(&ints.hcore + &f)).sum();
            return Ok(RhfResult {
                energy: electronic + ints.enuc,
                orbitals: OrbitalCoefficients(c),
                orbital_energies: e,
                iterations: iteration,
                residual,
            });
        }
        if residual > previous_residual {
            mixing = options.damping;
        }
        previous_residual = residual;
        let occ = c.column(0).into_owned();
        let p_new = 2.0 * &occ * occ.transpose();
        p = (1.0 - mixing) * p_new + mixing * p;
    }
    Err(Error::Convergence {
        iterations: options.max_iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{compute_integrals, BasisSet, MolecularGeometry};

    fn ints(g: &MolecularGeometry) -> IntegralSet {
        compute_integrals(g, &BasisSet::sto3g(g).unwrap()).unwrap()
    }

    #[test]
    fn h2_equilibrium_energy() {
        let g = MolecularGeometry::h2(1.4).unwrap();
        let rhf = run_rhf(&ints(&g), 2, ScfOptions::default()).unwrap();
        assert!((rhf.energy - -1.1167).abs() < 1e-4, "{}", rhf.energy);
        assert!(rhf.residual < 1e-8);
        let i = ints(&g);
        assert!(rhf.orbitals.orthonormality_residual(&i.overlap) < 1e-10);
    }

    #[test]
    fn rejects_other_electron_counts() {
        let g = MolecularGeometry::h2(1.4).unwrap();
        assert!(matches!(run_rhf(&ints(&g), 4, ScfOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn convergence_error_carries_residual() {
        let g = MolecularGeometry::h3_plus(1.7).unwrap();
        let opts = ScfOptions {
            max_iterations: 1,
            tolerance: 1e-30,
            ..ScfOptions::default()
        };
        match run_rhf(&ints(&g), 2, opts) {
            Err(Error::Convergence { iterations: 1, residual }) => assert!(residual.is_finite()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn converges_for_h3_plus_scan() {
        for side in [1.0, 1.65, 2.5, 4.0, 6.0] {
            let g = MolecularGeometry::h3_plus(side).unwrap();
            let rhf = run_rhf(&ints(&g), 2, ScfOptions::default()).unwrap();
            assert!(rhf.residual < 1e-8);
        }
    }
}
