use nalgebra::{DMatrix, DVector};

use super::{transform_integrals, IntegralSet, OrbitalCoefficients};
use crate::Result;

/// Determinant `a†_P a†_Q |0⟩` over spin-orbitals `P < Q`, where spin-orbital
/// `2p + σ` is spatial orbital `p` with spin `σ` (0 = α, 1 = β).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinOrbitalDeterminant(pub usize, pub usize);

impl SpinOrbitalDeterminant {
    pub fn is_sz_zero(&self) -> bool {
        self.0 % 2 != self.1 % 2
    }

    /// Both electrons share a spatial orbital.
    pub fn is_paired(&self) -> bool {
        self.0 / 2 == self.1 / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FciSector {
    /// One α and one β electron.
    #[default]
    SzZero,
    /// Every two-electron determinant, C(2r, 2) of them.
    Full,
}

#[derive(Debug, Clone)]
pub struct FciResult {
    /// Total ground-state energy including nuclear repulsion.
    pub energy: f64,
    pub determinants: Vec<SpinOrbitalDeterminant>,
    pub coefficients: DVector<f64>,
    /// Orbital basis the determinants are built from.
    pub orbitals: OrbitalCoefficients,
    pub hamiltonian: DMatrix<f64>,
}

impl FciResult {
    pub fn rank(&self) -> usize {
        self.orbitals.rank()
    }

    /// `c_ij`, the coefficient of `a†_{iα} a†_{jβ} |0⟩`.
    pub fn pair_matrix(&self) -> DMatrix<f64> {
        let r = self.rank();
        let mut m = DMatrix::zeros(r, r);
        for (det, &c) in self.determinants.iter().zip(self.coefficients.iter()) {
            if !det.is_sz_zero() {
                continue;
            }
            let (a, b) = (det.0, det.1);
            if a % 2 == 0 {
                m[(a / 2, b / 2)] = c;
            } else {
                // a†_{jβ} a†_{iα} = −a†_{iα} a†_{jβ}
                m[(b / 2, a / 2)] = -c;
            }
        }
        m
    }

    /// Natural-orbital form of the singlet ground state,
    /// `Ψ = Σ_p g_p a†_{pα} a†_{pβ} |0⟩`. Returns the rotation `U` from the
    /// FCI orbital basis to natural orbitals (columns) and the amplitudes
    /// `g_p`, sorted by descending occupation `g_p²`.
    pub fn natural_geminal(&self) -> (DMatrix<f64>, Vec<f64>) {
        let pm = self.pair_matrix();
        let sym = 0.5 * (&pm + pm.transpose());
        let eig = sym.symmetric_eigen();
        let r = self.rank();
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
        let mut u = DMatrix::zeros(r, r);
        let mut g = Vec::with_capacity(r);
        for (col, &k) in order.iter().enumerate() {
            u.set_column(col, &eig.eigenvectors.column(k));
            g.push(eig.eigenvalues[k]);
        }
        (u, g)
    }

    /// `‖H v − E v‖_∞` of the stored eigenpair (electronic part).
    pub fn eigen_residual(&self, enuc: f64) -> f64 {
        let hv = &self.hamiltonian * &self.coefficients;
        (hv - (self.energy - enuc) * &self.coefficients).amax()
    }
}

fn spin_orbital_one_body(mo: &IntegralSet, p: usize, q: usize) -> f64 {
    if p % 2 == q % 2 {
        mo.hcore[(p / 2, q / 2)]
    } else {
        0.0
    }
}

/// Physicists' `⟨PQ|RS⟩ = (PR|QS)` over spin-orbitals.
fn spin_orbital_two_body(mo: &IntegralSet, p: usize, q: usize, r: usize, s: usize) -> f64 {
    if p % 2 == r % 2 && q % 2 == s % 2 {
        mo.eri(p / 2, r / 2, q / 2, s / 2)
    } else {
        0.0
    }
}

/// Two-electron determinants and the electronic Hamiltonian over them, in the
/// orthonormal orbital basis of `mo`.
pub fn fci_hamiltonian(mo: &IntegralSet, sector: FciSector) -> (Vec<SpinOrbitalDeterminant>, DMatrix<f64>) {
    let n = 2 * mo.rank();
    let dets: Vec<SpinOrbitalDeterminant> = (0..n)
        .flat_map(|p| (p + 1..n).map(move |q| SpinOrbitalDeterminant(p, q)))
        .filter(|d| sector == FciSector::Full || d.is_sz_zero())
        .collect();
    let dim = dets.len();
    let h1 = |a, b| spin_orbital_one_body(mo, a, b);
    let mut h = DMatrix::zeros(dim, dim);
    for (i, &SpinOrbitalDeterminant(p, q)) in dets.iter().enumerate() {
        for (j, &SpinOrbitalDeterminant(r, s)) in dets.iter().enumerate() {
            let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            let one = h1(p, r) * delta(q, s) + h1(q, s) * delta(p, r) - h1(p, s) * delta(q, r) - h1(q, r) * delta(p, s);
            let two = spin_orbital_two_body(mo, p, q, r, s) - spin_orbital_two_body(mo, p, q, s, r);
            h[(i, j)] = one + two;
        }
    }
    (dets, h)
}

/// Exact two-electron ground state by dense diagonalization in the `Sz = 0`
/// determinant space built from orbitals `c`.
pub fn fci_two_electron(ints: &IntegralSet, c: &OrbitalCoefficients) -> Result<FciResult> {
    fci_two_electron_in_sector(ints, c, FciSector::SzZero)
}

pub fn fci_two_electron_in_sector(ints: &IntegralSet, c: &OrbitalCoefficients, sector: FciSector) -> Result<FciResult> {
    let mo = transform_integrals(ints, c)?;
    let (determinants, hamiltonian) = fci_hamiltonian(&mo, sector);
    let eig = hamiltonian.clone().symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let mut v = eig.eigenvectors.column(k).into_owned();
    v /= v.norm();
    if v[v.iamax()] < 0.0 {
        v = -v;
    }
    Ok(FciResult {
        energy: eig.eigenvalues[k] + mo.enuc,
        determinants,
        coefficients: v,
        orbitals: c.clone(),
        hamiltonian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{apply_givens_rotations, compute_integrals, run_rhf, BasisSet, GivensRotation, MolecularGeometry, ScfOptions};

    fn setup(g: &MolecularGeometry) -> (IntegralSet, OrbitalCoefficients, f64) {
        let ints = compute_integrals(g, &BasisSet::sto3g(g).unwrap()).unwrap();
        let rhf = run_rhf(&ints, 2, ScfOptions::default()).unwrap();
        (ints, rhf.orbitals, rhf.energy)
    }

    #[test]
    fn h2_equilibrium_reference() {
        let (ints, c, e_rhf) = setup(&MolecularGeometry::h2(1.4).unwrap());
        let fci = fci_two_electron(&ints, &c).unwrap();
        assert!((fci.energy - -1.1373).abs() < 1e-4, "{}", fci.energy);
        assert!(fci.energy <= e_rhf);
        assert!(fci.eigen_residual(ints.enuc) < 1e-10);
        assert!((fci.coefficients.norm() - 1.0).abs() < 1e-12);
        for (det, &cf) in fci.determinants.iter().zip(fci.coefficients.iter()) {
            if !det.is_paired() {
                assert!(cf.abs() < 1e-10, "{det:?} has {cf}");
            }
        }
    }

    #[test]
    fn full_sector_agrees_on_ground_state() {
        let (ints, c, _) = setup(&MolecularGeometry::h3_plus(1.9).unwrap());
        let sz = fci_two_electron(&ints, &c).unwrap();
        let full = fci_two_electron_in_sector(&ints, &c, FciSector::Full).unwrap();
        assert_eq!(full.determinants.len(), 15);
        assert_eq!(sz.determinants.len(), 9);
        assert!((sz.energy - full.energy).abs() < 1e-10);
    }

    #[test]
    fn dissociated_h2_rhf_gap() {
        let (ints, c, e_rhf) = setup(&MolecularGeometry::h2(50.0).unwrap());
        let fci = fci_two_electron(&ints, &c).unwrap();
        assert!(e_rhf - fci.energy > 0.1, "gap {}", e_rhf - fci.energy);
    }

    #[test]
    fn invariant_under_orbital_rotation() {
        let (ints, c, _) = setup(&MolecularGeometry::h3_plus(2.3).unwrap());
        let e0 = fci_two_electron(&ints, &c).unwrap().energy;
        let rotated = apply_givens_rotations(&c, &[GivensRotation::new(0, 1, 0.4), GivensRotation::new(1, 2, -1.1), GivensRotation::new(0, 2, 2.0)]).unwrap();
        let e1 = fci_two_electron(&ints, &rotated).unwrap().energy;
        assert!((e0 - e1).abs() < 1e-10);
    }

    #[test]
    fn natural_geminal_reconstructs_pair_matrix() {
        let (ints, c, _) = setup(&MolecularGeometry::h3_plus(2.0).unwrap());
        let fci = fci_two_electron(&ints, &c).unwrap();
        let (u, g) = fci.natural_geminal();
        let rebuilt = &u * DMatrix::from_diagonal(&DVector::from_vec(g.clone())) * u.transpose();
        assert!((rebuilt - fci.pair_matrix()).amax() < 1e-10);
        let norm: f64 = g.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
