//! Ansatz circuits and the qubit Hamiltonian checked against fermionic
//! operators built directly in the occupation-number basis.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use pairvqe::ansatz::{
    generic_pair_gate, hf_state, jordan_wigner_hamiltonian, optimized_pair_gate, QubitLayout,
};
use pairvqe::chem::{compute_integrals, fci_two_electron, run_rhf, transform_integrals, BasisSet, MolecularGeometry, ScfOptions};
use pairvqe::qsim::Circuit;
use std::f64::consts::PI;

mod common;

use common::*;

#[test]
fn entangler_forms_agree_on_paired_subspace() {
    for r in [2usize, 3] {
        let layout = QubitLayout::new(r).unwrap();
        let n = layout.n_qubits();
        for i in 0..r - 1 {
            for k in 0..16 {
                let t = -PI + 2.0 * PI * k as f64 / 15.0;
                let exact = exact_entangler(i, t, n);
                let forms = [
                    ("pauli", pauli_exp_dense(i, t, &layout)),
                    ("two-term", two_term_dense(i, t, &layout)),
                    ("12-cnot", generic_pair_gate(t, i, &layout).unwrap().unitary().unwrap()),
                    ("8-cnot", optimized_pair_gate(t, 2 * i, n).unwrap().unitary().unwrap()),
                ];
                for (name, u) in &forms {
                    let d = paired_subspace_distance(u, &exact, &layout);
                    assert!(d < 1e-10, "r={r} i={i} t={t} {name}: {d}");
                }
            }
        }
    }
}

#[test]
fn entangler_sign_convention() {
    let layout = QubitLayout::new(2).unwrap();
    let u = exact_entangler(0, 0.3, 4);
    assert!((u[(0b1100, 0b0011)].re - 0.3f64.sin()).abs() < 1e-12);
    assert!((u[(0b0011, 0b0011)].re - 0.3f64.cos()).abs() < 1e-12);
    let v = generic_pair_gate(0.3, 0, &layout).unwrap().unitary().unwrap();
    assert!((v[(0b1100, 0b0011)] - C64::new(0.3f64.sin(), 0.0)).norm() < 1e-12);
}

#[test]
fn entanglers_conserve_number_and_pairing() {
    for r in [2usize, 3, 4] {
        let layout = QubitLayout::new(r).unwrap();
        let n = layout.n_qubits();
        let mut c = Circuit::new(n);
        for i in 0..r - 1 {
            c.append(&optimized_pair_gate(0.7 + i as f64, 2 * i, n).unwrap()).unwrap();
            c.append(&generic_pair_gate(-0.4 * i as f64 - 0.2, i, &layout).unwrap()).unwrap();
        }
        let u = c.unitary().unwrap();
        // The two-term reduction is exact only where every block holds 0 or 2
        // electrons, so inputs are the paired two-electron words.
        for p in 0..r {
            let col = layout.pair_word(p) as usize;
            for row in 0..1usize << n {
                if u[(row, col)].norm() > 1e-12 {
                    assert_eq!(row.count_ones(), 2, "r={r} {col:b} -> {row:b}");
                    assert!(layout.is_paired(row as u64), "r={r} {col:b} -> {row:b}");
                }
            }
        }
    }
}

fn rhf_setup(g: &MolecularGeometry) -> (pairvqe::chem::IntegralSet, pairvqe::chem::IntegralSet, f64, f64) {
    let ints = compute_integrals(g, &BasisSet::sto3g(g).unwrap()).unwrap();
    let rhf = run_rhf(&ints, 2, ScfOptions::default()).unwrap();
    let fci = fci_two_electron(&ints, &rhf.orbitals).unwrap();
    let mo = transform_integrals(&ints, &rhf.orbitals).unwrap();
    (ints, mo, rhf.energy, fci.energy)
}

#[test]
fn hamiltonian_on_hf_state_is_rhf_energy() {
    for g in [MolecularGeometry::h2(1.4).unwrap(), MolecularGeometry::h3_plus(1.8).unwrap()] {
        let (_, mo, e_rhf, _) = rhf_setup(&g);
        let layout = QubitLayout::new(mo.rank()).unwrap();
        let h = jordan_wigner_hamiltonian(&mo, &layout).unwrap();
        let e = h.expectation(&hf_state(&layout)).unwrap();
        assert!((e - e_rhf).abs() < 1e-10, "{e} vs {e_rhf}");
    }
}

#[test]
fn hamiltonian_sector_minimum_is_fci() {
    for g in [MolecularGeometry::h2(1.4).unwrap(), MolecularGeometry::h3_plus(2.2).unwrap()] {
        let (_, mo, _, e_fci) = rhf_setup(&g);
        let layout = QubitLayout::new(mo.rank()).unwrap();
        let h = jordan_wigner_hamiltonian(&mo, &layout).unwrap();
        assert!(h.is_hermitian(1e-12));
        let dense = h.dense_matrix();
        let sector: Vec<usize> = (0..1usize << layout.n_qubits())
            .filter(|&b| b.count_ones() == 2 && (b as u64 & layout.alpha_mask()).count_ones() == 1)
            .collect();
        let block = DMatrix::from_fn(sector.len(), sector.len(), |i, j| dense[(sector[i], sector[j])].re);
        let emin = block.symmetric_eigen().eigenvalues.min();
        assert!((emin - e_fci).abs() < 1e-10, "{emin} vs {e_fci}");
    }
}

#[test]
fn hamiltonian_terms_conserve_parity() {
    let (_, mo, _, _) = rhf_setup(&MolecularGeometry::h3_plus(2.0).unwrap());
    let h = jordan_wigner_hamiltonian(&mo, &QubitLayout::new(3).unwrap()).unwrap();
    assert!(h.terms().iter().all(|t| t.conserves_parity()));
}

#[test]
fn hamiltonian_needs_orthonormal_basis() {
    let g = MolecularGeometry::h2(1.4).unwrap();
    let ints = compute_integrals(&g, &BasisSet::sto3g(&g).unwrap()).unwrap();
    assert!(jordan_wigner_hamiltonian(&ints, &QubitLayout::new(2).unwrap()).is_err());
}
