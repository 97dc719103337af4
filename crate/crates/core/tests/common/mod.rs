#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use pairvqe::ansatz::{compile_pauli_exponential, pair_excitation_pauli_terms, QubitLayout};

/// `a_k|b⟩` or `a†_k|b⟩` as `(sign, b')`, with the Jordan-Wigner sign of the
/// occupied modes below `k`.
pub fn ladder(k: usize, create: bool, b: usize) -> Option<(f64, usize)> {
    let occupied = b >> k & 1 == 1;
    if occupied == create {
        return None;
    }
    let sign = if (b & ((1 << k) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, b ^ (1 << k)))
}

/// Dense matrix of a product of ladder operators, rightmost applied first.
pub fn product(ops: &[(usize, bool)], n: usize) -> DMatrix<f64> {
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let mut state = Some((1.0, b));
        for &(k, create) in ops.iter().rev() {
            state = state.and_then(|(s, x)| ladder(k, create, x).map(|(s2, y)| (s * s2, y)));
        }
        if let Some((s, y)) = state {
            m[(y, b)] += s;
        }
    }
    m
}

/// `exp(t G)` for `G = a†_{jα}a†_{jβ}a_{iβ}a_{iα} − h.c.`, by eigendecomposition of `iG`.
pub fn exact_entangler(i: usize, t: f64, n: usize) -> DMatrix<C64> {
    let (ia, ib, ja, jb) = (2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3);
    let up = product(&[(ja, true), (jb, true), (ib, false), (ia, false)], n);
    let g = &up - up.transpose();
    let h: DMatrix<C64> = g.map(|x| C64::new(0.0, x));
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -t * l)));
    v * d * v.adjoint()
}

pub fn two_term_dense(i: usize, t: f64, layout: &QubitLayout) -> DMatrix<C64> {
    let [a, b] = pair_excitation_pauli_terms(i, layout).unwrap();
    let mut c = compile_pauli_exponential(&a, t).unwrap();
    c.append(&compile_pauli_exponential(&b, t).unwrap()).unwrap();
    c.unitary().unwrap()
}

pub fn pauli_exp_dense(i: usize, t: f64, layout: &QubitLayout) -> DMatrix<C64> {
    // exp(−it(P₁+P₂)) with commuting P₁, P₂ of coefficient ½; (2P)² = I
    let dim = 1 << layout.n_qubits();
    let id = DMatrix::<C64>::identity(dim, dim);
    pair_excitation_pauli_terms(i, layout).unwrap().iter().fold(id.clone(), |acc, p| {
        let unit = p.clone().with_coeff(C64::new(1.0, 0.0)).dense_matrix();
        acc * (&id * C64::new((t / 2.0).cos(), 0.0) - unit * C64::new(0.0, (t / 2.0).sin()))
    })
}

/// Largest deviation on the paired basis columns after aligning one global phase.
pub fn paired_subspace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>, layout: &QubitLayout) -> f64 {
    let cols: Vec<usize> = (0..layout.r()).map(|p| layout.pair_word(p) as usize).collect();
    let overlap: C64 = cols.iter().map(|&c| (b.column(c).adjoint() * a.column(c))[(0, 0)]).sum();
    let phase = overlap / overlap.norm();
    cols.iter().map(|&c| (a.column(c) - b.column(c) * phase).iter().map(|z| z.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
}
