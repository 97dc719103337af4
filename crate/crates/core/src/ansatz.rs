//! Paired two-electron ansatz and its qubit encoding.
//!
//! Spin-orbital `(p, σ)` sits on qubit `2p + σ` (α = 0, β = 1), so pair `p`
//! is the adjacent block `{2p, 2p+1}` and each pair excitation touches four
//! contiguous qubits. The pair state `|pair p⟩ = a†_{pα} a†_{pβ}|0⟩` is the
//! basis word `0b11 << 2p` with Jordan-Wigner sign +1.
//!
//! Entangler convention: `U_i(t) = exp(t (a†_{jα}a†_{jβ}a_{iβ}a_{iα} − h.c.))`
//! with `j = i + 1` sends `|pair i⟩ → cos t |pair i⟩ + sin t |pair j⟩`.
//! On the paired, two-electron subspace it equals
//! `exp(−i t/2 · Y_aX_bY_cY_d) · exp(−i t/2 · X_aX_bX_cY_d)` with
//! `(a, b, c, d) = (2i, 2i+1, 2i+2, 2i+3)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::chem::IntegralSet;
use crate::qsim::{Circuit, Gate, Pauli, PauliString, PauliSum, Statevector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spin {
    Alpha,
    Beta,
}

/// Interleaved spin-orbital to qubit map for `r` spatial orbitals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    r: usize,
}

impl QubitLayout {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 || 2 * r > 62 {
            return Err(Error::Validation(format!("unsupported orbital count {r}")));
        }
        Ok(QubitLayout { r })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.r
    }

    pub fn qubit(&self, p: usize, spin: Spin) -> usize {
        2 * p + usize::from(spin == Spin::Beta)
    }

    pub fn pair_word(&self, p: usize) -> u64 {
        0b11 << (2 * p)
    }

    pub fn alpha_mask(&self) -> u64 {
        (0..self.r).fold(0, |m, p| m | 1 << (2 * p))
    }

    pub fn beta_mask(&self) -> u64 {
        self.alpha_mask() << 1
    }

    /// Every pair block holds `00` or `11`.
    pub fn is_paired(&self, word: u64) -> bool {
        (word & self.alpha_mask()) << 1 == (word & self.beta_mask())
    }
}

/// Pair amplitudes `t_k`, `k = 0 … r−2`, for the excitation pair `k → k+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParameters {
    t: Vec<f64>,
}

impl AnsatzParameters {
    pub fn new(t: Vec<f64>, layout: &QubitLayout) -> Result<Self> {
        if t.len() != layout.r() - 1 {
            return Err(Error::LengthMismatch { expected: layout.r() - 1, actual: t.len() });
        }
        Ok(AnsatzParameters { t })
    }

    pub fn zeros(layout: &QubitLayout) -> Self {
        AnsatzParameters { t: vec![0.0; layout.r() - 1] }
    }

    pub fn values(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Analytic paired amplitudes of the ansatz state:
/// `g_k = (Π_{l<k} sin t_l) cos t_k`, `g_{r−1} = Π_l sin t_l`.
pub fn chain_amplitudes(params: &AnsatzParameters) -> Vec<f64> {
    let mut g = Vec::with_capacity(params.len() + 1);
    let mut prefix = 1.0;
    for &t in params.values() {
        g.push(prefix * t.cos());
        prefix *= t.sin();
    }
    g.push(prefix);
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EntanglerStyle {
    /// Two compiled Pauli exponentials, 12 CNOTs per pair.
    Generic,
    /// Hand-reduced 8-CNOT gate.
    #[default]
    Optimized,
}

impl FromStr for EntanglerStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(EntanglerStyle::Generic),
            "optimized" => Ok(EntanglerStyle::Optimized),
            _ => Err(Error::Configuration(format!("unknown entangler style {s:?}"))),
        }
    }
}

impl fmt::Display for EntanglerStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntanglerStyle::Generic => "generic",
            EntanglerStyle::Optimized => "optimized",
        })
    }
}

/// `|pair 0⟩`: qubits 0 and 1 set.
pub fn hf_state(layout: &QubitLayout) -> Statevector {
    Statevector::basis(layout.n_qubits(), layout.pair_word(0)).expect("layout width is bounded")
}

pub fn hf_circuit(layout: &QubitLayout) -> Circuit {
    Circuit::from_gates(layout.n_qubits(), [Gate::X(0), Gate::X(1)]).expect("layout has ≥ 2 qubits")
}

/// The two Pauli strings (coefficient ½ each) whose joint exponential
/// `exp(−i t (P₁ + P₂))` realizes the pair `i → i+1` entangler.
pub fn pair_excitation_pauli_terms(i: usize, layout: &QubitLayout) -> Result<[PauliString; 2]> {
    if i + 1 >= layout.r() {
        return Err(Error::IndexOutOfRange { index: i, limit: layout.r() - 1 });
    }
    let n = layout.n_qubits();
    let q = |k: usize| 2 * i + k;
    let half = C64::new(0.5, 0.0);
    let a = PauliString::from_sparse(n, &[(q(0), Pauli::Y), (q(1), Pauli::X), (q(2), Pauli::Y), (q(3), Pauli::Y)], half)?;
    let b = PauliString::from_sparse(n, &[(q(0), Pauli::X), (q(1), Pauli::X), (q(2), Pauli::X), (q(3), Pauli::Y)], half)?;
    Ok([a, b])
}

/// Circuit for `exp(−iθ c P)` where `c` is the (real) coefficient of `p`:
/// basis change to Z, CNOT parity ladder over the support, `Rz(2θc)` on the
/// last support qubit, then the mirror image. Uses `2(w − 1)` CNOTs for
/// weight `w`.
pub fn compile_pauli_exponential(p: &PauliString, theta: f64) -> Result<Circuit> {
    let support = p.support();
    if support.is_empty() {
        return Err(Error::Validation("cannot exponentiate an identity string".into()));
    }
    if p.coeff().im.abs() > 1e-12 {
        return Err(Error::Validation(format!("complex coefficient {} makes the exponential non-unitary", p.coeff())));
    }
    let mut pre = Vec::new();
    for &q in &support {
        match p.letters()[q] {
            Pauli::X => pre.push(Gate::H(q)),
            Pauli::Y => {
                pre.push(Gate::Sdg(q));
                pre.push(Gate::H(q));
            }
            _ => {}
        }
    }
    let ladder: Vec<Gate> = support.windows(2).map(|w| Gate::cnot(w[0], w[1])).collect();
    let last = *support.last().unwrap();
    let mut c = Circuit::new(p.n_qubits());
    for g in pre.iter().chain(&ladder) {
        c.push(g.clone())?;
    }
    c.push(Gate::Rz(last, 2.0 * theta * p.coeff().re))?;
    for g in ladder.iter().rev().chain(pre.iter().rev()) {
        c.push(g.inverse())?;
    }
    Ok(c)
}

/// Pair entangler from the two compiled Pauli exponentials (12 CNOTs).
pub fn generic_pair_gate(t: f64, i: usize, layout: &QubitLayout) -> Result<Circuit> {
    let mut c = Circuit::new(layout.n_qubits());
    for term in pair_excitation_pauli_terms(i, layout)? {
        c.append(&compile_pauli_exponential(&term, t)?)?;
    }
    Ok(c)
}

/// 8-CNOT pair entangler on qubits `base … base+3` of an `n_qubits` register.
/// A Clifford frame maps the two commuting strings onto `Y` on the second
/// and third block qubits, which then rotate independently.
pub fn optimized_pair_gate(t: f64, base: usize, n_qubits: usize) -> Result<Circuit> {
    if base + 4 > n_qubits {
        return Err(Error::IndexOutOfRange { index: base + 3, limit: n_qubits });
    }
    let q = |k: usize| base + k;
    let frame = [
        Gate::Sdg(q(2)),
        Gate::H(q(2)),
        Gate::H(q(3)),
        Gate::S(q(3)),
        Gate::H(q(3)),
        Gate::cnot(q(1), q(0)),
        Gate::cnot(q(0), q(1)),
        Gate::cnot(q(3), q(2)),
        Gate::cnot(q(2), q(1)),
    ];
    let mut c = Circuit::new(n_qubits);
    for g in &frame {
        c.push(g.clone())?;
    }
    c.push(Gate::Ry(q(1), t))?;
    c.push(Gate::Ry(q(2), t))?;
    for g in frame.iter().rev() {
        c.push(g.inverse())?;
    }
    Ok(c)
}

pub fn pair_gate(t: f64, i: usize, layout: &QubitLayout, style: EntanglerStyle) -> Result<Circuit> {
    match style {
        EntanglerStyle::Generic => generic_pair_gate(t, i, layout),
        EntanglerStyle::Optimized => {
            if i + 1 >= layout.r() {
                return Err(Error::IndexOutOfRange { index: i, limit: layout.r() - 1 });
            }
            optimized_pair_gate(t, 2 * i, layout.n_qubits())
        }
    }
}

/// Hartree-Fock preparation followed by the pair entanglers `0 → 1`,
/// `1 → 2`, … in ascending order.
pub fn build_ansatz_circuit(params: &AnsatzParameters, layout: &QubitLayout, style: EntanglerStyle) -> Result<Circuit> {
    if params.len() != layout.r() - 1 {
        return Err(Error::LengthMismatch { expected: layout.r() - 1, actual: params.len() });
    }
    let mut c = hf_circuit(layout);
    for (i, &t) in params.values().iter().enumerate() {
        c.append(&pair_gate(t, i, layout, style)?)?;
    }
    Ok(c)
}

/// Noiseless ansatz state.
pub fn ansatz_state(params: &AnsatzParameters, layout: &QubitLayout, style: EntanglerStyle) -> Result<Statevector> {
    let mut s = Statevector::zero(layout.n_qubits())?;
    s.apply_circuit(&build_ansatz_circuit(params, layout, style)?)?;
    Ok(s)
}

/// Real parts of the `|pair p⟩` amplitudes.
pub fn paired_amplitudes(state: &Statevector, layout: &QubitLayout) -> Vec<f64> {
    (0..layout.r()).map(|p| state.amplitude(layout.pair_word(p)).re).collect()
}

/// `a_k` on `n` qubits: `Z_0 … Z_{k−1} (X_k + iY_k)/2`.
pub fn jw_annihilation(k: usize, n: usize) -> Result<PauliSum> {
    jw_ladder(k, n, 1.0)
}

/// `a†_k` on `n` qubits: `Z_0 … Z_{k−1} (X_k − iY_k)/2`.
pub fn jw_creation(k: usize, n: usize) -> Result<PauliSum> {
    jw_ladder(k, n, -1.0)
}

fn jw_ladder(k: usize, n: usize, sign: f64) -> Result<PauliSum> {
    let mut tail: Vec<(usize, Pauli)> = (0..k).map(|q| (q, Pauli::Z)).collect();
    tail.push((k, Pauli::X));
    let x = PauliString::from_sparse(n, &tail, C64::new(0.5, 0.0))?;
    tail[k].1 = Pauli::Y;
    let y = PauliString::from_sparse(n, &tail, C64::new(0.0, 0.5 * sign))?;
    PauliSum::from_terms(n, vec![x, y])
}

/// Qubit Hamiltonian `Σ h_PQ a†_P a_Q + ½ Σ ⟨PQ|RS⟩ a†_P a†_Q a_S a_R + E_nuc`
/// over spin-orbitals, for integrals in an orthonormal orbital basis.
pub fn jordan_wigner_hamiltonian(integrals: &IntegralSet, layout: &QubitLayout) -> Result<PauliSum> {
    let r = integrals.rank();
    if r != layout.r() {
        return Err(Error::LengthMismatch { expected: layout.r(), actual: r });
    }
    let dev = (&integrals.overlap - nalgebra::DMatrix::<f64>::identity(r, r)).amax();
    if dev > 1e-8 {
        return Err(Error::Precondition(format!("integrals are not in an orthonormal basis (overlap deviation {dev:.2e})")));
    }
    let n = layout.n_qubits();
    let create: Vec<PauliSum> = (0..n).map(|k| jw_creation(k, n)).collect::<Result<_>>()?;
    let annihilate: Vec<PauliSum> = (0..n).map(|k| jw_annihilation(k, n)).collect::<Result<_>>()?;
    let mut h = PauliSum::from_terms(n, vec![PauliString::identity(n, C64::new(integrals.enuc, 0.0))])?;
    let spin = |p: usize| p % 2;
    let orb = |p: usize| p / 2;
    for p in 0..n {
        for q in 0..n {
            if spin(p) != spin(q) {
                continue;
            }
            let v = integrals.hcore[(orb(p), orb(q))];
            if v.abs() < 1e-14 {
                continue;
            }
            let mut term = create[p].mul(&annihilate[q])?;
            term.scale(C64::new(v, 0.0));
            h.add(&term)?;
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            let pq = create[p].mul(&create[q])?.simplify(1e-15);
            for rr in 0..n {
                for s in 0..n {
                    if rr == s || spin(p) != spin(rr) || spin(q) != spin(s) {
                        continue;
                    }
                    // ⟨PQ|RS⟩ = (pr|qs)
                    let v = integrals.eri(orb(p), orb(rr), orb(q), orb(s));
                    if v.abs() < 1e-14 {
                        continue;
                    }
                    let mut term = pq.mul(&annihilate[s].mul(&annihilate[rr])?)?;
                    term.scale(C64::new(0.5 * v, 0.0));
                    h.add(&term)?;
                }
            }
            h = h.simplify(1e-14);
        }
    }
    let h = h.simplify(1e-12);
    Ok(PauliSum::from_terms(n, h.terms().iter().map(|t| t.clone().with_coeff(C64::new(t.coeff().re, 0.0))).collect())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::unitary_distance;
    use nalgebra::DMatrix;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn expm_pauli(p: &PauliString, theta: f64) -> DMatrix<C64> {
        // P² = c² I, so exp(−iθcP) = cos(θc) I − i sin(θc) P/c
        let c = p.coeff().re;
        let unit = p.clone().with_coeff(C64::new(1.0, 0.0)).dense_matrix();
        let dim = unit.nrows();
        DMatrix::<C64>::identity(dim, dim) * C64::new((theta * c).cos(), 0.0) - unit * C64::new(0.0, (theta * c).sin())
    }

    #[test]
    fn hf_state_words() {
        let l2 = QubitLayout::new(2).unwrap();
        assert_eq!(hf_state(&l2), Statevector::basis(4, 0b0011).unwrap());
        let l3 = QubitLayout::new(3).unwrap();
        let s = hf_state(&l3);
        assert_eq!(s.n_qubits(), 6);
        let idx = s.amplitudes().iter().position(|a| a.norm() > 0.5).unwrap();
        assert_eq!((idx as u64).count_ones(), 2);
    }

    #[test]
    fn terms_follow_documented_pattern() {
        let l = QubitLayout::new(2).unwrap();
        let [a, b] = pair_excitation_pauli_terms(0, &l).unwrap();
        assert_eq!(a.word(), "YXYY");
        assert_eq!(b.word(), "XXXY");
        assert!(a.commutes(&b));
        assert!(pair_excitation_pauli_terms(1, &l).is_err());
    }

    #[test]
    fn compiled_exponential_matches_dense() {
        for (w, c) in [("ZZ", 1.0), ("XIY", -0.7), ("YXYY", 0.5), ("IZXY", 0.3)] {
            let p = PauliString::parse(w, C64::new(c, 0.0)).unwrap();
            for theta in [0.0, 0.37, -1.9, 3.0] {
                let circ = compile_pauli_exponential(&p, theta).unwrap();
                assert_eq!(circ.cnot_count(), 2 * (p.weight() - 1));
                let d = unitary_distance(&circ.unitary().unwrap(), &expm_pauli(&p, theta));
                // exact, not just up to phase
                let raw = (circ.unitary().unwrap() - expm_pauli(&p, theta)).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(d < 1e-12 && raw < 1e-12, "{w} θ={theta}: {d} {raw}");
            }
        }
        assert!(compile_pauli_exponential(&PauliString::parse("II", C64::new(1.0, 0.0)).unwrap(), 1.0).is_err());
    }

    #[test]
    fn entangler_cnot_counts() {
        let l = QubitLayout::new(2).unwrap();
        assert_eq!(generic_pair_gate(0.3, 0, &l).unwrap().cnot_count(), 12);
        assert_eq!(optimized_pair_gate(0.3, 0, 4).unwrap().cnot_count(), 8);
        assert!(optimized_pair_gate(0.3, 1, 4).is_err());
    }

    #[test]
    fn zero_angle_is_identity() {
        let l = QubitLayout::new(2).unwrap();
        let id = DMatrix::identity(16, 16);
        assert!(unitary_distance(&generic_pair_gate(0.0, 0, &l).unwrap().unitary().unwrap(), &id) < 1e-12);
        assert!(unitary_distance(&optimized_pair_gate(0.0, 0, 4).unwrap().unitary().unwrap(), &id) < 1e-10);
    }

    #[test]
    fn optimized_matches_generic_on_grid() {
        let l = QubitLayout::new(2).unwrap();
        for k in 0..16 {
            let t = -PI + 2.0 * PI * k as f64 / 15.0;
            let a = generic_pair_gate(t, 0, &l).unwrap().unitary().unwrap();
            let b = optimized_pair_gate(t, 0, 4).unwrap().unitary().unwrap();
            assert!(unitary_distance(&a, &b) < 1e-10, "t={t}");
        }
    }

    #[test]
    fn quarter_turn_moves_pair() {
        let l = QubitLayout::new(2).unwrap();
        for style in [EntanglerStyle::Generic, EntanglerStyle::Optimized] {
            let s = ansatz_state(&AnsatzParameters::new(vec![FRAC_PI_2], &l).unwrap(), &l, style).unwrap();
            assert!((s.amplitude(0b1100).norm() - 1.0).abs() < 1e-12, "{style}");
            assert!((s.excited_probability(2) - 1.0).abs() < 1e-12);
            assert!(s.excited_probability(0) < 1e-12);
        }
    }

    #[test]
    fn zero_parameters_give_hf() {
        let l = QubitLayout::new(2).unwrap();
        let s = ansatz_state(&AnsatzParameters::zeros(&l), &l, EntanglerStyle::Optimized).unwrap();
        assert!((s.inner(&hf_state(&l)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn r3_state_follows_chain() {
        let l = QubitLayout::new(3).unwrap();
        for t in [[0.4, -1.1], [-PI / 4.0, -PI / 4.0], [2.5, 0.9]] {
            let params = AnsatzParameters::new(t.to_vec(), &l).unwrap();
            let g = chain_amplitudes(&params);
            assert!((g[0] - t[0].cos()).abs() < 1e-15);
            assert!((g[1] - t[0].sin() * t[1].cos()).abs() < 1e-15);
            assert!((g[2] - t[0].sin() * t[1].sin()).abs() < 1e-15);
            for style in [EntanglerStyle::Generic, EntanglerStyle::Optimized] {
                let s = ansatz_state(&params, &l, style).unwrap();
                let amps = paired_amplitudes(&s, &l);
                for p in 0..3 {
                    assert!((amps[p] - g[p]).abs() < 1e-10, "{style} {t:?}: {amps:?} vs {g:?}");
                }
            }
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let l = QubitLayout::new(3).unwrap();
        assert!(AnsatzParameters::new(vec![0.1], &l).is_err());
    }

    #[test]
    fn layout_masks() {
        let l = QubitLayout::new(3).unwrap();
        assert_eq!(l.alpha_mask(), 0b010101);
        assert_eq!(l.beta_mask(), 0b101010);
        assert!(l.is_paired(0b110000));
        assert!(!l.is_paired(0b100001));
        assert_eq!(l.qubit(2, Spin::Beta), 5);
    }
}
