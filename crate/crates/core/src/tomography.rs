//! Reduced tomography of paired two-electron states.
//!
//! Occupations come from one computational-basis circuit. Consecutive-pair
//! signs come from two more circuits shared by every pair: all qubits in the
//! X basis, and an alternating X/Y pattern. On a paired state
//! `Σ_p g_p |pair p⟩` the combination
//! `¼(⟨X_aX_bX_cX_d⟩ + ⟨X_aY_bX_cY_d⟩)` over block `(a, b, c, d) = 2k … 2k+3`
//! equals `g_k g_{k+1}`, half of `⟨a†_{k+1,α}a†_{k+1,β}a_{kβ}a_{kα} + h.c.⟩`.
//! The alternative pattern `¼(⟨XXXX⟩ + ⟨Y_aX_bY_cX_d⟩)` gives the same value.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ansatz::{chain_amplitudes, AnsatzParameters, QubitLayout};
use crate::qsim::{exact_distribution, run_noisy, sample, Circuit, Gate, NoiseModel, Outcomes, Statevector};
use crate::{seed, Error, Result};

/// Distinct basis settings one objective evaluation may prepare.
pub const MAX_PREPARATIONS: usize = 9;

/// Runs prepared circuits under a fixed shot budget and noise model and
/// counts how many circuit preparations were issued.
#[derive(Debug)]
pub struct Executor<'a> {
    shots: Option<u64>,
    noise: Option<&'a NoiseModel>,
    preparations: Cell<usize>,
}

impl<'a> Executor<'a> {
    /// `shots = None` returns exact probabilities, which needs a noise model
    /// without gate or relaxation channels.
    pub fn new(shots: Option<u64>, noise: Option<&'a NoiseModel>) -> Self {
        Executor { shots, noise, preparations: Cell::new(0) }
    }

    pub fn shots(&self) -> Option<u64> {
        self.shots
    }

    pub fn noise(&self) -> Option<&'a NoiseModel> {
        self.noise
    }

    pub fn preparations(&self) -> usize {
        self.preparations.get()
    }

    pub fn reset_preparations(&self) {
        self.preparations.set(0);
    }

    /// Executes `prep` then the measurement basis change `basis`.
    pub fn measure(&self, prep: &Circuit, basis: &Circuit, seed: u64) -> Result<Outcomes> {
        self.preparations.set(self.preparations.get() + 1);
        let stochastic = self.noise.is_some_and(|m| m.is_stochastic());
        match (self.shots, stochastic) {
            (None, true) => Err(Error::Configuration("exact probabilities need a noise model without gate or relaxation noise".into())),
            (Some(shots), true) => Ok(Outcomes::Counts(run_noisy(prep, self.noise.unwrap(), seed)?.sample(basis, shots)?)),
            (shots, false) => {
                let mut s = Statevector::zero(prep.n_qubits())?;
                s.apply_circuit(prep)?;
                match shots {
                    Some(n) => Ok(Outcomes::Counts(sample(&s, n, basis, self.noise, seed)?)),
                    None => Ok(Outcomes::Exact(exact_distribution(&s, basis, self.noise)?)),
                }
            }
        }
    }
}

/// Spin-orbital occupations, qubit order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationEstimate {
    pub n: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Shots backing the estimate, `None` when exact.
    pub shots: Option<u64>,
}

impl OccupationEstimate {
    pub fn from_outcomes(outcomes: &Outcomes) -> Self {
        let nq = outcomes.n_qubits();
        let n: Vec<f64> = (0..nq).map(|q| outcomes.bit_mean(q)).collect();
        let shots = outcomes.shots();
        let stderr = n
            .iter()
            .map(|&x| match shots {
                Some(s) if s > 0 => (x * (1.0 - x) / s as f64).sqrt(),
                _ => 0.0,
            })
            .collect();
        OccupationEstimate { n, stderr, shots }
    }

    /// Occupations of the α (`beta = false`) or β half-set.
    pub fn half_set(&self, beta: bool) -> Vec<f64> {
        self.n.iter().skip(usize::from(beta)).step_by(2).copied().collect()
    }

    /// Mean of the α and β occupation of each spatial orbital.
    pub fn spatial(&self) -> Vec<f64> {
        self.n.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect()
    }
}

/// Which two-circuit pattern estimates the pair signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PhaseEstimator {
    /// `XXXX` and `XYXY` (Y on β qubits).
    #[default]
    C2,
    /// `XXXX` and `YXYX` (Y on α qubits).
    C3,
}

impl FromStr for PhaseEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c2" => Ok(PhaseEstimator::C2),
            "c3" => Ok(PhaseEstimator::C3),
            _ => Err(Error::Configuration(format!("unknown phase estimator {s:?}"))),
        }
    }
}

impl fmt::Display for PhaseEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseEstimator::C2 => "c2",
            PhaseEstimator::C3 => "c3",
        })
    }
}

/// Basis-change circuits for sign estimation and, per consecutive pair, the
/// parity masks read from each circuit.
#[derive(Debug, Clone)]
pub struct PhaseCircuits {
    pub circuits: Vec<Circuit>,
    /// `masks[k]` is the 4-qubit block of pair `k → k+1`, read from every circuit.
    pub masks: Vec<u64>,
}

pub fn phase_measurement_circuits(layout: &QubitLayout, estimator: PhaseEstimator) -> Result<PhaseCircuits> {
    if layout.r() < 2 {
        return Err(Error::Validation("sign estimation needs at least two orbitals".into()));
    }
    let n = layout.n_qubits();
    let all_x = Circuit::from_gates(n, (0..n).map(Gate::H))?;
    let y_parity = usize::from(estimator == PhaseEstimator::C2);
    let mut mixed = Circuit::new(n);
    for q in 0..n {
        if q % 2 == y_parity {
            mixed.push(Gate::Sdg(q))?;
        }
        mixed.push(Gate::H(q))?;
    }
    let masks = (0..layout.r() - 1).map(|k| 0b1111u64 << (2 * k)).collect();
    Ok(PhaseCircuits { circuits: vec![all_x, mixed], masks })
}

/// Relative signs `ξ_k = sign(g_k g_{k+1})` for `k = 0 … r−2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    pub xi: Vec<f64>,
    /// Estimated `g_k g_{k+1}` behind each sign.
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Sign indistinguishable from zero at two standard errors.
    pub ambiguous: Vec<bool>,
}

impl PhaseEstimate {
    fn from_values(value: Vec<f64>, stderr: Vec<f64>) -> Self {
        let ambiguous: Vec<bool> = value.iter().zip(&stderr).map(|(v, s)| v.abs() <= (2.0 * s).max(1e-12)).collect();
        let xi = value.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        PhaseEstimate { xi, value, stderr, ambiguous }
    }

    /// Replaces ambiguous signs by those of `fallback`.
    pub fn resolve_with(&self, fallback: &PhaseEstimate) -> PhaseEstimate {
        let mut out = self.clone();
        for k in 0..out.xi.len() {
            if out.ambiguous[k] {
                out.xi[k] = fallback.xi[k];
            }
        }
        out
    }

    pub fn any_ambiguous(&self) -> bool {
        self.ambiguous.iter().any(|&a| a)
    }

    /// Cumulative amplitude signs `s_0 = +1`, `s_{k+1} = s_k ξ_k`.
    pub fn amplitude_signs(&self) -> Vec<f64> {
        let mut s = vec![1.0];
        for &x in &self.xi {
            s.push(s.last().unwrap() * x);
        }
        s
    }
}

/// Signs of the consecutive pair products from the measured X/Y-basis data.
pub fn estimate_phases_from(outcomes: &[Outcomes], circuits: &PhaseCircuits) -> Result<PhaseEstimate> {
    if outcomes.len() != circuits.circuits.len() {
        return Err(Error::LengthMismatch { expected: circuits.circuits.len(), actual: outcomes.len() });
    }
    let mut value = Vec::new();
    let mut stderr = Vec::new();
    for &mask in &circuits.masks {
        let mut v = 0.0;
        let mut var = 0.0;
        for o in outcomes {
            let m = o.parity_mean(mask);
            v += 0.25 * m;
            if let Some(s) = o.shots() {
                var += (1.0 - m * m).max(0.0) / s as f64 / 16.0;
            }
        }
        value.push(v);
        stderr.push(var.sqrt());
    }
    Ok(PhaseEstimate::from_values(value, stderr))
}

/// Prepares `circuit` under both sign-estimation bases and estimates `ξ`.
pub fn estimate_phases(exec: &Executor, circuit: &Circuit, layout: &QubitLayout, estimator: PhaseEstimator, seed: u64) -> Result<PhaseEstimate> {
    let pc = phase_measurement_circuits(layout, estimator)?;
    let outcomes = pc
        .circuits
        .iter()
        .enumerate()
        .map(|(k, basis)| exec.measure(circuit, basis, seed::derive(seed, 1 + k as u64)))
        .collect::<Result<Vec<_>>>()?;
    estimate_phases_from(&outcomes, &pc)
}

/// Signs of the analytic chain amplitudes. A vanishing amplitude gets `+1`
/// and marks its neighbouring relative signs ambiguous.
pub fn classical_phase_assignment(params: &AnsatzParameters) -> PhaseEstimate {
    let g = chain_amplitudes(params);
    let value: Vec<f64> = g.windows(2).map(|w| w[0] * w[1]).collect();
    let mut est = PhaseEstimate::from_values(value, vec![0.0; g.len() - 1]);
    let sign = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
    for k in 0..est.xi.len() {
        est.xi[k] = sign(g[k]) * sign(g[k + 1]);
    }
    est
}

/// Computational-basis measurement of `circuit`.
pub fn measure_occupations(exec: &Executor, circuit: &Circuit, seed: u64) -> Result<(OccupationEstimate, Outcomes)> {
    let o = exec.measure(circuit, &Circuit::new(circuit.n_qubits()), seed::derive(seed, 0))?;
    Ok((OccupationEstimate::from_outcomes(&o), o))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_ansatz_circuit, hf_circuit, EntanglerStyle};
    use std::f64::consts::PI;

    fn circuit(t: &[f64], layout: &QubitLayout) -> Circuit {
        build_ansatz_circuit(&AnsatzParameters::new(t.to_vec(), layout).unwrap(), layout, EntanglerStyle::Optimized).unwrap()
    }

    #[test]
    fn hf_occupations_exact() {
        let l = QubitLayout::new(3).unwrap();
        let exec = Executor::new(Some(100), None);
        let (occ, _) = measure_occupations(&exec, &hf_circuit(&l), 1).unwrap();
        assert_eq!(occ.n, vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn r2_occupations_within_binomial_bounds() {
        let l = QubitLayout::new(2).unwrap();
        let shots = 2048;
        let exec = Executor::new(Some(shots), None);
        for t in [-0.3, -1.0, -2.2] {
            let (occ, _) = measure_occupations(&exec, &circuit(&[t], &l), 5).unwrap();
            let p = t.cos().powi(2);
            let sigma = (p * (1.0 - p) / shots as f64).sqrt().max(1e-9);
            assert!((occ.n[0] - p).abs() < 5.0 * sigma);
            assert!((occ.n[2] - (1.0 - p)).abs() < 5.0 * sigma);
            assert_eq!(occ.n[0], occ.n[1]);
        }
    }

    #[test]
    fn circuit_and_term_counts() {
        let l2 = QubitLayout::new(2).unwrap();
        let pc = phase_measurement_circuits(&l2, PhaseEstimator::C2).unwrap();
        assert_eq!((pc.circuits.len(), pc.masks.len()), (2, 1));
        let l3 = QubitLayout::new(3).unwrap();
        let pc = phase_measurement_circuits(&l3, PhaseEstimator::C3).unwrap();
        assert_eq!((pc.circuits.len(), pc.masks.len()), (2, 2));
        assert!(phase_measurement_circuits(&QubitLayout::new(1).unwrap(), PhaseEstimator::C2).is_err());
    }

    #[test]
    fn negative_quarter_turn_gives_negative_sign() {
        let l = QubitLayout::new(2).unwrap();
        let exec = Executor::new(None, None);
        for est in [PhaseEstimator::C2, PhaseEstimator::C3] {
            let ph = estimate_phases(&exec, &circuit(&[-PI / 4.0], &l), &l, est, 0).unwrap();
            assert_eq!(ph.xi, vec![-1.0]);
            assert!((ph.value[0] + 0.5).abs() < 1e-12, "{est}: {}", ph.value[0]);
            assert!(!ph.any_ambiguous());
        }
    }

    #[test]
    fn zero_amplitude_is_ambiguous() {
        let l = QubitLayout::new(2).unwrap();
        let exec = Executor::new(None, None);
        let ph = estimate_phases(&exec, &circuit(&[0.0], &l), &l, PhaseEstimator::C2, 0).unwrap();
        assert!(ph.ambiguous[0]);
        let cl = classical_phase_assignment(&AnsatzParameters::zeros(&QubitLayout::new(3).unwrap()));
        assert_eq!(cl.xi, vec![1.0, 1.0]);
        assert_eq!(cl.ambiguous, vec![true, true]);
    }

    #[test]
    fn classical_signs_follow_chain() {
        let l = QubitLayout::new(3).unwrap();
        let p = AnsatzParameters::new(vec![-PI / 4.0, -PI / 4.0], &l).unwrap();
        let cl = classical_phase_assignment(&p);
        // g = (cos, sin·cos, sin·sin) = (+, −, +)
        assert_eq!(cl.xi, vec![-1.0, -1.0]);
        assert_eq!(cl.amplitude_signs(), vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn preparation_count() {
        let l = QubitLayout::new(3).unwrap();
        let exec = Executor::new(Some(64), None);
        let c = circuit(&[0.3, 0.4], &l);
        measure_occupations(&exec, &c, 0).unwrap();
        estimate_phases(&exec, &c, &l, PhaseEstimator::C2, 0).unwrap();
        assert_eq!(exec.preparations(), 3);
    }

    #[test]
    fn exact_mode_refuses_gate_noise() {
        let l = QubitLayout::new(2).unwrap();
        let noise = NoiseModel::uniform(4, 0.01, 0.02, 0.0);
        let exec = Executor::new(None, Some(&noise));
        assert!(matches!(measure_occupations(&exec, &hf_circuit(&l), 0), Err(Error::Configuration(_))));
    }
}
