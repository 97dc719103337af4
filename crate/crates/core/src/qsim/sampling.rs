use std::collections::BTreeMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Circuit, NoiseModel, PauliSum, Statevector};
use crate::seed::{self, Rng};
use crate::{Error, Result};

/// Outcome word rendered with qubit `n−1` leftmost, so bit `q` of the word
/// is character `n−1−q`.
pub fn format_word(word: u64, n_qubits: usize) -> String {
    (0..n_qubits).rev().map(|q| if word >> q & 1 == 1 { '1' } else { '0' }).collect()
}

/// Counts per outcome word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotHistogram {
    n_qubits: usize,
    counts: BTreeMap<u64, u64>,
    shots: u64,
}

impl ShotHistogram {
    pub fn new(n_qubits: usize) -> Self {
        ShotHistogram { n_qubits, counts: BTreeMap::new(), shots: 0 }
    }

    pub fn from_outcomes(n_qubits: usize, outcomes: impl IntoIterator<Item = u64>) -> Self {
        let mut h = ShotHistogram::new(n_qubits);
        for w in outcomes {
            h.record(w, 1);
        }
        h
    }

    pub fn record(&mut self, word: u64, count: u64) {
        if count > 0 {
            *self.counts.entry(word).or_default() += count;
            self.shots += count;
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn is_empty(&self) -> bool {
        self.shots == 0
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn count(&self, word: u64) -> u64 {
        self.counts.get(&word).copied().unwrap_or(0)
    }

    /// Fraction of shots with qubit `q` read as 1.
    pub fn bit_frequency(&self, q: usize) -> f64 {
        let ones: u64 = self.counts.iter().filter(|(w, _)| *w >> q & 1 == 1).map(|(_, c)| c).sum();
        ones as f64 / self.shots as f64
    }

    /// Keeps the outcomes accepted by `keep`.
    pub fn retain(&self, keep: impl Fn(u64) -> bool) -> ShotHistogram {
        let counts: BTreeMap<u64, u64> = self.counts.iter().filter(|(w, _)| keep(**w)).map(|(w, c)| (*w, *c)).collect();
        let shots = counts.values().sum();
        ShotHistogram { n_qubits: self.n_qubits, counts, shots }
    }

    /// `# qubits n shots s` header, then `word count` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("# qubits {} shots {}\n", self.n_qubits, self.shots);
        for (w, c) in &self.counts {
            out.push_str(&format!("{} {c}\n", format_word(*w, self.n_qubits)));
        }
        out
    }
}

/// Exact outcome probabilities (the infinite-shot limit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    n_qubits: usize,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(n_qubits: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1 << n_qubits {
            return Err(Error::LengthMismatch { expected: 1 << n_qubits, actual: probs.len() });
        }
        Ok(OutcomeDistribution { n_qubits, probs })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Sum of retained weight; 1 unless filtered.
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn retain(&self, keep: impl Fn(u64) -> bool) -> OutcomeDistribution {
        let probs = self.probs.iter().enumerate().map(|(w, &p)| if keep(w as u64) { p } else { 0.0 }).collect();
        OutcomeDistribution { n_qubits: self.n_qubits, probs }
    }
}

/// Either finite-shot counts or exact probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcomes {
    Counts(ShotHistogram),
    Exact(OutcomeDistribution),
}

impl Outcomes {
    pub fn n_qubits(&self) -> usize {
        match self {
            Outcomes::Counts(h) => h.n_qubits(),
            Outcomes::Exact(d) => d.n_qubits(),
        }
    }

    /// Shot count, `None` when exact.
    pub fn shots(&self) -> Option<u64> {
        match self {
            Outcomes::Counts(h) => Some(h.shots()),
            Outcomes::Exact(_) => None,
        }
    }

    pub fn total_weight(&self) -> f64 {
        match self {
            Outcomes::Counts(h) => h.shots() as f64,
            Outcomes::Exact(d) => d.total(),
        }
    }

    /// `(word, weight)` pairs with nonzero weight.
    pub fn weights(&self) -> Vec<(u64, f64)> {
        match self {
            Outcomes::Counts(h) => h.counts().iter().map(|(w, c)| (*w, *c as f64)).collect(),
            Outcomes::Exact(d) => d.probs.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(w, p)| (w as u64, *p)).collect(),
        }
    }

    /// Weighted mean of `f(word)`.
    pub fn mean(&self, f: impl Fn(u64) -> f64) -> f64 {
        let total = self.total_weight();
        self.weights().into_iter().map(|(w, x)| x * f(w)).sum::<f64>() / total
    }

    pub fn bit_mean(&self, q: usize) -> f64 {
        self.mean(|w| (w >> q & 1) as f64)
    }

    /// Mean of `(−1)^{parity of word & mask}`.
    pub fn parity_mean(&self, mask: u64) -> f64 {
        self.mean(|w| if (w & mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
    }

    pub fn retain(&self, keep: impl Fn(u64) -> bool) -> Outcomes {
        match self {
            Outcomes::Counts(h) => Outcomes::Counts(h.retain(keep)),
            Outcomes::Exact(d) => Outcomes::Exact(d.retain(keep)),
        }
    }
}

fn draw(cumulative: &[f64], rng: &mut Rng) -> u64 {
    let u = rng.random::<f64>() * cumulative[cumulative.len() - 1];
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1) as u64
}

fn flip_readout(word: u64, noise: Option<&NoiseModel>, rng: &mut Rng) -> u64 {
    let Some(noise) = noise else { return word };
    let mut w = word;
    for q in 0..noise.n_qubits() {
        let p = noise.readout_error(q);
        if p > 0.0 && rng.random::<f64>() < p {
            w ^= 1 << q;
        }
    }
    w
}

fn check_width(noise: Option<&NoiseModel>, n: usize) -> Result<()> {
    match noise {
        Some(m) if m.n_qubits() != n => Err(Error::Configuration(format!("noise model has {} qubits, register {n}", m.n_qubits()))),
        _ => Ok(()),
    }
}

/// Draws `shots` outcomes from `state` after the (noiseless) basis change.
/// Only the readout channel of `noise` applies here.
pub fn sample(state: &Statevector, shots: u64, basis: &Circuit, noise: Option<&NoiseModel>, seed: u64) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(Error::Validation("shots must be positive".into()));
    }
    check_width(noise, state.n_qubits())?;
    let mut s = state.clone();
    s.apply_circuit(basis)?;
    let mut cumulative = s.probabilities();
    for i in 1..cumulative.len() {
        cumulative[i] += cumulative[i - 1];
    }
    let mut rng = seed::rng(seed, 0);
    let mut h = ShotHistogram::new(state.n_qubits());
    for _ in 0..shots {
        let w = draw(&cumulative, &mut rng);
        h.record(flip_readout(w, noise, &mut rng), 1);
    }
    Ok(h)
}

/// Exact outcome probabilities after the basis change, with the readout
/// confusion of `noise` folded in.
pub fn exact_distribution(state: &Statevector, basis: &Circuit, noise: Option<&NoiseModel>) -> Result<OutcomeDistribution> {
    check_width(noise, state.n_qubits())?;
    let mut s = state.clone();
    s.apply_circuit(basis)?;
    let mut probs = s.probabilities();
    if let Some(noise) = noise {
        for q in 0..noise.n_qubits() {
            let p = noise.readout_error(q);
            if p > 0.0 {
                let bit = 1usize << q;
                for i in 0..probs.len() {
                    if i & bit == 0 {
                        let (a, b) = (probs[i], probs[i | bit]);
                        probs[i] = (1.0 - p) * a + p * b;
                        probs[i | bit] = p * a + (1.0 - p) * b;
                    }
                }
            }
        }
    }
    OutcomeDistribution::new(state.n_qubits(), probs)
}

/// Seeded ensemble of noisy executions of one circuit. Trajectory `k` uses
/// generator stream `k` of the root seed, so results do not depend on thread
/// count.
#[derive(Debug, Clone)]
pub struct TrajectorySampler {
    circuit: Circuit,
    noise: NoiseModel,
    seed: u64,
}

pub fn run_noisy(circuit: &Circuit, noise: &NoiseModel, seed: u64) -> Result<TrajectorySampler> {
    noise.check_circuit(circuit)?;
    Ok(TrajectorySampler { circuit: circuit.clone(), noise: noise.clone(), seed })
}

impl TrajectorySampler {
    fn run(&self, extra: Option<&Circuit>, rng: &mut Rng) -> Statevector {
        let mut s = Statevector::zero(self.circuit.n_qubits()).expect("validated width");
        for g in self.circuit.gates().iter().chain(extra.map(|c| c.gates()).unwrap_or(&[])) {
            self.noise.apply_noisy(&mut s, g, rng);
        }
        s
    }

    /// State of trajectory `index` (without readout).
    pub fn trajectory(&self, index: u64) -> Statevector {
        self.run(None, &mut seed::rng(self.seed, index))
    }

    /// One shot per trajectory; the basis change is executed with gate noise too.
    pub fn sample(&self, basis: &Circuit, shots: u64) -> Result<ShotHistogram> {
        if shots == 0 {
            return Err(Error::Validation("shots must be positive".into()));
        }
        self.noise.check_circuit(&Circuit::from_gates(self.circuit.n_qubits(), basis.gates().iter().cloned())?)?;
        if !self.noise.is_stochastic() {
            let s = self.run(None, &mut seed::rng(self.seed, 0));
            return sample(&s, shots, basis, Some(&self.noise), seed::derive(self.seed, u64::MAX));
        }
        let words: Vec<u64> = (0..shots)
            .into_par_iter()
            .map(|k| {
                let mut rng = seed::rng(self.seed, k);
                let s = self.run(Some(basis), &mut rng);
                let mut cumulative = s.probabilities();
                for i in 1..cumulative.len() {
                    cumulative[i] += cumulative[i - 1];
                }
                let w = draw(&cumulative, &mut rng);
                flip_readout(w, Some(&self.noise), &mut rng)
            })
            .collect();
        Ok(ShotHistogram::from_outcomes(self.circuit.n_qubits(), words))
    }

    /// Mean and standard error of `⟨op⟩` over the first `trajectories` trajectories.
    pub fn mean_expectation(&self, op: &PauliSum, trajectories: u64) -> Result<(f64, f64)> {
        let values = (0..trajectories).into_par_iter().map(|k| op.expectation(&self.trajectory(k))).collect::<Result<Vec<f64>>>()?;
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Ok((mean, (var / n).sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{Gate, PauliString};
    use num_complex::Complex64 as C64;

    fn z(n: usize, q: usize) -> PauliSum {
        PauliSum::from_terms(n, vec![PauliString::from_sparse(n, &[(q, crate::qsim::Pauli::Z)], C64::new(1.0, 0.0)).unwrap()]).unwrap()
    }

    #[test]
    fn zero_state_always_reads_zero() {
        let s = Statevector::zero(3).unwrap();
        let h = sample(&s, 500, &Circuit::new(3), None, 1).unwrap();
        assert_eq!(h.count(0), 500);
        assert_eq!(h.shots(), 500);
    }

    #[test]
    fn plus_state_is_binomial() {
        let mut s = Statevector::zero(1).unwrap();
        s.apply_gate(&Gate::H(0)).unwrap();
        let shots = 2048u64;
        let h = sample(&s, shots, &Circuit::new(1), None, 7).unwrap();
        let sigma = (shots as f64 * 0.25).sqrt();
        assert!((h.count(0) as f64 - 1024.0).abs() < 5.0 * sigma);
        assert!((h.count(1) as f64 - 1024.0).abs() < 5.0 * sigma);
    }

    #[test]
    fn readout_error_rate() {
        let s = Statevector::zero(1).unwrap();
        let noise = NoiseModel::uniform(1, 0.0, 0.0, 0.05);
        let shots = 20000u64;
        let h = sample(&s, shots, &Circuit::new(1), Some(&noise), 3).unwrap();
        let f = h.bit_frequency(0);
        let sigma = (0.05 * 0.95 / shots as f64).sqrt();
        assert!((f - 0.05).abs() < 5.0 * sigma, "{f}");
    }

    #[test]
    fn exact_distribution_folds_confusion() {
        let s = Statevector::zero(2).unwrap();
        let noise = NoiseModel::uniform(2, 0.0, 0.0, 0.1);
        let d = exact_distribution(&s, &Circuit::new(2), Some(&noise)).unwrap();
        assert!((d.probabilities()[0] - 0.81).abs() < 1e-15);
        assert!((d.probabilities()[3] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_rates_match_noiseless() {
        let c = Circuit::from_gates(2, [Gate::H(0), Gate::cnot(0, 1), Gate::Ry(1, 0.4)]).unwrap();
        let sampler = run_noisy(&c, &NoiseModel::ideal(2), 5).unwrap();
        let mut ideal = Statevector::zero(2).unwrap();
        ideal.apply_circuit(&c).unwrap();
        assert_eq!(sampler.trajectory(0), ideal);
        assert_eq!(sampler.trajectory(17), ideal);
    }

    #[test]
    fn depolarizing_decay_of_identity_chain() {
        let p = 0.01;
        let id = Gate::Custom1 { qubit: 0, matrix: [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]] };
        let c = Circuit::from_gates(1, std::iter::repeat_n(id, 100)).unwrap();
        let noise = NoiseModel::uniform(1, p, 0.0, 0.0);
        let (mean, se) = run_noisy(&c, &noise, 11).unwrap().mean_expectation(&z(1, 0), 4000).unwrap();
        let expected = (1.0 - 4.0 * p / 3.0f64).powi(100);
        assert!((mean - expected).abs() < 5.0 * se, "{mean} vs {expected} (se {se})");
    }

    #[test]
    fn full_cnot_depolarization() {
        // A single CNOT with p = 1 leaves ⟨Z⟩ = −1/15 on each qubit (one of
        // 15 non-identity Paulis); repeating it drives ⟨Z⟩ to zero.
        let noise = NoiseModel::uniform(2, 0.0, 1.0, 0.0);
        let one = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let (m, se) = run_noisy(&one, &noise, 2).unwrap().mean_expectation(&z(2, 1), 6000).unwrap();
        assert!((m + 1.0 / 15.0).abs() < 5.0 * se, "{m}");
        let many = Circuit::from_gates(2, std::iter::repeat_n(Gate::cnot(0, 1), 10)).unwrap();
        let sampler = run_noisy(&many, &noise, 3).unwrap();
        for q in 0..2 {
            let (m, se) = sampler.mean_expectation(&z(2, q), 6000).unwrap();
            assert!(m.abs() < 5.0 * se + 1e-3, "qubit {q}: {m}");
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let c = Circuit::from_gates(2, [Gate::H(0), Gate::cnot(0, 1)]).unwrap();
        let noise = NoiseModel::uniform(2, 0.02, 0.05, 0.03);
        let a = run_noisy(&c, &noise, 9).unwrap().sample(&Circuit::new(2), 300).unwrap();
        let b = run_noisy(&c, &noise, 9).unwrap().sample(&Circuit::new(2), 300).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn histogram_text_is_little_endian() {
        let h = ShotHistogram::from_outcomes(4, [0b0011, 0b0011, 0b1100]);
        assert_eq!(h.to_text(), "# qubits 4 shots 3\n0011 2\n1100 1\n");
    }

    #[test]
    fn relaxation_decays_excited_state() {
        let mut noise = NoiseModel::from_calibration(&crate::qsim::DeviceCalibration::ibm5(), &[0]).unwrap();
        noise.channels = crate::qsim::NoiseChannels { gate: false, readout: false, relaxation: true };
        let id = Gate::Custom1 { qubit: 0, matrix: [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]] };
        // X then 400 idle pulses: 40.1 μs at 100 ns per gate
        let c = Circuit::from_gates(1, std::iter::once(Gate::X(0)).chain(std::iter::repeat_n(id, 400))).unwrap();
        let (m, se) = run_noisy(&c, &noise, 4).unwrap().mean_expectation(&z(1, 0), 4000).unwrap();
        let expected = 1.0 - 2.0 * (-40.1f64 / 46.0).exp();
        assert!((m - expected).abs() < 5.0 * se, "{m} vs {expected}");
    }
}
