//! Alternating quantum/classical optimization of paired two-electron states.
//!
//! The quantum step tunes the ansatz angles with Nelder-Mead against the
//! energy of the tomographically estimated geminal; the orbital step rotates
//! the orbitals with BFGS at fixed occupations and signs.

mod geminal;
mod optimize;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use geminal::{assemble_2dm_energy, GeminalState};
pub use optimize::{bfgs, nelder_mead, regular_simplex, BfgsOptions, NelderMeadOptions, OptimizeResult};

use crate::ansatz::{build_ansatz_circuit, AnsatzParameters, EntanglerStyle, QubitLayout};
use crate::chem::{apply_givens_rotations, compute_integrals, fci_two_electron, run_rhf, transform_integrals, BasisSet, GivensRotation, IntegralSet, MolecularGeometry, OrbitalCoefficients, ScfOptions};
use crate::mitigation::{estimate_affine_map, polytope_vertices, project_polytope, symmetry_verify_outcomes, vertex_preimages, AffineMap, MitigationConfig, OccupationPolytope};
use crate::qsim::{DeviceCalibration, NoiseChannels, NoiseModel, OutcomeDistribution, Outcomes, ShotHistogram};
use crate::tomography::{classical_phase_assignment, estimate_phases, measure_occupations, Executor, OccupationEstimate, PhaseEstimator, MAX_PREPARATIONS};
use crate::{seed, Error, Result};

/// Where the relative pair signs come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseMode {
    /// Two extra X/Y-basis circuits; ambiguous signs fall back to `Classical`.
    Measured,
    /// Signs of the analytic chain amplitudes at the current angles.
    Classical,
}

impl PhaseMode {
    /// Measured for one pair excitation, classical beyond.
    pub fn default_for(r: usize) -> Self {
        if r <= 2 {
            PhaseMode::Measured
        } else {
            PhaseMode::Classical
        }
    }
}

impl FromStr for PhaseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "measured" => Ok(PhaseMode::Measured),
            "classical" => Ok(PhaseMode::Classical),
            other => Err(Error::Configuration(format!("unknown phase mode {other:?}"))),
        }
    }
}

impl fmt::Display for PhaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseMode::Measured => "measured",
            PhaseMode::Classical => "classical",
        })
    }
}

/// Noise description independent of the register size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NoiseSource {
    /// Device calibration; `layout = None` maps qubit `i` to device qubit `i`.
    Calibration { calibration: DeviceCalibration, layout: Option<Vec<usize>>, channels: NoiseChannels },
    /// Same error rates on every qubit and every pair.
    Uniform { single: f64, two: f64, readout: f64 },
}

impl NoiseSource {
    pub fn model(&self, n_qubits: usize) -> Result<NoiseModel> {
        match self {
            NoiseSource::Calibration { calibration, layout, channels } => {
                let layout = layout.clone().unwrap_or_else(|| (0..n_qubits).collect());
                if layout.len() != n_qubits {
                    return Err(Error::LengthMismatch { expected: n_qubits, actual: layout.len() });
                }
                Ok(NoiseModel::from_calibration(calibration, &layout)?.with_channels(*channels))
            }
            NoiseSource::Uniform { single, two, readout } => Ok(NoiseModel::uniform(n_qubits, *single, *two, *readout)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    /// Shots per circuit; `None` uses exact outcome probabilities.
    pub shots: Option<u64>,
    pub noise: Option<NoiseSource>,
    pub mitigation: MitigationConfig,
    /// `None` picks [`PhaseMode::default_for`] the orbital count.
    pub phase_mode: Option<PhaseMode>,
    pub estimator: PhaseEstimator,
    pub style: EntanglerStyle,
    /// `None` picks the noiseless or noisy defaults from `shots`.
    pub nelder_mead: Option<NelderMeadOptions>,
    pub bfgs: BfgsOptions,
    /// Outer loop stops once successive energies differ by less (hartree).
    pub outer_threshold: f64,
    pub max_outer: usize,
    /// Independent Nelder-Mead runs per quantum step; the best is kept.
    pub restarts: usize,
    /// Independent repeats of the winning circuits pooled into the final
    /// state estimate of each quantum step.
    pub final_repeats: u64,
    pub seed: u64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig {
            shots: Some(2048),
            noise: None,
            mitigation: MitigationConfig::default(),
            phase_mode: None,
            estimator: PhaseEstimator::default(),
            style: EntanglerStyle::default(),
            nelder_mead: None,
            bfgs: BfgsOptions::default(),
            outer_threshold: 1e-3,
            max_outer: 10,
            restarts: 2,
            final_repeats: 16,
            seed: 0,
        }
    }
}

impl HybridConfig {
    pub fn nelder_mead_options(&self) -> NelderMeadOptions {
        self.nelder_mead.unwrap_or(if self.shots.is_some() { NelderMeadOptions::noisy() } else { NelderMeadOptions::noiseless() })
    }

    pub fn validate(&self) -> Result<()> {
        let nm = self.nelder_mead_options();
        let positive = [("simplex scale", nm.scale), ("Nelder-Mead ftol", nm.ftol), ("Nelder-Mead xtol", nm.xtol), ("BFGS step", self.bfgs.step), ("BFGS gtol", self.bfgs.gtol), ("outer threshold", self.outer_threshold)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Configuration(format!("{name} must be positive, got {v}")));
            }
        }
        if self.restarts < 1 {
            return Err(Error::Configuration("restarts must be at least 1".into()));
        }
        if self.final_repeats < 1 {
            return Err(Error::Configuration("final repeats must be at least 1".into()));
        }
        if self.shots == Some(0) {
            return Err(Error::Configuration("shots must be positive".into()));
        }
        Ok(())
    }
}

/// Everything needed to turn ansatz angles into a geminal estimate.
#[derive(Debug, Clone)]
pub struct TomographySetup {
    pub layout: QubitLayout,
    pub shots: Option<u64>,
    pub noise: Option<NoiseModel>,
    pub mitigation: MitigationConfig,
    pub polytope: Option<OccupationPolytope>,
    /// Fitted readout of the polytope vertices; `None` projects directly.
    pub affine: Option<AffineMap>,
    pub phase_mode: PhaseMode,
    pub estimator: PhaseEstimator,
    pub style: EntanglerStyle,
    /// Probability that an occupation shot is replaced by a uniformly random
    /// pair word, a synthetic channel shrinking occupations toward `1/r`.
    pub pair_mixing: f64,
}

/// Occupation-circuit outcomes before and after symmetry verification.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationData {
    pub raw: Outcomes,
    pub verified: Outcomes,
    pub retained: f64,
}

/// Mixes `outcomes` with the uniform distribution over pair words: each shot
/// is replaced with probability `c`, exact weights are blended.
pub fn mix_with_pairs(outcomes: &Outcomes, layout: &QubitLayout, c: f64, seed: u64) -> Result<Outcomes> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Configuration(format!("pair mixing {c} outside [0, 1]")));
    }
    let r = layout.r();
    match outcomes {
        Outcomes::Exact(d) => {
            let mut probs: Vec<f64> = d.probabilities().iter().map(|p| (1.0 - c) * p).collect();
            for p in 0..r {
                probs[layout.pair_word(p) as usize] += c / r as f64;
            }
            Ok(Outcomes::Exact(OutcomeDistribution::new(d.n_qubits(), probs)?))
        }
        Outcomes::Counts(h) => {
            let mut rng = seed::rng(seed, 0);
            let mut out = ShotHistogram::new(h.n_qubits());
            for (&w, &count) in h.counts() {
                for _ in 0..count {
                    let word = if rng.random::<f64>() < c { layout.pair_word(rng.random_range(0..r)) } else { w };
                    out.record(word, 1);
                }
            }
            Ok(Outcomes::Counts(out))
        }
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub energy: f64,
    pub state: GeminalState,
    /// Fraction of occupation shots kept by symmetry verification.
    pub retained: f64,
    pub preparations: usize,
    /// A measured sign was replaced by its classical value.
    pub phase_fallback: bool,
}

impl TomographySetup {
    pub fn new(config: &HybridConfig, r: usize) -> Result<Self> {
        let layout = QubitLayout::new(r)?;
        let noise = config.noise.as_ref().map(|n| n.model(layout.n_qubits())).transpose()?;
        let polytope = if config.mitigation.polytope { Some(polytope_vertices(r)?) } else { None };
        Ok(TomographySetup {
            layout,
            shots: config.shots,
            noise,
            mitigation: config.mitigation,
            polytope,
            affine: None,
            phase_mode: config.phase_mode.unwrap_or(PhaseMode::default_for(r)),
            estimator: config.estimator,
            style: config.style,
            pair_mixing: 0.0,
        })
    }

    pub fn executor(&self) -> Executor<'_> {
        Executor::new(self.shots, self.noise.as_ref())
    }

    /// Computational-basis outcomes of the ansatz at `params`.
    pub fn occupation_outcomes(&self, exec: &Executor, params: &AnsatzParameters, seed: u64) -> Result<OccupationData> {
        let circuit = build_ansatz_circuit(params, &self.layout, self.style)?;
        let (_, mut raw) = measure_occupations(exec, &circuit, seed)?;
        if self.pair_mixing > 0.0 {
            raw = mix_with_pairs(&raw, &self.layout, self.pair_mixing, seed::derive(seed, 99))?;
        }
        let (verified, retained) = if self.mitigation.symmetry.is_empty() { (raw.clone(), 1.0) } else { symmetry_verify_outcomes(&raw, self.mitigation.symmetry, &self.layout)? };
        Ok(OccupationData { raw, verified, retained })
    }

    /// Symmetry-verified spatial occupations (α/β mean).
    fn occupations(&self, exec: &Executor, params: &AnsatzParameters, seed: u64) -> Result<(Vec<f64>, f64)> {
        let data = self.occupation_outcomes(exec, params, seed)?;
        Ok((OccupationEstimate::from_outcomes(&data.verified).spatial(), data.retained))
    }

    /// Fits the affine map from the vertex preimages when the polytope
    /// projection is on and the register is noisy. A degenerate fit leaves
    /// the map unset and is reported back.
    pub fn calibrate(&mut self, seed: u64) -> Result<Option<String>> {
        if self.polytope.is_none() || (self.noise.is_none() && self.pair_mixing == 0.0) {
            return Ok(None);
        }
        let exec = self.executor();
        let mut scan = Vec::new();
        for (k, params) in vertex_preimages(&self.layout).into_iter().enumerate() {
            let (n, _) = self.occupations(&exec, &params, seed::derive(seed, k as u64))?;
            scan.push((params, n));
        }
        match estimate_affine_map(&scan, self.layout.r()) {
            Ok(map) => {
                self.affine = Some(map);
                Ok(None)
            }
            Err(Error::Degenerate(msg)) => Ok(Some(format!("affine calibration skipped: {msg}"))),
            Err(e) => Err(e),
        }
    }

    pub fn evaluate(&self, params: &AnsatzParameters, mo: &IntegralSet, seed: u64) -> Result<Evaluation> {
        let exec = self.executor();
        let (mut n, retained) = self.occupations(&exec, params, seed)?;
        if let Some(poly) = &self.polytope {
            n = project_polytope(&n, poly, self.affine.as_ref())?;
        }
        let classical = classical_phase_assignment(params);
        let (phases, phase_fallback) = match self.phase_mode {
            PhaseMode::Classical => (classical, false),
            PhaseMode::Measured => {
                let circuit = build_ansatz_circuit(params, &self.layout, self.style)?;
                let est = estimate_phases(&exec, &circuit, &self.layout, self.estimator, seed)?;
                (est.resolve_with(&classical), est.any_ambiguous())
            }
        };
        let preparations = exec.preparations();
        if preparations > MAX_PREPARATIONS {
            return Err(Error::Validation(format!("{preparations} circuit preparations exceed the cap of {MAX_PREPARATIONS}")));
        }
        let state = GeminalState::from_estimates(&n, phases.xi)?;
        let energy = assemble_2dm_energy(&state, mo)?;
        Ok(Evaluation { energy, state, retained, preparations, phase_fallback })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumStep {
    pub params: AnsatzParameters,
    pub state: GeminalState,
    pub energy: f64,
    /// Best objective value of each Nelder-Mead run.
    pub run_values: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub mean_retained: f64,
    pub phase_fallbacks: usize,
    pub preparations: usize,
}

/// Nelder-Mead over the ansatz angles, `restarts` runs chained from the
/// previous best, keeping the lowest. Under shots each run's best angles
/// are re-estimated from `final_repeats` pooled shot batches and the lowest
/// re-estimate wins.
pub fn quantum_step(mo: &IntegralSet, setup: &TomographySetup, config: &HybridConfig, start: &AnsatzParameters, seed: u64) -> Result<QuantumStep> {
    let opts = config.nelder_mead_options();
    let layout = setup.layout;
    let mut calls = 0u64;
    let mut retained_sum = 0.0;
    let mut fallbacks = 0;
    let mut preparations = 0;
    let mut runs: Vec<OptimizeResult> = Vec::new();
    let mut x0 = start.values().to_vec();
    for _ in 0..config.restarts {
        let res = nelder_mead(
            |t| {
                calls += 1;
                let ev = setup.evaluate(&AnsatzParameters::new(t.to_vec(), &layout)?, mo, seed::derive(seed, calls))?;
                retained_sum += ev.retained;
                fallbacks += usize::from(ev.phase_fallback);
                preparations = preparations.max(ev.preparations);
                Ok(ev.energy)
            },
            &x0,
            &opts,
        )?;
        x0 = runs.iter().chain([&res]).min_by(|a, b| a.f.total_cmp(&b.f)).unwrap().x.clone();
        runs.push(res);
    }
    let (params, final_eval) = if config.shots.is_some() {
        // rank the runs by pooled re-estimates rather than their noisy minima
        let pooled = TomographySetup { shots: setup.shots.map(|s| s * config.final_repeats), ..setup.clone() };
        let mut best: Option<(AnsatzParameters, Evaluation)> = None;
        for (k, run) in runs.iter().enumerate() {
            let p = AnsatzParameters::new(run.x.clone(), &layout)?;
            let ev = pooled.evaluate(&p, mo, seed::derive(seed, u64::MAX - k as u64))?;
            if best.as_ref().is_none_or(|(_, b)| ev.energy < b.energy) {
                best = Some((p, ev));
            }
        }
        best.expect("restarts ≥ 1")
    } else {
        let run = runs.iter().min_by(|a, b| a.f.total_cmp(&b.f)).expect("restarts ≥ 1");
        let p = AnsatzParameters::new(run.x.clone(), &layout)?;
        let ev = setup.evaluate(&p, mo, 0)?;
        (p, ev)
    };
    let energy = final_eval.energy;
    Ok(QuantumStep {
        params,
        state: final_eval.state,
        energy,
        run_values: runs.iter().map(|r| r.f).collect(),
        iterations: runs.iter().map(|r| r.iterations).sum(),
        evaluations: runs.iter().map(|r| r.evaluations).sum(),
        converged: runs.iter().any(|r| r.converged),
        mean_retained: if calls > 0 { retained_sum / calls as f64 } else { 1.0 },
        phase_fallbacks: fallbacks,
        preparations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalStep {
    pub orbitals: OrbitalCoefficients,
    pub energy: f64,
    pub angles: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Plane rotations over all orbital pairs `p < q` in lexicographic order.
pub fn givens_sequence(angles: &[f64], r: usize) -> Result<Vec<GivensRotation>> {
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|p| (p + 1..r).map(move |q| (p, q))).collect();
    if angles.len() != pairs.len() {
        return Err(Error::LengthMismatch { expected: pairs.len(), actual: angles.len() });
    }
    Ok(pairs.iter().zip(angles).map(|(&(p, q), &t)| GivensRotation::new(p, q, t)).collect())
}

/// BFGS over Givens angles at fixed occupations and signs.
pub fn orbital_step(ints_ao: &IntegralSet, c: &OrbitalCoefficients, state: &GeminalState, opts: &BfgsOptions) -> Result<OrbitalStep> {
    let r = c.rank();
    let energy_at = |angles: &[f64]| -> Result<f64> {
        let rotated = apply_givens_rotations(c, &givens_sequence(angles, r)?)?;
        assemble_2dm_energy(state, &transform_integrals(ints_ao, &rotated)?)
    };
    let res = bfgs(energy_at, &vec![0.0; r * (r - 1) / 2], opts)?;
    let orbitals = apply_givens_rotations(c, &givens_sequence(&res.x, r)?)?;
    Ok(OrbitalStep { orbitals, energy: res.f, angles: res.x, iterations: res.iterations, converged: res.converged })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub quantum_energy: f64,
    pub orbital_energy: f64,
    pub nm_evaluations: usize,
    pub bfgs_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationReport {
    pub config: MitigationConfig,
    /// Mean fraction of occupation shots surviving symmetry verification.
    pub mean_retained: f64,
    pub affine_residual: Option<f64>,
    pub phase_fallbacks: usize,
    pub preparations_per_evaluation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Bond or side length (bohr).
    pub parameter: f64,
    pub label: String,
    pub energy: f64,
    pub fci_energy: f64,
    pub rhf_energy: f64,
    pub outer_iterations: usize,
    pub nm_evaluations: usize,
    pub converged: bool,
    pub flags: Vec<String>,
    pub state: GeminalState,
    pub params: Vec<f64>,
    pub trajectory: Vec<OuterRecord>,
    pub mitigation: MitigationReport,
}

impl CurvePoint {
    pub fn error_mhartree(&self) -> f64 {
        (self.energy - self.fci_energy).abs() * 1e3
    }
}

/// Full alternation for one geometry, starting from RHF orbitals and `t = 0`.
pub fn run_hybrid(geometry: &MolecularGeometry, parameter: f64, config: &HybridConfig) -> Result<CurvePoint> {
    config.validate()?;
    let ints = compute_integrals(geometry, &BasisSet::sto3g(geometry)?)?;
    let rhf = run_rhf(&ints, geometry.electron_count(), ScfOptions::default())?;
    let fci = fci_two_electron(&ints, &rhf.orbitals)?;
    let r = ints.rank();
    let mut setup = TomographySetup::new(config, r)?;
    let mut flags = Vec::new();
    if let Some(note) = setup.calibrate(seed::derive(config.seed, u64::MAX))? {
        flags.push(note);
    }

    let mut c = rhf.orbitals.clone();
    let mut params = AnsatzParameters::zeros(&setup.layout);
    let mut state = GeminalState::new((0..r).map(|p| if p == 0 { 1.0 } else { 0.0 }).collect(), vec![1.0; r - 1])?;
    let mut energy = assemble_2dm_energy(&state, &transform_integrals(&ints, &c)?)?;
    let mut trajectory = Vec::new();
    let mut converged = false;
    let (mut retained, mut fallbacks, mut preparations, mut evaluations) = (0.0, 0, 0, 0);
    for it in 0..config.max_outer {
        let mo = transform_integrals(&ints, &c)?;
        let q = quantum_step(&mo, &setup, config, &params, seed::derive(config.seed, it as u64))?;
        if !q.converged {
            flags.push(format!("outer {it}: Nelder-Mead hit {} iterations", config.nelder_mead_options().max_iterations));
        }
        let o = orbital_step(&ints, &c, &q.state, &config.bfgs)?;
        if !o.converged {
            flags.push(format!("outer {it}: BFGS stopped early"));
        }
        retained += q.mean_retained;
        fallbacks += q.phase_fallbacks;
        preparations = preparations.max(q.preparations);
        evaluations += q.evaluations;
        trajectory.push(OuterRecord { quantum_energy: q.energy, orbital_energy: o.energy, nm_evaluations: q.evaluations, bfgs_iterations: o.iterations });
        let previous = energy;
        c = o.orbitals;
        params = q.params;
        state = q.state;
        energy = o.energy;
        if it > 0 && (previous - energy).abs() < config.outer_threshold {
            converged = true;
            break;
        }
    }
    if !converged {
        flags.push(format!("outer loop not converged after {} iterations", config.max_outer));
    }
    let outer = trajectory.len();
    Ok(CurvePoint {
        parameter,
        label: geometry.label().to_string(),
        energy,
        fci_energy: fci.energy,
        rhf_energy: rhf.energy,
        outer_iterations: outer,
        nm_evaluations: evaluations,
        converged,
        flags,
        state,
        params: params.values().to_vec(),
        trajectory,
        mitigation: MitigationReport {
            config: config.mitigation,
            mean_retained: if outer > 0 { retained / outer as f64 } else { 1.0 },
            affine_residual: setup.affine.as_ref().map(|m| m.residual),
            phase_fallbacks: fallbacks,
            preparations_per_evaluation: preparations,
        },
    })
}

/// Seed of scan point `index`.
pub fn point_seed(root: u64, index: usize) -> u64 {
    seed::derive(root, index as u64)
}

/// Independent [`run_hybrid`] per scan value, in parallel, ordered as given.
pub fn dissociation_curve<G>(template: G, values: &[f64], config: &HybridConfig) -> Result<Vec<CurvePoint>>
where
    G: Fn(f64) -> Result<MolecularGeometry> + Sync,
{
    if values.is_empty() {
        return Err(Error::Configuration("a curve needs at least one scan value".into()));
    }
    values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let cfg = HybridConfig { seed: point_seed(config.seed, i), ..config.clone() };
            run_hybrid(&template(v)?, v, &cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::FciResult;

    fn h2_setup(r: f64) -> (IntegralSet, OrbitalCoefficients, FciResult) {
        let geom = MolecularGeometry::h2(r).unwrap();
        let ints = compute_integrals(&geom, &BasisSet::sto3g(&geom).unwrap()).unwrap();
        let rhf = run_rhf(&ints, 2, ScfOptions::default()).unwrap();
        let fci = fci_two_electron(&ints, &rhf.orbitals).unwrap();
        (ints, rhf.orbitals, fci)
    }

    fn exact_config() -> HybridConfig {
        HybridConfig { shots: None, ..Default::default() }
    }

    #[test]
    fn objective_at_zero_is_rhf() {
        let (ints, c, _) = h2_setup(1.4);
        let rhf = run_rhf(&ints, 2, ScfOptions::default()).unwrap();
        let mo = transform_integrals(&ints, &c).unwrap();
        let setup = TomographySetup::new(&exact_config(), 2).unwrap();
        let ev = setup.evaluate(&AnsatzParameters::zeros(&setup.layout), &mo, 1).unwrap();
        assert!((ev.energy - rhf.energy).abs() < 1e-10);
        assert_eq!(ev.preparations, 3);
        assert!(ev.phase_fallback);
    }

    #[test]
    fn quantum_step_matches_brute_force_scan() {
        let (ints, c, _) = h2_setup(1.4);
        let mo = transform_integrals(&ints, &c).unwrap();
        let cfg = exact_config();
        let setup = TomographySetup::new(&cfg, 2).unwrap();
        let f = |t: f64| setup.evaluate(&AnsatzParameters::new(vec![t], &setup.layout).unwrap(), &mo, 0).unwrap().energy;
        let scan_min = (0..=4000).map(|k| f(-std::f64::consts::PI + k as f64 * std::f64::consts::PI / 4000.0)).fold(f64::INFINITY, f64::min);
        let q = quantum_step(&mo, &setup, &cfg, &AnsatzParameters::zeros(&setup.layout), 3).unwrap();
        assert!(q.converged);
        assert!((q.energy - scan_min).abs() < 1e-3);
        assert!(q.energy <= scan_min + 1e-8);
        // selection rule over restarts
        let min_run = q.run_values.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(q.energy, min_run);
        assert_eq!(q.run_values.len(), 2);
    }

    #[test]
    fn orbital_step_stationary_at_natural_orbitals() {
        let (ints, c, fci) = h2_setup(1.4);
        let (u, g) = fci.natural_geminal();
        let natural = OrbitalCoefficients(c.matrix() * u);
        let state = GeminalState::from_amplitudes(&g).unwrap();
        let o = orbital_step(&ints, &natural, &state, &BfgsOptions::default()).unwrap();
        assert!((o.energy - fci.energy).abs() < 1e-8);
        assert!(o.angles.iter().all(|a| a.abs() < 1e-4));
    }

    #[test]
    fn orbital_step_undoes_small_rotation() {
        let geom = MolecularGeometry::h3_plus(1.8).unwrap();
        let ints = compute_integrals(&geom, &BasisSet::sto3g(&geom).unwrap()).unwrap();
        let rhf = run_rhf(&ints, 2, ScfOptions::default()).unwrap();
        let fci = fci_two_electron(&ints, &rhf.orbitals).unwrap();
        let (u, g) = fci.natural_geminal();
        let natural = OrbitalCoefficients(rhf.orbitals.matrix() * u);
        let state = GeminalState::from_amplitudes(&g).unwrap();
        let kicked = apply_givens_rotations(&natural, &givens_sequence(&[0.07, -0.05, 0.03], 3).unwrap()).unwrap();
        let start = assemble_2dm_energy(&state, &transform_integrals(&ints, &kicked).unwrap()).unwrap();
        let o = orbital_step(&ints, &kicked, &state, &BfgsOptions::default()).unwrap();
        assert!(start > fci.energy + 1e-5);
        assert!((o.energy - fci.energy).abs() < 1e-6, "{} vs {}", o.energy, fci.energy);
    }

    #[test]
    fn orbital_step_from_rhf_orbitals_reaches_fci() {
        let (ints, c, fci) = h2_setup(1.4);
        let (u, g) = fci.natural_geminal();
        // amplitudes in the RHF basis order
        let amps: Vec<f64> = (0..2).map(|i| (0..2).map(|k| u[(i, k)] * u[(i, k)] * g[k]).sum()).collect();
        let state = GeminalState::from_amplitudes(&amps).unwrap();
        let start = assemble_2dm_energy(&state, &transform_integrals(&ints, &c).unwrap()).unwrap();
        let o = orbital_step(&ints, &c, &state, &BfgsOptions::default()).unwrap();
        assert!(o.energy <= start + 1e-12);
        assert!((o.energy - fci.energy).abs() < 1e-6);
    }

    #[test]
    fn pair_mixing_contracts_occupations() {
        let cfg = exact_config();
        let mut setup = TomographySetup::new(&cfg, 3).unwrap();
        setup.pair_mixing = 0.3;
        let params = AnsatzParameters::new(vec![-0.4, -1.1], &setup.layout).unwrap();
        let ideal: Vec<f64> = crate::ansatz::chain_amplitudes(&params).iter().map(|g| g * g).collect();
        let (n, _) = setup.occupations(&setup.executor(), &params, 0).unwrap();
        for (a, b) in n.iter().zip(&ideal) {
            assert!((a - (0.7 * b + 0.1)).abs() < 1e-12);
        }
        let shots = TomographySetup { shots: Some(20000), ..setup.clone() };
        let data = shots.occupation_outcomes(&shots.executor(), &params, 4).unwrap();
        assert_eq!(data.raw.shots(), Some(20000));
        let occ = OccupationEstimate::from_outcomes(&data.raw).spatial();
        for (a, b) in occ.iter().zip(&n) {
            assert!((a - b).abs() < 0.02);
        }
        assert!(mix_with_pairs(&data.raw, &setup.layout, 1.5, 0).is_err());
    }

    #[test]
    fn givens_sequence_length_checked() {
        assert_eq!(givens_sequence(&[0.1, 0.2, 0.3], 3).unwrap().len(), 3);
        assert!(givens_sequence(&[0.1], 3).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(HybridConfig::default().validate().is_ok());
        assert!(HybridConfig { restarts: 0, ..Default::default() }.validate().is_err());
        assert!(HybridConfig { outer_threshold: 0.0, ..Default::default() }.validate().is_err());
        assert!(HybridConfig { bfgs: BfgsOptions { step: -1.0, ..Default::default() }, ..Default::default() }.validate().is_err());
        assert_eq!("classical".parse::<PhaseMode>().unwrap(), PhaseMode::Classical);
        assert!("both".parse::<PhaseMode>().is_err());
        assert_eq!(PhaseMode::default_for(2), PhaseMode::Measured);
        assert_eq!(PhaseMode::default_for(3), PhaseMode::Classical);
    }
}
