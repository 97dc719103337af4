//! Drivers behind the command-line tool: dissociation curves, occupation
//! scans over the ansatz angles, V tables and the self-test suite.
//!
//! Every driver returns a report that renders to plain whitespace-separated
//! tables (gnuplot-ready, `#` header with version, seed and a one-line JSON
//! config echo) and a JSON sidecar. Output depends only on config and seed.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{ansatz_state, chain_amplitudes, generic_pair_gate, jordan_wigner_hamiltonian, optimized_pair_gate, AnsatzParameters, EntanglerStyle, QubitLayout};
use crate::chem::{compute_integrals, fci_two_electron, run_rhf, transform_integrals, BasisSet, IntegralSet, MolecularGeometry, ScfOptions};
use crate::hybrid::{assemble_2dm_energy, dissociation_curve, run_hybrid, CurvePoint, GeminalState, HybridConfig, NoiseSource, PhaseMode, TomographySetup};
use crate::mitigation::{hull_area, percentile_interval, polytope_vertices, project_polytope, symmetry_verify, v_metric, v_metric_bootstrap, AffineMap, MitigationConfig, SymmetrySpec, VEstimate};
use crate::qsim::{run_noisy, unitary_distance, DeviceCalibration, NoiseModel, Outcomes, ShotHistogram};
use crate::tomography::OccupationEstimate;
use crate::{seed, Error, Result, VERSION};

/// Built-in molecules or a geometry read from file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum System {
    /// Scanned by bond length (bohr).
    H2,
    /// Equilateral triangle scanned by side length (bohr).
    H3Plus,
    /// Scanned by a uniform coordinate scale factor.
    Custom(MolecularGeometry),
}

impl System {
    pub fn name(&self) -> String {
        match self {
            System::H2 => "h2".into(),
            System::H3Plus => "h3plus".into(),
            System::Custom(g) if !g.label().is_empty() => g.label().split_whitespace().collect::<Vec<_>>().join("_"),
            System::Custom(_) => "custom".into(),
        }
    }

    pub fn geometry(&self, x: f64) -> Result<MolecularGeometry> {
        match self {
            System::H2 => MolecularGeometry::h2(x),
            System::H3Plus => MolecularGeometry::h3_plus(x),
            System::Custom(g) => g.scaled(x),
        }
    }

    pub fn default_scan(&self) -> ScanRange {
        match self {
            System::H2 => ScanRange { start: 0.5, stop: 5.0, points: 12 },
            System::H3Plus => ScanRange { start: 1.2, stop: 4.0, points: 8 },
            System::Custom(_) => ScanRange { start: 1.0, stop: 1.0, points: 1 },
        }
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h2" => Ok(System::H2),
            "h3plus" | "h3+" => Ok(System::H3Plus),
            other => Err(Error::Configuration(format!("unknown system {other:?} (expected h2 or h3plus)"))),
        }
    }
}

/// `start:stop:points`, evenly spaced and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl ScanRange {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        (0..self.points).map(|k| self.start + (self.stop - self.start) * k as f64 / (self.points - 1) as f64).collect()
    }
}

impl FromStr for ScanRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Configuration(format!("scan range {s:?} is not start:stop:points"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if points == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        Ok(ScanRange { start, stop, points })
    }
}

impl fmt::Display for ScanRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.points)
    }
}

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.contents)?;
            Ok(path)
        })
        .collect()
}

fn header(command: &str, seed: u64, config: &impl Serialize, columns: &str) -> Result<String> {
    let echo = serde_json::to_string(config).map_err(|e| Error::Validation(e.to_string()))?;
    Ok(format!("# pairvqe {VERSION}\n# command {command}\n# seed {seed}\n# config {echo}\n# columns {columns}\n"))
}

fn json(value: &impl Serialize) -> Result<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Error::Validation(e.to_string()))
}

fn row(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.10}")).collect::<Vec<_>>().join(" ")
}

/// The π/`intervals` grid over `[−π, 0]`.
pub fn angle_grid(intervals: usize) -> Vec<f64> {
    (0..=intervals).map(|k| -PI + PI * k as f64 / intervals as f64).collect()
}

// ---------------------------------------------------------------- curves

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRun {
    pub system: System,
    pub scan: ScanRange,
    pub config: HybridConfig,
    pub points: Vec<CurvePoint>,
}

pub fn run_curve(system: &System, scan: &ScanRange, config: &HybridConfig) -> Result<CurveRun> {
    let points = dissociation_curve(|x| system.geometry(x), &scan.values(), config)?;
    Ok(CurveRun { system: system.clone(), scan: *scan, config: config.clone(), points })
}

impl CurveRun {
    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    pub fn max_error_mhartree(&self) -> f64 {
        self.points.iter().map(CurvePoint::error_mhartree).fold(0.0, f64::max)
    }

    fn echo(&self) -> serde_json::Value {
        serde_json::json!({ "system": self.system.name(), "scan": self.scan.to_string(), "hybrid": self.config })
    }

    pub fn table(&self) -> Result<String> {
        let mut out = header("curve", self.config.seed, &self.echo(), "R E_hybrid E_FCI E_RHF dE_mH outer flags")?;
        for p in &self.points {
            let flags = if p.flags.is_empty() { "-".to_string() } else { p.flags.join("; ").replace(' ', "_") };
            out += &format!("{} {:.6} {} {}\n", row(&[p.parameter, p.energy, p.fci_energy, p.rhf_energy]), p.error_mhartree(), p.outer_iterations, flags);
        }
        Ok(out)
    }

    /// Signed `E_hybrid − E_FCI` in millihartree.
    pub fn inset_table(&self) -> Result<String> {
        let mut out = header("curve", self.config.seed, &self.echo(), "R dE_mH")?;
        for p in &self.points {
            out += &format!("{:.10} {:.6}\n", p.parameter, (p.energy - p.fci_energy) * 1e3);
        }
        Ok(out)
    }

    pub fn artifacts(&self) -> Result<Vec<Artifact>> {
        let stem = format!("curve_{}", self.system.name());
        Ok(vec![
            Artifact { name: format!("{stem}.dat"), contents: self.table()? },
            Artifact { name: format!("{stem}_inset.dat"), contents: self.inset_table()? },
            Artifact { name: format!("{stem}.json"), contents: json(self)? },
        ])
    }
}

// ---------------------------------------------------------------- scans

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Spatial orbitals (2 or 3).
    pub r: usize,
    /// Grid intervals over `[−π, 0]` per angle.
    pub intervals: usize,
    pub shots: Option<u64>,
    pub noise: Option<NoiseSource>,
    pub symmetry: SymmetrySpec,
    /// Synthetic shrink of occupations toward `1/r` (see `TomographySetup::pair_mixing`).
    pub contraction: f64,
    pub style: EntanglerStyle,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { r: 2, intervals: 10, shots: Some(2048), noise: None, symmetry: SymmetrySpec::BOTH, contraction: 0.0, style: EntanglerStyle::default(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub t: Vec<f64>,
    /// Spin-orbital occupations in qubit order.
    pub raw: Vec<f64>,
    pub raw_stderr: Vec<f64>,
    pub verified: Vec<f64>,
    pub retained: f64,
    /// Projected α and β half-sets, orbital order.
    pub projected: [Vec<f64>; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullRatios {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRun {
    pub config: ScanConfig,
    pub points: Vec<ScanPoint>,
    pub affine: Option<AffineMap>,
    pub calibration_note: Option<String>,
    /// V of the raw α and β half-sets (r = 2).
    pub v_raw: Option<[f64; 2]>,
    pub v_verified: Option<[f64; 2]>,
    /// Hull areas of the sorted `(n₁, n₂)` points relative to the hull of
    /// the noiseless occupations on the same grid (r = 3).
    pub hull_raw: Option<HullRatios>,
    pub hull_verified: Option<HullRatios>,
    pub hull_projected: Option<HullRatios>,
    /// Largest distance of a raw sorted half-set from the polytope, in
    /// standard errors of that point (0 when inside).
    pub max_infeasibility_sigma: f64,
}

fn half(n: &[f64], beta: bool) -> Vec<f64> {
    n.iter().skip(usize::from(beta)).step_by(2).copied().collect()
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn run_scan(cfg: &ScanConfig) -> Result<ScanRun> {
    if !(2..=3).contains(&cfg.r) {
        return Err(Error::Configuration(format!("occupation scans support r = 2 or 3, got {}", cfg.r)));
    }
    if cfg.intervals < 2 {
        return Err(Error::Configuration("scan grid needs at least 2 intervals".into()));
    }
    let hybrid = HybridConfig {
        shots: cfg.shots,
        noise: cfg.noise.clone(),
        mitigation: MitigationConfig { symmetry: cfg.symmetry, polytope: true },
        style: cfg.style,
        seed: cfg.seed,
        ..Default::default()
    };
    let mut setup = TomographySetup::new(&hybrid, cfg.r)?;
    setup.pair_mixing = cfg.contraction;
    let calibration_note = setup.calibrate(seed::derive(cfg.seed, u64::MAX))?;
    let layout = setup.layout;
    let poly = polytope_vertices(cfg.r)?;
    let grid = angle_grid(cfg.intervals);
    let ts: Vec<Vec<f64>> = if cfg.r == 2 { grid.iter().map(|&t| vec![t]).collect() } else { grid.iter().flat_map(|&a| grid.iter().map(move |&b| vec![a, b])).collect() };

    let points = ts
        .par_iter()
        .enumerate()
        .map(|(k, t)| -> Result<ScanPoint> {
            let params = AnsatzParameters::new(t.clone(), &layout)?;
            let exec = setup.executor();
            let data = setup.occupation_outcomes(&exec, &params, seed::derive(cfg.seed, k as u64))?;
            let raw = OccupationEstimate::from_outcomes(&data.raw);
            let verified = OccupationEstimate::from_outcomes(&data.verified);
            let projected = [false, true].map(|b| project_polytope(&half(&verified.n, b), &poly, setup.affine.as_ref()));
            let [pa, pb] = projected;
            Ok(ScanPoint { t: t.clone(), raw: raw.n, raw_stderr: raw.stderr, verified: verified.n, retained: data.retained, projected: [pa?, pb?] })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut max_sigma: f64 = 0.0;
    for p in &points {
        for beta in [false, true] {
            let x = sorted_desc(half(&p.raw, beta));
            let proj = poly.project_sorted(&x);
            let d = x.iter().zip(&proj).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let s = half(&p.raw_stderr, beta).into_iter().fold(0.0, f64::max);
            let sigma = if d <= 1e-12 {
                0.0
            } else if s > 0.0 {
                d / s
            } else {
                f64::INFINITY
            };
            max_sigma = max_sigma.max(sigma);
        }
    }

    let ideal_area = hull_area(
        &ts.iter()
            .map(|t| {
                let n = sorted_desc(chain_amplitudes(&AnsatzParameters::new(t.clone(), &layout)?).iter().map(|g| g * g).collect());
                Ok((n[0], n[1]))
            })
            .collect::<Result<Vec<_>>>()?,
    );
    let hull = |get: &dyn Fn(&ScanPoint, bool) -> Vec<f64>| -> Result<HullRatios> {
        let area = |beta| hull_area(&points.iter().map(|p| sorted_desc(get(p, beta))).map(|n| (n[0], n[1])).collect::<Vec<_>>());
        Ok(HullRatios { alpha: area(false) / ideal_area, beta: area(true) / ideal_area })
    };
    let v = |get: &dyn Fn(&ScanPoint) -> &Vec<f64>| -> Result<[f64; 2]> {
        let col = |q: usize| points.iter().map(|p| get(p)[q]).collect::<Vec<f64>>();
        Ok([v_metric(&grid, &col(0), &col(2))?, v_metric(&grid, &col(1), &col(3))?])
    };
    let (v_raw, v_verified, hull_raw, hull_verified, hull_projected) = if cfg.r == 2 {
        (Some(v(&|p| &p.raw)?), Some(v(&|p| &p.verified)?), None, None, None)
    } else {
        (None, None, Some(hull(&|p, b| half(&p.raw, b))?), Some(hull(&|p, b| half(&p.verified, b))?), Some(hull(&|p, b| p.projected[usize::from(b)].clone())?))
    };
    Ok(ScanRun { config: cfg.clone(), points, affine: setup.affine.clone(), calibration_note, v_raw, v_verified, hull_raw, hull_verified, hull_projected, max_infeasibility_sigma: max_sigma })
}

impl ScanRun {
    fn stem(&self) -> String {
        format!("scan_r{}", self.config.r)
    }

    fn t_columns(&self) -> String {
        (1..self.config.r).map(|k| format!("t{k}")).collect::<Vec<_>>().join(" ")
    }

    fn occupation_columns(&self) -> String {
        (0..self.config.r).flat_map(|p| [format!("n{p}a"), format!("n{p}b")]).collect::<Vec<_>>().join(" ")
    }

    fn occupation_table(&self, get: impl Fn(&ScanPoint) -> Vec<f64>, extra: &str, extra_of: impl Fn(&ScanPoint) -> f64) -> Result<String> {
        let mut columns = format!("{} {}", self.t_columns(), self.occupation_columns());
        if !extra.is_empty() {
            columns += &format!(" {extra}");
        }
        let mut out = header("scan", self.config.seed, &self.config, &columns)?;
        for p in &self.points {
            let mut vals = p.t.clone();
            vals.extend(get(p));
            if !extra.is_empty() {
                vals.push(extra_of(p));
            }
            out += &row(&vals);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        if let (Some(r), Some(v)) = (self.v_raw, self.v_verified) {
            s += &format!("V raw alpha {:.4} beta {:.4}\nV verified alpha {:.4} beta {:.4}\n", r[0], r[1], v[0], v[1]);
        }
        for (name, h) in [("raw", self.hull_raw), ("verified", self.hull_verified), ("projected", self.hull_projected)] {
            if let Some(h) = h {
                s += &format!("hull ratio {name} alpha {:.4} beta {:.4}\n", h.alpha, h.beta);
            }
        }
        s += &format!("max infeasibility {:.3} sigma\n", self.max_infeasibility_sigma);
        if let Some(m) = &self.affine {
            s += &format!("affine calibration residual {:.3e} over {} points\n", m.residual, m.points);
        }
        if let Some(n) = &self.calibration_note {
            s += &format!("note: {n}\n");
        }
        s
    }

    pub fn artifacts(&self) -> Result<Vec<Artifact>> {
        let stem = self.stem();
        let r = self.config.r;
        let mut polytope = header("scan", self.config.seed, &self.config, &(0..r).map(|p| format!("v{p}")).collect::<Vec<_>>().join(" "))?;
        let poly = polytope_vertices(r)?;
        for v in poly.vertices().iter().chain(poly.vertices().first()) {
            polytope += &row(v);
            polytope.push('\n');
        }
        let projected_columns = format!("{} {} {}", self.t_columns(), (0..r).map(|p| format!("n{p}a")).collect::<Vec<_>>().join(" "), (0..r).map(|p| format!("n{p}b")).collect::<Vec<_>>().join(" "));
        let mut projected = header("scan", self.config.seed, &self.config, &projected_columns)?;
        for p in &self.points {
            let mut vals = p.t.clone();
            vals.extend(&p.projected[0]);
            vals.extend(&p.projected[1]);
            projected += &row(&vals);
            projected.push('\n');
        }
        let mut summary = header("scan", self.config.seed, &self.config, "report")?;
        summary += &self.summary();
        Ok(vec![
            Artifact { name: format!("{stem}_raw.dat"), contents: self.occupation_table(|p| p.raw.clone(), "", |_| 0.0)? },
            Artifact { name: format!("{stem}_verified.dat"), contents: self.occupation_table(|p| p.verified.clone(), "retained", |p| p.retained)? },
            Artifact { name: format!("{stem}_projected.dat"), contents: projected },
            Artifact { name: format!("{stem}_polytope.dat"), contents: polytope },
            Artifact { name: format!("{stem}_summary.txt"), contents: summary },
            Artifact { name: format!("{stem}.json"), contents: json(self)? },
        ])
    }
}

// ---------------------------------------------------------------- V table

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VTableConfig {
    pub shots: u64,
    pub noise: Option<NoiseSource>,
    pub intervals: usize,
    pub resamples: usize,
    /// Independent repetitions of the whole scan for the ordering analysis.
    pub seeds: usize,
    pub style: EntanglerStyle,
    pub seed: u64,
}

impl Default for VTableConfig {
    fn default() -> Self {
        VTableConfig { shots: 2048, noise: None, intervals: 10, resamples: 1000, seeds: 1, style: EntanglerStyle::default(), seed: 0 }
    }
}

pub const SYMMETRY_ROWS: [SymmetrySpec; 4] = [SymmetrySpec::NONE, SymmetrySpec::N, SymmetrySpec::SZ, SymmetrySpec::BOTH];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VRow {
    pub symmetry: SymmetrySpec,
    pub alpha: VEstimate,
    pub beta: VEstimate,
    pub retained: f64,
}

/// Mean over seeds of `V(better) − V(worse)` with a bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub better: SymmetrySpec,
    pub worse: SymmetrySpec,
    pub beta: bool,
    pub mean_difference: f64,
    pub lo: f64,
    pub hi: f64,
}

impl OrderingCheck {
    pub fn holds(&self) -> bool {
        self.lo > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VTable {
    pub config: VTableConfig,
    pub rows: Vec<VRow>,
    /// `per_seed[s][row] = [V_α, V_β]`.
    pub per_seed: Vec<Vec<[f64; 2]>>,
    pub ordering: Vec<OrderingCheck>,
}

/// Occupation histograms of the r = 2 scan.
pub fn scan_histograms(cfg: &VTableConfig, seed: u64) -> Result<Vec<ShotHistogram>> {
    let hybrid = HybridConfig { shots: Some(cfg.shots), noise: cfg.noise.clone(), style: cfg.style, ..Default::default() };
    let setup = TomographySetup::new(&hybrid, 2)?;
    angle_grid(cfg.intervals)
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let params = AnsatzParameters::new(vec![t], &setup.layout)?;
            match setup.occupation_outcomes(&setup.executor(), &params, seed::derive(seed, k as u64))?.raw {
                Outcomes::Counts(h) => Ok(h),
                Outcomes::Exact(_) => Err(Error::Configuration("V tables need finite shots".into())),
            }
        })
        .collect()
}

fn filtered(hists: &[ShotHistogram], spec: SymmetrySpec, layout: &QubitLayout) -> Result<(Vec<ShotHistogram>, f64)> {
    let mut out = Vec::with_capacity(hists.len());
    let mut kept = 0.0;
    for h in hists {
        let (f, frac) = symmetry_verify(h, spec, layout)?;
        kept += frac;
        out.push(f);
    }
    Ok((out, kept / hists.len() as f64))
}

fn point_v(grid: &[f64], hists: &[ShotHistogram]) -> Result<[f64; 2]> {
    let col = |q: usize| hists.iter().map(|h| h.bit_frequency(q)).collect::<Vec<f64>>();
    Ok([v_metric(grid, &col(0), &col(2))?, v_metric(grid, &col(1), &col(3))?])
}

/// Bootstrap over seeds of the mean paired difference.
pub fn seed_bootstrap(diffs: &[f64], resamples: usize, seed: u64) -> (f64, f64, f64) {
    let n = diffs.len();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let mut rng = seed::rng(seed, 0);
    let mut means: Vec<f64> = (0..resamples).map(|_| (0..n).map(|_| diffs[rng.random_range(0..n)]).sum::<f64>() / n as f64).collect();
    means.sort_by(f64::total_cmp);
    let (lo, hi) = percentile_interval(&means, 0.95);
    (mean, lo, hi)
}

pub fn run_vtable(cfg: &VTableConfig) -> Result<VTable> {
    if cfg.seeds == 0 {
        return Err(Error::Configuration("need at least one seed".into()));
    }
    let layout = QubitLayout::new(2)?;
    let grid = angle_grid(cfg.intervals);
    let hists = scan_histograms(cfg, cfg.seed)?;
    let mut rows = Vec::new();
    for (k, spec) in SYMMETRY_ROWS.iter().enumerate() {
        let (f, retained) = filtered(&hists, *spec, &layout)?;
        let boot_seed = seed::derive(cfg.seed, 1000 + k as u64);
        let alpha = v_metric_bootstrap(&grid, &f, 0, 2, cfg.resamples, boot_seed)?;
        let beta = v_metric_bootstrap(&grid, &f, 1, 3, cfg.resamples, seed::derive(boot_seed, 1))?;
        rows.push(VRow { symmetry: *spec, alpha, beta, retained });
    }
    let mut per_seed = Vec::new();
    for s in 0..cfg.seeds {
        let hs = if s == 0 { hists.clone() } else { scan_histograms(cfg, seed::derive(cfg.seed, s as u64))? };
        per_seed.push(SYMMETRY_ROWS.iter().map(|spec| point_v(&grid, &filtered(&hs, *spec, &layout)?.0)).collect::<Result<Vec<_>>>()?);
    }
    let mut ordering = Vec::new();
    if cfg.seeds > 1 {
        // rows: 0 none, 1 N, 2 Sz, 3 N+Sz
        for (better, worse) in [(1, 0), (2, 0), (3, 1), (3, 2)] {
            for beta in [false, true] {
                let h = usize::from(beta);
                let diffs: Vec<f64> = per_seed.iter().map(|v| v[better][h] - v[worse][h]).collect();
                let (mean_difference, lo, hi) = seed_bootstrap(&diffs, 10_000, seed::derive(cfg.seed, 77 + (better * 10 + worse) as u64 * 2 + h as u64));
                ordering.push(OrderingCheck { better: SYMMETRY_ROWS[better], worse: SYMMETRY_ROWS[worse], beta, mean_difference, lo, hi });
            }
        }
    }
    Ok(VTable { config: cfg.clone(), rows, per_seed, ordering })
}

impl VTable {
    pub fn ordering_holds(&self) -> bool {
        self.ordering.iter().all(OrderingCheck::holds)
    }

    pub fn table(&self) -> Result<String> {
        let mut out = header("vtable", self.config.seed, &self.config, "symmetry V_alpha lo hi V_beta lo hi retained")?;
        for r in &self.rows {
            out += &format!("{} {} {:.6}\n", r.symmetry, row(&[r.alpha.v, r.alpha.lo, r.alpha.hi, r.beta.v, r.beta.lo, r.beta.hi]), r.retained);
        }
        Ok(out)
    }

    pub fn ordering_table(&self) -> Result<String> {
        let mut out = header("vtable", self.config.seed, &self.config, "better worse half mean_diff lo hi holds")?;
        for c in &self.ordering {
            out += &format!("{} {} {} {} {}\n", c.better, c.worse, if c.beta { "beta" } else { "alpha" }, row(&[c.mean_difference, c.lo, c.hi]), c.holds());
        }
        Ok(out)
    }

    pub fn artifacts(&self) -> Result<Vec<Artifact>> {
        let mut a = vec![Artifact { name: "vtable.dat".into(), contents: self.table()? }];
        if !self.ordering.is_empty() {
            a.push(Artifact { name: "vtable_ordering.dat".into(), contents: self.ordering_table()? });
        }
        a.push(Artifact { name: "vtable.json".into(), contents: json(self)? });
        Ok(a)
    }
}

// ---------------------------------------------------------------- integrals

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegralBasis {
    /// Atomic orbitals.
    Ao,
    /// RHF molecular orbitals.
    Mo,
}

impl FromStr for IntegralBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ao" => Ok(IntegralBasis::Ao),
            "mo" => Ok(IntegralBasis::Mo),
            other => Err(Error::Configuration(format!("unknown integral basis {other:?}"))),
        }
    }
}

pub fn integrals_for(geometry: &MolecularGeometry, basis: IntegralBasis) -> Result<IntegralSet> {
    let ints = compute_integrals(geometry, &BasisSet::sto3g(geometry)?)?;
    match basis {
        IntegralBasis::Ao => Ok(ints),
        IntegralBasis::Mo => transform_integrals(&ints, &run_rhf(&ints, geometry.electron_count(), ScfOptions::default())?.orbitals),
    }
}

// ---------------------------------------------------------------- self-test

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name: name.into(), passed, detail },
        Err(e) => Check { name: name.into(), passed: false, detail: format!("error: {e}") },
    }
}

fn mo_integrals(geometry: &MolecularGeometry) -> Result<IntegralSet> {
    integrals_for(geometry, IntegralBasis::Mo)
}

/// Oracle-equivalence and invariant checks. `quick` runs smaller samples
/// and skips full hybrid runs.
pub fn selftest(quick: bool) -> Vec<Check> {
    let draws = if quick { 20 } else { 200 };
    let mut checks = Vec::new();

    checks.push(check("entangler 12-CNOT vs 8-CNOT", || {
        let layout = QubitLayout::new(2)?;
        let mut worst: f64 = 0.0;
        let mut counts_ok = true;
        for k in 0..16 {
            let t = -PI + 2.0 * PI * k as f64 / 15.0;
            let a = generic_pair_gate(t, 0, &layout)?;
            let b = optimized_pair_gate(t, 0, 4)?;
            counts_ok &= a.cnot_count() == 12 && b.cnot_count() == 8;
            worst = worst.max(unitary_distance(&a.unitary()?, &b.unitary()?));
        }
        Ok((counts_ok && worst < 1e-10, format!("max distance {worst:.2e}, CNOT counts ok: {counts_ok}")))
    }));

    checks.push(check("paired-subspace rotation", || {
        let mut worst: f64 = 0.0;
        for r in [2, 3] {
            let layout = QubitLayout::new(r)?;
            for k in 0..8 {
                let t = -PI + 2.0 * PI * k as f64 / 7.0;
                for style in [EntanglerStyle::Generic, EntanglerStyle::Optimized] {
                    let gate = crate::ansatz::pair_gate(t, 0, &layout, style)?;
                    for p in 0..r {
                        let mut s = crate::qsim::Statevector::basis(layout.n_qubits(), layout.pair_word(p))?;
                        s.apply_circuit(&gate)?;
                        let (c, sn) = (t.cos(), t.sin());
                        let expect: Vec<(u64, f64)> = match p {
                            0 => vec![(layout.pair_word(0), c), (layout.pair_word(1), sn)],
                            1 => vec![(layout.pair_word(0), -sn), (layout.pair_word(1), c)],
                            _ => vec![(layout.pair_word(p), 1.0)],
                        };
                        let mut target = vec![num_complex::Complex64::new(0.0, 0.0); 1 << layout.n_qubits()];
                        for (w, a) in expect {
                            target[w as usize] = num_complex::Complex64::new(a, 0.0);
                        }
                        let overlap = s.amplitudes().iter().zip(&target).map(|(a, b)| a.conj() * b).sum::<num_complex::Complex64>();
                        worst = worst.max(1.0 - overlap.norm());
                    }
                }
            }
        }
        Ok((worst < 1e-10, format!("max infidelity {worst:.2e}")))
    }));

    checks.push(check("polytope projection idempotent and feasible", || {
        let mut rng = seed::rng(17, 0);
        let mut worst: f64 = 0.0;
        let mut feasible = true;
        for r in [2, 3] {
            let poly = polytope_vertices(r)?;
            for _ in 0..draws * 5 {
                let x = sorted_desc((0..r).map(|_| rng.random_range(-0.5..1.5)).collect());
                let p = poly.project_sorted(&x);
                let pp = poly.project_sorted(&p);
                worst = worst.max(p.iter().zip(&pp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
                feasible &= poly.contains(&p, 1e-10);
            }
        }
        Ok((feasible && worst < 1e-12, format!("max idempotence gap {worst:.2e}, feasible {feasible}")))
    }));

    checks.push(check("energy assembly vs statevector expectation", || {
        let mut rng = seed::rng(23, 0);
        let mut worst: f64 = 0.0;
        for (geom, r) in [(MolecularGeometry::h2(1.4)?, 2), (MolecularGeometry::h3_plus(1.65)?, 3)] {
            let mo = mo_integrals(&geom)?;
            let layout = QubitLayout::new(r)?;
            let h = jordan_wigner_hamiltonian(&mo, &layout)?;
            for _ in 0..draws {
                let params = AnsatzParameters::new((0..r - 1).map(|_| rng.random_range(-PI..PI)).collect(), &layout)?;
                let sv = h.expectation(&ansatz_state(&params, &layout, EntanglerStyle::Optimized)?)?;
                let e = assemble_2dm_energy(&GeminalState::from_amplitudes(&chain_amplitudes(&params))?, &mo)?;
                worst = worst.max((sv - e).abs());
            }
        }
        Ok((worst < 1e-10, format!("max deviation {worst:.2e}")))
    }));

    checks.push(check("FCI cross-check H2 at 1.4 bohr", || {
        let geom = MolecularGeometry::h2(1.4)?;
        let ints = compute_integrals(&geom, &BasisSet::sto3g(&geom)?)?;
        let rhf = run_rhf(&ints, 2, ScfOptions::default())?;
        let fci = fci_two_electron(&ints, &rhf.orbitals)?;
        let layout = QubitLayout::new(2)?;
        let grid_min = (0..=2000)
            .map(|k| {
                let params = AnsatzParameters::new(vec![-PI + PI * k as f64 / 2000.0], &layout)?;
                assemble_2dm_energy(&GeminalState::from_amplitudes(&chain_amplitudes(&params))?, &transform_integrals(&ints, &rhf.orbitals)?)
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let ok = fci.energy < rhf.energy && (grid_min - fci.energy).abs() < 1e-5 && grid_min >= fci.energy - 1e-10;
        Ok((ok, format!("E_RHF {:.8} E_FCI {:.8} paired scan minimum {:.8}", rhf.energy, fci.energy, grid_min)))
    }));

    checks.push(check("seeded noisy sampling repeats", || {
        let layout = QubitLayout::new(2)?;
        let circuit = crate::ansatz::build_ansatz_circuit(&AnsatzParameters::new(vec![-0.7], &layout)?, &layout, EntanglerStyle::Optimized)?;
        let noise = NoiseModel::from_calibration(&DeviceCalibration::ibm14(), &[0, 1, 2, 3])?;
        let basis = crate::qsim::Circuit::new(4);
        let a = run_noisy(&circuit, &noise, 9)?.sample(&basis, 256)?;
        let b = run_noisy(&circuit, &noise, 9)?.sample(&basis, 256)?;
        Ok((a == b, format!("{} distinct outcomes", a.counts().len())))
    }));

    checks.push(check("built-in calibrations", || {
        let a = DeviceCalibration::ibm5();
        let b = DeviceCalibration::ibm14();
        Ok((a.n_qubits() == 5 && b.n_qubits() == 14, format!("{} and {} qubits", a.n_qubits(), b.n_qubits())))
    }));

    if !quick {
        checks.push(check("noiseless hybrid reaches FCI", || {
            let cfg = HybridConfig { shots: None, ..Default::default() };
            let mut worst: f64 = 0.0;
            for (geom, x) in [(MolecularGeometry::h2(1.4)?, 1.4), (MolecularGeometry::h2(3.0)?, 3.0), (MolecularGeometry::h3_plus(1.65)?, 1.65)] {
                let p = run_hybrid(&geom, x, &HybridConfig { phase_mode: if geom.atoms().len() == 3 { Some(PhaseMode::Classical) } else { None }, ..cfg.clone() })?;
                worst = worst.max(p.error_mhartree());
            }
            Ok((worst < 0.1, format!("max error {worst:.2e} mH")))
        }));
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_range_parsing() {
        let r: ScanRange = "0.5:5.0:12".parse().unwrap();
        let v = r.values();
        assert_eq!(v.len(), 12);
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[11] - 5.0).abs() < 1e-12);
        assert_eq!("1.4:1.4:1".parse::<ScanRange>().unwrap().values(), vec![1.4]);
        for bad in ["0.5:5.0", "a:1:2", "0:1:0"] {
            assert!(bad.parse::<ScanRange>().is_err(), "{bad}");
        }
    }

    #[test]
    fn systems_parse() {
        assert_eq!("H2".parse::<System>().unwrap(), System::H2);
        assert_eq!("h3plus".parse::<System>().unwrap(), System::H3Plus);
        assert!("lih".parse::<System>().is_err());
        assert_eq!(System::H2.default_scan().points, 12);
        assert_eq!(System::H3Plus.default_scan().values().len(), 8);
    }

    #[test]
    fn angle_grid_spans_half_turn() {
        let g = angle_grid(10);
        assert_eq!(g.len(), 11);
        assert!((g[0] + PI).abs() < 1e-15 && g[10].abs() < 1e-15);
    }

    #[test]
    fn noiseless_r2_scan_v_near_two() {
        let run = run_scan(&ScanConfig { shots: None, ..Default::default() }).unwrap();
        let v = run.v_raw.unwrap();
        // trapezoid rule on the π/10 grid
        let expect: f64 = angle_grid(10).windows(2).map(|w| 0.5 * (w[1] - w[0]) * ((2.0 * w[0]).cos().abs() + (2.0 * w[1]).cos().abs())).sum();
        assert!((v[0] - expect).abs() < 1e-10 && (v[1] - expect).abs() < 1e-10);
        assert!((v[0] - 2.0).abs() < 0.05);
        assert_eq!(run.max_infeasibility_sigma, 0.0);
    }

    #[test]
    fn seed_bootstrap_brackets_mean() {
        let (m, lo, hi) = seed_bootstrap(&[1.0, 2.0, 3.0, 4.0], 2000, 1);
        assert_eq!(m, 2.5);
        assert!(lo < m && m < hi && lo >= 1.0 && hi <= 4.0);
    }

    #[test]
    fn quick_selftest_passes() {
        for c in selftest(true) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
