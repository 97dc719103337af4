use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pairvqe::ansatz::EntanglerStyle;
use pairvqe::chem::MolecularGeometry;
use pairvqe::experiments::{self, Artifact, IntegralBasis, ScanConfig, ScanRange, System, VTableConfig};
use pairvqe::hybrid::{HybridConfig, NoiseSource, PhaseMode};
use pairvqe::mitigation::MitigationConfig;
use pairvqe::qsim::{load_calibration, DeviceCalibration, NoiseChannels};
use pairvqe::tomography::PhaseEstimator;

#[derive(Parser)]
#[command(name = "pairvqe", version, about = "Paired-geminal hybrid eigensolver experiments for H2 and H3+")]
struct Cli {
    /// Output directory for tables and JSON sidecars.
    #[arg(long, global = true, env = "PAIRVQE_OUT", default_value = "pairvqe-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dissociation curve against FCI and RHF references.
    Curve(CurveArgs),
    /// Occupation scan over the ansatz angle grid.
    Scan(ScanArgs),
    /// V metric per symmetry-verification setting.
    Vtable(VTableArgs),
    /// Oracle and invariant checks.
    Selftest(SelftestArgs),
    /// Dump one-and two-electron integrals.
    Integrals(IntegralArgs),
}

#[derive(Args)]
struct SystemArgs {
    /// Built-in system: h2 or h3plus.
    #[arg(long, default_value = "h2", conflicts_with = "geometry")]
    system: String,
    /// Geometry file (`element x y z` lines in bohr); scanned by a scale factor.
    #[arg(long)]
    geometry: Option<PathBuf>,
}

impl SystemArgs {
    fn resolve(&self) -> Result<System> {
        match &self.geometry {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Ok(System::Custom(text.parse::<MolecularGeometry>().with_context(|| format!("parsing {}", path.display()))?))
            }
            None => Ok(self.system.parse()?),
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// off, ibm5, ibm14, uniform:SINGLE:TWO:READOUT, or a calibration file.
    #[arg(long, default_value = "off")]
    noise: String,
    /// Enable T1/T2 relaxation on calibrated noise.
    #[arg(long)]
    relaxation: bool,
    /// Device qubits for the register, comma separated (default 0,1,…).
    #[arg(long, value_delimiter = ',')]
    layout: Option<Vec<usize>>,
}

impl NoiseArgs {
    fn resolve(&self) -> Result<Option<NoiseSource>> {
        let channels = NoiseChannels { relaxation: self.relaxation, ..NoiseChannels::default() };
        let calibrated = |calibration: DeviceCalibration| Some(NoiseSource::Calibration { calibration, layout: self.layout.clone(), channels });
        Ok(match self.noise.as_str() {
            "off" | "none" => None,
            "ibm5" => calibrated(DeviceCalibration::ibm5()),
            "ibm14" => calibrated(DeviceCalibration::ibm14()),
            s if s.starts_with("uniform:") => {
                let v: Vec<f64> = s[8..].split(':').map(str::parse).collect::<std::result::Result<_, _>>().with_context(|| format!("bad noise spec {s:?}"))?;
                if v.len() != 3 {
                    bail!("uniform noise needs SINGLE:TWO:READOUT, got {s:?}");
                }
                Some(NoiseSource::Uniform { single: v[0], two: v[1], readout: v[2] })
            }
            path => calibrated(load_calibration(path).with_context(|| format!("loading calibration {path}"))?),
        })
    }
}

fn parse_shots(s: &str) -> Result<Option<u64>> {
    if s == "exact" {
        return Ok(None);
    }
    let n: u64 = s.parse().with_context(|| format!("shots must be a count or `exact`, got {s:?}"))?;
    if n == 0 {
        bail!("shots must be positive");
    }
    Ok(Some(n))
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// start:stop:points in bohr (or scale factors for --geometry).
    #[arg(long)]
    scan: Option<String>,
    /// Shots per circuit, or `exact`.
    #[arg(long, default_value = "2048")]
    shots: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Comma list of n, sz, polytope (or none).
    #[arg(long, default_value = "none")]
    mitigate: String,
    /// measured or classical (default: measured for 2 orbitals, classical beyond).
    #[arg(long)]
    phase: Option<String>,
    /// Sign estimator pattern: c2 or c3.
    #[arg(long, default_value = "c2")]
    estimator: String,
    /// Entangler compilation: optimized (8 CNOT) or generic (12 CNOT).
    #[arg(long, default_value = "optimized")]
    entangler: String,
    #[arg(long, default_value_t = 2)]
    restarts: usize,
    #[arg(long, default_value_t = 10)]
    max_outer: usize,
    /// Outer-loop convergence threshold in hartree.
    #[arg(long, default_value_t = 1e-3)]
    threshold: f64,
    /// Fail on any flagged point.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ScanArgs {
    /// Spatial orbitals: 2 or 3.
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// Grid intervals over [-pi, 0] per angle.
    #[arg(long, default_value_t = 10)]
    intervals: usize,
    #[arg(long, default_value = "2048")]
    shots: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Symmetries for the verified table: comma list of n, sz.
    #[arg(long, default_value = "n,sz")]
    symmetry: String,
    /// Synthetic probability of replacing a shot by a random pair word.
    #[arg(long, default_value_t = 0.0)]
    contraction: f64,
    #[arg(long, default_value = "optimized")]
    entangler: String,
    /// Fail when the affine calibration is degenerate.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct VTableArgs {
    #[arg(long, default_value_t = 2048)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 10)]
    intervals: usize,
    /// Bootstrap resamples per V interval.
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    /// Independent scans for the ordering analysis.
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    #[arg(long, default_value = "optimized")]
    entangler: String,
    /// Fail when a mitigation ordering check does not hold.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SelftestArgs {
    /// Smaller samples, no full hybrid runs.
    #[arg(long)]
    quick: bool,
    /// Also parse this calibration file.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

#[derive(Args)]
struct IntegralArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Bond/side length in bohr (scale factor for --geometry).
    #[arg(long)]
    at: Option<f64>,
    /// ao or mo (RHF orbitals).
    #[arg(long, default_value = "mo")]
    basis: String,
    /// fcidump or json.
    #[arg(long, default_value = "fcidump")]
    format: String,
}

fn emit(out: &std::path::Path, artifacts: &[Artifact]) -> Result<()> {
    for path in experiments::write_artifacts(out, artifacts).with_context(|| format!("writing to {}", out.display()))? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn curve(a: &CurveArgs, out: &std::path::Path) -> Result<ExitCode> {
    let system = a.system.resolve()?;
    let scan = match &a.scan {
        Some(s) => s.parse::<ScanRange>()?,
        None => system.default_scan(),
    };
    let config = HybridConfig {
        shots: parse_shots(&a.shots)?,
        noise: a.noise.resolve()?,
        mitigation: a.mitigate.parse::<MitigationConfig>()?,
        phase_mode: a.phase.as_deref().map(str::parse::<PhaseMode>).transpose()?,
        estimator: a.estimator.parse::<PhaseEstimator>()?,
        style: a.entangler.parse::<EntanglerStyle>()?,
        restarts: a.restarts,
        max_outer: a.max_outer,
        outer_threshold: a.threshold,
        seed: a.seed,
        ..Default::default()
    };
    let run = experiments::run_curve(&system, &scan, &config)?;
    print!("{}", run.table()?);
    emit(out, &run.artifacts()?)?;
    let mut code = ExitCode::SUCCESS;
    for p in &run.points {
        if !p.converged || (a.strict && !p.flags.is_empty()) {
            eprintln!("point {}: {}", p.parameter, if p.flags.is_empty() { "not converged".to_string() } else { p.flags.join("; ") });
            code = ExitCode::from(2);
        }
    }
    Ok(code)
}

fn scan(a: &ScanArgs, out: &std::path::Path) -> Result<ExitCode> {
    let symmetry = a.symmetry.parse::<MitigationConfig>()?;
    if symmetry.polytope {
        bail!("--symmetry takes n and sz; the projected table is always written");
    }
    let cfg = ScanConfig {
        r: a.r,
        intervals: a.intervals,
        shots: parse_shots(&a.shots)?,
        noise: a.noise.resolve()?,
        symmetry: symmetry.symmetry,
        contraction: a.contraction,
        style: a.entangler.parse()?,
        seed: a.seed,
    };
    let run = experiments::run_scan(&cfg)?;
    print!("{}", run.summary());
    emit(out, &run.artifacts()?)?;
    if a.strict && run.calibration_note.is_some() {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn vtable(a: &VTableArgs, out: &std::path::Path) -> Result<ExitCode> {
    let cfg = VTableConfig {
        shots: a.shots,
        noise: a.noise.resolve()?,
        intervals: a.intervals,
        resamples: a.resamples,
        seeds: a.seeds,
        style: a.entangler.parse()?,
        seed: a.seed,
    };
    let table = experiments::run_vtable(&cfg)?;
    print!("{}", table.table()?);
    if !table.ordering.is_empty() {
        print!("{}", table.ordering_table()?);
    }
    emit(out, &table.artifacts()?)?;
    if a.strict && !table.ordering_holds() {
        eprintln!("mitigation ordering does not hold at 95% confidence");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn selftest(a: &SelftestArgs) -> Result<ExitCode> {
    let mut checks = experiments::selftest(a.quick);
    if let Some(path) = &a.calibration {
        checks.push(match load_calibration(path) {
            Ok(cal) => experiments::Check { name: format!("calibration {}", path.display()), passed: true, detail: format!("{} qubits", cal.n_qubits()) },
            Err(e) => experiments::Check { name: format!("calibration {}", path.display()), passed: false, detail: e.to_string() },
        });
    }
    let mut failed = 0;
    for c in &checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        if !c.passed {
            eprintln!("failed: {}: {}", c.name, c.detail);
            failed += 1;
        }
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn integrals(a: &IntegralArgs) -> Result<ExitCode> {
    let system = a.system.resolve()?;
    let x = a.at.unwrap_or_else(|| match system {
        System::H2 => 1.4,
        System::H3Plus => 1.65,
        System::Custom(_) => 1.0,
    });
    let ints = experiments::integrals_for(&system.geometry(x)?, a.basis.parse::<IntegralBasis>()?)?;
    match a.format.as_str() {
        "fcidump" => print!("{}", ints.to_fcidump()),
        "json" => println!("{}", serde_json::to_string_pretty(&ints.to_json())?),
        other => bail!("unknown format {other:?} (expected fcidump or json)"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global().context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Curve(a) => curve(a, &cli.out),
        Command::Scan(a) => scan(a, &cli.out),
        Command::Vtable(a) => vtable(a, &cli.out),
        Command::Selftest(a) => selftest(a),
        Command::Integrals(a) => integrals(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
