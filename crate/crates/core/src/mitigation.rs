//! Symmetry postselection, occupation-polytope projection with an affine
//! calibration map, and the V spread metric.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{chain_amplitudes, AnsatzParameters, QubitLayout};
use crate::qsim::{Outcomes, ShotHistogram};
use crate::{seed, Error, Result};

/// Conserved quantities to postselect on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SymmetrySpec {
    /// Exactly two electrons.
    pub number: bool,
    /// As many α as β electrons.
    pub sz: bool,
}

impl SymmetrySpec {
    pub const NONE: SymmetrySpec = SymmetrySpec { number: false, sz: false };
    pub const N: SymmetrySpec = SymmetrySpec { number: true, sz: false };
    pub const SZ: SymmetrySpec = SymmetrySpec { number: false, sz: true };
    pub const BOTH: SymmetrySpec = SymmetrySpec { number: true, sz: true };

    pub fn accepts(&self, layout: &QubitLayout, word: u64) -> bool {
        (!self.number || word.count_ones() == 2)
            && (!self.sz || (word & layout.alpha_mask()).count_ones() == (word & layout.beta_mask()).count_ones())
    }

    pub fn is_empty(&self) -> bool {
        !self.number && !self.sz
    }
}

impl fmt::Display for SymmetrySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.number, self.sz) {
            (false, false) => "none",
            (true, false) => "N",
            (false, true) => "Sz",
            (true, true) => "N+Sz",
        })
    }
}

/// Mitigation options as written on the command line: a comma list of
/// `n`, `sz`, `polytope`, or `none`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MitigationConfig {
    pub symmetry: SymmetrySpec,
    pub polytope: bool,
}

impl FromStr for MitigationConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut m = MitigationConfig::default();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok.to_ascii_lowercase().as_str() {
                "n" => m.symmetry.number = true,
                "sz" => m.symmetry.sz = true,
                "polytope" => m.polytope = true,
                "none" => {}
                other => return Err(Error::Configuration(format!("unknown mitigation {other:?}"))),
            }
        }
        Ok(m)
    }
}

impl fmt::Display for MitigationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.symmetry.number {
            parts.push("n");
        }
        if self.symmetry.sz {
            parts.push("sz");
        }
        if self.polytope {
            parts.push("polytope");
        }
        if parts.is_empty() {
            parts.push("none");
        }
        f.write_str(&parts.join(","))
    }
}

/// Drops outcomes violating `spec`; returns the filtered histogram and the
/// retained fraction.
pub fn symmetry_verify(hist: &ShotHistogram, spec: SymmetrySpec, layout: &QubitLayout) -> Result<(ShotHistogram, f64)> {
    let kept = hist.retain(|w| spec.accepts(layout, w));
    if kept.is_empty() {
        return Err(Error::AllShotsRejected { shots: hist.shots() });
    }
    let fraction = kept.shots() as f64 / hist.shots() as f64;
    Ok((kept, fraction))
}

/// [`symmetry_verify`] for counts or exact distributions.
pub fn symmetry_verify_outcomes(outcomes: &Outcomes, spec: SymmetrySpec, layout: &QubitLayout) -> Result<(Outcomes, f64)> {
    let before = outcomes.total_weight();
    let kept = outcomes.retain(|w| spec.accepts(layout, w));
    let after = kept.total_weight();
    if after <= 0.0 {
        return Err(Error::AllShotsRejected { shots: outcomes.shots().unwrap_or(0) });
    }
    Ok((kept, after / before))
}

/// Ordered occupations `n_1 ≥ … ≥ n_r ≥ 0`, `Σ n = 1`, reachable by a
/// two-electron singlet: the simplex spanned by `v_j = (1/j, …, 1/j, 0, …)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationPolytope {
    r: usize,
    vertices: Vec<Vec<f64>>,
}

pub fn polytope_vertices(r: usize) -> Result<OccupationPolytope> {
    if r == 0 {
        return Err(Error::Validation("polytope needs r ≥ 1".into()));
    }
    let vertices = (1..=r).map(|j| (1..=r).map(|i| if i <= j { 1.0 / j as f64 } else { 0.0 }).collect()).collect();
    Ok(OccupationPolytope { r, vertices })
}

impl OccupationPolytope {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Ordering, positivity and normalization hold within `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.r
            && x.windows(2).all(|w| w[0] >= w[1] - tol)
            && x[self.r - 1] >= -tol
            && (x.iter().sum::<f64>() - 1.0).abs() <= tol
    }

    /// Euclidean projection of an ordered-space point onto the polytope, by
    /// projecting onto the affine hull of every vertex subset and keeping the
    /// nearest candidate with non-negative barycentric weights.
    pub fn project_sorted(&self, x: &[f64]) -> Vec<f64> {
        let r = self.r;
        let target = DVector::from_column_slice(x);
        let mut best: Option<(f64, DVector<f64>)> = None;
        for subset in 1u32..(1 << r) {
            let idx: Vec<usize> = (0..r).filter(|&j| subset >> j & 1 == 1).collect();
            let k = idx.len();
            let v = DMatrix::from_fn(r, k, |i, c| self.vertices[idx[c]][i]);
            // KKT system of min ‖Vλ − x‖² subject to Σλ = 1
            let mut kkt = DMatrix::zeros(k + 1, k + 1);
            kkt.view_mut((0, 0), (k, k)).copy_from(&(v.transpose() * &v * 2.0));
            for c in 0..k {
                kkt[(c, k)] = 1.0;
                kkt[(k, c)] = 1.0;
            }
            let mut rhs = DVector::zeros(k + 1);
            rhs.rows_mut(0, k).copy_from(&(v.transpose() * &target * 2.0));
            rhs[k] = 1.0;
            let Some(sol) = kkt.lu().solve(&rhs) else { continue };
            let lambda = sol.rows(0, k);
            if lambda.iter().any(|&l| l < -1e-12) {
                continue;
            }
            let p = &v * lambda.map(|l| l.max(0.0));
            let d = (&p - &target).norm_squared();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, p));
            }
        }
        best.expect("single vertices are always candidates").1.iter().copied().collect()
    }
}

/// Affine correction `x ↦ L x + b` in ordered occupation space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub linear: DMatrix<f64>,
    pub offset: DVector<f64>,
    /// RMS distance between mapped calibration points and their vertices.
    pub residual: f64,
    /// Calibration points used in the fit.
    pub points: usize,
}

impl AffineMap {
    pub fn identity(r: usize) -> Self {
        AffineMap { linear: DMatrix::identity(r, r), offset: DVector::zeros(r), residual: 0.0, points: 0 }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.linear * DVector::from_column_slice(x) + &self.offset).iter().copied().collect()
    }
}

/// Parameters whose ideal ordered occupations are the polytope vertices:
/// vertex `j` spreads the pair equally over the first `j` orbitals.
pub fn vertex_preimages(layout: &QubitLayout) -> Vec<AnsatzParameters> {
    let r = layout.r();
    (1..=r)
        .map(|j| {
            let t = (0..r - 1)
                .map(|k| if k + 1 < j { -(1.0 / ((j - k) as f64).sqrt()).acos() } else { 0.0 })
                .collect();
            AnsatzParameters::new(t, layout).expect("length r − 1")
        })
        .collect()
}

/// Ideal half-set occupations of the ansatz state, sorted descending.
pub fn ideal_sorted_occupations(params: &AnsatzParameters) -> Vec<f64> {
    let mut n: Vec<f64> = chain_amplitudes(params).iter().map(|g| g * g).collect();
    n.sort_by(|a, b| b.total_cmp(a));
    n
}

/// Least-squares affine map sending the measured (sorted) occupations of the
/// scan points whose ideal image is a polytope vertex onto that vertex. The
/// fit lives in the first `r − 1` coordinates; the last follows from `Σ = 1`.
pub fn estimate_affine_map(scan: &[(AnsatzParameters, Vec<f64>)], r: usize) -> Result<AffineMap> {
    let poly = polytope_vertices(r)?;
    let d = r - 1;
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for (params, measured) in scan {
        if measured.len() != r {
            return Err(Error::LengthMismatch { expected: r, actual: measured.len() });
        }
        let ideal = ideal_sorted_occupations(params);
        if let Some(v) = poly.vertices.iter().find(|v| v.iter().zip(&ideal).all(|(a, b)| (a - b).abs() < 1e-6)) {
            let mut m = measured.clone();
            m.sort_by(|a, b| b.total_cmp(a));
            inputs.push(m);
            targets.push(v.clone());
        }
    }
    if d == 0 {
        return Ok(AffineMap { points: inputs.len(), ..AffineMap::identity(1) });
    }
    let k = inputs.len();
    if k < r {
        return Err(Error::Degenerate(format!("{k} calibration points for {r} vertices")));
    }
    let a = DMatrix::from_fn(k, d + 1, |i, j| if j < d { inputs[i][j] } else { 1.0 });
    let y = DMatrix::from_fn(k, d, |i, j| targets[i][j]);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-9 * smax.max(1e-300) {
        return Err(Error::Degenerate("measured calibration points are affinely dependent".into()));
    }
    let coef = svd.solve(&y, 1e-12).map_err(|e| Error::Degenerate(e.to_string()))?;
    let mut linear = DMatrix::zeros(r, r);
    let mut offset = DVector::zeros(r);
    for i in 0..d {
        for j in 0..d {
            linear[(i, j)] = coef[(j, i)];
            linear[(d, j)] -= coef[(j, i)];
        }
        offset[i] = coef[(d, i)];
    }
    offset[d] = 1.0 - (0..d).map(|i| offset[i]).sum::<f64>();
    let mut map = AffineMap { linear, offset, residual: 0.0, points: k };
    let sq: f64 = inputs.iter().zip(&targets).map(|(x, v)| map.apply(x).iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sum();
    map.residual = (sq / k as f64).sqrt();
    Ok(map)
}

/// Sorts descending, applies `map`, projects onto the polytope and restores
/// the original order.
pub fn project_polytope(n_half: &[f64], polytope: &OccupationPolytope, map: Option<&AffineMap>) -> Result<Vec<f64>> {
    if n_half.len() != polytope.r() {
        return Err(Error::LengthMismatch { expected: polytope.r(), actual: n_half.len() });
    }
    let mut order: Vec<usize> = (0..n_half.len()).collect();
    order.sort_by(|&a, &b| n_half[b].total_cmp(&n_half[a]));
    let mut sorted: Vec<f64> = order.iter().map(|&i| n_half[i]).collect();
    if let Some(m) = map {
        sorted = m.apply(&sorted);
    }
    let projected = polytope.project_sorted(&sorted);
    let mut out = vec![0.0; n_half.len()];
    for (k, &i) in order.iter().enumerate() {
        out[i] = projected[k];
    }
    Ok(out)
}

/// Trapezoidal integral of `|n₂ − n₁|` over the scan grid `t`.
pub fn v_metric(t: &[f64], n1: &[f64], n2: &[f64]) -> Result<f64> {
    if t.len() < 3 {
        return Err(Error::Validation(format!("V needs at least 3 scan points, got {}", t.len())));
    }
    if n1.len() != t.len() || n2.len() != t.len() {
        return Err(Error::LengthMismatch { expected: t.len(), actual: n1.len().min(n2.len()) });
    }
    let gap: Vec<f64> = n1.iter().zip(n2).map(|(a, b)| (b - a).abs()).collect();
    Ok(t.windows(2).zip(gap.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]).abs() * (y[0] + y[1])).sum())
}

/// V with a percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VEstimate {
    pub v: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Multinomial resample of a histogram by sequential binomial draws.
pub fn resample(hist: &ShotHistogram, rng: &mut seed::Rng) -> ShotHistogram {
    let mut out = ShotHistogram::new(hist.n_qubits());
    let mut remaining_shots = hist.shots();
    let mut remaining_mass = hist.shots();
    for (&w, &c) in hist.counts() {
        if remaining_shots == 0 {
            break;
        }
        let p = (c as f64 / remaining_mass as f64).min(1.0);
        let k = Binomial::new(remaining_shots, p).expect("valid binomial").sample(rng);
        out.record(w, k);
        remaining_shots -= k;
        remaining_mass -= c;
    }
    out
}

/// V over a scan of histograms, reading occupations of qubits `q1` and `q2`,
/// with a 95% bootstrap interval from `resamples` multinomial resamples of
/// every histogram.
pub fn v_metric_bootstrap(t: &[f64], hists: &[ShotHistogram], q1: usize, q2: usize, resamples: usize, seed: u64) -> Result<VEstimate> {
    let v_of = |hs: &[ShotHistogram]| -> Result<f64> {
        let n1: Vec<f64> = hs.iter().map(|h| h.bit_frequency(q1)).collect();
        let n2: Vec<f64> = hs.iter().map(|h| h.bit_frequency(q2)).collect();
        v_metric(t, &n1, &n2)
    };
    let v = v_of(hists)?;
    let mut samples = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::rng(seed, b);
            let hs: Vec<ShotHistogram> = hists.iter().map(|h| resample(h, &mut rng)).collect();
            v_of(&hs)
        })
        .collect::<Result<Vec<f64>>>()?;
    samples.sort_by(f64::total_cmp);
    let (lo, hi) = percentile_interval(&samples, 0.95);
    Ok(VEstimate { v, lo, hi })
}

/// Central `level` interval of sorted samples.
pub fn percentile_interval(sorted: &[f64], level: f64) -> (f64, f64) {
    if sorted.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let tail = (1.0 - level) / 2.0;
    let at = |q: f64| sorted[((q * (sorted.len() - 1) as f64).round() as usize).min(sorted.len() - 1)];
    (at(tail), at(1.0 - tail))
}

/// Area of the convex hull of 2-D points (monotone chain).
pub fn hull_area(points: &[(f64, f64)]) -> f64 {
    let mut p: Vec<(f64, f64)> = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p.dedup();
    if p.len() < 3 {
        return 0.0;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &pt in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0.0 {
                hull.pop();
            }
            hull.push(pt);
        }
        hull.pop();
    }
    let n = hull.len();
    0.5 * (0..n).map(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        a.0 * b.1 - b.0 * a.1
    })
    .sum::<f64>()
    .abs()
}

/// Hull area of the `(n₁, n₂)` projections of sorted r = 3 half-set
/// occupations, relative to the ideal triangle `(1,0), (½,½), (⅓,⅓)`.
pub fn hull_area_ratio(sorted_half_sets: &[Vec<f64>]) -> Result<f64> {
    let pts = sorted_half_sets
        .iter()
        .map(|n| if n.len() == 3 { Ok((n[0], n[1])) } else { Err(Error::LengthMismatch { expected: 3, actual: n.len() }) })
        .collect::<Result<Vec<_>>>()?;
    let ideal = hull_area(&[(1.0, 0.0), (0.5, 0.5), (1.0 / 3.0, 1.0 / 3.0)]);
    Ok(hull_area(&pts) / ideal)
}
