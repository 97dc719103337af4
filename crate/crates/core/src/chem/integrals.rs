use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde_json::json;

use super::boys::boys_function;
use super::geometry::distance;
use super::{BasisSet, MolecularGeometry};
use crate::{Error, Result};

/// One- and two-electron integrals in a stated orbital basis.
///
/// The repulsion tensor uses chemists' notation `(ij|kl)` and is stored
/// densely as `r⁴` values, row-major in `(i, j, k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub overlap: DMatrix<f64>,
    pub hcore: DMatrix<f64>,
    eri: Vec<f64>,
    pub enuc: f64,
    rank: usize,
}

impl IntegralSet {
    pub fn new(overlap: DMatrix<f64>, hcore: DMatrix<f64>, eri: Vec<f64>, enuc: f64) -> Result<Self> {
        let rank = hcore.nrows();
        if hcore.ncols() != rank || overlap.shape() != (rank, rank) {
            return Err(Error::Precondition("integral matrices must be square and of equal rank".into()));
        }
        if eri.len() != rank.pow(4) {
            return Err(Error::LengthMismatch {
                expected: rank.pow(4),
                actual: eri.len(),
            });
        }
        Ok(Self {
            overlap,
            hcore,
            eri,
            enuc,
            rank,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.rank + j) * self.rank + k) * self.rank + l
    }

    /// `(ij|kl)` in chemists' notation.
    #[inline]
    pub fn eri(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.eri[self.index(i, j, k, l)]
    }

    pub fn eri_raw(&self) -> &[f64] {
        &self.eri
    }

    /// Largest deviation among the 8-fold permutational partners.
    pub fn eri_symmetry_residual(&self) -> f64 {
        let r = self.rank;
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        let v = self.eri(i, j, k, l);
                        for w in [
                            self.eri(j, i, k, l),
                            self.eri(i, j, l, k),
                            self.eri(k, l, i, j),
                            self.eri(l, k, j, i),
                        ] {
                            worst = worst.max((v - w).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// FCIDUMP-style text: a namelist header followed by `value i j k l`
    /// lines (1-based), one-electron terms as `value i j 0 0` and the nuclear
    /// repulsion as `value 0 0 0 0`. The overlap is appended as
    /// `! overlap i j value` comment lines so AO dumps stay self-describing.
    pub fn to_fcidump(&self) -> String {
        let r = self.rank;
        let mut out = String::new();
        let orbsym = vec!["1"; r].join(",");
        let _ = writeln!(out, " &FCI NORB={r},NELEC=2,MS2=0,");
        let _ = writeln!(out, "  ORBSYM={orbsym},");
        let _ = writeln!(out, "  ISYM=1,");
        let _ = writeln!(out, " &END");
        for i in 0..r {
            for j in 0..=i {
                for k in 0..r {
                    for l in 0..=k {
                        if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                            continue;
                        }
                        let v = self.eri(i, j, k, l);
                        if v.abs() > 1e-14 {
                            let _ = writeln!(out, "{v:23.16e} {:4} {:4} {:4} {:4}", i + 1, j + 1, k + 1, l + 1);
                        }
                    }
                }
            }
        }
        for i in 0..r {
            for j in 0..=i {
                let v = self.hcore[(i, j)];
                if v.abs() > 1e-14 {
                    let _ = writeln!(out, "{v:23.16e} {:4} {:4} {:4} {:4}", i + 1, j + 1, 0, 0);
                }
            }
        }
        let _ = writeln!(out, "{:23.16e} {:4} {:4} {:4} {:4}", self.enuc, 0, 0, 0, 0);
        for i in 0..r {
            for j in 0..=i {
                let _ = writeln!(out, "! overlap {} {} {:23.16e}", i + 1, j + 1, self.overlap[(i, j)]);
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
        };
        json!({
            "basis_rank": self.rank,
            "enuc": self.enuc,
            "overlap": rows(&self.overlap),
            "hcore": rows(&self.hcore),
            "eri_convention": "chemists (ij|kl), row-major i,j,k,l",
            "eri": self.eri,
        })
    }
}

struct Primitive {
    exponent: f64,
    coeff: f64,
    center: [f64; 3],
}

fn gaussian_product(a: &Primitive, b: &Primitive) -> (f64, [f64; 3], f64) {
    let p = a.exponent + b.exponent;
    let mu = a.exponent * b.exponent / p;
    let r2 = distance(a.center, b.center).powi(2);
    let center = [
        (a.exponent * a.center[0] + b.exponent * b.center[0]) / p,
        (a.exponent * a.center[1] + b.exponent * b.center[1]) / p,
        (a.exponent * a.center[2] + b.exponent * b.center[2]) / p,
    ];
    (p, center, (-mu * r2).exp())
}

/// Overlap, kinetic, nuclear-attraction and repulsion integrals over
/// contracted s-type Gaussians.
pub fn compute_integrals(geometry: &MolecularGeometry, basis: &BasisSet) -> Result<IntegralSet> {
    let atoms = geometry.atoms();
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i + 1..] {
            if distance(a.position, b.position) <= 1e-8 {
                return Err(Error::Geometry("coincident nuclei".into()));
            }
        }
    }
    let funcs: Vec<Vec<Primitive>> = basis
        .shells
        .iter()
        .map(|shell| {
            shell
                .primitives
                .iter()
                .map(|&(exponent, coeff)| Primitive {
                    exponent,
                    coeff,
                    center: atoms[shell.center].position,
                })
                .collect()
        })
        .collect();
    let r = funcs.len();

    let mut overlap = DMatrix::zeros(r, r);
    let mut hcore = DMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..=i {
            let mut s = 0.0;
            let mut t = 0.0;
            let mut v = 0.0;
            for a in &funcs[i] {
                for b in &funcs[j] {
                    let (p, pc, k) = gaussian_product(a, b);
                    let mu = a.exponent * b.exponent / p;
                    let r2 = distance(a.center, b.center).powi(2);
                    let cc = a.coeff * b.coeff;
                    let s_prim = (PI / p).powf(1.5) * k;
                    s += cc * s_prim;
                    t += cc * mu * (3.0 - 2.0 * mu * r2) * s_prim;
                    for atom in atoms {
                        let rpc2 = distance(pc, atom.position).powi(2);
                        v -= cc * 2.0 * PI / p * atom.nuclear_charge as f64 * k * boys_function(0, p * rpc2)?;
                    }
                }
            }
            overlap[(i, j)] = s;
            overlap[(j, i)] = s;
            hcore[(i, j)] = t + v;
            hcore[(j, i)] = t + v;
        }
    }

    let mut eri = vec![0.0; r.pow(4)];
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * r + j) * r + k) * r + l;
    for i in 0..r {
        for j in 0..=i {
            for k in 0..r {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let value = contracted_eri(&funcs[i], &funcs[j], &funcs[k], &funcs[l])?;
                    for (a, b, c, d) in [
                        (i, j, k, l),
                        (j, i, k, l),
                        (i, j, l, k),
                        (j, i, l, k),
                        (k, l, i, j),
                        (l, k, i, j),
                        (k, l, j, i),
                        (l, k, j, i),
                    ] {
                        eri[idx(a, b, c, d)] = value;
                    }
                }
            }
        }
    }

    IntegralSet::new(overlap, hcore, eri, geometry.nuclear_repulsion())
}

fn contracted_eri(fi: &[Primitive], fj: &[Primitive], fk: &[Primitive], fl: &[Primitive]) -> Result<f64> {
    let mut total = 0.0;
    for a in fi {
        for b in fj {
            let (p, pc, kab) = gaussian_product(a, b);
            for c in fk {
                for d in fl {
                    let (q, qc, kcd) = gaussian_product(c, d);
                    let rpq2 = distance(pc, qc).powi(2);
                    let pref = 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt());
                    total += a.coeff * b.coeff * c.coeff * d.coeff
                        * pref
                        * kab
                        * kcd
                        * boys_function(0, p * q / (p + q) * rpq2)?;
                }
            }
        }
    }
    Ok(total)
}
