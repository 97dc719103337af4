use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub element: String,
    pub nuclear_charge: u32,
    /// Cartesian position in bohr.
    pub position: [f64; 3],
}

/// Nuclei, total charge and a free-form label.
///
/// Construction enforces exactly two electrons and strictly positive
/// interatomic distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolecularGeometry {
    atoms: Vec<Atom>,
    charge: i32,
    label: String,
}

fn nuclear_charge_of(element: &str) -> Option<u32> {
    match element {
        "H" => Some(1),
        _ => None,
    }
}

impl MolecularGeometry {
    pub fn new(atoms: Vec<Atom>, charge: i32, label: impl Into<String>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Geometry("no atoms".into()));
        }
        let z_total: i64 = atoms.iter().map(|a| a.nuclear_charge as i64).sum();
        let electrons = z_total - charge as i64;
        if electrons != 2 {
            return Err(Error::Geometry(format!(
                "electron count is {electrons}; exactly 2 electrons are supported"
            )));
        }
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[i + 1..] {
                let d = distance(a.position, b.position);
                if d <= 1e-8 {
                    return Err(Error::Geometry(format!(
                        "coincident nuclei {} and {} (distance {d:.3e} bohr)",
                        a.element, b.element
                    )));
                }
            }
        }
        Ok(Self {
            atoms,
            charge,
            label: label.into(),
        })
    }

    pub fn hydrogen(position: [f64; 3]) -> Atom {
        Atom {
            element: "H".into(),
            nuclear_charge: 1,
            position,
        }
    }

    /// H₂ along the z axis with bond length `r` (bohr).
    pub fn h2(r: f64) -> Result<Self> {
        Self::new(
            vec![Self::hydrogen([0.0, 0.0, 0.0]), Self::hydrogen([0.0, 0.0, r])],
            0,
            format!("H2 R={r:.4}"),
        )
    }

    /// Equilateral H₃⁺ in the xy plane with side length `side` (bohr).
    pub fn h3_plus(side: f64) -> Result<Self> {
        let h = side * 3f64.sqrt() / 2.0;
        Self::new(
            vec![
                Self::hydrogen([0.0, 0.0, 0.0]),
                Self::hydrogen([side, 0.0, 0.0]),
                Self::hydrogen([side / 2.0, h, 0.0]),
            ],
            1,
            format!("H3+ side={side:.4}"),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn charge(&self) -> i32 {
        self.charge
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn electron_count(&self) -> usize {
        let z: i64 = self.atoms.iter().map(|a| a.nuclear_charge as i64).sum();
        (z - self.charge as i64) as usize
    }

    /// Σ_{A<B} Z_A Z_B / R_AB in hartree.
    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                e += (a.nuclear_charge * b.nuclear_charge) as f64 / distance(a.position, b.position);
            }
        }
        e
    }

    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                position: [
                    a.position[0] + shift[0],
                    a.position[1] + shift[1],
                    a.position[2] + shift[2],
                ],
                ..a.clone()
            })
            .collect();
        Self {
            atoms,
            charge: self.charge,
            label: self.label.clone(),
        }
    }

    /// All coordinates multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::Geometry(format!("scale factor {factor} must be positive")));
        }
        let atoms = self.atoms.iter().map(|a| Atom { position: a.position.map(|x| x * factor), ..a.clone() }).collect();
        Self::new(atoms, self.charge, self.label.clone())
    }
}

pub(crate) fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Plain-text geometry format (positions in bohr):
///
/// ```text
/// # comments start with '#'
/// label h2-equilibrium
/// charge 0
/// H 0.0 0.0 0.0
/// H 0.0 0.0 1.4
/// ```
///
/// `label` and `charge` header lines are optional (defaults: empty label,
/// charge 0) and may appear anywhere. Every other non-blank line is
/// `element x y z`.
impl FromStr for MolecularGeometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut charge = 0i32;
        let mut label = String::new();
        for (idx, raw) in s.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0].to_ascii_lowercase().as_str() {
                "label" => label = fields[1..].join(" "),
                "charge" => {
                    if fields.len() != 2 {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "expected `charge <integer>`".into(),
                        });
                    }
                    charge = fields[1].parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid charge `{}`", fields[1]),
                    })?;
                }
                _ => {
                    if fields.len() != 4 {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "expected `element x y z`".into(),
                        });
                    }
                    let element = fields[0].to_string();
                    let nuclear_charge = nuclear_charge_of(&element).ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("unknown element `{element}`"),
                    })?;
                    let mut position = [0.0; 3];
                    for (k, f) in fields[1..].iter().enumerate() {
                        position[k] = f.parse().map_err(|_| Error::Parse {
                            line: line_no,
                            message: format!("invalid coordinate `{f}`"),
                        })?;
                    }
                    atoms.push(Atom {
                        element,
                        nuclear_charge,
                        position,
                    });
                }
            }
        }
        MolecularGeometry::new(atoms, charge, label)
    }
}

impl fmt::Display for MolecularGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.label.is_empty() {
            writeln!(f, "label {}", self.label)?;
        }
        writeln!(f, "charge {}", self.charge)?;
        for a in &self.atoms {
            writeln!(
                f,
                "{} {:.10} {:.10} {:.10}",
                a.element, a.position[0], a.position[1], a.position[2]
            )?;
        }
        Ok(())
    }
}
