//! Device calibration tables.
//!
//! Text format, one record per line, `#` starts a comment:
//!
//! ```text
//! device ibm-5
//! qubit <index> <u2_error> <u3_error> <readout_error> <t1_us> <t2_us>
//! cx <control> <target> <cx_error>
//! ```
//!
//! Qubit rows must cover indices `0..n` exactly once. A qubit may have no
//! coupling rows.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub u2_error: f64,
    pub u3_error: f64,
    pub readout_error: f64,
    pub t1_us: f64,
    pub t2_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCalibration {
    pub control: usize,
    pub target: usize,
    pub cx_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceCalibration {
    pub label: String,
    pub qubits: Vec<QubitCalibration>,
    pub couplings: Vec<CouplingCalibration>,
}

const IBM5: &str = include_str!("../../../../calib/ibm5.txt");
const IBM14: &str = include_str!("../../../../calib/ibm14.txt");

impl DeviceCalibration {
    /// Bundled 5-qubit table (same content as `calib/ibm5.txt`).
    pub fn ibm5() -> Self {
        IBM5.parse().expect("bundled calibration parses")
    }

    /// Bundled 14-qubit table (same content as `calib/ibm14.txt`).
    pub fn ibm14() -> Self {
        IBM14.parse().expect("bundled calibration parses")
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubit(&self, q: usize) -> Result<&QubitCalibration> {
        self.qubits.get(q).ok_or(Error::IndexOutOfRange { index: q, limit: self.qubits.len() })
    }

    /// CX error between two physical qubits. Only one direction is listed per
    /// pair; the listed value is used for the reverse direction as well.
    pub fn cx_error(&self, a: usize, b: usize) -> Option<f64> {
        let find = |c: usize, t: usize| self.couplings.iter().find(|k| k.control == c && k.target == t);
        find(a, b).or_else(|| find(b, a)).map(|k| k.cx_error)
    }

    pub fn couplings_of(&self, q: usize) -> impl Iterator<Item = &CouplingCalibration> {
        self.couplings.iter().filter(move |k| k.control == q)
    }
}

fn field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Calibration { line, message: format!("missing {what}") })?;
    tok.parse().map_err(|_| Error::Calibration { line, message: format!("cannot parse {what} from {tok:?}") })
}

fn rate(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field(tok, line, what)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Calibration { line, message: format!("{what} {v} outside [0, 1]") });
    }
    Ok(v)
}

fn time(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field(tok, line, what)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Calibration { line, message: format!("{what} must be positive, got {v}") });
    }
    Ok(v)
}

impl FromStr for DeviceCalibration {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut label = None;
        let mut rows: Vec<(usize, usize, QubitCalibration)> = Vec::new();
        let mut couplings = Vec::new();
        let mut coupling_lines = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tok = content.split_whitespace();
            let kind = tok.next().unwrap();
            match kind {
                "device" => {
                    let name = tok.collect::<Vec<_>>().join(" ");
                    if name.is_empty() {
                        return Err(Error::Calibration { line, message: "device needs a name".into() });
                    }
                    label = Some(name);
                    continue;
                }
                "qubit" => {
                    let idx: usize = field(tok.next(), line, "qubit index")?;
                    let q = QubitCalibration {
                        u2_error: rate(tok.next(), line, "u2 error")?,
                        u3_error: rate(tok.next(), line, "u3 error")?,
                        readout_error: rate(tok.next(), line, "readout error")?,
                        t1_us: time(tok.next(), line, "T1")?,
                        t2_us: time(tok.next(), line, "T2")?,
                    };
                    rows.push((idx, line, q));
                }
                "cx" => {
                    let control: usize = field(tok.next(), line, "control")?;
                    let target: usize = field(tok.next(), line, "target")?;
                    let cx_error = rate(tok.next(), line, "cx error")?;
                    if control == target {
                        return Err(Error::Calibration { line, message: "cx control equals target".into() });
                    }
                    couplings.push(CouplingCalibration { control, target, cx_error });
                    coupling_lines.push(line);
                }
                other => return Err(Error::Calibration { line, message: format!("unknown record {other:?}") }),
            }
            if let Some(extra) = tok.next() {
                return Err(Error::Calibration { line, message: format!("trailing field {extra:?}") });
            }
        }
        let label = label.ok_or(Error::Calibration { line: 0, message: "no device line".into() })?;
        rows.sort_by_key(|r| r.0);
        let mut qubits = Vec::with_capacity(rows.len());
        for (expected, &(idx, line, q)) in rows.iter().enumerate() {
            if idx != expected {
                return Err(Error::Calibration { line, message: format!("qubit rows must cover 0..{} once; found {idx}", rows.len()) });
            }
            qubits.push(q);
        }
        for (c, &line) in couplings.iter().zip(&coupling_lines) {
            if c.control >= qubits.len() || c.target >= qubits.len() {
                return Err(Error::Calibration { line, message: format!("cx {} {} names an unknown qubit", c.control, c.target) });
            }
        }
        Ok(DeviceCalibration { label, qubits, couplings })
    }
}

pub fn load_calibration(path: impl AsRef<Path>) -> Result<DeviceCalibration> {
    std::fs::read_to_string(path)?.parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ibm5_qubit_zero() {
        let cal = DeviceCalibration::ibm5();
        assert_eq!(cal.label, "ibm-5");
        let q = cal.qubit(0).unwrap();
        assert_eq!(q.u2_error, 2.7e-3);
        assert_eq!(q.readout_error, 0.05);
        assert_eq!(q.t1_us, 46.0);
        assert_eq!(cal.cx_error(0, 1), Some(5.1e-2));
    }

    #[test]
    fn ibm14_qubit_eleven() {
        let cal = DeviceCalibration::ibm14();
        assert_eq!(cal.n_qubits(), 14);
        let q = cal.qubit(11).unwrap();
        assert_eq!(q.u2_error, 0.181);
        assert_eq!(q.readout_error, 0.34);
    }

    #[test]
    fn qubit_without_couplings_is_valid() {
        let cal = DeviceCalibration::ibm5();
        assert_eq!(cal.couplings_of(2).count(), 0);
        assert_eq!(cal.n_qubits(), 5);
    }

    #[test]
    fn reverse_direction_uses_listed_value() {
        let cal = DeviceCalibration::ibm14();
        assert_eq!(cal.cx_error(0, 1), Some(3.7e-2));
        assert_eq!(cal.cx_error(1, 0), Some(3.7e-2));
        assert_eq!(cal.cx_error(0, 2), None);
    }

    #[test]
    fn shipped_files_match_bundle() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../calib");
        assert_eq!(load_calibration(format!("{dir}/ibm5.txt")).unwrap(), DeviceCalibration::ibm5());
        assert_eq!(load_calibration(format!("{dir}/ibm14.txt")).unwrap(), DeviceCalibration::ibm14());
    }

    #[test]
    fn malformed_rows_rejected() {
        let bad_rate = "device d\nqubit 0 0.1 0.2 1.5 10 10\n";
        assert!(matches!(bad_rate.parse::<DeviceCalibration>(), Err(Error::Calibration { line: 2, .. })));
        let bad_time = "device d\nqubit 0 0.1 0.2 0.1 0 10\n";
        assert!(bad_time.parse::<DeviceCalibration>().is_err());
        let short = "device d\nqubit 0 0.1 0.2\n";
        assert!(short.parse::<DeviceCalibration>().is_err());
        let gap = "device d\nqubit 1 0.1 0.2 0.1 10 10\n";
        assert!(gap.parse::<DeviceCalibration>().is_err());
        let dangling = "device d\nqubit 0 0.1 0.2 0.1 10 10\ncx 0 3 0.1\n";
        assert!(matches!(dangling.parse::<DeviceCalibration>(), Err(Error::Calibration { line: 3, .. })));
        assert!("qubit 0 0.1 0.2 0.1 10 10\n".parse::<DeviceCalibration>().is_err());
    }
}
