//! Paired two-electron states and their energy.

use serde::{Deserialize, Serialize};

use crate::chem::IntegralSet;
use crate::{Error, Result};

/// `Ψ = Σ_p g_p |pα pβ⟩` with `g_p = √n_p · s_p`, where the amplitude signs
/// `s` follow from the consecutive relative signs `ξ` with `s_0 = +1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeminalState {
    n: Vec<f64>,
    xi: Vec<f64>,
}

impl GeminalState {
    pub fn new(n: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::Domain("a geminal needs at least one orbital".into()));
        }
        if xi.len() + 1 != n.len() {
            return Err(Error::LengthMismatch { expected: n.len() - 1, actual: xi.len() });
        }
        if let Some(bad) = n.iter().find(|&&x| !(0.0..=1.0 + 1e-12).contains(&x)) {
            return Err(Error::Domain(format!("occupation {bad} outside [0, 1]")));
        }
        let total: f64 = n.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("occupations sum to {total}, expected 1")));
        }
        if xi.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::Domain("relative signs must be ±1".into()));
        }
        Ok(GeminalState { n, xi })
    }

    /// Clamps negative estimates to zero and rescales to unit sum.
    pub fn from_estimates(raw: &[f64], xi: Vec<f64>) -> Result<Self> {
        let clamped: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Domain(format!("occupation estimates sum to {total}")));
        }
        Self::new(clamped.iter().map(|x| (x / total).min(1.0)).collect(), xi)
    }

    /// From real amplitudes of any norm; a zero amplitude inherits `+1`.
    pub fn from_amplitudes(g: &[f64]) -> Result<Self> {
        let norm: f64 = g.iter().map(|x| x * x).sum();
        if !(norm > 0.0) {
            return Err(Error::Domain("zero amplitude vector".into()));
        }
        let sign = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
        let n = g.iter().map(|x| x * x / norm).collect();
        let xi = g.windows(2).map(|w| sign(w[0]) * sign(w[1])).collect();
        Self::new(n, xi)
    }

    pub fn r(&self) -> usize {
        self.n.len()
    }

    pub fn occupations(&self) -> &[f64] {
        &self.n
    }

    pub fn phases(&self) -> &[f64] {
        &self.xi
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        let mut s = 1.0;
        let mut g = Vec::with_capacity(self.n.len());
        for (p, &np) in self.n.iter().enumerate() {
            if p > 0 {
                s *= self.xi[p - 1];
            }
            g.push(s * np.sqrt());
        }
        g
    }
}

/// `E = Σ_p n_p (2h_pp + (pp|pp)) + Σ_{p≠q} g_p g_q (pq|pq) + E_nuc` in the
/// orthonormal orbital basis of `ints`.
pub fn assemble_2dm_energy(state: &GeminalState, ints: &IntegralSet) -> Result<f64> {
    let r = ints.rank();
    if state.r() != r {
        return Err(Error::LengthMismatch { expected: r, actual: state.r() });
    }
    let off = (0..r).flat_map(|i| (0..r).map(move |j| (i, j))).map(|(i, j)| (ints.overlap[(i, j)] - f64::from(u8::from(i == j))).abs()).fold(0.0, f64::max);
    if off > 1e-8 {
        return Err(Error::Precondition(format!("orbital basis is not orthonormal (|S − I| = {off:.2e})")));
    }
    let g = state.amplitudes();
    let mut e = ints.enuc;
    for p in 0..r {
        e += state.n[p] * (2.0 * ints.hcore[(p, p)] + ints.eri(p, p, p, p));
        for q in 0..r {
            if q != p {
                e += g[p] * g[q] * ints.eri(p, q, p, q);
            }
        }
    }
    Ok(e)
}
