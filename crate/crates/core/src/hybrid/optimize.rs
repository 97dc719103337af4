//! Derivative-free Nelder-Mead and finite-difference BFGS.

use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    /// Edge length of the initial regular simplex (radians).
    pub scale: f64,
    pub max_iterations: usize,
    /// Spread of simplex values required for convergence.
    pub ftol: f64,
    /// Largest vertex distance from the best vertex required for convergence.
    pub xtol: f64,
    /// Re-measure the best vertex every iteration and keep a running mean.
    pub reevaluate_best: bool,
}

impl NelderMeadOptions {
    pub fn noiseless() -> Self {
        NelderMeadOptions { scale: 0.35, max_iterations: 200, ftol: 1e-8, xtol: 1e-5, reevaluate_best: false }
    }

    pub fn noisy() -> Self {
        NelderMeadOptions { scale: 0.35, max_iterations: 200, ftol: 1e-4, xtol: 1e-3, reevaluate_best: true }
    }
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self::noiseless()
    }
}

/// Regular simplex with edge `scale` anchored at `x0`.
pub fn regular_simplex(x0: &[f64], scale: f64) -> Vec<Vec<f64>> {
    let n = x0.len() as f64;
    let p = scale / (n * 2f64.sqrt()) * ((n + 1.0).sqrt() + n - 1.0);
    let q = scale / (n * 2f64.sqrt()) * ((n + 1.0).sqrt() - 1.0);
    let mut simplex = vec![x0.to_vec()];
    for i in 0..x0.len() {
        simplex.push(x0.iter().enumerate().map(|(j, &x)| x + if i == j { p } else { q }).collect());
    }
    simplex
}

struct Vertex {
    x: Vec<f64>,
    f: f64,
    samples: usize,
}

fn combine(a: &[f64], b: &[f64], w: f64) -> Vec<f64> {
    // a + w (b − a)
    a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect()
}

/// Minimizes `f` with reflection, expansion, contraction and shrink
/// coefficients 1, 2, ½, ½.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> Result<f64>, x0: &[f64], opts: &NelderMeadOptions) -> Result<OptimizeResult> {
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| -> Result<f64> {
        evaluations += 1;
        f(x)
    };
    if x0.is_empty() {
        let v = eval(x0)?;
        return Ok(OptimizeResult { x: vec![], f: v, iterations: 0, evaluations: 1, converged: true });
    }
    let mut simplex = Vec::new();
    for x in regular_simplex(x0, opts.scale) {
        let v = eval(&x)?;
        simplex.push(Vertex { x, f: v, samples: 1 });
    }
    let n = x0.len();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        let spread = simplex[n].f - simplex[0].f;
        let diameter = simplex[1..].iter().map(|v| v.x.iter().zip(&simplex[0].x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if spread <= opts.ftol && diameter <= opts.xtol {
            converged = true;
            break;
        }
        iterations += 1;
        if opts.reevaluate_best {
            let v = eval(&simplex[0].x.clone())?;
            let b = &mut simplex[0];
            b.f = (b.f * b.samples as f64 + v) / (b.samples + 1) as f64;
            b.samples += 1;
            simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v.x[j]).sum::<f64>() / n as f64).collect();
        let worst = &simplex[n];
        let xr = combine(&centroid, &worst.x, -1.0);
        let fr = eval(&xr)?;
        if fr < simplex[0].f {
            let xe = combine(&centroid, &worst.x, -2.0);
            let fe = eval(&xe)?;
            simplex[n] = if fe < fr { Vertex { x: xe, f: fe, samples: 1 } } else { Vertex { x: xr, f: fr, samples: 1 } };
            continue;
        }
        if fr < simplex[n - 1].f {
            simplex[n] = Vertex { x: xr, f: fr, samples: 1 };
            continue;
        }
        let (xc, fc) = if fr < simplex[n].f {
            let xc = combine(&centroid, &xr, 0.5);
            let fc = eval(&xc)?;
            (xc, fc)
        } else {
            let xc = combine(&centroid, &simplex[n].x, 0.5);
            let fc = eval(&xc)?;
            (xc, fc)
        };
        if fc < fr.min(simplex[n].f) {
            simplex[n] = Vertex { x: xc, f: fc, samples: 1 };
            continue;
        }
        let best = simplex[0].x.clone();
        for v in simplex[1..].iter_mut() {
            v.x = combine(&best, &v.x, 0.5);
            v.f = eval(&v.x)?;
            v.samples = 1;
        }
    }
    simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
    let best = simplex.swap_remove(0);
    Ok(OptimizeResult { x: best.x, f: best.f, iterations, evaluations, converged })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BfgsOptions {
    /// Central-difference step.
    pub step: f64,
    /// Gradient max-norm for convergence.
    pub gtol: f64,
    pub max_iterations: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions { step: 1e-5, gtol: 1e-6, max_iterations: 100 }
    }
}

/// BFGS with central finite-difference gradients and Armijo backtracking.
/// `converged = false` flags an iteration cap or a failed line search; the
/// best point found is returned either way and `f` never exceeds `f(x0)`.
pub fn bfgs(mut f: impl FnMut(&[f64]) -> Result<f64>, x0: &[f64], opts: &BfgsOptions) -> Result<OptimizeResult> {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| -> Result<f64> {
        evaluations += 1;
        f(x)
    };
    let mut x = x0.to_vec();
    let mut fx = eval(&x)?;
    if n == 0 {
        return Ok(OptimizeResult { x, f: fx, iterations: 0, evaluations, converged: true });
    }
    let grad = |x: &[f64], eval: &mut dyn FnMut(&[f64]) -> Result<f64>| -> Result<Vec<f64>> {
        let mut g = vec![0.0; n];
        let mut y = x.to_vec();
        for i in 0..n {
            y[i] = x[i] + opts.step;
            let fp = eval(&y)?;
            y[i] = x[i] - opts.step;
            let fm = eval(&y)?;
            y[i] = x[i];
            g[i] = (fp - fm) / (2.0 * opts.step);
        }
        Ok(g)
    };
    let mut g = grad(&x, &mut eval)?;
    let mut h = nalgebra::DMatrix::<f64>::identity(n, n);
    let mut iterations = 0;
    let mut converged = false;
    let mut reset = false;
    while iterations < opts.max_iterations {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < opts.gtol {
            converged = true;
            break;
        }
        iterations += 1;
        let gv = nalgebra::DVector::from_column_slice(&g);
        let mut d = -(&h * &gv);
        let mut slope = d.dot(&gv);
        if slope >= 0.0 {
            h = nalgebra::DMatrix::identity(n, n);
            d = -gv.clone();
            slope = d.dot(&gv);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let xn: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + alpha * b).collect();
            let fn_ = eval(&xn)?;
            if fn_ <= fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fn_));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            // no representable decrease left along d
            if slope.abs() <= 1e-12 * (1.0 + fx.abs()) {
                converged = true;
                break;
            }
            if reset {
                break;
            }
            reset = true;
            h = nalgebra::DMatrix::identity(n, n);
            continue;
        };
        reset = false;
        let gn = grad(&xn, &mut eval)?;
        let s = nalgebra::DVector::from_iterator(n, xn.iter().zip(&x).map(|(a, b)| a - b));
        let yv = nalgebra::DVector::from_iterator(n, gn.iter().zip(&g).map(|(a, b)| a - b));
        let sy = s.dot(&yv);
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let id = nalgebra::DMatrix::<f64>::identity(n, n);
            let left = &id - rho * &s * yv.transpose();
            let right = &id - rho * &yv * s.transpose();
            h = left * &h * right + rho * &s * s.transpose();
        }
        x = xn;
        fx = fn_;
        g = gn;
    }
    Ok(OptimizeResult { x, f: fx, iterations, evaluations, converged })
}
