//! Limited-memory BFGS with Armijo backtracking over a retraction.
//!
//! Points live on whatever space the caller likes; the optimizer only sees
//! gradient vectors in a fixed coordinate system and moves through
//! `retract(point, step)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbfgsConfig {
    pub max_iters: usize,
    /// Stop when the gradient 2-norm falls below this.
    pub grad_tol: f64,
    /// Stop when the relative decrease stays below this for a few iterations.
    pub f_tol: f64,
    pub memory: usize,
    /// Length of the first (steepest-descent) step.
    pub initial_step: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { max_iters: 400, grad_tol: 1e-9, f_tol: 1e-12, memory: 8, initial_step: 0.1 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum<P> {
    pub point: P,
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn direction(g: &[f64], mem: &[(Vec<f64>, Vec<f64>, f64)]) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = mem.last() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Minimize `f` starting at `x0`. `eval` returns the value and gradient.
pub fn minimize<P: Clone>(
    x0: P,
    eval: impl Fn(&P) -> (f64, Vec<f64>),
    retract: impl Fn(&P, &[f64]) -> P,
    cfg: &LbfgsConfig,
) -> Minimum<P> {
    let mut x = x0;
    let (mut f, mut g) = eval(&x);
    let mut mem: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(cfg.memory);
    let mut stall = 0usize;
    for it in 0..cfg.max_iters {
        let gn = norm(&g);
        if !f.is_finite() {
            return Minimum { point: x, value: f, iters: it, converged: false };
        }
        if gn <= cfg.grad_tol {
            return Minimum { point: x, value: f, iters: it, converged: true };
        }
        let mut d = if mem.is_empty() {
            g.iter().map(|v| -v * cfg.initial_step / gn).collect()
        } else {
            direction(&g, &mem)
        };
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            mem.clear();
            d = g.iter().map(|v| -v * cfg.initial_step / gn).collect();
            slope = dot(&g, &d);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let step: Vec<f64> = d.iter().map(|v| v * t).collect();
            let xn = retract(&x, &step);
            let (fnew, gnew) = eval(&xn);
            if fnew.is_finite() && fnew <= f + 1e-4 * t * slope {
                accepted = Some((xn, fnew, gnew, step));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew, gnew, step)) = accepted else {
            if mem.is_empty() {
                // Steepest descent cannot decrease f at machine precision.
                return Minimum { point: x, value: f, iters: it, converged: true };
            }
            mem.clear();
            continue;
        };
        let yv: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&step, &yv);
        if sy > 1e-16 * norm(&step) * norm(&yv) && sy > 0.0 {
            if mem.len() == cfg.memory {
                mem.remove(0);
            }
            mem.push((step, yv, 1.0 / sy));
        }
        let decrease = f - fnew;
        x = xn;
        f = fnew;
        g = gnew;
        if decrease <= cfg.f_tol * f.abs().max(1.0) {
            stall += 1;
            if stall >= 3 {
                return Minimum { point: x, value: f, iters: it + 1, converged: true };
            }
        } else {
            stall = 0;
        }
    }
    Minimum { point: x, value: f, iters: cfg.max_iters, converged: false }
}
