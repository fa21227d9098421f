//! Local optimization over isometries `V: X → W ⊗ V`.
//!
//! Directions are anti-Hermitian generators `A` in the parameter basis of
//! [`antihermitian_from_params`]; a step moves `V` to the polar factor of
//! `V + A V`, which stays an isometry without an `n × n` exponential.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::problem::{generator_gradient, Informations, QuantumSource};
use crate::channels::antihermitian_from_params;
use crate::optim::{minimize, LbfgsConfig, Minimum};
use crate::quantum::linalg::{c, hermitian_eigen, CMat};
use crate::quantum::random::haar_isometry;

/// How gradients are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    /// Closed-form entropy derivatives.
    #[default]
    Analytic,
    /// Central differences in the generator coordinates.
    FiniteDifference,
}

/// One of the two information quantities of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    /// `I(Y;W)`.
    Relevant,
    /// `I(YR;W)`.
    Compression,
}

impl Quantity {
    fn of(self, i: Informations) -> f64 {
        match self {
            Quantity::Relevant => i.i_yw,
            Quantity::Compression => i.i_yrw,
        }
    }

    fn weights(self, w: f64) -> (f64, f64) {
        match self {
            Quantity::Relevant => (w, 0.0),
            Quantity::Compression => (0.0, w),
        }
    }
}

/// Scalar functions of `(I(Y;W), I(YR;W))` that are minimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    /// `I(YR;W) − β·I(Y;W)`.
    IbLagrangian { beta: f64 },
    /// `I(Y;W) − β·I(YR;W)`.
    PfLagrangian { beta: f64 },
    /// `minimize + μ·max(0, target − floor_on)²`.
    Floor { minimize: Quantity, floor_on: Quantity, target: f64, mu: f64 },
    /// `−maximize + μ·max(0, cap_on − cap)²`.
    Cap { maximize: Quantity, cap_on: Quantity, cap: f64, mu: f64 },
}

impl Objective {
    /// Value and partial derivatives with respect to `I(Y;W)` and `I(YR;W)`.
    pub fn value_and_weights(&self, i: Informations) -> (f64, (f64, f64)) {
        match *self {
            Objective::IbLagrangian { beta } => (i.i_yrw - beta * i.i_yw, (-beta, 1.0)),
            Objective::PfLagrangian { beta } => (i.i_yw - beta * i.i_yrw, (1.0, -beta)),
            Objective::Floor { minimize, floor_on, target, mu } => {
                let short = (target - floor_on.of(i)).max(0.0);
                let (a, b) = minimize.weights(1.0);
                let (pa, pb) = floor_on.weights(-2.0 * mu * short);
                (minimize.of(i) + mu * short * short, (a + pa, b + pb))
            }
            Objective::Cap { maximize, cap_on, cap, mu } => {
                let over = (cap_on.of(i) - cap).max(0.0);
                let (a, b) = maximize.weights(-1.0);
                let (pa, pb) = cap_on.weights(2.0 * mu * over);
                (-maximize.of(i) + mu * over * over, (a + pa, b + pb))
            }
        }
    }
}

/// Polar factor `M (M†M)^{-1/2}`.
pub fn polar_factor(m: &CMat) -> CMat {
    let gram = m.adjoint() * m;
    let (vals, q) = hermitian_eigen(&gram);
    let mut scaled = q.clone();
    for (j, &l) in vals.iter().enumerate() {
        let s = 1.0 / l.max(1e-300).sqrt();
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= c(s, 0.0);
        }
    }
    m * (scaled * q.adjoint())
}

/// `polar(V + A(step) V)`.
pub fn retract(v: &CMat, step: &[f64]) -> CMat {
    let a = antihermitian_from_params(step, v.nrows()).expect("step has n² entries");
    let m = v + &a * v;
    polar_factor(&m)
}

/// Optimizer bound to a source and output/environment dimensions.
#[derive(Debug, Clone)]
pub struct IsometryOptimizer<'a> {
    pub src: &'a QuantumSource,
    pub d_w: usize,
    pub d_v: usize,
    pub lbfgs: LbfgsConfig,
    pub mode: GradientMode,
    pub grad_step: f64,
}

impl IsometryOptimizer<'_> {
    pub fn n(&self) -> usize {
        self.d_w * self.d_v
    }

    pub fn value(&self, v: &CMat, obj: &Objective) -> f64 {
        obj.value_and_weights(self.src.evaluate(v, self.d_w, self.d_v)).0
    }

    pub fn analytic_gradient(&self, v: &CMat, obj: &Objective) -> (f64, Vec<f64>) {
        let info = self.src.evaluate(v, self.d_w, self.d_v);
        let (f, w) = obj.value_and_weights(info);
        let (_, cm) = self.src.evaluate_with_gradient(v, self.d_w, self.d_v, w);
        (f, generator_gradient(&cm))
    }

    pub fn fd_gradient(&self, v: &CMat, obj: &Objective, h: f64) -> (f64, Vec<f64>) {
        let n = self.n();
        let f = self.value(v, obj);
        let mut e = vec![0.0; n * n];
        let mut g = Vec::with_capacity(n * n);
        for k in 0..n * n {
            e[k] = h;
            let fp = self.value(&retract(v, &e), obj);
            e[k] = -h;
            let fm = self.value(&retract(v, &e), obj);
            e[k] = 0.0;
            g.push((fp - fm) / (2.0 * h));
        }
        (f, g)
    }

    pub fn value_and_gradient(&self, v: &CMat, obj: &Objective) -> (f64, Vec<f64>) {
        match self.mode {
            GradientMode::Analytic => self.analytic_gradient(v, obj),
            GradientMode::FiniteDifference => self.fd_gradient(v, obj, self.grad_step),
        }
    }

    pub fn optimize(&self, v0: CMat, obj: &Objective) -> Minimum<CMat> {
        minimize(v0, |v| self.value_and_gradient(v, obj), retract, &self.lbfgs)
    }

    /// Haar-random starting isometry.
    pub fn random_start(&self, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        haar_isometry(&mut rng, self.n(), self.src.d_x())
    }

    /// `v` nudged by a random generator of size `scale`.
    pub fn perturb(&self, v: &CMat, seed: u64, scale: f64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = haar_isometry(&mut rng, self.n(), v.ncols());
        polar_factor(&(v + noise * c(scale, 0.0)))
    }
}

/// Agreement between analytic and finite-difference gradients at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    /// `‖g_analytic − g_fd(h)‖ / max(‖g_analytic‖, 1e-12)`.
    pub analytic_vs_fd: f64,
    /// Same comparison between steps `h` and `h/10`.
    pub step_consistency: f64,
}

pub fn gradient_check(opt: &IsometryOptimizer<'_>, v: &CMat, obj: &Objective, h: f64) -> GradientCheck {
    let norm = |a: &[f64]| a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff = |a: &[f64], b: &[f64]| norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>());
    let (_, ga) = opt.analytic_gradient(v, obj);
    let (_, g1) = opt.fd_gradient(v, obj, h);
    let (_, g2) = opt.fd_gradient(v, obj, h / 10.0);
    let scale = norm(&ga).max(1e-12);
    GradientCheck { analytic_vs_fd: diff(&ga, &g1) / scale, step_consistency: diff(&g1, &g2) / norm(&g1).max(1e-12) }
}
