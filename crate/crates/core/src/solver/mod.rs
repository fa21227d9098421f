//! Quantum information-bottleneck and privacy-funnel curves through
//! optimization over Stinespring isometries.

pub(crate) mod cloud;
pub mod curves;
pub mod optimize;
pub mod problem;

use serde::{Deserialize, Serialize};

pub use curves::{
    dimension_study, equivalence_check, ib_objective, normalize_curve, quantum_ib_curve, quantum_ib_dual_curve,
    quantum_pf_curve, quantum_pf_dual_curve, EquivalenceReport, IbObjective,
};
pub use optimize::{gradient_check, GradientCheck, GradientMode, IsometryOptimizer, Objective, Quantity};
pub use problem::{Informations, QuantumSource};

use crate::curve::log_grid;
use crate::error::{invalid, Error, Result};
use crate::optim::LbfgsConfig;

/// Largest `d_W·d_V` accepted by the optimizer.
pub const MAX_ISOMETRY_ROWS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Iteration cap of one local solve.
    pub max_iters: usize,
    /// Finite-difference step, used in [`GradientMode::FiniteDifference`]
    /// and by gradient checks.
    pub grad_step: f64,
    /// Gradient-norm stopping tolerance.
    pub tol: f64,
    /// Output dimension; `None` means `d_X + 1`.
    pub d_w: Option<usize>,
    /// Environment dimension; `None` means `d_X·d_W`.
    pub d_v: Option<usize>,
    pub beta_grid: Vec<f64>,
    pub gradient: GradientMode,
    pub refine_rounds: usize,
    /// Run quadratic-penalty continuation at every requested abscissa.
    pub penalty: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            max_iters: 300,
            grad_step: 1e-5,
            tol: 1e-9,
            d_w: None,
            d_v: None,
            beta_grid: log_grid(1e-2, 1e2, 40),
            gradient: GradientMode::Analytic,
            refine_rounds: 4,
            penalty: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(invalid("restarts must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        if !(self.grad_step > 0.0) {
            return Err(invalid("gradient step must be positive"));
        }
        if self.d_w == Some(0) || self.d_v == Some(0) {
            return Err(invalid("d_W and d_V must be at least 1"));
        }
        if self.beta_grid.is_empty() {
            return Err(invalid("multiplier grid is empty"));
        }
        if self.beta_grid.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return Err(invalid("multipliers must be positive and finite"));
        }
        Ok(())
    }

    /// `(d_W, d_V)` for an input of dimension `d_x`.
    pub fn dims(&self, d_x: usize) -> Result<(usize, usize)> {
        let d_w = self.d_w.unwrap_or(d_x + 1);
        let d_v = self.d_v.unwrap_or(d_x * d_w);
        if d_w * d_v < d_x {
            return Err(Error::Dimension(format!("d_W·d_V = {} is smaller than d_X = {d_x}", d_w * d_v)));
        }
        if d_w * d_v > MAX_ISOMETRY_ROWS {
            return Err(Error::ScaleLimit(format!("d_W·d_V = {} exceeds {MAX_ISOMETRY_ROWS}", d_w * d_v)));
        }
        Ok((d_w, d_v))
    }

    pub(crate) fn lbfgs(&self) -> LbfgsConfig {
        LbfgsConfig { max_iters: self.max_iters, grad_tol: self.tol, ..LbfgsConfig::default() }
    }

    pub(crate) fn optimizer<'a>(&self, src: &'a QuantumSource, d_w: usize, d_v: usize) -> IsometryOptimizer<'a> {
        IsometryOptimizer { src, d_w, d_v, lbfgs: self.lbfgs(), mode: self.gradient, grad_step: self.grad_step }
    }
}
