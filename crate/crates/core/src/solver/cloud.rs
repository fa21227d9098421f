//! Clouds of achieved `(I(Y;W), I(YR;W))` pairs, their envelopes, and the
//! penalty continuation that tightens them at requested abscissae.

use rayon::prelude::*;

use super::optimize::{IsometryOptimizer, Objective, Quantity};
use super::problem::QuantumSource;
use super::SolverConfig;
use crate::channels::StinespringIsometry;
use crate::curve::{CurveKind, CurvePoint, Envelope, Side, Witness, FEASIBILITY_SLACK};
use crate::error::{Error, Result};
use crate::quantum::linalg::{hermitian_eigen, CMat, ONE, ZERO};
use crate::sweep::{sweep, task_seed, LagrangianSolver, Sample, SweepPlan};

/// Sample with `x = I(Y;W)` and `y = I(YR;W)`.
pub(crate) type QSample = Sample<CMat>;

const PENALTY_MU_START: f64 = 10.0;
const PENALTY_MU_MAX: f64 = 1e6;
/// Per-stage iteration cap of the penalty continuation.
const PENALTY_STAGE_ITERS: usize = 120;
/// Task ids of lifting solves, kept apart from sweep tasks.
const LIFT_TASK_BASE: u64 = 2_000_000;

pub(crate) struct QuantumLagrangian<'a> {
    pub opt: IsometryOptimizer<'a>,
    pub funnel: bool,
}

impl QuantumLagrangian<'_> {
    fn oriented(&self, v: CMat, converged: bool) -> QSample {
        let s = evaluate_sample(&self.opt, v, converged);
        if self.funnel {
            swap(s)
        } else {
            s
        }
    }
}

impl LagrangianSolver for QuantumLagrangian<'_> {
    type Witness = CMat;

    fn solve(&self, beta: f64, warm: &[CMat], seeds: &[u64]) -> Vec<QSample> {
        let obj = if self.funnel { Objective::PfLagrangian { beta } } else { Objective::IbLagrangian { beta } };
        let starts = warm.iter().cloned().chain(seeds.iter().map(|&s| self.opt.random_start(s)));
        starts
            .map(|v0| {
                let m = self.opt.optimize(v0, &obj);
                self.oriented(m.point, m.converged)
            })
            .collect()
    }
}

pub(crate) fn swap(s: QSample) -> QSample {
    Sample { x: s.y, y: s.x, witness: s.witness, converged: s.converged }
}

pub(crate) fn evaluate_sample(opt: &IsometryOptimizer<'_>, v: CMat, converged: bool) -> QSample {
    let i = opt.src.evaluate(&v, opt.d_w, opt.d_v);
    Sample { x: i.i_yw, y: i.i_yrw, witness: v, converged }
}

/// Constant, identity, and dephasing-in-the-eigenbasis channels, when the
/// dimensions allow them.
pub(crate) fn anchor_matrices(src: &QuantumSource, d_w: usize, d_v: usize) -> Vec<CMat> {
    let d_x = src.d_x();
    let n = d_w * d_v;
    let mut out = Vec::new();
    if d_v >= d_x {
        let mut m = CMat::from_element(n, d_x, ZERO);
        for x in 0..d_x {
            m[(x, x)] = ONE;
        }
        out.push(m);
    }
    if d_w >= d_x {
        let mut m = CMat::from_element(n, d_x, ZERO);
        for x in 0..d_x {
            m[(x * d_v, x)] = ONE;
        }
        out.push(m);
        if d_v >= d_x {
            let (_, e) = hermitian_eigen(&src.rho_x());
            let mut m = CMat::from_element(n, d_x, ZERO);
            for k in 0..d_x {
                for x in 0..d_x {
                    m[(k * d_v + k, x)] = e[(x, k)].conj();
                }
            }
            out.push(m);
        }
    }
    out
}

/// Where a curve kind reads its abscissa and value from a sample.
pub(crate) fn orient(kind: CurveKind, s: &QSample) -> (f64, f64) {
    match kind {
        CurveKind::Ib | CurveKind::PfDual => (s.x, s.y),
        CurveKind::IbDual | CurveKind::Pf => (s.y, s.x),
    }
}

pub(crate) fn side(kind: CurveKind) -> Side {
    match kind {
        CurveKind::Ib | CurveKind::Pf => Side::LowerMinAbove,
        CurveKind::IbDual | CurveKind::PfDual => Side::UpperMaxBelow,
    }
}

pub(crate) fn penalty_objective(kind: CurveKind, target: f64, mu: f64) -> Objective {
    use Quantity::{Compression, Relevant};
    match kind {
        CurveKind::Ib => Objective::Floor { minimize: Compression, floor_on: Relevant, target, mu },
        CurveKind::Pf => Objective::Floor { minimize: Relevant, floor_on: Compression, target, mu },
        CurveKind::IbDual => Objective::Cap { maximize: Relevant, cap_on: Compression, cap: target, mu },
        CurveKind::PfDual => Objective::Cap { maximize: Compression, cap_on: Relevant, cap: target, mu },
    }
}

pub(crate) fn sweep_plan(cfg: &SolverConfig, funnel: bool) -> SweepPlan {
    let mut betas = cfg.beta_grid.clone();
    // I(YR;W) ≥ I(Y;W), so IB multipliers at or below one return the
    // constant channel.
    if !funnel {
        betas.retain(|&b| b > 1.0);
    }
    SweepPlan {
        betas,
        restarts: cfg.restarts,
        seed: cfg.seed,
        polish: true,
        refine_rounds: cfg.refine_rounds,
        refine_restarts: (cfg.restarts / 4).max(1),
        refine_edges: 16,
    }
}

/// Achieved pairs of one source at fixed dimensions.
pub(crate) struct Cloud<'a> {
    pub src: &'a QuantumSource,
    pub d_w: usize,
    pub d_v: usize,
    pub samples: Vec<QSample>,
}

impl<'a> Cloud<'a> {
    /// Anchors plus `extra` starting channels, then a multiplier sweep.
    pub fn sweep(src: &'a QuantumSource, d_w: usize, d_v: usize, cfg: &SolverConfig, funnel: bool, extra: Vec<CMat>) -> Self {
        let solver = QuantumLagrangian { opt: cfg.optimizer(src, d_w, d_v), funnel };
        let anchors: Vec<QSample> = anchor_matrices(src, d_w, d_v)
            .into_iter()
            .chain(extra)
            .map(|m| solver.oriented(m, true))
            .collect();
        let plan = sweep_plan(cfg, funnel);
        let samples = sweep(&solver, anchors, &plan);
        let samples = if funnel { samples.into_iter().map(swap).collect() } else { samples };
        Self { src, d_w, d_v, samples }
    }

    pub fn optimizer(&self, cfg: &SolverConfig) -> IsometryOptimizer<'a> {
        cfg.optimizer(self.src, self.d_w, self.d_v)
    }

    pub fn envelope(&self, kind: CurveKind) -> Result<Envelope> {
        Envelope::new(self.samples.iter().map(|s| orient(kind, s)).collect(), side(kind))
    }

    /// Quadratic-penalty continuation toward each target, started from the
    /// envelope's neighbouring witnesses; every stage result joins the cloud.
    pub fn penalty_refine(&mut self, cfg: &SolverConfig, kind: CurveKind, targets: &[f64]) -> Result<()> {
        let env = self.envelope(kind)?;
        let (lo, hi) = env.x_range();
        let mut opt = self.optimizer(cfg);
        opt.lbfgs.max_iters = opt.lbfgs.max_iters.min(PENALTY_STAGE_ITERS);
        let jobs: Vec<(f64, CMat)> = targets
            .iter()
            .filter(|&&t| match side(kind) {
                Side::LowerMinAbove => t > lo && t <= hi + FEASIBILITY_SLACK,
                Side::UpperMaxBelow => t < hi && t >= lo - FEASIBILITY_SLACK,
            })
            .flat_map(|&t| {
                let it = env.eval(t).expect("target inside the envelope range");
                let mut starts = vec![(t, self.samples[it.left].witness.clone())];
                if it.right != it.left {
                    starts.push((t, self.samples[it.right].witness.clone()));
                }
                starts
            })
            .collect();
        let fresh: Vec<Vec<QSample>> =
            jobs.par_iter().map(|(t, v)| penalty_path(&opt, v.clone(), kind, *t)).collect();
        self.samples.extend(fresh.into_iter().flatten());
        Ok(())
    }

    /// Best sample for the IB Lagrangian at `beta`.
    pub fn best_ib(&self, beta: f64) -> Option<&QSample> {
        self.samples.iter().min_by(|a, b| (a.y - beta * a.x).total_cmp(&(b.y - beta * b.x)))
    }

    /// Vertices of the lower hull in `(I(Y;W), I(YR;W))`.
    pub fn lower_vertices(&self) -> Vec<&QSample> {
        let pts: Vec<(f64, f64)> = self.samples.iter().map(|s| (s.x, s.y)).collect();
        crate::curve::lower_hull(&pts).into_iter().map(|i| &self.samples[i]).collect()
    }

    pub fn isometry(&self, v: &CMat) -> Result<StinespringIsometry> {
        StinespringIsometry::from_matrix(v.clone(), self.src.d_x(), self.d_w, self.d_v)
    }

    /// Curve points at `grid`; targets beyond `limit` or outside the
    /// achieved range are infeasible.
    pub fn points(&self, kind: CurveKind, grid: &[f64], limit: f64, what: &str) -> Result<Vec<CurvePoint>> {
        let env = self.envelope(kind)?;
        let mut out = Vec::with_capacity(grid.len());
        for &a in grid {
            if a > limit + FEASIBILITY_SLACK {
                return Err(Error::Infeasible(format!("{what} {a} exceeds the maximum {limit}")));
            }
            let it = env.eval(a).ok_or_else(|| {
                let (lo, hi) = env.x_range();
                Error::Infeasible(format!("{what} {a} not reached by any computed channel (range [{lo}, {hi}])"))
            })?;
            let (l, r) = (&self.samples[it.left], &self.samples[it.right]);
            let left = Witness::Isometry(self.isometry(&l.witness)?);
            let witness = if it.left == it.right {
                left
            } else {
                Witness::mix(it.lambda, &left, &Witness::Isometry(self.isometry(&r.witness)?))?
            };
            out.push(CurvePoint {
                abscissa: a,
                value: it.value,
                achieved_constraint: it.achieved,
                converged: l.converged && r.converged,
                witness: Some(witness),
                reference: None,
            });
        }
        Ok(out)
    }
}

/// Continuation in the penalty weight from `start`.
pub(crate) fn penalty_path(opt: &IsometryOptimizer<'_>, start: CMat, kind: CurveKind, target: f64) -> Vec<QSample> {
    let mut v = start;
    let mut out = Vec::new();
    let mut mu = PENALTY_MU_START;
    while mu <= PENALTY_MU_MAX * 2.0 {
        let m = opt.optimize(v, &penalty_objective(kind, target, mu));
        v = m.point;
        out.push(evaluate_sample(opt, v.clone(), m.converged));
        mu *= 2.0;
    }
    out
}

/// Re-optimize embedded witnesses of a smaller-dimensional cloud at each
/// multiplier, after a small random nudge into the new dimensions.
pub(crate) fn lift(prev: &Cloud<'_>, d_w: usize, d_v: usize, cfg: &SolverConfig) -> Result<Vec<CMat>> {
    if d_w < prev.d_w || d_v < prev.d_v {
        return Err(Error::Dimension("dimension study needs non-decreasing d_W and d_V".into()));
    }
    let opt = cfg.optimizer(prev.src, d_w, d_v);
    let plan = sweep_plan(cfg, false);
    let embed = |m: &CMat| crate::channels::isometry::embed_isometry_matrix(m, prev.d_w, prev.d_v, d_w, d_v);
    let mut out: Vec<CMat> = prev.lower_vertices().into_iter().map(|s| embed(&s.witness)).collect();
    let lifted: Vec<CMat> = plan
        .betas
        .par_iter()
        .enumerate()
        .filter_map(|(k, &beta)| {
            let best = prev.best_ib(beta)?;
            let v0 = opt.perturb(&embed(&best.witness), task_seed(cfg.seed, LIFT_TASK_BASE + k as u64, 0), 0.05);
            Some(opt.optimize(v0, &Objective::IbLagrangian { beta }).point)
        })
        .collect();
    out.extend(lifted);
    Ok(out)
}
