//! Lagrangian sweeps: minimize `y − β·x` over a multiplier grid, then refine
//! the lower convex hull of the achieved `(x, y)` cloud by solving again at
//! the slopes of its longest edges.

use rayon::prelude::*;

use crate::curve::lower_hull;

/// An achieved `(x, y)` pair with the object that attains it.
#[derive(Debug, Clone)]
pub struct Sample<W> {
    pub x: f64,
    pub y: f64,
    pub witness: W,
    pub converged: bool,
}

impl<W> Sample<W> {
    pub fn lagrangian(&self, beta: f64) -> f64 {
        self.y - beta * self.x
    }
}

/// Local minimizer of `y − β·x`.
pub trait LagrangianSolver: Sync {
    type Witness: Clone + Send + Sync;

    /// One local optimization per warm start and per seed.
    fn solve(&self, beta: f64, warm: &[Self::Witness], seeds: &[u64]) -> Vec<Sample<Self::Witness>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub betas: Vec<f64>,
    pub restarts: usize,
    pub seed: u64,
    pub polish: bool,
    pub refine_rounds: usize,
    pub refine_restarts: usize,
    /// Most edges refined per round (longest first).
    pub refine_edges: usize,
}

/// SplitMix64 finalizer.
pub fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of restart `restart` of task `task`, independent of scheduling.
pub fn task_seed(seed: u64, task: u64, restart: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ task) ^ restart.wrapping_mul(0x2545_f491_4f6c_dd1d))
}

fn best<W: Clone>(samples: &[Sample<W>], beta: f64) -> Option<&Sample<W>> {
    samples.iter().filter(|s| s.x.is_finite() && s.y.is_finite()).min_by(|a, b| a.lagrangian(beta).total_cmp(&b.lagrangian(beta)))
}

/// Run the sweep and return the full cloud, anchors first.
pub fn sweep<S: LagrangianSolver>(solver: &S, anchors: Vec<Sample<S::Witness>>, plan: &SweepPlan) -> Vec<Sample<S::Witness>> {
    let mut cloud = anchors;
    let per_beta: Vec<Vec<Sample<S::Witness>>> = plan
        .betas
        .par_iter()
        .enumerate()
        .map(|(k, &beta)| {
            let seeds: Vec<u64> = (0..plan.restarts as u64).map(|r| task_seed(plan.seed, k as u64, r)).collect();
            solver.solve(beta, &[], &seeds)
        })
        .collect();
    if plan.polish && plan.betas.len() > 1 {
        let winners: Vec<Option<S::Witness>> =
            per_beta.iter().zip(&plan.betas).map(|(s, &b)| best(s, b).map(|w| w.witness.clone())).collect();
        let polished: Vec<Vec<Sample<S::Witness>>> = plan
            .betas
            .par_iter()
            .enumerate()
            .map(|(k, &beta)| {
                let mut warm = Vec::new();
                if k > 0 {
                    warm.extend(winners[k - 1].clone());
                }
                if k + 1 < winners.len() {
                    warm.extend(winners[k + 1].clone());
                }
                solver.solve(beta, &warm, &[])
            })
            .collect();
        cloud.extend(polished.into_iter().flatten());
    }
    cloud.extend(per_beta.into_iter().flatten());
    refine(solver, cloud, plan)
}

/// Hull refinement on an existing cloud.
pub fn refine<S: LagrangianSolver>(solver: &S, mut cloud: Vec<Sample<S::Witness>>, plan: &SweepPlan) -> Vec<Sample<S::Witness>> {
    let mut solved: Vec<f64> = plan.betas.clone();
    for round in 0..plan.refine_rounds {
        let pts: Vec<(f64, f64)> = cloud.iter().map(|s| (s.x, s.y)).collect();
        let hull = lower_hull(&pts);
        let mut edges: Vec<(usize, usize, f64, f64)> = hull
            .windows(2)
            .filter_map(|w| {
                let (a, b) = (pts[w[0]], pts[w[1]]);
                let dx = b.0 - a.0;
                let slope = (b.1 - a.1) / dx;
                let len = (dx * dx + (b.1 - a.1).powi(2)).sqrt();
                let fresh = !solved.iter().any(|&s| (s - slope).abs() <= 1e-7 * slope.abs().max(1e-12));
                (dx > 1e-7 && slope > 0.0 && slope.is_finite() && fresh).then_some((w[0], w[1], slope, len))
            })
            .collect();
        if edges.is_empty() {
            break;
        }
        edges.sort_by(|a, b| b.3.total_cmp(&a.3));
        edges.truncate(plan.refine_edges);
        let fresh: Vec<Vec<Sample<S::Witness>>> = edges
            .par_iter()
            .enumerate()
            .map(|(e, &(l, r, slope, _))| {
                let task = 1_000_000 + (round as u64) * 10_000 + e as u64;
                let seeds: Vec<u64> = (0..plan.refine_restarts as u64).map(|k| task_seed(plan.seed, task, k)).collect();
                let warm = vec![cloud[l].witness.clone(), cloud[r].witness.clone()];
                solver.solve(slope, &warm, &seeds)
            })
            .collect();
        solved.extend(edges.iter().map(|e| e.2));
        cloud.extend(fresh.into_iter().flatten());
    }
    cloud
}
