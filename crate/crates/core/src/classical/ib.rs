//! Classical information bottleneck by self-consistent (Tishby-style)
//! iteration, swept over the trade-off multiplier.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distribution::{JointDistribution, Pruned};
use crate::channels::ConditionalChannel;
use crate::curve::{config_hash, log_grid, Curve, CurveKind, CurveMeta, CurvePoint, Envelope, Side, Witness};
use crate::error::{invalid, Error, Result};
use crate::quantum::random::random_simplex;
use crate::sweep::{sweep, LagrangianSolver, Sample, SweepPlan};

/// Settings shared by the classical IB and privacy-funnel solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Iteration cap of one local solve.
    pub max_iters: usize,
    /// Relative change of the Lagrangian that stops an iteration.
    pub tol: f64,
    pub beta_grid: Vec<f64>,
    pub refine_rounds: usize,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self { restarts: 20, seed: 0, max_iters: 5000, tol: 1e-9, beta_grid: log_grid(1e-3, 1e3, 60), refine_rounds: 5 }
    }
}

impl ClassicalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(invalid("restarts must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        if self.beta_grid.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return Err(invalid("multipliers must be positive and finite"));
        }
        Ok(())
    }

    pub(crate) fn plan(&self) -> SweepPlan {
        SweepPlan {
            betas: self.beta_grid.clone(),
            restarts: self.restarts,
            seed: self.seed,
            polish: true,
            refine_rounds: self.refine_rounds,
            refine_restarts: (self.restarts / 4).max(1),
            refine_edges: 48,
        }
    }
}

/// A pruned source with cached conditionals.
#[derive(Debug, Clone)]
pub(crate) struct Source {
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    pub pyx: Vec<Vec<f64>>,
    pub pruned: Pruned,
    pub original_nx: usize,
}

impl Source {
    pub fn new(p: &JointDistribution) -> Self {
        let (joint, pruned) = p.prune();
        Self {
            px: joint.px(),
            py: joint.py(),
            pyx: joint.y_given_x(),
            pruned,
            original_nx: p.shape().0,
        }
    }

    pub fn nx(&self) -> usize {
        self.px.len()
    }

    /// `(I(X;W), I(Y;W))` of a channel on the pruned alphabet.
    pub fn informations(&self, q: &[Vec<f64>]) -> (f64, f64) {
        let nw = q[0].len();
        let ny = self.py.len();
        let mut pw = vec![0.0; nw];
        let mut pyw = vec![vec![0.0; ny]; nw];
        for (x, row) in q.iter().enumerate() {
            for w in 0..nw {
                let m = self.px[x] * row[w];
                pw[w] += m;
                for y in 0..ny {
                    pyw[w][y] += m * self.pyx[x][y];
                }
            }
        }
        let mut ixw = 0.0;
        for (x, row) in q.iter().enumerate() {
            for w in 0..nw {
                if row[w] > 0.0 && pw[w] > 0.0 {
                    ixw += self.px[x] * row[w] * (row[w] / pw[w]).log2();
                }
            }
        }
        let mut iyw = 0.0;
        for w in 0..nw {
            for y in 0..ny {
                if pyw[w][y] > 0.0 {
                    iyw += pyw[w][y] * (pyw[w][y] / (pw[w] * self.py[y])).log2();
                }
            }
        }
        (ixw.max(0.0), iyw.max(0.0))
    }

    /// Channel on the original alphabet; pruned inputs map to output 0.
    pub fn expand(&self, q: &[Vec<f64>]) -> ConditionalChannel {
        let nw = q[0].len();
        let mut rows = vec![(0..nw).map(|w| if w == 0 { 1.0 } else { 0.0 }).collect::<Vec<f64>>(); self.original_nx];
        for (k, &x) in self.pruned.kept_x.iter().enumerate() {
            rows[x] = q[k].clone();
        }
        ConditionalChannel::from_rows_normalized(rows)
    }

    /// Restrict a channel on the original alphabet to the kept inputs.
    pub fn restrict(&self, ch: &ConditionalChannel, nw: usize) -> Vec<Vec<f64>> {
        let padded = ch.padded(nw);
        self.pruned.kept_x.iter().map(|&x| padded.rows()[x].clone()).collect()
    }

    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.pruned.dropped_x.is_empty() {
            out.push(format!("dropped zero-probability x symbols {:?}", self.pruned.dropped_x));
        }
        if !self.pruned.dropped_y.is_empty() {
            out.push(format!("dropped zero-probability y symbols {:?}", self.pruned.dropped_y));
        }
        out
    }

    /// Merge inputs with identical `p(y|x)`; `None` if more classes than `nw`.
    pub fn sufficient_statistic(&self, nw: usize) -> Option<Vec<Vec<f64>>> {
        let mut class: Vec<usize> = Vec::with_capacity(self.nx());
        let mut reps: Vec<usize> = Vec::new();
        for x in 0..self.nx() {
            let found = reps.iter().position(|&r| {
                self.pyx[r].iter().zip(&self.pyx[x]).all(|(a, b)| (a - b).abs() <= 1e-12)
            });
            match found {
                Some(k) => class.push(k),
                None => {
                    class.push(reps.len());
                    reps.push(x);
                }
            }
        }
        (reps.len() <= nw).then(|| class.iter().map(|&k| (0..nw).map(|w| if w == k { 1.0 } else { 0.0 }).collect()).collect())
    }
}

fn kl_bits(p: &[f64], r: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(r) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).log2();
        }
    }
    d
}

pub(crate) struct IbSolver<'a> {
    pub src: &'a Source,
    pub nw: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl IbSolver<'_> {
    /// Self-consistent iteration from `q`; returns the fixed point and
    /// whether the stopping rule fired before the cap.
    pub fn iterate(&self, beta: f64, mut q: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, bool) {
        let src = self.src;
        let (nx, nw, ny) = (src.nx(), self.nw, src.py.len());
        let ln2 = std::f64::consts::LN_2;
        let mut last = f64::NAN;
        for _ in 0..self.max_iters {
            let mut pw = vec![0.0; nw];
            let mut pyw = vec![vec![0.0; ny]; nw];
            for x in 0..nx {
                for w in 0..nw {
                    let m = src.px[x] * q[x][w];
                    pw[w] += m;
                    for y in 0..ny {
                        pyw[w][y] += m * src.pyx[x][y];
                    }
                }
            }
            for w in 0..nw {
                if pw[w] > 0.0 {
                    for y in 0..ny {
                        pyw[w][y] /= pw[w];
                    }
                }
            }
            for x in 0..nx {
                let logits: Vec<f64> = (0..nw)
                    .map(|w| if pw[w] > 0.0 { pw[w].ln() - beta * ln2 * kl_bits(&src.pyx[x], &pyw[w]) } else { f64::NEG_INFINITY })
                    .collect();
                let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for w in 0..nw {
                    let e = if logits[w].is_finite() { (logits[w] - top).exp() } else { 0.0 };
                    q[x][w] = e;
                    total += e;
                }
                for w in 0..nw {
                    q[x][w] /= total;
                }
            }
            let (ix, iy) = src.informations(&q);
            let l = ix - beta * iy;
            if last.is_finite() && (l - last).abs() <= self.tol * l.abs().max(1.0) {
                return (q, true);
            }
            last = l;
        }
        (q, false)
    }

    fn sample(&self, q: Vec<Vec<f64>>, converged: bool) -> Sample<Vec<Vec<f64>>> {
        let (ix, iy) = self.src.informations(&q);
        // IB cloud lives in the (I(Y;W), I(X;W)) plane.
        Sample { x: iy, y: ix, witness: q, converged }
    }
}

impl LagrangianSolver for IbSolver<'_> {
    type Witness = Vec<Vec<f64>>;

    fn solve(&self, beta: f64, warm: &[Vec<Vec<f64>>], seeds: &[u64]) -> Vec<Sample<Vec<Vec<f64>>>> {
        let mut out = Vec::with_capacity(warm.len() + seeds.len());
        for q in warm {
            let (q, ok) = self.iterate(beta, q.clone());
            out.push(self.sample(q, ok));
        }
        for &s in seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let q0: Vec<Vec<f64>> = (0..self.src.nx()).map(|_| random_simplex(&mut rng, self.nw)).collect();
            let (q, ok) = self.iterate(beta, q0);
            out.push(self.sample(q, ok));
        }
        out
    }
}

pub(crate) fn constant_rows(nx: usize, nw: usize) -> Vec<Vec<f64>> {
    ConditionalChannel::constant(nx, nw).rows().to_vec()
}

/// Cloud of achieved `(I(Y;W), I(X;W))` pairs with their channels.
pub(crate) fn ib_cloud(src: &Source, nw: usize, cfg: &ClassicalConfig) -> Vec<Sample<Vec<Vec<f64>>>> {
    let solver = IbSolver { src, nw, max_iters: cfg.max_iters, tol: cfg.tol };
    let mut anchors = vec![solver.sample(constant_rows(src.nx(), nw), true)];
    if let Some(q) = src.sufficient_statistic(nw) {
        anchors.push(solver.sample(q, true));
    }
    // Multipliers at or below one only ever return the constant channel.
    let mut plan = cfg.plan();
    plan.betas.retain(|&b| b > 1.0);
    sweep(&solver, anchors, &plan)
}

fn check_common(dw: usize, grid: &[f64], cfg: &ClassicalConfig) -> Result<()> {
    cfg.validate()?;
    if dw == 0 {
        return Err(invalid("output alphabet size must be at least 1"));
    }
    if grid.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(invalid("grid values must be finite and nonnegative"));
    }
    Ok(())
}

/// Build curve points from an envelope over a classical cloud.
pub(crate) fn curve_from_cloud(
    src: &Source,
    cloud: &[Sample<Vec<Vec<f64>>>],
    side: Side,
    grid: &[f64],
    limit: f64,
    what: &str,
) -> Result<Vec<CurvePoint>> {
    let pts: Vec<(f64, f64)> = cloud.iter().map(|s| (s.x, s.y)).collect();
    let env = Envelope::new(pts, side)?;
    let mut out = Vec::with_capacity(grid.len());
    for &a in grid {
        if a > limit + crate::curve::FEASIBILITY_SLACK {
            return Err(Error::Infeasible(format!("{what} {a} exceeds the maximum {limit}")));
        }
        let it = env
            .eval(a)
            .ok_or_else(|| Error::Infeasible(format!("{what} {a} not reached by any computed channel (max {})", env.x_range().1)))?;
        let (l, r) = (&cloud[it.left], &cloud[it.right]);
        let w = Witness::mix(it.lambda, &Witness::Classical(src.expand(&l.witness)), &Witness::Classical(src.expand(&r.witness)))?;
        out.push(CurvePoint {
            abscissa: a,
            value: it.value,
            achieved_constraint: it.achieved,
            converged: l.converged && r.converged,
            witness: Some(w),
            reference: None,
        });
    }
    Ok(out)
}

/// `R(I_Y) = min I(X;W) s.t. I(Y;W) ≥ I_Y`, upper bounded through the lower
/// convex envelope of a multiplier sweep.
pub fn classical_ib_curve(p: &JointDistribution, dw: usize, grid: &[f64], cfg: &ClassicalConfig) -> Result<Curve> {
    check_common(dw, grid, cfg)?;
    let src = Source::new(p);
    let cloud = ib_cloud(&src, dw, cfg);
    let limit = p.mutual_information();
    let points = curve_from_cloud(&src, &cloud, Side::LowerMinAbove, grid, limit, "target I(Y;W)")?;
    let meta = CurveMeta {
        grid: grid.to_vec(),
        config_hash: config_hash(&(cfg, dw, "classical-ib")),
        normalized: false,
        diagnostics: src.diagnostics(),
    };
    Curve::new(CurveKind::Ib, points, meta)
}

/// `I_Y(R) = max I(Y;W) s.t. I(X;W) ≤ R`, the same trade-off with axes swapped.
pub fn classical_ib_dual_curve(p: &JointDistribution, dw: usize, grid: &[f64], cfg: &ClassicalConfig) -> Result<Curve> {
    check_common(dw, grid, cfg)?;
    let src = Source::new(p);
    let mut dual = cfg.clone();
    // Multipliers γ on I(X;W) in max I(Y;W) − γ I(X;W) map to β = 1/γ.
    dual.beta_grid = cfg.beta_grid.iter().map(|g| 1.0 / g).rev().collect();
    let cloud: Vec<_> = ib_cloud(&src, dw, &dual)
        .into_iter()
        .map(|s| Sample { x: s.y, y: s.x, witness: s.witness, converged: s.converged })
        .collect();
    let points = curve_from_cloud(&src, &cloud, Side::UpperMaxBelow, grid, f64::INFINITY, "rate")?;
    let meta = CurveMeta {
        grid: grid.to_vec(),
        config_hash: config_hash(&(cfg, dw, "classical-ib-dual")),
        normalized: false,
        diagnostics: src.diagnostics(),
    };
    Curve::new(CurveKind::IbDual, points, meta)
}
