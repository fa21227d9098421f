//! Classical privacy funnel `G(t) = min I(Y;W) s.t. I(X;W) ≥ t`, its dual
//! `P(a)`, and the two-letter probe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::distribution::JointDistribution;
use super::ib::{constant_rows, curve_from_cloud, ClassicalConfig, Source};
use crate::curve::{config_hash, lower_hull, Curve, CurveKind, CurveMeta, Side};
use crate::error::{invalid, Error, Result};
use crate::optim::{minimize, LbfgsConfig};
use crate::quantum::random::random_simplex;
use crate::sweep::{sweep, task_seed, LagrangianSolver, Sample};

/// Past this many set partitions the exhaustive vertex list is replaced by
/// a randomized local search.
pub const PARTITION_LIMIT: usize = 200_000;

/// Largest product alphabet accepted by [`multi_letter_pf_point`].
pub const MULTI_LETTER_MAX_INPUTS: usize = 8;

fn softmax_rows(z: &[f64], nx: usize, nw: usize) -> Vec<Vec<f64>> {
    (0..nx)
        .map(|x| {
            let row = &z[x * nw..(x + 1) * nw];
            let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = row.iter().map(|v| (v - top).exp()).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

fn logits_of(q: &[Vec<f64>]) -> Vec<f64> {
    q.iter().flat_map(|r| r.iter().map(|&p| p.max(1e-12).ln())).collect()
}

pub(crate) struct PfSolver<'a> {
    pub src: &'a Source,
    pub nw: usize,
    pub lbfgs: LbfgsConfig,
}

impl PfSolver<'_> {
    /// `I(Y;W) − s·I(X;W)` and its gradient in the row logits.
    fn lagrangian(&self, s: f64, z: &[f64]) -> (f64, Vec<f64>) {
        let src = self.src;
        let (nx, nw, ny) = (src.nx(), self.nw, src.py.len());
        let q = softmax_rows(z, nx, nw);
        let mut pw = vec![0.0; nw];
        // p(w|y) = Σ_x p(x|y) q(w|x), kept as joint mass p(w, y).
        let mut pwy = vec![vec![0.0; ny]; nw];
        for x in 0..nx {
            for w in 0..nw {
                let m = src.px[x] * q[x][w];
                pw[w] += m;
                for y in 0..ny {
                    pwy[w][y] += m * src.pyx[x][y];
                }
            }
        }
        let (ix, iy) = src.informations(&q);
        let val = iy - s * ix;
        let mut g = vec![0.0; nx * nw];
        for x in 0..nx {
            let mut gx = vec![0.0; nw];
            for w in 0..nw {
                let pwv = pw[w].max(1e-300);
                let mut dy = 0.0;
                for y in 0..ny {
                    let pxy = src.px[x] * src.pyx[x][y];
                    if pxy > 0.0 {
                        dy += pxy * (pwy[w][y].max(1e-300) / (src.py[y] * pwv)).log2();
                    }
                }
                let dx = src.px[x] * (q[x][w].max(1e-300) / pwv).log2();
                gx[w] = dy - s * dx;
            }
            let mean: f64 = (0..nw).map(|w| q[x][w] * gx[w]).sum();
            for w in 0..nw {
                g[x * nw + w] = q[x][w] * (gx[w] - mean);
            }
        }
        (val, g)
    }

    fn local(&self, s: f64, q0: &[Vec<f64>]) -> Sample<Vec<Vec<f64>>> {
        let nx = self.src.nx();
        let m = minimize(
            logits_of(q0),
            |z| self.lagrangian(s, z),
            |z, step| z.iter().zip(step).map(|(a, b)| a + b).collect(),
            &self.lbfgs,
        );
        let q = softmax_rows(&m.point, nx, self.nw);
        let mut best = self.sample(q, m.converged);
        // Rounding to the nearest deterministic map often lands on the vertex
        // the iteration was heading to.
        let f: Vec<usize> = best.witness.iter().map(|r| argmax(r)).collect();
        let rounded = self.sample(deterministic_rows(&f, self.nw), true);
        if rounded.lagrangian(s) <= best.lagrangian(s) {
            best = rounded;
        }
        best
    }

    pub fn sample(&self, q: Vec<Vec<f64>>, converged: bool) -> Sample<Vec<Vec<f64>>> {
        let (ix, iy) = self.src.informations(&q);
        // PF cloud lives in the (I(X;W), I(Y;W)) plane.
        Sample { x: ix, y: iy, witness: q, converged }
    }
}

fn argmax(r: &[f64]) -> usize {
    (0..r.len()).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap_or(0)
}

fn deterministic_rows(f: &[usize], nw: usize) -> Vec<Vec<f64>> {
    f.iter().map(|&t| (0..nw).map(|w| if w == t { 1.0 } else { 0.0 }).collect()).collect()
}

impl LagrangianSolver for PfSolver<'_> {
    type Witness = Vec<Vec<f64>>;

    fn solve(&self, beta: f64, warm: &[Vec<Vec<f64>>], seeds: &[u64]) -> Vec<Sample<Vec<Vec<f64>>>> {
        let mut out = Vec::new();
        for (k, q) in warm.iter().enumerate() {
            out.push(self.local(beta, q));
            // Perturbed copy of each warm start.
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed(k as u64, beta.to_bits(), 99));
            let noisy: Vec<Vec<f64>> = q
                .iter()
                .map(|r| {
                    let n = random_simplex(&mut rng, self.nw);
                    r.iter().zip(&n).map(|(a, b)| 0.8 * a + 0.2 * b).collect()
                })
                .collect();
            out.push(self.local(beta, &noisy));
        }
        for &s in seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let q0: Vec<Vec<f64>> = (0..self.src.nx()).map(|_| random_simplex(&mut rng, self.nw)).collect();
            out.push(self.local(beta, &q0));
        }
        out
    }
}

/// Number of set partitions of `n` items into at most `k` blocks.
pub fn partition_count(n: usize, k: usize) -> usize {
    // Stirling numbers of the second kind, saturating.
    let mut s = vec![vec![0usize; k + 1]; n + 1];
    s[0][0] = 1;
    for i in 1..=n {
        for j in 1..=k.min(i) {
            s[i][j] = s[i - 1][j - 1].saturating_add(j.saturating_mul(s[i - 1][j]));
        }
    }
    s[n].iter().fold(0usize, |a, &b| a.saturating_add(b))
}

/// Restricted growth strings of length `n` using at most `k` labels.
pub fn set_partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 || k == 0 {
        return out;
    }
    let mut a = vec![0usize; n];
    fn rec(i: usize, maxl: usize, a: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if i == a.len() {
            out.push(a.clone());
            return;
        }
        for l in 0..=(maxl + 1).min(k - 1) {
            a[i] = l;
            rec(i + 1, maxl.max(l), a, k, out);
        }
    }
    a[0] = 0;
    rec(1, 0, &mut a, k, &mut out);
    out
}

/// Deterministic maps as cloud points: all partitions when affordable,
/// otherwise a randomized single-symbol hill climb over several slopes.
fn deterministic_vertices(solver: &PfSolver<'_>, cfg: &ClassicalConfig) -> Vec<Sample<Vec<Vec<f64>>>> {
    let (nx, nw) = (solver.src.nx(), solver.nw);
    let blocks = nw.min(nx);
    if partition_count(nx, blocks) <= PARTITION_LIMIT {
        return set_partitions(nx, blocks).into_iter().map(|f| solver.sample(deterministic_rows(&f, nw), true)).collect();
    }
    let mut out = Vec::new();
    for (k, &s) in cfg.beta_grid.iter().enumerate() {
        for r in 0..cfg.restarts as u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed(cfg.seed, 2_000_000 + k as u64, r));
            let mut f: Vec<usize> = (0..nx).map(|_| rng.random_range(0..blocks)).collect();
            let mut cur = solver.sample(deterministic_rows(&f, nw), true);
            loop {
                let mut improved = false;
                for x in 0..nx {
                    let keep = f[x];
                    for w in 0..blocks {
                        if w == keep {
                            continue;
                        }
                        f[x] = w;
                        let cand = solver.sample(deterministic_rows(&f, nw), true);
                        if cand.lagrangian(s) < cur.lagrangian(s) - 1e-12 {
                            cur = cand;
                            improved = true;
                            break;
                        }
                        f[x] = keep;
                    }
                    if improved {
                        break;
                    }
                }
                if !improved {
                    break;
                }
            }
            out.push(cur);
        }
    }
    out
}

pub(crate) fn pf_cloud(src: &Source, nw: usize, cfg: &ClassicalConfig, extra: Vec<Sample<Vec<Vec<f64>>>>) -> Vec<Sample<Vec<Vec<f64>>>> {
    let lbfgs = LbfgsConfig { max_iters: cfg.max_iters.min(500), grad_tol: 1e-10, ..Default::default() };
    let solver = PfSolver { src, nw, lbfgs };
    let mut anchors = vec![solver.sample(constant_rows(src.nx(), nw), true)];
    anchors.extend(deterministic_vertices(&solver, cfg));
    anchors.extend(extra);
    // Restrict the random sweep to slopes below one: above it the Lagrangian
    // is concave in the channel and the deterministic vertices are optimal.
    let mut plan = cfg.plan();
    plan.betas.retain(|&b| b < 1.0);
    sweep(&solver, anchors, &plan)
}

fn pf_meta(src: &Source, grid: &[f64], cfg: &ClassicalConfig, dw: usize, tag: &str) -> CurveMeta {
    CurveMeta { grid: grid.to_vec(), config_hash: config_hash(&(cfg, dw, tag)), normalized: false, diagnostics: src.diagnostics() }
}

fn check(dw: usize, grid: &[f64], cfg: &ClassicalConfig) -> Result<()> {
    cfg.validate()?;
    if dw == 0 {
        return Err(invalid("output alphabet size must be at least 1"));
    }
    if grid.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(invalid("grid values must be finite and nonnegative"));
    }
    Ok(())
}

/// `G(t)` on the grid, with `max{0, t − H(X|Y)}` as each point's reference.
pub fn classical_pf_curve(p: &JointDistribution, dw: usize, grid: &[f64], cfg: &ClassicalConfig) -> Result<Curve> {
    check(dw, grid, cfg)?;
    let src = Source::new(p);
    let cloud = pf_cloud(&src, dw, cfg, Vec::new());
    let mut points = curve_from_cloud(&src, &cloud, Side::LowerMinAbove, grid, p.h_x(), "disclosure t")?;
    let hxy = p.h_x_given_y();
    for pt in points.iter_mut() {
        pt.reference = Some(pf_lower_bound(pt.abscissa, hxy));
    }
    Curve::new(CurveKind::Pf, points, pf_meta(&src, grid, cfg, dw, "classical-pf"))
}

/// `P(a) = max I(X;W) s.t. I(Y;W) ≤ a`.
pub fn classical_pf_dual_curve(p: &JointDistribution, dw: usize, grid: &[f64], cfg: &ClassicalConfig) -> Result<Curve> {
    check(dw, grid, cfg)?;
    let src = Source::new(p);
    let cloud: Vec<_> = pf_cloud(&src, dw, cfg, Vec::new())
        .into_iter()
        .map(|s| Sample { x: s.y, y: s.x, witness: s.witness, converged: s.converged })
        .collect();
    let points = curve_from_cloud(&src, &cloud, Side::UpperMaxBelow, grid, f64::INFINITY, "leakage a")?;
    Curve::new(CurveKind::PfDual, points, pf_meta(&src, grid, cfg, dw, "classical-pf-dual"))
}

/// `max{0, t − H(X|Y)}`.
pub fn pf_lower_bound(t: f64, h_x_given_y: f64) -> f64 {
    (t - h_x_given_y).max(0.0)
}

/// `(1/n)·G⁽ⁿ⁾(n·t)` on `p^{⊗n}` for `n ≤ 2`.
///
/// The two-letter cloud contains every pairwise product of single-letter
/// hull vertices, so the result never exceeds the single-letter value.
pub fn multi_letter_pf_point(p: &JointDistribution, n: usize, t: f64, dw: usize, cfg: &ClassicalConfig) -> Result<f64> {
    check(dw, &[t], cfg)?;
    match n {
        1 => Ok(classical_pf_curve(p, dw, &[t], cfg)?.points[0].value),
        2 => {
            let nx = p.shape().0;
            if nx * nx > MULTI_LETTER_MAX_INPUTS {
                return Err(Error::ScaleLimit(format!(
                    "|X|^2 = {} exceeds the limit of {MULTI_LETTER_MAX_INPUTS} inputs",
                    nx * nx
                )));
            }
            if t > p.h_x() + crate::curve::FEASIBILITY_SLACK {
                return Err(Error::Infeasible(format!("disclosure t {t} exceeds H(X) = {}", p.h_x())));
            }
            let src1 = Source::new(p);
            let cloud1 = pf_cloud(&src1, dw, cfg, Vec::new());
            let pts1: Vec<(f64, f64)> = cloud1.iter().map(|s| (s.x, s.y)).collect();
            let hull1 = lower_hull(&pts1);
            let p2 = p.tensor_power(2)?;
            let src2 = Source::new(&p2);
            let nw2 = dw * dw;
            // Product witnesses: row (x1, x2) = q1(·|x1) ⊗ q2(·|x2).
            let mut products = Vec::new();
            for &a in &hull1 {
                for &b in &hull1 {
                    let (qa, qb) = (src1.expand(&cloud1[a].witness), src1.expand(&cloud1[b].witness));
                    let q = qa.tensor(&qb);
                    let rows = src2.restrict(&q, nw2);
                    let (ix, iy) = src2.informations(&rows);
                    products.push(Sample { x: ix, y: iy, witness: rows, converged: true });
                }
            }
            let mut cfg2 = cfg.clone();
            cfg2.restarts = (cfg.restarts / 2).max(1);
            let cloud2 = pf_cloud(&src2, nw2, &cfg2, products);
            let pts2: Vec<(f64, f64)> = cloud2.iter().map(|s| (s.x, s.y)).collect();
            let env = crate::curve::Envelope::new(pts2, Side::LowerMinAbove)?;
            let it = env
                .eval(2.0 * t)
                .ok_or_else(|| Error::Infeasible(format!("disclosure {t} not reached on two letters")))?;
            Ok(it.value / 2.0)
        }
        _ => Err(Error::ScaleLimit(format!("multi-letter probes support n ≤ 2, got {n}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{convexity_check, linear_grid, log_grid};

    fn quick() -> ClassicalConfig {
        ClassicalConfig { restarts: 4, beta_grid: log_grid(1e-3, 1e3, 24), ..Default::default() }
    }

    #[test]
    fn partitions_are_counted_and_listed() {
        assert_eq!(partition_count(4, 4), 15);
        assert_eq!(set_partitions(4, 4).len(), 15);
        assert_eq!(partition_count(4, 2), 8);
        assert_eq!(set_partitions(4, 2).len(), 8);
        assert_eq!(set_partitions(3, 1), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn zero_disclosure_leaks_nothing() {
        let p = JointDistribution::bsc(0.1).unwrap();
        let c = classical_pf_curve(&p, 4, &[0.0], &quick()).unwrap();
        assert!(c.points[0].value.abs() < 1e-12);
    }

    #[test]
    fn perfectly_correlated_bits_are_on_the_diagonal() {
        let p = JointDistribution::perfectly_correlated(2).unwrap();
        let grid = linear_grid(0.0, 1.0, 11);
        let c = classical_pf_curve(&p, 4, &grid, &quick()).unwrap();
        for pt in &c.points {
            assert!((pt.value - pt.abscissa).abs() < 1e-3);
        }
    }

    #[test]
    fn lower_bound_and_convexity_hold() {
        let p = JointDistribution::new(vec![vec![0.3, 0.05, 0.05], vec![0.05, 0.25, 0.05], vec![0.1, 0.05, 0.1]]).unwrap();
        let grid = linear_grid(0.0, p.h_x(), 15);
        let c = classical_pf_curve(&p, 5, &grid, &quick()).unwrap();
        for pt in &c.points {
            assert!(pt.value >= pt.reference.unwrap() - 1e-6);
        }
        assert!(convexity_check(&c, 1e-6).unwrap().pass);
    }

    #[test]
    fn disclosure_above_entropy_is_infeasible() {
        let p = JointDistribution::bsc(0.1).unwrap();
        assert!(matches!(classical_pf_curve(&p, 4, &[1.2], &quick()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn two_letters_never_lose_and_parity_wins_for_bsc() {
        let p = JointDistribution::bsc(0.1).unwrap();
        let hxy = p.h_x_given_y();
        let mut gain: f64 = 0.0;
        for &t in &[0.25, hxy, 0.6] {
            let one = multi_letter_pf_point(&p, 1, t, 4, &quick()).unwrap();
            let two = multi_letter_pf_point(&p, 2, t, 4, &quick()).unwrap();
            assert!(two <= one + 1e-6, "t={t}: {two} > {one}");
            gain = gain.max(one - two);
        }
        assert!(gain > 1e-3, "{gain}");
    }

    #[test]
    fn multi_letter_limits() {
        let p = JointDistribution::perfectly_correlated(3).unwrap();
        assert!(matches!(multi_letter_pf_point(&p, 2, 0.1, 4, &quick()), Err(Error::ScaleLimit(_))));
        let p = JointDistribution::bsc(0.1).unwrap();
        assert!(matches!(multi_letter_pf_point(&p, 3, 0.1, 4, &quick()), Err(Error::ScaleLimit(_))));
    }
}
