//! Built-in self-checks: randomized identities and small end-to-end runs
//! against closed-form values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{flagged_mix, isometry_from_params, random_channel_params, stinespring_extend, StinespringIsometry};
use crate::classical::{bsc_ib_rate, classical_ib_curve, classical_pf_curve, ClassicalConfig, JointDistribution};
use crate::curve::{linear_grid, log_grid};
use crate::error::{invalid, Result};
use crate::quantum::random::{random_density, random_pure};
use crate::quantum::{
    conditional_mutual_information, embed_classical_joint, mutual_information, partial_trace, purify, rho3,
    subsystem_entropy, DensityOperator, PureState, QuantumState,
};
use crate::rate_region::{purity_complement_check, wak_boundary};
use crate::solver::{
    equivalence_check, gradient_check, normalize_curve, quantum_ib_curve, Objective,
    QuantumSource, SolverConfig,
};
use crate::sweep::task_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    Core,
    Channels,
    Classical,
    Quantum,
    Region,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub pass: bool,
    /// Worst observed deviation.
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(suite: Suite, name: &str, worst: f64, tolerance: f64) -> Check {
    Check { suite, name: name.to_string(), pass: worst.is_finite() && worst <= tolerance, worst, tolerance }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(task_seed(seed, stream, 0))
}

/// Random bipartite `ρ_XY` with `d_X, d_Y ∈ {2, 3}`.
fn random_xy(r: &mut impl Rng) -> DensityOperator {
    let (dx, dy) = (r.random_range(2..=3), r.random_range(2..=3));
    let m = random_density(r, dx * dy, "XY").matrix().clone();
    DensityOperator::with_labels(m, &[dx, dy], &["X", "Y"]).expect("dimensions multiply out")
}

fn random_iso(r: &mut impl Rng, d_in: usize, d_w: usize, d_v: usize) -> Result<StinespringIsometry> {
    let theta = random_channel_params(r.random(), d_in, d_w, d_v)?;
    isometry_from_params(&theta, d_in, d_w, d_v)
}

/// Random `(d_W, d_V)` with `d_W ≤ 3`, `d_V ≤ 9` and `d_W·d_V ≥ d_in`.
fn random_channel_dims(r: &mut impl Rng, d_in: usize) -> (usize, usize) {
    loop {
        let (w, v) = (r.random_range(1..=3), r.random_range(1..=9));
        if w * v >= d_in {
            return (w, v);
        }
    }
}

fn core_checks(seed: u64) -> Result<Vec<Check>> {
    let s = Suite::Core;
    let mut r = rng(seed, 1);
    let mut helstrom = 0.0f64;
    for _ in 0..50 {
        let da = r.random_range(2..=3);
        let psi = random_pure(&mut r, &[da, 2, 3], &["A", "B", "E"]);
        let gap = subsystem_entropy(&psi, &["A"])?
            - 0.5 * mutual_information(&psi, &["A"], &["B"])?
            - 0.5 * mutual_information(&psi, &["A"], &["E"])?;
        helstrom = helstrom.max(gap.abs());
    }
    let mut bounds = 0.0f64;
    for _ in 0..200 {
        let rho = random_xy(&mut r);
        let i = mutual_information(&rho, &["X"], &["Y"])?;
        let cap = 2.0 * subsystem_entropy(&rho, &["X"])?.min(subsystem_entropy(&rho, &["Y"])?);
        bounds = bounds.max((-i).max(i - cap));
    }
    let mut round_trip = 0.0f64;
    for _ in 0..100 {
        let d = r.random_range(2..=4);
        let rho = random_density(&mut r, d, "A");
        let back = partial_trace(&purify(&rho, "R")?, &["A"])?;
        round_trip = round_trip.max((back.matrix() - rho.matrix()).camax());
    }
    let mut shannon = 0.0f64;
    for _ in 0..100 {
        let (nx, ny) = (r.random_range(2..=4), r.random_range(2..=4));
        let p = JointDistribution::random(&mut r, nx, ny)?;
        let rho = embed_classical_joint(&p)?;
        let d = (mutual_information(&rho, &["X"], &["Y"])? - p.mutual_information()).abs()
            + (subsystem_entropy(&rho, &["X"])? - p.h_x()).abs();
        shannon = shannon.max(d);
    }
    let mut chain = 0.0f64;
    for _ in 0..20 {
        let psi = random_pure(&mut r, &[2, 2, 2, 2], &["A", "B", "C", "D"]);
        let rho = partial_trace(&psi, &["A", "B", "C"])?;
        let lhs = mutual_information(&rho, &["A"], &["B", "C"])?;
        let rhs = mutual_information(&rho, &["A"], &["C"])? + conditional_mutual_information(&rho, &["A"], &["B"], &["C"])?;
        chain = chain.max((lhs - rhs).abs());
    }
    Ok(vec![
        check(s, "pure tripartite S(A) = ½I(A;B) + ½I(A;E)", helstrom, 1e-9),
        check(s, "0 ≤ I(X;Y) ≤ 2 min(S(X), S(Y))", bounds, 1e-9),
        check(s, "purification reduces to the input state", round_trip, 1e-10),
        check(s, "embedded joints reproduce Shannon quantities", shannon, 1e-10),
        check(s, "chain rule I(A;BC) = I(A;C) + I(A;B|C)", chain, 1e-9),
    ])
}

fn channel_checks(seed: u64) -> Result<Vec<Check>> {
    let s = Suite::Channels;
    let mut r = rng(seed, 2);
    let mut kraus = 0.0f64;
    let mut stinespring = 0.0f64;
    for _ in 0..20 {
        let d_in = r.random_range(2..=3);
        let (w, v) = random_channel_dims(&mut r, d_in);
        let iso = random_iso(&mut r, d_in, w, v)?;
        let mut sum = crate::quantum::CMat::zeros(d_in, d_in);
        for k in iso.kraus_operators() {
            sum += k.adjoint() * &k;
        }
        kraus = kraus.max((sum - crate::quantum::CMat::identity(d_in, d_in)).camax());
        let rho = random_density(&mut r, d_in, "X");
        let out = iso.apply(&rho, "X")?;
        let mut direct = crate::quantum::CMat::zeros(w, w);
        for k in iso.kraus_operators() {
            direct += &k * rho.matrix() * k.adjoint();
        }
        stinespring = stinespring.max((out.matrix() - direct).camax());
    }
    let psi = purify(&rho3(0.4)?, "R")?;
    let mut flagged = 0.0f64;
    for _ in 0..50 {
        let (w, v) = (r.random_range(1..=3), r.random_range(2..=4));
        let (n0, n1) = (random_iso(&mut r, 2, w, v)?, random_iso(&mut r, 2, w, v)?);
        let lambda: f64 = r.random();
        let mix = flagged_mix(&n0, &n1, lambda)?.stinespring()?;
        let whole = mutual_information(&stinespring_extend(&mix, &psi, "X")?, &["Y"], &["W"])?;
        let i0 = mutual_information(&stinespring_extend(&n0, &psi, "X")?, &["Y"], &["W"])?;
        let i1 = mutual_information(&stinespring_extend(&n1, &psi, "X")?, &["Y"], &["W"])?;
        flagged = flagged.max((whole - lambda * i0 - (1.0 - lambda) * i1).abs());
    }
    Ok(vec![
        check(s, "Kraus operators are trace preserving", kraus, 1e-10),
        check(s, "isometry action matches the Kraus form", stinespring, 1e-10),
        check(s, "flagged mixtures average I(Y;W)", flagged, 1e-9),
    ])
}

fn small_classical() -> ClassicalConfig {
    ClassicalConfig { restarts: 6, beta_grid: log_grid(1e-2, 1e2, 30), ..ClassicalConfig::default() }
}

fn classical_checks(seed: u64) -> Result<Vec<Check>> {
    let s = Suite::Classical;
    let delta = 0.1;
    let p = JointDistribution::bsc(delta)?;
    let cfg = ClassicalConfig { seed, ..small_classical() };
    let grid = linear_grid(0.0, p.mutual_information(), 11);
    let ib = classical_ib_curve(&p, 3, &grid, &cfg)?;
    let mut oracle = 0.0f64;
    for pt in &ib.points {
        oracle = oracle.max((pt.value - bsc_ib_rate(pt.abscissa, delta)?).abs());
    }
    let pf = classical_pf_curve(&p, 3, &linear_grid(0.0, p.h_x(), 11), &cfg)?;
    let below = pf.points.iter().map(|pt| pt.reference.unwrap_or(0.0) - pt.value).fold(0.0, f64::max);
    Ok(vec![
        check(s, "binary symmetric IB curve matches the closed form", oracle, 2e-3),
        check(s, "privacy funnel respects max(0, t − H(X|Y))", below, 1e-6),
    ])
}

fn small_quantum(seed: u64) -> SolverConfig {
    SolverConfig { restarts: 4, seed, beta_grid: log_grid(0.2, 20.0, 12), refine_rounds: 1, ..SolverConfig::default() }
}

fn quantum_checks(seed: u64) -> Result<Vec<Check>> {
    let s = Suite::Quantum;
    let mut r = rng(seed, 4);
    let mut equivalence = 0.0f64;
    for _ in 0..100 {
        let rho = random_xy(&mut r);
        let d_x = rho.dims()[0];
        let (w, v) = random_channel_dims(&mut r, d_x);
        let rep = equivalence_check(&random_iso(&mut r, d_x, w, v)?, &rho)?;
        equivalence = equivalence.max(rep.gap);
    }

    let src = QuantumSource::from_density(&rho3(0.4)?)?;
    let opt = small_quantum(seed).optimizer(&src, 3, 2);
    let v = opt.random_start(task_seed(seed, 4, 1));
    let g = gradient_check(&opt, &v, &Objective::IbLagrangian { beta: 2.0 }, 1e-5);

    let psi = random_pure(&mut r, &[2, 2], &["X", "Y"]);
    let rho = DensityOperator::from_pure(&psi);
    let curve = normalize_curve(&quantum_ib_curve(&rho, &small_quantum(seed), &linear_grid(0.0, 2.0 * subsystem_entropy(&rho, &["X"])?, 9))?, &rho)?;
    let identity = curve.points.iter().map(|p| (p.value - p.abscissa).abs()).fold(0.0, f64::max);
    Ok(vec![
        check(s, "I(X';W) on the purified input equals I(YR;W)", equivalence, 1e-9),
        check(s, "analytic gradient agrees with finite differences", g.analytic_vs_fd, 1e-6),
        check(s, "pure sources give the identity normalized IB curve", identity, 5e-3),
    ])
}

fn region_checks(seed: u64) -> Result<Vec<Check>> {
    let s = Suite::Region;
    let mut r = rng(seed, 5);
    let psi = purify(&rho3(0.4)?, "R")?;
    let mut complement = 0.0f64;
    for _ in 0..100 {
        let (w, v) = random_channel_dims(&mut r, 2);
        complement = complement.max(purity_complement_check(&random_iso(&mut r, 2, w, v)?, &psi)?);
    }
    let (px, py) = (DensityOperator::diagonal(&[0.7, 0.3], "X")?, DensityOperator::diagonal(&[0.4, 0.6], "Y")?);
    let product = crate::quantum::tensor_product(&px, &py, crate::quantum::LabelPolicy::Strict)?;
    let psi_p: PureState = purify(&product, "R")?;
    let s_x = subsystem_entropy(&psi_p, &["X"])?;
    let s_y = subsystem_entropy(&psi_p, &["Y"])?;
    let boundary = wak_boundary(&psi_p, &linear_grid(0.0, s_x, 5), &small_quantum(seed))?;
    let flat = boundary.q_y().iter().map(|q| (q - s_y).abs()).fold(0.0, f64::max);
    Ok(vec![
        check(s, "½I(Y;RV) = S(Y) − ½I(Y;W)", complement, 1e-9),
        check(s, "product sources have a flat boundary at S(Y)", flat, 1e-2),
    ])
}

/// Run one suite, or every suite for [`Suite::All`].
pub fn run_suite(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Core {
        checks.extend(core_checks(seed)?);
    }
    if all || suite == Suite::Channels {
        checks.extend(channel_checks(seed)?);
    }
    if all || suite == Suite::Classical {
        checks.extend(classical_checks(seed)?);
    }
    if all || suite == Suite::Quantum {
        checks.extend(quantum_checks(seed)?);
    }
    if all || suite == Suite::Region {
        checks.extend(region_checks(seed)?);
    }
    if checks.is_empty() {
        return Err(invalid("empty verification suite"));
    }
    Ok(VerifyReport { seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_and_channel_suites_pass() {
        let rep = run_suite(Suite::Core, 3).unwrap();
        assert!(rep.pass(), "{rep:?}");
        let rep = run_suite(Suite::Channels, 3).unwrap();
        assert!(rep.pass(), "{rep:?}");
    }

    #[test]
    fn failing_check_is_reported() {
        let c = check(Suite::Core, "x", 0.5, 0.1);
        assert!(!c.pass);
        assert!(!check(Suite::Core, "nan", f64::NAN, 1.0).pass);
    }
}
