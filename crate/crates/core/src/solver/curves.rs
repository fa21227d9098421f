//! Public quantum curve operations and the identity checks.

use serde::{Deserialize, Serialize};

use super::cloud::{lift, Cloud};
use super::problem::QuantumSource;
use super::SolverConfig;
use crate::channels::{stinespring_extend, StinespringIsometry};
use crate::curve::{config_hash, Curve, CurveKind, CurveMeta};
use crate::error::{invalid, Error, Result};
use crate::quantum::{mutual_information, partial_trace, purify, DensityOperator, PureState, QuantumState};

/// `L = I(YR;W) − β·I(Y;W)` with both informations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IbObjective {
    pub lagrangian: f64,
    pub i_yw: f64,
    pub i_yrw: f64,
}

/// Evaluate the IB Lagrangian of a channel on `ψ_XYR` through the full
/// Stinespring extension `σ_WVYR`.
pub fn ib_objective(iso: &StinespringIsometry, psi_xyr: &PureState, beta: f64) -> Result<IbObjective> {
    for l in ["X", "Y", "R"] {
        psi_xyr.index_of(l)?;
    }
    let sigma = stinespring_extend(iso, psi_xyr, "X")?;
    let i_yw = mutual_information(&sigma, &["Y"], &["W"])?;
    let i_yrw = mutual_information(&sigma, &["Y", "R"], &["W"])?;
    Ok(IbObjective { lagrangian: i_yrw - beta * i_yw, i_yw, i_yrw })
}

/// Upper abscissa limit of a curve kind, if any.
fn abscissa_limit(kind: CurveKind, src: &QuantumSource) -> f64 {
    match kind {
        CurveKind::Ib => src.i_xy(),
        CurveKind::Pf => 2.0 * src.s_x(),
        CurveKind::IbDual | CurveKind::PfDual => f64::INFINITY,
    }
}

fn what(kind: CurveKind) -> &'static str {
    match kind {
        CurveKind::Ib => "target I(Y;W)",
        CurveKind::Pf => "target I(YR;W)",
        CurveKind::IbDual => "cap on I(YR;W)",
        CurveKind::PfDual => "cap on I(Y;W)",
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("grid is empty"));
    }
    if grid.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(invalid("grid values must be finite and nonnegative"));
    }
    Ok(())
}

fn meta(grid: &[f64], cfg: &SolverConfig, d_w: usize, d_v: usize, kind: CurveKind, cloud: &Cloud<'_>) -> CurveMeta {
    CurveMeta {
        grid: grid.to_vec(),
        config_hash: config_hash(&(cfg, d_w, d_v, kind)),
        normalized: false,
        diagnostics: vec![format!("d_W = {d_w}, d_V = {d_v}"), format!("{} achieved points", cloud.samples.len())],
    }
}

fn quantum_curve(rho_xy: &DensityOperator, cfg: &SolverConfig, grid: &[f64], kind: CurveKind) -> Result<Curve> {
    cfg.validate()?;
    check_grid(grid)?;
    let src = QuantumSource::from_density(rho_xy)?;
    let (d_w, d_v) = cfg.dims(src.d_x())?;
    let limit = abscissa_limit(kind, &src);
    if let Some(a) = grid.iter().find(|&&a| a > limit + crate::curve::FEASIBILITY_SLACK) {
        return Err(Error::Infeasible(format!("{} {a} exceeds the maximum {limit}", what(kind))));
    }
    let funnel = matches!(kind, CurveKind::Pf | CurveKind::PfDual);
    let mut cloud = Cloud::sweep(&src, d_w, d_v, cfg, funnel, Vec::new());
    if cfg.penalty {
        cloud.penalty_refine(cfg, kind, grid)?;
    }
    let points = cloud.points(kind, grid, limit, what(kind))?;
    Curve::new(kind, points, meta(grid, cfg, d_w, d_v, kind, &cloud))
}

/// `R_q(a) = min I(YR;W) s.t. I(Y;W) ≥ a` on the grid, as attained upper
/// bounds from the lower convex envelope of achieved pairs.
pub fn quantum_ib_curve(rho_xy: &DensityOperator, cfg: &SolverConfig, grid: &[f64]) -> Result<Curve> {
    quantum_curve(rho_xy, cfg, grid, CurveKind::Ib)
}

/// `I_Y(R) = max I(Y;W) s.t. I(YR;W) ≤ R`.
pub fn quantum_ib_dual_curve(rho_xy: &DensityOperator, cfg: &SolverConfig, grid: &[f64]) -> Result<Curve> {
    quantum_curve(rho_xy, cfg, grid, CurveKind::IbDual)
}

/// `G_q(t) = min I(Y;W) s.t. I(YR;W) ≥ t`.
pub fn quantum_pf_curve(rho_xy: &DensityOperator, cfg: &SolverConfig, grid: &[f64]) -> Result<Curve> {
    quantum_curve(rho_xy, cfg, grid, CurveKind::Pf)
}

/// `P_q(a) = max I(YR;W) s.t. I(Y;W) ≤ a`.
pub fn quantum_pf_dual_curve(rho_xy: &DensityOperator, cfg: &SolverConfig, grid: &[f64]) -> Result<Curve> {
    quantum_curve(rho_xy, cfg, grid, CurveKind::PfDual)
}

/// Rescale a curve of `rho_xy`: `I(Y;W)` axes by `I(X;Y)` and `I(YR;W)`
/// axes by `2S(X)`.
pub fn normalize_curve(curve: &Curve, rho_xy: &DensityOperator) -> Result<Curve> {
    if curve.meta.normalized {
        return Err(invalid("curve is already normalized"));
    }
    let src = QuantumSource::from_density(rho_xy)?;
    let (i_xy, two_s) = (src.i_xy(), 2.0 * src.s_x());
    if i_xy <= 1e-12 {
        return Err(invalid("normalization undefined: I(X;Y) = 0"));
    }
    let (sa, sv) = match curve.kind {
        CurveKind::Ib | CurveKind::PfDual => (i_xy, two_s),
        CurveKind::Pf | CurveKind::IbDual => (two_s, i_xy),
    };
    let mut out = curve.clone();
    for p in &mut out.points {
        p.abscissa /= sa;
        p.achieved_constraint /= sa;
        p.value /= sv;
        p.reference = p.reference.map(|r| r / sv);
    }
    out.meta.grid = out.meta.grid.iter().map(|g| g / sa).collect();
    out.meta.normalized = true;
    Ok(out)
}

/// Both sides of `I(X';W)_τ̃ = I(YR;W)_σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// `I(X';W)` on the channel applied to a purification of `ρ_X`, against
/// `I(YR;W)` on the Stinespring extension of a purification of `ρ_XY`.
pub fn equivalence_check(iso: &StinespringIsometry, rho_xy: &DensityOperator) -> Result<EquivalenceReport> {
    let rho_x = partial_trace(rho_xy, &["X"])?;
    let tau = DensityOperator::from_pure(&purify(&rho_x, "X'")?);
    let tau_out = iso.apply(&tau, "X")?;
    let lhs = mutual_information(&tau_out, &["X'"], &["W"])?;
    let psi = purify(rho_xy, "R")?;
    let sigma = stinespring_extend(iso, &psi, "X")?;
    let rhs = mutual_information(&sigma, &["Y", "R"], &["W"])?;
    Ok(EquivalenceReport { lhs, rhs, gap: (lhs - rhs).abs() })
}

/// IB curves for each output dimension in `dw_list`, each run seeded with
/// the embedded witnesses of the previous one so curves never increase.
pub fn dimension_study(rho_xy: &DensityOperator, dw_list: &[usize], cfg: &SolverConfig, grid: &[f64]) -> Result<Vec<Curve>> {
    cfg.validate()?;
    check_grid(grid)?;
    if dw_list.is_empty() {
        return Err(invalid("dimension list is empty"));
    }
    if dw_list.windows(2).any(|w| w[1] <= w[0]) || dw_list[0] == 0 {
        return Err(invalid("dimension list must be positive and strictly ascending"));
    }
    let src = QuantumSource::from_density(rho_xy)?;
    let limit = src.i_xy();
    if let Some(a) = grid.iter().find(|&&a| a > limit + crate::curve::FEASIBILITY_SLACK) {
        return Err(Error::Infeasible(format!("target I(Y;W) {a} exceeds the maximum {limit}")));
    }
    let mut curves = Vec::with_capacity(dw_list.len());
    let mut prev: Option<Cloud<'_>> = None;
    for &d_w in dw_list {
        let step = SolverConfig { d_w: Some(d_w), d_v: cfg.d_v, ..cfg.clone() };
        let (d_w, d_v) = step.dims(src.d_x())?;
        let extra = match &prev {
            Some(p) => lift(p, d_w, d_v, &step)?,
            None => Vec::new(),
        };
        let mut cloud = Cloud::sweep(&src, d_w, d_v, &step, false, extra);
        if step.penalty {
            cloud.penalty_refine(&step, CurveKind::Ib, grid)?;
        }
        let points = cloud.points(CurveKind::Ib, grid, limit, what(CurveKind::Ib))?;
        curves.push(Curve::new(CurveKind::Ib, points, meta(grid, &step, d_w, d_v, CurveKind::Ib, &cloud))?);
        prev = Some(cloud);
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{isometry_from_params, random_channel_params};
    use crate::quantum::rho3;

    #[test]
    fn objective_examples() {
        let rho = rho3(0.4).unwrap();
        let psi = purify(&rho, "R").unwrap();
        let s_x = crate::quantum::subsystem_entropy(&psi, &["X"]).unwrap();
        let c = StinespringIsometry::constant_channel(2, 3, 6).unwrap();
        assert!(ib_objective(&c, &psi, 0.0).unwrap().lagrangian.abs() < 1e-12);
        let id = StinespringIsometry::identity_channel(2, 3, 6).unwrap();
        assert!((ib_objective(&id, &psi, 0.0).unwrap().lagrangian - 2.0 * s_x).abs() < 1e-10);
        for seed in 0..5 {
            let iso = isometry_from_params(&random_channel_params(seed, 2, 3, 2).unwrap(), 2, 3, 2).unwrap();
            let o = ib_objective(&iso, &psi, 1.7).unwrap();
            assert!(o.lagrangian.is_finite() && o.i_yw >= 0.0 && o.i_yrw >= 0.0);
        }
    }

    #[test]
    fn equivalence_on_identity_and_constant() {
        let rho = rho3(0.4).unwrap();
        let s_x = crate::quantum::von_neumann_entropy(&partial_trace(&rho, &["X"]).unwrap()).unwrap().value;
        let id = StinespringIsometry::identity_channel(2, 2, 1).unwrap();
        let r = equivalence_check(&id, &rho).unwrap();
        assert!((r.lhs - 2.0 * s_x).abs() < 1e-9 && r.gap < 1e-9);
        let c = StinespringIsometry::constant_channel(2, 2, 2).unwrap();
        let r = equivalence_check(&c, &rho).unwrap();
        assert!(r.lhs.abs() < 1e-9 && r.rhs.abs() < 1e-9);
    }

    #[test]
    fn grid_above_mutual_information_is_infeasible() {
        let rho = rho3(0.4).unwrap();
        let cfg = SolverConfig { restarts: 1, ..Default::default() };
        let err = quantum_ib_curve(&rho, &cfg, &[0.0, 5.0]).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
        assert!(matches!(quantum_ib_curve(&rho, &cfg, &[-0.1]).unwrap_err(), Error::Validation(_)));
    }

    #[test]
    fn small_ib_curve_is_convex_and_replayable() {
        let rho = rho3(0.4).unwrap();
        let cfg = SolverConfig {
            restarts: 3,
            beta_grid: crate::curve::log_grid(1.05, 30.0, 8),
            refine_rounds: 1,
            max_iters: 150,
            ..Default::default()
        };
        let src = QuantumSource::from_density(&rho).unwrap();
        let grid = crate::curve::linear_grid(0.0, src.i_xy(), 6);
        let curve = quantum_ib_curve(&rho, &cfg, &grid).unwrap();
        assert_eq!(curve.points.len(), 6);
        assert!(curve.points[0].value.abs() < 1e-9);
        let rep = crate::curve::convexity_check(&curve, 1e-3).unwrap();
        assert!(rep.pass, "{rep:?}");
        for p in &curve.points {
            let iso = p.witness.as_ref().unwrap().to_isometry().unwrap();
            let info = src.evaluate(iso.matrix(), iso.d_w(), iso.d_v());
            assert!((info.i_yrw - p.value).abs() < 1e-9, "{} vs {}", info.i_yrw, p.value);
            assert!(info.i_yw >= p.abscissa - 1e-6);
        }
    }
}
