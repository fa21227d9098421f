//! Helper/encoder rate region for compressing `Y` with quantum side
//! information from a rate-limited helper on `X`, and its additivity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::isometry::product_isometry_matrix;
use crate::channels::{stinespring_extend, StinespringIsometry};
use crate::curve::{config_hash, CurveKind, Witness, FEASIBILITY_SLACK};
use crate::error::{invalid, Error, Result};
use crate::quantum::{mutual_information, subsystem_entropy, tensor_product_pure, LabelPolicy, PureState, QuantumState};
use crate::solver::cloud::{penalty_path, Cloud, QSample};
use crate::solver::{QuantumSource, SolverConfig, MAX_ISOMETRY_ROWS};
use crate::sweep::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub q_x: f64,
    pub q_y: f64,
}

/// Sampled lower boundary `Q_Y(Q_X)` of the achievable region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub points: Vec<RatePair>,
    /// `½ I(YR;W)` of each witness mixture, at most the requested `Q_X`.
    pub achieved_q_x: Vec<f64>,
    pub witnesses: Vec<Witness>,
    pub fingerprint: String,
    pub config_hash: String,
}

impl RegionBoundary {
    pub fn q_x(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.q_x).collect()
    }

    pub fn q_y(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.q_y).collect()
    }
}

/// Hex digest identifying a pure source.
pub fn source_fingerprint(psi: &PureState) -> String {
    let mut h = Sha256::new();
    for d in psi.dims() {
        h.update((*d as u64).to_le_bytes());
    }
    for l in psi.labels() {
        h.update(l.as_bytes());
        h.update([0u8]);
    }
    for z in psi.vector().iter() {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    hex::encode(&h.finalize()[..16])
}

fn check_qx_grid(grid: &[f64], s_x: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("Q_X grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("Q_X grid must be strictly increasing"));
    }
    if let Some(q) = grid.iter().find(|&&q| !(q >= 0.0) || q > s_x + FEASIBILITY_SLACK) {
        return Err(invalid(format!("Q_X = {q} outside [0, S(X) = {s_x}]")));
    }
    Ok(())
}

/// Boundary cloud: IB sweep plus penalty continuation at each cap `2Q_X`.
fn boundary_cloud<'a>(src: &'a QuantumSource, grid: &[f64], cfg: &SolverConfig) -> Result<Cloud<'a>> {
    let (d_w, d_v) = cfg.dims(src.d_x())?;
    let mut cloud = Cloud::sweep(src, d_w, d_v, cfg, false, Vec::new());
    if cfg.penalty {
        let caps: Vec<f64> = grid.iter().map(|q| 2.0 * q).collect();
        cloud.penalty_refine(cfg, CurveKind::IbDual, &caps)?;
    }
    Ok(cloud)
}

/// `max I(Y;W)` over the cloud's upper envelope at cap `2Q_X` on `I(YR;W)`.
fn relevant_at(cloud: &Cloud<'_>, q_x: f64) -> Result<crate::curve::Interpolant> {
    cloud
        .envelope(CurveKind::IbDual)?
        .eval(2.0 * q_x)
        .ok_or_else(|| Error::Infeasible(format!("no computed channel has ½I(YR;W) ≤ {q_x}")))
}

/// `Q_Y(Q_X) = S(Y) − ½ I_Y(2Q_X)` with `I_Y(c) = max I(Y;W) s.t. I(YR;W) ≤ c`.
pub fn wak_boundary(psi_xyr: &PureState, qx_grid: &[f64], cfg: &SolverConfig) -> Result<RegionBoundary> {
    cfg.validate()?;
    let src = QuantumSource::from_pure(psi_xyr)?;
    check_qx_grid(qx_grid, src.s_x())?;
    let cloud = boundary_cloud(&src, qx_grid, cfg)?;
    let env = cloud.envelope(CurveKind::IbDual)?;
    let mut points = Vec::with_capacity(qx_grid.len());
    let mut achieved = Vec::with_capacity(qx_grid.len());
    let mut witnesses = Vec::with_capacity(qx_grid.len());
    for &q in qx_grid {
        let it = env.eval(2.0 * q).ok_or_else(|| Error::Infeasible(format!("no computed channel has ½I(YR;W) ≤ {q}")))?;
        let left = Witness::Isometry(cloud.isometry(&cloud.samples[it.left].witness)?);
        let w = if it.left == it.right {
            left
        } else {
            Witness::mix(it.lambda, &left, &Witness::Isometry(cloud.isometry(&cloud.samples[it.right].witness)?))?
        };
        points.push(RatePair { q_x: q, q_y: (src.s_y() - 0.5 * it.value).max(0.0) });
        achieved.push(0.5 * it.achieved);
        witnesses.push(w);
    }
    let (d_w, d_v) = cfg.dims(src.d_x())?;
    Ok(RegionBoundary {
        points,
        achieved_q_x: achieved,
        witnesses,
        fingerprint: source_fingerprint(psi_xyr),
        config_hash: config_hash(&(cfg, d_w, d_v, "wak")),
    })
}

/// `|½ I(Y;RV) − (S(Y) − ½ I(Y;W))|` on the Stinespring extension `σ_WVYR`.
pub fn purity_complement_check(iso: &StinespringIsometry, psi_xyr: &PureState) -> Result<f64> {
    for l in ["X", "Y", "R"] {
        psi_xyr.index_of(l)?;
    }
    let sigma = stinespring_extend(iso, psi_xyr, "X")?;
    let i_yrv = mutual_information(&sigma, &["Y"], &["R", "V"])?;
    let i_yw = mutual_information(&sigma, &["Y"], &["W"])?;
    let s_y = subsystem_entropy(&sigma, &["Y"])?;
    Ok((0.5 * i_yrv - (s_y - 0.5 * i_yw)).abs())
}

/// Slack allowed below the single-copy boundary.
pub const ADDITIVITY_LOWER_SLACK: f64 = 2e-2;
/// Slack allowed above it.
pub const ADDITIVITY_UPPER_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditivityProbe {
    pub q_x: f64,
    /// Single-copy boundary at `Q_X`.
    pub single: f64,
    /// Half the two-copy boundary at `2Q_X`.
    pub double_half: f64,
    pub difference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub probes: Vec<AdditivityProbe>,
    pub pass: bool,
}

/// `ψ ⊗ ψ` with `X = X₁X₂`, `Y = Y₁Y₂`, `R = R₁R₂`.
pub fn two_copies(psi_xyr: &PureState) -> Result<PureState> {
    let pair = tensor_product_pure(psi_xyr, psi_xyr, LabelPolicy::Suffix)?;
    pair.regroup(&[("X", &["X_1", "X_2"]), ("Y", &["Y_1", "Y_2"]), ("R", &["R_1", "R_2"])])
}

/// Compare half the boundary of `ψ⊗ψ` at `2Q_X` with the single-copy
/// boundary at `Q_X`. The two-copy cloud holds every product of single-copy
/// boundary witnesses, refined by penalty continuation from the best product.
pub fn additivity_check(psi_xyr: &PureState, qx_probes: &[f64], cfg: &SolverConfig) -> Result<AdditivityReport> {
    cfg.validate()?;
    let src = QuantumSource::from_pure(psi_xyr)?;
    check_qx_grid(qx_probes, src.s_x())?;
    let (d_w, d_v) = cfg.dims(src.d_x())?;
    let (w2, v2) = (d_w * d_w, d_v * d_v);
    if w2 * v2 > MAX_ISOMETRY_ROWS {
        return Err(Error::ScaleLimit(format!("two-copy isometry needs {} rows, limit {MAX_ISOMETRY_ROWS}", w2 * v2)));
    }
    let psi2 = two_copies(psi_xyr)?;
    let src2 = QuantumSource::from_pure(&psi2)?;

    let cloud = boundary_cloud(&src, qx_probes, cfg)?;
    let verts: Vec<&QSample> = {
        let env = cloud.envelope(CurveKind::IbDual)?;
        env.vertices().iter().map(|&i| &cloud.samples[i]).collect()
    };
    let opt2 = cfg.optimizer(&src2, w2, v2);
    let pairs: Vec<(usize, usize)> = (0..verts.len()).flat_map(|i| (0..verts.len()).map(move |j| (i, j))).collect();
    let mut samples: Vec<QSample> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let m = product_isometry_matrix(&verts[i].witness, d_w, d_v, &verts[j].witness, d_w, d_v);
            let info = src2.evaluate(&m, w2, v2);
            Sample { x: info.i_yw, y: info.i_yrw, witness: m, converged: verts[i].converged && verts[j].converged }
        })
        .collect();
    let mut cloud2 = Cloud { src: &src2, d_w: w2, d_v: v2, samples: Vec::new() };
    if cfg.penalty {
        let mut stage = opt2.clone();
        stage.lbfgs.max_iters = stage.lbfgs.max_iters.min(60);
        let fresh: Vec<Vec<QSample>> = qx_probes
            .par_iter()
            .filter_map(|&q| {
                let cap = 4.0 * q;
                let start = samples
                    .iter()
                    .filter(|s| s.y <= cap + FEASIBILITY_SLACK)
                    .max_by(|a, b| a.x.total_cmp(&b.x))?;
                Some(penalty_path(&stage, start.witness.clone(), CurveKind::IbDual, cap))
            })
            .collect();
        samples.extend(fresh.into_iter().flatten());
    }
    cloud2.samples = samples;

    let mut probes = Vec::with_capacity(qx_probes.len());
    for &q in qx_probes {
        let single = src.s_y() - 0.5 * relevant_at(&cloud, q)?.value;
        let double = src2.s_y() - 0.5 * relevant_at(&cloud2, 2.0 * q)?.value;
        let difference = 0.5 * double - single;
        probes.push(AdditivityProbe {
            q_x: q,
            single,
            double_half: 0.5 * double,
            difference,
            pass: difference <= ADDITIVITY_UPPER_SLACK && difference >= -ADDITIVITY_LOWER_SLACK,
        });
    }
    let pass = probes.iter().all(|p| p.pass);
    Ok(AdditivityReport { probes, pass })
}
