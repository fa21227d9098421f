//! Trade-off curves, their witnesses, and convex envelopes of achieved points.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::{flagged_mix, ConditionalChannel, StinespringIsometry};
use crate::error::{invalid, Error, Result};

/// Channel that attains a curve point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Classical(ConditionalChannel),
    Isometry(StinespringIsometry),
    /// Branch `first` with weight `lambda`, `second` with `1 − lambda`, and a
    /// classical flag naming the branch.
    Flagged { lambda: f64, first: Box<Witness>, second: Box<Witness> },
}

impl Witness {
    /// Mixture of two witnesses. Classical pairs collapse to a single
    /// conditional channel.
    pub fn mix(lambda: f64, first: &Witness, second: &Witness) -> Result<Witness> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(invalid(format!("mixing weight {lambda} outside [0, 1]")));
        }
        if lambda == 1.0 {
            return Ok(first.clone());
        }
        if lambda == 0.0 {
            return Ok(second.clone());
        }
        match (first, second) {
            (Witness::Classical(a), Witness::Classical(b)) => Ok(Witness::Classical(a.flagged(b, lambda)?)),
            _ => Ok(Witness::Flagged { lambda, first: Box::new(first.clone()), second: Box::new(second.clone()) }),
        }
    }

    /// Stinespring isometry realizing the witness.
    pub fn to_isometry(&self) -> Result<StinespringIsometry> {
        match self {
            Witness::Classical(ch) => ch.stinespring(),
            Witness::Isometry(v) => Ok(v.clone()),
            Witness::Flagged { lambda, first, second } => {
                let (a, b) = (first.to_isometry()?, second.to_isometry()?);
                let d_w = a.d_w().max(b.d_w());
                let a = if a.d_w() < d_w { a.embed(d_w, a.d_v())? } else { a };
                let b = if b.d_w() < d_w { b.embed(d_w, b.d_v())? } else { b };
                flagged_mix(&a, &b, *lambda)?.stinespring()
            }
        }
    }

    pub fn as_classical(&self) -> Option<&ConditionalChannel> {
        match self {
            Witness::Classical(c) => Some(c),
            _ => None,
        }
    }
}

/// Which trade-off function a curve samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// `R(a) = min compression s.t. relevant information ≥ a`.
    Ib,
    /// `I_Y(R) = max relevant information s.t. compression ≤ R`.
    IbDual,
    /// `G(t) = min leakage s.t. disclosed information ≥ t`.
    Pf,
    /// `P(a) = max disclosed information s.t. leakage ≤ a`.
    PfDual,
}

impl CurveKind {
    pub fn axis_labels(&self, normalized: bool) -> (&'static str, &'static str) {
        match (self, normalized) {
            (CurveKind::Ib, false) => ("a = I(Y;W)", "R(a)"),
            (CurveKind::Ib, true) => ("a", "R̄(a)"),
            (CurveKind::IbDual, _) => ("R = I(X';W)", "I_Y(R)"),
            (CurveKind::Pf, _) => ("t = I(X';W)", "G(t)"),
            (CurveKind::PfDual, false) => ("a = I(Y;W)", "P(a)"),
            (CurveKind::PfDual, true) => ("a", "P̄(a)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub abscissa: f64,
    pub value: f64,
    /// Constraint quantity actually achieved by the witness.
    pub achieved_constraint: f64,
    pub converged: bool,
    pub witness: Option<Witness>,
    /// Analytic reference or lower bound, when one exists.
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub grid: Vec<f64>,
    pub config_hash: String,
    pub normalized: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
    pub meta: CurveMeta,
}

impl Curve {
    pub fn new(kind: CurveKind, points: Vec<CurvePoint>, meta: CurveMeta) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1].abscissa > w[0].abscissa) {
                return Err(invalid(format!("abscissae not strictly increasing at {}", w[1].abscissa)));
            }
        }
        if let Some(p) = points.iter().find(|p| !p.value.is_finite() || !p.abscissa.is_finite()) {
            return Err(Error::Numerical(format!("non-finite curve point at abscissa {}", p.abscissa)));
        }
        Ok(Self { kind, points, meta })
    }

    pub fn abscissae(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.abscissa).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Piecewise-linear interpolation of the sampled values.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let pts = &self.points;
        if pts.is_empty() || x < pts[0].abscissa - 1e-12 || x > pts[pts.len() - 1].abscissa + 1e-12 {
            return None;
        }
        if pts.len() == 1 {
            return Some(pts[0].value);
        }
        let k = pts.partition_point(|p| p.abscissa < x).clamp(1, pts.len() - 1);
        let (a, b) = (&pts[k - 1], &pts[k]);
        let t = ((x - a.abscissa) / (b.abscissa - a.abscissa)).clamp(0.0, 1.0);
        Some(a.value + t * (b.value - a.value))
    }
}

/// Evenly spaced grid of `n` points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect(),
    }
}

/// `n` log-spaced multipliers on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    linear_grid(a, b, n).into_iter().map(f64::exp).collect()
}

/// Short hex digest of a serializable configuration.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let bytes = serde_json::to_vec(cfg).unwrap_or_default();
    hex::encode(&Sha256::digest(&bytes)[..8])
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn sorted_indices(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].0.is_finite() && pts[i].1.is_finite()).collect();
    idx.sort_by(|&i, &j| pts[i].0.total_cmp(&pts[j].0).then(pts[i].1.total_cmp(&pts[j].1)));
    idx
}

/// Vertices of the lower convex hull, by increasing `x` (monotone chain).
pub fn lower_hull(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in sorted_indices(pts) {
        if let Some(&last) = hull.last() {
            if pts[last].0 == pts[i].0 {
                // Same abscissa, larger or equal ordinate.
                continue;
            }
        }
        while hull.len() >= 2 && cross(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) <= 1e-15 {
            hull.pop();
        }
        hull.push(i);
    }
    hull
}

/// Vertices of the upper convex hull, by increasing `x`.
pub fn upper_hull(pts: &[(f64, f64)]) -> Vec<usize> {
    let flipped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, -y)).collect();
    lower_hull(&flipped)
}

/// Which envelope of a point cloud is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `min y` subject to `x' ≥ x`, from the lower convex hull.
    LowerMinAbove,
    /// `max y` subject to `x' ≤ x`, from the upper convex hull.
    UpperMaxBelow,
}

/// Evaluation of an envelope: convex combination of two cloud points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolant {
    pub value: f64,
    /// Constraint abscissa achieved by the mixture.
    pub achieved: f64,
    pub left: usize,
    pub right: usize,
    /// Weight on `left`.
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct Envelope {
    side: Side,
    pts: Vec<(f64, f64)>,
    verts: Vec<usize>,
}

/// Abscissa slack when deciding feasibility of a target.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

impl Envelope {
    pub fn new(pts: Vec<(f64, f64)>, side: Side) -> Result<Self> {
        if pts.is_empty() {
            return Err(invalid("envelope of an empty point set"));
        }
        let hull = match side {
            Side::LowerMinAbove => lower_hull(&pts),
            Side::UpperMaxBelow => upper_hull(&pts),
        };
        if hull.is_empty() {
            return Err(Error::Numerical("no finite points in cloud".into()));
        }
        // Keep the monotone part of the hull.
        let verts = match side {
            Side::LowerMinAbove => {
                let k = (0..hull.len()).min_by(|&a, &b| pts[hull[a]].1.total_cmp(&pts[hull[b]].1)).unwrap();
                hull[k..].to_vec()
            }
            Side::UpperMaxBelow => {
                let k = (0..hull.len()).max_by(|&a, &b| pts[hull[a]].1.total_cmp(&pts[hull[b]].1).then(b.cmp(&a))).unwrap();
                hull[..=k].to_vec()
            }
        };
        Ok(Self { side, pts, verts })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.verts
    }

    pub fn vertex_points(&self) -> Vec<(f64, f64)> {
        self.verts.iter().map(|&i| self.pts[i]).collect()
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.pts[self.verts[0]].0, self.pts[*self.verts.last().unwrap()].0)
    }

    /// `None` when `x` lies outside the achievable range.
    pub fn eval(&self, x: f64) -> Option<Interpolant> {
        let v = &self.verts;
        let (lo, hi) = self.x_range();
        let at = |k: usize| Interpolant { value: self.pts[v[k]].1, achieved: self.pts[v[k]].0, left: v[k], right: v[k], lambda: 1.0 };
        match self.side {
            Side::LowerMinAbove => {
                if x > hi + FEASIBILITY_SLACK {
                    return None;
                }
                if x <= lo {
                    return Some(at(0));
                }
                if x >= hi {
                    return Some(at(v.len() - 1));
                }
            }
            Side::UpperMaxBelow => {
                if x < lo - FEASIBILITY_SLACK {
                    return None;
                }
                if x >= hi {
                    return Some(at(v.len() - 1));
                }
                if x <= lo {
                    return Some(at(0));
                }
            }
        }
        let k = v.partition_point(|&i| self.pts[i].0 < x).clamp(1, v.len() - 1);
        let (a, b) = (self.pts[v[k - 1]], self.pts[v[k]]);
        if x == b.0 {
            return Some(at(k));
        }
        let lambda = ((b.0 - x) / (b.0 - a.0)).clamp(0.0, 1.0);
        Some(Interpolant {
            value: lambda * a.1 + (1.0 - lambda) * b.1,
            achieved: lambda * a.0 + (1.0 - lambda) * b.0,
            left: v[k - 1],
            right: v[k],
            lambda,
        })
    }

    /// Slopes of the hull edges, paired with the edge endpoints.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.verts
            .windows(2)
            .map(|w| {
                let (a, b) = (self.pts[w[0]], self.pts[w[1]]);
                (w[0], w[1], (b.1 - a.1) / (b.0 - a.0))
            })
            .collect()
    }
}

/// Result of [`convexity_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub min_second_difference: f64,
    /// Index of the middle point of the worst triple.
    pub location: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Smallest second difference `y₀ − 2y₁ + y₂` of consecutive triples; on
/// uneven grids each slope is rescaled to the mean spacing of the triple.
pub fn convexity_check(curve: &Curve, tolerance: f64) -> Result<ConvexityReport> {
    second_difference_check(&curve.abscissae(), &curve.values(), tolerance)
}

pub fn second_difference_check(xs: &[f64], ys: &[f64], tolerance: f64) -> Result<ConvexityReport> {
    if xs.len() < 3 || xs.len() != ys.len() {
        return Err(invalid("convexity check needs at least 3 points"));
    }
    let mut worst = (f64::INFINITY, 0);
    for k in 1..xs.len() - 1 {
        let (h1, h2) = (xs[k] - xs[k - 1], xs[k + 1] - xs[k]);
        let hbar = 0.5 * (h1 + h2);
        let d2 = (ys[k + 1] - ys[k]) * hbar / h2 - (ys[k] - ys[k - 1]) * hbar / h1;
        if d2 < worst.0 {
            worst = (d2, k);
        }
    }
    Ok(ConvexityReport { min_second_difference: worst.0, location: worst.1, tolerance, pass: worst.0 >= -tolerance })
}
