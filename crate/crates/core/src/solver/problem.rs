//! Purified source `ψ_XYR` and fast evaluation of `I(Y;W)` and `I(YR;W)` with
//! gradients for an isometry `V: X → W ⊗ V`.

use crate::error::{Error, Result};
use crate::quantum::linalg::{c, hermitian_eigen, CMat, ZERO};
use crate::quantum::{purify, subsystem_entropy, DensityOperator, PureState, QuantumState};

/// Eigenvalues below this enter the entropy gradient as this value.
const LOG_FLOOR: f64 = 1e-12;

/// The two information quantities of a channel on a source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Informations {
    /// `I(Y;W)`.
    pub i_yw: f64,
    /// `I(YR;W)`, equal to `I(X';W)` on the purification of `ρ_X`.
    pub i_yrw: f64,
}

/// `ψ_XYR` with the `X` factor as rows of a coefficient matrix.
#[derive(Debug, Clone)]
pub struct QuantumSource {
    psi: PureState,
    coeff: CMat,
    d_x: usize,
    d_y: usize,
    d_r: usize,
    s_x: f64,
    s_y: f64,
    i_xy: f64,
}

impl QuantumSource {
    /// Purify a bipartite `ρ_XY` (labels `X`, `Y`) into `ψ_XYR`.
    pub fn from_density(rho: &DensityOperator) -> Result<Self> {
        rho.index_of("X")?;
        rho.index_of("Y")?;
        if rho.dims().len() != 2 {
            return Err(Error::Dimension("source must have exactly the subsystems X and Y".into()));
        }
        let psi = purify(rho, "R")?;
        Self::from_pure(&psi)
    }

    /// Use a pure `ψ_XYR` (labels `X`, `Y`, `R`) directly.
    pub fn from_pure(psi: &PureState) -> Result<Self> {
        if psi.dims().len() != 3 {
            return Err(Error::Dimension("pure source must have exactly the subsystems X, Y and R".into()));
        }
        let psi = psi.permute(&["X", "Y", "R"])?;
        let (d_x, d_y, d_r) = (psi.dims()[0], psi.dims()[1], psi.dims()[2]);
        let m = d_y * d_r;
        let coeff = CMat::from_fn(d_x, m, |x, col| psi.vector()[x * m + col]);
        let s_x = subsystem_entropy(&psi, &["X"])?;
        let s_y = subsystem_entropy(&psi, &["Y"])?;
        let s_xy = subsystem_entropy(&psi, &["X", "Y"])?;
        Ok(Self { psi, coeff, d_x, d_y, d_r, s_x, s_y, i_xy: (s_x + s_y - s_xy).max(0.0) })
    }

    pub fn psi(&self) -> &PureState {
        &self.psi
    }

    pub fn d_x(&self) -> usize {
        self.d_x
    }

    pub fn d_y(&self) -> usize {
        self.d_y
    }

    pub fn d_r(&self) -> usize {
        self.d_r
    }

    pub fn s_x(&self) -> f64 {
        self.s_x
    }

    pub fn s_y(&self) -> f64 {
        self.s_y
    }

    /// `I(X;Y)` of the source.
    pub fn i_xy(&self) -> f64 {
        self.i_xy
    }

    /// `ρ_X`.
    pub fn rho_x(&self) -> CMat {
        &self.coeff * self.coeff.adjoint()
    }

    fn sigma(&self, v: &CMat) -> CMat {
        v * &self.coeff
    }

    /// `(I(Y;W), I(YR;W))` of the isometry.
    pub fn evaluate(&self, v: &CMat, d_w: usize, d_v: usize) -> Informations {
        let sig = self.sigma(v);
        let (sw, _) = entropy_side(&reshape_w(&sig, d_w, d_v), false);
        let (sv, _) = entropy_side(&reshape_v(&sig, d_w, d_v), false);
        let (syw, _) = entropy_side(&reshape_yw(&sig, d_w, d_v, self.d_y, self.d_r), false);
        self.combine(sw, sv, syw)
    }

    fn combine(&self, sw: f64, sv: f64, syw: f64) -> Informations {
        Informations { i_yw: (self.s_y + sw - syw).max(0.0), i_yrw: (sw + self.s_x - sv).max(0.0) }
    }

    /// Informations and the matrix `C = V G_V†` whose pairing
    /// `Re tr(C A)` is the derivative of `weights · (I_YW, I_YRW)` along
    /// `V ↦ V + A V`.
    pub fn evaluate_with_gradient(&self, v: &CMat, d_w: usize, d_v: usize, weights: (f64, f64)) -> (Informations, CMat) {
        let sig = self.sigma(v);
        let (d_y, d_r) = (self.d_y, self.d_r);
        let (sw, gw) = entropy_side(&reshape_w(&sig, d_w, d_v), true);
        let (sv, gv) = entropy_side(&reshape_v(&sig, d_w, d_v), true);
        let (syw, gyw) = entropy_side(&reshape_yw(&sig, d_w, d_v, d_y, d_r), true);
        let info = self.combine(sw, sv, syw);
        let (a, b) = weights;
        // I_YW = S_Y + S_W − S_YW and I_YRW = S_W + S_X − S_V.
        let m = sig.ncols();
        let mut g = CMat::from_element(sig.nrows(), m, ZERO);
        let cw = c(a + b, 0.0);
        let cv = c(-b, 0.0);
        let cyw = c(-a, 0.0);
        for w in 0..d_w {
            for vv in 0..d_v {
                let row = w * d_v + vv;
                for col in 0..m {
                    let (y, r) = (col / d_r, col % d_r);
                    g[(row, col)] = gw[(w, vv * m + col)] * cw
                        + gv[(vv, w * m + col)] * cv
                        + gyw[(w * d_y + y, vv * d_r + r)] * cyw;
                }
            }
        }
        let gv_mat = g * self.coeff.adjoint();
        (info, v * gv_mat.adjoint())
    }
}

/// `M_W[w, v·m + col] = Σ[w·d_V + v, col]`.
fn reshape_w(sig: &CMat, d_w: usize, d_v: usize) -> CMat {
    let m = sig.ncols();
    CMat::from_fn(d_w, d_v * m, |w, k| sig[(w * d_v + k / m, k % m)])
}

/// `M_V[v, w·m + col] = Σ[w·d_V + v, col]`.
fn reshape_v(sig: &CMat, d_w: usize, d_v: usize) -> CMat {
    let m = sig.ncols();
    CMat::from_fn(d_v, d_w * m, |v, k| sig[((k / m) * d_v + v, k % m)])
}

/// `M_YW[w·d_Y + y, v·d_R + r] = Σ[w·d_V + v, y·d_R + r]`.
fn reshape_yw(sig: &CMat, d_w: usize, d_v: usize, d_y: usize, d_r: usize) -> CMat {
    CMat::from_fn(d_w * d_y, d_v * d_r, |i, j| {
        let (w, y) = (i / d_y, i % d_y);
        let (v, r) = (j / d_r, j % d_r);
        sig[(w * d_v + v, y * d_r + r)]
    })
}

/// Entropy of `M M†` (equivalently `M† M`) from the smaller Gram matrix and,
/// on request, the gradient `G` with `dS = Re tr(G† dM)`.
fn entropy_side(m: &CMat, grad: bool) -> (f64, CMat) {
    let rows_side = m.nrows() <= m.ncols();
    let k = if rows_side { m * m.adjoint() } else { m.adjoint() * m };
    let (vals, q) = hermitian_eigen(&k);
    let mut s = 0.0;
    for &l in &vals {
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    if !grad {
        return (s.max(0.0), CMat::zeros(0, 0));
    }
    let n = vals.len();
    let mut scaled = q.clone();
    for j in 0..n {
        let lg = vals[j].max(LOG_FLOOR).log2();
        for i in 0..n {
            scaled[(i, j)] *= c(lg, 0.0);
        }
    }
    let log_k = scaled * q.adjoint();
    let g = if rows_side { &log_k * m } else { m * &log_k };
    (s.max(0.0), g * c(-2.0, 0.0))
}

/// Euclidean gradient coordinates in the generator basis of
/// [`crate::channels::antihermitian_from_params`] from `C`.
pub fn generator_gradient(cm: &CMat) -> Vec<f64> {
    let n = cm.nrows();
    let mut g = Vec::with_capacity(n * n);
    for k in 0..n {
        g.push(-cm[(k, k)].im);
    }
    for j in 0..n {
        for k in (j + 1)..n {
            g.push((cm[(k, j)] - cm[(j, k)]).re);
            g.push(-(cm[(k, j)] + cm[(j, k)]).im);
        }
    }
    g
}
