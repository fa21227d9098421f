//! Stinespring isometries `X → W ⊗ V` parametrized through the matrix
//! exponential of an anti-Hermitian generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::quantum::linalg::{
    c, complete_to_unitary, expm_antihermitian, isometry_defect, logm_unitary, CMat, CVec, ONE, ZERO,
};
use crate::quantum::state::{DensityOperator, PureState, QuantumState};

/// Largest tolerated `|V†V − I|` entry.
pub const ISOMETRY_TOL: f64 = 1e-10;

/// Anti-Hermitian `n × n` generator from `n²` reals: the first `n` entries
/// are the imaginary diagonal, then each pair `j < k` (row-major) contributes
/// `A[j,k] = a + ib`, `A[k,j] = −a + ib`.
pub fn antihermitian_from_params(theta: &[f64], n: usize) -> Result<CMat> {
    if theta.len() != n * n {
        return Err(Error::Dimension(format!("generator of size {n} needs {} parameters, got {}", n * n, theta.len())));
    }
    let mut a = CMat::from_element(n, n, ZERO);
    for k in 0..n {
        a[(k, k)] = c(0.0, theta[k]);
    }
    let mut p = n;
    for j in 0..n {
        for k in (j + 1)..n {
            let (re, im) = (theta[p], theta[p + 1]);
            a[(j, k)] = c(re, im);
            a[(k, j)] = c(-re, im);
            p += 2;
        }
    }
    Ok(a)
}

/// Inverse of [`antihermitian_from_params`] (reads the upper triangle).
pub fn params_from_antihermitian(a: &CMat) -> Vec<f64> {
    let n = a.nrows();
    let mut theta = Vec::with_capacity(n * n);
    for k in 0..n {
        theta.push(a[(k, k)].im);
    }
    for j in 0..n {
        for k in (j + 1)..n {
            theta.push(a[(j, k)].re);
            theta.push(a[(j, k)].im);
        }
    }
    theta
}

/// Isometry `X → W ⊗ V`; row index of the matrix is `w·d_V + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct StinespringIsometry {
    params: Vec<f64>,
    d_in: usize,
    d_w: usize,
    d_v: usize,
    matrix: CMat,
}

#[derive(Serialize, Deserialize)]
struct IsometryRepr {
    d_in: usize,
    d_w: usize,
    d_v: usize,
    params: Vec<f64>,
}

impl Serialize for StinespringIsometry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IsometryRepr { d_in: self.d_in, d_w: self.d_w, d_v: self.d_v, params: self.params.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StinespringIsometry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = IsometryRepr::deserialize(d)?;
        isometry_from_params(&r.params, r.d_in, r.d_w, r.d_v).map_err(serde::de::Error::custom)
    }
}

fn check_dims(d_in: usize, d_w: usize, d_v: usize) -> Result<()> {
    if d_in == 0 || d_w == 0 || d_v == 0 {
        return Err(invalid("isometry dimensions must be positive"));
    }
    if d_w * d_v < d_in {
        return Err(Error::Dimension(format!("d_W·d_V = {} is smaller than d_in = {d_in}", d_w * d_v)));
    }
    Ok(())
}

/// First `d_in` columns of `exp(A(θ))`.
pub fn isometry_from_params(theta: &[f64], d_in: usize, d_w: usize, d_v: usize) -> Result<StinespringIsometry> {
    check_dims(d_in, d_w, d_v)?;
    let n = d_w * d_v;
    let a = antihermitian_from_params(theta, n)?;
    let u = expm_antihermitian(&a);
    let matrix = u.columns(0, d_in).clone_owned();
    Ok(StinespringIsometry { params: theta.to_vec(), d_in, d_w, d_v, matrix })
}

/// Deterministic pseudo-random parameters, uniform in `[−π, π]`.
pub fn random_channel_params(seed: u64, d_in: usize, d_w: usize, d_v: usize) -> Result<Vec<f64>> {
    check_dims(d_in, d_w, d_v)?;
    let n = d_w * d_v;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n * n).map(|_| rng.random_range(-std::f64::consts::PI..=std::f64::consts::PI)).collect())
}

impl StinespringIsometry {
    /// Wrap an explicit isometry matrix. Parameters are recovered through the
    /// unitary logarithm of a completion and the matrix is regenerated from
    /// them, so the stored matrix is always the image of the stored params.
    pub fn from_matrix(m: CMat, d_in: usize, d_w: usize, d_v: usize) -> Result<Self> {
        check_dims(d_in, d_w, d_v)?;
        if m.shape() != (d_w * d_v, d_in) {
            return Err(Error::Dimension(format!("expected a {}x{d_in} matrix, got {:?}", d_w * d_v, m.shape())));
        }
        let defect = isometry_defect(&m);
        if defect > 1e-8 {
            return Err(invalid(format!("matrix is not an isometry: max |V†V − I| = {defect:e}")));
        }
        let u = complete_to_unitary(&m)?;
        let theta = params_from_antihermitian(&logm_unitary(&u)?);
        isometry_from_params(&theta, d_in, d_w, d_v)
    }

    /// `|x⟩ ↦ |x⟩_W |0⟩_V`; needs `d_W ≥ d_in`.
    pub fn identity_channel(d_in: usize, d_w: usize, d_v: usize) -> Result<Self> {
        if d_w < d_in {
            return Err(Error::Dimension(format!("identity channel needs d_W ≥ {d_in}")));
        }
        let mut m = CMat::from_element(d_w * d_v, d_in, ZERO);
        for x in 0..d_in {
            m[(x * d_v, x)] = ONE;
        }
        Self::from_matrix(m, d_in, d_w, d_v)
    }

    /// `|x⟩ ↦ |0⟩_W |x⟩_V`; needs `d_V ≥ d_in`.
    pub fn constant_channel(d_in: usize, d_w: usize, d_v: usize) -> Result<Self> {
        if d_v < d_in {
            return Err(Error::Dimension(format!("constant channel needs d_V ≥ {d_in}")));
        }
        let mut m = CMat::from_element(d_w * d_v, d_in, ZERO);
        for x in 0..d_in {
            m[(x, x)] = ONE;
        }
        Self::from_matrix(m, d_in, d_w, d_v)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_w(&self) -> usize {
        self.d_w
    }

    pub fn d_v(&self) -> usize {
        self.d_v
    }

    /// `K_i = (I_W ⊗ ⟨i|_V) V`.
    pub fn kraus_operators(&self) -> Vec<CMat> {
        (0..self.d_v)
            .map(|i| CMat::from_fn(self.d_w, self.d_in, |w, x| self.matrix[(w * self.d_v + i, x)]))
            .collect()
    }

    /// Apply the channel `tr_V(V · V†)` to subsystem `acted`; the output keeps
    /// the position of `acted` and is labelled `W`.
    pub fn apply(&self, rho: &DensityOperator, acted: &str) -> Result<DensityOperator> {
        self.apply_labeled(rho, acted, "W")
    }

    pub fn apply_labeled(&self, rho: &DensityOperator, acted: &str, out: &str) -> Result<DensityOperator> {
        let k = rho.index_of(acted)?;
        if rho.dims()[k] != self.d_in {
            return Err(Error::Dimension(format!("`{acted}` has dimension {}, channel expects {}", rho.dims()[k], self.d_in)));
        }
        let env = "\u{0}env";
        let labels: Vec<&str> = rho.labels().iter().map(|s| s.as_str()).collect();
        let rest: Vec<&str> = labels.iter().copied().filter(|l| *l != acted).collect();
        let mut order = vec![acted];
        order.extend(&rest);
        let front = rho.permute(&order)?;
        let d_rest = front.dim() / self.d_in;
        let big = self.matrix.kronecker(&CMat::identity(d_rest, d_rest));
        let dilated = &big * front.matrix() * big.adjoint();
        let mut dims = vec![self.d_w, self.d_v];
        dims.extend(rest.iter().map(|l| rho.dim_of(l).unwrap()));
        let mut full_labels = vec![out.to_string(), env.to_string()];
        full_labels.extend(rest.iter().map(|s| s.to_string()));
        let full = DensityOperator::from_parts_unchecked(dilated, dims, full_labels);
        let mut keep = vec![out];
        keep.extend(&rest);
        let reduced = full.reduce(&keep)?;
        let target: Vec<&str> = labels.iter().map(|l| if *l == acted { out } else { *l }).collect();
        reduced.permute(&target)
    }

    /// Embed into larger output / environment spaces without changing the channel.
    pub fn embed(&self, d_w: usize, d_v: usize) -> Result<Self> {
        if d_w < self.d_w || d_v < self.d_v {
            return Err(Error::Dimension("embedding must not shrink W or V".into()));
        }
        Self::from_matrix(embed_isometry_matrix(&self.matrix, self.d_w, self.d_v, d_w, d_v), self.d_in, d_w, d_v)
    }
}

/// Zero-pad an isometry matrix `(w·d_V + v, x)` into larger `W`, `V` spaces.
pub(crate) fn embed_isometry_matrix(m: &CMat, d_w: usize, d_v: usize, new_w: usize, new_v: usize) -> CMat {
    let d_in = m.ncols();
    let mut out = CMat::from_element(new_w * new_v, d_in, ZERO);
    for w in 0..d_w {
        for v in 0..d_v {
            for x in 0..d_in {
                out[(w * new_v + v, x)] = m[(w * d_v + v, x)];
            }
        }
    }
    out
}

/// Product isometry `V1 ⊗ V2` with rows reordered to `(w1 w2, v1 v2)` and
/// inputs `x1·d_in2 + x2`.
pub(crate) fn product_isometry_matrix(a: &CMat, aw: usize, av: usize, b: &CMat, bw: usize, bv: usize) -> CMat {
    let (ax, bx) = (a.ncols(), b.ncols());
    let dv = av * bv;
    let mut out = CMat::from_element(aw * bw * dv, ax * bx, ZERO);
    for x1 in 0..ax {
        for x2 in 0..bx {
            for w1 in 0..aw {
                for v1 in 0..av {
                    let ea = a[(w1 * av + v1, x1)];
                    if ea == ZERO {
                        continue;
                    }
                    for w2 in 0..bw {
                        for v2 in 0..bv {
                            let row = (w1 * bw + w2) * dv + v1 * bv + v2;
                            out[(row, x1 * bx + x2)] = ea * b[(w2 * bv + v2, x2)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Replace subsystem `acted` of `psi` by the output and environment factors
/// (labelled `W` and `V`) of the isometry, in place.
pub fn stinespring_extend(iso: &StinespringIsometry, psi: &PureState, acted: &str) -> Result<PureState> {
    stinespring_extend_labeled(iso.matrix(), iso.d_w(), iso.d_v(), psi, acted, ("W", "V"))
}

pub(crate) fn stinespring_extend_labeled(
    m: &CMat,
    d_w: usize,
    d_v: usize,
    psi: &PureState,
    acted: &str,
    (w_label, v_label): (&str, &str),
) -> Result<PureState> {
    let k = psi.index_of(acted)?;
    let d_in = m.ncols();
    if psi.dims()[k] != d_in {
        return Err(Error::Dimension(format!("`{acted}` has dimension {}, isometry expects {d_in}", psi.dims()[k])));
    }
    for l in [w_label, v_label] {
        if psi.labels().iter().any(|x| x == l && x != acted) {
            return Err(Error::LabelCollision(l.to_string()));
        }
    }
    let labels: Vec<&str> = psi.labels().iter().map(|s| s.as_str()).collect();
    let rest: Vec<&str> = labels.iter().copied().filter(|l| *l != acted).collect();
    let mut order = vec![acted];
    order.extend(&rest);
    let front = psi.permute(&order)?;
    let d_rest = front.dim() / d_in;
    let coeffs = CMat::from_fn(d_in, d_rest, |x, t| front.vector()[x * d_rest + t]);
    let out = m * coeffs;
    let n = d_w * d_v;
    let v = CVec::from_fn(n * d_rest, |i, _| out[(i / d_rest, i % d_rest)]);
    let mut dims = vec![d_w, d_v];
    dims.extend(rest.iter().map(|l| psi.dim_of(l).unwrap()));
    let mut new_labels = vec![w_label.to_string(), v_label.to_string()];
    new_labels.extend(rest.iter().map(|s| s.to_string()));
    let extended = PureState::from_parts_unchecked(v, dims, new_labels);
    let mut target = Vec::with_capacity(labels.len() + 1);
    for l in &labels {
        if *l == acted {
            target.push(w_label);
            target.push(v_label);
        } else {
            target.push(*l);
        }
    }
    extended.permute(&target)
}
