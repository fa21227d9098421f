//! Flagged mixtures `λ N0 ⊗ |0⟩⟨0| + (1−λ) N1 ⊗ |1⟩⟨1|` of two channels.

use super::isometry::{embed_isometry_matrix, StinespringIsometry};
use crate::error::{invalid, Error, Result};
use crate::quantum::linalg::{c, CMat, ZERO};
use crate::quantum::state::{DensityOperator, QuantumState};

/// Label of the flag register in [`FlaggedChannel::apply`] outputs.
pub const FLAG_LABEL: &str = "W'";

#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedChannel {
    first: StinespringIsometry,
    second: StinespringIsometry,
    lambda: f64,
}

/// Mix two channels with an orthogonal flag recording the branch.
///
/// The branches carry weights `λ` and `1 − λ`.
pub fn flagged_mix(n0: &StinespringIsometry, n1: &StinespringIsometry, lambda: f64) -> Result<FlaggedChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(invalid(format!("mixing weight {lambda} outside [0, 1]")));
    }
    if n0.d_in() != n1.d_in() || n0.d_w() != n1.d_w() {
        return Err(Error::Dimension(format!(
            "flagged branches must share input and output dimensions: ({}, {}) vs ({}, {})",
            n0.d_in(),
            n0.d_w(),
            n1.d_in(),
            n1.d_w()
        )));
    }
    Ok(FlaggedChannel { first: n0.clone(), second: n1.clone(), lambda })
}

impl FlaggedChannel {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn branches(&self) -> (&StinespringIsometry, &StinespringIsometry) {
        (&self.first, &self.second)
    }

    /// Output on `acted`, labelled `W`, followed directly by the flag `W'`.
    pub fn apply(&self, rho: &DensityOperator, acted: &str) -> Result<DensityOperator> {
        let a = self.first.apply(rho, acted)?;
        let b = self.second.apply(rho, acted)?;
        let p0 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(self.lambda, 0.0), ZERO]));
        let p1 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![ZERO, c(1.0 - self.lambda, 0.0)]));
        let m = a.matrix().kronecker(&p0) + b.matrix().kronecker(&p1);
        let mut dims = a.dims().to_vec();
        dims.push(2);
        let mut labels = a.labels().to_vec();
        labels.push(FLAG_LABEL.to_string());
        let joined = DensityOperator::from_parts_unchecked(m, dims, labels.clone());
        let mut order: Vec<&str> = Vec::with_capacity(labels.len());
        for l in a.labels() {
            order.push(l);
            if l == "W" {
                order.push(FLAG_LABEL);
            }
        }
        joined.permute(&order)
    }

    /// Single isometry realizing the mixture. Output index is `w·2 + flag`,
    /// environment index `v·2 + flag`, so `d_W` and `d_V` both double
    /// (`d_V` taken as the larger branch environment).
    pub fn stinespring(&self) -> Result<StinespringIsometry> {
        let (d_in, d_w) = (self.first.d_in(), self.first.d_w());
        let d_v = self.first.d_v().max(self.second.d_v());
        let m0 = embed_isometry_matrix(self.first.matrix(), d_w, self.first.d_v(), d_w, d_v);
        let m1 = embed_isometry_matrix(self.second.matrix(), d_w, self.second.d_v(), d_w, d_v);
        let (a0, a1) = (self.lambda.sqrt(), (1.0 - self.lambda).sqrt());
        let dv2 = 2 * d_v;
        let mut m = CMat::from_element(2 * d_w * dv2, d_in, ZERO);
        for w in 0..d_w {
            for v in 0..d_v {
                for x in 0..d_in {
                    m[((2 * w) * dv2 + 2 * v, x)] = m0[(w * d_v + v, x)] * a0;
                    m[((2 * w + 1) * dv2 + 2 * v + 1, x)] = m1[(w * d_v + v, x)] * a1;
                }
            }
        }
        StinespringIsometry::from_matrix(m, d_in, 2 * d_w, dv2)
    }
}
