//! Row-stochastic classical channels `p(w|x)` and their measure-and-prepare
//! quantum realization.

use serde::{Deserialize, Serialize};

use super::isometry::StinespringIsometry;
use crate::error::{invalid, Result};
use crate::quantum::linalg::{c, CMat, ZERO};
use crate::quantum::state::{strides, DensityOperator, QuantumState};

/// Row-sum tolerance of a conditional channel.
pub const ROW_TOL: f64 = 1e-12;

/// Conditional distribution `p(w|x)` stored as `|X|` rows of length `|W|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalChannel {
    rows: Vec<Vec<f64>>,
}

impl ConditionalChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(invalid("channel needs at least one input and one output"));
        }
        let nw = rows[0].len();
        for (x, r) in rows.iter().enumerate() {
            if r.len() != nw {
                return Err(invalid(format!("row {x} has {} outputs, expected {nw}", r.len())));
            }
            if r.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(invalid(format!("row {x} has a negative or non-finite entry")));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(invalid(format!("row {x} sums to {s}, not 1")));
            }
        }
        Ok(Self { rows })
    }

    /// Renormalizes rows that are already within a few ulps of stochastic.
    pub(crate) fn from_rows_normalized(mut rows: Vec<Vec<f64>>) -> Self {
        for r in rows.iter_mut() {
            let s: f64 = r.iter().sum();
            for p in r.iter_mut() {
                *p /= s;
            }
        }
        Self { rows }
    }

    pub fn identity(n: usize) -> Self {
        Self { rows: (0..n).map(|x| (0..n).map(|w| if w == x { 1.0 } else { 0.0 }).collect()).collect() }
    }

    /// Every input mapped to output 0.
    pub fn constant(nx: usize, nw: usize) -> Self {
        Self { rows: (0..nx).map(|_| (0..nw).map(|w| if w == 0 { 1.0 } else { 0.0 }).collect()).collect() }
    }

    /// Deterministic map `x ↦ f[x]`.
    pub fn deterministic(f: &[usize], nw: usize) -> Result<Self> {
        if f.iter().any(|&w| w >= nw) {
            return Err(invalid("deterministic map points outside the output alphabet"));
        }
        Ok(Self { rows: f.iter().map(|&t| (0..nw).map(|w| if w == t { 1.0 } else { 0.0 }).collect()).collect() })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, x: usize, w: usize) -> f64 {
        self.rows[x][w]
    }

    /// Flagged mixture `λ c0 ⊕ (1−λ) c1` on outputs `(w, flag)` flattened as `w·2 + flag`.
    pub fn flagged(&self, other: &Self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(invalid(format!("mixing weight {lambda} outside [0, 1]")));
        }
        if self.inputs() != other.inputs() {
            return Err(invalid("flagged mixture needs channels with equal input alphabets"));
        }
        let nw = self.outputs().max(other.outputs());
        let rows = (0..self.inputs())
            .map(|x| {
                let mut r = vec![0.0; 2 * nw];
                for w in 0..self.outputs() {
                    r[2 * w] = lambda * self.rows[x][w];
                }
                for w in 0..other.outputs() {
                    r[2 * w + 1] = (1.0 - lambda) * other.rows[x][w];
                }
                r
            })
            .collect();
        Ok(Self { rows })
    }

    /// Product channel on paired inputs `x1·|X2| + x2` and outputs `w1·|W2| + w2`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut rows = Vec::with_capacity(self.inputs() * other.inputs());
        for r1 in &self.rows {
            for r2 in &other.rows {
                rows.push(r1.iter().flat_map(|&a| r2.iter().map(move |&b| a * b)).collect());
            }
        }
        Self { rows }
    }

    /// Pad the output alphabet with never-used symbols.
    pub fn padded(&self, nw: usize) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.resize(nw.max(r.len()), 0.0);
                r
            })
            .collect();
        Self { rows }
    }

    /// Stinespring isometry `|x⟩ ↦ Σ_w √p(w|x) |w⟩_W |x·|W|+w⟩_V` of the
    /// measure-and-prepare map.
    pub fn stinespring(&self) -> Result<StinespringIsometry> {
        let (nx, nw) = (self.inputs(), self.outputs());
        let dv = nx * nw;
        let mut m = CMat::from_element(nw * dv, nx, ZERO);
        for x in 0..nx {
            for w in 0..nw {
                let amp = self.rows[x][w].sqrt();
                m[(w * dv + x * nw + w, x)] = c(amp, 0.0);
            }
        }
        StinespringIsometry::from_matrix(m, nx, nw, dv)
    }
}

/// Measure-and-prepare channel `ρ ↦ Σ_{x,w} p(w|x) ⟨x|ρ|x⟩ |w⟩⟨w|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePrepare {
    channel: ConditionalChannel,
}

/// Quantum realization of a classical channel.
pub fn classical_to_quantum_channel(channel: &ConditionalChannel) -> MeasurePrepare {
    MeasurePrepare { channel: channel.clone() }
}

impl MeasurePrepare {
    pub fn channel(&self) -> &ConditionalChannel {
        &self.channel
    }

    /// Apply to the `acted` subsystem of `rho`; the output subsystem keeps the
    /// position of `acted` and is labelled `out_label`.
    pub fn apply(&self, rho: &DensityOperator, acted: &str, out_label: &str) -> Result<DensityOperator> {
        let k = rho.index_of(acted)?;
        let dims = rho.dims();
        if dims[k] != self.channel.inputs() {
            return Err(crate::error::Error::Dimension(format!(
                "channel expects input dimension {}, `{acted}` has {}",
                self.channel.inputs(),
                dims[k]
            )));
        }
        let nw = self.channel.outputs();
        let mut new_dims = dims.to_vec();
        new_dims[k] = nw;
        let old_st = strides(dims);
        let new_st = strides(&new_dims);
        let rest: Vec<usize> = (0..dims.len()).filter(|&j| j != k).collect();
        let d_rest: usize = rest.iter().map(|&j| dims[j]).product();
        // Offsets of the untouched factors in the old and new flat indices.
        let mut offs = Vec::with_capacity(d_rest);
        let mut idx = vec![0usize; rest.len()];
        for _ in 0..d_rest {
            let o: usize = rest.iter().zip(&idx).map(|(&j, &i)| i * old_st[j]).sum();
            let n: usize = rest.iter().zip(&idx).map(|(&j, &i)| i * new_st[j]).sum();
            offs.push((o, n));
            for p in (0..rest.len()).rev() {
                idx[p] += 1;
                if idx[p] < dims[rest[p]] {
                    break;
                }
                idx[p] = 0;
            }
        }
        let total: usize = new_dims.iter().product();
        let mut out = CMat::from_element(total, total, ZERO);
        let m = rho.matrix();
        for x in 0..dims[k] {
            for w in 0..nw {
                let p = self.channel.get(x, w);
                if p == 0.0 {
                    continue;
                }
                for &(oi, ni) in &offs {
                    for &(oj, nj) in &offs {
                        let v = m[(oi + x * old_st[k], oj + x * old_st[k])] * p;
                        out[(ni + w * new_st[k], nj + w * new_st[k])] += v;
                    }
                }
            }
        }
        let labels: Vec<String> =
            rho.labels().iter().enumerate().map(|(j, l)| if j == k { out_label.to_string() } else { l.clone() }).collect();
        Ok(DensityOperator::from_parts_unchecked(out, new_dims, labels))
    }
}
