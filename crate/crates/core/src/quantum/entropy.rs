//! Von Neumann entropy and mutual-information functionals, in bits.

use serde::{Deserialize, Serialize};

use super::linalg::{c, CMat, CVec};
use super::state::{DensityOperator, QuantumState, STATE_TOL};
use crate::classical::JointDistribution;
use crate::error::{invalid, Error, Result};

/// Entropy value with the eigenvalue mass that had to be clipped to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub value: f64,
    pub clip_mass: f64,
}

/// Mutual information more negative than this is reported as an error.
const MI_NEGATIVE_TOL: f64 = 1e-9;

/// `−Σ λ log₂ λ` over the positive part of a spectrum.
pub fn shannon_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    let mut h = 0.0;
    for p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h.max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<EntropyReport> {
    let mut clip = 0.0;
    let mut spectrum = rho.spectrum();
    for l in spectrum.iter_mut() {
        if *l < 0.0 {
            if *l < -STATE_TOL {
                return Err(invalid(format!("PSD invariant violated: eigenvalue {l:e}")));
            }
            clip -= *l;
            *l = 0.0;
        }
    }
    let value = shannon_bits(spectrum).min((rho.dim() as f64).log2());
    Ok(EntropyReport { value, clip_mass: clip })
}

/// `S(names)` of a state; an empty name list has zero entropy.
///
/// For pure states the smaller of the two sides of the cut is diagonalized.
pub fn subsystem_entropy<S: QuantumState>(state: &S, names: &[&str]) -> Result<f64> {
    let pos = state.positions(names)?;
    if pos.is_empty() {
        return Ok(0.0);
    }
    if state.is_pure() {
        if pos.len() == state.labels().len() {
            return Ok(0.0);
        }
        let d_keep: usize = pos.iter().map(|&k| state.dims()[k]).product();
        let total: usize = state.dims().iter().product();
        if d_keep * d_keep > total {
            let rest: Vec<&str> = state
                .labels()
                .iter()
                .enumerate()
                .filter(|(k, _)| !pos.contains(k))
                .map(|(_, l)| l.as_str())
                .collect();
            return Ok(von_neumann_entropy(&state.reduce(&rest)?)?.value);
        }
    }
    Ok(von_neumann_entropy(&state.reduce(names)?)?.value)
}

fn disjoint(a: &[&str], b: &[&str]) -> Result<()> {
    if let Some(x) = a.iter().find(|x| b.contains(x)) {
        return Err(invalid(format!("subsystem `{x}` appears in overlapping groups")));
    }
    Ok(())
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    a.iter().chain(b).copied().collect()
}

/// `I(A;B) = S(A)+S(B)−S(AB)` before clamping.
pub fn mutual_information_raw<S: QuantumState>(state: &S, a: &[&str], b: &[&str]) -> Result<f64> {
    disjoint(a, b)?;
    if a.is_empty() || b.is_empty() {
        return Err(invalid("mutual information needs two nonempty groups"));
    }
    Ok(subsystem_entropy(state, a)? + subsystem_entropy(state, b)? - subsystem_entropy(state, &union(a, b))?)
}

fn clamp_information(raw: f64) -> Result<f64> {
    if raw < -MI_NEGATIVE_TOL {
        return Err(Error::Numerical(format!("information quantity {raw:e} is negative beyond tolerance")));
    }
    Ok(raw.max(0.0))
}

/// Quantum mutual information in bits, clamped at zero.
pub fn mutual_information<S: QuantumState>(state: &S, a: &[&str], b: &[&str]) -> Result<f64> {
    clamp_information(mutual_information_raw(state, a, b)?)
}

/// `I(A;C|B) = S(AB)+S(BC)−S(B)−S(ABC)` before clamping.
pub fn conditional_mutual_information_raw<S: QuantumState>(
    state: &S,
    a: &[&str],
    c: &[&str],
    b: &[&str],
) -> Result<f64> {
    disjoint(a, c)?;
    disjoint(a, b)?;
    disjoint(b, c)?;
    if a.is_empty() || c.is_empty() {
        return Err(invalid("conditional mutual information needs nonempty A and C"));
    }
    let ab = union(a, b);
    let bc = union(b, c);
    let abc = union(&ab, c);
    Ok(subsystem_entropy(state, &ab)? + subsystem_entropy(state, &bc)?
        - subsystem_entropy(state, b)?
        - subsystem_entropy(state, &abc)?)
}

/// Conditional mutual information `I(A;C|B)` in bits, clamped at zero.
pub fn conditional_mutual_information<S: QuantumState>(state: &S, a: &[&str], c: &[&str], b: &[&str]) -> Result<f64> {
    clamp_information(conditional_mutual_information_raw(state, a, c, b)?)
}

/// `Σ p(x,y) |x⟩⟨x| ⊗ |y⟩⟨y|` on subsystems `X`, `Y`.
pub fn embed_classical_joint(p: &JointDistribution) -> Result<DensityOperator> {
    let (nx, ny) = p.shape();
    let diag = CVec::from_iterator(nx * ny, (0..nx).flat_map(|x| (0..ny).map(move |y| (x, y))).map(|(x, y)| c(p.get(x, y), 0.0)));
    DensityOperator::with_labels(CMat::from_diagonal(&diag), &[nx, ny], &["X", "Y"])
}
