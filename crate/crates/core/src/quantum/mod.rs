//! Finite-dimensional quantum state algebra: composition, reduction,
//! purification and entropic functionals (all logarithms base 2).

pub mod entropy;
pub mod linalg;
pub mod random;
pub mod state;

pub use entropy::{
    conditional_mutual_information, conditional_mutual_information_raw, embed_classical_joint, mutual_information,
    mutual_information_raw, shannon_bits, subsystem_entropy, von_neumann_entropy, EntropyReport,
};
pub use linalg::{CMat, CVec};
pub use state::{
    partial_trace, purify, tensor_product, tensor_product_pure, DensityOperator, LabelPolicy, PureState, QuantumState,
};

use linalg::{c, ZERO};

use crate::error::{invalid, Result};

/// `p|v⟩⟨v| + (1−p)|11⟩⟨11|` with `|v⟩ = (|00⟩+|11⟩)/√2`, on subsystems `X`, `Y`.
pub fn rho3(p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("rho3 mixing weight p = {p} outside [0, 1]")));
    }
    let h = p / 2.0;
    let mut m = CMat::from_element(4, 4, ZERO);
    m[(0, 0)] = c(h, 0.0);
    m[(0, 3)] = c(h, 0.0);
    m[(3, 0)] = c(h, 0.0);
    m[(3, 3)] = c(h + 1.0 - p, 0.0);
    DensityOperator::with_labels(m, &[2, 2], &["X", "Y"])
}

/// `(|00⟩+|11⟩)/√2` on subsystems `A`, `B`.
pub fn bell_state() -> PureState {
    let s = 0.5f64.sqrt();
    PureState::with_labels(CVec::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]), &[2, 2], &["A", "B"])
        .expect("Bell state is normalized")
}

/// `(|000⟩+|111⟩)/√2` on subsystems `A`, `B`, `C`.
pub fn ghz_state() -> PureState {
    let s = 0.5f64.sqrt();
    let mut v = CVec::from_element(8, ZERO);
    v[0] = c(s, 0.0);
    v[7] = c(s, 0.0);
    PureState::with_labels(v, &[2, 2, 2], &["A", "B", "C"]).expect("GHZ state is normalized")
}
