//! Classical sources: joint distributions, the binary-symmetric oracle, and
//! information-bottleneck / privacy-funnel curves.

pub mod binary;
pub mod distribution;
pub mod ib;
pub mod pf;

pub use binary::{
    binary_convolution, binary_entropy, binary_entropy_inverse, bsc_ib_information, bsc_ib_oracle, bsc_ib_rate,
};
pub use distribution::{JointDistribution, Pruned};
pub use ib::{classical_ib_curve, classical_ib_dual_curve, ClassicalConfig};
pub use pf::{classical_pf_curve, classical_pf_dual_curve, multi_letter_pf_point, pf_lower_bound};
