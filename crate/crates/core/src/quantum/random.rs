//! Seeded random states and isometries used by tests, restarts and the CLI.

use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{c, orthonormalize_columns, CMat, CVec};
use super::state::{DensityOperator, PureState};

fn gaussian(rng: &mut impl Rng) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-distributed unit vector on the given subsystems.
pub fn random_pure(rng: &mut impl Rng, dims: &[usize], labels: &[&str]) -> PureState {
    let n: usize = dims.iter().product();
    let v = CVec::from_fn(n, |_, _| gaussian(rng));
    PureState::normalized(v, dims, labels).expect("gaussian vector is nonzero")
}

/// Ginibre-ensemble density operator `G G† / tr(G G†)` on a single subsystem.
pub fn random_density(rng: &mut impl Rng, dim: usize, label: &str) -> DensityOperator {
    let g = CMat::from_fn(dim, dim, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::with_labels(m / c(tr, 0.0), &[dim], &[label]).expect("Ginibre matrix is a valid state")
}

/// Haar-random `n × d` isometry (orthonormalized complex Gaussian columns).
pub fn haar_isometry(rng: &mut impl Rng, n: usize, d: usize) -> CMat {
    loop {
        let g = CMat::from_fn(n, d, |_, _| gaussian(rng));
        if let Ok(q) = orthonormalize_columns(&g) {
            return q;
        }
    }
}

/// Random probability vector drawn uniformly from the simplex.
pub fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}
