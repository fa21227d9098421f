//! Finite joint distributions `p(x, y)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::random::random_simplex;
use crate::quantum::shannon_bits;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOL: f64 = 1e-12;

/// Joint distribution stored as `|X|` rows of length `|Y|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    table: Vec<Vec<f64>>,
}

/// Symbols removed by [`JointDistribution::prune`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pruned {
    pub kept_x: Vec<usize>,
    pub kept_y: Vec<usize>,
    pub dropped_x: Vec<usize>,
    pub dropped_y: Vec<usize>,
}

impl JointDistribution {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        if table.is_empty() || table[0].is_empty() {
            return Err(invalid("joint distribution needs nonempty alphabets"));
        }
        let ny = table[0].len();
        let mut total = 0.0;
        for (x, row) in table.iter().enumerate() {
            if row.len() != ny {
                return Err(invalid(format!("row {x} has {} entries, expected {ny}", row.len())));
            }
            for &p in row {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(invalid(format!("row {x} has a negative or non-finite entry")));
                }
                total += p;
            }
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(invalid(format!("joint distribution sums to {total}, not 1")));
        }
        Ok(Self { table })
    }

    /// Uniform input through a binary symmetric channel with crossover `delta`.
    pub fn bsc(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(invalid(format!("crossover probability {delta} outside [0, 1]")));
        }
        let (a, b) = (0.5 * (1.0 - delta), 0.5 * delta);
        Self::new(vec![vec![a, b], vec![b, a]])
    }

    /// Joint distribution with `Y = X` uniform on `n` symbols.
    pub fn perfectly_correlated(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("alphabet must be nonempty"));
        }
        let p = 1.0 / n as f64;
        Self::new((0..n).map(|x| (0..n).map(|y| if x == y { p } else { 0.0 }).collect()).collect())
    }

    /// Input marginal times row-stochastic channel `p(y|x)`.
    pub fn from_input_and_channel(px: &[f64], rows: &[Vec<f64>]) -> Result<Self> {
        if px.len() != rows.len() {
            return Err(Error::Dimension("input marginal and channel disagree on |X|".into()));
        }
        Self::new(px.iter().zip(rows).map(|(&p, r)| r.iter().map(|&q| p * q).collect()).collect())
    }

    /// Uniformly random table drawn from the simplex.
    pub fn random(rng: &mut impl Rng, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(invalid("alphabets must be nonempty"));
        }
        let flat = random_simplex(rng, nx * ny);
        let mut table: Vec<Vec<f64>> = flat.chunks(ny).map(|c| c.to_vec()).collect();
        let total: f64 = table.iter().flatten().sum();
        for row in table.iter_mut() {
            for p in row.iter_mut() {
                *p /= total;
            }
        }
        Self::new(table)
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// `(|X|, |Y|)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.table.len(), self.table[0].len())
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x][y]
    }

    pub fn px(&self) -> Vec<f64> {
        self.table.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn py(&self) -> Vec<f64> {
        let ny = self.shape().1;
        (0..ny).map(|y| self.table.iter().map(|r| r[y]).sum()).collect()
    }

    pub fn h_x(&self) -> f64 {
        shannon_bits(self.px())
    }

    pub fn h_y(&self) -> f64 {
        shannon_bits(self.py())
    }

    pub fn h_xy(&self) -> f64 {
        shannon_bits(self.table.iter().flatten().copied())
    }

    pub fn mutual_information(&self) -> f64 {
        (self.h_x() + self.h_y() - self.h_xy()).max(0.0)
    }

    pub fn h_x_given_y(&self) -> f64 {
        (self.h_xy() - self.h_y()).max(0.0)
    }

    /// Rows `p(y|x)`; rows of zero-probability inputs are uniform.
    pub fn y_given_x(&self) -> Vec<Vec<f64>> {
        let ny = self.shape().1;
        self.table
            .iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                if s > 0.0 {
                    r.iter().map(|&p| p / s).collect()
                } else {
                    vec![1.0 / ny as f64; ny]
                }
            })
            .collect()
    }

    /// `p^{⊗n}` with symbols flattened in row-major (first letter most significant).
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("tensor power needs n ≥ 1"));
        }
        let mut out = self.table.clone();
        for _ in 1..n {
            let mut next = Vec::with_capacity(out.len() * self.table.len());
            for r1 in &out {
                for r2 in &self.table {
                    next.push(r1.iter().flat_map(|&a| r2.iter().map(move |&b| a * b)).collect());
                }
            }
            out = next;
        }
        Ok(Self::from_table_renormalized(out))
    }

    /// Drop input and output symbols of zero probability.
    pub fn prune(&self) -> (Self, Pruned) {
        let (px, py) = (self.px(), self.py());
        let mut info = Pruned::default();
        for (x, &p) in px.iter().enumerate() {
            if p > 0.0 {
                info.kept_x.push(x)
            } else {
                info.dropped_x.push(x)
            }
        }
        for (y, &p) in py.iter().enumerate() {
            if p > 0.0 {
                info.kept_y.push(y)
            } else {
                info.dropped_y.push(y)
            }
        }
        let table = info.kept_x.iter().map(|&x| info.kept_y.iter().map(|&y| self.table[x][y]).collect()).collect();
        (Self { table }, info)
    }

    pub(crate) fn from_table_renormalized(mut table: Vec<Vec<f64>>) -> Self {
        let total: f64 = table.iter().flatten().sum();
        for row in table.iter_mut() {
            for p in row.iter_mut() {
                *p /= total;
            }
        }
        Self { table }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(JointDistribution::new(vec![vec![0.5, 0.5], vec![0.1, 0.0]]).is_err());
        assert!(JointDistribution::new(vec![vec![-0.1, 1.1]]).is_err());
        assert!(JointDistribution::new(vec![vec![0.5], vec![0.25, 0.25]]).is_err());
        assert!(JointDistribution::bsc(1.2).is_err());
    }

    #[test]
    fn bsc_information() {
        let p = JointDistribution::bsc(0.1).unwrap();
        let h = shannon_bits([0.1, 0.9]);
        assert!((p.mutual_information() - (1.0 - h)).abs() < 1e-14);
        assert!((p.h_x_given_y() - h).abs() < 1e-14);
    }

    #[test]
    fn tensor_power_adds_information() {
        let p = JointDistribution::new(vec![vec![0.3, 0.1], vec![0.05, 0.55]]).unwrap();
        let p2 = p.tensor_power(2).unwrap();
        assert_eq!(p2.shape(), (4, 4));
        assert!((p2.mutual_information() - 2.0 * p.mutual_information()).abs() < 1e-12);
        assert!((p2.h_x() - 2.0 * p.h_x()).abs() < 1e-12);
    }

    #[test]
    fn prune_drops_empty_symbols() {
        let p = JointDistribution::new(vec![vec![0.5, 0.0, 0.1], vec![0.0, 0.0, 0.0], vec![0.2, 0.0, 0.2]]).unwrap();
        let (q, info) = p.prune();
        assert_eq!(q.shape(), (2, 2));
        assert_eq!(info.dropped_x, vec![1]);
        assert_eq!(info.dropped_y, vec![1]);
        assert!((q.mutual_information() - p.mutual_information()).abs() < 1e-14);
    }

    #[test]
    fn random_tables_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = JointDistribution::random(&mut rng, 3, 4).unwrap();
            assert!(JointDistribution::new(p.table().to_vec()).is_ok());
        }
    }
}
