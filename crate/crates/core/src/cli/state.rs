//! Source specifications accepted by `--state`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::JointDistribution;
use crate::error::{invalid, Error, Result};
use crate::quantum::linalg::{c, CMat};
use crate::quantum::random::{random_density, random_pure};
use crate::quantum::{embed_classical_joint, rho3, DensityOperator, QuantumState};

/// Off-diagonal magnitude below which a state counts as classical.
const DIAGONAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateSpec {
    Rho3 { p: f64 },
    Bsc { delta: f64 },
    /// Random two-qubit pure state.
    Pure2q { seed: u64 },
    ClassicalJoint { table: Vec<Vec<f64>> },
    Random { seed: u64, dx: usize, dy: usize, classical: bool },
    File { path: PathBuf },
}

/// On-disk state: row-major matrix of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityOperator) -> Self {
        let m = rho.matrix();
        Self {
            dims: rho.dims().to_vec(),
            labels: rho.labels().to_vec(),
            matrix: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect(),
        }
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        let n = self.matrix.len();
        if self.matrix.iter().any(|r| r.len() != n) {
            return Err(invalid("state matrix must be square"));
        }
        let m = CMat::from_fn(n, n, |i, j| c(self.matrix[i][j][0], self.matrix[i][j][1]));
        DensityOperator::new(m, self.dims.clone(), self.labels.clone())
    }
}

/// A loaded source: always a quantum state on `X`, `Y`; classical sources
/// also keep their joint table.
#[derive(Debug, Clone)]
pub struct LoadedState {
    pub rho: DensityOperator,
    pub joint: Option<JointDistribution>,
    /// Crossover probability when the source is a binary symmetric channel.
    pub bsc_delta: Option<f64>,
}

impl LoadedState {
    /// Joint table, recovered from the diagonal when the state is classical.
    pub fn classical(&self) -> Result<JointDistribution> {
        if let Some(j) = &self.joint {
            return Ok(j.clone());
        }
        let m = self.rho.matrix();
        let off = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm())
            .fold(0.0, f64::max);
        if off > DIAGONAL_TOL {
            return Err(invalid(format!("state is not diagonal (largest off-diagonal entry {off:e}); use --quantum")));
        }
        let (dx, dy) = (self.rho.dims()[0], self.rho.dims()[1]);
        JointDistribution::new((0..dx).map(|x| (0..dy).map(|y| m[(x * dy + y, x * dy + y)].re.max(0.0)).collect()).collect())
    }
}

fn kv(args: &str) -> Result<Vec<(String, String)>> {
    args.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| invalid(format!("expected key=value, got `{p}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| invalid(format!("cannot parse {key} = `{v}`")))
}

fn only(pairs: &[(String, String)], allowed: &[&str]) -> Result<()> {
    match pairs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(invalid(format!("unknown state parameter `{k}`"))),
        None => Ok(()),
    }
}

fn get<T: FromStr>(pairs: &[(String, String)], key: &str, default: Option<T>) -> Result<T> {
    match pairs.iter().rev().find(|(k, _)| k == key) {
        Some((_, v)) => num(key, v),
        None => default.ok_or_else(|| invalid(format!("missing state parameter `{key}`"))),
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    /// `rho3:p=0.4`, `bsc:delta=0.1`, `pure2q:seed=3`,
    /// `classical-joint:0.4,0.1;0.1,0.4`, `random:seed=1,dx=2,dy=2[,classical=true]`,
    /// or a path to a JSON state file (optionally prefixed by `file:`).
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        match name {
            "rho3" => {
                let kv = kv(rest)?;
                only(&kv, &["p"])?;
                Ok(StateSpec::Rho3 { p: get(&kv, "p", None)? })
            }
            "bsc" => {
                let kv = kv(rest)?;
                only(&kv, &["delta"])?;
                Ok(StateSpec::Bsc { delta: get(&kv, "delta", None)? })
            }
            "pure2q" => {
                let kv = kv(rest)?;
                only(&kv, &["seed"])?;
                Ok(StateSpec::Pure2q { seed: get(&kv, "seed", Some(0))? })
            }
            "classical-joint" => {
                let table = rest
                    .split(';')
                    .map(|row| row.split(',').map(|v| num::<f64>("table entry", v.trim())).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Ok(StateSpec::ClassicalJoint { table })
            }
            "random" => {
                let kv = kv(rest)?;
                only(&kv, &["seed", "dx", "dy", "classical"])?;
                Ok(StateSpec::Random {
                    seed: get(&kv, "seed", Some(0))?,
                    dx: get(&kv, "dx", Some(2))?,
                    dy: get(&kv, "dy", Some(2))?,
                    classical: get(&kv, "classical", Some(false))?,
                })
            }
            "file" => Ok(StateSpec::File { path: PathBuf::from(rest) }),
            _ if !s.is_empty() && Path::new(s).extension().is_some_and(|e| e == "json") => {
                Ok(StateSpec::File { path: PathBuf::from(s) })
            }
            _ => Err(invalid(format!("unknown state `{s}`"))),
        }
    }
}

fn loaded(rho: DensityOperator, joint: Option<JointDistribution>) -> LoadedState {
    LoadedState { rho, joint, bsc_delta: None }
}

impl StateSpec {
    pub fn load(&self) -> Result<LoadedState> {
        match self {
            StateSpec::Rho3 { p } => Ok(loaded(rho3(*p)?, None)),
            StateSpec::Bsc { delta } => {
                let j = JointDistribution::bsc(*delta)?;
                Ok(LoadedState { rho: embed_classical_joint(&j)?, joint: Some(j), bsc_delta: Some(*delta) })
            }
            StateSpec::Pure2q { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(loaded(DensityOperator::from_pure(&random_pure(&mut rng, &[2, 2], &["X", "Y"])), None))
            }
            StateSpec::ClassicalJoint { table } => {
                let j = JointDistribution::new(table.clone())?;
                Ok(loaded(embed_classical_joint(&j)?, Some(j)))
            }
            StateSpec::Random { seed, dx, dy, classical } => {
                if !(1..=8).contains(dx) || !(1..=8).contains(dy) {
                    return Err(invalid("random states need 1 ≤ dx, dy ≤ 8"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                if *classical {
                    let j = JointDistribution::random(&mut rng, *dx, *dy)?;
                    return Ok(loaded(embed_classical_joint(&j)?, Some(j)));
                }
                let m = random_density(&mut rng, dx * dy, "XY").matrix().clone();
                Ok(loaded(DensityOperator::with_labels(m, &[*dx, *dy], &["X", "Y"])?, None))
            }
            StateSpec::File { path } => {
                let file: StateFile = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
                let rho = file.to_density()?;
                if rho.dims().len() != 2 {
                    return Err(invalid("state file must describe a bipartite state"));
                }
                let rho = rho.relabel(&["X", "Y"])?;
                Ok(loaded(rho, None))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_named_states() {
        assert_eq!("rho3:p=0.4".parse::<StateSpec>().unwrap(), StateSpec::Rho3 { p: 0.4 });
        assert_eq!("bsc:delta=0.1".parse::<StateSpec>().unwrap(), StateSpec::Bsc { delta: 0.1 });
        assert_eq!("pure2q".parse::<StateSpec>().unwrap(), StateSpec::Pure2q { seed: 0 });
        assert_eq!(
            "classical-joint:0.4,0.1;0.1,0.4".parse::<StateSpec>().unwrap(),
            StateSpec::ClassicalJoint { table: vec![vec![0.4, 0.1], vec![0.1, 0.4]] }
        );
        assert_eq!(
            "random:seed=3,dx=3".parse::<StateSpec>().unwrap(),
            StateSpec::Random { seed: 3, dx: 3, dy: 2, classical: false }
        );
    }

    #[test]
    fn rejects_bad_specs() {
        for s in ["rho3", "rho3:q=1", "bsc:delta=x", "nonsense", "classical-joint:0.5,a"] {
            assert!(matches!(s.parse::<StateSpec>(), Err(Error::Validation(_))), "{s}");
        }
        assert!(matches!(StateSpec::Rho3 { p: 1.5 }.load(), Err(Error::Validation(_))));
    }

    #[test]
    fn file_round_trip_is_exact() {
        let spec = StateSpec::Random { seed: 5, dx: 2, dy: 3, classical: false };
        let rho = spec.load().unwrap().rho;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        std::fs::write(&path, serde_json::to_string(&StateFile::from_density(&rho)).unwrap()).unwrap();
        let back = StateSpec::File { path }.load().unwrap().rho;
        assert_eq!(back.matrix(), rho.matrix());
        assert_eq!(back.dims(), rho.dims());
    }

    #[test]
    fn classical_view_requires_diagonal_state() {
        let bsc = StateSpec::Bsc { delta: 0.2 }.load().unwrap();
        assert_eq!(bsc.classical().unwrap(), JointDistribution::bsc(0.2).unwrap());
        let diag = loaded(bsc.rho.clone(), None);
        assert_eq!(diag.classical().unwrap(), JointDistribution::bsc(0.2).unwrap());
        let q = StateSpec::Rho3 { p: 0.4 }.load().unwrap();
        assert!(matches!(q.classical(), Err(Error::Validation(_))));
    }
}
