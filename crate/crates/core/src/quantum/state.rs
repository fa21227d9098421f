//! Density operators and pure states on labelled tensor-product spaces.

use serde::{Deserialize, Serialize};

use super::linalg::{c, hermitian_eigen, hermitian_eigenvalues, hermiticity_defect, CMat, CVec, ZERO};
use crate::error::{invalid, Error, Result};

/// Tolerance for the Hermitian, trace and positivity invariants.
pub const STATE_TOL: f64 = 1e-10;
/// Tolerance on the norm of a pure state.
pub const NORM_TOL: f64 = 1e-12;
/// Largest supported product dimension.
pub const MAX_DIM: usize = 256;

fn check_layout(total: usize, dims: &[usize], labels: &[String]) -> Result<()> {
    if dims.is_empty() {
        return Err(invalid("at least one subsystem is required"));
    }
    if dims.len() != labels.len() {
        return Err(invalid(format!("{} dimensions but {} labels", dims.len(), labels.len())));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(invalid("subsystem dimensions must be positive"));
    }
    let product: usize = dims.iter().product();
    if product != total {
        return Err(Error::Dimension(format!("dims {dims:?} have product {product}, matrix side is {total}")));
    }
    if total > MAX_DIM {
        return Err(Error::ScaleLimit(format!("product dimension {total} exceeds {MAX_DIM}")));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(invalid(format!("duplicate subsystem label `{l}`")));
        }
    }
    Ok(())
}

/// Strides of a row-major multi-index.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat indices of the full space arranged as `table[kept][traced]`.
fn split_index_table(dims: &[usize], keep: &[usize]) -> (usize, usize, Vec<usize>) {
    let st = strides(dims);
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dt: usize = rest.iter().map(|&k| dims[k]).product();
    let mut table = vec![0usize; dk * dt];
    let offsets = |group: &[usize], total: usize| -> Vec<usize> {
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; group.len()];
        for _ in 0..total {
            out.push(group.iter().zip(&idx).map(|(&k, &i)| i * st[k]).sum());
            for p in (0..group.len()).rev() {
                idx[p] += 1;
                if idx[p] < dims[group[p]] {
                    break;
                }
                idx[p] = 0;
            }
        }
        out
    };
    let ko = offsets(keep, dk);
    let to = offsets(&rest, dt);
    for (i, &a) in ko.iter().enumerate() {
        for (t, &b) in to.iter().enumerate() {
            table[i * dt + t] = a + b;
        }
    }
    (dk, dt, table)
}

/// Common view of labelled multipartite states.
pub trait QuantumState {
    fn dims(&self) -> &[usize];
    fn labels(&self) -> &[String];
    /// Reduced density operator on the named subsystems (kept in original order).
    fn reduce(&self, keep: &[&str]) -> Result<DensityOperator>;
    fn is_pure(&self) -> bool;

    fn index_of(&self, label: &str) -> Result<usize> {
        self.labels()
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownSubsystem(label.to_string()))
    }

    fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims()[self.index_of(label)?])
    }

    /// Resolve names to sorted positions, rejecting unknown or repeated names.
    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(names.len());
        for n in names {
            let p = self.index_of(n)?;
            if pos.contains(&p) {
                return Err(invalid(format!("subsystem `{n}` listed twice")));
            }
            pos.push(p);
        }
        pos.sort_unstable();
        Ok(pos)
    }
}

/// A complex positive semidefinite unit-trace matrix on labelled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl DensityOperator {
    /// Validating constructor.
    pub fn new(matrix: CMat, dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(invalid(format!("matrix is not square ({}x{})", matrix.nrows(), matrix.ncols())));
        }
        check_layout(matrix.nrows(), &dims, &labels)?;
        let herm = hermiticity_defect(&matrix);
        if herm > STATE_TOL {
            return Err(invalid(format!("Hermitian invariant violated: max |M - M†| = {herm:e}")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(invalid(format!("unit-trace invariant violated: trace = {tr}")));
        }
        let min = hermitian_eigenvalues(&matrix).last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(invalid(format!("PSD invariant violated: min eigenvalue {min:e}")));
        }
        Ok(Self { matrix, dims, labels })
    }

    /// Trusted constructor for operators produced internally by exact maps.
    pub(crate) fn from_parts_unchecked(matrix: CMat, dims: Vec<usize>, labels: Vec<String>) -> Self {
        Self { matrix, dims, labels }
    }

    /// Convenience constructor with string-slice labels.
    pub fn with_labels(matrix: CMat, dims: &[usize], labels: &[&str]) -> Result<Self> {
        Self::new(matrix, dims.to_vec(), labels.iter().map(|s| s.to_string()).collect())
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64], label: &str) -> Result<Self> {
        let m = CMat::from_diagonal(&CVec::from_iterator(probs.len(), probs.iter().map(|&p| c(p, 0.0))));
        Self::with_labels(m, &[probs.len()], &[label])
    }

    pub fn maximally_mixed(dim: usize, label: &str) -> Result<Self> {
        Self::diagonal(&vec![1.0 / dim as f64; dim], label)
    }

    /// Projector onto a pure state.
    pub fn from_pure(psi: &PureState) -> Self {
        let v = &psi.vector;
        Self { matrix: v * v.adjoint(), dims: psi.dims.clone(), labels: psi.labels.clone() }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Return a copy with relabelled subsystems.
    pub fn relabel(&self, labels: &[&str]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        check_layout(self.dim(), &self.dims, &labels)?;
        Ok(Self { matrix: self.matrix.clone(), dims: self.dims.clone(), labels })
    }

    /// Eigenvalues (descending) of the Hermitized matrix.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Reorder subsystems to the given label order.
    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        let perm = permutation_for(self, order)?;
        let new_dims: Vec<usize> = perm.iter().map(|&k| self.dims[k]).collect();
        let map = permuted_index_map(&self.dims, &perm);
        let n = self.dim();
        let mut m = CMat::from_element(n, n, ZERO);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.matrix[(map[i], map[j])];
            }
        }
        Ok(Self { matrix: m, dims: new_dims, labels: order.iter().map(|s| s.to_string()).collect() })
    }
}

impl QuantumState for DensityOperator {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn is_pure(&self) -> bool {
        false
    }

    fn reduce(&self, keep: &[&str]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(invalid("partial trace needs at least one kept subsystem"));
        }
        let pos = self.positions(keep)?;
        let (dk, dt, table) = split_index_table(&self.dims, &pos);
        let mut out = CMat::from_element(dk, dk, ZERO);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = ZERO;
                for t in 0..dt {
                    acc += self.matrix[(table[i * dt + t], table[j * dt + t])];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityOperator {
            matrix: out,
            dims: pos.iter().map(|&k| self.dims[k]).collect(),
            labels: pos.iter().map(|&k| self.labels[k].clone()).collect(),
        })
    }
}

/// A normalized state vector on labelled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: CVec,
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl PureState {
    pub fn new(vector: CVec, dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        check_layout(vector.len(), &dims, &labels)?;
        let norm = vector.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("unit-norm invariant violated: norm = {norm}")));
        }
        Ok(Self { vector, dims, labels })
    }

    pub fn with_labels(vector: CVec, dims: &[usize], labels: &[&str]) -> Result<Self> {
        Self::new(vector, dims.to_vec(), labels.iter().map(|s| s.to_string()).collect())
    }

    /// Normalize an arbitrary nonzero vector first.
    pub fn normalized(vector: CVec, dims: &[usize], labels: &[&str]) -> Result<Self> {
        let norm = vector.norm();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Self::with_labels(vector / c(norm, 0.0), dims, labels)
    }

    pub(crate) fn from_parts_unchecked(vector: CVec, dims: Vec<usize>, labels: Vec<String>) -> Self {
        Self { vector, dims, labels }
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn relabel(&self, labels: &[&str]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        check_layout(self.dim(), &self.dims, &labels)?;
        Ok(Self { vector: self.vector.clone(), dims: self.dims.clone(), labels })
    }

    /// Reorder subsystems to the given label order.
    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        let perm = permutation_for(self, order)?;
        let map = permuted_index_map(&self.dims, &perm);
        let v = CVec::from_iterator(map.len(), map.iter().map(|&k| self.vector[k]));
        Ok(Self {
            vector: v,
            dims: perm.iter().map(|&k| self.dims[k]).collect(),
            labels: order.iter().map(|s| s.to_string()).collect(),
        })
    }

    /// Merge consecutive groups of subsystems into single factors.
    ///
    /// `groups` lists `(new_label, members)`; after permuting into the
    /// concatenated member order the vector is unchanged, only the layout is.
    pub fn regroup(&self, groups: &[(&str, &[&str])]) -> Result<Self> {
        let order: Vec<&str> = groups.iter().flat_map(|(_, m)| m.iter().copied()).collect();
        let p = self.permute(&order)?;
        let mut dims = Vec::with_capacity(groups.len());
        for (_, members) in groups {
            let mut d = 1;
            for m in members.iter() {
                d *= p.dim_of(m)?;
            }
            dims.push(d);
        }
        let labels = groups.iter().map(|(l, _)| l.to_string()).collect();
        let out = Self { vector: p.vector, dims, labels };
        check_layout(out.dim(), &out.dims, &out.labels)?;
        Ok(out)
    }

    /// Coefficient matrix with rows indexed by the named subsystems and
    /// columns by the rest.
    pub(crate) fn split_matrix(&self, rows: &[usize]) -> CMat {
        let (dk, dt, table) = split_index_table(&self.dims, rows);
        CMat::from_fn(dk, dt, |i, t| self.vector[table[i * dt + t]])
    }
}

impl QuantumState for PureState {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn is_pure(&self) -> bool {
        true
    }

    fn reduce(&self, keep: &[&str]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(invalid("partial trace needs at least one kept subsystem"));
        }
        let pos = self.positions(keep)?;
        let m = self.split_matrix(&pos);
        Ok(DensityOperator {
            matrix: &m * m.adjoint(),
            dims: pos.iter().map(|&k| self.dims[k]).collect(),
            labels: pos.iter().map(|&k| self.labels[k].clone()).collect(),
        })
    }
}

fn permutation_for<S: QuantumState>(s: &S, order: &[&str]) -> Result<Vec<usize>> {
    if order.len() != s.labels().len() {
        return Err(invalid(format!("permutation lists {} of {} subsystems", order.len(), s.labels().len())));
    }
    let mut perm = Vec::with_capacity(order.len());
    for name in order {
        let k = s.index_of(name)?;
        if perm.contains(&k) {
            return Err(invalid(format!("subsystem `{name}` listed twice")));
        }
        perm.push(k);
    }
    Ok(perm)
}

/// `map[new_flat] = old_flat` for subsystems reordered as `perm` (new k ← old perm[k]).
fn permuted_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let old_st = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..total {
        map.push(idx.iter().zip(perm).map(|(&i, &k)| i * old_st[k]).sum());
        for p in (0..idx.len()).rev() {
            idx[p] += 1;
            if idx[p] < new_dims[p] {
                break;
            }
            idx[p] = 0;
        }
    }
    map
}

/// Reduced state on the named subsystems, in original order.
pub fn partial_trace<S: QuantumState>(state: &S, keep: &[&str]) -> Result<DensityOperator> {
    state.reduce(keep)
}

/// How `tensor_product` treats labels present in both factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LabelPolicy {
    /// Reject colliding labels.
    #[default]
    Strict,
    /// Append `_1` to every label of the left factor and `_2` to every label
    /// of the right factor when any label collides.
    Suffix,
}

fn merged_labels(a: &[String], b: &[String], policy: LabelPolicy) -> Result<Vec<String>> {
    let collision = a.iter().find(|l| b.contains(l));
    match (collision, policy) {
        (None, _) => Ok(a.iter().chain(b).cloned().collect()),
        (Some(l), LabelPolicy::Strict) => Err(Error::LabelCollision(l.clone())),
        (Some(_), LabelPolicy::Suffix) => Ok(a
            .iter()
            .map(|l| format!("{l}_1"))
            .chain(b.iter().map(|l| format!("{l}_2")))
            .collect()),
    }
}

/// Kronecker composite of two density operators.
pub fn tensor_product(a: &DensityOperator, b: &DensityOperator, policy: LabelPolicy) -> Result<DensityOperator> {
    let labels = merged_labels(&a.labels, &b.labels, policy)?;
    let dims: Vec<usize> = a.dims.iter().chain(&b.dims).copied().collect();
    check_layout(a.dim() * b.dim(), &dims, &labels)?;
    Ok(DensityOperator { matrix: a.matrix.kronecker(&b.matrix), dims, labels })
}

/// Tensor product of pure states.
pub fn tensor_product_pure(a: &PureState, b: &PureState, policy: LabelPolicy) -> Result<PureState> {
    let labels = merged_labels(&a.labels, &b.labels, policy)?;
    let dims: Vec<usize> = a.dims.iter().chain(&b.dims).copied().collect();
    check_layout(a.dim() * b.dim(), &dims, &labels)?;
    Ok(PureState { vector: a.vector.kronecker(&b.vector), dims, labels })
}

/// Eigenvalues at or below this are dropped from a purification.
const PURIFY_RANK_TOL: f64 = 1e-14;

/// Canonical purification `Σ_i √λ_i |i⟩_ref |e_i⟩`, reference first.
///
/// Eigenvalues are sorted descending and only the numerically nonzero ones
/// are kept, so the reference dimension equals the rank. Each eigenvector is
/// rotated so its first nonzero component is real and positive.
pub fn purify(rho: &DensityOperator, ref_label: &str) -> Result<PureState> {
    if rho.labels.iter().any(|l| l == ref_label) {
        return Err(Error::LabelCollision(ref_label.to_string()));
    }
    let (vals, vecs) = hermitian_eigen(&rho.matrix);
    let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > PURIFY_RANK_TOL).collect();
    if kept.is_empty() {
        return Err(Error::Numerical("density operator has no positive eigenvalue".into()));
    }
    let n = rho.dim();
    let r = kept.len();
    let mass: f64 = kept.iter().map(|&k| vals[k]).sum();
    let mut v = CVec::from_element(r * n, ZERO);
    for (i, &k) in kept.iter().enumerate() {
        let mut e = vecs.column(k).clone_owned();
        if let Some(first) = e.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = first.conj() / first.norm();
            e *= phase;
        }
        let amp = (vals[k] / mass).sqrt();
        for j in 0..n {
            v[i * n + j] = e[j] * amp;
        }
    }
    let mut dims = vec![r];
    dims.extend_from_slice(&rho.dims);
    let mut labels = vec![ref_label.to_string()];
    labels.extend(rho.labels.iter().cloned());
    let norm = v.norm();
    PureState::new(v / c(norm, 0.0), dims, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::linalg::max_entry_diff;
    use crate::quantum::random::random_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> PureState {
        let s = 0.5f64.sqrt();
        PureState::with_labels(CVec::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]), &[2, 2], &["A", "B"]).unwrap()
    }

    #[test]
    fn validation_names_violated_invariant() {
        let m = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.4, 0.0)]);
        let e = DensityOperator::with_labels(m, &[2], &["X"]).unwrap_err().to_string();
        assert!(e.contains("Hermitian"), "{e}");
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(0.6, 0.0), c(0.6, 0.0)]));
        let e = DensityOperator::with_labels(m, &[2], &["X"]).unwrap_err().to_string();
        assert!(e.contains("unit-trace"), "{e}");
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.2, 0.0), c(-0.2, 0.0)]));
        let e = DensityOperator::with_labels(m, &[2], &["X"]).unwrap_err().to_string();
        assert!(e.contains("PSD"), "{e}");
        let m = CMat::zeros(2, 3);
        assert!(DensityOperator::with_labels(m, &[2], &["X"]).is_err());
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let r = partial_trace(&bell(), &["A"]).unwrap();
        let want = DensityOperator::maximally_mixed(2, "A").unwrap();
        assert!(max_entry_diff(r.matrix(), want.matrix()) < 1e-15);
        let rho = DensityOperator::from_pure(&bell());
        let r2 = partial_trace(&rho, &["B"]).unwrap();
        assert!(max_entry_diff(r2.matrix(), want.matrix()) < 1e-15);
    }

    #[test]
    fn unknown_subsystem_is_rejected() {
        assert!(matches!(partial_trace(&bell(), &["Z"]), Err(Error::UnknownSubsystem(_))));
        assert!(partial_trace(&bell(), &[]).is_err());
    }

    #[test]
    fn product_partial_trace_recovers_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_density(&mut rng, 3, "A");
        let b = random_density(&mut rng, 2, "B");
        let ab = tensor_product(&a, &b, LabelPolicy::Strict).unwrap();
        assert_eq!(ab.dims(), &[3, 2]);
        assert!(max_entry_diff(partial_trace(&ab, &["A"]).unwrap().matrix(), a.matrix()) < 1e-12);
        assert!(max_entry_diff(partial_trace(&ab, &["B"]).unwrap().matrix(), b.matrix()) < 1e-12);
    }

    #[test]
    fn label_collision_policy() {
        let a = DensityOperator::maximally_mixed(2, "X").unwrap();
        assert!(matches!(tensor_product(&a, &a, LabelPolicy::Strict), Err(Error::LabelCollision(_))));
        let aa = tensor_product(&a, &a, LabelPolicy::Suffix).unwrap();
        assert_eq!(aa.labels(), &["X_1".to_string(), "X_2".to_string()]);
    }

    #[test]
    fn trivial_factor_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_density(&mut rng, 3, "A");
        let one = DensityOperator::diagonal(&[1.0], "I").unwrap();
        let a1 = tensor_product(&a, &one, LabelPolicy::Strict).unwrap();
        assert!(max_entry_diff(a1.matrix(), a.matrix()) < 1e-15);
    }

    #[test]
    fn permute_then_trace_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(&mut rng, 12, "S");
        let rho = DensityOperator::with_labels(rho.matrix().clone(), &[2, 3, 2], &["A", "B", "C"]).unwrap();
        let p = rho.permute(&["C", "A", "B"]).unwrap();
        for keep in [&["A"][..], &["B"], &["C"], &["A", "C"]] {
            let x = partial_trace(&rho, keep).unwrap();
            let y = partial_trace(&p, keep).unwrap().permute(keep).unwrap();
            assert_eq!(x.labels(), y.labels());
            assert!(max_entry_diff(x.matrix(), y.matrix()) < 1e-14);
        }
    }

    #[test]
    fn purify_maximally_mixed_is_maximally_entangled() {
        let rho = DensityOperator::maximally_mixed(2, "X").unwrap();
        let psi = purify(&rho, "R").unwrap();
        assert_eq!(psi.dims(), &[2, 2]);
        let r = partial_trace(&psi, &["R"]).unwrap();
        assert!(max_entry_diff(r.matrix(), rho.relabel(&["R"]).unwrap().matrix()) < 1e-14);
    }

    #[test]
    fn purify_pure_state_uses_trivial_reference() {
        let phi = PureState::normalized(CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]), &[2], &["X"]).unwrap();
        let psi = purify(&DensityOperator::from_pure(&phi), "R").unwrap();
        assert_eq!(psi.dims(), &[1, 2]);
        assert!((psi.vector()[0] - c(0.6, 0.0)).norm() < 1e-12);
        assert!((psi.vector()[1] - c(0.0, 0.8)).norm() < 1e-12);
    }

    #[test]
    fn regroup_merges_factors() {
        let psi = tensor_product_pure(&bell(), &bell(), LabelPolicy::Suffix).unwrap();
        let g = psi.regroup(&[("A", &["A_1", "A_2"]), ("B", &["B_1", "B_2"])]).unwrap();
        assert_eq!(g.dims(), &[4, 4]);
        let ra = partial_trace(&g, &["A"]).unwrap();
        assert!(max_entry_diff(ra.matrix(), &(CMat::identity(4, 4) * c(0.25, 0.0))) < 1e-15);
    }
}
