//! Dense complex linear algebra helpers for small matrices.
//!
//! Everything here operates on `nalgebra` dynamic matrices of `Complex64`.
//! Hermitian inputs are Hermitized before decomposition so round-off
//! asymmetry never leaks into the spectrum.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(M + M†) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    let mut h = m.clone();
    let n = m.nrows();
    for i in 0..n {
        h[(i, i)] = c(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    h
}

/// Largest entry of `|M − M†|`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of the Hermitized matrix, eigenvalues sorted descending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 1 {
        return (vec![m[(0, 0)].re], CMat::from_element(1, 1, ONE));
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Spectrum of the Hermitized matrix, sorted descending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Matrix exponential of an anti-Hermitian matrix through the spectrum of the
/// Hermitian matrix `−iA`.
pub fn expm_antihermitian(a: &CMat) -> CMat {
    let h = a.map(|z| c(z.im, -z.re));
    let (vals, q) = hermitian_eigen(&h);
    let phases = CVec::from_iterator(vals.len(), vals.iter().map(|&l| Complex64::from_polar(1.0, l)));
    let mut scaled = q.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * q.adjoint()
}

/// Unitary `Q` with `Q† U Q` diagonal for a normal `U`.
///
/// The Hermitian matrix `Re U + γ Im U` is diagonalized; blocks of
/// (near-)equal eigenvalues, where eigenvalues of `U` mirrored about the
/// same axis may still be mixed, are split again with a different `γ`.
fn diagonalize_normal(u: &CMat, depth: usize) -> CMat {
    const GAMMAS: [f64; 3] = [0.618_033_988_749_894_9, 1.324_717_957_244_746, 0.906_179_845_938_664];
    const CLUSTER: f64 = 1e-7;
    let g = GAMMAS[depth % GAMMAS.len()];
    let h = (u + u.adjoint()) * c(0.5, 0.0) + (u - u.adjoint()) * c(0.0, -0.5 * g);
    let (vals, mut q) = hermitian_eigen(&h);
    if depth >= 4 {
        return q;
    }
    let d = q.adjoint() * u * &q;
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        while end < vals.len() && vals[end - 1] - vals[end] < CLUSTER {
            end += 1;
        }
        if end - start > 1 {
            let sub = d.view((start, start), (end - start, end - start)).clone_owned();
            let off = (0..sub.nrows())
                .flat_map(|i| (0..sub.ncols()).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| sub[(i, j)].norm())
                .fold(0.0, f64::max);
            if off > 1e-13 {
                let qs = diagonalize_normal(&sub, depth + 1);
                let block = q.columns(start, end - start) * qs;
                q.columns_mut(start, end - start).copy_from(&block);
            }
        }
        start = end;
    }
    q
}

/// Principal logarithm of a unitary matrix; the result is anti-Hermitian.
pub fn logm_unitary(u: &CMat) -> Result<CMat> {
    let n = u.nrows();
    if n != u.ncols() {
        return Err(Error::Dimension(format!("logarithm of a {}x{} matrix", n, u.ncols())));
    }
    let q = diagonalize_normal(u, 0);
    let d = q.adjoint() * u * &q;
    let mut out = q.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= c(0.0, d[(j, j)].arg());
    }
    let log = out * q.adjoint();
    let log = (&log - log.adjoint()) * c(0.5, 0.0);
    let err = max_entry_diff(&expm_antihermitian(&log), u);
    if err > 1e-9 {
        return Err(Error::Numerical(format!("unitary logarithm failed to reproduce its input (error {err:e})")));
    }
    Ok(log)
}

/// Gram–Schmidt orthonormalization of the columns (modified, two passes).
pub fn orthonormalize_columns(m: &CMat) -> Result<CMat> {
    let (rows, cols) = m.shape();
    let mut q = m.clone();
    for j in 0..cols {
        for _ in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dotc(&q.column(j));
                let qk = q.column(k).clone_owned();
                let mut cj = q.column_mut(j);
                cj -= qk * proj;
            }
        }
        let norm = q.column(j).norm();
        if norm < 1e-12 {
            return Err(Error::Numerical(format!("column {j} of a {rows}x{cols} matrix is linearly dependent")));
        }
        let mut cj = q.column_mut(j);
        cj /= c(norm, 0.0);
    }
    Ok(q)
}

/// Extend an isometry (orthonormal columns) to a square unitary by appending
/// orthonormalized standard basis vectors.
pub fn complete_to_unitary(v: &CMat) -> Result<CMat> {
    let (n, d) = v.shape();
    if d > n {
        return Err(Error::Dimension(format!("{n}x{d} matrix cannot have orthonormal columns")));
    }
    let mut cols: Vec<CVec> = (0..d).map(|j| v.column(j).clone_owned()).collect();
    let mut e = 0;
    while cols.len() < n {
        let mut cand = CVec::zeros(n);
        cand[e] = ONE;
        e += 1;
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&cand);
                cand -= q * proj;
            }
        }
        let norm = cand.norm();
        if norm > 1e-6 {
            cols.push(cand / c(norm, 0.0));
        }
        if e > n && cols.len() < n {
            return Err(Error::Numerical("could not complete isometry to a unitary".into()));
        }
    }
    Ok(CMat::from_columns(&cols))
}

/// Largest entry of `|V†V − I|`.
pub fn isometry_defect(v: &CMat) -> f64 {
    let g = v.adjoint() * v;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Largest absolute entrywise difference.
pub fn max_entry_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(n: usize, seed: u64) -> CMat {
        let mut s = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMat::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn eigen_reconstructs_and_sorts() {
        let m = pseudo_random(5, 3);
        let h = hermitize(&m);
        let (vals, q) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let d = CMat::from_diagonal(&CVec::from_iterator(5, vals.iter().map(|&x| c(x, 0.0))));
        assert!(max_entry_diff(&(&q * d * q.adjoint()), &h) < 1e-12);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = CMat::zeros(4, 4);
        assert!(max_entry_diff(&expm_antihermitian(&z), &CMat::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn exp_is_unitary_and_log_inverts_it() {
        for seed in 0..10 {
            let m = pseudo_random(6, seed) * c(3.0, 0.0);
            let a = (&m - m.adjoint()) * c(0.5, 0.0);
            let u = expm_antihermitian(&a);
            assert!(isometry_defect(&u) < 1e-12);
            let l = logm_unitary(&u).unwrap();
            let back = expm_antihermitian(&l);
            assert!(max_entry_diff(&back, &u) < 1e-11, "seed {seed}");
        }
    }

    #[test]
    fn log_handles_permutations_and_repeated_phases() {
        for n in [2usize, 6, 18] {
            let mut p = CMat::from_element(n, n, ZERO);
            for i in 0..n {
                p[((i + 1) % n, i)] = ONE;
            }
            let mut swap = CMat::identity(n, n);
            swap.swap_columns(0, n - 1);
            for u in [p, swap, CMat::identity(n, n)] {
                let l = logm_unitary(&u).unwrap();
                assert!(max_entry_diff(&expm_antihermitian(&l), &u) < 1e-11, "n = {n}");
            }
        }
    }

    #[test]
    fn exp_matches_taylor_series_for_small_generator() {
        let m = pseudo_random(3, 11) * c(0.05, 0.0);
        let a = (&m - m.adjoint()) * c(0.5, 0.0);
        let mut term = CMat::identity(3, 3);
        let mut sum = term.clone();
        for k in 1..25 {
            term = term * &a / c(k as f64, 0.0);
            sum += &term;
        }
        assert!(max_entry_diff(&sum, &expm_antihermitian(&a)) < 1e-14);
    }

    #[test]
    fn completion_yields_unitary() {
        let m = pseudo_random(5, 4);
        let v = orthonormalize_columns(&m.columns(0, 2).clone_owned()).unwrap();
        let u = complete_to_unitary(&v).unwrap();
        assert!(isometry_defect(&u) < 1e-12);
        assert!(max_entry_diff(&u.columns(0, 2).clone_owned(), &v) < 1e-15);
    }
}
