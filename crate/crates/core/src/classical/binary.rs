//! Binary entropy, its inverse, binary convolution and the closed-form IB
//! curve of a uniform bit sent through a binary symmetric channel.

use crate::error::{invalid, Result};

/// `h(x) = −x log₂ x − (1−x) log₂(1−x)`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Inverse of `h` restricted to `[0, ½]`, by bisection.
pub fn binary_entropy_inverse(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(invalid(format!("binary entropy value {y} outside [0, 1]")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if binary_entropy(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (el, eh) = ((binary_entropy(lo) - y).abs(), (binary_entropy(hi) - y).abs());
    Ok(if el <= eh { lo } else { hi })
}

/// `a ⋆ b = a(1−b) + b(1−a)`.
pub fn binary_convolution(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || v.is_nan() {
        return Err(invalid(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// `F(a) = h(h⁻¹(a) ⋆ δ)`: least `H(Y|W)` compatible with `H(X|W) = a`.
pub fn bsc_ib_oracle(a: f64, delta: f64) -> Result<f64> {
    check_unit("a", a)?;
    check_unit("delta", delta)?;
    Ok(binary_entropy(binary_convolution(binary_entropy_inverse(a)?, delta)))
}

/// `I_Y(R) = H(Y) − F(H(X) − R)` for the uniform-input BSC (`H(X) = H(Y) = 1`).
pub fn bsc_ib_information(rate: f64, delta: f64) -> Result<f64> {
    check_unit("rate", rate)?;
    Ok(1.0 - bsc_ib_oracle(1.0 - rate, delta)?)
}

/// `R(I_Y)`, the inverse of [`bsc_ib_information`] on `[0, 1 − h(δ)]`.
pub fn bsc_ib_rate(info: f64, delta: f64) -> Result<f64> {
    check_unit("delta", delta)?;
    let d = delta.min(1.0 - delta);
    let cap = 1.0 - binary_entropy(d);
    if !(0.0..=cap + 1e-12).contains(&info) {
        return Err(crate::error::Error::Infeasible(format!(
            "relevant information {info} above I(X;Y) = {cap}"
        )));
    }
    if info <= 0.0 {
        return Ok(0.0);
    }
    let u = binary_entropy_inverse((1.0 - info).clamp(0.0, 1.0))?;
    let q = ((u - d) / (1.0 - 2.0 * d)).clamp(0.0, 0.5);
    Ok(1.0 - binary_entropy(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_endpoints_and_round_trip() {
        assert_eq!(binary_entropy_inverse(1.0).unwrap(), 0.5);
        assert_eq!(binary_entropy_inverse(0.0).unwrap(), 0.0);
        assert!((binary_entropy_inverse(binary_entropy(0.2)).unwrap() - 0.2).abs() < 1e-10);
        assert!(binary_entropy_inverse(1.1).is_err());
        assert!(binary_entropy_inverse(-0.1).is_err());
        for k in 1..100 {
            let y = k as f64 / 100.0;
            assert!((binary_entropy(binary_entropy_inverse(y).unwrap()) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_endpoints() {
        for &d in &[0.0, 0.1, 0.3, 0.9] {
            assert!((bsc_ib_oracle(1.0, d).unwrap() - 1.0).abs() < 1e-15);
            assert!((bsc_ib_oracle(0.0, d).unwrap() - binary_entropy(d)).abs() < 1e-15);
        }
    }

    #[test]
    fn oracle_interior_value() {
        // 0.2 ⋆ 0.1 = 0.26.
        let f = bsc_ib_oracle(binary_entropy(0.2), 0.1).unwrap();
        assert!((f - binary_entropy(0.26)).abs() < 1e-10);
        assert!((f - 0.8267).abs() < 1e-4);
    }

    #[test]
    fn rate_inverts_information() {
        for &d in &[0.1, 0.9, 0.25] {
            for k in 0..=20 {
                let r = k as f64 / 20.0;
                let i = bsc_ib_information(r, d).unwrap();
                assert!((bsc_ib_rate(i, d).unwrap() - r).abs() < 1e-8, "δ={d} R={r}");
            }
        }
    }

    #[test]
    fn rate_rejects_targets_above_capacity() {
        assert!(bsc_ib_rate(0.6, 0.1).is_err());
        assert!(bsc_ib_oracle(0.5, 1.5).is_err());
    }
}
