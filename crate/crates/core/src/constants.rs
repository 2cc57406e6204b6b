//! Dimensional constants: sphere measures, the round-sphere total curvature
//! `Λ₁ = (n-1)!·|Sⁿ|` and the normalization `γₙ = Λ₁/2` of the logarithmic kernel.
//!
//! Every value here is built from integer and half-integer Gamma values, which are
//! evaluated by exact recursion, so the constants carry only rounding error.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Γ(m/2)` for a positive integer `m`, by the recursion `Γ(x+1) = xΓ(x)` from
/// `Γ(1/2) = √π` and `Γ(1) = 1`.
pub fn gamma_half_integer(m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("Gamma has a pole at 0".into()));
    }
    let (mut value, mut x) = if m % 2 == 0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    let target = m as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    Ok(value)
}

/// `(k)!` as a float; exact for every `k` this crate uses (k ≤ 20).
pub fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Measure of the unit sphere `Sᵏ ⊂ ℝᵏ⁺¹`: `2π^{(k+1)/2} / Γ((k+1)/2)`.
///
/// For even `k` both numerator and denominator carry a factor `√π`; it is cancelled
/// symbolically so the result is a rational multiple of `π^{k/2}`.
pub fn sphere_area(k: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain(format!("sphere_area requires k >= 1, got {k}")));
    }
    if k % 2 == 1 {
        // (k+1)/2 is an integer.
        let half = (k + 1) / 2;
        Ok(2.0 * PI.powi(half as i32) / factorial(half - 1))
    } else {
        // Γ((k+1)/2) = √π · Π_{i=1}^{k/2} (2i-1)/2
        let half = k / 2;
        let denom = (1..=half).fold(1.0, |acc, i| acc * (2 * i - 1) as f64 / 2.0);
        Ok(2.0 * PI.powi(half as i32) / denom)
    }
}

/// `Λ₁ = (n-1)!·|Sⁿ|`, the total Q-curvature of the round sphere.
pub fn lambda1(n: u32) -> Result<f64> {
    check_dimension(n)?;
    Ok(factorial(n - 1) * sphere_area(n)?)
}

/// `γₙ = (n-1)!/2·|Sⁿ|`.
pub fn gamma_n(n: u32) -> Result<f64> {
    Ok(lambda1(n)? / 2.0)
}

fn check_dimension(n: u32) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension must be at least 3, got {n}")));
    }
    Ok(())
}

/// All constants needed for one dimension, computed once and shared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalConstants {
    pub n: u32,
    /// `|Sⁿ|`
    pub sphere_area_n: f64,
    /// `ω_{n-1} = |S^{n-1}|`
    pub omega_nm1: f64,
    pub lambda1: f64,
    pub gamma_n: f64,
    pub factorial_nm1: f64,
}

impl DimensionalConstants {
    pub fn new(n: u32) -> Result<Self> {
        check_dimension(n)?;
        let sphere_area_n = sphere_area(n)?;
        let factorial_nm1 = factorial(n - 1);
        let lambda1 = factorial_nm1 * sphere_area_n;
        Ok(Self {
            n,
            sphere_area_n,
            omega_nm1: sphere_area(n - 1)?,
            lambda1,
            gamma_n: lambda1 / 2.0,
            factorial_nm1,
        })
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn sphere_area_closed_forms() {
        assert!(rel(sphere_area(1).unwrap(), 2.0 * PI) < 1e-15);
        assert!(rel(sphere_area(2).unwrap(), 4.0 * PI) < 1e-15);
        assert!(rel(sphere_area(3).unwrap(), 2.0 * PI * PI) < 1e-15);
        assert!(rel(sphere_area(5).unwrap(), PI.powi(3)) < 1e-15);
        assert!(rel(sphere_area(6).unwrap(), 16.0 * PI.powi(3) / 15.0) < 1e-15);
        assert!(sphere_area(0).is_err());
    }

    #[test]
    fn lambda1_examples() {
        assert!(rel(lambda1(3).unwrap(), 4.0 * PI * PI) < 1e-15);
        assert!(rel(lambda1(5).unwrap(), 24.0 * PI.powi(3)) < 1e-15);
        assert!(rel(lambda1(6).unwrap(), 128.0 * PI.powi(3)) < 1e-15);
        assert!((lambda1(3).unwrap() - 39.4784).abs() < 1e-4);
        assert!((lambda1(5).unwrap() - 744.1506).abs() < 1e-4);
        assert!((lambda1(6).unwrap() - 3968.804).abs() < 1e-3);
        assert!(matches!(lambda1(2), Err(Error::Domain(_))));
    }

    #[test]
    fn half_integer_gamma() {
        assert_eq!(gamma_half_integer(2).unwrap(), 1.0);
        assert_eq!(gamma_half_integer(8).unwrap(), 6.0);
        assert!(rel(gamma_half_integer(1).unwrap(), PI.sqrt()) < 1e-16);
        assert!(rel(gamma_half_integer(7).unwrap(), 15.0 / 8.0 * PI.sqrt()) < 1e-15);
        assert!(gamma_half_integer(0).is_err());
    }

    #[test]
    fn gamma_recurrence_consistency() {
        for n in 3..=12u32 {
            let ratio = sphere_area(n).unwrap() / sphere_area(n - 1).unwrap();
            let expected = PI.sqrt() * gamma_half_integer(n).unwrap()
                / gamma_half_integer(n + 1).unwrap();
            assert!(rel(ratio, expected) < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn stored_constants_are_consistent() {
        for n in 3..=12u32 {
            let c = DimensionalConstants::new(n).unwrap();
            assert_eq!(c.lambda1, c.factorial_nm1 * c.sphere_area_n);
            assert_eq!(c.gamma_n, c.lambda1 / 2.0);
            assert!(rel(c.lambda1, 2.0 * c.gamma_n) <= 1e-15);
            assert_eq!(c.lambda1, lambda1(n).unwrap());
        }
    }
}
