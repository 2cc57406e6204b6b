use serde::{Deserialize, Serialize};

use crate::constants::DimensionalConstants;
use crate::error::{Error, Result};
use crate::kernel::KernelOperator;
use crate::radial::{integrate_radial, TailModel};

/// The standard bubble `u(r) = log(2λ/(1+λ²r²))` centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalSolution {
    pub lambda: f64,
}

impl SphericalSolution {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("bubble scale must be positive, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn unit() -> Self {
        Self { lambda: 1.0 }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let l = self.lambda;
        (2.0 * l).ln() - (l * l * r * r).ln_1p()
    }

    /// `(n-1)!·e^{n u}`, whose total mass is `Λ₁`.
    pub fn density(&self, consts: &DimensionalConstants, r: f64) -> f64 {
        consts.factorial_nm1 * (consts.nf() * self.eval(r)).exp()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphericalOracleReport {
    pub n: u32,
    pub mass: f64,
    pub mass_error: f64,
    /// `(1/γₙ)∫ log|y| f(y) dy` on the grid.
    pub c0: f64,
    /// `sup_{r ≤ R_max/2} |apply(f)(r) + log(1+r²) + C₀|`
    pub potential_deviation: f64,
    /// Spread `max - min` of `apply(f) + log(1+r²)` on the same window.
    pub potential_spread: f64,
    /// `Δ(potential)(0)` from the analytic functional; exact value `-2n`.
    pub lap0: f64,
    pub lap0_error: f64,
    pub passed: bool,
}

pub const SPHERICAL_MASS_TOL: f64 = 1e-6;
pub const SPHERICAL_POTENTIAL_TOL: f64 = 1e-3;
pub const SPHERICAL_LAP0_TOL: f64 = 1e-4;

/// Runs the bubble density through the quadrature, the potential operator and the
/// origin Laplacian functional.
///
/// The bubble satisfies `u = (1/γₙ)∫ log(|y|/|x-y|) f dy + log 2`, so the operator
/// output plus `log(1+r²)` is the constant `-C₀` (which vanishes analytically by
/// inversion symmetry of the bubble).
pub fn spherical_oracle(consts: &DimensionalConstants, kernel: &KernelOperator) -> Result<SphericalOracleReport> {
    let grid = kernel.grid();
    if grid.n() != consts.n {
        return Err(Error::GridMismatch("kernel and constants disagree on n".into()));
    }
    let bubble = SphericalSolution::unit();
    let f: Vec<f64> = grid.nodes().iter().map(|&r| bubble.density(consts, r)).collect();
    let tail = TailModel::PowerLaw { exponent: 2.0 * consts.nf() };
    let mass = integrate_radial(grid, &f, Some(&tail))?.value;
    let mass_error = ((mass - consts.lambda1) / consts.lambda1).abs();

    let c0 = kernel.log_moment(&f);
    let potential = kernel.apply_values(&f);
    let window = grid.window(0.0, 0.5 * grid.r_max());
    let shifted: Vec<f64> = window
        .clone()
        .map(|i| potential[i] + grid.nodes()[i].powi(2).ln_1p())
        .collect();
    let potential_deviation = shifted.iter().map(|x| (x + c0).abs()).fold(0.0, f64::max);
    let hi = shifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = shifted.iter().cloned().fold(f64::INFINITY, f64::min);
    let lap0 = kernel.laplacian_at_origin(&f);
    let exact = -2.0 * consts.nf();
    let lap0_error = ((lap0 - exact) / exact).abs();
    let passed = mass_error <= SPHERICAL_MASS_TOL
        && potential_deviation <= SPHERICAL_POTENTIAL_TOL
        && lap0_error <= SPHERICAL_LAP0_TOL;
    Ok(SphericalOracleReport {
        n: consts.n,
        mass,
        mass_error,
        c0,
        potential_deviation,
        potential_spread: hi - lo,
        lap0,
        lap0_error,
        passed,
    })
}
