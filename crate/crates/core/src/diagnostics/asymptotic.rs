use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{IterationState, ProblemSpec, Variant};
use crate::radial::RadialGrid;

pub const MIN_FIT_NODES: usize = 8;

/// Least-squares fit `g(r) ≈ intercept + slope·log r` on a radial window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub slope: f64,
    pub intercept: f64,
    /// Expected slope `-2tκ/Λ₁`; `NaN` when fitting a bare profile.
    pub target: f64,
    /// `max |g - slope·log r - mean(g - slope·log r)|` over the window.
    pub drift: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub nodes: usize,
}

impl AsymptoticFit {
    pub fn relative_slope_error(&self) -> f64 {
        ((self.slope - self.target) / self.target).abs()
    }
}

/// Fits `values` against `log r` over the nodes in `[lo, hi]`.
pub fn fit_log_profile(grid: &RadialGrid, values: &[f64], lo: f64, hi: f64) -> Result<AsymptoticFit> {
    let window = grid.window(lo.max(f64::MIN_POSITIVE), hi);
    let count = window.len();
    if count < MIN_FIT_NODES {
        return Err(Error::Config(format!(
            "fit window [{lo}, {hi}] holds {count} nodes, at least {MIN_FIT_NODES} required"
        )));
    }
    let xs: Vec<f64> = window.clone().map(|i| grid.nodes()[i].ln()).collect();
    let ys: Vec<f64> = window.map(|i| values[i]).collect();
    let nf = count as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - slope * x).collect();
    let mean = residual.iter().sum::<f64>() / nf;
    let drift = residual.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
    Ok(AsymptoticFit {
        slope,
        intercept,
        target: f64::NAN,
        drift,
        window_lo: lo,
        window_hi: hi,
        nodes: count,
    })
}

/// The profile with the polynomial correction removed: what remains should grow
/// like `-(2tκ/Λ₁)·log r`.
pub fn depolynomialized(spec: &ProblemSpec, grid: &RadialGrid, state: &IterationState) -> Vec<f64> {
    let nf = spec.n as f64;
    grid.nodes()
        .iter()
        .zip(&state.v)
        .map(|(&r, v)| match spec.variant {
            Variant::Thm1 => v - state.d0 * (r.powi(4) - r * r) / (2.0 * nf),
            Variant::Thm2 => v - state.d0.abs() * r * r / (2.0 * nf),
        })
        .collect()
}

/// Fits the de-polynomialized profile on `[R_max/4, R_max/2]`.
pub fn asymptotic_fit(spec: &ProblemSpec, grid: &RadialGrid, state: &IterationState) -> Result<AsymptoticFit> {
    let g = depolynomialized(spec, grid, state);
    let r_max = grid.r_max();
    let mut fit = fit_log_profile(grid, &g, 0.25 * r_max, 0.5 * r_max)?;
    fit.target = -2.0 * state.t * spec.kappa / spec.consts.lambda1;
    Ok(fit)
}
