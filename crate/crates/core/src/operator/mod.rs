//! The fixed-point maps. One application of `T` takes `(v, Δv(0))`, forms the
//! normalized density `K·e^{n(v+c_v)}` with total mass `κ`, and returns its
//! potential plus the polynomial correction scaled by `|Δv(0)|`, together with the
//! new `Δv(0)` obtained analytically from the same density.

mod problem;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use problem::{AdmissibilityReport, ProblemSpec, QProfile, RadialPolynomial, Variant};

use crate::constants::DimensionalConstants;
use crate::error::{Error, Result};
use crate::kernel::KernelOperator;
use crate::radial::{RadialFunction, RadialGrid, TailModel};

/// Radius beyond which quartic growth of `v` is measured.
pub const AV_RADIUS: f64 = 10.0;

/// Grid, constants and assembled kernel for one dimension.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub consts: DimensionalConstants,
    pub grid: Arc<RadialGrid>,
    pub kernel: KernelOperator,
}

impl Discretization {
    pub fn assemble(n: u32, r_max: f64, m: usize, grading: f64) -> Result<Self> {
        let consts = DimensionalConstants::new(n)?;
        let grid = Arc::new(RadialGrid::new(n, r_max, m, grading)?);
        let kernel = KernelOperator::assemble(grid.clone(), &consts)?;
        Ok(Self { consts, grid, kernel })
    }

    pub fn from_kernel(kernel: KernelOperator) -> Result<Self> {
        let grid = kernel.grid().clone();
        let consts = DimensionalConstants::new(grid.n())?;
        Ok(Self { consts, grid, kernel })
    }
}

/// A problem bound to a discretization, with the node-wise data that does not
/// change during iteration.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub spec: &'a ProblemSpec,
    pub disc: &'a Discretization,
    /// `log(Q·e^{nP})` at the nodes.
    log_base: Vec<f64>,
    sup_log_base: f64,
    /// Polynomial multiplying `|Δv(0)|` in the correction term.
    correction: Vec<f64>,
    r4: Vec<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(spec: &'a ProblemSpec, disc: &'a Discretization) -> Result<Self> {
        if spec.n != disc.consts.n {
            return Err(Error::GridMismatch(format!(
                "problem has n = {}, discretization n = {}",
                spec.n, disc.consts.n
            )));
        }
        let grid = &disc.grid;
        if spec.variant == Variant::Thm1 && grid.r_max() <= AV_RADIUS {
            return Err(Error::Config(format!(
                "R_max must exceed {AV_RADIUS} for the quartic-damped variant"
            )));
        }
        let log_base = spec.log_base_on(grid)?;
        let sup_log_base = log_base.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let nf = spec.n as f64;
        let correction = grid
            .nodes()
            .iter()
            .map(|&r| match spec.variant {
                Variant::Thm1 => (r * r - r.powi(4)) / (2.0 * nf),
                Variant::Thm2 => r * r / (2.0 * nf),
            })
            .collect();
        let r4 = grid.nodes().iter().map(|r| r.powi(4)).collect();
        Ok(Self { spec, disc, log_base, sup_log_base, correction, r4 })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.disc.grid
    }

    pub fn log_base(&self) -> &[f64] {
        &self.log_base
    }

    pub fn correction(&self) -> &[f64] {
        &self.correction
    }

    /// `log K` at the nodes for a given `A_v`.
    pub fn log_k(&self, a_v: f64) -> Vec<f64> {
        match self.spec.variant {
            Variant::Thm1 => {
                let nf = self.spec.n as f64;
                self.log_base
                    .iter()
                    .zip(&self.r4)
                    .map(|(b, r4)| b - nf * (1.0 + a_v) * r4)
                    .collect()
            }
            Variant::Thm2 => self.log_base.clone(),
        }
    }

    /// `A_v` for the quartic-damped variant, zero otherwise.
    pub fn a_v(&self, v: &[f64]) -> Result<f64> {
        match self.spec.variant {
            Variant::Thm1 => compute_av_values(self.grid(), v),
            Variant::Thm2 => Ok(0.0),
        }
    }

    /// One application of `T` to `(v, d0)` with mass target `kappa`.
    pub fn apply_t(&self, v: &[f64], d0: f64, kappa: f64) -> Result<TOutput> {
        let grid = self.grid();
        if v.len() != grid.len() {
            return Err(Error::GridMismatch("iterate length differs from grid".into()));
        }
        let n = self.spec.n as f64;
        let a_v = self.a_v(v)?;
        let log_k = self.log_k(a_v);
        let c_v = compute_cv(grid, self.spec.n, kappa, &log_k, v)?;
        let density: Vec<f64> = log_k
            .iter()
            .zip(v)
            .map(|(lk, vi)| (lk + n * (vi + c_v)).exp())
            .collect();
        if density.iter().any(|f| !f.is_finite()) {
            return Err(Error::Normalization("density is not finite".into()));
        }
        let mass = grid.integrate(&density);
        let potential = self.disc.kernel.apply_values(&density);
        let abs_d0 = d0.abs();
        let out: Vec<f64> = potential
            .iter()
            .zip(&self.correction)
            .map(|(p, c)| p + c * abs_d0)
            .collect();
        let d0_out = self.disc.kernel.laplacian_at_origin(&density) + abs_d0;
        let tail_bound = self.tail_bound(&log_k, v, c_v, &density);
        if self.spec.variant == Variant::Thm2 && !(tail_bound <= 1e-6 * kappa) {
            return Err(Error::Admissibility(format!(
                "density tail beyond R_max is not negligible (bound {tail_bound:.3e}, kappa {kappa:.6e})"
            )));
        }
        Ok(TOutput { v: out, d0: d0_out, c_v, a_v, density, mass, tail_bound })
    }

    /// Bound on `∫_{|y|>R_max} K e^{n(v+c_v)} dy`.
    pub fn tail_bound(&self, log_k: &[f64], v: &[f64], c_v: f64, density: &[f64]) -> f64 {
        let grid = self.grid();
        let n = self.spec.n as f64;
        let last = grid.len() - 1;
        match self.spec.variant {
            // For |x| ≥ 10, v + P_v ≤ v(0) - |x|⁴ by the definition of A_v.
            Variant::Thm1 => TailModel::QuarticEnvelope {
                log_amplitude: self.sup_log_base + n * (v[0] + c_v),
                quartic_rate: n,
            }
            .tail(grid, 0.0),
            // Exponential continuation with the terminal log-slope of the density.
            Variant::Thm2 => {
                if density[last] == 0.0 {
                    return 0.0;
                }
                let nodes = grid.nodes();
                let e1 = log_k[last] + n * v[last];
                let e0 = log_k[last - 1] + n * v[last - 1];
                let rate = (e0 - e1) / (nodes[last] - nodes[last - 1]);
                TailModel::Exponential { rate }.tail(grid, density[last])
            }
        }
    }
}

/// Result of one application of `T` (before the homotopy factor `t`).
#[derive(Debug, Clone)]
pub struct TOutput {
    pub v: Vec<f64>,
    /// Analytic `Δ(T v)(0)`.
    pub d0: f64,
    pub c_v: f64,
    pub a_v: f64,
    /// `K·e^{n(v+c_v)}` at the nodes.
    pub density: Vec<f64>,
    /// Grid quadrature of `density`.
    pub mass: f64,
    pub tail_bound: f64,
}

/// State of the iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationState {
    #[serde(skip)]
    pub v: Vec<f64>,
    pub c_v: f64,
    pub a_v: f64,
    pub d0: f64,
    pub t: f64,
    pub kappa_current: f64,
    pub residual: f64,
}

impl IterationState {
    pub fn initial(len: usize, t: f64, kappa: f64) -> Self {
        Self {
            v: vec![0.0; len],
            c_v: 0.0,
            a_v: 0.0,
            d0: 0.0,
            t,
            kappa_current: kappa,
            residual: f64::INFINITY,
        }
    }

    pub fn v_function(&self, grid: &Arc<RadialGrid>) -> Result<RadialFunction> {
        RadialFunction::new(grid.clone(), self.v.clone())
    }
}

/// `c_v = (1/n)·log(κ / ∫K e^{nv})`, with `log K` and `v` given at the nodes.
/// The exponent is shifted by its maximum so large `v` cannot overflow.
pub fn compute_cv(grid: &RadialGrid, n: u32, kappa: f64, log_k: &[f64], v: &[f64]) -> Result<f64> {
    let nf = n as f64;
    let exponent: Vec<f64> = log_k.iter().zip(v).map(|(lk, vi)| lk + nf * vi).collect();
    let peak = exponent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::Normalization(format!("log-density peak is {peak}")));
    }
    let scaled: Vec<f64> = exponent.iter().map(|e| (e - peak).exp()).collect();
    let mass = grid.integrate(&scaled);
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::Normalization(format!("grid mass is {mass}")));
    }
    let c = (kappa.ln() - peak - mass.ln()) / nf;
    if !c.is_finite() {
        return Err(Error::Normalization(format!("c_v is {c}")));
    }
    Ok(c)
}

/// `max(0, max_{r_j ≥ 10} (v(r_j) - v(0))/r_j⁴)`.
pub fn compute_av(v: &RadialFunction) -> Result<f64> {
    compute_av_values(v.grid(), v.values())
}

fn compute_av_values(grid: &RadialGrid, v: &[f64]) -> Result<f64> {
    if grid.r_max() <= AV_RADIUS {
        return Err(Error::Config(format!(
            "A_v needs nodes beyond r = {AV_RADIUS}, grid ends at {}",
            grid.r_max()
        )));
    }
    let nodes = grid.nodes();
    let start = nodes.partition_point(|&r| r < AV_RADIUS);
    Ok(nodes[start..]
        .iter()
        .zip(&v[start..])
        .map(|(r, vi)| (vi - v[0]) / r.powi(4))
        .fold(0.0, f64::max))
}

/// `T` for the quartic-damped variant.
pub fn apply_t_thm1(problem: &Problem<'_>, state: &IterationState) -> Result<TOutput> {
    if problem.spec.variant != Variant::Thm1 {
        return Err(Error::Spec("problem is not of the quartic-damped variant".into()));
    }
    problem.apply_t(&state.v, state.d0, state.kappa_current)
}

/// `T` for the variant without damping polynomial.
pub fn apply_t_thm2(problem: &Problem<'_>, state: &IterationState) -> Result<TOutput> {
    if problem.spec.variant != Variant::Thm2 {
        return Err(Error::Spec("problem is not of the undamped variant".into()));
    }
    problem.apply_t(&state.v, state.d0, state.kappa_current)
}
