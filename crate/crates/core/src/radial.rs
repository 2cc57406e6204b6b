//! Graded radial grids on `[0, R_max]`, full-space quadrature of radial functions,
//! monotone interpolation and the finite-difference radial Laplacian.
//!
//! Nodes are `r_j = R_max·(j/M)^g`. Quadrature weights come from product
//! integration in the uniform reference variable `t = j/M`: the integrand `f` is
//! interpolated by quartic Lagrange panels (four cells each) and the factor
//! `r^{n-1} dr/dt` is integrated exactly by Gauss–Legendre. The first few cells use
//! linear interpolation instead, as many as needed for every weight to be positive.

use std::io::{BufRead, Write};
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::sphere_area;
use crate::error::{Error, Result};
use crate::numerics::{fd_weights, gauss_legendre, gauss_legendre_on, lagrange_basis};

const PANEL_CELLS: usize = 4;
const PANEL_GL_ORDER: usize = 24;

/// Parameters that identify a grid; also the key of the kernel cache.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridKey {
    pub n: u32,
    pub m: usize,
    pub r_max: f64,
    pub grading: f64,
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    key: GridKey,
    omega_nm1: f64,
    nodes: Vec<f64>,
    /// `μ_j = ∫ L_j(r) r^{n-1} dr`, the discrete counterpart of `w_j r_j^{n-1}`.
    measure: Vec<f64>,
    /// `ω_{n-1}·μ_j`
    volume: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n: u32, r_max: f64, m: usize, grading: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Grid(format!("dimension must be positive, got {n}")));
        }
        if m < 64 {
            return Err(Error::Grid(format!("at least 64 cells are required, got {m}")));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Grid(format!("R_max must be positive and finite, got {r_max}")));
        }
        if !(grading.is_finite() && grading > 0.0) {
            return Err(Error::Grid(format!(
                "grading exponent must be positive and finite, got {grading}"
            )));
        }
        let nodes: Vec<f64> = (0..=m)
            .map(|j| r_max * (j as f64 / m as f64).powf(grading))
            .collect();
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("node sequence is not strictly increasing".into()));
        }
        let key = GridKey { n, m, r_max, grading };
        let measure = product_weights(&key, n as i32 - 1)?;
        let omega_nm1 = sphere_area(n - 1).map_err(|e| Error::Grid(e.to_string()))?;
        let volume = measure.iter().map(|w| omega_nm1 * w).collect();
        Ok(Self { key, omega_nm1, nodes, measure, volume })
    }

    pub fn key(&self) -> GridKey {
        self.key
    }

    pub fn n(&self) -> u32 {
        self.key.n
    }

    pub fn r_max(&self) -> f64 {
        self.key.r_max
    }

    pub fn cells(&self) -> usize {
        self.key.m
    }

    pub fn grading(&self) -> f64 {
        self.key.grading
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn omega_nm1(&self) -> f64 {
        self.omega_nm1
    }

    pub fn measure_weights(&self) -> &[f64] {
        &self.measure
    }

    /// Weights `W_j` with `∫_{B_{R_max}} f(|y|) dy ≈ Σ_j W_j f(r_j)`.
    pub fn volume_weights(&self) -> &[f64] {
        &self.volume
    }

    /// Product-integration weights for `∫_0^{R_max} f(r) r^power dr`.
    pub fn moment_weights(&self, power: i32) -> Result<Vec<f64>> {
        product_weights(&self.key, power)
    }

    /// Indices of the nodes with `lo ≤ r ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> Range<usize> {
        let start = self.nodes.partition_point(|&r| r < lo);
        let end = self.nodes.partition_point(|&r| r <= hi);
        start..end.max(start)
    }

    /// `∫_{B_{R_max}} f dy` with the grid weights, summed in node order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.volume.iter().zip(values).map(|(w, f)| w * f).sum()
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.key == other.key
    }
}

/// `∫_0^{R} f(r) r^power dr ≈ Σ_j c_j f(r_j)`.
fn product_weights(key: &GridKey, power: i32) -> Result<Vec<f64>> {
    if power < 0 {
        return Err(Error::Grid(format!("moment power must be non-negative, got {power}")));
    }
    for linear_cells in 0..=key.m {
        let w = product_weights_with(key, power, linear_cells);
        if w.iter().all(|&x| x > 0.0) {
            return Ok(w);
        }
    }
    Err(Error::Grid("could not construct positive quadrature weights".into()))
}

fn product_weights_with(key: &GridKey, power: i32, linear_cells: usize) -> Vec<f64> {
    let m = key.m;
    let mf = m as f64;
    let g = key.grading;
    let p = power as f64;
    // r^p dr = g R^{p+1} t^{g(p+1)-1} dt
    let scale = g * key.r_max.powf(p + 1.0);
    let expo = g * (p + 1.0) - 1.0;
    let density = |t: f64| scale * t.powf(expo);
    let t_of = |j: usize| j as f64 / mf;

    let (gx, gw) = gauss_legendre(PANEL_GL_ORDER);
    let mut weights = vec![0.0; m + 1];
    let mut basis = [0.0; PANEL_CELLS + 1];
    let mut panel_nodes = [0.0; PANEL_CELLS + 1];

    let mut integrate_panel = |first: usize, count: usize, a: f64, b: f64, weights: &mut [f64]| {
        for k in 0..count {
            panel_nodes[k] = t_of(first + k);
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (x, w) in gx.iter().zip(&gw) {
            let t = mid + half * x;
            let rho = half * w * density(t);
            lagrange_basis(&panel_nodes[..count], t, &mut basis[..count]);
            for k in 0..count {
                weights[first + k] += rho * basis[k];
            }
        }
    };

    let mut c = 0;
    while c < m {
        if c < linear_cells {
            integrate_panel(c, 2, t_of(c), t_of(c + 1), &mut weights);
            c += 1;
        } else if c + PANEL_CELLS <= m {
            integrate_panel(c, PANEL_CELLS + 1, t_of(c), t_of(c + PANEL_CELLS), &mut weights);
            c += PANEL_CELLS;
        } else {
            // Remaining cells: interpolate through the last panel's nodes.
            let first = m - PANEL_CELLS;
            integrate_panel(first, PANEL_CELLS + 1, t_of(c), t_of(m), &mut weights);
            c = m;
        }
    }
    weights
}

/// A radial profile sampled on a grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!(
                "non-finite value {} at node {i} (r = {})",
                values[i],
                grid.nodes()[i]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at_origin(&self) -> f64 {
        self.values[0]
    }

    /// Monotone cubic (Fritsch–Carlson) interpolant with the even extension
    /// through the origin, so the slope at `r = 0` is zero.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let x = self.grid.nodes();
        let y = &self.values;
        let last = x.len() - 1;
        if !(0.0..=x[last]).contains(&r) {
            return Err(Error::Evaluation(format!(
                "r = {r} outside [0, {}]",
                x[last]
            )));
        }
        let i = x.partition_point(|&xi| xi <= r);
        if i > 0 && x[i - 1] == r {
            return Ok(y[i - 1]);
        }
        let i = i - 1;
        let h = x[i + 1] - x[i];
        let s = (r - x[i]) / h;
        let d0 = self.slope(i);
        let d1 = self.slope(i + 1);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        Ok(h00 * y[i] + h10 * h * d0 + h01 * y[i + 1] + h11 * h * d1)
    }

    fn slope(&self, i: usize) -> f64 {
        let x = self.grid.nodes();
        let y = &self.values;
        let last = x.len() - 1;
        if i == 0 {
            return 0.0;
        }
        let secant = |k: usize| (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
        if i == last {
            let h1 = x[last] - x[last - 1];
            let h0 = x[last - 1] - x[last - 2];
            let d1 = secant(last - 1);
            let d0 = secant(last - 2);
            let mut d = ((2.0 * h1 + h0) * d1 - h1 * d0) / (h0 + h1);
            if d * d1 <= 0.0 {
                d = 0.0;
            } else if d0 * d1 < 0.0 && d.abs() > 3.0 * d1.abs() {
                d = 3.0 * d1;
            }
            return d;
        }
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let (d0, d1) = (secant(i - 1), secant(i));
        if d0 * d1 <= 0.0 {
            return 0.0;
        }
        let w1 = 2.0 * h1 + h0;
        let w2 = h1 + 2.0 * h0;
        (w1 + w2) / (w1 / d0 + w2 / d1)
    }

    /// CSV with a header line and 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W, value_column: &str) -> Result<()> {
        writeln!(out, "r,{value_column}")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{r:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(grid: Arc<RadialGrid>, input: R) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Evaluation(format!("line {}: missing column", lineno + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Evaluation(format!("line {}: {e}", lineno + 1)))
            };
            let r = parse(cols.next())?;
            let v = parse(cols.next())?;
            let k = values.len();
            if k >= grid.len() || grid.nodes()[k] != r {
                return Err(Error::GridMismatch(format!(
                    "line {}: radius {r} does not match grid node {k}",
                    lineno + 1
                )));
            }
            values.push(v);
        }
        Self::new(grid, values)
    }
}

/// Decay model for the density beyond `R_max`, used to bound the truncated tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailModel {
    /// `f(r) ≈ f(R)·(R/r)^exponent`
    PowerLaw { exponent: f64 },
    /// `f(r) ≤ f(R)·e^{-rate·(r-R)}`
    Exponential { rate: f64 },
    /// `f(r) ≤ exp(log_amplitude - quartic_rate·r⁴)`
    QuarticEnvelope { log_amplitude: f64, quartic_rate: f64 },
}

impl TailModel {
    /// `∫_{|y| > R} f dy` under the model; `+∞` when the model does not decay.
    pub fn tail(&self, grid: &RadialGrid, f_at_r_max: f64) -> f64 {
        let n = grid.n() as i32;
        let nf = n as f64;
        let r = grid.r_max();
        let omega = grid.omega_nm1();
        match *self {
            TailModel::PowerLaw { exponent } => {
                if exponent <= nf {
                    return f64::INFINITY;
                }
                omega * f_at_r_max * r.powi(n) / (exponent - nf)
            }
            TailModel::Exponential { rate } => {
                if rate <= 0.0 {
                    return f64::INFINITY;
                }
                if f_at_r_max == 0.0 {
                    return 0.0;
                }
                // ∫_R^∞ e^{-β(r-R)} r^{n-1} dr = Σ_k (n-1)!/(n-1-k)! R^{n-1-k} / β^{k+1}
                let mut sum = 0.0;
                let mut falling = 1.0;
                for k in 0..n {
                    sum += falling * r.powi(n - 1 - k) / rate.powi(k + 1);
                    falling *= (n - 1 - k) as f64;
                }
                omega * f_at_r_max * sum
            }
            TailModel::QuarticEnvelope { log_amplitude, quartic_rate } => {
                if quartic_rate <= 0.0 {
                    return f64::INFINITY;
                }
                let x = quartic_rate * r.powi(4);
                let q = (nf - 4.0) / 4.0;
                let correction = if q > 0.0 && x > q { 1.0 / (1.0 - q / x) } else if q > 0.0 { f64::INFINITY } else { 1.0 };
                let log_tail = log_amplitude - x + (nf - 4.0) * r.ln() - (4.0 * quartic_rate).ln();
                omega * log_tail.exp() * correction
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialIntegral {
    /// Grid quadrature plus the tail estimate.
    pub value: f64,
    pub truncated: f64,
    pub tail: f64,
}

/// `∫_{ℝⁿ} f(|y|) dy` from node samples, with an optional tail model.
pub fn integrate_radial(
    grid: &RadialGrid,
    values: &[f64],
    tail_model: Option<&TailModel>,
) -> Result<RadialIntegral> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} values for a grid of {} nodes",
            values.len(),
            grid.len()
        )));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Evaluation("NaN in integrand".into()));
    }
    let truncated = grid.integrate(values);
    let tail = match tail_model {
        Some(model) => model.tail(grid, values[values.len() - 1]),
        None => 0.0,
    };
    Ok(RadialIntegral { value: truncated + tail, truncated, tail })
}

const STENCIL: usize = 5;

/// Five-node stencil around node `i`, in the even extension of the grid
/// (negative positions mirror positive nodes). Returns positions and node indices.
fn stencil(nodes: &[f64], i: usize) -> ([f64; STENCIL], [usize; STENCIL]) {
    let last = nodes.len() as isize - 1;
    let half = (STENCIL / 2) as isize;
    let mut start = i as isize - half;
    if start + STENCIL as isize - 1 > last {
        start = last - STENCIL as isize + 1;
    }
    let mut pos = [0.0; STENCIL];
    let mut idx = [0usize; STENCIL];
    for k in 0..STENCIL {
        let e = start + k as isize;
        let j = e.unsigned_abs();
        idx[k] = j;
        pos[k] = if e < 0 { -nodes[j] } else { nodes[j] };
    }
    (pos, idx)
}

/// Spacing multiplier for the origin stencil; keeps rounding in the second
/// difference small on strongly graded grids.
fn origin_stride(grid: &RadialGrid) -> usize {
    (grid.cells() / 256).max(1)
}

/// `Δf = f'' + (n-1)f'/r` by five-point finite differences; `n·f''(0)` at the origin.
pub fn radial_laplacian(f: &RadialFunction) -> Result<RadialFunction> {
    let grid = f.grid();
    let nodes = grid.nodes();
    if nodes.len() < STENCIL {
        return Err(Error::Evaluation(format!(
            "radial Laplacian needs at least {STENCIL} nodes, got {}",
            nodes.len()
        )));
    }
    let y = f.values();
    let nf = grid.n() as f64;
    let mut out = vec![0.0; nodes.len()];

    let a = origin_stride(grid);
    let pos = [-nodes[2 * a], -nodes[a], 0.0, nodes[a], nodes[2 * a]];
    let idx = [2 * a, a, 0, a, 2 * a];
    let c = fd_weights(0.0, &pos, 2);
    out[0] = nf * (0..STENCIL).map(|k| c[2][k] * y[idx[k]]).sum::<f64>();

    for i in 1..nodes.len() {
        let (pos, idx) = stencil(nodes, i);
        let c = fd_weights(nodes[i], &pos, 2);
        let d1: f64 = (0..STENCIL).map(|k| c[1][k] * y[idx[k]]).sum();
        let d2: f64 = (0..STENCIL).map(|k| c[2][k] * y[idx[k]]).sum();
        out[i] = d2 + (nf - 1.0) * d1 / nodes[i];
    }
    RadialFunction::new(grid.clone(), out)
}

/// `f'(r)` by five-point finite differences (zero at the origin).
pub fn radial_derivative(f: &RadialFunction) -> Result<RadialFunction> {
    let grid = f.grid();
    let nodes = grid.nodes();
    if nodes.len() < STENCIL {
        return Err(Error::Evaluation("too few nodes for a derivative".into()));
    }
    let y = f.values();
    let mut out = vec![0.0; nodes.len()];
    for i in 1..nodes.len() {
        let (pos, idx) = stencil(nodes, i);
        let c = fd_weights(nodes[i], &pos, 1);
        out[i] = (0..STENCIL).map(|k| c[1][k] * y[idx[k]]).sum();
    }
    RadialFunction::new(grid.clone(), out)
}

/// Cumulative `∫_0^{r_i} g(r) dr` with a local cubic through the four nodes
/// around each cell.
pub fn cumulative_integral(nodes: &[f64], g: &[f64]) -> Vec<f64> {
    let m = nodes.len() - 1;
    let mut out = vec![0.0; nodes.len()];
    let mut basis = [0.0; 4];
    for c in 0..m {
        let first = c.saturating_sub(1).min(m.saturating_sub(3));
        let local = &nodes[first..first + 4];
        let (gx, gw) = gauss_legendre_on(4, nodes[c], nodes[c + 1]);
        let mut acc = 0.0;
        for (x, w) in gx.iter().zip(&gw) {
            lagrange_basis(local, *x, &mut basis);
            acc += w * (0..4).map(|k| basis[k] * g[first + k]).sum::<f64>();
        }
        out[c + 1] = out[c] + acc;
    }
    out
}

/// Rebuilds `f(ξ) - f(0)` from `Δf` through
/// `∫_0^ξ r^{1-n} ∫_0^r Δf(s) s^{n-1} ds dr`.
pub fn reconstruct_from_laplacian(laplacian: &RadialFunction) -> Result<RadialFunction> {
    let grid = laplacian.grid();
    let nodes = grid.nodes();
    let n = grid.n() as i32;
    let integrand: Vec<f64> = nodes
        .iter()
        .zip(laplacian.values())
        .map(|(r, l)| l * r.powi(n - 1))
        .collect();
    let flux = cumulative_integral(nodes, &integrand);
    let slope: Vec<f64> = nodes
        .iter()
        .zip(&flux)
        .map(|(&r, &q)| if r > 0.0 { q / r.powi(n - 1) } else { 0.0 })
        .collect();
    RadialFunction::new(grid.clone(), cumulative_integral(nodes, &slope))
}
