//! Ring-averaged logarithmic kernel and the discrete potential operator
//! `f ↦ (1/γₙ)∫ log(1/|x-y|) f(y) dy` on radial densities.
//!
//! With `ρ = min(r,s)/max(r,s)` the sphere average of `log(1/|x-y|)` is
//! `-log max(r,s) - ½·⟨log((1-ρ)² + 4ρ sin²(θ/2))⟩`, where `⟨·⟩` is the mean
//! against `sin^{n-2}θ dθ` on `[0, π]`. The only singular point of the integrand is
//! `θ = 0` when `ρ = 1`; the substitution `θ = πτ³` flattens it so a fixed
//! Gauss–Legendre rule in `τ` is accurate to rounding on and off the diagonal.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::constants::DimensionalConstants;
use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;
use crate::radial::{GridKey, RadialFunction, RadialGrid};

pub const THETA_ORDER: usize = 64;

/// Angular quadrature for the ring average in dimension `n`.
#[derive(Debug, Clone)]
pub struct RingKernel {
    n: u32,
    half_angle_sin2: Vec<f64>,
    weights: Vec<f64>,
}

impl RingKernel {
    pub fn new(n: u32) -> Result<Self> {
        Self::with_order(n, THETA_ORDER)
    }

    pub fn with_order(n: u32, order: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("ring kernel needs n >= 3, got {n}")));
        }
        let (x, w) = gauss_legendre(order);
        let mut half_angle_sin2 = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for (xi, wi) in x.iter().zip(&w) {
            let tau = 0.5 * (xi + 1.0);
            let theta = std::f64::consts::PI * tau.powi(3);
            let jac = 3.0 * std::f64::consts::PI * tau * tau * 0.5 * wi;
            half_angle_sin2.push((0.5 * theta).sin().powi(2));
            weights.push(jac * theta.sin().powi(n as i32 - 2));
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { n, half_angle_sin2, weights })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Kernel value; the closed form for `n = 3`, the angular quadrature otherwise.
    pub fn eval(&self, r: f64, s: f64) -> Result<f64> {
        check_args(r, s)?;
        Ok(if self.n == 3 { closed_form_n3(r, s) } else { self.quadrature(r, s) })
    }

    /// Kernel value by angular quadrature regardless of dimension.
    pub fn eval_quadrature(&self, r: f64, s: f64) -> Result<f64> {
        check_args(r, s)?;
        Ok(self.quadrature(r, s))
    }

    fn eval_unchecked(&self, r: f64, s: f64) -> f64 {
        if self.n == 3 {
            closed_form_n3(r, s)
        } else {
            self.quadrature(r, s)
        }
    }

    fn quadrature(&self, r: f64, s: f64) -> f64 {
        let big = r.max(s);
        let small = r.min(s);
        if small == 0.0 {
            return -big.ln();
        }
        let rho = small / big;
        let a = (1.0 - rho) * (1.0 - rho);
        let b = 4.0 * rho;
        let mean: f64 = self
            .half_angle_sin2
            .iter()
            .zip(&self.weights)
            .map(|(s2, w)| w * (a + b * s2).ln())
            .sum();
        -big.ln() - 0.5 * mean
    }
}

fn check_args(r: f64, s: f64) -> Result<()> {
    if !(r >= 0.0 && s >= 0.0 && r.is_finite() && s.is_finite()) {
        return Err(Error::Domain(format!("radii must be finite and non-negative, got ({r}, {s})")));
    }
    if r == 0.0 && s == 0.0 {
        return Err(Error::SingularInput);
    }
    Ok(())
}

/// `n = 3`: `-[((r+s)² log(r+s) - (r-s)² log|r-s|)/(4rs) - ½]`, written in
/// `ρ = min/max` to avoid cancellation.
fn closed_form_n3(r: f64, s: f64) -> f64 {
    let big = r.max(s);
    let small = r.min(s);
    if small == 0.0 {
        return -big.ln();
    }
    let rho = small / big;
    let plus = (1.0 + rho) * (1.0 + rho) * rho.ln_1p();
    let minus = if rho < 1.0 { (1.0 - rho) * (1.0 - rho) * (-rho).ln_1p() } else { 0.0 };
    -big.ln() - ((plus - minus) / (4.0 * rho) - 0.5)
}

/// The `n = 3` closed form with argument checks.
pub fn ring_kernel_n3_closed_form(r: f64, s: f64) -> Result<f64> {
    check_args(r, s)?;
    Ok(closed_form_n3(r, s))
}

/// Mean of `log(1/|x-y|)` over `|y| = s` with `|x| = r`.
pub fn ring_kernel(n: u32, r: f64, s: f64) -> Result<f64> {
    RingKernel::new(n)?.eval(r, s)
}

/// Assembled Nyström matrix for the normalized logarithmic potential.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    grid: Arc<RadialGrid>,
    gamma_n: f64,
    matrix: Vec<f64>,
    lap0_weights: Vec<f64>,
}

impl KernelOperator {
    pub fn assemble(grid: Arc<RadialGrid>, consts: &DimensionalConstants) -> Result<Self> {
        check_dimension(&grid, consts)?;
        let kernel = RingKernel::new(consts.n)?;
        let nodes = grid.nodes();
        let vol = grid.volume_weights();
        let len = nodes.len();
        let gamma = consts.gamma_n;
        // Self-interaction of the origin: mean of -log s over the first cell
        // against the hat function times s^{n-1}.
        let nf = consts.nf();
        let origin_mean = -nodes[1].ln() + (2.0 * nf + 1.0) / (nf * (nf + 1.0));

        let mut matrix = vec![0.0; len * len];
        matrix.par_chunks_mut(len).enumerate().for_each(|(i, row)| {
            for (j, entry) in row.iter_mut().enumerate() {
                let k = if i == 0 && j == 0 {
                    origin_mean
                } else {
                    kernel.eval_unchecked(nodes[i], nodes[j])
                };
                *entry = vol[j] * k / gamma;
            }
        });
        let lap0_weights = lap0_weights(&grid, consts)?;
        Ok(Self { grid, gamma_n: gamma, matrix, lap0_weights })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn gamma_n(&self) -> f64 {
        self.gamma_n
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim() + j]
    }

    pub fn lap0_weights(&self) -> &[f64] {
        &self.lap0_weights
    }

    /// Potential of `density` divided by `γₙ`.
    pub fn apply(&self, density: &RadialFunction) -> Result<RadialFunction> {
        if !self.grid.same_as(density.grid()) {
            return Err(Error::GridMismatch("density lives on a different grid".into()));
        }
        RadialFunction::new(self.grid.clone(), self.apply_values(density.values()))
    }

    /// Matrix-vector product on raw node values; each row is summed in node order.
    pub fn apply_values(&self, density: &[f64]) -> Vec<f64> {
        let len = self.dim();
        assert_eq!(density.len(), len, "density length must match the grid");
        self.matrix
            .par_chunks(len)
            .map(|row| row.iter().zip(density).map(|(a, f)| a * f).sum())
            .collect()
    }

    /// `Δ(potential)(0) = -((n-2)/γₙ)∫ f(y)/|y|² dy`.
    pub fn laplacian_at_origin(&self, density: &[f64]) -> f64 {
        self.lap0_weights.iter().zip(density).map(|(w, f)| w * f).sum()
    }

    /// `(1/γₙ)∫ log|y| f(y) dy`, the constant separating the normalized and
    /// unnormalized potentials.
    pub fn log_moment(&self, density: &[f64]) -> f64 {
        let sum: f64 = self
            .grid
            .nodes()
            .iter()
            .zip(self.grid.volume_weights())
            .zip(density)
            .skip(1)
            .map(|((r, w), f)| w * r.ln() * f)
            .sum();
        sum / self.gamma_n
    }

    /// Writes the cache file: `n`, `M` (u64 LE), `R_max`, grading (f64 LE), then
    /// the matrix row by row as f64 LE.
    pub fn save(&self, path: &Path) -> Result<()> {
        let key = self.grid.key();
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&(key.n as u64).to_le_bytes())?;
        out.write_all(&(key.m as u64).to_le_bytes())?;
        out.write_all(&key.r_max.to_le_bytes())?;
        out.write_all(&key.grading.to_le_bytes())?;
        for x in &self.matrix {
            out.write_all(&x.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Loads a cache file written by [`save`](Self::save); the stored key must
    /// match `grid` exactly.
    pub fn load(path: &Path, grid: Arc<RadialGrid>, consts: &DimensionalConstants) -> Result<Self> {
        check_dimension(&grid, consts)?;
        let mut input = BufReader::new(File::open(path)?);
        let mut word = [0u8; 8];
        let mut next = |input: &mut BufReader<File>| -> Result<[u8; 8]> {
            input
                .read_exact(&mut word)
                .map_err(|e| Error::Cache(format!("truncated kernel cache: {e}")))?;
            Ok(word)
        };
        let stored = GridKey {
            n: u64::from_le_bytes(next(&mut input)?) as u32,
            m: u64::from_le_bytes(next(&mut input)?) as usize,
            r_max: f64::from_le_bytes(next(&mut input)?),
            grading: f64::from_le_bytes(next(&mut input)?),
        };
        if stored != grid.key() {
            return Err(Error::Cache(format!(
                "cache key {stored:?} does not match grid {:?}",
                grid.key()
            )));
        }
        let len = grid.len();
        let mut bytes = Vec::with_capacity(len * len * 8);
        input.read_to_end(&mut bytes)?;
        if bytes.len() != len * len * 8 {
            return Err(Error::Cache(format!(
                "expected {} matrix bytes, found {}",
                len * len * 8,
                bytes.len()
            )));
        }
        let matrix = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8 bytes")))
            .collect();
        let lap0_weights = lap0_weights(&grid, consts)?;
        Ok(Self { grid, gamma_n: consts.gamma_n, matrix, lap0_weights })
    }

    /// Overwrites one matrix entry. Exists so verification can prove it notices a
    /// corrupted operator.
    #[doc(hidden)]
    pub fn inject_fault(&mut self, i: usize, j: usize, value: f64) {
        let len = self.dim();
        self.matrix[i * len + j] = value;
    }
}

fn check_dimension(grid: &RadialGrid, consts: &DimensionalConstants) -> Result<()> {
    if grid.n() != consts.n {
        return Err(Error::GridMismatch(format!(
            "grid built for n = {}, constants for n = {}",
            grid.n(),
            consts.n
        )));
    }
    Ok(())
}

/// `-((n-2)/γₙ)·ω_{n-1}·∫ f(s) s^{n-3} ds` as weights on node values.
fn lap0_weights(grid: &RadialGrid, consts: &DimensionalConstants) -> Result<Vec<f64>> {
    let moment = grid.moment_weights(consts.n as i32 - 3)?;
    let scale = -(consts.nf() - 2.0) / consts.gamma_n * grid.omega_nm1();
    Ok(moment.into_iter().map(|w| scale * w).collect())
}
