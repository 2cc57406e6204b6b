//! Damped Picard iteration `v ← (1-θ)v + θ·t·T(v)` with geometric continuation in
//! the target curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Discretization, IterationState, Problem, ProblemSpec, TOutput, Variant};
use crate::radial::{RadialFunction, RadialGrid};

/// Radius of the ball on which `w = v + c_v + (1/n)·log t` is monitored for blow-up.
pub const BLOWUP_RADIUS: f64 = 1.0;
/// Smallest damping the adaptive schedule will use.
pub const MIN_DAMPING: f64 = 0.05;
const GROWTH_STREAK: usize = 5;
const STAGNATION_WINDOW: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub continuation_steps: usize,
    pub blowup_sup: f64,
    pub t: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 0.3,
            tol: 1e-8,
            max_iter: 2000,
            continuation_steps: 8,
            blowup_sup: 50.0,
            t: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.continuation_steps < 1 {
            return Err(Error::Config("continuation_steps must be at least 1".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.t > 0.0 && self.t <= 1.0) {
            return Err(Error::Config(format!("t must lie in (0, 1], got {}", self.t)));
        }
        if !self.blowup_sup.is_finite() {
            return Err(Error::Config("blowup_sup must be finite".into()));
        }
        Ok(())
    }

    /// Stage targets `κ/8·8^{s/(S-1)}`, ending exactly at `κ`.
    pub fn stage_targets(&self, kappa: f64) -> Vec<f64> {
        let s = self.continuation_steps;
        if s == 1 {
            return vec![kappa];
        }
        (0..s)
            .map(|k| if k + 1 == s { kappa } else { kappa / 8.0 * 8f64.powf(k as f64 / (s - 1) as f64) })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    NotConverged,
    BlowUp,
    AdmissibilityError,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageSummary {
    pub kappa: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DampingChange {
    /// Global iteration index at which the damping took effect.
    pub iteration: usize,
    pub stage: usize,
    pub damping: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub message: String,
    pub state: IterationState,
    pub residual_history: Vec<f64>,
    pub stage_iterations: Vec<usize>,
    pub stages: Vec<StageSummary>,
    pub damping_schedule: Vec<DampingChange>,
    /// Tolerance actually applied at termination (never below the configured one).
    pub effective_tol: f64,
    pub tail_bound: f64,
    #[serde(skip)]
    pub density: Vec<f64>,
    #[serde(skip)]
    pub solution: Option<RadialFunction>,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.residual_history.len()
    }
}

/// `sup |t·T(v) - v|` over nodes `r ≤ R_max/2`.
pub fn fixed_point_residual(grid: &RadialGrid, v: &[f64], tv: &[f64], t: f64) -> f64 {
    let inner = grid.window(0.0, 0.5 * grid.r_max());
    inner.map(|i| (t * tv[i] - v[i]).abs()).fold(0.0, f64::max)
}

/// Largest `|v|` on the convergence window.
fn inner_magnitude(grid: &RadialGrid, v: &[f64]) -> f64 {
    grid.window(0.0, 0.5 * grid.r_max()).map(|i| v[i].abs()).fold(0.0, f64::max)
}

/// Bookkeeping accumulated over all stages.
#[derive(Default)]
struct Trace {
    history: Vec<f64>,
    stages: Vec<StageSummary>,
    schedule: Vec<DampingChange>,
    effective_tol: f64,
    tail_bound: f64,
    density: Vec<f64>,
}

impl Trace {
    fn finish(
        self,
        spec: &ProblemSpec,
        grid: &std::sync::Arc<RadialGrid>,
        status: SolveStatus,
        message: String,
        state: IterationState,
    ) -> SolveResult {
        let solution = if status == SolveStatus::Converged {
            assemble_solution(spec, grid, &state, status).ok()
        } else {
            None
        };
        SolveResult {
            status,
            message,
            stage_iterations: self.stages.iter().map(|s| s.iterations).collect(),
            state,
            residual_history: self.history,
            stages: self.stages,
            damping_schedule: self.schedule,
            effective_tol: self.effective_tol,
            tail_bound: self.tail_bound,
            density: self.density,
            solution,
        }
    }
}

pub fn solve(spec: &ProblemSpec, disc: &Discretization, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let problem = Problem::new(spec, disc)?;
    let grid = disc.grid.clone();
    let n = spec.n as f64;
    let log_t_over_n = cfg.t.ln() / n;
    let blowup_window = grid.window(0.0, BLOWUP_RADIUS);

    let mut state = IterationState::initial(grid.len(), cfg.t, spec.kappa);
    let mut trace = Trace { effective_tol: cfg.tol, ..Default::default() };

    let targets = cfg.stage_targets(spec.kappa);
    for (stage, &kappa_s) in targets.iter().enumerate() {
        state.kappa_current = kappa_s;
        let mut theta = cfg.damping;
        trace.schedule.push(DampingChange { iteration: trace.history.len(), stage, damping: theta });
        let mut growth = 0usize;
        let mut previous = f64::INFINITY;
        let mut best = f64::INFINITY;
        let mut since_best = 0usize;
        let mut converged = false;
        let mut iterations = 0;

        while iterations < cfg.max_iter {
            let out: TOutput = match problem.apply_t(&state.v, state.d0, kappa_s) {
                Ok(out) => out,
                Err(err @ (Error::Normalization(_) | Error::Admissibility(_))) => {
                    let status = if matches!(err, Error::Normalization(_)) {
                        SolveStatus::BlowUp
                    } else {
                        SolveStatus::AdmissibilityError
                    };
                    trace.stages.push(StageSummary {
                        kappa: kappa_s,
                        iterations,
                        residual: state.residual,
                        converged: false,
                    });
                    let message = format!("stage {stage}: {err}");
                    return Ok(trace.finish(spec, &grid, status, message, state));
                }
                Err(e) => return Err(e),
            };
            iterations += 1;
            state.c_v = out.c_v;
            state.a_v = out.a_v;
            let residual = fixed_point_residual(&grid, &state.v, &out.v, cfg.t);
            state.residual = residual;
            trace.history.push(residual);
            trace.tail_bound = out.tail_bound;

            let w_sup = blowup_window
                .clone()
                .map(|i| state.v[i] + out.c_v + log_t_over_n)
                .fold(f64::NEG_INFINITY, f64::max);
            if !(w_sup <= cfg.blowup_sup) || !residual.is_finite() {
                trace.density = out.density;
                trace.stages.push(StageSummary { kappa: kappa_s, iterations, residual, converged: false });
                let message = format!("stage {stage}: sup of w on B_1 reached {w_sup:.3e}");
                return Ok(trace.finish(spec, &grid, SolveStatus::BlowUp, message, state));
            }

            // Rounding floor: once θ·(tT(v) - v) drops below an ulp of v the
            // iterate can no longer move, so the residual cannot go lower.
            trace.effective_tol =
                cfg.tol.max(2.0 * f64::EPSILON * inner_magnitude(&grid, &state.v) / theta);
            if residual <= trace.effective_tol {
                trace.density = out.density;
                converged = true;
                break;
            }

            let mut halve = false;
            growth = if residual > previous { growth + 1 } else { 0 };
            if growth >= GROWTH_STREAK {
                halve = true;
                growth = 0;
            }
            previous = residual;
            if residual < best {
                best = residual;
                since_best = 0;
            } else {
                since_best += 1;
            }
            if since_best >= STAGNATION_WINDOW && residual > 1e3 * trace.effective_tol {
                halve = true;
                since_best = 0;
                best = residual;
            }
            if halve && theta > MIN_DAMPING {
                theta = (theta / 2.0).max(MIN_DAMPING);
                trace.schedule.push(DampingChange { iteration: trace.history.len(), stage, damping: theta });
            }

            if iterations == cfg.max_iter {
                // Keep the last evaluated iterate so v, c_v and the density agree.
                trace.density = out.density;
                break;
            }
            let scale = theta * cfg.t;
            for (vi, ti) in state.v.iter_mut().zip(&out.v) {
                *vi = (1.0 - theta) * *vi + scale * ti;
            }
            state.d0 = (1.0 - theta) * state.d0 + scale * out.d0;
            trace.density = out.density;
        }

        let residual = state.residual;
        trace.stages.push(StageSummary { kappa: kappa_s, iterations, residual, converged });
        if !converged {
            let message = format!(
                "stage {stage} (kappa = {kappa_s:.6e}) stopped after {iterations} iterations at residual {residual:.3e}"
            );
            return Ok(trace.finish(spec, &grid, SolveStatus::NotConverged, message, state));
        }
    }

    let (status, message) = if !(state.d0 < 0.0) {
        (SolveStatus::NotConverged, format!("fixed point has d0 = {:.6e} >= 0", state.d0))
    } else if spec.variant == Variant::Thm1 && state.a_v > 1e-8 {
        (SolveStatus::NotConverged, format!("fixed point has A_v = {:.3e} > 1e-8", state.a_v))
    } else {
        (SolveStatus::Converged, format!("converged: residual {:.3e}", state.residual))
    };
    Ok(trace.finish(spec, &grid, status, message, state))
}

/// `u = P + v + c_v - (1+A_v)r⁴` (quartic-damped variant) or `u = v + c_v`.
pub fn assemble_solution(
    spec: &ProblemSpec,
    grid: &std::sync::Arc<RadialGrid>,
    state: &IterationState,
    status: SolveStatus,
) -> Result<RadialFunction> {
    if status != SolveStatus::Converged {
        return Err(Error::NotConverged(format!("cannot assemble a solution from a {status} state")));
    }
    assemble_unchecked(spec, grid, state)
}

/// Assembly without the convergence check, for analysing intermediate iterates.
pub fn assemble_unchecked(
    spec: &ProblemSpec,
    grid: &std::sync::Arc<RadialGrid>,
    state: &IterationState,
) -> Result<RadialFunction> {
    if state.v.len() != grid.len() {
        return Err(Error::GridMismatch("state does not match grid".into()));
    }
    let values = grid
        .nodes()
        .iter()
        .zip(&state.v)
        .map(|(&r, v)| match spec.variant {
            Variant::Thm1 => spec.p.eval(r) + v + state.c_v - (1.0 + state.a_v) * r.powi(4),
            Variant::Thm2 => v + state.c_v,
        })
        .collect();
    RadialFunction::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{QProfile, RadialPolynomial};

    #[test]
    fn stage_targets_are_geometric() {
        let cfg = SolverConfig::default();
        let t = cfg.stage_targets(8.0);
        assert_eq!(t.len(), 8);
        assert_eq!(t[0], 1.0);
        assert_eq!(t[7], 8.0);
        for w in t.windows(2) {
            assert!((w[1] / w[0] - 8f64.powf(1.0 / 7.0)).abs() < 1e-12);
        }
        let single = SolverConfig { continuation_steps: 1, ..cfg };
        assert_eq!(single.stage_targets(3.0), vec![3.0]);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig { damping: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { damping: 1.5, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { continuation_steps: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn assembly_rules() {
        let grid = std::sync::Arc::new(RadialGrid::new(5, 20.0, 64, 2.0).unwrap());
        let mut state = IterationState::initial(grid.len(), 1.0, 1.0);
        state.v = grid.nodes().iter().map(|r| -r * r).collect();
        state.c_v = 0.7;
        let spec2 = ProblemSpec::new(5, 1.0, QProfile::Constant { value: 1.0 }, RadialPolynomial::zero(), Variant::Thm2).unwrap();
        let u = assemble_solution(&spec2, &grid, &state, SolveStatus::Converged).unwrap();
        for (ui, vi) in u.values().iter().zip(&state.v) {
            assert_eq!(*ui, vi + 0.7);
        }
        let spec1 = ProblemSpec::new(5, 1.0, QProfile::Constant { value: 24.0 }, RadialPolynomial::zero(), Variant::Thm1).unwrap();
        let u = assemble_solution(&spec1, &grid, &state, SolveStatus::Converged).unwrap();
        assert_eq!(u.at_origin(), state.v[0] + state.c_v);
        assert!(matches!(
            assemble_solution(&spec1, &grid, &state, SolveStatus::BlowUp),
            Err(Error::NotConverged(_))
        ));
    }
}
