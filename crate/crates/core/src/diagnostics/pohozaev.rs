use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Discretization, IterationState, ProblemSpec, Variant};
use crate::radial::{radial_derivative, RadialFunction};
use crate::solver::{solve, SolveStatus, SolverConfig};

use super::report::run_invariant_suite;

pub const POHOZAEV_TOL: f64 = 5e-2;

/// `(κ/γₙ)(κ/γₙ - 2)`.
pub fn pohozaev_lhs(kappa: f64, gamma_n: f64) -> f64 {
    let a = kappa / gamma_n;
    a * (a - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|LHS - RHS| / (1 + |LHS|)`
    pub residual: f64,
    /// `r·∂_r K_poh ≤ 0` at every node carrying mass.
    pub k_nonincreasing: bool,
}

impl PohozaevReport {
    /// The obstruction: a non-increasing `K_poh` forces `RHS ≤ 0`, contradicting `LHS > 0`.
    pub fn contradiction(&self) -> bool {
        self.k_nonincreasing && self.lhs > 0.0
    }
}

/// Pohozaev balance for a state of the undamped variant in dimension 3 or 4.
///
/// With `f = Q e^{nu}`, `v_poh = (1/γₙ)∫ log(|y|/|x-y|) f dy`, `h = u - v_poh` and
/// `K_poh = Q e^{nh}`, solutions satisfy
/// `(κ/γₙ)(κ/γₙ - 2) = (2/(nγₙ))∫ (x·∇K_poh) e^{n v_poh} dx`.
/// Since `K_poh e^{n v_poh} = f`, the right side is evaluated as
/// `(2/(nγₙ))∫ r·∂_r(log K_poh)·f dx` with a finite-difference derivative.
pub fn pohozaev_residual(spec: &ProblemSpec, disc: &Discretization, state: &IterationState) -> Result<PohozaevReport> {
    if !(spec.n == 3 || spec.n == 4) {
        return Err(Error::Spec(format!("Pohozaev balance is only used for n in {{3, 4}}, got {}", spec.n)));
    }
    if spec.variant != Variant::Thm2 {
        return Err(Error::Spec("Pohozaev balance applies to the undamped variant".into()));
    }
    let grid = &disc.grid;
    let nf = spec.n as f64;
    let gamma = disc.consts.gamma_n;
    let log_q: Vec<f64> = grid.nodes().iter().map(|&r| spec.q.log_eval(r)).collect();
    let u: Vec<f64> = state.v.iter().map(|v| v + state.c_v).collect();
    let density: Vec<f64> = log_q.iter().zip(&u).map(|(lq, ui)| (lq + nf * ui).exp()).collect();
    if density.iter().any(|f| !f.is_finite()) {
        return Err(Error::Evaluation("density is not finite".into()));
    }
    let shift = disc.kernel.log_moment(&density);
    let v_poh: Vec<f64> = disc.kernel.apply_values(&density).iter().map(|p| p + shift).collect();
    let log_k: Vec<f64> = log_q
        .iter()
        .zip(u.iter().zip(&v_poh))
        .map(|(lq, (ui, vp))| lq + nf * (ui - vp))
        .collect();
    if log_k.iter().any(|x| !x.is_finite()) {
        return Err(Error::Evaluation("log K_poh is not finite on the grid".into()));
    }
    let dlog_k = radial_derivative(&RadialFunction::new(grid.clone(), log_k)?)?;
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(dlog_k.values())
        .zip(&density)
        .map(|((r, d), f)| r * d * f)
        .collect();
    let rhs = 2.0 / (nf * gamma) * grid.integrate(&integrand);
    let lhs = pohozaev_lhs(spec.kappa, gamma);
    let scale = dlog_k.values().iter().map(|d| d.abs()).fold(0.0, f64::max);
    let k_nonincreasing = dlog_k
        .values()
        .iter()
        .zip(&density)
        .all(|(d, f)| *f == 0.0 || *d <= 1e-9 * (1.0 + scale));
    Ok(PohozaevReport { lhs, rhs, residual: (lhs - rhs).abs() / (1.0 + lhs.abs()), k_nonincreasing })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub kappa: f64,
    pub kappa_over_lambda1: f64,
    pub status: SolveStatus,
    pub pohozaev_lhs: f64,
    pub pohozaev_rhs: f64,
    /// Final iterate has non-increasing `K_poh` while `LHS > 0`.
    pub sign_diagnostic: bool,
    /// Converged and every hard invariant passed.
    pub all_diagnostics_pass: bool,
    pub message: String,
}

/// Solves with `Q = δe^{-λr²}` and reports the termination status together with
/// the Pohozaev sign diagnostic on the final iterate.
pub fn nonexistence_probe(
    n: u32,
    delta: f64,
    lambda: f64,
    kappa: f64,
    disc: &Discretization,
    cfg: &SolverConfig,
) -> Result<ProbeReport> {
    use crate::operator::{QProfile, RadialPolynomial};
    let spec = ProblemSpec::new(
        n,
        kappa,
        QProfile::Gaussian { delta, lambda },
        RadialPolynomial::zero(),
        Variant::Thm2,
    )?;
    let result = solve(&spec, disc, cfg)?;
    let lhs = pohozaev_lhs(kappa, disc.consts.gamma_n);
    let (rhs, sign_diagnostic) = match pohozaev_residual(&spec, disc, &result.state) {
        Ok(p) => (p.rhs, p.contradiction()),
        Err(_) => (f64::NAN, false),
    };
    let report = run_invariant_suite(&spec, disc, &result);
    Ok(ProbeReport {
        kappa,
        kappa_over_lambda1: kappa / disc.consts.lambda1,
        status: result.status,
        pohozaev_lhs: lhs,
        pohozaev_rhs: rhs,
        sign_diagnostic,
        all_diagnostics_pass: result.status == SolveStatus::Converged && report.all_hard_pass,
        message: result.message,
    })
}
