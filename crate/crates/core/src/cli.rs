//! Configuration files and the three commands: `solve`, `verify`, `probe`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{lambda1, sphere_area, DimensionalConstants};
use crate::diagnostics::{
    depolynomialized, evaluate, fit_log_profile, nonexistence_probe, pohozaev_lhs, run_invariant_suite,
    spherical_oracle, DiagnosticsReport, SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::kernel::{ring_kernel_n3_closed_form, KernelOperator, RingKernel};
use crate::operator::{Discretization, ProblemSpec, QProfile, RadialPolynomial, Variant};
use crate::radial::{radial_laplacian, RadialFunction, RadialGrid};
use crate::solver::{solve, SolveResult, SolveStatus, SolverConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_BAD_CONFIG: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub m: usize,
    pub r_max: f64,
    pub grading: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { m: 2048, r_max: 100.0, grading: 2.0 }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 64 {
            return Err(Error::Config(format!("grid.m must be at least 64, got {}", self.m)));
        }
        if !(self.r_max >= 20.0 && self.r_max.is_finite()) {
            return Err(Error::Config(format!("grid.r_max must be at least 20, got {}", self.r_max)));
        }
        if !(self.grading > 0.0 && self.grading.is_finite()) {
            return Err(Error::Config(format!("grid.grading must be positive, got {}", self.grading)));
        }
        Ok(())
    }
}

/// What a configuration file is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Solve,
    Probe,
}

/// Configuration of one `solve` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    /// Target curvature; give either this or `kappa_over_lambda1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_over_lambda1: Option<f64>,
    pub variant: Variant,
    /// Coefficients of `P(r) = Σ a_j r^{2j}`.
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_cache: Option<PathBuf>,
    #[serde(default)]
    pub mode: Mode,
    pub q: QProfile,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn resolve_kappa(n: u32, kappa: Option<f64>, ratio: Option<f64>) -> Result<f64> {
    match (kappa, ratio) {
        (Some(k), None) => Ok(k),
        (None, Some(r)) => Ok(r * lambda1(n).map_err(|e| Error::Config(e.to_string()))?),
        (Some(_), Some(_)) => Err(Error::Config("give kappa or kappa_over_lambda1, not both".into())),
        (None, None) => Err(Error::Config("kappa (or kappa_over_lambda1) is required".into())),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn kappa_value(&self) -> Result<f64> {
        resolve_kappa(self.n, self.kappa, self.kappa_over_lambda1)
    }

    /// Validates everything that can be checked without assembling the kernel.
    pub fn problem(&self) -> Result<ProblemSpec> {
        if self.mode != Mode::Solve {
            return Err(Error::Config("this configuration is not in solve mode".into()));
        }
        self.grid.validate()?;
        self.solver.validate()?;
        ProblemSpec::new(
            self.n,
            self.kappa_value()?,
            self.q.clone(),
            RadialPolynomial::new(self.p.clone()),
            self.variant,
        )
    }
}

/// Configuration of a `probe` sweep with `Q = δe^{-λr²}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub n: u32,
    pub delta: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kappa: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kappa_over_lambda1: Vec<f64>,
    #[serde(default = "probe_mode")]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn probe_mode() -> Mode {
    Mode::Probe
}

impl ProbeConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn kappas(&self) -> Result<Vec<f64>> {
        if self.mode != Mode::Probe {
            return Err(Error::Config("this configuration is not in probe mode".into()));
        }
        if !(self.n == 3 || self.n == 4) {
            return Err(Error::Config(format!("probe supports n in {{3, 4}}, got {}", self.n)));
        }
        self.grid.validate()?;
        self.solver.validate()?;
        let l1 = lambda1(self.n)?;
        let mut kappas = self.kappa.clone();
        kappas.extend(self.kappa_over_lambda1.iter().map(|r| r * l1));
        if kappas.is_empty() {
            return Err(Error::Config("the kappa list is empty".into()));
        }
        if kappas.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::Config("every kappa must be positive".into()));
        }
        // Validate δ, λ through the problem constructor.
        ProblemSpec::new(
            self.n,
            kappas[0],
            QProfile::Gaussian { delta: self.delta, lambda: self.lambda },
            RadialPolynomial::zero(),
            Variant::Thm2,
        )?;
        Ok(kappas)
    }
}

/// Loads the kernel from `cache` when present and matching, otherwise assembles
/// it (and writes the cache if a path was given).
pub fn discretization(n: u32, grid_cfg: &GridConfig, cache: Option<&Path>) -> Result<Discretization> {
    let consts = DimensionalConstants::new(n)?;
    let grid = Arc::new(RadialGrid::new(n, grid_cfg.r_max, grid_cfg.m, grid_cfg.grading)?);
    if let Some(path) = cache {
        if path.exists() {
            match KernelOperator::load(path, grid.clone(), &consts) {
                Ok(kernel) => return Ok(Discretization { consts, grid, kernel }),
                Err(e) => eprintln!("kernel cache {} not used: {e}", path.display()),
            }
        }
    }
    let kernel = KernelOperator::assemble(grid.clone(), &consts)?;
    if let Some(path) = cache {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        kernel.save(path)?;
    }
    Ok(Discretization { consts, grid, kernel })
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    schema_version: u32,
    config: &'a RunConfig,
    solve: &'a SolveResult,
    diagnostics: &'a DiagnosticsReport,
}

/// Outcome of a solve run, for callers that want more than the exit code.
#[derive(Debug)]
pub struct SolveOutcome {
    pub result: SolveResult,
    pub report: DiagnosticsReport,
    pub out_dir: PathBuf,
}

impl SolveOutcome {
    pub fn exit_code(&self) -> u8 {
        if self.result.status == SolveStatus::Converged && self.report.all_hard_pass {
            EXIT_OK
        } else {
            EXIT_FAILED
        }
    }
}

/// Solve, diagnose and write `solution.csv`, `report.json`, `plotdata.csv`.
/// Configuration problems are returned as errors; solver failures are not.
pub fn run_solve(config: &RunConfig, out: Option<&Path>, cache: Option<&Path>) -> Result<SolveOutcome> {
    let spec = config.problem()?;
    let out_dir = out.map(Path::to_path_buf).unwrap_or_else(|| config.out_dir.clone());
    let cache = cache.or(config.kernel_cache.as_deref());
    let disc = discretization(spec.n, &config.grid, cache)?;
    // Grid-level hypotheses (tabulated coverage, finiteness of Q·e^{nP}).
    spec.log_base_on(&disc.grid)?;
    let result = solve(&spec, &disc, &config.solver)?;
    let report = run_invariant_suite(&spec, &disc, &result);

    fs::create_dir_all(&out_dir)?;
    let json = serde_json::to_string_pretty(&RunReport {
        schema_version: SCHEMA_VERSION,
        config,
        solve: &result,
        diagnostics: &report,
    })
    .map_err(|e| Error::Evaluation(e.to_string()))?;
    fs::write(out_dir.join("report.json"), json + "\n")?;

    if let Some(u) = &result.solution {
        write_solution_csv(&out_dir.join("solution.csv"), u, &result.state.v)?;
    }
    if result.state.v.iter().all(|x| x.is_finite()) {
        write_plotdata(&out_dir.join("plotdata.csv"), &spec, &disc, &result, &report)?;
    }
    Ok(SolveOutcome { result, report, out_dir })
}

fn write_solution_csv(path: &Path, u: &RadialFunction, v: &[f64]) -> Result<()> {
    let v_fn = RadialFunction::new(u.grid().clone(), v.to_vec())?;
    let lap = radial_laplacian(&v_fn)?;
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "r,u,v,lap_v")?;
    for (i, r) in u.grid().nodes().iter().enumerate() {
        writeln!(out, "{r:.16e},{:.16e},{:.16e},{:.16e}", u.values()[i], v[i], lap.values()[i])?;
    }
    out.flush()?;
    Ok(())
}

fn write_plotdata(
    path: &Path,
    spec: &ProblemSpec,
    disc: &Discretization,
    result: &SolveResult,
    report: &DiagnosticsReport,
) -> Result<()> {
    let g = depolynomialized(spec, &disc.grid, &result.state);
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "r,log_r,g,fit")?;
    for (r, gi) in disc.grid.nodes().iter().zip(&g).skip(1) {
        let lr = r.ln();
        let fit = report.asymptotic.map_or(f64::NAN, |f| f.intercept + f.slope * lr);
        writeln!(out, "{r:.16e},{lr:.16e},{gi:.16e},{fit:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

/// `solve` command: exit 0 iff converged with every hard invariant passing,
/// 1 on solver or invariant failure, 2 on a bad configuration.
pub fn cmd_solve(config_path: &Path, out: Option<&Path>, cache: Option<&Path>) -> u8 {
    let config = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_BAD_CONFIG;
        }
    };
    match run_solve(&config, out, cache) {
        Ok(outcome) => {
            let r = &outcome.result;
            println!(
                "status: {} after {} iterations (residual {:.3e})",
                r.status,
                r.iterations(),
                r.state.residual
            );
            println!("{}", r.message);
            for c in outcome.report.checks.iter().filter(|c| c.hard && !c.passed) {
                println!("failed invariant: {} (value {:e}, threshold {:e})", c.name, c.value, c.threshold);
            }
            println!("wrote {}", outcome.out_dir.display());
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_BAD_CONFIG
        }
    }
}

/// One row of the verification table.
#[derive(Debug, Clone)]
pub struct VerifyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, result: Result<(bool, String)>) -> VerifyCheck {
    match result {
        Ok((passed, detail)) => VerifyCheck { name, passed, detail },
        Err(e) => VerifyCheck { name, passed: false, detail: format!("error: {e}") },
    }
}

/// Runs the oracle suite. `fast` uses coarser grids; `inject_kernel_fault`
/// corrupts one kernel entry before the potential checks.
pub fn verify_checks(fast: bool, inject_kernel_fault: bool) -> Vec<VerifyCheck> {
    let mut checks = Vec::new();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let pi = std::f64::consts::PI;

    checks.push(outcome("constants.lambda1_closed_forms", (|| {
        let cases = [(3, 4.0 * pi * pi), (4, 16.0 * pi * pi), (5, 24.0 * pi.powi(3)), (6, 128.0 * pi.powi(3))];
        let worst = cases.iter().map(|&(n, v)| Ok(rel(lambda1(n)?, v))).collect::<Result<Vec<_>>>()?;
        let worst = worst.into_iter().fold(0.0, f64::max);
        Ok((worst <= 1e-14, format!("max rel error {worst:.2e}")))
    })()));
    checks.push(outcome("constants.gamma_half_lambda", (|| {
        let ok = (3..=12).map(DimensionalConstants::new).collect::<Result<Vec<_>>>()?
            .iter()
            .all(|c| c.gamma_n == c.lambda1 / 2.0);
        Ok((ok, "gamma_n = lambda1/2 bitwise for n = 3..12".into()))
    })()));
    checks.push(outcome("constants.sphere_recurrence", (|| {
        let mut worst: f64 = 0.0;
        for n in 3..=12u32 {
            let ratio = sphere_area(n)? / sphere_area(n - 1)?;
            let g = |m: u32| crate::constants::gamma_half_integer(m);
            worst = worst.max(rel(ratio, pi.sqrt() * g(n)? / g(n + 1)?));
        }
        Ok((worst <= 1e-14, format!("max rel error {worst:.2e}")))
    })()));
    checks.push(outcome("kernel.n3_closed_form_vs_quadrature", (|| {
        let k = RingKernel::new(3)?;
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            for j in 0..100 {
                let r = 0.05 + 0.1 * i as f64;
                let s = 0.05 + 0.1 * j as f64;
                worst = worst.max((k.eval_quadrature(r, s)? - ring_kernel_n3_closed_form(r, s)?).abs());
            }
        }
        Ok((worst <= 1e-10, format!("max abs error {worst:.2e} on 100x100 pairs")))
    })()));
    checks.push(outcome("kernel.symmetry_n5", (|| {
        let k = RingKernel::new(5)?;
        let mut worst: f64 = 0.0;
        for i in 1..=40 {
            for j in 1..=40 {
                let (r, s) = (0.173 * i as f64, 0.291 * j as f64);
                worst = worst.max((k.eval(r, s)? - k.eval(s, r)?).abs());
            }
        }
        Ok((worst <= 1e-12, format!("max asymmetry {worst:.2e}")))
    })()));
    checks.push(outcome("kernel.far_field_bound", (|| {
        let mut worst: f64 = 0.0;
        for n in [3u32, 4, 5, 6] {
            let k = RingKernel::new(n)?;
            for rho in [1e-4, 1e-3, 1e-2, 0.05, 0.1] {
                for big in [0.5, 3.0, 40.0] {
                    let c = (k.eval(rho * big, big)? + f64::ln(big)).abs() / (rho * rho);
                    worst = worst.max(c);
                }
            }
        }
        Ok((worst <= 2.0, format!("max |k + log max|/ratio^2 = {worst:.3}")))
    })()));
    checks.push(outcome("radial.ball_volume", (|| {
        let g = RadialGrid::new(3, 10.0, 64, 2.0)?;
        let err = rel(g.integrate(&vec![1.0; g.len()]), 4.0 * pi * 1000.0 / 3.0);
        Ok((err <= 1e-12, format!("rel error {err:.2e}")))
    })()));
    checks.push(outcome("radial.gaussian_moment", (|| {
        let g = RadialGrid::new(3, 10.0, 2048, 2.0)?;
        let f: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        let err = (g.integrate(&f) - pi.powf(1.5)).abs();
        Ok((err <= 1e-8, format!("abs error {err:.2e}")))
    })()));

    let m = if fast { 512 } else { 2048 };
    for n in [3u32, 5] {
        let oracle = (|| {
            let mut disc = Discretization::assemble(n, 100.0, m, 2.0)?;
            if inject_kernel_fault {
                let j = disc.grid.len() / 3;
                let v = disc.kernel.entry(j, j);
                disc.kernel.inject_fault(j, j, v * 1e3 + 1.0);
            }
            spherical_oracle(&disc.consts, &disc.kernel)
        })();
        let names: [&'static str; 3] = if n == 3 {
            ["spherical.n3_mass", "spherical.n3_potential", "spherical.n3_lap0"]
        } else {
            ["spherical.n5_mass", "spherical.n5_potential", "spherical.n5_lap0"]
        };
        match oracle {
            Ok(rep) => checks.extend([
                VerifyCheck {
                    name: names[0],
                    passed: rep.mass_error <= 1e-6,
                    detail: format!("rel mass error {:.2e}", rep.mass_error),
                },
                VerifyCheck {
                    name: names[1],
                    passed: rep.potential_deviation <= 1e-3,
                    detail: format!("sup deviation {:.2e}", rep.potential_deviation),
                },
                VerifyCheck {
                    name: names[2],
                    passed: rep.lap0_error <= 1e-4,
                    detail: format!("lap0 = {:.10} (exact {})", rep.lap0, -2 * n as i32),
                },
            ]),
            Err(e) => checks.extend(names.map(|name| VerifyCheck {
                name,
                passed: false,
                detail: format!("error: {e}"),
            })),
        }
    }

    checks.push(outcome("diagnostics.synthetic_log_fit", (|| {
        let g = RadialGrid::new(3, 100.0, 512, 2.0)?;
        let vals: Vec<f64> = g.nodes().iter().map(|&r| 0.5 - 3.0 * r.max(1e-300).ln()).collect();
        let fit = fit_log_profile(&g, &vals, 25.0, 50.0)?;
        let ok = (fit.slope + 3.0).abs() <= 1e-10 && fit.drift <= 1e-10;
        Ok((ok, format!("slope {:.12}, drift {:.1e}", fit.slope, fit.drift)))
    })()));
    checks.push(outcome("diagnostics.pohozaev_lhs", (|| {
        let g = DimensionalConstants::new(3)?.gamma_n;
        let l1 = 2.0 * g;
        let ok = pohozaev_lhs(l1, g) == 0.0 && pohozaev_lhs(0.5 * l1, g) == -1.0 && pohozaev_lhs(1.5 * l1, g) == 3.0;
        Ok((ok, "LHS at kappa/Lambda1 = 1, 0.5, 1.5 is 0, -1, 3".into()))
    })()));

    // Invariant suite on a small converged solve, then on corrupted copies of it.
    let injected = (|| -> Result<(VerifyCheck, VerifyCheck, VerifyCheck)> {
        let disc = Discretization::assemble(5, 100.0, 512, 2.0)?;
        let spec = ProblemSpec::new(
            5,
            0.5 * disc.consts.lambda1,
            QProfile::Constant { value: 24.0 },
            RadialPolynomial::zero(),
            Variant::Thm1,
        )?;
        let result = solve(&spec, &disc, &SolverConfig::default())?;
        let clean = run_invariant_suite(&spec, &disc, &result);
        let mut shifted = result.state.clone();
        shifted.v.iter_mut().for_each(|v| *v += 1.0);
        let stale = evaluate(&spec, &disc, &shifted, result.status);
        let mut flipped = result.state.clone();
        flipped.d0 = 1.0;
        let positive = evaluate(&spec, &disc, &flipped, result.status);
        let caught = |r: &DiagnosticsReport, name: &str| {
            r.check(name).map(|c| !c.passed).unwrap_or(false) && !r.all_hard_pass
        };
        Ok((
            VerifyCheck {
                name: "suite.clean_solve_passes",
                passed: clean.all_hard_pass,
                detail: format!("{} after {} iterations", result.status, result.iterations()),
            },
            VerifyCheck {
                name: "suite.catches_stale_normalization",
                passed: caught(&stale, "normalization"),
                detail: format!("normalization error {:.2e}", stale.normalization_error),
            },
            VerifyCheck {
                name: "suite.catches_positive_d0",
                passed: caught(&positive, "d0_negative"),
                detail: "d0 = +1".into(),
            },
        ))
    })();
    match injected {
        Ok((a, b, c)) => checks.extend([a, b, c]),
        Err(e) => {
            for name in ["suite.clean_solve_passes", "suite.catches_stale_normalization", "suite.catches_positive_d0"] {
                checks.push(VerifyCheck { name, passed: false, detail: format!("error: {e}") });
            }
        }
    }
    checks
}

/// `verify` command: prints the table, exit 0 iff every check passes.
pub fn cmd_verify(fast: bool, inject_kernel_fault: bool) -> u8 {
    let checks = verify_checks(fast, inject_kernel_fault);
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        println!("{:<width$}  {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", checks.len(), failed);
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

pub const PROBE_COLUMNS: [&str; 5] = ["kappa", "status", "pohozaev_lhs", "pohozaev_rhs", "sign_diagnostic"];

/// Runs the sweep; rows come back in the order of the κ list.
pub fn run_probe(config: &ProbeConfig, cache: Option<&Path>) -> Result<Vec<crate::diagnostics::ProbeReport>> {
    let kappas = config.kappas()?;
    let disc = discretization(config.n, &config.grid, cache)?;
    kappas
        .par_iter()
        .map(|&k| nonexistence_probe(config.n, config.delta, config.lambda, k, &disc, &config.solver))
        .collect()
}

/// `probe` command: writes `probe.csv`; exit 0 unless the configuration is bad.
pub fn cmd_probe(config_path: &Path, out: Option<&Path>) -> u8 {
    let run = || -> Result<PathBuf> {
        let config = ProbeConfig::load(config_path)?;
        let out_dir = out
            .map(Path::to_path_buf)
            .or_else(|| config.out_dir.clone())
            .ok_or_else(|| Error::Config("no output directory given".into()))?;
        let rows = run_probe(&config, None)?;
        fs::create_dir_all(&out_dir)?;
        let path = out_dir.join("probe.csv");
        let mut file = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(file, "{}", PROBE_COLUMNS.join(","))?;
        for row in &rows {
            writeln!(
                file,
                "{:.16e},{},{:.16e},{:.16e},{}",
                row.kappa, row.status, row.pohozaev_lhs, row.pohozaev_rhs, row.sign_diagnostic
            )?;
            println!(
                "kappa/Lambda1 = {:.4}: {} (Pohozaev LHS {:.4e}, RHS {:.4e}, contradiction {})",
                row.kappa_over_lambda1, row.status, row.pohozaev_lhs, row.pohozaev_rhs, row.sign_diagnostic
            );
        }
        file.flush()?;
        Ok(path)
    };
    match run() {
        Ok(path) => {
            println!("wrote {}", path.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_BAD_CONFIG
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
n = 5
kappa_over_lambda1 = 1.0
variant = "thm1"

[q]
kind = "constant"
value = 24.0
"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.mode, Mode::Solve);
        assert!((c.kappa_value().unwrap() - lambda1(5).unwrap()).abs() < 1e-12);
        assert!(c.problem().is_ok());
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::from_toml(EXAMPLE).unwrap();
        c.kernel_cache = Some("cache/k5.bin".into());
        c.p = vec![0.0, 0.25];
        let back = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_configs() {
        let n4 = EXAMPLE.replace("n = 5", "n = 4");
        assert!(RunConfig::from_toml(&n4).unwrap().problem().is_err());
        let both = EXAMPLE.replace("variant", "kappa = 3.0\nvariant");
        assert!(RunConfig::from_toml(&both).unwrap().problem().is_err());
        assert!(RunConfig::from_toml(&EXAMPLE.replace("n = 5", "n = 5\nbogus = 1")).is_err());
        let short = format!("{EXAMPLE}\n[grid]\nr_max = 10.0\n");
        assert!(RunConfig::from_toml(&short).unwrap().problem().is_err());
    }
}
