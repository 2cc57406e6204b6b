//! Independent checks on the discretization and on solver output.

mod asymptotic;
mod pohozaev;
mod report;
mod spherical;

pub use asymptotic::{asymptotic_fit, depolynomialized, fit_log_profile, AsymptoticFit, MIN_FIT_NODES};
pub use pohozaev::{nonexistence_probe, pohozaev_lhs, pohozaev_residual, PohozaevReport, ProbeReport, POHOZAEV_TOL};
pub use report::{evaluate, run_invariant_suite, DiagnosticsReport, InvariantCheck, SCHEMA_VERSION};
pub use spherical::{spherical_oracle, SphericalOracleReport, SphericalSolution};
