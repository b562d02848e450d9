//! Machine-readable runs: the verification suite and σ-sweeps.

mod sweep;
mod verify;

pub use sweep::{
    field_file_name, optimal_competitor, resolve_c1, run_sigma, run_sweep, save_field, write_sweep_outputs,
    GridPolicy, SweepConfig, SweepReport, SweepRow, C1_RADII, CSV_HEADER, MIN_POINTS_PER_RHO, SIGMA_MAX,
};
pub use verify::{
    anisotropy_disc, boundary_identity, competitor_degree, dirichlet_disc, dmi_ball, gradient_checks, run_verify,
    Check, VerifyConfig, VerifyReport, GRADIENT_SEED,
};
