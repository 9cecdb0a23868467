//! Finite-sample information-spectrum estimates and exact small-blocklength oracles.

mod estimate;
mod oracle;
mod sphere;

pub use estimate::{
    equivocation_entropy_gap, estimate_spectral_rates, EquivocationGap, SpectrumEstimate,
};
pub use oracle::{
    check_optimistic_coding_direction, optimal_henchman_code_oracle, CodingDirectionReport,
    OptimisticCodeResult, OracleMode, RateTrend,
};
pub use sphere::{sphere_cover_bound, SphereCover};
