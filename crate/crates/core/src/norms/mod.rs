//! Lp, dyadic product BMO and exponential Orlicz norms of the discrepancy function
//! and of functions given by Haar coefficients.

mod bmo;
mod cww;
mod function;
mod lp;
mod orlicz;
mod report;

pub use bmo::{bmo_proxy, CandidateFamily};
pub use cww::{cww_check, littlewood_paley_ratios, CwwReport, LittlewoodPaleyRatio};
pub use function::{Constant, DiscrepancyFunction, GridFunction, Integrand, Scaled};
pub use lp::{lp_norm_cells, lp_norm_estimate, lp_norm_exact};
pub(crate) use lp::{stratified_mean, stratified_values};
pub use orlicz::{
    interpolation_check, orlicz_norm_direct, orlicz_norm_proxy, InterpolationCheck, OrliczSpec, QuadratureConfig,
    DEFAULT_P_GRID,
};
pub use report::{Method, NormReport};
