//! Ergodic spectral-efficiency curves and their distribution over the network.
//!
//! A curve maps the local-average SIR `ρ` to the spectral efficiency a user
//! obtains once fading has been averaged out. Pushing the SIR distribution of
//! [`crate::sirdist`] through a curve gives the CDF of spectral efficiency,
//! its lower tail, a lognormal fit and the spatial average.

mod average;
mod curves;
mod distribution;

pub use average::{
    mean_se, mean_se_2x2_closed_eta4, mean_se_cub, mean_se_general, sir_expectation,
};
pub use curves::{
    c_mimo, c_mimo_2x2, c_mimo_2x2_approx, c_siso, c_siso_approx, rho_from_c, MimoConfig, SeCurve,
    MAX_ANTENNAS,
};
pub use distribution::{
    coverage_quantile, coverage_tail, inst_sir_cdf_eta4, inst_sir_quantile_eta4, lognormal_fit,
    se_cdf, se_quantile, CoverageTail, LognormalFit,
};
