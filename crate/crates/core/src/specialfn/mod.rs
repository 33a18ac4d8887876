//! Special functions and quadrature used by the analytic layer.
//!
//! Everything here is a pure function of its arguments. Gamma, log-gamma and
//! the positive-argument lower incomplete gamma are delegated to
//! `statrs`, erf to `libm`; the exponential integrals, hypergeometric functions, the
//! negative-argument incomplete gamma series and the adaptive quadrature
//! are implemented locally.

mod expint;
mod gamma;
mod hyper;
mod quad;

pub use expint::{exp_integral_en, exp_integral_en_scaled};
pub use gamma::{gamma_star_series, lower_gamma, lower_gamma_continued};
pub use hyper::{gauss_2f1, gauss_2f1_series, kummer_1f1};
pub use quad::{integrate, integrate_with_error, QuadratureResult, QuadratureSpec};

pub(crate) use hyper::gauss_2f1_complement;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// log2(e), the nats-to-bits factor.
pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Normalized sinc, `sin(pi d) / (pi d)` with `sinc_norm(0) = 1`.
pub fn sinc_norm(d: f64) -> f64 {
    if d.abs() < 1e-8 {
        let x = std::f64::consts::PI * d;
        1.0 - x * x / 6.0
    } else {
        let x = std::f64::consts::PI * d;
        x.sin() / x
    }
}

pub fn gamma_fn(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `1/Gamma(x)`, exactly zero at the poles.
pub(crate) fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma_fn(x)
    }
}

/// `ln(k!)` for small integers, exact table up to 20 then log-gamma.
pub(crate) fn ln_factorial(k: usize) -> f64 {
    if k <= 20 {
        (1..=k).map(|i| i as f64).product::<f64>().ln()
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}
