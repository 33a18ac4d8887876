//! Spectral efficiency when the receiver also knows the interferers' fading.

use rand::Rng;

use super::exact::{Herm, MimoSampler};
use super::{EntropyBudget, EstimateWithError, GeometrySample, MIN_BATCHES};
use crate::error::{Error, Result};
use crate::seff::{c_mimo, MimoConfig};
use crate::specialfn::{integrate, QuadratureSpec, LOG2_E};

/// `log2 e ∫_0^∞ e^{-xμ}/(1+x) Π_k 1/(1 + x c_k) dx` for one geometry, with
/// `c_k` the interferer powers and `μ` the noise, both relative to the
/// serving power.
pub fn c_ub_realization(
    sample: &GeometrySample,
    noise_over_p: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(noise_over_p >= 0.0) {
        return Err(Error::invalid(format!(
            "noise_over_p = {noise_over_p} must be >= 0"
        )));
    }
    let c = sample.relative_interference();
    let mu = sample.relative_noise(noise_over_p);
    if c.is_empty() && mu == 0.0 {
        return Err(Error::DegenerateGeometry(
            "no interferers and no noise: the bound diverges".into(),
        ));
    }
    let f = |x: f64| {
        let log_prod: f64 = c.iter().map(|&ck| (x * ck).ln_1p()).sum();
        (-x * mu - x.ln_1p() - log_prod).exp()
    };
    Ok(LOG2_E * integrate(f, 0.0, f64::INFINITY, spec)?)
}

/// `E log2 det(I + (H0 H0†/N_t) V^{-1})` with `V` the conditional
/// interference-plus-noise covariance, by sampling. The equal-power Gaussian
/// value `C(ρ)` serves as control variate, as in the exact estimator.
pub fn c_ub_mimo<R: Rng + ?Sized>(
    sample: &GeometrySample,
    cfg: &MimoConfig,
    noise_over_p: f64,
    budget: &EntropyBudget,
    rng: &mut R,
) -> Result<EstimateWithError> {
    if budget.batches < MIN_BATCHES || budget.n_fading < budget.batches {
        return Err(Error::invalid(format!(
            "need {MIN_BATCHES} <= batches <= n_fading, got {budget:?}"
        )));
    }
    let sampler = MimoSampler::new(sample, cfg, noise_over_p)?;
    let singular = || Error::DegenerateGeometry("interference covariance is singular".into());
    let vbar = sampler.mean_power();
    let mean_cov = Herm::scaled_identity(cfg.n_r(), vbar);
    let mut out = Vec::with_capacity(budget.n_fading);
    for _ in 0..budget.n_fading {
        let d = sampler.draw(rng)?;
        let v = d.interference.cholesky().ok_or_else(singular)?;
        let t = d
            .signal
            .plus(&d.interference)
            .cholesky()
            .ok_or_else(singular)?;
        let g = d.signal.plus(&mean_cov).cholesky().ok_or_else(singular)?;
        let gauss = g.log_det - cfg.n_r() as f64 * vbar.ln();
        out.push((t.log_det - v.log_det - gauss) * LOG2_E);
    }
    let mut est = EstimateWithError::from_batches(&out, budget.batches);
    est.value += c_mimo(cfg, 1.0 / vbar);
    est.check_cap(budget.std_error_cap)
}
