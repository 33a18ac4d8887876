use crate::error::{Error, Result};
use crate::seff::curves::{mimo_weights, MimoConfig, SeCurve};
use crate::sirdist::{BranchMode, PathModel, SectorModel};
use crate::specialfn::{
    erf, gamma_star_series, gauss_2f1_complement, integrate, lower_gamma, QuadratureSpec, LOG2_E,
};

/// `E[g(ρ_S)]` over the local-average SIR distribution of `model`, sectorized by `sect`.
///
/// The lower tail is integrated in `u = 1/θ` and the power-law tail in
/// `u = θ^{-δ}`, so no range is truncated. Any constant segment carries no mass.
pub fn sir_expectation<G: Fn(f64) -> f64>(
    model: &PathModel,
    sect: &SectorModel,
    g: G,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let gs = |theta: f64| g(sect.from_unsectorized(theta.min(f64::MAX)));
    let s = model.s_star();
    let lower = integrate(
        |u: f64| gs(1.0 / u) * (-s) * (s * u).exp(),
        1.0 / model.lower_break(),
        f64::INFINITY,
        spec,
    )?;
    let middle = match model.mode() {
        BranchMode::FourBranch => {
            let mut err = None;
            let v = integrate(
                |t: f64| match model.sir_pdf(t) {
                    Ok(p) => gs(t) * p.density,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                0.5,
                1.0,
                spec,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            v
        }
        BranchMode::ThreeBranch => 0.0,
    };
    let inv_delta = 1.0 / model.delta();
    let tail = model.sinc_delta() * integrate(|u: f64| gs(u.powf(-inv_delta)), 0.0, 1.0, spec)?;
    Ok(lower + middle + tail)
}

/// Spatial average of `curve` over the (sectorized) SIR distribution, per sector.
pub fn mean_se(
    model: &PathModel,
    sect: &SectorModel,
    curve: &SeCurve,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let f = curve.evaluator();
    sir_expectation(model, sect, &f, spec)
}

/// Printed closed form of the 2x2 average at η = 4 built on the fitted 2x2 curve.
pub fn mean_se_2x2_closed_eta4() -> f64 {
    let r = 0.41f64.sqrt();
    0.26 + LOG2_E / std::f64::consts::PI.sqrt() * erf(1.0)
        + 5.6 / std::f64::consts::PI * (r * (std::f64::consts::PI - 2.0 * r.atan()) + 1.41f64.ln())
}

/// Average of the exact Rayleigh MIMO curve over the three-branch SIR
/// distribution: the triple-sum weights are exact and each `E_{q+1}` term
/// becomes a single integral in `γ`.
pub fn mean_se_general(cfg: &MimoConfig, model: &PathModel, spec: &QuadratureSpec) -> Result<f64> {
    let three = model.with_mode(BranchMode::ThreeBranch)?;
    let s = three.s_star();
    let d = three.lower_break();
    let delta = three.delta();
    let sinc = three.sinc_delta();
    let nt = cfg.n_t() as f64;
    let weights = mimo_weights(cfg);
    let mut total = 0.0;
    for (q, &w) in weights.iter().enumerate() {
        let power = q as f64 + 1.0;
        let mut err = None;
        let inner = integrate(
            |gamma: f64| {
                let x = gamma * nt;
                let lower = s / (s - x) * ((s - x) / d).exp();
                let tail = match incomplete_ratio(delta, x) {
                    Ok(v) => delta * sinc * v,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                };
                (lower + tail) * (-power * gamma.ln_1p()).exp()
            },
            0.0,
            f64::INFINITY,
            spec,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        total += w * inner;
    }
    Ok(total * LOG2_E)
}

// γ(δ, x)/x^δ, finite at x = 0 where it equals 1/δ
fn incomplete_ratio(delta: f64, x: f64) -> Result<f64> {
    if x <= 1.0 {
        gamma_star_series(delta, x)
    } else {
        Ok(lower_gamma(delta, x)? * x.powf(-delta))
    }
}

/// Average of the per-realization bound that treats interferer fading as
/// known: `log2 e ∫ dγ / 2F1(1, 1; 1-δ; γ/(1+γ))`.
///
/// Integrated in `w = 1/(1+γ)` with the hypergeometric evaluated from its
/// complement `w`, so the `z → 1` end uses the connection formula.
pub fn mean_se_cub(model: &PathModel, spec: &QuadratureSpec) -> Result<f64> {
    let delta = model.delta();
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta = {delta} outside (0, 1)")));
    }
    let mut err = None;
    let v = integrate(
        |w: f64| match gauss_2f1_complement(1.0, 1.0, 1.0 - delta, w) {
            Ok(f) => 1.0 / (w * (w * f)),
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0,
        spec,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(v * LOG2_E)
}
