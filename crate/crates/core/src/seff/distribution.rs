use crate::error::{Error, Result};
use crate::seff::average::sir_expectation;
use crate::seff::curves::SeCurve;
use crate::sirdist::{sector_sir_cdf, PathModel, SectorModel};
use crate::specialfn::QuadratureSpec;

/// Fraction of locations whose ergodic spectral efficiency is below `gamma`.
pub fn se_cdf(model: &PathModel, sect: &SectorModel, curve: &SeCurve, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::domain(
            "se_cdf",
            format!("gamma = {gamma} must be >= 0"),
        ));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    if let Some(cap) = sect.cap() {
        if gamma >= curve.eval(cap) {
            return Ok(1.0);
        }
    }
    let rho = curve.inverse(gamma)?;
    Ok(sector_sir_cdf(model, sect, rho))
}

/// Smallest `gamma` with `se_cdf >= p`, by bisection on the SIR quantile.
pub fn se_quantile(model: &PathModel, sect: &SectorModel, curve: &SeCurve, p: f64) -> Result<f64> {
    let theta = crate::sirdist::sir_quantile(model, sect, p)?;
    Ok(curve.eval(theta))
}

const TAIL_FACTOR: f64 = 1.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageTail {
    pub probability: f64,
    /// False when the value exceeds the constant-segment level, beyond which
    /// the exponential tail form does not apply.
    pub within_validity: bool,
}

/// Lower-tail approximation `e^{1.15 s* N_r / γ}` of the spectral-efficiency CDF.
pub fn coverage_tail(model: &PathModel, n_r: usize, gamma: f64) -> Result<CoverageTail> {
    if n_r == 0 {
        return Err(Error::invalid("n_r must be >= 1"));
    }
    if !(gamma > 0.0) {
        return Err(Error::domain(
            "coverage_tail",
            format!("gamma = {gamma} must be > 0"),
        ));
    }
    let probability = (TAIL_FACTOR * model.s_star() * n_r as f64 / gamma).exp();
    Ok(CoverageTail {
        probability,
        within_validity: probability <= model.a_delta(),
    })
}

/// Spectral efficiency achieved on a share `1 - xi` of the network, from the
/// inverted tail: `1.15 s* N_r / ln ξ`.
pub fn coverage_quantile(model: &PathModel, n_r: usize, xi: f64) -> Result<f64> {
    if n_r == 0 {
        return Err(Error::invalid("n_r must be >= 1"));
    }
    if !(xi > 0.0 && xi <= model.a_delta()) {
        return Err(Error::domain(
            "coverage_quantile",
            format!("xi = {xi} outside (0, {}]", model.a_delta()),
        ));
    }
    Ok(TAIL_FACTOR * model.s_star() * n_r as f64 / xi.ln())
}

/// Instantaneous-SIR CDF with Rayleigh fading at η = 4: `1 - 1/(1 + √θ atan √θ)`.
pub fn inst_sir_cdf_eta4(theta: f64) -> f64 {
    if !(theta > 0.0) {
        return 0.0;
    }
    let r = theta.sqrt();
    let v = r * r.atan();
    v / (1.0 + v)
}

/// Inverse of [`inst_sir_cdf_eta4`].
pub fn inst_sir_quantile_eta4(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(
            "inst_sir_quantile_eta4",
            format!("p = {p} outside (0, 1)"),
        ));
    }
    // √θ atan √θ = p/(1-p) is increasing in θ
    let target = p / (1.0 - p);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi.sqrt() * hi.sqrt().atan() < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if mid.sqrt() * mid.sqrt().atan() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gaussian fit to the natural log of the spectral efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalFit {
    pub mu: f64,
    pub sigma2: f64,
}

impl LognormalFit {
    pub fn cdf(&self, gamma: f64) -> f64 {
        if !(gamma > 0.0) {
            return 0.0;
        }
        let z = (gamma.ln() - self.mu) / (2.0 * self.sigma2).sqrt();
        0.5 * libm::erfc(-z)
    }
}

pub fn lognormal_fit(
    model: &PathModel,
    sect: &SectorModel,
    curve: &SeCurve,
    spec: &QuadratureSpec,
) -> Result<LognormalFit> {
    let f = curve.evaluator();
    let mu = sir_expectation(model, sect, |t| f(t).ln(), spec)?;
    let second = sir_expectation(model, sect, |t| (f(t).ln() - mu).powi(2), spec)?;
    if !mu.is_finite() || !second.is_finite() {
        return Err(Error::domain(
            "lognormal_fit",
            "curve not positive on the support",
        ));
    }
    Ok(LognormalFit {
        mu,
        sigma2: second.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sirdist::BranchMode;
    use crate::specialfn::LOG2_E;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn eta4() -> PathModel {
        PathModel::new(4.0, BranchMode::FourBranch).unwrap()
    }

    #[test]
    fn se_cdf_anchors() {
        let m = eta4();
        let one = SectorModel::unsectorized();
        assert_eq!(se_cdf(&m, &one, &SeCurve::SisoApprox, 0.0).unwrap(), 0.0);
        assert!(se_cdf(&m, &one, &SeCurve::SisoApprox, -1.0).is_err());
        let printed = 1.0 - 2.0 / PI * (0.82 / (0.6f64.exp() - 1.0)).sqrt();
        let got = se_cdf(&m, &one, &SeCurve::SisoApprox, 0.84).unwrap();
        assert_relative_eq!(got, printed, max_relative = 1e-12);
        assert!((got - 0.3642).abs() < 1e-4);
    }

    #[test]
    fn se_cdf_reaches_one_at_sector_cap() {
        let m = eta4();
        let s3 = SectorModel::from_db(3, 20.0).unwrap();
        for curve in [SeCurve::SisoExact, SeCurve::mimo(2, 2).unwrap()] {
            let cap = curve.eval(s3.cap().unwrap());
            assert_eq!(se_cdf(&m, &s3, &curve, cap).unwrap(), 1.0);
            let mut prev = 0.0;
            for i in 1..=400 {
                let g = cap * i as f64 / 400.0;
                let f = se_cdf(&m, &s3, &curve, g).unwrap();
                assert!(f >= prev - 1e-12);
                prev = f;
            }
            assert_eq!(prev, 1.0);
        }
    }

    #[test]
    fn tail_forms() {
        let m = eta4();
        // 1.15 s* is close to -1 at η = 4
        for &g in &[0.1, 0.2, 0.3] {
            let t = coverage_tail(&m, 1, g).unwrap().probability;
            assert_relative_eq!(t.ln(), -1.0 / g, max_relative = 0.02);
        }
        let t = coverage_tail(&m, 1, 0.217).unwrap();
        assert!((t.probability - 0.01).abs() < 2e-3 && t.within_validity);
        assert!(!coverage_tail(&m, 1, 3.0).unwrap().within_validity);
        let a = coverage_tail(&m, 2, 0.4).unwrap().probability;
        let b = coverage_tail(&m, 1, 0.2).unwrap().probability;
        assert_relative_eq!(a, b, max_relative = 1e-14);
        assert!(coverage_tail(&m, 0, 0.2).is_err());
    }

    #[test]
    fn tail_tracks_approximate_cdf_on_log_scale() {
        let m = eta4();
        let one = SectorModel::unsectorized();
        for i in 1..=20 {
            let g = 0.01 * i as f64;
            let tail = coverage_tail(&m, 1, g).unwrap().probability.ln();
            let cdf = se_cdf(&m, &one, &SeCurve::SisoApprox, g).unwrap().ln();
            assert!(
                (tail - cdf).abs() <= 0.1 * cdf.abs(),
                "gamma {g}: {tail} vs {cdf}"
            );
        }
    }

    #[test]
    fn quantile_forms() {
        let m = eta4();
        let q = coverage_quantile(&m, 1, 0.01).unwrap();
        assert_relative_eq!(q, 1.15 * m.s_star() / 0.01f64.ln(), max_relative = 1e-14);
        assert!((q - 1.0 / 100f64.ln()).abs() < 5e-3, "{q}");
        assert_relative_eq!(
            coverage_quantile(&m, 2, 0.01).unwrap(),
            2.0 * q,
            max_relative = 1e-14
        );
        assert!(coverage_quantile(&m, 1, 0.2).is_err());
        assert!(coverage_quantile(&m, 1, 0.0).is_err());
    }

    #[test]
    fn exact_quantile_inverts_cdf() {
        let m = eta4();
        let one = SectorModel::unsectorized();
        let g = se_quantile(&m, &one, &SeCurve::SisoExact, 0.01).unwrap();
        assert_relative_eq!(
            se_cdf(&m, &one, &SeCurve::SisoExact, g).unwrap(),
            0.01,
            max_relative = 1e-8
        );
    }

    #[test]
    fn instantaneous_sir() {
        assert_eq!(inst_sir_cdf_eta4(0.0), 0.0);
        for &t in &[1e-4, 1e-6] {
            assert_relative_eq!(inst_sir_cdf_eta4(t) / t, 1.0, max_relative = 10.0 * t);
        }
        let theta = inst_sir_quantile_eta4(0.01).unwrap();
        assert_relative_eq!(inst_sir_cdf_eta4(theta), 0.01, max_relative = 1e-12);
        let se = (1.0 + theta).log2();
        assert!((se - 0.014).abs() < 1e-3, "{se}");
        assert!(inst_sir_quantile_eta4(1.0).is_err());
    }

    #[test]
    fn lognormal_constant_curve() {
        let m = eta4();
        let c0 = 2.5;
        let fit = lognormal_fit(
            &m,
            &SectorModel::unsectorized(),
            &SeCurve::custom("flat", move |_| c0),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_relative_eq!(fit.mu, c0.ln(), max_relative = 1e-7);
        assert!(fit.sigma2.abs() < 1e-12);
    }

    #[test]
    fn lognormal_mimo_eta4() {
        let m = eta4();
        let fit = lognormal_fit(
            &m,
            &SectorModel::unsectorized(),
            &SeCurve::mimo(2, 2).unwrap(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((fit.mu - 0.92).abs() <= 0.02, "{fit:?}");
        assert!((fit.sigma2 - 0.80).abs() <= 0.03, "{fit:?}");
        assert_relative_eq!(fit.cdf(fit.mu.exp()), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn low_snr_slope_of_siso_curve() {
        let rho = 1e-4;
        assert!((SeCurve::SisoExact.eval(rho) / rho - LOG2_E).abs() <= 0.05 * LOG2_E);
    }
}
