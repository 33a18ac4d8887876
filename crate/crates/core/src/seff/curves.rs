use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::specialfn::{exp_integral_en_scaled, ln_factorial, LOG2_E};

/// Largest antenna count per side accepted by [`MimoConfig`].
pub const MAX_ANTENNAS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MimoConfig {
    n_t: usize,
    n_r: usize,
}

impl MimoConfig {
    pub fn new(n_t: usize, n_r: usize) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::invalid("antenna counts must be >= 1"));
        }
        if n_t > MAX_ANTENNAS || n_r > MAX_ANTENNAS {
            return Err(Error::invalid(format!(
                "{n_r}x{n_t}: at most {MAX_ANTENNAS} antennas per side are supported"
            )));
        }
        Ok(Self { n_t, n_r })
    }

    pub fn siso() -> Self {
        Self { n_t: 1, n_r: 1 }
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }
    pub fn n_r(&self) -> usize {
        self.n_r
    }
    pub fn m(&self) -> usize {
        self.n_t.min(self.n_r)
    }
    pub fn n(&self) -> usize {
        self.n_t.max(self.n_r)
    }
}

/// `e^{1/ρ} E_1(1/ρ) log2 e`: ergodic SISO spectral efficiency under Rayleigh fading.
pub fn c_siso(rho: f64) -> f64 {
    if !(rho > 0.0) {
        return 0.0;
    }
    if rho.is_infinite() {
        return f64::INFINITY;
    }
    exp_integral_en_scaled(1, 1.0 / rho).expect("E1 at positive argument") * LOG2_E
}

const APPROX_SCALE: f64 = 1.4;
const APPROX_GAIN: f64 = 0.82;

/// `1.4 ln(1 + 0.82 ρ)`.
pub fn c_siso_approx(rho: f64) -> f64 {
    APPROX_SCALE * (APPROX_GAIN * rho.max(0.0)).ln_1p()
}

/// Inverse of [`c_siso_approx`]: `(e^{c/1.4} - 1)/0.82`.
pub fn rho_from_c(c: f64) -> f64 {
    (c.max(0.0) / APPROX_SCALE).exp_m1() / APPROX_GAIN
}

/// Coefficient table of the Rayleigh MIMO triple sum, grouped by the index
/// `q` of `E_{q+1}`. Entry `q` is the total weight multiplying `e^x E_{q+1}(x)`.
pub(crate) fn mimo_weights(cfg: &MimoConfig) -> Vec<f64> {
    let (m, n) = (cfg.m(), cfg.n());
    let d = n - m;
    let mut w = vec![0.0; d + 2 * (m - 1) + 1];
    let ln_binom = |a: usize, b: usize| ln_factorial(a) - ln_factorial(b) - ln_factorial(a - b);
    for i in 0..m {
        for j in 0..=i {
            for l in 0..=2 * j {
                let ln_c = ln_binom(2 * i - 2 * j, i - j)
                    + ln_binom(2 * j + 2 * d, 2 * j - l)
                    + ln_factorial(2 * j)
                    + ln_factorial(d + l)
                    - (2 * i - l) as f64 * std::f64::consts::LN_2
                    - ln_factorial(j)
                    - ln_factorial(l)
                    - ln_factorial(d + j);
                let c = if l % 2 == 0 { ln_c.exp() } else { -ln_c.exp() };
                for wq in w.iter_mut().take(d + l + 1) {
                    *wq += c;
                }
            }
        }
    }
    w
}

/// Ergodic MIMO spectral efficiency with IID Rayleigh entries and
/// `N_t` equal-power streams.
pub fn c_mimo(cfg: &MimoConfig, rho: f64) -> f64 {
    if !(rho > 0.0) {
        return 0.0;
    }
    mimo_from_weights(&mimo_weights(cfg), cfg.n_t() as f64 / rho)
}

fn mimo_from_weights(w: &[f64], x: f64) -> f64 {
    let total: f64 = w
        .iter()
        .enumerate()
        .map(|(q, &c)| {
            c * exp_integral_en_scaled(q as u32 + 1, x).expect("E_n at positive argument")
        })
        .sum();
    total * LOG2_E
}

/// `2 e^{2/ρ} [E_1(2/ρ) + E_3(2/ρ)] log2 e`.
pub fn c_mimo_2x2(rho: f64) -> f64 {
    if !(rho > 0.0) {
        return 0.0;
    }
    let x = 2.0 / rho;
    let e1 = exp_integral_en_scaled(1, x).expect("E1 at positive argument");
    let e3 = exp_integral_en_scaled(3, x).expect("E3 at positive argument");
    2.0 * (e1 + e3) * LOG2_E
}

/// `2.8 ln(1 + 0.41 ρ) + e^{-1/ρ} log2 e`.
pub fn c_mimo_2x2_approx(rho: f64) -> f64 {
    if !(rho > 0.0) {
        return 0.0;
    }
    2.8 * (0.41 * rho).ln_1p() + (-1.0 / rho).exp() * LOG2_E
}

/// A spectral-efficiency curve `ρ ↦ C(ρ)` in bits/s/Hz.
#[derive(Clone)]
pub enum SeCurve {
    SisoExact,
    SisoApprox,
    Mimo(MimoConfig),
    Mimo2x2Approx,
    Custom {
        label: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for SeCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SeCurve({})", self.label())
    }
}

pub(crate) const INVERT_LO: f64 = 1e-9;
pub(crate) const INVERT_HI: f64 = 1e9;

impl SeCurve {
    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SeCurve::Custom {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn mimo(n_t: usize, n_r: usize) -> Result<Self> {
        let cfg = MimoConfig::new(n_t, n_r)?;
        Ok(if cfg == MimoConfig::siso() {
            SeCurve::SisoExact
        } else {
            SeCurve::Mimo(cfg)
        })
    }

    pub fn label(&self) -> String {
        match self {
            SeCurve::SisoExact => "SISO exact".into(),
            SeCurve::SisoApprox => "SISO approx".into(),
            SeCurve::Mimo(c) => format!("MIMO {}x{} exact", c.n_r(), c.n_t()),
            SeCurve::Mimo2x2Approx => "MIMO 2x2 approx".into(),
            SeCurve::Custom { label, .. } => label.clone(),
        }
    }

    /// Receive antennas, which set the low-SNR slope `N_r log2 e`.
    pub fn n_r(&self) -> usize {
        match self {
            SeCurve::Mimo(c) => c.n_r(),
            SeCurve::Mimo2x2Approx => 2,
            _ => 1,
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        match self {
            SeCurve::SisoExact => c_siso(rho),
            SeCurve::SisoApprox => c_siso_approx(rho),
            SeCurve::Mimo(cfg) => c_mimo(cfg, rho),
            SeCurve::Mimo2x2Approx => c_mimo_2x2_approx(rho),
            SeCurve::Custom { f, .. } => f(rho),
        }
    }

    /// A reusable evaluator; for MIMO the coefficient table is built once.
    pub fn evaluator(&self) -> Box<dyn Fn(f64) -> f64 + Send + Sync + '_> {
        match self {
            SeCurve::Mimo(cfg) => {
                let w = mimo_weights(cfg);
                let nt = cfg.n_t() as f64;
                Box::new(move |rho| {
                    if rho > 0.0 {
                        mimo_from_weights(&w, nt / rho)
                    } else {
                        0.0
                    }
                })
            }
            _ => Box::new(move |rho| self.eval(rho)),
        }
    }

    /// `ρ` with `C(ρ) = c`. Closed form for the SISO approximation, geometric
    /// bisection otherwise (relative width 1e-12 or 200 halvings).
    pub fn inverse(&self, c: f64) -> Result<f64> {
        if !(c > 0.0) {
            return Err(Error::domain(
                "SeCurve::inverse",
                format!("c = {c} must be > 0"),
            ));
        }
        if let SeCurve::SisoApprox = self {
            return Ok(rho_from_c(c));
        }
        let f = self.evaluator();
        let mut lo = INVERT_LO;
        let mut hi = INVERT_HI;
        if f(lo) >= c {
            return Ok(lo);
        }
        while f(hi) < c {
            hi *= 1e3;
            if hi > 1e300 {
                return Err(Error::Bracket {
                    lower: INVERT_LO,
                    upper: hi,
                });
            }
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if f(mid) < c {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo - 1.0 <= 1e-12 {
                break;
            }
        }
        Ok((lo * hi).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::exp_integral_en;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn siso_values() {
        assert_eq!(c_siso(0.0), 0.0);
        let oracle = std::f64::consts::E * 0.219_383_934_395_520_3 * LOG2_E;
        assert_relative_eq!(c_siso(1.0), oracle, max_relative = 1e-12);
        assert!((c_siso(1.0) - 0.86036).abs() < 2e-5);
        for &rho in &[1e-3, 1e-5, 1e-8] {
            assert_relative_eq!(c_siso(rho) / (rho * LOG2_E), 1.0, max_relative = 2.0 * rho);
        }
        assert!(c_siso(1e-300) > 0.0);
    }

    #[test]
    fn approx_values_and_inverse() {
        assert!((c_siso_approx(1.0) - 0.8384).abs() < 1e-4);
        assert!((c_siso(1.0) - c_siso_approx(1.0)).abs() / c_siso(1.0) < 0.03);
        assert!((rho_from_c(0.84) - 1.0026).abs() < 1e-4);
        for &rho in &[0.1, 1.0, 10.0] {
            assert_relative_eq!(rho_from_c(c_siso_approx(rho)), rho, max_relative = 1e-12);
        }
        let worst = (0..=500)
            .map(|i| 10f64.powf(-2.0 + 5.0 * i as f64 / 500.0))
            .map(|r| (c_siso(r) - c_siso_approx(r)).abs() / c_siso(r))
            .fold(0.0, f64::max);
        // the fit undershoots the low-SNR slope (1.148 vs log2 e), so the worst
        // case sits at the low end of the sweep
        assert!((worst - 0.1997).abs() < 1e-3, "{worst}");
        let upper = (0..=300)
            .map(|i| 10f64.powf(3.0 * i as f64 / 300.0))
            .map(|r| (c_siso(r) - c_siso_approx(r)).abs() / c_siso(r))
            .fold(0.0, f64::max);
        assert!(upper <= 0.07, "{upper}");
    }

    #[test]
    fn mimo_reduces_to_siso() {
        for &rho in &[0.5, 2.0, 20.0] {
            assert_relative_eq!(
                c_mimo(&MimoConfig::siso(), rho),
                c_siso(rho),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn mimo_2x2_matches_closed_form() {
        let cfg = MimoConfig::new(2, 2).unwrap();
        for &rho in &[0.01, 0.3, 1.0, 7.0, 100.0, 1e4] {
            let x: f64 = 2.0 / rho;
            let direct = if x < 700.0 {
                2.0 * x.exp()
                    * (exp_integral_en(1, x).unwrap() + exp_integral_en(3, x).unwrap())
                    * LOG2_E
            } else {
                c_mimo_2x2(rho)
            };
            assert_relative_eq!(c_mimo(&cfg, rho), c_mimo_2x2(rho), max_relative = 1e-9);
            assert_relative_eq!(c_mimo_2x2(rho), direct, max_relative = 1e-9);
        }
    }

    #[test]
    fn mimo_low_snr_slope() {
        for &(nt, nr) in &[(2, 4), (4, 2), (3, 3), (8, 8)] {
            let cfg = MimoConfig::new(nt, nr).unwrap();
            let rho = 1e-4;
            let slope = c_mimo(&cfg, rho) / rho;
            assert!(
                (slope - nr as f64 * LOG2_E).abs() <= 1e-3 * nr as f64 * LOG2_E,
                "{nt}x{nr}: {slope}"
            );
        }
    }

    #[test]
    fn mimo_high_snr_slope() {
        for nt in 1..=8 {
            for nr in 1..=8 {
                let cfg = MimoConfig::new(nt, nr).unwrap();
                let rho = 1e6;
                let slope = (c_mimo(&cfg, 4.0 * rho) - c_mimo(&cfg, rho)) / 2.0;
                let m = cfg.m() as f64;
                assert!((slope - m).abs() <= 0.05 * m, "{nt}x{nr}: {slope}");
            }
        }
    }

    // E log2 det(I + rho/N_t H H^H) over IID CN(0,1) entries, sampled directly
    fn mc_logdet(nt: usize, nr: usize, rho: f64, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = nt.min(nr);
        let mut vals = Vec::with_capacity(samples);
        for _ in 0..samples {
            // Gram matrix G = H^H H or H H^H of size m, accumulated from n columns
            let big = nt.max(nr);
            let mut h = vec![(0.0f64, 0.0f64); m * big];
            for v in h.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *v = (
                    re * std::f64::consts::FRAC_1_SQRT_2,
                    im * std::f64::consts::FRAC_1_SQRT_2,
                );
            }
            let mut g = vec![(0.0f64, 0.0f64); m * m];
            for a in 0..m {
                for b in 0..m {
                    let mut s = (0.0, 0.0);
                    for k in 0..big {
                        let x = h[a * big + k];
                        let y = h[b * big + k];
                        s.0 += x.0 * y.0 + x.1 * y.1;
                        s.1 += x.1 * y.0 - x.0 * y.1;
                    }
                    let scale = rho / nt as f64;
                    g[a * m + b] = (s.0 * scale + if a == b { 1.0 } else { 0.0 }, s.1 * scale);
                }
            }
            // Cholesky of the Hermitian positive-definite matrix g
            let mut logdet = 0.0;
            let mut l = vec![(0.0f64, 0.0f64); m * m];
            for j in 0..m {
                let mut d = g[j * m + j].0;
                for k in 0..j {
                    let v = l[j * m + k];
                    d -= v.0 * v.0 + v.1 * v.1;
                }
                let d = d.sqrt();
                l[j * m + j] = (d, 0.0);
                logdet += 2.0 * d.ln();
                for i in j + 1..m {
                    let mut s = g[i * m + j];
                    for k in 0..j {
                        let a = l[i * m + k];
                        let b = l[j * m + k];
                        s.0 -= a.0 * b.0 + a.1 * b.1;
                        s.1 -= a.1 * b.0 - a.0 * b.1;
                    }
                    l[i * m + j] = (s.0 / d, s.1 / d);
                }
            }
            vals.push(logdet * LOG2_E);
        }
        let mean = vals.iter().sum::<f64>() / samples as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
        (mean, (var / samples as f64).sqrt())
    }

    #[test]
    fn mimo_matches_sampled_log_det() {
        for &(nt, nr, rho) in &[(2, 3, 3.0), (4, 4, 10.0), (3, 1, 0.5), (8, 8, 5.0)] {
            let cfg = MimoConfig::new(nt, nr).unwrap();
            let (mean, se) = mc_logdet(nt, nr, rho, 40_000, 11 + nt as u64);
            let c = c_mimo(&cfg, rho);
            assert!(
                (c - mean).abs() <= 4.0 * se,
                "{nt}x{nr} rho {rho}: {c} vs {mean} ± {se}"
            );
        }
    }

    #[test]
    fn mimo_approx() {
        assert_eq!(c_mimo_2x2_approx(0.0), 0.0);
        assert!(c_mimo_2x2_approx(1e-3) < 1e-2);
        assert!((c_mimo_2x2_approx(10.0) - 5.867).abs() < 1e-3);
        let worst = (0..=300)
            .map(|i| 10f64.powf(-1.0 + 3.0 * i as f64 / 300.0))
            .map(|r| (c_mimo_2x2(r) - c_mimo_2x2_approx(r)).abs() / c_mimo_2x2(r))
            .fold(0.0, f64::max);
        assert!((worst - 0.5733).abs() < 1e-3, "{worst}");
        let upper = (0..=300)
            .map(|i| 10f64.powf(0.3 + 1.7 * i as f64 / 300.0))
            .map(|r| (c_mimo_2x2(r) - c_mimo_2x2_approx(r)).abs() / c_mimo_2x2(r))
            .fold(0.0, f64::max);
        assert!(upper <= 0.07, "{upper}");
    }

    #[test]
    fn config_validation() {
        assert!(MimoConfig::new(0, 2).is_err());
        assert!(MimoConfig::new(9, 2).is_err());
        let c = MimoConfig::new(2, 5).unwrap();
        assert_eq!((c.m(), c.n()), (2, 5));
    }

    #[test]
    fn inverse_round_trips() {
        let curves = [
            SeCurve::SisoExact,
            SeCurve::SisoApprox,
            SeCurve::mimo(2, 2).unwrap(),
            SeCurve::mimo(4, 3).unwrap(),
            SeCurve::Mimo2x2Approx,
        ];
        for curve in &curves {
            for &rho in &[1e-6, 0.01, 1.0, 55.0, 1e7] {
                let back = curve.inverse(curve.eval(rho)).unwrap();
                assert_relative_eq!(back, rho, max_relative = 1e-9);
            }
        }
        assert!(SeCurve::SisoExact.inverse(0.0).is_err());
        assert!(SeCurve::SisoExact.inverse(80.0).unwrap() > 1e9);
    }

    #[test]
    fn exact_curves_low_snr_slope() {
        // the fitted approximations do not reproduce log2 e at low SNR
        for curve in [
            SeCurve::SisoExact,
            SeCurve::mimo(2, 2).unwrap(),
            SeCurve::mimo(3, 4).unwrap(),
        ] {
            let rho = 1e-4;
            let target = curve.n_r() as f64 * LOG2_E;
            assert!(
                (curve.eval(rho) / rho - target).abs() <= 0.05 * target,
                "{curve:?}"
            );
        }
    }

    proptest! {
        #[test]
        fn curves_strictly_increasing(nt in 1usize..=4, nr in 1usize..=4, a in -8.0f64..8.0, step in 0.01f64..1.0) {
            let lo = 10f64.powf(a);
            let hi = lo * 10f64.powf(step);
            for curve in [SeCurve::SisoExact, SeCurve::SisoApprox, SeCurve::Mimo2x2Approx, SeCurve::mimo(nt, nr).unwrap()] {
                prop_assert!(curve.eval(hi) > curve.eval(lo), "{:?} at {} {}", curve, lo, hi);
            }
        }
    }
}
