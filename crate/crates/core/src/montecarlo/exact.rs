//! Mutual information under the true interference distribution.
//!
//! Conditioned on the interferers' fading the interference is complex
//! Gaussian, so both the interference `z` and the received signal `y` are
//! Gaussian scale mixtures. Their densities are estimated by averaging the
//! conditional Gaussian densities over a pool of independent fading draws,
//! and `I = h(y) - h(z)` is estimated from the information density
//! `log f_z(z) - log f_y(y)` on fresh samples.
//!
//! The same samples are also scored with the information density of Gaussian
//! interference of equal power, whose mean is the curve value `C(ρ)` in
//! closed form. Only the difference of the two densities is averaged, which
//! removes most of the fading noise and leaves the estimate unbiased.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::{EstimateWithError, GeometrySample, MIN_BATCHES};
use crate::error::{Error, Result};
use crate::seff::{c_mimo, c_siso, MimoConfig};
use crate::specialfn::LOG2_E;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBudget {
    /// Samples of the information density.
    pub n_fading: usize,
    /// Fading draws in each mixture density.
    pub n_mixture: usize,
    pub batches: usize,
    pub std_error_cap: Option<f64>,
}

impl Default for EntropyBudget {
    fn default() -> Self {
        Self {
            n_fading: 2000,
            n_mixture: 512,
            batches: 32,
            std_error_cap: None,
        }
    }
}

impl EntropyBudget {
    fn validate(&self) -> Result<()> {
        if self.n_mixture == 0 || self.batches < MIN_BATCHES || self.n_fading < self.batches {
            return Err(Error::invalid(format!(
                "entropy budget needs n_mixture >= 1 and {MIN_BATCHES} <= batches <= n_fading, got {self:?}"
            )));
        }
        Ok(())
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn interference_and_noise(sample: &GeometrySample, noise_over_p: f64) -> Result<(Vec<f64>, f64)> {
    if !(noise_over_p >= 0.0) {
        return Err(Error::invalid(format!(
            "noise_over_p = {noise_over_p} must be >= 0"
        )));
    }
    let b = sample.relative_interference();
    let n0 = sample.relative_noise(noise_over_p);
    if b.is_empty() && n0 == 0.0 {
        return Err(Error::DegenerateGeometry(
            "no interferers and no noise: the mutual information is unbounded".into(),
        ));
    }
    Ok((b, n0))
}

/// `ln Σ_j exp(t_j)`, stable for any range of the terms.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `ln Σ_j e^{-q/v_j}/v_j` over the pool of variances `v`.
fn log_mixture_siso(q: f64, shift: f64, v: &[f64], scratch: &mut [f64]) -> f64 {
    let mut sum = 0.0;
    for &vj in v {
        let inv = 1.0 / (shift + vj);
        sum += (-q * inv).exp() * inv;
    }
    if sum > 1e-280 && sum.is_finite() {
        return sum.ln();
    }
    for (t, &vj) in scratch.iter_mut().zip(v) {
        let s = shift + vj;
        *t = -q / s - s.ln();
    }
    log_sum_exp(scratch)
}

/// Ergodic mutual information of a SISO link, in bits/s/Hz, under Rayleigh
/// fading of every link and Gaussian codebooks at every base station.
pub fn c_exact_siso<R: Rng + ?Sized>(
    sample: &GeometrySample,
    noise_over_p: f64,
    budget: &EntropyBudget,
    rng: &mut R,
) -> Result<EstimateWithError> {
    budget.validate()?;
    let (b, n0) = interference_and_noise(sample, noise_over_p)?;
    let draw_variance = |rng: &mut R| {
        n0 + b
            .iter()
            .map(|&bk| {
                let e: f64 = rng.sample(Exp1);
                bk * e
            })
            .sum::<f64>()
    };
    let vbar = n0 + b.iter().sum::<f64>();
    let pool: Vec<f64> = (0..budget.n_mixture).map(|_| draw_variance(rng)).collect();
    let mut scratch = vec![0.0; pool.len()];
    let mut gap = Vec::with_capacity(budget.n_fading);
    for _ in 0..budget.n_fading {
        let h0 = complex_normal(rng);
        let s0 = complex_normal(rng);
        let v = draw_variance(rng);
        let z = complex_normal(rng) * v.sqrt();
        let y = h0 * s0 + z;
        let g0 = h0.norm_sqr();
        let lz = log_mixture_siso(z.norm_sqr(), 0.0, &pool, &mut scratch);
        let ly = log_mixture_siso(y.norm_sqr(), g0, &pool, &mut scratch);
        let gauss = -z.norm_sqr() / vbar + y.norm_sqr() / (g0 + vbar) + (g0 / vbar).ln_1p();
        gap.push((lz - ly - gauss) * LOG2_E);
    }
    finish(c_siso(1.0 / vbar), &gap, budget)
}

const DIM: usize = crate::seff::MAX_ANTENNAS;

/// Hermitian matrix of order `n <= DIM`, row-major.
#[derive(Clone, Copy)]
pub(crate) struct Herm {
    n: usize,
    a: [Complex64; DIM * DIM],
}

impl Herm {
    pub(crate) fn scaled_identity(n: usize, d: f64) -> Self {
        let mut a = [Complex64::new(0.0, 0.0); DIM * DIM];
        for i in 0..n {
            a[i * DIM + i] = Complex64::new(d, 0.0);
        }
        Self { n, a }
    }

    /// `self += c h h†`.
    pub(crate) fn add_outer(&mut self, h: &[Complex64], c: f64) {
        for i in 0..self.n {
            for j in 0..=i {
                self.a[i * DIM + j] += h[i] * h[j].conj() * c;
            }
        }
    }

    pub(crate) fn plus(&self, other: &Herm) -> Herm {
        let mut out = *self;
        for i in 0..self.n {
            for j in 0..=i {
                out.a[i * DIM + j] += other.a[i * DIM + j];
            }
        }
        out
    }

    /// Lower Cholesky factor, `None` unless positive definite.
    pub(crate) fn cholesky(&self) -> Option<Chol> {
        let n = self.n;
        let mut l = [Complex64::new(0.0, 0.0); DIM * DIM];
        let mut log_det = 0.0;
        for j in 0..n {
            let mut d = self.a[j * DIM + j].re;
            for k in 0..j {
                d -= l[j * DIM + k].norm_sqr();
            }
            if !(d > 0.0) {
                return None;
            }
            let ljj = d.sqrt();
            log_det += 2.0 * ljj.ln();
            l[j * DIM + j] = Complex64::new(ljj, 0.0);
            for i in j + 1..n {
                let mut s = self.a[i * DIM + j];
                for k in 0..j {
                    s -= l[i * DIM + k] * l[j * DIM + k].conj();
                }
                l[i * DIM + j] = s / ljj;
            }
        }
        Some(Chol { n, l, log_det })
    }
}

#[derive(Clone, Copy)]
pub(crate) struct Chol {
    n: usize,
    l: [Complex64; DIM * DIM],
    pub(crate) log_det: f64,
}

impl Chol {
    /// `x† (L L†)^{-1} x`.
    fn quad(&self, x: &[Complex64]) -> f64 {
        let mut u = [Complex64::new(0.0, 0.0); DIM];
        let mut q = 0.0;
        for i in 0..self.n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * DIM + k] * u[k];
            }
            u[i] = s / self.l[i * DIM + i].re;
            q += u[i].norm_sqr();
        }
        q
    }

    /// `L w`.
    fn mul(&self, w: &[Complex64]) -> [Complex64; DIM] {
        let mut out = [Complex64::new(0.0, 0.0); DIM];
        for i in 0..self.n {
            for k in 0..=i {
                out[i] += self.l[i * DIM + k] * w[k];
            }
        }
        out
    }
}

/// One realization of the MIMO link: the signal covariance `H0 H0†/N_t`,
/// the received vectors and the conditional interference covariance.
pub(crate) struct MimoDraw {
    pub(crate) signal: Herm,
    pub(crate) interference: Herm,
    z: [Complex64; DIM],
    y: [Complex64; DIM],
}

pub(crate) struct MimoSampler {
    cfg: MimoConfig,
    b: Vec<f64>,
    n0: f64,
}

impl MimoSampler {
    pub(crate) fn new(
        sample: &GeometrySample,
        cfg: &MimoConfig,
        noise_over_p: f64,
    ) -> Result<Self> {
        let (b, n0) = interference_and_noise(sample, noise_over_p)?;
        if n0 == 0.0 && b.len() * cfg.n_t() < cfg.n_r() {
            return Err(Error::DegenerateGeometry(format!(
                "{} interferers with {} antennas cannot span {} receive dimensions",
                b.len(),
                cfg.n_t(),
                cfg.n_r()
            )));
        }
        Ok(Self { cfg: *cfg, b, n0 })
    }

    /// Mean interference-plus-noise power per receive antenna.
    pub(crate) fn mean_power(&self) -> f64 {
        self.n0 + self.b.iter().sum::<f64>()
    }

    pub(crate) fn interference<R: Rng + ?Sized>(&self, rng: &mut R) -> Herm {
        let (nr, nt) = (self.cfg.n_r(), self.cfg.n_t());
        let mut v = Herm::scaled_identity(nr, self.n0);
        let mut h = [Complex64::new(0.0, 0.0); DIM];
        for &bk in &self.b {
            for _ in 0..nt {
                for x in h.iter_mut().take(nr) {
                    *x = complex_normal(rng);
                }
                v.add_outer(&h[..nr], bk / nt as f64);
            }
        }
        v
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MimoDraw> {
        let (nr, nt) = (self.cfg.n_r(), self.cfg.n_t());
        let mut signal = Herm::scaled_identity(nr, 0.0);
        let mut x = [Complex64::new(0.0, 0.0); DIM];
        let mut col = [Complex64::new(0.0, 0.0); DIM];
        let amp = 1.0 / (nt as f64).sqrt();
        for _ in 0..nt {
            for c in col.iter_mut().take(nr) {
                *c = complex_normal(rng);
            }
            signal.add_outer(&col[..nr], 1.0 / nt as f64);
            let s = complex_normal(rng) * amp;
            for i in 0..nr {
                x[i] += col[i] * s;
            }
        }
        let interference = self.interference(rng);
        let chol = interference.cholesky().ok_or_else(singular)?;
        let mut w = [Complex64::new(0.0, 0.0); DIM];
        for c in w.iter_mut().take(nr) {
            *c = complex_normal(rng);
        }
        let z = chol.mul(&w);
        let mut y = z;
        for i in 0..nr {
            y[i] += x[i];
        }
        Ok(MimoDraw {
            signal,
            interference,
            z,
            y,
        })
    }
}

fn finish(curve: f64, gap: &[f64], budget: &EntropyBudget) -> Result<EstimateWithError> {
    let mut est = EstimateWithError::from_batches(gap, budget.batches);
    est.value += curve;
    est.check_cap(budget.std_error_cap)
}

fn singular() -> Error {
    Error::DegenerateGeometry("interference covariance is singular".into())
}

/// Ergodic mutual information of an `N_t x N_r` link with `N_t` streams per
/// base station, in bits/s/Hz.
pub fn c_exact_mimo<R: Rng + ?Sized>(
    sample: &GeometrySample,
    cfg: &MimoConfig,
    noise_over_p: f64,
    budget: &EntropyBudget,
    rng: &mut R,
) -> Result<EstimateWithError> {
    budget.validate()?;
    let sampler = MimoSampler::new(sample, cfg, noise_over_p)?;
    let pool: Vec<Herm> = (0..budget.n_mixture)
        .map(|_| sampler.interference(rng))
        .collect();
    let pool_chol = pool
        .iter()
        .map(|v| v.cholesky().ok_or_else(singular))
        .collect::<Result<Vec<Chol>>>()?;
    let vbar = sampler.mean_power();
    let mean_chol = Herm::scaled_identity(cfg.n_r(), vbar)
        .cholesky()
        .ok_or_else(singular)?;
    let mut terms = vec![0.0; pool.len()];
    let mut gap = Vec::with_capacity(budget.n_fading);
    for _ in 0..budget.n_fading {
        let d = sampler.draw(rng)?;
        for (t, c) in terms.iter_mut().zip(&pool_chol) {
            *t = -c.quad(&d.z) - c.log_det;
        }
        let lz = log_sum_exp(&terms);
        for (t, v) in terms.iter_mut().zip(&pool) {
            let c = d.signal.plus(v).cholesky().ok_or_else(singular)?;
            *t = -c.quad(&d.y) - c.log_det;
        }
        let ly = log_sum_exp(&terms);
        let total = d.signal.plus(&Herm::scaled_identity(cfg.n_r(), vbar));
        let total = total.cholesky().ok_or_else(singular)?;
        let gauss = -mean_chol.quad(&d.z) + total.quad(&d.y) + total.log_det - mean_chol.log_det;
        gap.push((lz - ly - gauss) * LOG2_E);
    }
    finish(c_mimo(cfg, 1.0 / vbar), &gap, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{substream, SimConfig};
    use crate::seff::{c_mimo, c_siso};

    fn budget(n: usize, m: usize) -> EntropyBudget {
        EntropyBudget {
            n_fading: n,
            n_mixture: m,
            ..EntropyBudget::default()
        }
    }

    #[test]
    fn noise_only_matches_gaussian_capacity() {
        let g = GeometrySample::new(vec![100.0], None, 4.0).unwrap();
        let snr = 4.0;
        let noise = 100f64.powf(-4.0) / snr;
        // the mixture collapses to one Gaussian, so only rounding separates the two
        let e = c_exact_siso(&g, noise, &budget(2_000, 4), &mut substream(1, 0)).unwrap();
        assert!(
            (e.value - c_siso(snr)).abs() <= 2.0 * e.std_error + 1e-9,
            "{e:?} vs {}",
            c_siso(snr)
        );
        let cfg = MimoConfig::new(2, 2).unwrap();
        let e = c_exact_mimo(&g, &cfg, noise, &budget(2_000, 4), &mut substream(1, 1)).unwrap();
        let c = c_mimo(&cfg, snr);
        assert!(
            (e.value - c).abs() <= 2.0 * e.std_error + 1e-9,
            "{e:?} vs {c}"
        );
    }

    #[test]
    fn degenerate_inputs() {
        let g = GeometrySample::new(vec![100.0], None, 4.0).unwrap();
        assert!(c_exact_siso(&g, 0.0, &budget(100, 8), &mut substream(1, 0)).is_err());
        let g2 = GeometrySample::new(vec![100.0, 200.0], None, 4.0).unwrap();
        let cfg = MimoConfig::new(1, 2).unwrap();
        assert!(c_exact_mimo(&g2, &cfg, 0.0, &budget(100, 8), &mut substream(1, 0)).is_err());
        assert!(c_exact_siso(&g2, 0.0, &budget(10, 8), &mut substream(1, 0)).is_err());
    }

    #[test]
    fn budget_cap_reports_starvation() {
        let cfg = SimConfig::new(2.0);
        let g = crate::montecarlo::expected_distance_geometry(300.0, &cfg).unwrap();
        let b = EntropyBudget {
            std_error_cap: Some(1e-6),
            ..budget(64, 16)
        };
        let err = c_exact_siso(&g, 0.0, &b, &mut substream(1, 0)).unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn dominant_interferer_is_not_gaussian() {
        // a single equal-power interferer: the mixture beats the Gaussian bound clearly
        let g = GeometrySample::new(vec![100.0, 101.0], None, 4.0).unwrap();
        let rho = 1.0 / (100.0f64 / 101.0).powi(4);
        let e = c_exact_siso(&g, 0.0, &budget(8000, 512), &mut substream(4, 0)).unwrap();
        assert!(
            e.value > c_siso(rho) + 5.0 * e.std_error,
            "{e:?} vs {}",
            c_siso(rho)
        );
    }

    #[test]
    fn cholesky_round_trip() {
        let mut a = Herm::scaled_identity(3, 0.5);
        let mut rng = substream(9, 0);
        let mut h = [Complex64::new(0.0, 0.0); DIM];
        for _ in 0..4 {
            for x in h.iter_mut().take(3) {
                *x = complex_normal(&mut rng);
            }
            a.add_outer(&h[..3], 0.7);
        }
        let c = a.cholesky().unwrap();
        // x† A^{-1} x for x = L e_0 is |e_0|² = 1
        let mut e0 = [Complex64::new(0.0, 0.0); DIM];
        e0[0] = Complex64::new(1.0, 0.0);
        let x = c.mul(&e0);
        assert!((c.quad(&x) - 1.0).abs() < 1e-12);
        let tr: f64 = (0..3).map(|i| a.a[i * DIM + i].re).product();
        assert!(c.log_det < tr.ln() + 1e-12);
    }
}
