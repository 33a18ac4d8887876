//! Monte-Carlo baselines for the analytic results.
//!
//! Network geometries (Poisson or a shadowed triangular lattice), the
//! local-average SIR they induce, the mutual information under the true
//! non-Gaussian interference and the upper bound obtained when the receiver
//! also knows every interferer's fading.
//!
//! Every random quantity is drawn from a ChaCha8 stream selected by
//! `(seed, task index)`, so results do not depend on how tasks are spread
//! over threads.

mod bound;
mod estimate;
mod exact;
mod geometry;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sirdist::SectorModel;

pub use bound::{c_ub_mimo, c_ub_realization};
pub use estimate::{
    estimate_distribution, ks_distance, mean_exact_controlled, DistributionEstimate, EmpiricalCdf,
    Quantity,
};
pub use exact::{c_exact_mimo, c_exact_siso, EntropyBudget};
pub use geometry::{
    apply_shadowing, build_lattice, expected_distance_geometry, expected_kth_distance,
    lattice_drop, local_avg_sir, sample_ppp, GeometrySample,
};

/// Random stream used throughout the simulator.
pub type SimRng = ChaCha8Rng;

/// Independent stream `index` of the master `seed`.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Ppp,
    Lattice,
}

/// Where lattice users are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserRegion {
    /// Uniform over the central third (by radius) of the lattice disk.
    CentralThird,
    /// Uniform over the hexagonal cell of the site at the origin.
    CentralCell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Base stations per km².
    pub density: f64,
    /// Radius of the simulated disk in km.
    pub region_radius: f64,
    pub layout: Layout,
    /// Hexagonal rings around the origin site; overrides `lattice_target`.
    pub lattice_rings: Option<usize>,
    /// Minimum number of lattice sites.
    pub lattice_target: usize,
    pub user_region: UserRegion,
    pub shadow_sigma_db: f64,
    pub eta: f64,
    /// Noise power over transmit power, in the units of `r^{-η}` with `r` in meters.
    pub noise_over_p: f64,
    pub sector: SectorModel,
    pub seed: u64,
    pub n_geometries: usize,
    pub n_fading: usize,
    pub n_mixture: usize,
    /// Interferer count of the expected-distance geometry.
    pub truncate_interferers: usize,
    pub batches: usize,
    pub std_error_cap: Option<f64>,
}

impl SimConfig {
    /// Defaults at the given density, with a disk holding 1000 sites on average.
    pub fn new(density: f64) -> Self {
        Self {
            density,
            region_radius: (1000.0 / (std::f64::consts::PI * density)).sqrt(),
            layout: Layout::Ppp,
            lattice_rings: None,
            lattice_target: 977,
            user_region: UserRegion::CentralThird,
            shadow_sigma_db: 0.0,
            eta: 4.0,
            noise_over_p: 0.0,
            sector: SectorModel::unsectorized(),
            seed: 1,
            n_geometries: 500,
            n_fading: 2000,
            n_mixture: 512,
            truncate_interferers: 100,
            batches: 32,
            std_error_cap: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if !(self.density > 0.0 && self.density.is_finite()) {
            return bad(format!("density {} must be positive", self.density));
        }
        if !(self.region_radius > 0.0 && self.region_radius.is_finite()) {
            return bad(format!(
                "region radius {} must be positive",
                self.region_radius
            ));
        }
        if !(self.shadow_sigma_db >= 0.0 && self.shadow_sigma_db.is_finite()) {
            return bad(format!(
                "shadowing sigma {} dB must be >= 0",
                self.shadow_sigma_db
            ));
        }
        if !(self.eta > 2.0 && self.eta.is_finite()) {
            return bad(format!("eta = {} must exceed 2", self.eta));
        }
        if !(self.noise_over_p >= 0.0 && self.noise_over_p.is_finite()) {
            return bad(format!("noise_over_p = {} must be >= 0", self.noise_over_p));
        }
        if self.n_geometries == 0
            || self.n_fading == 0
            || self.n_mixture == 0
            || self.truncate_interferers == 0
            || self.lattice_target == 0
        {
            return bad("all sample counts must be >= 1".into());
        }
        if self.batches < MIN_BATCHES || self.n_fading < self.batches {
            return bad(format!(
                "need {MIN_BATCHES} <= batches <= n_fading (got {} batches, {} samples)",
                self.batches, self.n_fading
            ));
        }
        if let Some(cap) = self.std_error_cap {
            if !(cap > 0.0) {
                return bad(format!("standard-error cap {cap} must be positive"));
            }
        }
        Ok(())
    }

    pub fn entropy_budget(&self) -> EntropyBudget {
        EntropyBudget {
            n_fading: self.n_fading,
            n_mixture: self.n_mixture,
            batches: self.batches,
            std_error_cap: self.std_error_cap,
        }
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::new(1.0)
    }
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Fewest batch means behind a Normal-quantile interval.
pub const MIN_BATCHES: usize = 30;

/// Two-sided 99% Normal quantile.
const Z99: f64 = 2.575_829_303_548_901;

impl EstimateWithError {
    /// Mean and standard error of independent samples.
    pub fn from_samples(x: &[f64]) -> Self {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            value: mean,
            std_error,
            n_samples: n,
        }
    }

    /// Mean of `x` with the standard error taken from `batches` batch means.
    pub fn from_batches(x: &[f64], batches: usize) -> Self {
        let n = x.len();
        let b = batches.clamp(1, n.max(1));
        let means: Vec<f64> = (0..b)
            .map(|i| {
                let (lo, hi) = (i * n / b, (i + 1) * n / b);
                x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            })
            .collect();
        let mut est = Self::from_samples(&means);
        est.value = x.iter().sum::<f64>() / n as f64;
        est.n_samples = n;
        est
    }

    /// Half-width of the 99% confidence interval.
    pub fn ci99(&self) -> f64 {
        Z99 * self.std_error
    }

    pub(crate) fn check_cap(self, cap: Option<f64>) -> Result<Self> {
        match cap {
            Some(cap) if self.std_error > cap => Err(Error::Budget {
                std_error: self.std_error,
                cap,
            }),
            _ => Ok(self),
        }
    }
}
