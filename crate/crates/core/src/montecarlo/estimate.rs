#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{
    build_lattice, c_exact_mimo, c_exact_siso, c_ub_mimo, c_ub_realization, lattice_drop,
    local_avg_sir, sample_ppp, substream, EstimateWithError, GeometrySample, Layout, SimConfig,
    SimRng,
};
use crate::error::{Error, Result};
use crate::seff::{MimoConfig, SeCurve};
use crate::specialfn::QuadratureSpec;

/// Per-geometry quantity tallied by [`estimate_distribution`].
#[derive(Debug, Clone)]
pub enum Quantity {
    /// Local-average SIR (sectorized when the config says so).
    Rho,
    /// A spectral-efficiency curve evaluated at the local-average SIR.
    CAnalytic(SeCurve),
    /// Mutual information under the true interference.
    CExact(MimoConfig),
    /// Upper bound with the interferers' fading known.
    CUb(MimoConfig),
    /// `C_exact - C(ρ)` on the same geometry, `C` being the exact curve of the configuration.
    ExactGap(MimoConfig),
}

impl Quantity {
    fn needs_plain_links(&self) -> bool {
        !matches!(self, Quantity::Rho | Quantity::CAnalytic(_))
    }
}

/// Sorted sample with step-function CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empirical CDF of an empty sample"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("empirical CDF of a sample containing NaN"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Share of the sample at or below `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample value whose CDF reaches `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let k = ((p.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
        self.sorted[k - 1]
    }
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &EmpiricalCdf, cdf: F) -> f64 {
    let n = sample.len() as f64;
    sample
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct DistributionEstimate {
    /// One value per geometry, in task order.
    pub samples: Vec<f64>,
    pub cdf: EmpiricalCdf,
    pub mean: EstimateWithError,
}

fn draw_geometry(
    config: &SimConfig,
    sites: &[[f64; 2]],
    rng: &mut SimRng,
) -> Result<GeometrySample> {
    match config.layout {
        Layout::Ppp => sample_ppp(config, rng),
        Layout::Lattice => lattice_drop(sites, config, rng),
    }
}

fn evaluate(
    quantity: &Quantity,
    config: &SimConfig,
    sites: &[[f64; 2]],
    index: usize,
) -> Result<f64> {
    let mut rng = substream(config.seed, index as u64);
    let g = draw_geometry(config, sites, &mut rng)?;
    let noise = config.noise_over_p;
    let budget = config.entropy_budget();
    let exact = |cfg: &MimoConfig, rng: &mut SimRng| {
        if *cfg == MimoConfig::siso() {
            c_exact_siso(&g, noise, &budget, rng)
        } else {
            c_exact_mimo(&g, cfg, noise, &budget, rng)
        }
    };
    match quantity {
        Quantity::Rho => local_avg_sir(&g, &config.sector, noise),
        Quantity::CAnalytic(curve) => Ok(curve.eval(local_avg_sir(&g, &config.sector, noise)?)),
        Quantity::CExact(cfg) => Ok(exact(cfg, &mut rng)?.value),
        Quantity::CUb(cfg) => {
            if *cfg == MimoConfig::siso() {
                c_ub_realization(&g, noise, &QuadratureSpec::default())
            } else {
                Ok(c_ub_mimo(&g, cfg, noise, &budget, &mut rng)?.value)
            }
        }
        Quantity::ExactGap(cfg) => {
            let rho = local_avg_sir(&g, &config.sector, noise)?;
            let curve = SeCurve::Mimo(*cfg);
            Ok(exact(cfg, &mut rng)?.value - curve.eval(rho))
        }
    }
}

/// Evaluates `quantity` on `config.n_geometries` independent geometries.
///
/// Geometry `i` draws everything from substream `i` of `config.seed`, so the
/// output is identical for any number of worker threads.
pub fn estimate_distribution(
    quantity: &Quantity,
    config: &SimConfig,
) -> Result<DistributionEstimate> {
    config.validate()?;
    if quantity.needs_plain_links() && config.sector.sectors() > 1 {
        return Err(Error::invalid(
            "exact and bound estimators are available for unsectorized sites only",
        ));
    }
    let sites = match config.layout {
        Layout::Lattice => build_lattice(config),
        Layout::Ppp => Vec::new(),
    };
    let run = |i: usize| {
        evaluate(quantity, config, &sites, i).map_err(|e| Error::AtGeometry {
            index: i,
            source: Box::new(e),
        })
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<f64>> = (0..config.n_geometries).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<f64>> = (0..config.n_geometries).map(run).collect();
    let samples = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let mean = EstimateWithError::from_samples(&samples);
    Ok(DistributionEstimate {
        cdf: EmpiricalCdf::new(samples.clone())?,
        samples,
        mean,
    })
}

/// Spatial mean of `C_exact` as `E[C(ρ)] + E[C_exact - C(ρ)]`.
///
/// The first term uses `n_control` cheap geometries drawn from a separate
/// seed; the second uses `config.n_geometries` full entropy estimates. The gap
/// varies far less across geometries than `C_exact` itself, so the combined
/// standard error is much smaller than that of a plain average.
pub fn mean_exact_controlled(
    cfg: &MimoConfig,
    config: &SimConfig,
    n_control: usize,
) -> Result<EstimateWithError> {
    let gap = estimate_distribution(&Quantity::ExactGap(*cfg), config)?.mean;
    let control_config = SimConfig {
        seed: config.seed ^ CONTROL_SEED_MASK,
        n_geometries: n_control,
        ..config.clone()
    };
    let base =
        estimate_distribution(&Quantity::CAnalytic(SeCurve::Mimo(*cfg)), &control_config)?.mean;
    Ok(EstimateWithError {
        value: base.value + gap.value,
        std_error: base.std_error.hypot(gap.std_error),
        n_samples: base.n_samples + gap.n_samples,
    })
}

const CONTROL_SEED_MASK: u64 = 0x9e37_79b9_7f4a_7c15;
