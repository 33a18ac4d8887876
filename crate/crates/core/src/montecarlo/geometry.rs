use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::{SimConfig, UserRegion};
use crate::error::{Error, Result};
use crate::sirdist::SectorModel;
use crate::specialfn::ln_gamma;

/// Distances from the user to every base station, with optional shadowing.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySample {
    distances: Vec<f64>,
    shadow_gains: Option<Vec<f64>>,
    sector_offsets: Option<Vec<f64>>,
    serving_index: usize,
    eta: f64,
}

impl GeometrySample {
    /// Sorts the sites by distance (meters) and picks the strongest as server.
    pub fn new(distances: Vec<f64>, shadow_gains: Option<Vec<f64>>, eta: f64) -> Result<Self> {
        if !(eta > 2.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("eta = {eta} must exceed 2")));
        }
        if distances.is_empty() {
            return Err(Error::DegenerateGeometry("no base stations".into()));
        }
        if let Some(g) = &shadow_gains {
            if g.len() != distances.len() {
                return Err(Error::invalid(
                    "one shadowing gain per base station is required",
                ));
            }
            if g.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::invalid("shadowing gains must be positive"));
            }
        }
        if distances.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::DegenerateGeometry(
                "distances must be positive".into(),
            ));
        }
        let mut order: Vec<usize> = (0..distances.len()).collect();
        order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| distances[i]).collect();
        if sorted.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::DegenerateGeometry(
                "two base stations at the same distance".into(),
            ));
        }
        let gains = shadow_gains.map(|g| order.iter().map(|&i| g[i]).collect::<Vec<f64>>());
        let serving_index = match &gains {
            None => 0,
            Some(g) => {
                let mut best = 0;
                let mut best_p = f64::NEG_INFINITY;
                for (k, (&r, &x)) in sorted.iter().zip(g).enumerate() {
                    let p = x.ln() - eta * r.ln();
                    if p > best_p {
                        best_p = p;
                        best = k;
                    }
                }
                best
            }
        };
        Ok(Self {
            distances: sorted,
            shadow_gains: gains,
            sector_offsets: None,
            serving_index,
            eta,
        })
    }

    /// Draws, for each site, the user's azimuth relative to that site's first sector.
    pub fn with_sector_offsets<R: Rng + ?Sized>(mut self, rng: &mut R) -> Self {
        self.sector_offsets = Some(
            (0..self.distances.len())
                .map(|_| rng.random::<f64>() * 2.0 * PI)
                .collect(),
        );
        self
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }
    pub fn shadow_gains(&self) -> Option<&[f64]> {
        self.shadow_gains.as_deref()
    }
    pub fn sector_offsets(&self) -> Option<&[f64]> {
        self.sector_offsets.as_deref()
    }
    pub fn serving_index(&self) -> usize {
        self.serving_index
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn len(&self) -> usize {
        self.distances.len()
    }
    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    /// Received power `χ r^{-η}` of site `k`, with `r` in meters.
    pub fn power(&self, k: usize) -> f64 {
        let g = self.shadow_gains.as_ref().map_or(1.0, |g| g[k]);
        g * self.distances[k].powf(-self.eta)
    }

    /// Interferer powers relative to the serving site, strongest first.
    pub fn relative_interference(&self) -> Vec<f64> {
        let s = self.serving_index;
        let rs = self.distances[s];
        let gs = self.shadow_gains.as_ref().map_or(1.0, |g| g[s]);
        let mut out: Vec<f64> = (0..self.len())
            .filter(|&k| k != s)
            .map(|k| {
                let g = self.shadow_gains.as_ref().map_or(1.0, |g| g[k]);
                g / gs * (rs / self.distances[k]).powf(self.eta)
            })
            .collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    /// `noise_over_p` relative to the serving power.
    pub fn relative_noise(&self, noise_over_p: f64) -> f64 {
        noise_over_p / self.power(self.serving_index)
    }
}

/// Mean distance in meters to the `k`-th nearest point (0-based) of a PPP
/// with `density` points per km².
pub fn expected_kth_distance(k: usize, density: f64) -> f64 {
    let k = k as f64;
    1000.0 * (ln_gamma(k + 1.5) - ln_gamma(k + 1.0)).exp() / (PI * density).sqrt()
}

/// Serving site at `r0` meters and interferers at the expected PPP distances
/// of order `1..=config.truncate_interferers`.
pub fn expected_distance_geometry(r0: f64, config: &SimConfig) -> Result<GeometrySample> {
    let mut d = Vec::with_capacity(config.truncate_interferers + 1);
    d.push(r0);
    d.extend((1..=config.truncate_interferers).map(|k| expected_kth_distance(k, config.density)));
    if !(r0 < d[1]) {
        return Err(Error::DegenerateGeometry(format!(
            "r0 = {r0} m is not closer than the first interferer at {} m",
            d[1]
        )));
    }
    GeometrySample::new(d, None, config.eta)
}

/// Independent lognormal gains `10^{X/10}`, `X ~ N(0, σ²)`, with strongest-site association.
pub fn apply_shadowing<R: Rng + ?Sized>(
    distances: Vec<f64>,
    sigma_db: f64,
    eta: f64,
    rng: &mut R,
) -> Result<GeometrySample> {
    if !(sigma_db >= 0.0 && sigma_db.is_finite()) {
        return Err(Error::invalid(format!(
            "shadowing sigma {sigma_db} dB must be >= 0"
        )));
    }
    if sigma_db == 0.0 {
        return GeometrySample::new(distances, None, eta);
    }
    let scale = sigma_db * std::f64::consts::LN_10 / 10.0;
    let gains = (0..distances.len())
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            (scale * x).exp()
        })
        .collect();
    GeometrySample::new(distances, Some(gains), eta)
}

/// Poisson sites in a disk of radius `config.region_radius` around the user.
pub fn sample_ppp<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<GeometrySample> {
    let mean = config.density * PI * config.region_radius * config.region_radius;
    let poisson =
        Poisson::new(mean).map_err(|e| Error::invalid(format!("Poisson mean {mean}: {e}")))?;
    let n = poisson.sample(rng) as usize;
    let radius_m = 1000.0 * config.region_radius;
    let d: Vec<f64> = (0..n)
        .map(|_| radius_m * rng.random::<f64>().sqrt())
        .collect();
    apply_shadowing(d, config.shadow_sigma_db, config.eta, rng)
}

/// Triangular-lattice pitch in meters at `density` sites per km².
fn lattice_pitch(density: f64) -> f64 {
    1000.0 * (2.0 / (3f64.sqrt() * density)).sqrt()
}

/// Sites of a triangular lattice (hexagonal cells) at `config.density`,
/// truncated to the smallest origin-centred disk holding the requested count.
/// Positions are in meters, nearest first.
pub fn build_lattice(config: &SimConfig) -> Vec<[f64; 2]> {
    let target = match config.lattice_rings {
        Some(n) => 3 * n * (n + 1) + 1,
        None => config.lattice_target,
    };
    let d = lattice_pitch(config.density);
    let approx_radius = (target as f64 * 3f64.sqrt() / (2.0 * PI)).sqrt();
    let m = (1.3 * approx_radius).ceil() as i64 + 2;
    let h = 0.5 * 3f64.sqrt();
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for j in -m..=m {
        for i in -m..=m {
            pts.push([d * (i as f64 + 0.5 * j as f64), d * h * j as f64]);
        }
    }
    let norm = |p: &[f64; 2]| p[0].hypot(p[1]);
    pts.sort_by(|a, b| norm(a).total_cmp(&norm(b)));
    let cut = norm(&pts[target - 1]) + 1e-9 * d;
    pts.retain(|p| norm(p) <= cut);
    pts
}

fn in_origin_cell(p: [f64; 2], pitch: f64) -> bool {
    (0..6).all(|k| {
        let a = k as f64 * PI / 3.0;
        p[0] * a.cos() + p[1] * a.sin() <= 0.5 * pitch
    })
}

/// One user dropped on the lattice `sites`, with shadowing from `config`.
pub fn lattice_drop<R: Rng + ?Sized>(
    sites: &[[f64; 2]],
    config: &SimConfig,
    rng: &mut R,
) -> Result<GeometrySample> {
    let user = match config.user_region {
        UserRegion::CentralThird => {
            let outer = sites.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
            let r = outer / 3.0 * rng.random::<f64>().sqrt();
            let a = 2.0 * PI * rng.random::<f64>();
            [r * a.cos(), r * a.sin()]
        }
        UserRegion::CentralCell => {
            let d = lattice_pitch(config.density);
            loop {
                let p = [
                    d * (rng.random::<f64>() - 0.5),
                    d * (rng.random::<f64>() - 0.5) * 2.0 / 3f64.sqrt(),
                ];
                if in_origin_cell(p, d) {
                    break p;
                }
            }
        }
    };
    let dist = sites
        .iter()
        .map(|s| (s[0] - user[0]).hypot(s[1] - user[1]))
        .collect();
    apply_shadowing(dist, config.shadow_sigma_db, config.eta, rng)
}

/// Local-average SINR at the user. Sector gains follow `sect`; when the
/// sample carries sector offsets the antenna patterns are evaluated
/// explicitly, otherwise the orientation-free closed form is used.
pub fn local_avg_sir(
    sample: &GeometrySample,
    sect: &SectorModel,
    noise_over_p: f64,
) -> Result<f64> {
    if !(noise_over_p >= 0.0) {
        return Err(Error::invalid(format!(
            "noise_over_p = {noise_over_p} must be >= 0"
        )));
    }
    if sample.len() < 2 && noise_over_p == 0.0 {
        return Err(Error::DegenerateGeometry(
            "a single base station and no noise leaves the SIR undefined".into(),
        ));
    }
    let noise = sample.relative_noise(noise_over_p);
    let s = sect.sectors();
    match sample.sector_offsets() {
        Some(off) if s > 1 => {
            let step = 2.0 * PI / s as f64;
            let gains = |k: usize| (0..s).map(move |j| sect.pattern(off[k], j as f64 * step));
            let srv = sample.serving_index();
            let signal = gains(srv).fold(0.0, f64::max);
            let own = gains(srv).sum::<f64>() - signal;
            let ps = sample.power(srv);
            let other: f64 = (0..sample.len())
                .filter(|&k| k != srv)
                .map(|k| sample.power(k) / ps * gains(k).sum::<f64>())
                .sum();
            Ok(signal / (own + other + noise))
        }
        _ => {
            let interference: f64 = sample.relative_interference().iter().sum();
            let (g_in, g_out) = (sect.gain_in(), sect.gain_out());
            let total = g_in + (s as f64 - 1.0) * g_out;
            Ok(g_in / ((s as f64 - 1.0) * g_out + total * interference + noise))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::substream;
    use approx::assert_relative_eq;

    #[test]
    fn kth_distance_values() {
        assert_relative_eq!(
            expected_kth_distance(0, 2.0),
            1000.0 / (2.0 * 2f64.sqrt()),
            max_relative = 1e-12
        );
        assert!((expected_kth_distance(1, 2.0) - 530.33).abs() < 0.01);
        let g25 = 0.75 * PI.sqrt();
        assert_relative_eq!(
            expected_kth_distance(1, 2.0),
            1000.0 * g25 / (2.0 * PI).sqrt(),
            max_relative = 1e-12
        );
        let mut prev = 0.0;
        for k in 0..5000 {
            let r = expected_kth_distance(k, 1.0);
            assert!(r.is_finite() && r > prev);
            prev = r;
        }
    }

    #[test]
    fn ppp_counts_and_nearest_distance() {
        let cfg = SimConfig::new(2.0);
        let n = 10_000;
        let mut counts = Vec::with_capacity(n);
        let mut r0 = Vec::with_capacity(n);
        for i in 0..n {
            let s = sample_ppp(&cfg, &mut substream(3, i as u64)).unwrap();
            assert!(s.distances().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(s.serving_index(), 0);
            counts.push(s.len() as f64);
            r0.push(s.distances()[0] / 1000.0);
        }
        let mean = counts.iter().sum::<f64>() / n as f64;
        assert!(
            (mean - 1000.0).abs() < 3.0 * (1000.0 / n as f64).sqrt(),
            "{mean}"
        );
        let m0 = r0.iter().sum::<f64>() / n as f64;
        let sd = ((4.0 - PI) / (4.0 * PI * 2.0)).sqrt() / (n as f64).sqrt();
        assert!((m0 - 1.0 / (2.0 * 2f64.sqrt())).abs() < 3.0 * sd, "{m0}");
        r0.sort_by(f64::total_cmp);
        let ks = r0
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let f = 1.0 - (-2.0 * PI * r * r).exp();
                (f - i as f64 / n as f64)
                    .abs()
                    .max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks <= 0.02, "{ks}");
    }

    #[test]
    fn shadowing_mean_and_association() {
        let sigma = 8.0;
        let n = 100_000;
        let d: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let s = apply_shadowing(d.clone(), sigma, 4.0, &mut substream(5, 0)).unwrap();
        let g = s.shadow_gains().unwrap();
        let mean = g.iter().sum::<f64>() / n as f64;
        let b = sigma * std::f64::consts::LN_10 / 10.0;
        let exact = (b * b / 2.0).exp();
        let sd = ((b * b).exp() - 1.0).sqrt() * exact / (n as f64).sqrt();
        assert!((mean - exact).abs() < 3.0 * sd, "{mean} vs {exact}");
        let best = (0..n)
            .max_by(|&a, &b| s.power(a).total_cmp(&s.power(b)))
            .unwrap();
        assert_eq!(s.serving_index(), best);

        let plain = apply_shadowing(vec![3.0, 1.0, 2.0], 0.0, 4.0, &mut substream(5, 1)).unwrap();
        assert_eq!(plain.serving_index(), 0);
        assert_eq!(plain.distances(), &[1.0, 2.0, 3.0]);
        assert!(plain.shadow_gains().is_none());
    }

    #[test]
    fn sample_validation() {
        assert!(GeometrySample::new(vec![1.0, 1.0], None, 4.0).is_err());
        assert!(GeometrySample::new(vec![], None, 4.0).is_err());
        assert!(GeometrySample::new(vec![1.0, -2.0], None, 4.0).is_err());
        assert!(GeometrySample::new(vec![1.0, 2.0], Some(vec![1.0]), 4.0).is_err());
        let s = GeometrySample::new(vec![2.0, 1.0], Some(vec![100.0, 0.5]), 4.0).unwrap();
        assert_eq!(s.shadow_gains().unwrap(), &[0.5, 100.0]);
        assert_eq!(s.serving_index(), 1);
    }

    #[test]
    fn local_sir_examples() {
        let one = SectorModel::unsectorized();
        // 16^{-1/4} = 1/2 balances the doubled distance
        let s = GeometrySample::new(vec![1.0, 2.0], Some(vec![1.0, 16.0]), 4.0).unwrap();
        assert_relative_eq!(
            local_avg_sir(&s, &one, 0.0).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        let single = GeometrySample::new(vec![1.0], None, 4.0).unwrap();
        assert!(local_avg_sir(&single, &one, 0.0).is_err());
        assert_relative_eq!(
            local_avg_sir(&single, &one, 0.5).unwrap(),
            2.0,
            max_relative = 1e-14
        );

        let s = GeometrySample::new(vec![1.0, 2.0, 3.0], None, 3.5).unwrap();
        let rho = 1.0 / (2f64.powf(-3.5) + 3f64.powf(-3.5));
        assert_relative_eq!(
            local_avg_sir(&s, &one, 0.0).unwrap(),
            rho,
            max_relative = 1e-14
        );
        let s1 = SectorModel::new(1, 10.0).unwrap();
        assert_eq!(
            local_avg_sir(&s, &s1, 0.0).unwrap(),
            local_avg_sir(&s, &one, 0.0).unwrap()
        );
        let s3 = SectorModel::from_db(3, 20.0).unwrap();
        let closed = local_avg_sir(&s, &s3, 0.0).unwrap();
        assert_relative_eq!(closed, s3.from_unsectorized(rho), max_relative = 1e-13);
    }

    #[test]
    fn sector_sir_is_orientation_free() {
        let cfg = SimConfig::new(1.0);
        for (i, sect) in [
            SectorModel::from_db(3, 20.0).unwrap(),
            SectorModel::from_db(6, 15.0).unwrap(),
            SectorModel::new(3, f64::INFINITY).unwrap(),
        ]
        .iter()
        .enumerate()
        {
            let mut rng = substream(11, i as u64);
            let plain = sample_ppp(&cfg, &mut rng).unwrap();
            let closed = local_avg_sir(&plain, sect, 1e-14).unwrap();
            for _ in 0..20 {
                let oriented = plain.clone().with_sector_offsets(&mut rng);
                let explicit = local_avg_sir(&oriented, sect, 1e-14).unwrap();
                assert_relative_eq!(explicit, closed, max_relative = 1e-12);
            }
            if let Some(cap) = sect.cap() {
                assert!(closed > 0.0 && closed <= cap);
            }
        }
    }

    #[test]
    fn expected_geometry() {
        let cfg = SimConfig::new(2.0);
        let g = expected_distance_geometry(150.0, &cfg).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g.distances()[0], 150.0);
        assert!(expected_distance_geometry(600.0, &cfg).is_err());
    }

    #[test]
    fn lattice_layout() {
        let mut cfg = SimConfig::new(2.0);
        let sites = build_lattice(&cfg);
        assert!(sites.len() >= 977);
        let d = lattice_pitch(2.0);
        // cell area sqrt(3)/2 d² is one site per 1/λ
        assert_relative_eq!(3f64.sqrt() / 2.0 * d * d * 2.0, 1e6, max_relative = 1e-12);
        for &r in &[10.0 * d, 15.0 * d] {
            let count = sites.iter().filter(|p| p[0].hypot(p[1]) <= r).count() as f64;
            let expected = 2.0 * PI * r * r / 1e6;
            assert!(
                (count / expected - 1.0).abs() < 0.02,
                "{count} vs {expected}"
            );
        }
        cfg.lattice_rings = Some(3);
        assert!(build_lattice(&cfg).len() >= 37);

        let cfg = SimConfig::new(2.0);
        for region in [UserRegion::CentralThird, UserRegion::CentralCell] {
            let c = SimConfig {
                user_region: region,
                ..cfg.clone()
            };
            let mut rng = substream(2, 0);
            for _ in 0..200 {
                let g = lattice_drop(&sites, &c, &mut rng).unwrap();
                assert!(g.distances()[0] <= d);
                if region == UserRegion::CentralCell {
                    assert!(g.distances()[0] <= d / 3f64.sqrt() + 1e-9);
                }
            }
        }
    }
}
