//! Simulation checks that take seconds rather than milliseconds.

use ergodic_se::montecarlo::{
    c_exact_mimo, c_exact_siso, c_ub_mimo, c_ub_realization, estimate_distribution,
    expected_distance_geometry, ks_distance, local_avg_sir, sample_ppp, substream, EntropyBudget,
    Layout, Quantity, SimConfig,
};
use ergodic_se::seff::{c_mimo, c_siso, MimoConfig, SeCurve};
use ergodic_se::sirdist::HEX_LATTICE_SHIFT;
use ergodic_se::specialfn::QuadratureSpec;
use ergodic_se::{BranchMode, PathModel, SectorModel};

fn fig1_config() -> SimConfig {
    SimConfig {
        eta: 3.8,
        ..SimConfig::new(2.0)
    }
}

#[test]
fn fixed_geometry_gap_is_small() {
    let cfg = fig1_config();
    let one = SectorModel::unsectorized();
    let b = EntropyBudget::default();
    for (i, &r0) in [150.0, 300.0, 450.0].iter().enumerate() {
        let g = expected_distance_geometry(r0, &cfg).unwrap();
        let rho = local_avg_sir(&g, &one, 0.0).unwrap();
        let e = c_exact_siso(&g, 0.0, &b, &mut substream(40, i as u64)).unwrap();
        assert!(
            (e.value - c_siso(rho)).abs() <= 0.05,
            "r0 {r0}: {e:?} vs {}",
            c_siso(rho)
        );
    }
}

#[test]
fn fixed_geometry_far_user() {
    let cfg = fig1_config();
    let g = expected_distance_geometry(450.0, &cfg).unwrap();
    let rho = local_avg_sir(&g, &SectorModel::unsectorized(), 0.0).unwrap();
    let b = EntropyBudget {
        n_fading: 20_000,
        ..EntropyBudget::default()
    };
    let e = c_exact_siso(&g, 0.0, &b, &mut substream(41, 0)).unwrap();
    assert!(
        (e.value - c_siso(rho)).abs() <= 0.01,
        "{e:?} vs {}",
        c_siso(rho)
    );
}

#[test]
fn fixed_geometry_mimo() {
    let cfg = fig1_config();
    let g = expected_distance_geometry(300.0, &cfg).unwrap();
    let rho = local_avg_sir(&g, &SectorModel::unsectorized(), 0.0).unwrap();
    let m = MimoConfig::new(2, 2).unwrap();
    let b = EntropyBudget::default();
    let e2 = c_exact_mimo(&g, &m, 0.0, &b, &mut substream(42, 0)).unwrap();
    assert!((e2.value - c_mimo(&m, rho)).abs() <= 0.05, "{e2:?}");
    let e1 = c_exact_siso(&g, 0.0, &b, &mut substream(42, 1)).unwrap();
    assert!(e2.value - e1.value > 2.0 * e1.std_error.hypot(e2.std_error));
}

#[test]
fn sandwich_on_random_geometries() {
    let cfg = SimConfig::new(1.0);
    let b = EntropyBudget::default();
    let one = SectorModel::unsectorized();
    for i in 0..20 {
        let mut rng = substream(43, i);
        let g = sample_ppp(&cfg, &mut rng).unwrap();
        let c = c_siso(local_avg_sir(&g, &one, 0.0).unwrap());
        let e = c_exact_siso(&g, 0.0, &b, &mut rng).unwrap();
        let ub = c_ub_realization(&g, 0.0, &QuadratureSpec::default()).unwrap();
        assert!(
            c - 2.0 * e.std_error <= e.value,
            "geometry {i}: {c} vs {e:?}"
        );
        assert!(
            e.value <= ub + 2.0 * e.std_error,
            "geometry {i}: {e:?} vs {ub}"
        );
    }
}

#[test]
fn mimo_sandwich_on_fixed_geometry() {
    let cfg = fig1_config();
    let m = MimoConfig::new(2, 2).unwrap();
    let b = EntropyBudget::default();
    for (i, &r0) in [150.0, 450.0].iter().enumerate() {
        let g = expected_distance_geometry(r0, &cfg).unwrap();
        let rho = local_avg_sir(&g, &SectorModel::unsectorized(), 0.0).unwrap();
        let e = c_exact_mimo(&g, &m, 0.0, &b, &mut substream(44, i as u64)).unwrap();
        let ub = c_ub_mimo(&g, &m, 0.0, &b, &mut substream(45, i as u64)).unwrap();
        assert!(c_mimo(&m, rho) - 2.0 * e.std_error <= e.value);
        assert!(e.value <= ub.value + 2.0 * e.std_error.hypot(ub.std_error));
    }
}

#[test]
fn analytic_mean_over_ppp() {
    let cfg = SimConfig {
        n_geometries: 10_000,
        seed: 46,
        ..SimConfig::new(1.0)
    };
    let r = estimate_distribution(&Quantity::CAnalytic(SeCurve::SisoExact), &cfg).unwrap();
    assert!(
        (r.mean.value - 1.99).abs() <= 3.0 * r.mean.std_error,
        "{:?}",
        r.mean
    );
}

#[test]
fn rho_distribution_matches_model() {
    let m = PathModel::new(4.0, BranchMode::FourBranch).unwrap();
    let cfg = SimConfig {
        n_geometries: 10_000,
        seed: 47,
        ..SimConfig::new(1.0)
    };
    let r = estimate_distribution(&Quantity::Rho, &cfg).unwrap();
    let ks = ks_distance(&r.cdf, |x| m.sir_cdf(x));
    assert!(ks <= 0.02, "KS {ks}");
}

fn lattice(sigma: f64, drops: usize, seed: u64) -> SimConfig {
    SimConfig {
        layout: Layout::Lattice,
        shadow_sigma_db: sigma,
        n_geometries: drops,
        seed,
        ..SimConfig::new(1.0)
    }
}

#[test]
fn shadowless_lattice_is_not_ppp_like() {
    let m = PathModel::new(4.0, BranchMode::FourBranch).unwrap();
    let r = estimate_distribution(&Quantity::Rho, &lattice(0.0, 5000, 48)).unwrap();
    let ks = ks_distance(&r.cdf, |x| m.sir_cdf(x));
    assert!(ks > 3.0 * 1.36 / (5000f64).sqrt(), "KS {ks}");
}

#[test]
fn lattice_converges_with_shadowing() {
    let m = PathModel::new(4.0, BranchMode::FourBranch).unwrap();
    let mean_ks = |sigma: f64| {
        (0..3)
            .map(|seed| {
                let r = estimate_distribution(&Quantity::Rho, &lattice(sigma, 3000, 50 + seed))
                    .unwrap();
                ks_distance(&r.cdf, |x| m.sir_cdf(x))
            })
            .sum::<f64>()
            / 3.0
    };
    let ks: Vec<f64> = [0.0, 6.0, 10.0, 14.0].iter().map(|&s| mean_ks(s)).collect();
    assert!(ks.windows(2).all(|w| w[1] < w[0]), "{ks:?}");
}

#[test]
fn shadowless_lattice_matches_shifted_model() {
    let m = PathModel::new(4.0, BranchMode::FourBranch).unwrap();
    let r = estimate_distribution(&Quantity::Rho, &lattice(0.0, 10_000, 49)).unwrap();
    let ks = ks_distance(&r.cdf, |x| m.shifted_sir_cdf(x, HEX_LATTICE_SHIFT).unwrap());
    assert!(ks <= 0.03, "KS {ks}");
}
