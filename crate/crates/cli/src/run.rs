use anyhow::Result;
use ergodic_se::montecarlo::{
    estimate_distribution, ks_distance, mean_exact_controlled, DistributionEstimate, Layout,
    Quantity, SimConfig, UserRegion,
};
use ergodic_se::seff::{
    coverage_quantile, coverage_tail, lognormal_fit, mean_se, mean_se_cub, mean_se_general, se_cdf,
    se_quantile, MimoConfig, SeCurve,
};
use ergodic_se::sirdist::sector_sir_cdf;
use ergodic_se::specialfn::QuadratureSpec;
use ergodic_se::{BranchMode, PathModel, SectorModel};

use crate::args::*;
use crate::output::{fmt9, opt9, parse_range, usage, Grid, Table};

pub struct Output {
    pub table: Table,
    pub summary: Vec<String>,
}

pub fn run(command: &Command) -> Result<Output> {
    match command {
        Command::SirCdf(a) => sir_cdf(a),
        Command::SeCdf(a) => se_cdf_cmd(a),
        Command::Coverage(a) => coverage(a),
        Command::MeanSe(a) => mean_se_cmd(a),
        Command::Lognormal(a) => lognormal(a),
        Command::TableSstar(a) => table_sstar(a),
        Command::TableMimo(a) => table_mimo(a),
        Command::Simulate(a) => simulate(a),
    }
}

fn branch(mode: Option<Mode>, default: BranchMode) -> BranchMode {
    match mode {
        Some(Mode::Four) => BranchMode::FourBranch,
        Some(Mode::Three) => BranchMode::ThreeBranch,
        None => default,
    }
}

// CDFs default to four branches, averages to three.
fn model(p: &PathArgs, default: BranchMode) -> Result<PathModel> {
    model_at(p.eta, p.mode, default)
}

fn model_at(eta: f64, mode: Option<Mode>, default: BranchMode) -> Result<PathModel> {
    Ok(PathModel::new(eta, branch(mode, default))?)
}

fn sectors(s: &SectorArgs) -> Result<SectorModel> {
    Ok(SectorModel::from_db(s.sectors, s.q_db)?)
}

fn curve(a: &AntennaArgs, kind: CurveKind) -> Result<SeCurve> {
    match (kind, a.nt, a.nr) {
        (CurveKind::Exact, nt, nr) => Ok(SeCurve::mimo(nt, nr)?),
        (CurveKind::Approx, 1, 1) => Ok(SeCurve::SisoApprox),
        (CurveKind::Approx, 2, 2) => Ok(SeCurve::Mimo2x2Approx),
        (CurveKind::Approx, nt, nr) => Err(usage(format!(
            "the approximate curve exists for 1x1 and 2x2 only, not {nt}x{nr}"
        ))),
    }
}

fn sim_config(b: &SimBudgetArgs, eta: f64, sect: SectorModel, geometries: usize) -> SimConfig {
    SimConfig {
        eta,
        sector: sect,
        seed: b.seed,
        n_geometries: geometries,
        n_fading: b.fading,
        n_mixture: b.mixture,
        batches: b.batches,
        truncate_interferers: b.truncate,
        noise_over_p: b.noise,
        std_error_cap: b.se_cap,
        ..SimConfig::new(b.density)
    }
}

fn binomial_se(f: f64, n: usize) -> f64 {
    (f * (1.0 - f) / n as f64).sqrt()
}

fn describe(m: &PathModel) -> String {
    format!(
        "eta {} (delta {}), s* = {}, constant level {}, {} branches",
        fmt9(m.eta()),
        fmt9(m.delta()),
        fmt9(m.s_star()),
        fmt9(m.a_delta()),
        m.mode()
    )
}

fn sir_cdf(a: &SirCdfArgs) -> Result<Output> {
    let m = model(&a.path, BranchMode::FourBranch)?;
    let s = sectors(&a.sector)?;
    let mut table = Table::new(&["theta", "F_rho"]);
    for theta in Grid::parse(&a.grid)?.values() {
        table.push(vec![fmt9(theta), fmt9(sector_sir_cdf(&m, &s, theta))]);
    }
    Ok(Output {
        table,
        summary: vec![describe(&m)],
    })
}

fn se_cdf_cmd(a: &SeCdfArgs) -> Result<Output> {
    let m = model(&a.path, BranchMode::FourBranch)?;
    let s = sectors(&a.sector)?;
    let c = curve(&a.antennas, a.curve)?;
    let grid = Grid::parse(&a.grid)?.values();
    let mut summary = vec![format!("{}, curve {}", describe(&m), c.label())];
    let sim = if a.geometries > 0 {
        let cfg = SimConfig {
            eta: a.path.eta,
            sector: s,
            seed: a.seed,
            n_geometries: a.geometries,
            ..SimConfig::default()
        };
        let est = estimate_distribution(&Quantity::CAnalytic(c.clone()), &cfg)?;
        let ks = ks_distance(&est.cdf, |g| se_cdf(&m, &s, &c, g).unwrap_or(f64::NAN));
        summary.push(format!(
            "{} PPP geometries: mean {} +- {} (99%), KS distance {}",
            a.geometries,
            fmt9(est.mean.value),
            fmt9(est.mean.ci99()),
            fmt9(ks)
        ));
        Some(est)
    } else {
        None
    };
    let mut table = Table::new(&["gamma", "F_C", "F_C_mc", "mc_stderr"]);
    for g in grid {
        let f = se_cdf(&m, &s, &c, g)?;
        let (mc, se) = mc_columns(sim.as_ref(), g);
        table.push(vec![fmt9(g), fmt9(f), mc, se]);
    }
    Ok(Output { table, summary })
}

fn mc_columns(sim: Option<&DistributionEstimate>, x: f64) -> (String, String) {
    match sim {
        Some(est) => {
            let f = est.cdf.eval(x);
            (fmt9(f), fmt9(binomial_se(f, est.cdf.len())))
        }
        None => (String::new(), String::new()),
    }
}

fn coverage(a: &CoverageArgs) -> Result<Output> {
    let m = model(&a.path, BranchMode::FourBranch)?;
    let one = SectorModel::unsectorized();
    let c = curve(&a.antennas, CurveKind::Exact)?;
    let nr = a.antennas.nr;
    let mut table = Table::new(&["gamma", "F_C", "F_tail", "within_validity"]);
    for g in Grid::parse(&a.grid)?.values() {
        if g <= 0.0 {
            return Err(usage("coverage grid must be positive"));
        }
        let tail = coverage_tail(&m, nr, g)?;
        table.push(vec![
            fmt9(g),
            fmt9(se_cdf(&m, &one, &c, g)?),
            fmt9(tail.probability),
            u8::from(tail.within_validity).to_string(),
        ]);
    }
    let approx = coverage_quantile(&m, nr, a.xi)?;
    let exact = se_quantile(&m, &one, &c, a.xi)?;
    Ok(Output {
        table,
        summary: vec![
            describe(&m),
            format!(
                "{} of users exceed {} bits/s/Hz (tail form), {} ({})",
                fmt9(1.0 - a.xi),
                fmt9(approx),
                fmt9(exact),
                c.label()
            ),
        ],
    })
}

fn mean_se_cmd(a: &MeanSeArgs) -> Result<Output> {
    let etas = match &a.eta_range {
        Some(r) => parse_range(r)?,
        None => vec![a.path.eta],
    };
    let s = sectors(&a.sector)?;
    let c = curve(&a.antennas, a.curve)?;
    let cfg = MimoConfig::new(a.antennas.nt, a.antennas.nr)?;
    let plain = s.sectors() == 1;
    let exact_curve = a.curve == CurveKind::Exact;
    if a.geometries > 0 && !plain {
        return Err(usage("the simulated exact average needs --S 1"));
    }
    let spec = QuadratureSpec::default();
    let mut table = Table::new(&["eta", "C_bar", "C_bar_ub", "C_bar_exact", "ci99"]);
    let mut summary = Vec::new();
    for eta in etas {
        let m = model_at(eta, a.path.mode, BranchMode::ThreeBranch)?;
        let c_bar = mean_se(&m, &s, &c, &spec)?;
        let ub = if plain && exact_curve && cfg == MimoConfig::siso() {
            Some(mean_se_cub(&m, &spec)?)
        } else {
            None
        };
        let sim = if a.geometries > 0 {
            let sc = sim_config(&a.sim, eta, s, a.geometries);
            Some(mean_exact_controlled(&cfg, &sc, a.control)?)
        } else {
            None
        };
        let mut line = format!(
            "eta {}: C_bar = {:.4} bits/s/Hz ({}{})",
            fmt9(eta),
            c_bar,
            c.label(),
            if plain { "" } else { ", per sector" }
        );
        if let Some(u) = ub {
            line.push_str(&format!(", bound {u:.4}"));
        }
        if let Some(e) = &sim {
            line.push_str(&format!(
                ", simulated {:.4} +- {:.4} (99%)",
                e.value,
                e.ci99()
            ));
        }
        summary.push(line);
        table.push(vec![
            fmt9(eta),
            fmt9(c_bar),
            opt9(ub),
            opt9(sim.map(|e| e.value)),
            opt9(sim.map(|e| e.ci99())),
        ]);
    }
    Ok(Output { table, summary })
}

fn lognormal(a: &LognormalArgs) -> Result<Output> {
    let m = model(&a.path, BranchMode::FourBranch)?;
    let s = sectors(&a.sector)?;
    let c = curve(&a.antennas, a.curve)?;
    let fit = lognormal_fit(&m, &s, &c, &QuadratureSpec::default())?;
    let mut table = Table::new(&["gamma", "F_C", "F_lognormal"]);
    for g in Grid::parse(&a.grid)?.values() {
        table.push(vec![
            fmt9(g),
            fmt9(se_cdf(&m, &s, &c, g)?),
            fmt9(fit.cdf(g)),
        ]);
    }
    Ok(Output {
        table,
        summary: vec![
            describe(&m),
            format!(
                "ln C ~ N(mu = {}, sigma^2 = {}) for {}",
                fmt9(fit.mu),
                fmt9(fit.sigma2),
                c.label()
            ),
        ],
    })
}

fn table_sstar(a: &TableSstarArgs) -> Result<Output> {
    let mut table = Table::new(&["eta", "delta", "s_star", "a_delta"]);
    for eta in parse_range(&a.eta_range)? {
        let m = PathModel::new(eta, BranchMode::FourBranch)?;
        table.push(vec![
            fmt9(eta),
            fmt9(m.delta()),
            fmt9(m.s_star()),
            fmt9(m.a_delta()),
        ]);
    }
    let summary = vec![format!("{} rows", table.len())];
    Ok(Output { table, summary })
}

fn table_mimo(a: &TableMimoArgs) -> Result<Output> {
    let m = PathModel::new(a.eta, BranchMode::ThreeBranch)?;
    let spec = QuadratureSpec::default();
    let mut table = Table::new(&["n_t", "n_r", "C_bar"]);
    let mut summary = vec![describe(&m)];
    for nt in 1..=a.max_antennas {
        let mut line = format!("n_t = {nt}:");
        for nr in 1..=a.max_antennas {
            let cfg = MimoConfig::new(nt, nr)?;
            let v = mean_se_general(&cfg, &m, &spec)?;
            line.push_str(&format!(" {v:.2}"));
            table.push(vec![nt.to_string(), nr.to_string(), fmt9(v)]);
        }
        summary.push(line);
    }
    Ok(Output { table, summary })
}

fn simulate(a: &SimulateArgs) -> Result<Output> {
    let m = model(&a.path, BranchMode::FourBranch)?;
    let s = sectors(&a.sector)?;
    let mimo = MimoConfig::new(a.antennas.nt, a.antennas.nr)?;
    let c = curve(&a.antennas, CurveKind::Exact)?;
    let config = SimConfig {
        layout: match a.layout {
            LayoutArg::Ppp => Layout::Ppp,
            LayoutArg::Lattice => Layout::Lattice,
        },
        user_region: match a.user_region {
            RegionArg::Third => UserRegion::CentralThird,
            RegionArg::Cell => UserRegion::CentralCell,
        },
        lattice_target: a.lattice_target,
        shadow_sigma_db: a.sigma_db,
        ..sim_config(&a.sim, a.path.eta, s, a.geometries)
    };
    let (quantity, header, default_grid) = match a.quantity {
        SimQuantity::Rho => (
            Quantity::Rho,
            ["theta", "F_rho", "F_rho_mc", "mc_stderr"],
            "0.01:100:200:log",
        ),
        SimQuantity::C => (
            Quantity::CAnalytic(c.clone()),
            ["gamma", "F_C", "F_C_mc", "mc_stderr"],
            "0:10:201:lin",
        ),
        SimQuantity::CExact => (
            Quantity::CExact(mimo),
            ["gamma", "F_C", "F_C_mc", "mc_stderr"],
            "0:10:201:lin",
        ),
        SimQuantity::CUb => (
            Quantity::CUb(mimo),
            ["gamma", "F_C", "F_C_mc", "mc_stderr"],
            "0:10:201:lin",
        ),
    };
    let grid = Grid::parse(a.grid.as_deref().unwrap_or(default_grid))?.values();
    let model_cdf = |x: f64| -> f64 {
        match a.quantity {
            SimQuantity::Rho => sector_sir_cdf(&m, &s, x),
            _ => se_cdf(&m, &s, &c, x).unwrap_or(f64::NAN),
        }
    };
    let est = estimate_distribution(&quantity, &config)?;
    let ks = ks_distance(&est.cdf, model_cdf);
    let mut table = Table::new(&header);
    for x in grid {
        let (mc, se) = mc_columns(Some(&est), x);
        table.push(vec![fmt9(x), fmt9(model_cdf(x)), mc, se]);
    }
    // the SIR has a power-law tail, so only its median is reported
    let mean = match a.quantity {
        SimQuantity::Rho => String::new(),
        _ => format!(
            "mean {} +- {} (99%), ",
            fmt9(est.mean.value),
            fmt9(est.mean.ci99())
        ),
    };
    Ok(Output {
        table,
        summary: vec![
            describe(&m),
            format!(
                "{} geometries: {mean}median {}, KS distance to the model {}",
                est.cdf.len(),
                fmt9(est.cdf.quantile(0.5)),
                fmt9(ks)
            ),
        ],
    })
}
