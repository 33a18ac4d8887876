//! Browser bindings for the analytic side of `ergodic-se`: SIR and
//! spectral-efficiency CDFs evaluated on caller-supplied grids, and the
//! spatial average. `www/index.html` plots them.

use ergodic_se::seff::{mean_se, se_cdf, SeCurve};
use ergodic_se::sirdist::sector_sir_cdf;
use ergodic_se::specialfn::QuadratureSpec;
use ergodic_se::{BranchMode, PathModel, Result, SectorModel};
use wasm_bindgen::prelude::*;

fn mode(four: bool) -> BranchMode {
    if four {
        BranchMode::FourBranch
    } else {
        BranchMode::ThreeBranch
    }
}

pub fn sir_cdf_values(
    eta: f64,
    sectors: u32,
    q_db: f64,
    four_branch: bool,
    thetas: &[f64],
) -> Result<Vec<f64>> {
    let m = PathModel::new(eta, mode(four_branch))?;
    let s = SectorModel::from_db(sectors, q_db)?;
    Ok(thetas.iter().map(|&t| sector_sir_cdf(&m, &s, t)).collect())
}

pub fn se_cdf_values(
    eta: f64,
    sectors: u32,
    q_db: f64,
    nt: usize,
    nr: usize,
    gammas: &[f64],
) -> Result<Vec<f64>> {
    let m = PathModel::new(eta, BranchMode::FourBranch)?;
    let s = SectorModel::from_db(sectors, q_db)?;
    let c = SeCurve::mimo(nt, nr)?;
    gammas.iter().map(|&g| se_cdf(&m, &s, &c, g)).collect()
}

/// Per-sector average, with the three-branch density.
pub fn mean_se_value(eta: f64, sectors: u32, q_db: f64, nt: usize, nr: usize) -> Result<f64> {
    let m = PathModel::new(eta, BranchMode::ThreeBranch)?;
    let s = SectorModel::from_db(sectors, q_db)?;
    mean_se(&m, &s, &SeCurve::mimo(nt, nr)?, &QuadratureSpec::default())
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn sir_cdf(
    eta: f64,
    sectors: u32,
    q_db: f64,
    four_branch: bool,
    thetas: &[f64],
) -> std::result::Result<Vec<f64>, JsValue> {
    js(sir_cdf_values(eta, sectors, q_db, four_branch, thetas))
}

#[wasm_bindgen]
pub fn spectral_efficiency_cdf(
    eta: f64,
    sectors: u32,
    q_db: f64,
    nt: usize,
    nr: usize,
    gammas: &[f64],
) -> std::result::Result<Vec<f64>, JsValue> {
    js(se_cdf_values(eta, sectors, q_db, nt, nr, gammas))
}

#[wasm_bindgen]
pub fn average_spectral_efficiency(
    eta: f64,
    sectors: u32,
    q_db: f64,
    nt: usize,
    nr: usize,
) -> std::result::Result<f64, JsValue> {
    js(mean_se_value(eta, sectors, q_db, nt, nr))
}
