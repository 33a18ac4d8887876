//! Distribution of the local-average SIR in an interference-limited Poisson
//! network, with and without sectorization.
//!
//! Two branch families are provided. `FourBranch` keeps the exact form down
//! to `θ = 1/2`, bridges to the exponential lower tail `e^{s*/θ}` with a
//! constant segment at `A_δ`. `ThreeBranch` uses the exact form only above
//! `θ = 1` and stretches the lower tail up to it.

use crate::error::{Error, Result};
use crate::specialfn::{gamma_fn, gamma_star_series, gauss_2f1, sinc_norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchMode {
    FourBranch,
    ThreeBranch,
}

impl std::str::FromStr for BranchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four" | "4" | "four-branch" => Ok(BranchMode::FourBranch),
            "three" | "3" | "three-branch" => Ok(BranchMode::ThreeBranch),
            other => Err(Error::invalid(format!("unknown branch mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for BranchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BranchMode::FourBranch => "four",
            BranchMode::ThreeBranch => "three",
        })
    }
}

/// Path-loss model with everything the CDF branches need precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathModel {
    eta: f64,
    delta: f64,
    s_star: f64,
    sinc_delta: f64,
    a_delta: f64,
    lower_break: f64,
    mode: BranchMode,
}

const S_STAR_BRACKET: (f64, f64) = (-5.0, -1e-6);

/// Root of `Σ_k s^k (-1)^k / (k!(k - δ)) = 0` on `s < 0`.
pub fn solve_s_star(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta = {delta} must lie in (0, 1)"
        )));
    }
    let g = |s: f64| gamma_star_series(-delta, s);
    let (mut lo, mut hi) = S_STAR_BRACKET;
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    // g increases as s decreases: positive at the left end, negative at the right
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::Bracket {
            lower: lo,
            upper: hi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let residual = g(root)?;
    if residual.abs() > 1e-10 {
        return Err(Error::NoConvergence {
            what: "s* bisection",
            terms: 200,
        });
    }
    Ok(root)
}

/// `B_δ(x) = δ sinc²δ Γ²(δ+1) 2F1(1, δ+1; 2δ+2; -1/x) / (x^{1+2δ} Γ(2δ+2))`.
pub fn b_delta(delta: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("b_delta", format!("x = {x} must be > 0")));
    }
    let k = b_prefactor(delta);
    let v =
        k * gauss_2f1(1.0, delta + 1.0, 2.0 * delta + 2.0, -1.0 / x)? * x.powf(-1.0 - 2.0 * delta);
    if !v.is_finite() {
        return Err(Error::domain("b_delta", format!("overflow at x = {x}")));
    }
    Ok(v)
}

fn b_prefactor(delta: f64) -> f64 {
    let s = sinc_norm(delta);
    let g1 = gamma_fn(delta + 1.0);
    delta * s * s * g1 * g1 / gamma_fn(2.0 * delta + 2.0)
}

// dB/dx, using d/dz 2F1(a,b;c;z) = (ab/c) 2F1(a+1,b+1;c+1;z)
fn b_delta_derivative(delta: f64, x: f64) -> Result<f64> {
    let k = b_prefactor(delta);
    let z = -1.0 / x;
    let f = gauss_2f1(1.0, delta + 1.0, 2.0 * delta + 2.0, z)?;
    let fp = 0.5 * gauss_2f1(2.0, delta + 2.0, 2.0 * delta + 3.0, z)?;
    let p = x.powf(-2.0 - 2.0 * delta);
    Ok(k * (-(1.0 + 2.0 * delta) * p * f + p / x * fp))
}

impl PathModel {
    pub fn new(eta: f64, mode: BranchMode) -> Result<Self> {
        if !(eta > 2.0) || !eta.is_finite() {
            return Err(Error::invalid(format!(
                "path-loss exponent eta = {eta} must be > 2"
            )));
        }
        let delta = 2.0 / eta;
        let s_star = solve_s_star(delta)?;
        Self::from_parts(eta, delta, s_star, mode)
    }

    fn from_parts(eta: f64, delta: f64, s_star: f64, mode: BranchMode) -> Result<Self> {
        let sinc_delta = sinc_norm(delta);
        let (a_delta, upper) = match mode {
            BranchMode::FourBranch => (
                1.0 - 2f64.powf(delta) * sinc_delta + b_delta(delta, 1.0)?,
                0.5,
            ),
            BranchMode::ThreeBranch => (1.0 - sinc_delta, 1.0),
        };
        if !(a_delta > 0.0 && a_delta < 1.0) {
            return Err(Error::invalid(format!(
                "eta = {eta}: constant-segment level {a_delta} outside (0, 1)"
            )));
        }
        let lower_break = s_star / a_delta.ln();
        if !(lower_break > 0.0 && lower_break <= upper) {
            return Err(Error::invalid(format!(
                "eta = {eta}: lower-tail breakpoint {lower_break} beyond {upper}; \
                 the {mode}-branch form does not apply"
            )));
        }
        let join = (s_star / lower_break).exp();
        if (join - a_delta).abs() > 1e-12 {
            return Err(Error::NoConvergence {
                what: "lower-tail join consistency",
                terms: 0,
            });
        }
        Ok(Self {
            eta,
            delta,
            s_star,
            sinc_delta,
            a_delta,
            lower_break,
            mode,
        })
    }

    /// Same path loss, other branch family (reuses `s*`).
    pub fn with_mode(&self, mode: BranchMode) -> Result<Self> {
        if mode == self.mode {
            return Ok(*self);
        }
        Self::from_parts(self.eta, self.delta, self.s_star, mode)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn s_star(&self) -> f64 {
        self.s_star
    }
    pub fn sinc_delta(&self) -> f64 {
        self.sinc_delta
    }
    /// Level of the constant segment: `A_δ` (four-branch) or `1 - sinc δ` (three-branch).
    pub fn a_delta(&self) -> f64 {
        self.a_delta
    }
    pub fn mode(&self) -> BranchMode {
        self.mode
    }

    /// `s*/ln(a_delta)`: end of the exponential lower tail.
    pub fn lower_break(&self) -> f64 {
        self.lower_break
    }

    /// Ascending branch boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.mode {
            BranchMode::FourBranch => vec![self.lower_break, 0.5, 1.0],
            BranchMode::ThreeBranch => vec![self.lower_break, 1.0],
        }
    }

    pub fn b_delta(&self, x: f64) -> Result<f64> {
        b_delta(self.delta, x)
    }

    fn tail(&self, theta: f64) -> f64 {
        1.0 - theta.powf(-self.delta) * self.sinc_delta
    }

    /// CDF of the local-average SIR.
    pub fn sir_cdf(&self, theta: f64) -> f64 {
        if !(theta > 0.0) {
            return 0.0;
        }
        if theta.is_infinite() {
            return 1.0;
        }
        if theta < self.lower_break {
            return (self.s_star / theta).exp();
        }
        match self.mode {
            BranchMode::FourBranch => {
                if theta < 0.5 {
                    self.a_delta
                } else if theta < 1.0 {
                    // B is finite for x >= 1; a failure here would be a bug in 2F1
                    let b =
                        b_delta(self.delta, theta / (1.0 - theta)).expect("B_delta on [1, inf)");
                    (self.tail(theta) + b).clamp(0.0, 1.0)
                } else {
                    self.tail(theta)
                }
            }
            BranchMode::ThreeBranch => {
                if theta < 1.0 {
                    self.a_delta
                } else {
                    self.tail(theta)
                }
            }
        }
    }

    /// Density of [`Self::sir_cdf`]. At a breakpoint the right-limit value is
    /// returned with `at_breakpoint` set.
    pub fn sir_pdf(&self, theta: f64) -> Result<PdfValue> {
        if !(theta > 0.0) {
            return Err(Error::domain(
                "sir_pdf",
                format!("theta = {theta} must be > 0"),
            ));
        }
        let at_breakpoint = self.breakpoints().contains(&theta);
        let density = if theta < self.lower_break {
            -self.s_star * (self.s_star / theta).exp() / (theta * theta)
        } else {
            match self.mode {
                BranchMode::FourBranch if theta < 0.5 => 0.0,
                BranchMode::FourBranch if theta < 1.0 => {
                    let x = theta / (1.0 - theta);
                    self.tail_density(theta)
                        + b_delta_derivative(self.delta, x)? / ((1.0 - theta) * (1.0 - theta))
                }
                BranchMode::ThreeBranch if theta < 1.0 => 0.0,
                _ => self.tail_density(theta),
            }
        };
        Ok(PdfValue {
            density,
            at_breakpoint,
        })
    }

    fn tail_density(&self, theta: f64) -> f64 {
        self.delta * self.sinc_delta * theta.powf(-self.delta - 1.0)
    }

    /// `F_ρ(θ / shift)`; a shift of 2.188 (3.4 dB) maps PPP results onto a
    /// shadowless hexagonal layout.
    pub fn shifted_sir_cdf(&self, theta: f64, shift: f64) -> Result<f64> {
        if !(shift >= 1.0) {
            return Err(Error::invalid(format!("shift = {shift} must be >= 1")));
        }
        Ok(self.sir_cdf(theta / shift))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdfValue {
    pub density: f64,
    pub at_breakpoint: bool,
}

/// Shift (linear) between a shadowless triangular lattice and its PPP counterpart.
pub const HEX_LATTICE_SHIFT: f64 = 2.188;

/// Sector antenna model: `S` sectors, front-to-back ratio `Q` (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorModel {
    sectors: u32,
    front_to_back: f64,
    gain_in: f64,
    gain_out: f64,
}

impl SectorModel {
    pub fn new(sectors: u32, front_to_back: f64) -> Result<Self> {
        if sectors == 0 {
            return Err(Error::invalid("sector count must be >= 1"));
        }
        if !(front_to_back >= 1.0) {
            return Err(Error::invalid(format!(
                "front-to-back ratio {front_to_back} must be >= 1 (linear)"
            )));
        }
        let s = sectors as f64;
        let q = front_to_back;
        let (gain_in, gain_out) = if sectors == 1 {
            (1.0, 1.0)
        } else if q.is_infinite() {
            (s, 0.0)
        } else {
            (q * s / (q + s - 1.0), s / (q + s - 1.0))
        };
        Ok(Self {
            sectors,
            front_to_back,
            gain_in,
            gain_out,
        })
    }

    pub fn from_db(sectors: u32, front_to_back_db: f64) -> Result<Self> {
        if !(front_to_back_db >= 0.0) {
            return Err(Error::invalid(format!(
                "front-to-back ratio {front_to_back_db} dB must be >= 0"
            )));
        }
        Self::new(sectors, 10f64.powf(front_to_back_db / 10.0))
    }

    pub fn unsectorized() -> Self {
        Self {
            sectors: 1,
            front_to_back: 1.0,
            gain_in: 1.0,
            gain_out: 1.0,
        }
    }

    pub fn sectors(&self) -> u32 {
        self.sectors
    }
    pub fn front_to_back(&self) -> f64 {
        self.front_to_back
    }
    pub fn gain_in(&self) -> f64 {
        self.gain_in
    }
    pub fn gain_out(&self) -> f64 {
        self.gain_out
    }

    /// Antenna gain at azimuth `phi` for a sector oriented at `phi0`.
    pub fn pattern(&self, phi: f64, phi0: f64) -> f64 {
        if self.sectors == 1 {
            return 1.0;
        }
        let half = std::f64::consts::PI / self.sectors as f64;
        let d = (phi - phi0 + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        if d >= -half && d < half {
            self.gain_in
        } else {
            self.gain_out
        }
    }

    /// Upper limit `Q/(S-1)` of the sectorized SIR, `None` when unbounded.
    pub fn cap(&self) -> Option<f64> {
        if self.sectors > 1 && self.front_to_back.is_finite() {
            Some(self.front_to_back / (self.sectors as f64 - 1.0))
        } else {
            None
        }
    }

    fn is_trivial(&self) -> bool {
        self.sectors == 1 || self.front_to_back.is_infinite()
    }

    /// Unsectorized SIR threshold equivalent to sector threshold `theta`:
    /// `(Q + S - 1) / (Q/θ - S + 1)`. Infinite at or above the cap.
    pub fn to_unsectorized(&self, theta: f64) -> f64 {
        if self.is_trivial() {
            return theta;
        }
        let s1 = self.sectors as f64 - 1.0;
        let q = self.front_to_back;
        let den = q / theta - s1;
        if den <= 0.0 {
            f64::INFINITY
        } else {
            (q + s1) / den
        }
    }

    /// Sectorized SIR for an unsectorized value `rho`: `Qρ / ((S-1)ρ + Q + S - 1)`.
    pub fn from_unsectorized(&self, rho: f64) -> f64 {
        if self.is_trivial() {
            return rho;
        }
        let s1 = self.sectors as f64 - 1.0;
        let q = self.front_to_back;
        if rho.is_infinite() {
            return q / s1;
        }
        q * rho / (s1 * rho + q + s1)
    }
}

/// CDF of the sectorized local-average SIR.
pub fn sector_sir_cdf(model: &PathModel, sect: &SectorModel, theta: f64) -> f64 {
    if let Some(cap) = sect.cap() {
        if theta >= cap {
            return 1.0;
        }
    }
    model.sir_cdf(sect.to_unsectorized(theta))
}

/// Density of [`sector_sir_cdf`] below the cap.
pub fn sector_sir_pdf(model: &PathModel, sect: &SectorModel, theta: f64) -> Result<PdfValue> {
    if sect.is_trivial() {
        return model.sir_pdf(theta);
    }
    let cap = sect.cap().expect("finite cap when sectorized");
    if theta >= cap {
        return Ok(PdfValue {
            density: 0.0,
            at_breakpoint: theta == cap,
        });
    }
    let s1 = sect.sectors as f64 - 1.0;
    let q = sect.front_to_back;
    let t = sect.to_unsectorized(theta);
    let dt = (q + s1) * q / ((q - s1 * theta) * (q - s1 * theta));
    let p = model.sir_pdf(t)?;
    Ok(PdfValue {
        density: p.density * dt,
        at_breakpoint: p.at_breakpoint,
    })
}

/// Smallest `θ` with `F(θ) >= p`; on a constant segment this is its left end.
pub fn sir_quantile(model: &PathModel, sect: &SectorModel, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(
            "sir_quantile",
            format!("p = {p} must lie in (0, 1)"),
        ));
    }
    let cdf = |t: f64| sector_sir_cdf(model, sect, t);
    let mut lo = 0.0;
    let mut hi = match sect.cap() {
        Some(cap) => cap,
        None => {
            let mut h = 1.0;
            while cdf(h) < p {
                h *= 2.0;
                if !h.is_finite() {
                    return Err(Error::Bracket {
                        lower: 0.0,
                        upper: h,
                    });
                }
            }
            h
        }
    };
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if cdf(mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
