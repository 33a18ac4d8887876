use super::{gamma_fn, recip_gamma};
use crate::error::{Error, Result};

const MAX_TERMS: usize = 20_000;
// c - a - b closer than this to an integer makes the connection formula cancel
const DEGENERATE_GAP: f64 = 1e-6;
const PERTURB: f64 = 1e-5;
// in the degenerate case the plain series is used while 1 - z stays above this
const SERIES_FLOOR: f64 = 0.02;

fn is_pole(c: f64) -> bool {
    c <= 0.0 && c == c.round()
}

/// Direct Gauss series `Σ (a)_k (b)_k / ((c)_k k!) z^k`, valid for `|z| < 1`.
pub fn gauss_2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if is_pole(c) {
        return Err(Error::domain("gauss_2f1", format!("c = {c} is a pole")));
    }
    if z.abs() >= 1.0 {
        return Err(Error::domain(
            "gauss_2f1_series",
            format!("|z| = {} >= 1", z.abs()),
        ));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= 1e-17 * sum.abs() && kf > (a.abs() + b.abs()) {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "hypergeometric series",
        terms: MAX_TERMS,
    })
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` for real arguments and `z < 1`.
///
/// `|z| <= 1/2` sums the series directly, `z < -1/2` goes through Pfaff's
/// transformation and `1/2 < z < 1` through the `1 - z` connection formula.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if is_pole(c) {
        return Err(Error::domain("gauss_2f1", format!("c = {c} is a pole")));
    }
    if !(z < 1.0) {
        return Err(Error::domain("gauss_2f1", format!("z = {z} >= 1")));
    }
    dispatch(a, b, c, z, 1.0 - z)
}

/// `2F1(a, b; c; 1 - w)` with the complement `w` given exactly, for `0 < w`.
pub(crate) fn gauss_2f1_complement(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    if is_pole(c) {
        return Err(Error::domain("gauss_2f1", format!("c = {c} is a pole")));
    }
    if !(w > 0.0) {
        return Err(Error::domain("gauss_2f1", format!("1 - z = {w} <= 0")));
    }
    dispatch(a, b, c, 1.0 - w, w)
}

fn dispatch(a: f64, b: f64, c: f64, z: f64, w: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(1.0);
    }
    if z.abs() <= 0.5 {
        return gauss_2f1_series(a, b, c, z);
    }
    if z < -0.5 {
        // Pfaff: (1-z)^{-a} 2F1(a, c-b; c; z/(z-1)); new argument lies in (1/3, 1)
        let z2 = -z / w;
        let w2 = 1.0 / w;
        return Ok(w.powf(-a) * dispatch(a, c - b, c, z2, w2)?);
    }
    connection_one_minus_z(a, b, c, w)
}

fn connection_one_minus_z(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    let s = c - a - b;
    if (s - s.round()).abs() < DEGENERATE_GAP {
        if w >= SERIES_FLOOR {
            return gauss_2f1_series(a, b, c, 1.0 - w);
        }
        let hi = connection_terms(a, b, c + PERTURB, w)?;
        let lo = connection_terms(a, b, c - PERTURB, w)?;
        return Ok(0.5 * (hi + lo));
    }
    connection_terms(a, b, c, w)
}

fn connection_terms(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    let s = c - a - b;
    let gc = gamma_fn(c);
    let t1 = if recip_gamma(c - a) == 0.0 || recip_gamma(c - b) == 0.0 {
        0.0
    } else {
        gc * gamma_fn(s)
            * recip_gamma(c - a)
            * recip_gamma(c - b)
            * gauss_2f1_series(a, b, 1.0 - s, w)?
    };
    let t2 = if recip_gamma(a) == 0.0 || recip_gamma(b) == 0.0 {
        0.0
    } else {
        w.powf(s)
            * gc
            * gamma_fn(-s)
            * recip_gamma(a)
            * recip_gamma(b)
            * gauss_2f1_series(c - a, c - b, 1.0 + s, w)?
    };
    Ok(t1 + t2)
}

/// Kummer confluent hypergeometric `1F1(a; b; z)`.
///
/// Negative arguments use Kummer's transformation `e^z 1F1(b-a; b; -z)` so the
/// summed series has no cancellation.
pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    if is_pole(b) {
        return Err(Error::domain("kummer_1f1", format!("b = {b} is a pole")));
    }
    if z < 0.0 {
        return Ok(z.exp() * kummer_series(b - a, b, -z)?);
    }
    kummer_series(a, b, z)
}

fn kummer_series(a: f64, b: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / ((b + kf) * (kf + 1.0)) * z;
        sum += term;
        if term == 0.0 || (term.abs() <= 1e-17 * sum.abs() && kf > z.abs()) {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "confluent hypergeometric series",
        terms: MAX_TERMS,
    })
}
