use super::EULER_GAMMA;
use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;
// continued-fraction stopping test; rounding keeps del a few ulps from 1
const CF_EPS: f64 = 4.0 * f64::EPSILON;
// above this the three-term asymptotic series is exact to double precision
const ASYMPTOTIC_FROM: f64 = 1e10;

/// Generalized exponential integral `E_n(x) = ∫_1^∞ t^{-n} e^{-xt} dt`.
///
/// Power series for `x <= 1`, modified Lentz continued fraction above.
/// Returns 0 once `e^{-x}` underflows.
pub fn exp_integral_en(n: u32, x: f64) -> Result<f64> {
    if x > 1.0 {
        let scaled = continued_fraction(n, x)?;
        return Ok(scaled * (-x).exp());
    }
    small_argument(n, x)
}

/// `e^x E_n(x)`, finite for every `x > 0` (no overflow for large `x`).
pub fn exp_integral_en_scaled(n: u32, x: f64) -> Result<f64> {
    if x > 1.0 {
        continued_fraction(n, x)
    } else {
        Ok(small_argument(n, x)? * x.exp())
    }
}

fn check_args(n: u32, x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::domain(
            "exp_integral_en",
            format!("x = {x} must be >= 0"),
        ));
    }
    if x == 0.0 && n <= 1 {
        return Err(Error::domain(
            "exp_integral_en",
            format!("E_{n}(0) diverges"),
        ));
    }
    Ok(())
}

fn small_argument(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    if n == 0 {
        return Ok((-x).exp() / x);
    }
    let nm1 = n as i64 - 1;
    if x == 0.0 {
        return Ok(1.0 / nm1 as f64);
    }
    let mut ans = if nm1 != 0 {
        1.0 / nm1 as f64
    } else {
        -x.ln() - EULER_GAMMA
    };
    let mut fact = 1.0;
    for i in 1..=MAX_ITER as i64 {
        fact *= -x / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * EPS {
            return Ok(ans);
        }
    }
    Err(Error::NoConvergence {
        what: "exponential integral series",
        terms: MAX_ITER,
    })
}

// Returns e^x E_n(x) for x > 1.
fn continued_fraction(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    if n == 0 {
        return Ok(1.0 / x);
    }
    if x > ASYMPTOTIC_FROM {
        let nf = n as f64;
        return Ok((1.0 - nf / x + nf * (nf + 1.0) / (x * x)) / x);
    }
    let nm1 = n as f64 - 1.0;
    let tiny = 1e-300;
    let mut b = x + n as f64;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let a = -(i as f64) * (nm1 + i as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        what: "exponential integral continued fraction",
        terms: MAX_ITER,
    })
}
