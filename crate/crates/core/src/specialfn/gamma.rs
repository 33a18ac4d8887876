use crate::error::{Error, Result};

const MAX_TERMS: usize = 500;

/// Real series `Σ_{k≥0} (-x)^k / (k! (a + k))`.
///
/// This is `x^{-a} γ(a, x)` continued to every real `x`; for `x < 0` it is the
/// only real combination the `s*` root condition needs.
pub fn gamma_star_series(a: f64, x: f64) -> Result<f64> {
    if a <= 0.0 && a == a.round() {
        return Err(Error::domain(
            "gamma_star_series",
            format!("a = {a} is a nonpositive integer"),
        ));
    }
    let mut term = 1.0; // (-x)^k / k!
    let mut sum = 1.0 / a;
    for k in 1..MAX_TERMS {
        term *= -x / k as f64;
        let contrib = term / (a + k as f64);
        sum += contrib;
        if (k as f64) > x.abs() && contrib.abs() <= 1e-17 * sum.abs().max(1e-300) {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma series",
        terms: MAX_TERMS,
    })
}

/// Lower incomplete gamma `γ(a, x) = x^a Σ (-x)^k / (k!(a+k))`, for any
/// non-pole `a` and `x >= 0` (the power `x^a` is complex below zero; use
/// [`gamma_star_series`] there).
pub fn lower_gamma_continued(a: f64, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::domain(
            "lower_gamma_continued",
            "x < 0: x^a is complex, use gamma_star_series",
        ));
    }
    if x == 0.0 {
        return if a > 0.0 {
            Ok(0.0)
        } else {
            Err(Error::domain(
                "lower_gamma_continued",
                "x = 0 with a <= 0 diverges",
            ))
        };
    }
    if a > 0.0 && x > 1.0 {
        // the alternating series loses digits; the regularized route does not
        return lower_gamma(a, x);
    }
    Ok(x.powf(a) * gamma_star_series(a, x)?)
}

/// Lower incomplete gamma `γ(a, x) = ∫_0^x t^{a-1} e^{-t} dt` for `a, x > 0`.
pub fn lower_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(Error::domain("lower_gamma", format!("a = {a}, x = {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    statrs::function::gamma::checked_gamma_li(a, x)
        .map_err(|e| Error::domain("lower_gamma", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn series_at_zero_is_leading_term() {
        assert_eq!(gamma_star_series(-0.5, 0.0).unwrap(), -2.0);
    }

    #[test]
    fn vanishes_near_tabulated_root() {
        // tabulated root for delta = 1/2 is -0.854 (3 decimals)
        let v = gamma_star_series(-0.5, -0.854).unwrap();
        assert!(v.abs() < 5e-3, "{v}");
        assert!(gamma_star_series(-0.5, -0.853).unwrap() < 0.0);
        assert!(gamma_star_series(-0.5, -0.855).unwrap() > 0.0);
    }

    #[test]
    fn lower_gamma_erf_identity() {
        let oracle = std::f64::consts::PI.sqrt() * crate::specialfn::erf(1.0);
        assert_relative_eq!(lower_gamma(0.5, 1.0).unwrap(), oracle, max_relative = 1e-12);
        assert_relative_eq!(
            lower_gamma_continued(0.5, 1.0).unwrap(),
            oracle,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            lower_gamma_continued(0.5, 0.3).unwrap(),
            lower_gamma(0.5, 0.3).unwrap(),
            max_relative = 1e-12
        );
        assert!((oracle - 1.493_648).abs() < 1e-6);
    }

    #[test]
    fn domain_errors() {
        assert!(gamma_star_series(-2.0, 1.0).is_err());
        assert!(lower_gamma_continued(0.5, -1.0).is_err());
        assert!(lower_gamma(-0.5, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn strictly_increasing_in_minus_s(delta in 0.05f64..0.95, s in -8.0f64..-1e-3, ds in 1e-3f64..1.0) {
            let a = gamma_star_series(-delta, s).unwrap();
            let b = gamma_star_series(-delta, s - ds).unwrap();
            prop_assert!(b > a);
        }
    }
}
