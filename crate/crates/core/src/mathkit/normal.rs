use crate::{Error, Result};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Φ(x) without input checks. NaN propagates.
///
/// Evaluated through `erfc` so both tails keep full relative precision.
#[inline]
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal cumulative distribution function Φ(x).
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "std_normal_cdf: non-finite input {x}"
        )));
    }
    Ok(phi(x))
}

/// Upper tail 1 − Φ(x), accurate where Φ(x) rounds to one.
pub fn std_normal_sf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "std_normal_sf: non-finite input {x}"
        )));
    }
    Ok(phi(-x))
}

/// ln(1 − Φ(x)). Finite for every finite `x`; switches to the Mills-ratio
/// expansion once `erfc` would underflow.
pub fn log_std_normal_sf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "log_std_normal_sf: non-finite input {x}"
        )));
    }
    if x < 35.0 {
        return Ok(phi(-x).ln());
    }
    let z2 = x * x;
    let inv = 1.0 / z2;
    // 1 - 1/z² + 3/z⁴ - 15/z⁶ + 105/z⁸
    let series = 1.0 + inv * (-1.0 + inv * (3.0 + inv * (-15.0 + inv * 105.0)));
    Ok(-0.5 * z2 - x.ln() - 0.5 * (2.0 * PI).ln() + series.ln())
}

/// Standard normal density (1/√(2π))·exp(−x²/2).
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "std_normal_pdf: non-finite input {x}"
        )));
    }
    Ok(pdf(x))
}

#[inline]
pub(crate) fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Φ(x) from 40-digit adaptive quadrature of the density.
    const PHI_TABLE: &[(f64, f64)] = &[
        (-8.0, 6.2209605742717841235e-16),
        (-7.5, 3.1908916729108962278e-14),
        (-6.0, 9.865876450376981407e-10),
        (-5.0, 2.8665157187919391167e-7),
        (-3.3, 0.00048342414238377720111),
        (-2.0, 0.0227501319481792072),
        (-1.0, 0.15865525393145705141),
        (-0.5, 0.30853753872598689636),
        (0.25, 0.59870632568292372424),
        (1.0, 0.84134474606854294859),
        (1.7, 0.95543453724145696051),
        (3.0, 0.99865010196836990547),
        (4.2, 0.99998665425098409366),
        (6.0, 0.99999999901341235496),
        (8.0, 0.9999999999999993779),
    ];

    #[test]
    fn cdf_matches_reference_table() {
        for &(x, want) in PHI_TABLE {
            let got = std_normal_cdf(x).unwrap();
            let rel = ((got - want) / want).abs();
            assert!(rel <= 1e-14, "Φ({x}) = {got:e}, want {want:e}, rel {rel:e}");
        }
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert!((std_normal_cdf(1.0).unwrap() - 0.8413447460685429).abs() < 1e-15);
        let s = std_normal_cdf(-3.0).unwrap() + std_normal_cdf(3.0).unwrap();
        assert!((s - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn pdf_examples() {
        assert_eq!(std_normal_pdf(0.0).unwrap(), 0.3989422804014327);
        assert_eq!(std_normal_pdf(1.7).unwrap(), std_normal_pdf(-1.7).unwrap());
        assert_eq!(std_normal_pdf(40.0).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        for x in [f64::NAN, f64::INFINITY, f64::NEG_INFINITY] {
            assert!(matches!(std_normal_cdf(x), Err(Error::Domain(_))));
            assert!(matches!(std_normal_pdf(x), Err(Error::Domain(_))));
            assert!(matches!(log_std_normal_sf(x), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn log_tail_is_continuous_across_branch() {
        let below = log_std_normal_sf(35.0 - 1e-9).unwrap();
        let above = log_std_normal_sf(35.0).unwrap();
        assert!((below - above).abs() < 1e-7, "{below} vs {above}");
        assert!(log_std_normal_sf(1e3).unwrap().is_finite());
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(a in -40.0f64..40.0, b in -40.0f64..40.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(phi(lo) <= phi(hi));
        }

        #[test]
        fn cdf_derivative_is_pdf(x in -6.0f64..6.0) {
            let h = 1e-5;
            let d = (phi(x + h) - phi(x - h)) / (2.0 * h);
            prop_assert!((d - pdf(x)).abs() < 1e-6);
        }
    }
}
