//! Closed-form and single-integral expressions for the average probability
//! of correct optimal decoding.
//!
//! | set | λ² convention            | SNR convention               |
//! |-----|--------------------------|------------------------------|
//! | L1  | [`pd_l1`]                | (N_u = 1, so SNR = λ²)       |
//! | SI  | [`pd_si_lambda`]         | [`pd_si_snr`]                |
//! | Lc  |                          | [`pd_lc`]                    |

use crate::mathkit::{integrate, log_std_normal_sf, phi, QuadratureSpec};
use crate::{Convention, Error, Result};
use serde::{Deserialize, Serialize};

/// Integral results whose error bound exceeds this are rejected.
pub const MAX_QUADRATURE_ERROR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdValue {
    pub value: f64,
    pub convention: Convention,
    #[serde(rename = "M")]
    pub m: usize,
    /// Achieved absolute error bound; zero for closed forms.
    pub quadrature_error: f64,
}

fn check_argument(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::domain(format!(
            "{name} must be finite and >= 0, got {x}"
        )));
    }
    Ok(())
}

fn check_l1_order(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::domain(format!(
            "the L1 / Lc formula requires M ≥ 3, got M = {m}"
        )));
    }
    Ok(())
}

fn check_si_order(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::domain(format!(
            "the simplex formula requires M ≥ 2, got M = {m}"
        )));
    }
    Ok(())
}

/// P_d of the L1 set: (1/M)·[4Φ(√(λ²M/8)) − 1].
pub fn pd_l1(m: usize, lambda2: f64) -> Result<PdValue> {
    check_l1_order(m)?;
    check_argument("lambda2", lambda2)?;
    let mf = m as f64;
    let value = if lambda2 == 0.0 {
        1.0 / mf
    } else {
        (4.0 * phi((lambda2 * mf / 8.0).sqrt()) - 1.0) / mf
    };
    Ok(PdValue {
        value,
        convention: Convention::Lambda2,
        m,
        quadrature_error: 0.0,
    })
}

/// ln(3/M − P_d(L1)), the log-gap to the supremum 3/M.
///
/// Stays finite long after `pd_l1` itself has rounded to 3/M.
pub fn pd_l1_log_deficit(m: usize, lambda2: f64) -> Result<f64> {
    check_l1_order(m)?;
    check_argument("lambda2", lambda2)?;
    let z = (lambda2 * m as f64 / 8.0).sqrt();
    // 3/M − P_d = 4·(1 − Φ(z))/M
    Ok((4.0 / m as f64).ln() + log_std_normal_sf(z)?)
}

/// P_d of the coded L1 set against normalized SNR:
/// (1/M)·[4Φ(√((M−1)M·SNR/8)) − 1].
///
/// Identical to [`pd_l1`] at λ² = (M−1)·SNR.
pub fn pd_lc(m: usize, snr: f64) -> Result<PdValue> {
    check_l1_order(m)?;
    check_argument("snr", snr)?;
    let mut v = pd_l1(m, (m - 1) as f64 * snr)?;
    v.convention = Convention::Snr;
    Ok(v)
}

/// ∫ φ(x − shift)·Φ(x)^{M−1} dx over [−c, shift + c].
fn simplex_integral(m: usize, shift: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let power = i32::try_from(m - 1).map_err(|_| Error::domain(format!("M = {m} is too large")))?;
    let c = spec.truncation_width;
    let integrand = |x: f64| {
        let d = x - shift;
        // φ(d) inline; the checked wrapper would cost a branch per node
        0.398_942_280_401_432_7 * (-0.5 * d * d).exp() * phi(x).powi(power)
    };
    let r = integrate(integrand, -c, shift + c, spec)?;
    if !(r.error < MAX_QUADRATURE_ERROR) {
        return Err(Error::Convergence {
            estimate: r.value,
            error: r.error,
            subdivisions: r.subdivisions,
        });
    }
    Ok((r.value.clamp(0.0, 1.0), r.error))
}

/// P_d of the regular simplex with vertex energy λ²; mean shift √(λ²M/(M−1)).
pub fn pd_si_lambda(m: usize, lambda2: f64, spec: &QuadratureSpec) -> Result<PdValue> {
    check_si_order(m)?;
    check_argument("lambda2", lambda2)?;
    let shift = (lambda2 * m as f64 / (m - 1) as f64).sqrt();
    let (value, quadrature_error) = simplex_integral(m, shift, spec)?;
    Ok(PdValue {
        value,
        convention: Convention::Lambda2,
        m,
        quadrature_error,
    })
}

/// P_d of the regular simplex against normalized SNR; mean shift √(M·SNR).
pub fn pd_si_snr(m: usize, snr: f64, spec: &QuadratureSpec) -> Result<PdValue> {
    check_si_order(m)?;
    check_argument("snr", snr)?;
    let shift = (m as f64 * snr).sqrt();
    let (value, quadrature_error) = simplex_integral(m, shift, spec)?;
    Ok(PdValue {
        value,
        convention: Convention::Snr,
        m,
        quadrature_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn l1_values() {
        assert_eq!(pd_l1(7, 0.0).unwrap().value, 1.0 / 7.0);
        let top = pd_l1(7, 1e3).unwrap().value;
        assert!((top - 3.0 / 7.0).abs() < 1e-15 && top <= 3.0 / 7.0);
        let v = pd_l1(7, 19.86e-4).unwrap().value;
        assert!((v - 0.15236).abs() < 2e-5, "{v}");
        assert!(matches!(pd_l1(2, 1.0), Err(Error::Domain(m)) if m.contains("M ≥ 3")));
        assert!(pd_l1(5, -1.0).is_err());
    }

    #[test]
    fn log_deficit_matches_direct_difference() {
        for &(m, l) in &[(3usize, 0.5), (7, 2.0), (10, 10.0)] {
            let direct = 3.0 / m as f64 - pd_l1(m, l).unwrap().value;
            let logd = pd_l1_log_deficit(m, l).unwrap();
            assert!((logd.exp() - direct).abs() < 1e-14, "{m} {l}");
        }
        assert!(pd_l1_log_deficit(7, 1e6).unwrap().is_finite());
    }

    #[test]
    fn si_uniform_guessing_at_zero() {
        for m in 2..=10 {
            let v = pd_si_lambda(m, 0.0, &spec()).unwrap();
            assert!(
                (v.value - 1.0 / m as f64).abs() <= 1e-12,
                "M={m}: {}",
                v.value
            );
            assert!(v.quadrature_error <= 1e-12);
        }
    }

    #[test]
    fn si_antipodal_pair() {
        // M = 2: Pr(N(√2·λ, 1) > N(0, 1)) = Φ(λ) at λ = 1
        let v = pd_si_lambda(2, 1.0, &spec()).unwrap().value;
        assert!((v - 0.841_344_746_068_542_9).abs() < 1e-12, "{v}");
    }

    #[test]
    fn si_near_crossing() {
        let v = pd_si_lambda(7, 19.86e-4, &spec()).unwrap().value;
        // 30-digit adaptive quadrature of the same integral
        assert!((v - 0.152_357_497_232_790_68).abs() < 1e-12, "{v}");
        assert!((v - 0.15236).abs() < 2e-5);
    }

    #[test]
    fn snr_forms() {
        assert!((pd_si_snr(7, 0.0, &spec()).unwrap().value - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(pd_lc(7, 0.0).unwrap().value, 1.0 / 7.0);
        let big = pd_si_snr(30, 4.0, &spec()).unwrap().value;
        let small = pd_si_snr(3, 4.0, &spec()).unwrap().value;
        assert!(big > small);
        let lc = pd_lc(7, 3.3e-4).unwrap().value;
        let si = pd_si_snr(7, 3.3e-4, &spec()).unwrap().value;
        assert!((lc - si).abs() < 1e-6, "{lc} vs {si}");
        assert!(pd_lc(2, 1.0).is_err());
        assert!(pd_si_snr(1, 1.0, &spec()).is_err());
    }

    #[test]
    fn saturation_split() {
        for m in 3..=12 {
            let si = pd_si_lambda(m, 1e4, &spec()).unwrap().value;
            let l1 = pd_l1(m, 1e4).unwrap().value;
            assert!((si - 1.0).abs() < 1e-12);
            assert!((l1 - 3.0 / m as f64).abs() < 1e-12);
            // before both round to their limits
            let si = pd_si_lambda(m, 50.0, &spec()).unwrap().value;
            let l1 = pd_l1(m, 50.0).unwrap().value;
            assert!(si > l1, "M={m}");
        }
    }

    proptest! {
        #[test]
        fn convention_bridges(m in 3usize..=30, s in 0.0f64..2.0) {
            let lc = pd_lc(m, s).unwrap().value;
            let l1 = pd_l1(m, (m - 1) as f64 * s).unwrap().value;
            prop_assert_eq!(lc, l1);
            let a = pd_si_snr(m, s, &spec()).unwrap().value;
            let b = pd_si_lambda(m, (m - 1) as f64 * s, &spec()).unwrap().value;
            prop_assert!((a - b).abs() <= 2.0 * spec().abs_tol);
        }

        // Arguments are scaled so Φ stays below 1 - 1e-9 (z ≤ 6); beyond that
        // the curves saturate in double precision.
        #[test]
        fn strictly_increasing(m in 3usize..=20, frac in 1e-6f64..0.9, dfrac in 1e-3f64..0.1) {
            let s = spec();
            let mf = m as f64;
            let l1_max = 8.0 * 36.0 / mf;
            let (x, dx) = (frac * l1_max, dfrac * l1_max);
            prop_assert!(pd_l1(m, x + dx).unwrap().value > pd_l1(m, x).unwrap().value);
            let lc_max = l1_max / (mf - 1.0);
            let (x, dx) = (frac * lc_max, dfrac * lc_max);
            prop_assert!(pd_lc(m, x + dx).unwrap().value > pd_lc(m, x).unwrap().value);
            let si_max = 36.0 * (mf - 1.0) / mf;
            let (x, dx) = (frac * si_max, dfrac * si_max);
            prop_assert!(
                pd_si_lambda(m, x + dx, &s).unwrap().value > pd_si_lambda(m, x, &s).unwrap().value
            );
            let (x, dx) = (x / (mf - 1.0), dx / (mf - 1.0));
            prop_assert!(
                pd_si_snr(m, x + dx, &s).unwrap().value > pd_si_snr(m, x, &s).unwrap().value
            );
        }

        #[test]
        fn ranges(m in 3usize..=30, x in 0.0f64..50.0) {
            let mf = m as f64;
            let l1 = pd_l1(m, x).unwrap().value;
            prop_assert!(l1 >= 1.0 / mf && l1 <= 3.0 / mf);
            let si = pd_si_lambda(m, x, &spec()).unwrap().value;
            prop_assert!(si >= 1.0 / mf - 1e-12 && si <= 1.0);
        }
    }
}
