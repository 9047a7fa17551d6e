use crate::{Error, Result};

/// A located root together with the final sign-change bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub g_x: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Root {
    pub fn bracket_width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Brent's method: bisection safeguarded inverse-quadratic / secant steps.
///
/// Returns once the sign-change bracket is at most `x_tol` wide (or the
/// floating-point spacing at the root, whichever is larger), or `g` hits zero
/// exactly.
pub fn find_root<G: FnMut(f64) -> f64>(mut g: G, lo: f64, hi: f64, x_tol: f64) -> Result<Root> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!(
            "find_root: need finite lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(x_tol > 0.0) {
        return Err(Error::domain(format!(
            "find_root: x_tol must be positive, got {x_tol}"
        )));
    }
    let g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo.is_nan() || g_hi.is_nan() {
        return Err(Error::domain("find_root: g is NaN at a bracket end"));
    }
    if g_lo == 0.0 {
        return Ok(Root {
            x: lo,
            g_x: 0.0,
            lo,
            hi: lo,
            iterations: 0,
        });
    }
    if g_hi == 0.0 {
        return Ok(Root {
            x: hi,
            g_x: 0.0,
            lo: hi,
            hi,
            iterations: 0,
        });
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::Bracket { lo, hi, g_lo, g_hi });
    }

    // b: best estimate, c: opposite end of the bracket, a: previous b.
    let (mut a, mut fa) = (lo, g_lo);
    let (mut b, mut fb) = (hi, g_hi);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let mut iterations = 0;

    loop {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol1 = (0.5 * x_tol).max(2.0 * f64::EPSILON * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            let (lo, hi) = if fb == 0.0 {
                (b, b)
            } else if b < c {
                (b, c)
            } else {
                (c, b)
            };
            return Ok(Root {
                x: b,
                g_x: fb,
                lo,
                hi,
                iterations,
            });
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = g(b);
        iterations += 1;
        if fb.is_nan() {
            return Err(Error::domain(format!("find_root: g({b}) is NaN")));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathkit::phi;
    use proptest::prelude::*;

    #[test]
    fn linear() {
        let r = find_root(|x| x - 2.0, 0.0, 5.0, 1e-10).unwrap();
        assert!((r.x - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn normal_median() {
        let r = find_root(|x| phi(x) - 0.5, -1.0, 1.0, 1e-12).unwrap();
        assert!(r.x.abs() <= 1e-12);
    }

    #[test]
    fn square_root_of_two() {
        // long-division digits of √2
        let sqrt2 = 1.414_213_562_373_095_0;
        let r = find_root(|x| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r.x - sqrt2).abs() <= 1e-12);
        assert!(r.bracket_width() <= 1e-12);
        assert!(r.lo <= sqrt2 && sqrt2 <= r.hi);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        assert!(matches!(
            find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-8),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn exact_zero_at_endpoint() {
        let r = find_root(|x| x, 0.0, 1.0, 1e-8).unwrap();
        assert_eq!(r.x, 0.0);
    }

    #[test]
    fn flat_tangent_like_function_converges() {
        // Very shallow crossing, the regime of the curve intersections.
        let r = find_root(|x| 1e-9 * (x - 0.3).powi(3), 0.0, 1.0, 1e-10).unwrap();
        assert!(r.lo <= 0.3 && 0.3 <= r.hi);
        assert!(r.bracket_width() <= 1e-10);
    }

    proptest! {
        #[test]
        fn final_bracket_straddles_sign_change(
            root in -3.0f64..3.0,
            k in 0.1f64..5.0,
            tol in 1e-12f64..1e-4,
        ) {
            let g = |x: f64| (k * (x - root)).tanh() + 0.1 * (x - root).powi(3);
            let lo = root - 1.7;
            let hi = root + 2.3;
            let r = find_root(g, lo, hi, tol).unwrap();
            prop_assert!(r.bracket_width() <= tol.max(4.0 * f64::EPSILON * r.x.abs()));
            prop_assert!(g(r.lo) * g(r.hi) <= 0.0);
            prop_assert!(r.g_x.abs() <= g(lo).abs() + g(hi).abs());
        }
    }
}
