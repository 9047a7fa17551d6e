use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerance and truncation parameters for the simplex integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Half-width of the integration window, in standard deviations.
    pub truncation_width: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            truncation_width: 10.0,
            max_subdivisions: 1 << 20,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, truncation_width: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            abs_tol,
            truncation_width,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same spec with a different absolute tolerance.
    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        QuadratureSpec { abs_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::domain(format!(
                "quadrature abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.truncation_width >= 8.0 && self.truncation_width.is_finite()) {
            return Err(Error::domain(format!(
                "quadrature truncation_width must be >= 8, got {}",
                self.truncation_width
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::domain("quadrature max_subdivisions must be >= 1"));
        }
        Ok(())
    }
}

/// Result of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Achieved absolute error bound.
    pub error: f64,
    pub subdivisions: usize,
}

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    // Largest error first; ties broken by position for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Value and error summed in order of position, so the result does not
/// depend on heap layout.
fn ordered_totals(heap: &BinaryHeap<Segment>, frozen: &[Segment]) -> (f64, f64) {
    let mut segments: Vec<&Segment> = heap.iter().chain(frozen).collect();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    (
        segments.iter().map(|s| s.value).sum(),
        segments.iter().map(|s| s.error).sum(),
    )
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The segment with the largest error estimate is bisected until the summed
/// error falls below `spec.abs_tol`. Only `abs_tol` and `max_subdivisions`
/// are consulted; `truncation_width` is for callers integrating over ℝ.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::domain(format!(
            "integrate: need finite a < b, got [{a}, {b}]"
        )));
    }

    let first = gauss_kronrod(&f, a, b);
    if !(first.value.is_finite() && first.error.is_finite()) {
        return Err(Error::domain(
            "integrate: integrand is not finite on the interval",
        ));
    }
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    // Segments too narrow to split further.
    let mut frozen: Vec<Segment> = Vec::new();
    let mut subdivisions = 0;

    loop {
        if error <= spec.abs_tol {
            // The running total may have drifted; confirm with the same
            // ordered sum that is reported.
            error = ordered_totals(&heap, &frozen).1;
            if error <= spec.abs_tol {
                break;
            }
        }
        if subdivisions >= spec.max_subdivisions {
            let (value, error) = ordered_totals(&heap, &frozen);
            return Err(Error::Convergence {
                estimate: value,
                error,
                subdivisions,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            frozen.push(worst);
            continue;
        }
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;

        // Re-sum occasionally so the running total doesn't drift far.
        if subdivisions % 64 == 0 {
            error = heap.iter().chain(&frozen).map(|s| s.error).sum();
        }
    }

    let (value, error) = ordered_totals(&heap, &frozen);
    if !(error <= spec.abs_tol) {
        return Err(Error::Convergence {
            estimate: value,
            error,
            subdivisions,
        });
    }
    Ok(Integral {
        value,
        error,
        subdivisions,
    })
}
