//! Curve sweeps, crossing-point location and dominance checks.

use crate::closedform::{pd_l1, pd_lc, pd_si_lambda, pd_si_snr, PdValue};
use crate::mathkit::{find_root, QuadratureSpec};
use crate::par;
use crate::{Convention, Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

/// Signal-set family of a probability curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    L1,
    Si,
    Lc,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::L1 => "l1",
            Family::Si => "si",
            Family::Lc => "lc",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Family::L1),
            "si" => Ok(Family::Si),
            "lc" => Ok(Family::Lc),
            other => Err(Error::domain(format!(
                "unknown formula `{other}` (expected l1, si or lc)"
            ))),
        }
    }
}

/// One probability curve: a family, an order M and the x-axis convention.
///
/// L1 is only defined against λ² and Lc only against the normalized SNR;
/// the simplex accepts both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CurveSpec {
    pub family: Family,
    #[serde(rename = "M")]
    pub m: usize,
    pub convention: Convention,
}

impl CurveSpec {
    pub fn new(family: Family, m: usize, convention: Convention) -> Result<Self> {
        let c = CurveSpec {
            family,
            m,
            convention,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.family, self.convention) {
            (Family::L1, Convention::Snr) => Err(Error::domain(
                "formula l1 requires convention lambda2 (for L1, N_u = 1 so SNR = λ²)",
            )),
            (Family::Lc, Convention::Lambda2) => {
                Err(Error::domain("formula lc requires convention snr"))
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, x: f64, spec: &QuadratureSpec) -> Result<PdValue> {
        self.validate()?;
        match (self.family, self.convention) {
            (Family::L1, _) => pd_l1(self.m, x),
            (Family::Lc, _) => pd_lc(self.m, x),
            (Family::Si, Convention::Lambda2) => pd_si_lambda(self.m, x, spec),
            (Family::Si, Convention::Snr) => pd_si_snr(self.m, x, spec),
        }
    }

    /// Column label, e.g. `si_M7_snr`.
    pub fn label(&self) -> String {
        format!("{}_M{}_{}", self.family.as_str(), self.m, self.convention)
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.family.as_str(), self.m, self.convention)
    }
}

/// Parses `family:M:convention`, e.g. `si:7:snr`.
impl FromStr for CurveSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [family, m, convention] = parts[..] else {
            return Err(Error::domain(format!(
                "curve `{s}` must look like family:M:convention, e.g. si:7:snr"
            )));
        };
        let m = m
            .parse()
            .map_err(|_| Error::domain(format!("curve `{s}`: M must be a count")))?;
        CurveSpec::new(family.parse()?, m, convention.parse()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(Error::domain(format!(
                "unknown spacing `{other}` (expected linear or log)"
            ))),
        }
    }
}

/// `points` grid values from `lo` to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, points: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!(
            "grid needs finite x_lo < x_hi, got [{lo}, {hi}]"
        )));
    }
    if points < 2 {
        return Err(Error::domain(format!(
            "grid needs at least 2 points, got {points}"
        )));
    }
    let last = (points - 1) as f64;
    let mut xs: Vec<f64> = match spacing {
        Spacing::Linear => (0..points)
            .map(|i| lo + (hi - lo) * (i as f64 / last))
            .collect(),
        Spacing::Log => {
            if lo <= 0.0 {
                return Err(Error::domain(format!(
                    "log spacing needs x_lo > 0, got {lo}"
                )));
            }
            let (a, b) = (lo.ln(), hi.ln());
            (0..points)
                .map(|i| (a + (b - a) * (i as f64 / last)).exp())
                .collect()
        }
    };
    xs[0] = lo;
    xs[points - 1] = hi;
    Ok(xs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub values: Vec<f64>,
}

/// Probability curves tabulated on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub x_name: String,
    pub labels: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let j = self.labels.iter().position(|l| l == label)?;
        Some(self.rows.iter().map(|r| r.values[j]).collect())
    }

    /// `x,<label1>,...` header, then one row per grid point with every value
    /// at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "x")?;
        for l in &self.labels {
            write!(w, ",{l}")?;
        }
        writeln!(w)?;
        for row in &self.rows {
            write!(w, "{:.16e}", row.x)?;
            for v in &row.values {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    pub fn from_csv(text: &str, x_name: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::domain("empty CSV"))?;
        let mut cols = header.split(',');
        if cols.next() != Some("x") {
            return Err(Error::domain("CSV header must start with `x`"));
        }
        let labels: Vec<String> = cols.map(str::to_owned).collect();
        let rows = lines
            .filter(|l| !l.is_empty())
            .map(|line| {
                let nums = line
                    .split(',')
                    .map(|f| {
                        f.parse::<f64>()
                            .map_err(|_| Error::domain(format!("bad CSV number `{f}`")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                if nums.len() != labels.len() + 1 {
                    return Err(Error::domain("CSV row width does not match header"));
                }
                Ok(SweepRow {
                    x: nums[0],
                    values: nums[1..].to_vec(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepTable {
            x_name: x_name.to_owned(),
            labels,
            rows,
        })
    }
}

/// Evaluates every curve at every grid point. Grid points run in parallel.
pub fn sweep(
    curves: &[CurveSpec],
    x_lo: f64,
    x_hi: f64,
    points: usize,
    spacing: Spacing,
    spec: &QuadratureSpec,
) -> Result<SweepTable> {
    if curves.is_empty() {
        return Err(Error::domain("sweep needs at least one curve"));
    }
    for c in curves {
        c.validate()?;
    }
    let xs = grid(x_lo, x_hi, points, spacing)?;
    let rows = par::map_slice(&xs, |&x| {
        let values = curves
            .iter()
            .map(|c| c.evaluate(x, spec).map(|v| v.value))
            .collect::<Result<Vec<f64>>>()?;
        Ok(SweepRow { x, values })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let first = curves[0].convention;
    let x_name = if curves.iter().all(|c| c.convention == first) {
        first.as_str().to_owned()
    } else {
        "x".to_owned()
    };
    Ok(SweepTable {
        x_name,
        labels: curves.iter().map(CurveSpec::label).collect(),
        rows,
    })
}

/// Scan and refinement settings for the crossing search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingOptions {
    /// First scan point; keeps the shared value at zero out of the search.
    pub x_min: f64,
    pub x_max: f64,
    pub scan_points: usize,
    pub x_tol: f64,
    pub quadrature: QuadratureSpec,
}

pub const DEFAULT_X_MAX: f64 = 10.0;
pub const DEFAULT_X_TOL: f64 = 1e-12;
/// A crossing is accepted only if the curves agree this closely there.
pub const MAX_GAP_AT_CROSSING: f64 = 1e-9;

impl Default for CrossingOptions {
    fn default() -> Self {
        CrossingOptions {
            x_min: 1e-8,
            x_max: DEFAULT_X_MAX,
            scan_points: 400,
            x_tol: DEFAULT_X_TOL,
            quadrature: QuadratureSpec::default().with_abs_tol(1e-13),
        }
    }
}

impl CrossingOptions {
    pub fn with_range(x_max: f64, x_tol: f64) -> Self {
        CrossingOptions {
            x_max,
            x_tol,
            ..Default::default()
        }
    }
}

/// The scanned grid behind a crossing search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDiagnostics {
    pub points: usize,
    pub x_min: f64,
    pub x_max: f64,
    /// Sign changes of the gap between consecutive grid points.
    pub sign_changes: usize,
    pub min_gap: f64,
    pub max_gap: f64,
    /// `[x, gap]` pairs, gap = P_d(L1 family) − P_d(SI).
    pub grid: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingResult {
    #[serde(rename = "M")]
    pub m: usize,
    pub convention: Convention,
    pub found: bool,
    pub x_cross: Option<f64>,
    pub pd_at_cross: Option<f64>,
    /// P_d(L1 family) − P_d(SI) at `x_cross`.
    pub gap_at_cross: Option<f64>,
    pub bracket: Option<[f64; 2]>,
    pub bracket_width: Option<f64>,
    pub iterations: usize,
    pub scan: ScanDiagnostics,
}

/// P_d(L1 family) − P_d(SI) in the given convention.
pub fn gap(m: usize, convention: Convention, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(match convention {
        Convention::Lambda2 => pd_l1(m, x)?.value - pd_si_lambda(m, x, spec)?.value,
        Convention::Snr => pd_lc(m, x)?.value - pd_si_snr(m, x, spec)?.value,
    })
}

fn l1_family_pd(m: usize, convention: Convention, x: f64) -> Result<f64> {
    Ok(match convention {
        Convention::Lambda2 => pd_l1(m, x)?.value,
        Convention::Snr => pd_lc(m, x)?.value,
    })
}

/// Smallest positive crossing of the L1-family and simplex curves.
///
/// The gap is scanned on a logarithmic grid over `[x_min, x_max]`; the first
/// sign change between grid points is refined with Brent's method. A
/// `found = false` result means no sign change on this grid, nothing more.
pub fn find_crossing(
    m: usize,
    convention: Convention,
    opts: &CrossingOptions,
) -> Result<CrossingResult> {
    if m < 3 {
        return Err(Error::domain(format!(
            "crossing search requires M ≥ 3, got M = {m}"
        )));
    }
    if !(opts.x_tol > 0.0) {
        return Err(Error::domain(format!(
            "x_tol must be positive, got {}",
            opts.x_tol
        )));
    }
    if !(opts.x_max > opts.x_min && opts.x_min > 0.0) {
        return Err(Error::domain(format!(
            "x_max must exceed the scan start {:e}, got {}",
            opts.x_min, opts.x_max
        )));
    }
    let spec = &opts.quadrature;
    let xs = grid(opts.x_min, opts.x_max, opts.scan_points, Spacing::Log)?;
    let gaps = par::map_slice(&xs, |&x| gap(m, convention, x, spec))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;

    let changes: Vec<usize> = (0..xs.len() - 1)
        .filter(|&i| {
            gaps[i] != 0.0 && gaps[i + 1] != 0.0 && gaps[i].signum() != gaps[i + 1].signum()
        })
        .collect();
    let scan = ScanDiagnostics {
        points: xs.len(),
        x_min: opts.x_min,
        x_max: opts.x_max,
        sign_changes: changes.len(),
        min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        max_gap: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        grid: xs.iter().zip(&gaps).map(|(&x, &g)| [x, g]).collect(),
    };

    let mut result = CrossingResult {
        m,
        convention,
        found: false,
        x_cross: None,
        pd_at_cross: None,
        gap_at_cross: None,
        bracket: None,
        bracket_width: None,
        iterations: 0,
        scan,
    };

    // an exact zero on the grid counts as a crossing too
    let first_zero = gaps.iter().position(|&g| g == 0.0);
    let first_change = changes.first().copied();
    let (lo, hi) = match (first_zero, first_change) {
        (Some(z), Some(c)) if z <= c => (xs[z], xs[z]),
        (Some(z), None) => (xs[z], xs[z]),
        (_, Some(c)) => (xs[c], xs[c + 1]),
        (None, None) => return Ok(result),
    };

    let root = if lo == hi {
        crate::mathkit::Root {
            x: lo,
            g_x: 0.0,
            lo,
            hi,
            iterations: 0,
        }
    } else {
        let mut failure = None;
        let r = find_root(
            |x| match gap(m, convention, x, spec) {
                Ok(g) => g,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            opts.x_tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        r?
    };

    result.iterations = root.iterations;
    result.x_cross = Some(root.x);
    result.gap_at_cross = Some(root.g_x);
    result.pd_at_cross = Some(l1_family_pd(m, convention, root.x)?);
    result.bracket = Some([root.lo, root.hi]);
    result.bracket_width = Some(root.bracket_width());
    result.found = root.x > 0.0 && root.g_x.abs() <= MAX_GAP_AT_CROSSING;
    Ok(result)
}

/// Crossing of P_d(L1) and P_d(SI) against λ².
pub fn find_crossing_lambda(m: usize, x_max: f64, x_tol: f64) -> Result<CrossingResult> {
    find_crossing(
        m,
        Convention::Lambda2,
        &CrossingOptions::with_range(x_max, x_tol),
    )
}

/// Crossing of P_d(Lc) and P_d(SI) against the normalized SNR.
pub fn find_crossing_snr(m: usize, x_max: f64, x_tol: f64) -> Result<CrossingResult> {
    find_crossing(
        m,
        Convention::Snr,
        &CrossingOptions::with_range(x_max, x_tol),
    )
}

/// `[0, x_cross)`: where the L1-family curve beats the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceInterval {
    #[serde(rename = "M")]
    pub m: usize,
    pub convention: Convention,
    pub lo: f64,
    pub hi: f64,
    pub checked_points: usize,
    /// Smallest gap seen on the check grid; positive by construction.
    pub min_gap: f64,
}

pub const DOMINANCE_CHECK_POINTS: usize = 100;

pub fn dominance_interval(
    m: usize,
    convention: Convention,
    x_tol: f64,
) -> Result<DominanceInterval> {
    let opts = CrossingOptions {
        x_tol,
        ..Default::default()
    };
    let crossing = find_crossing(m, convention, &opts)?;
    let x_cross = match (crossing.found, crossing.x_cross) {
        (true, Some(x)) => x,
        _ => {
            return Err(Error::NotApplicable(format!(
                "no {convention} crossing found for M = {m} on (0, {}]",
                opts.x_max
            )))
        }
    };
    let lo = opts.x_min.max(x_cross * 1e-6);
    let hi = x_cross * (1.0 - 1e-3);
    let xs = grid(lo, hi, DOMINANCE_CHECK_POINTS, Spacing::Log)?;
    let gaps = par::map_slice(&xs, |&x| gap(m, convention, x, &opts.quadrature))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    if let Some(i) = gaps.iter().position(|&g| !(g > 0.0)) {
        return Err(Error::NotApplicable(format!(
            "L1-family curve does not dominate at x = {:e} (gap {:e})",
            xs[i], gaps[i]
        )));
    }
    Ok(DominanceInterval {
        m,
        convention,
        lo: 0.0,
        hi: x_cross,
        checked_points: xs.len(),
        min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn curve_spec_parsing() {
        let c: CurveSpec = "si:7:snr".parse().unwrap();
        assert_eq!(c.label(), "si_M7_snr");
        assert_eq!(c.to_string(), "si:7:snr");
        assert!("l1:7:snr".parse::<CurveSpec>().is_err());
        assert!("lc:7:lambda2".parse::<CurveSpec>().is_err());
        assert!("qam:7:snr".parse::<CurveSpec>().is_err());
        assert!("si:seven:snr".parse::<CurveSpec>().is_err());
        assert!("si:7".parse::<CurveSpec>().is_err());
    }

    #[test]
    fn grids() {
        let g = grid(0.0, 2.0, 2, Spacing::Linear).unwrap();
        assert_eq!(g, [0.0, 2.0]);
        let g = grid(1e-8, 10.0, 400, Spacing::Log).unwrap();
        assert_eq!(g.len(), 400);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*g.last().unwrap(), 10.0);
        assert!(grid(0.0, 1.0, 10, Spacing::Log).is_err());
        assert!(grid(1.0, 1.0, 10, Spacing::Linear).is_err());
        assert!(grid(0.0, 1.0, 1, Spacing::Linear).is_err());
    }

    #[test]
    fn crossing_m7_lambda() {
        let r = find_crossing_lambda(7, DEFAULT_X_MAX, DEFAULT_X_TOL).unwrap();
        assert!(r.found);
        let x = r.x_cross.unwrap();
        // 30-digit bisection on the same two formulas
        assert!((x - 1.986_038_643_521_17e-3).abs() < 1e-10, "{x:e}");
        assert!(r.bracket_width.unwrap() <= DEFAULT_X_TOL);
        assert!(r.gap_at_cross.unwrap().abs() <= MAX_GAP_AT_CROSSING);
    }

    #[test]
    fn crossing_m8_is_regression_pinned() {
        let r = find_crossing_lambda(8, DEFAULT_X_MAX, DEFAULT_X_TOL).unwrap();
        assert!(r.found);
        let x = r.x_cross.unwrap();
        assert!((x - 7.961_574_384_872_32e-3).abs() < 1e-10, "{x:e}");
        // L1 ahead on the whole scanned stretch below the crossing
        for [gx, g] in &r.scan.grid {
            if *gx < x * 0.999 {
                assert!(*g > 0.0, "gap {g:e} at {gx:e}");
            }
        }
    }

    #[test]
    fn no_crossing_for_small_m() {
        let r = find_crossing_lambda(3, 100.0, DEFAULT_X_TOL).unwrap();
        assert!(!r.found);
        assert!(r.scan.points >= 200);
        assert_eq!(r.scan.sign_changes, 0);
        assert!(r.scan.max_gap < 0.0);
        let r = find_crossing_snr(5, DEFAULT_X_MAX, DEFAULT_X_TOL).unwrap();
        assert!(!r.found);
    }

    #[test]
    fn snr_crossing_maps_to_lambda_crossing() {
        for m in [7usize, 9, 12] {
            let a = find_crossing_lambda(m, DEFAULT_X_MAX, DEFAULT_X_TOL).unwrap();
            let b = find_crossing_snr(m, DEFAULT_X_MAX, DEFAULT_X_TOL).unwrap();
            let scaled = b.x_cross.unwrap() * (m - 1) as f64;
            let diff = (scaled - a.x_cross.unwrap()).abs();
            assert!(diff < 1e-9, "M={m}: {diff:e}");
        }
    }

    #[test]
    fn dominance() {
        let d = dominance_interval(7, Convention::Lambda2, DEFAULT_X_TOL).unwrap();
        assert_eq!(d.lo, 0.0);
        assert!((d.hi - 19.86e-4).abs() < 0.05e-4);
        assert_eq!(d.checked_points, 100);
        let d = dominance_interval(7, Convention::Snr, DEFAULT_X_TOL).unwrap();
        assert!((d.hi - 3.3e-4).abs() < 0.3e-4);
        // beyond the crossing the order flips
        let spec = QuadratureSpec::default();
        for x in grid(d.hi * 1.01, d.hi * 10.0, 50, Spacing::Log).unwrap() {
            assert!(gap(7, Convention::Snr, x, &spec).unwrap() < 0.0);
        }
        for conv in [Convention::Lambda2, Convention::Snr] {
            assert!(matches!(
                dominance_interval(3, conv, DEFAULT_X_TOL),
                Err(Error::NotApplicable(_))
            ));
        }
    }

    #[test]
    fn sweep_table_and_csv() {
        let curves = ["l1:7:lambda2".parse().unwrap(), "si:7:snr".parse().unwrap()];
        let t = sweep(
            &curves,
            0.0,
            2.0,
            2,
            Spacing::Linear,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].x, 0.0);
        assert_eq!(t.rows[1].x, 2.0);
        assert_eq!(t.x_name, "x");
        let csv = t.to_csv_string();
        assert!(csv.starts_with("x,l1_M7_lambda2,si_M7_snr\n"));
        assert_eq!(SweepTable::from_csv(&csv, "x").unwrap(), t);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn csv_round_trip_is_exact(xs in proptest::collection::vec(-1e300f64..1e300, 1..20)) {
            let t = SweepTable {
                x_name: "x".into(),
                labels: vec!["a".into()],
                rows: xs.iter().map(|&x| SweepRow { x, values: vec![x / 3.0] }).collect(),
            };
            prop_assert_eq!(SweepTable::from_csv(&t.to_csv_string(), "x").unwrap(), t);
        }

        #[test]
        fn sweep_values_are_probabilities(m in 3usize..15, hi in 0.1f64..8.0) {
            let curves = [
                CurveSpec::new(Family::L1, m, Convention::Lambda2).unwrap(),
                CurveSpec::new(Family::Si, m, Convention::Lambda2).unwrap(),
            ];
            let t = sweep(&curves, 0.0, hi, 9, Spacing::Linear, &QuadratureSpec::default()).unwrap();
            prop_assert!(t.rows.windows(2).all(|w| w[0].x < w[1].x));
            prop_assert!(t.rows.iter().flat_map(|r| &r.values).all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
