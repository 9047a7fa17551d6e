//! Signal-set constructors and energy / rate bookkeeping.

use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which family a [`SignalSet`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetLabel {
    #[serde(rename = "L1")]
    L1,
    #[serde(rename = "L1-eps")]
    L1Eps,
    #[serde(rename = "SI")]
    Simplex,
    #[serde(rename = "Lc")]
    CodedL1,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for SetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetLabel::L1 => "L1",
            SetLabel::L1Eps => "L1-eps",
            SetLabel::Simplex => "SI",
            SetLabel::CodedL1 => "Lc",
            SetLabel::Custom => "custom",
        })
    }
}

/// M real vectors of a common dimension with their a-priori probabilities.
///
/// Immutable once built; every constructor validates the invariants
/// (M ≥ 2, common dimension ≥ 1, finite coordinates, priors summing to one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalSetRepr", into = "SignalSetRepr")]
pub struct SignalSet {
    label: SetLabel,
    dim: usize,
    /// Row-major, `len() == M * dim`.
    points: Vec<f64>,
    priors: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SignalSetRepr {
    label: SetLabel,
    priors: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl TryFrom<SignalSetRepr> for SignalSet {
    type Error = Error;

    fn try_from(r: SignalSetRepr) -> Result<Self> {
        SignalSet::new(r.label, r.vectors, r.priors)
    }
}

impl From<SignalSet> for SignalSetRepr {
    fn from(s: SignalSet) -> Self {
        SignalSetRepr {
            label: s.label,
            vectors: s.vectors().map(<[f64]>::to_vec).collect(),
            priors: s.priors,
        }
    }
}

impl SignalSet {
    pub fn new(label: SetLabel, vectors: Vec<Vec<f64>>, priors: Vec<f64>) -> Result<Self> {
        let m = vectors.len();
        if m < 2 {
            return Err(Error::InvalidSet(format!("need M >= 2 vectors, got {m}")));
        }
        let dim = vectors[0].len();
        if dim < 1 {
            return Err(Error::InvalidSet("vector dimension must be >= 1".into()));
        }
        if let Some(i) = vectors.iter().position(|v| v.len() != dim) {
            return Err(Error::InvalidSet(format!(
                "all vectors must share one dimension: vector {i} has {} components, vector 0 has {dim}",
                vectors[i].len()
            )));
        }
        if vectors.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSet("vector components must be finite".into()));
        }
        if priors.len() != m {
            return Err(Error::InvalidSet(format!(
                "expected {m} priors, got {}",
                priors.len()
            )));
        }
        if priors.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidSet("priors must be nonnegative".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSet(format!(
                "priors must sum to 1 within 1e-12, got {total:.17}"
            )));
        }
        Ok(SignalSet {
            label,
            dim,
            points: vectors.into_iter().flatten().collect(),
            priors,
        })
    }

    /// Equiprobable set.
    pub fn uniform(label: SetLabel, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let m = vectors.len().max(1);
        SignalSet::new(label, vectors, vec![1.0 / m as f64; m])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn label(&self) -> SetLabel {
        self.label
    }

    /// Number of signal vectors M.
    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    /// Real channel uses per vector, N_u.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    pub(crate) fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn energies(&self) -> Vec<f64> {
        self.vectors()
            .map(|v| v.iter().map(|c| c * c).sum())
            .collect()
    }
}

fn check_energy(e: f64) -> Result<()> {
    if !(e >= 0.0 && e.is_finite()) {
        return Err(Error::domain(format!(
            "energy E must be finite and >= 0, got {e}"
        )));
    }
    Ok(())
}

fn check_l1_order(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::domain(format!(
            "L1-type sets require M ≥ 3, got M = {m}"
        )));
    }
    Ok(())
}

/// The L1 set: `[-√E, +√E, 0, …, 0]` in one dimension, equiprobable.
pub fn make_l1(m: usize, e: f64) -> Result<SignalSet> {
    check_l1_order(m)?;
    check_energy(e)?;
    let a = e.sqrt();
    let mut vectors = vec![vec![-a], vec![a]];
    vectors.resize(m, vec![0.0]);
    SignalSet::uniform(SetLabel::L1, vectors)
}

/// L1 with the M−2 origin vectors spread evenly over `[-eps, eps]`.
///
/// A single cluster vector sits at `+eps`.
pub fn make_l1_eps(m: usize, e: f64, eps: f64) -> Result<SignalSet> {
    check_l1_order(m)?;
    check_energy(e)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let a = e.sqrt();
    if eps >= 0.5 * a {
        return Err(Error::domain(format!(
            "eps must be below √E/2 = {:e}, got {eps:e}",
            0.5 * a
        )));
    }
    let cluster = m - 2;
    let mut vectors = vec![vec![-a], vec![a]];
    if cluster == 1 {
        vectors.push(vec![eps]);
    } else {
        let step = 2.0 * eps / (cluster - 1) as f64;
        vectors.extend((0..cluster).map(|k| vec![-eps + step * k as f64]));
    }
    SignalSet::uniform(SetLabel::L1Eps, vectors)
}

/// Regular simplex with M vertices in M−1 dimensions, each of energy λ².
///
/// Vertex i has the coordinates of basis vector e_i after removing the
/// centroid and expressing it in the Helmert basis of the subspace
/// orthogonal to (1, …, 1); the result is rescaled to energy λ².
pub fn make_simplex(m: usize, lambda2: f64) -> Result<SignalSet> {
    if m < 2 {
        return Err(Error::domain(format!(
            "the simplex requires M ≥ 2, got M = {m}"
        )));
    }
    check_energy(lambda2)?;
    let n = m - 1;
    // Centred basis vectors have squared norm 1 - 1/M.
    let scale = (lambda2 / (1.0 - 1.0 / m as f64)).sqrt();
    let helmert_norm: Vec<f64> = (1..=n)
        .map(|k| 1.0 / ((k * (k + 1)) as f64).sqrt())
        .collect();
    let vectors = (0..m)
        .map(|i| {
            // Helmert row k (1-based): ones on 0..k, -k at k, zeros after.
            (1..=n)
                .map(|k| {
                    let entry = match i.cmp(&k) {
                        std::cmp::Ordering::Less => 1.0,
                        std::cmp::Ordering::Equal => -(k as f64),
                        std::cmp::Ordering::Greater => 0.0,
                    };
                    scale * entry * helmert_norm[k - 1]
                })
                .collect()
        })
        .collect();
    SignalSet::uniform(SetLabel::Simplex, vectors)
}

/// Seeded unit vector in ℝⁿ with every coordinate nonzero.
///
/// Candidates with any raw coordinate below 1e-3 in magnitude are redrawn.
pub fn general_position_direction(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if raw.iter().any(|c: &f64| c.abs() < 1e-3) {
            continue;
        }
        let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
        return raw.into_iter().map(|c| c / norm).collect();
    }
}

/// Coded L1: ±√E·u along a general-position unit direction u in ℝ^{M−1},
/// with the remaining M−2 vectors at the origin.
pub fn make_coded_l1(m: usize, e: f64, direction_seed: u64) -> Result<SignalSet> {
    check_l1_order(m)?;
    check_energy(e)?;
    let n = m - 1;
    let a = e.sqrt();
    let u = general_position_direction(n, direction_seed);
    let s1: Vec<f64> = u.iter().map(|c| a * c).collect();
    let s2: Vec<f64> = s1.iter().map(|c| -c).collect();
    let mut vectors = vec![s1, s2];
    vectors.resize(m, vec![0.0; n]);
    SignalSet::uniform(SetLabel::CodedL1, vectors)
}

/// Energy and SNR summary of a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// λ², the prior-weighted mean energy.
    pub avg_energy: f64,
    pub per_vector_energy: Vec<f64>,
    /// λ² / (N_u σ²).
    pub snr: f64,
    /// `snr` at σ² = 1.
    pub normalized_snr: f64,
    /// Largest component magnitude of each vector.
    pub per_vector_peak: Vec<f64>,
}

pub fn avg_energy(set: &SignalSet, sigma2: f64) -> Result<EnergyReport> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::domain(format!(
            "sigma2 must be positive, got {sigma2}"
        )));
    }
    let per_vector_energy = set.energies();
    let avg: f64 = per_vector_energy
        .iter()
        .zip(set.priors())
        .map(|(e, p)| e * p)
        .sum();
    let normalized_snr = avg / set.dim() as f64;
    Ok(EnergyReport {
        avg_energy: avg,
        snr: normalized_snr / sigma2,
        normalized_snr,
        per_vector_peak: set
            .vectors()
            .map(|v| v.iter().fold(0.0f64, |acc, c| acc.max(c.abs())))
            .collect(),
        per_vector_energy,
    })
}

/// R = log₂(M) / N_u, bits per real channel use.
pub fn code_rate(m: usize, n_u: usize) -> Result<f64> {
    if m < 2 || n_u < 1 {
        return Err(Error::domain(format!(
            "code rate needs M ≥ 2 and N_u ≥ 1, got M = {m}, N_u = {n_u}"
        )));
    }
    Ok((m as f64).log2() / n_u as f64)
}

/// E_b/N_0 = SNR / (2R), with N_0 = σ²/2.
pub fn ebn0_from_snr(snr: f64, rate: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::domain(format!("snr must be >= 0, got {snr}")));
    }
    if !(rate > 0.0) {
        return Err(Error::domain(format!("rate must be positive, got {rate}")));
    }
    Ok(snr / (2.0 * rate))
}

/// AWGN capacity per real dimension, ½·log₂(1 + SNR), in bits.
pub fn capacity_per_dimension(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::domain(format!("snr must be >= 0, got {snr}")));
    }
    Ok(0.5 * snr.ln_1p() / std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn l1_examples() {
        let lx = 19.86e-4;
        let set = make_l1(7, 7.0 * lx / 2.0).unwrap();
        let r = avg_energy(&set, 1.0).unwrap();
        assert!((r.avg_energy - lx).abs() < 1e-15);

        let zero = make_l1(3, 0.0).unwrap();
        assert!(zero.vectors().all(|v| v == [0.0]));
        assert_eq!(avg_energy(&zero, 1.0).unwrap().avg_energy, 0.0);

        let r = avg_energy(&make_l1(4, 2.0).unwrap(), 1.0).unwrap();
        assert!((r.avg_energy - 1.0).abs() < 1e-15);

        let set = make_l1(5, 4.0).unwrap();
        assert_eq!(set.vector(0), [-2.0]);
        assert_eq!(set.vector(1), [2.0]);
        assert_eq!(set.dim(), 1);
        assert!(matches!(make_l1(2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn l1_eps_examples() {
        let set = make_l1_eps(4, 1.0, 1e-6).unwrap();
        let v: Vec<f64> = set.vectors().map(|v| v[0]).collect();
        assert_eq!(v, [-1.0, 1.0, -1e-6, 1e-6]);

        let set = make_l1_eps(3, 1.0, 1e-6).unwrap();
        let v: Vec<f64> = set.vectors().map(|v| v[0]).collect();
        assert_eq!(v, [-1.0, 1.0, 1e-6]);

        let set = make_l1_eps(9, 1.0, 1e-6).unwrap();
        let mut v: Vec<f64> = set.vectors().map(|v| v[0]).collect();
        v.sort_by(f64::total_cmp);
        assert!(v.windows(2).all(|w| w[0] < w[1]));

        assert!(make_l1_eps(5, 1.0, 0.5).is_err());
        assert!(make_l1_eps(5, 1.0, 0.0).is_err());
        assert!(make_l1_eps(5, 0.0, 1e-9).is_err());
    }

    #[test]
    fn simplex_examples() {
        let s = make_simplex(2, 1.0).unwrap();
        assert_eq!(s.dim(), 1);
        let mut v: Vec<f64> = s.vectors().map(|v| v[0]).collect();
        v.sort_by(f64::total_cmp);
        assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);

        let s = make_simplex(3, 1.0).unwrap();
        assert_eq!(s.dim(), 2);
        for i in 0..3 {
            assert!((dot(s.vector(i), s.vector(i)) - 1.0).abs() < 1e-15);
            for j in (i + 1)..3 {
                assert!((dot(s.vector(i), s.vector(j)) + 0.5).abs() < 1e-15);
            }
        }
        assert!(make_simplex(1, 1.0).is_err());
    }

    #[test]
    fn coded_l1_norms() {
        for seed in [0, 1, 2, 99] {
            let s = make_coded_l1(7, 2.5, seed).unwrap();
            assert_eq!(s.dim(), 6);
            let e = s.energies();
            assert!((e[0] - 2.5).abs() < 1e-12 && (e[1] - 2.5).abs() < 1e-12);
            assert!(e[2..].iter().all(|&x| x == 0.0));
            assert!(s.vector(0).iter().all(|c| c.abs() > 0.0));
            let r = avg_energy(&s, 1.0).unwrap();
            assert!((r.avg_energy - 5.0 / 7.0).abs() < 1e-12);
            assert!((r.normalized_snr - 5.0 / 7.0 / 6.0).abs() < 1e-12);
        }
        assert_eq!(
            make_coded_l1(5, 1.0, 3).unwrap(),
            make_coded_l1(5, 1.0, 3).unwrap()
        );
        assert_ne!(
            make_coded_l1(5, 1.0, 3).unwrap().vector(0),
            make_coded_l1(5, 1.0, 4).unwrap().vector(0)
        );
    }

    #[test]
    fn snr_examples() {
        let e = 1.3;
        let r = avg_energy(&make_l1(7, e).unwrap(), 1.0).unwrap();
        assert!((r.snr - 2.0 * e / 7.0).abs() < 1e-15);
        assert_eq!(r.snr, r.avg_energy);

        let r = avg_energy(&make_simplex(7, 6.0).unwrap(), 1.0).unwrap();
        assert!((r.normalized_snr - 1.0).abs() < 1e-14);

        let r = avg_energy(&make_l1(7, 1.0).unwrap(), 4.0).unwrap();
        assert!((r.snr - r.normalized_snr / 4.0).abs() < 1e-16);
        assert!(avg_energy(&make_l1(7, 1.0).unwrap(), 0.0).is_err());
        assert_eq!(r.per_vector_peak[..2], [1.0, 1.0]);
    }

    #[test]
    fn rates_and_capacity() {
        assert!((code_rate(7, 6).unwrap() - 7f64.log2() / 6.0).abs() < 1e-16);
        assert!((code_rate(7, 6).unwrap() - 0.4679).abs() < 5e-5);
        assert!((code_rate(7, 1).unwrap() - 2.807).abs() < 5e-4);
        assert_eq!(code_rate(2, 1).unwrap(), 1.0);
        assert!(code_rate(1, 1).is_err() && code_rate(2, 0).is_err());

        assert_eq!(ebn0_from_snr(1.0, 0.5).unwrap(), 1.0);
        // 3.3e-4 / (2 · log2(7)/6) by hand
        assert!((ebn0_from_snr(3.3e-4, 7f64.log2() / 6.0).unwrap() - 3.527e-4).abs() < 1e-7);
        assert_eq!(ebn0_from_snr(0.0, 2.0).unwrap(), 0.0);
        assert!(ebn0_from_snr(1.0, 0.0).is_err());

        assert_eq!(capacity_per_dimension(0.0).unwrap(), 0.0);
        assert!((capacity_per_dimension(1.0).unwrap() - 0.5).abs() < 1e-16);
        assert!((capacity_per_dimension(3.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let s = make_simplex(4, 2.0).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"label\":\"SI\""));
        assert_eq!(SignalSet::from_json(&text).unwrap(), s);

        let bad = r#"{"label":"custom","priors":[0.5,0.6],"vectors":[[0.0],[1.0]]}"#;
        let err = SignalSet::from_json(bad).unwrap_err().to_string();
        assert!(err.contains("priors must sum to 1"), "{err}");
        let bad = r#"{"label":"custom","priors":[0.5,0.5],"vectors":[[0.0],[1.0,2.0]]}"#;
        assert!(SignalSet::from_json(bad)
            .unwrap_err()
            .to_string()
            .contains("dimension"));
        let bad = r#"{"label":"QAM","priors":[0.5,0.5],"vectors":[[0.0],[1.0]]}"#;
        assert!(SignalSet::from_json(bad).is_err());
        let bad = r#"{"label":"custom","priors":[1.0],"vectors":[[0.0]]}"#;
        assert!(SignalSet::from_json(bad)
            .unwrap_err()
            .to_string()
            .contains("M >= 2"));
    }

    proptest! {
        #[test]
        fn simplex_gram_matrix(m in 2usize..=40, lambda2 in 0.0f64..50.0) {
            let s = make_simplex(m, lambda2).unwrap();
            let off = -lambda2 / (m - 1) as f64;
            for i in 0..m {
                prop_assert!((dot(s.vector(i), s.vector(i)) - lambda2).abs() <= 1e-10);
                for j in (i + 1)..m {
                    prop_assert!((dot(s.vector(i), s.vector(j)) - off).abs() <= 1e-10);
                }
            }
            let sum_norm = (0..m - 1)
                .map(|k| s.vectors().map(|v| v[k]).sum::<f64>().powi(2))
                .sum::<f64>()
                .sqrt();
            prop_assert!(sum_norm <= 1e-10);
        }

        #[test]
        fn l1_family_average_energy(m in 3usize..60, e in 0.0f64..100.0, seed in any::<u64>()) {
            let want = 2.0 * e / m as f64;
            let a = avg_energy(&make_l1(m, e).unwrap(), 1.0).unwrap();
            let b = avg_energy(&make_coded_l1(m, e, seed).unwrap(), 1.0).unwrap();
            prop_assert!((a.avg_energy - want).abs() <= 1e-12);
            prop_assert!((b.avg_energy - want).abs() <= 1e-12);
            // N_u = 1 so the normalized SNR is λ² itself
            prop_assert_eq!(a.normalized_snr, a.avg_energy);
        }

        #[test]
        fn simplex_and_coded_l1_rates_match(m in 3usize..200) {
            let si = make_simplex(m, 1.0).unwrap();
            let lc = make_coded_l1(m, 1.0, 7).unwrap();
            prop_assert_eq!(code_rate(m, si.dim()).unwrap(), code_rate(m, lc.dim()).unwrap());
        }
    }
}
