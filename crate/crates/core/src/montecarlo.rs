//! AWGN channel simulation with minimum-distance decoding.
//!
//! The trial range is cut into fixed blocks of [`BLOCK_TRIALS`]; block `b`
//! draws from the ChaCha8 stream `b` of the configured seed, so an estimate
//! is a pure function of the [`TrialConfig`] whatever the worker count.

use crate::par;
use crate::signals::SignalSet;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const BLOCK_TRIALS: u64 = 1 << 14;

/// How exact co-minimizers of the decoding distance are resolved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    #[default]
    UniformRandom,
    LowestIndex,
}

impl fmt::Display for TieRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieRule::UniformRandom => "uniform_random",
            TieRule::LowestIndex => "lowest_index",
        })
    }
}

impl FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_random" => Ok(TieRule::UniformRandom),
            "lowest_index" => Ok(TieRule::LowestIndex),
            other => Err(Error::domain(format!(
                "unknown tie rule `{other}` (expected uniform_random or lowest_index)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub set: SignalSet,
    /// Noise variance per real dimension.
    pub sigma2: f64,
    pub trials: u64,
    pub seed: u64,
    pub tie_rule: TieRule,
}

impl TrialConfig {
    pub fn new(set: SignalSet, trials: u64, seed: u64) -> Self {
        TrialConfig {
            set,
            sigma2: 1.0,
            trials,
            seed,
            tie_rule: TieRule::default(),
        }
    }

    pub fn sigma2(mut self, sigma2: f64) -> Self {
        self.sigma2 = sigma2;
        self
    }

    pub fn tie_rule(mut self, tie_rule: TieRule) -> Self {
        self.tie_rule = tie_rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::domain("trials must be >= 1"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::domain(format!(
                "sigma2 must be positive, got {}",
                self.sigma2
            )));
        }
        Ok(())
    }
}

/// Monte-Carlo estimate of the average probability of correct decoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    /// Fraction decoded correctly per transmitted index; `None` if the index
    /// was never sent.
    pub per_signal_correct: Vec<Option<f64>>,
    pub per_signal_sent: Vec<u64>,
}

impl PdEstimate {
    /// |p̂ − reference| in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.p_hat - reference).abs() / self.stderr
    }
}

/// Marsaglia's polar method on top of `libm::log`, bit-reproducible on every
/// platform for a given generator state.
#[derive(Debug, Default, Clone)]
pub struct PolarGaussian {
    spare: Option<f64>,
}

impl PolarGaussian {
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(s) = self.spare.take() {
            return s;
        }
        loop {
            let u = 2.0 * rng.random::<f64>() - 1.0;
            let v = 2.0 * rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = libm::sqrt(-2.0 * libm::log(s) / s);
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

#[inline]
fn nearest<R: Rng + ?Sized>(
    y: &[f64],
    points: &[f64],
    dim: usize,
    tie_rule: TieRule,
    rng: &mut R,
) -> usize {
    let mut best = f64::INFINITY;
    let mut index = 0;
    let mut ties = 0u32;
    for (i, s) in points.chunks_exact(dim).enumerate() {
        let d: f64 = y.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best {
            best = d;
            index = i;
            ties = 1;
        } else if d == best {
            ties += 1;
            // reservoir sampling: each co-minimizer ends up with prob 1/ties
            if tie_rule == TieRule::UniformRandom && rng.random_range(0..ties) == 0 {
                index = i;
            }
        }
    }
    index
}

/// Index (0-based) of the signal vector closest to `y`.
///
/// Among exact co-minimizers, [`TieRule::UniformRandom`] picks one uniformly
/// using `rng`; [`TieRule::LowestIndex`] picks the first and leaves `rng`
/// untouched.
pub fn decode_min_distance<R: Rng + ?Sized>(
    y: &[f64],
    set: &SignalSet,
    tie_rule: TieRule,
    rng: &mut R,
) -> Result<usize> {
    if y.len() != set.dim() {
        return Err(Error::domain(format!(
            "received vector has {} components, signal set has dimension {}",
            y.len(),
            set.dim()
        )));
    }
    Ok(nearest(y, set.points(), set.dim(), tie_rule, rng))
}

/// Per-signal transmit counts for one block: floor(n·p_m) each, with the
/// remainder spread by systematic sampling over the fractional parts.
fn stratify<R: Rng + ?Sized>(n: u64, priors: &[f64], rng: &mut R) -> Vec<u64> {
    let exact: Vec<f64> = priors.iter().map(|p| n as f64 * p).collect();
    let mut counts: Vec<u64> = exact.iter().map(|e| e.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    if assigned >= n {
        // only possible through rounding of priors summing marginally above 1
        let mut excess = assigned - n;
        for c in counts.iter_mut().rev() {
            let take = excess.min(*c);
            *c -= take;
            excess -= take;
        }
        return counts;
    }
    let remainder = n - assigned;
    let fractions: Vec<f64> = exact
        .iter()
        .zip(&counts)
        .map(|(e, &c)| e - c as f64)
        .collect();
    let total: f64 = fractions.iter().sum();
    let scale = if total > 0.0 {
        remainder as f64 / total
    } else {
        0.0
    };
    let mut pointer = rng.random::<f64>();
    let mut cumulative = 0.0;
    let mut placed = 0;
    for (m, f) in fractions.iter().enumerate() {
        cumulative += f * scale;
        while placed < remainder && pointer < cumulative {
            counts[m] += 1;
            placed += 1;
            pointer += 1.0;
        }
    }
    // cumulative can fall a hair short of `remainder`
    if placed < remainder {
        let last = priors.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        counts[last] += remainder - placed;
    }
    counts
}

struct BlockTally {
    sent: Vec<u64>,
    correct: Vec<u64>,
}

fn run_block(config: &TrialConfig, block: u64) -> BlockTally {
    let set = &config.set;
    let dim = set.dim();
    let points = set.points();
    let m = set.len();
    let start = block * BLOCK_TRIALS;
    let n = BLOCK_TRIALS.min(config.trials - start);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(block);
    let sent = stratify(n, set.priors(), &mut rng);

    let sigma = config.sigma2.sqrt();
    let mut gauss = PolarGaussian::default();
    let mut y = vec![0.0; dim];
    let mut correct = vec![0u64; m];
    for (tx, &count) in sent.iter().enumerate() {
        let s = set.vector(tx);
        for _ in 0..count {
            for (yi, si) in y.iter_mut().zip(s) {
                *yi = si + sigma * gauss.sample(&mut rng);
            }
            if nearest(&y, points, dim, config.tie_rule, &mut rng) == tx {
                correct[tx] += 1;
            }
        }
    }
    BlockTally { sent, correct }
}

/// Estimates P_d for `config.set` by simulation.
pub fn simulate_pd(config: &TrialConfig) -> Result<PdEstimate> {
    config.validate()?;
    let m = config.set.len();
    let blocks = config.trials.div_ceil(BLOCK_TRIALS);
    let block_count = usize::try_from(blocks)
        .map_err(|_| Error::domain("trial count too large for this platform"))?;

    let tallies = par::map_indexed(block_count, |b| run_block(config, b as u64));
    let mut sent = vec![0u64; m];
    let mut correct = vec![0u64; m];
    for t in &tallies {
        for i in 0..m {
            sent[i] += t.sent[i];
            correct[i] += t.correct[i];
        }
    }

    let per_signal_correct: Vec<Option<f64>> = sent
        .iter()
        .zip(&correct)
        .map(|(&s, &c)| (s > 0).then(|| c as f64 / s as f64))
        .collect();
    // Prior-weighted over the indices that were actually sent.
    let (weighted, weight) = per_signal_correct
        .iter()
        .zip(config.set.priors())
        .filter_map(|(r, &p)| r.map(|r| (r * p, p)))
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let p_hat = if weight > 0.0 {
        (weighted / weight).clamp(0.0, 1.0)
    } else {
        correct.iter().sum::<u64>() as f64 / config.trials as f64
    };
    let stderr = (p_hat * (1.0 - p_hat) / config.trials as f64).sqrt();

    Ok(PdEstimate {
        p_hat,
        stderr,
        trials: config.trials,
        seed: config.seed,
        per_signal_correct,
        per_signal_sent: sent,
    })
}
