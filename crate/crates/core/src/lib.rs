//! Average probability of correct optimal decoding for the L1, coded-L1 (Lc)
//! and regular simplex (SI) signal sets on the time-discrete AWGN channel.
//!
//! The crate evaluates the closed forms, cross-checks them with a
//! minimum-distance Monte-Carlo simulator, and locates the energy / SNR at
//! which the L1-family curve and the simplex curve cross.
//!
//! Two signal-to-noise conventions are supported throughout:
//!
//! * [`Convention::Lambda2`]: the average signal energy λ² with σ² = 1.
//! * [`Convention::Snr`]: the classical normalized SNR, λ² / N_u.

pub mod analysis;
pub mod cli;
pub mod closedform;
mod error;
pub mod mathkit;
pub mod montecarlo;
pub mod par;
pub mod signals;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Signal-to-noise convention a probability curve is parameterized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Average signal energy λ² at unit noise variance.
    Lambda2,
    /// Average signal energy per real channel use at unit noise variance.
    Snr,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Lambda2 => "lambda2",
            Convention::Snr => "snr",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda2" => Ok(Convention::Lambda2),
            "snr" => Ok(Convention::Snr),
            other => Err(Error::Domain(format!(
                "unknown convention `{other}` (expected lambda2 or snr)"
            ))),
        }
    }
}
