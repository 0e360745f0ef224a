//! The synthetic piecewise-constant test matrices used in the experiments.
//!
//! With 1-based indices `i, j ∈ {1..n}`:
//! * `two`:   `θ_ij = 1{j > n/2}`
//! * `four`:  quadrant blocks `[[1, 2], [0, 1]]` of size `n/2`
//! * `worst`: `θ_ij = 1{i + j > n}`
//!
//! Edge counting gives `tv(worst) = 2(n−1)`, so its canonically scaled TV is
//! `2(n−1)/n`. This is sometimes quoted as `1 − 1/n`; the value reported here
//! is always computed from the edges.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TvError};
use crate::matrix::ImageMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Two,
    Four,
    Worst,
}

impl SignalKind {
    pub const ALL: [SignalKind; 3] = [SignalKind::Two, SignalKind::Four, SignalKind::Worst];

    pub fn at(self, n: usize) -> GridSignal {
        GridSignal::Synthetic { kind: self, n }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::Two => "two",
            SignalKind::Four => "four",
            SignalKind::Worst => "worst",
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalKind {
    type Err = TvError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" => Ok(SignalKind::Two),
            "four" => Ok(SignalKind::Four),
            "worst" => Ok(SignalKind::Worst),
            other => Err(TvError::argument(format!("unknown signal '{other}' (expected two, four or worst)"))),
        }
    }
}

/// A generator tag: one of the synthetic signals at side length `n`, or a
/// caller-supplied matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSignal {
    Synthetic { kind: SignalKind, n: usize },
    Custom(ImageMatrix),
}

impl GridSignal {
    pub fn n(&self) -> usize {
        match self {
            GridSignal::Synthetic { n, .. } => *n,
            GridSignal::Custom(m) => m.cols(),
        }
    }
}

pub fn make_signal(signal: &GridSignal) -> Result<ImageMatrix> {
    let (kind, n) = match signal {
        GridSignal::Custom(m) => return Ok(m.clone()),
        GridSignal::Synthetic { kind, n } => (*kind, *n),
    };
    if n < 2 {
        return Err(TvError::argument(format!("signal side length must be at least 2, got {n}")));
    }
    if matches!(kind, SignalKind::Two | SignalKind::Four) && n % 2 != 0 {
        return Err(TvError::argument(format!("signal '{kind}' needs an even side length, got {n}")));
    }
    let half = n / 2;
    // 0-based indices: j > n/2 (1-based) is j0 >= n/2; i + j > n is i0 + j0 >= n - 1.
    ImageMatrix::from_fn(n, n, |i, j| match kind {
        SignalKind::Two => f64::from(u8::from(j >= half)),
        SignalKind::Four => match (i < half, j < half) {
            (true, true) => 1.0,
            (true, false) => 2.0,
            (false, true) => 0.0,
            (false, false) => 1.0,
        },
        SignalKind::Worst => f64::from(u8::from(i + j + 1 >= n)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{tv, tv_norm};

    #[test]
    fn small_signals_match_their_definitions() {
        let two = make_signal(&SignalKind::Two.at(2)).unwrap();
        assert_eq!(two.values(), &[0.0, 1.0, 0.0, 1.0]);
        let four = make_signal(&SignalKind::Four.at(2)).unwrap();
        assert_eq!(four.values(), &[1.0, 2.0, 0.0, 1.0]);
        let worst = make_signal(&SignalKind::Worst.at(2)).unwrap();
        assert_eq!(worst.values(), &[0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn odd_sizes_rejected_for_block_signals() {
        assert!(make_signal(&SignalKind::Two.at(5)).is_err());
        assert!(make_signal(&SignalKind::Four.at(3)).is_err());
        assert!(make_signal(&SignalKind::Worst.at(5)).is_ok());
        assert!(make_signal(&SignalKind::Worst.at(1)).is_err());
    }

    #[test]
    fn published_total_variations() {
        let two = make_signal(&SignalKind::Two.at(4)).unwrap();
        assert_eq!(tv(&two), 4.0);
        assert_eq!(tv_norm(&two).unwrap(), 1.0);
        let four = make_signal(&SignalKind::Four.at(4)).unwrap();
        assert_eq!(tv(&four), 8.0);
        assert_eq!(tv_norm(&four).unwrap(), 2.0);
    }

    #[test]
    fn worst_total_variation_is_counted_from_edges() {
        for n in [2usize, 3, 8, 17, 64] {
            let worst = make_signal(&SignalKind::Worst.at(n)).unwrap();
            assert_eq!(tv(&worst), 2.0 * (n as f64 - 1.0));
            let expected = 2.0 * (n as f64 - 1.0) / n as f64;
            assert!((tv_norm(&worst).unwrap() - expected).abs() < 1e-15);
        }
    }
}
