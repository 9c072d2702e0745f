use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::{Deserialize, Serialize};

/// Natural-log probability. Never NaN; `-inf` marks an impossible event.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(0.0);
    pub const NEG_INFINITY: LogProb = LogProb(f64::NEG_INFINITY);

    pub fn new(value: f64) -> Self {
        assert!(!value.is_nan(), "log-probability is NaN");
        LogProb(value)
    }

    pub fn from_prob(p: f64) -> Self {
        LogProb::new(p.ln())
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_impossible(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn halve(self) -> Self {
        LogProb(0.5 * self.0)
    }

    /// Whether `self` is no more likely than `other`, treating values within
    /// a relative `1e-9` as equal so rounding does not split exact ties.
    pub fn at_most(self, other: LogProb) -> bool {
        self.0 <= other.0 + TIE_TOLERANCE * other.0.abs().max(1.0)
    }
}

const TIE_TOLERANCE: f64 = 1e-9;

impl Eq for LogProb {}

impl PartialOrd for LogProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogProb {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for LogProb {
    type Output = LogProb;

    fn add(self, rhs: LogProb) -> LogProb {
        // Both operands are <= 0 or -inf, so the sum cannot be NaN.
        LogProb(self.0 + rhs.0)
    }
}

impl Sum for LogProb {
    fn sum<I: Iterator<Item = LogProb>>(iter: I) -> LogProb {
        iter.fold(LogProb::ZERO, Add::add)
    }
}

impl fmt::Debug for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogProb({})", self.0)
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}
