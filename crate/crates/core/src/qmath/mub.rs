use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::linalg::{CVector, C64};
use crate::error::{Error, Result};

/// The six single-qubit states forming three mutually unbiased bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MubState {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    /// `(|0> + i|1>)/sqrt(2)`
    #[serde(rename = "+i")]
    PlusI,
    /// `(|0> - i|1>)/sqrt(2)`
    #[serde(rename = "-i")]
    MinusI,
}

impl MubState {
    pub const ALL: [MubState; 6] = [
        MubState::Zero,
        MubState::One,
        MubState::Plus,
        MubState::Minus,
        MubState::PlusI,
        MubState::MinusI,
    ];

    pub fn vector(self) -> CVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            MubState::Zero => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            MubState::One => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            MubState::Plus => (C64::new(h, 0.0), C64::new(h, 0.0)),
            MubState::Minus => (C64::new(h, 0.0), C64::new(-h, 0.0)),
            MubState::PlusI => (C64::new(h, 0.0), C64::new(0.0, h)),
            MubState::MinusI => (C64::new(h, 0.0), C64::new(0.0, -h)),
        };
        CVector::from_vec(vec![a, b])
    }

    /// Label of the complex-conjugate state.
    pub fn conj(self) -> MubState {
        match self {
            MubState::PlusI => MubState::MinusI,
            MubState::MinusI => MubState::PlusI,
            other => other,
        }
    }

    pub fn orthogonal(self) -> MubState {
        match self {
            MubState::Zero => MubState::One,
            MubState::One => MubState::Zero,
            MubState::Plus => MubState::Minus,
            MubState::Minus => MubState::Plus,
            MubState::PlusI => MubState::MinusI,
            MubState::MinusI => MubState::PlusI,
        }
    }

    pub fn is_superposition(self) -> bool {
        !matches!(self, MubState::Zero | MubState::One)
    }

    /// Position in [`MubState::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MubState::Zero => "0",
            MubState::One => "1",
            MubState::Plus => "+",
            MubState::Minus => "-",
            MubState::PlusI => "+i",
            MubState::MinusI => "-i",
        }
    }
}

impl fmt::Display for MubState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MubState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MubState::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown state label `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bases_are_mutually_unbiased() {
        for a in MubState::ALL {
            for b in MubState::ALL {
                let overlap = a.vector().dotc(&b.vector()).norm_sqr();
                let expected = if a == b {
                    1.0
                } else if a.orthogonal() == b {
                    0.0
                } else {
                    0.5
                };
                assert!((overlap - expected).abs() < 1e-15, "{a} {b}");
            }
        }
    }

    #[test]
    fn labels_round_trip() {
        for l in MubState::ALL {
            assert_eq!(l.as_str().parse::<MubState>().unwrap(), l);
        }
        assert!("x".parse::<MubState>().is_err());
    }
}
