//! Simulated coincidence counting, maximum-likelihood state and process
//! reconstruction, channel-state duality and Poissonian bootstrap errors.
//!
//! A process tomogram over `n` qubits is reconstructed as a `2n`-qubit
//! state: a setting with input preparation `|a>` and output projection `|b>`
//! is the product projector `|a*><a*| ⊗ |b><b|` on the Choi matrix, whose
//! first `n` qubits are the reference half.

mod bootstrap;
mod format;
mod mle;
mod process;
mod trie;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

pub use bootstrap::{bootstrap, bootstrap_many, BootstrapEstimate, DEFAULT_BOOTSTRAP_SAMPLES};
pub use format::{read_tomogram, write_tomogram, FORMAT_HEADER};
pub use mle::{mle_process, mle_process_with, mle_state, mle_state_with, MleFit, MleOptions, MleProblem};
pub use process::{apply_choi, channel_to_choi, process_fidelity, process_purity, ProcessMatrix};

use crate::error::{Error, Result};
use crate::qmath::{CMatrix, DensityMatrix, MubState};
use trie::ProductTrie;

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSetting {
    pub preparation: Vec<MubState>,
    pub projection: Vec<MubState>,
    pub duration: f64,
}

impl MeasurementSetting {
    pub fn new(preparation: Vec<MubState>, projection: Vec<MubState>, duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument(format!("duration {duration} must be positive")));
        }
        if projection.is_empty() {
            return Err(Error::InvalidArgument("setting without projection labels".into()));
        }
        Ok(Self {
            preparation,
            projection,
            duration,
        })
    }

    /// A state-tomography setting (no preparation).
    pub fn projection(projection: Vec<MubState>, duration: f64) -> Result<Self> {
        Self::new(Vec::new(), projection, duration)
    }

    /// Labels of the product projector acting on the reconstructed operator.
    pub(crate) fn row(&self) -> Vec<MubState> {
        self.preparation
            .iter()
            .map(|l| l.conj())
            .chain(self.projection.iter().copied())
            .collect()
    }
}

/// All `6^n` product projections of `n` qubits, first qubit slowest.
pub fn state_settings(n: usize, duration: f64) -> Result<Vec<MeasurementSetting>> {
    label_grid(n)
        .into_iter()
        .map(|p| MeasurementSetting::projection(p, duration))
        .collect()
}

/// All `6^n x 6^n` combinations of product preparations and projections.
pub fn process_settings(n: usize, duration: f64) -> Result<Vec<MeasurementSetting>> {
    let grid = label_grid(n);
    let mut out = Vec::with_capacity(grid.len() * grid.len());
    for prep in &grid {
        for proj in &grid {
            out.push(MeasurementSetting::new(prep.clone(), proj.clone(), duration)?);
        }
    }
    Ok(out)
}

fn label_grid(n: usize) -> Vec<Vec<MubState>> {
    (0..n).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|prefix| {
                MubState::ALL.into_iter().map(move |l| {
                    let mut p = prefix.clone();
                    p.push(l);
                    p
                })
            })
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tomogram {
    pub settings: Vec<MeasurementSetting>,
    pub counts: Vec<u64>,
    /// Source rate (counts per second) the durations refer to.
    pub rate_reference: f64,
}

impl Tomogram {
    pub fn new(settings: Vec<MeasurementSetting>, counts: Vec<u64>, rate_reference: f64) -> Result<Self> {
        if settings.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: settings.len(),
                found: counts.len(),
            });
        }
        if !(rate_reference > 0.0 && rate_reference.is_finite()) {
            return Err(Error::InvalidArgument(format!("rate {rate_reference} must be positive")));
        }
        Ok(Self {
            settings,
            counts,
            rate_reference,
        })
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn with_counts(&self, counts: Vec<u64>) -> Result<Self> {
        Self::new(self.settings.clone(), counts, self.rate_reference)
    }

    /// Appends the records of `other`; used to bootstrap statistics that
    /// combine several tomograms.
    pub fn concat(&self, other: &Tomogram) -> Tomogram {
        let mut t = self.clone();
        t.settings.extend(other.settings.iter().cloned());
        t.counts.extend(other.counts.iter().copied());
        t
    }

    /// Splits off the first `len` records again (inverse of [`Tomogram::concat`]).
    pub fn split_at(&self, len: usize) -> (Tomogram, Tomogram) {
        let head = Tomogram {
            settings: self.settings[..len].to_vec(),
            counts: self.counts[..len].to_vec(),
            rate_reference: self.rate_reference,
        };
        let tail = Tomogram {
            settings: self.settings[len..].to_vec(),
            counts: self.counts[len..].to_vec(),
            rate_reference: self.rate_reference,
        };
        (head, tail)
    }
}

/// Mean counts `rate * duration * Tr[Pi rho]` for state-tomography settings.
pub fn expected_counts(state: &DensityMatrix, settings: &[MeasurementSetting], rate: f64) -> Result<Vec<f64>> {
    for s in settings {
        if !s.preparation.is_empty() {
            return Err(Error::InvalidArgument("state tomography settings carry no preparation".into()));
        }
    }
    means(state.matrix(), settings, rate, 1.0)
}

/// Mean counts `rate * duration * Tr[Pi E(|a><a|)]` of a process tomogram of
/// the channel with Choi matrix `chi`.
pub fn expected_process_counts(chi: &ProcessMatrix, settings: &[MeasurementSetting], rate: f64) -> Result<Vec<f64>> {
    for s in settings {
        if s.preparation.len() != chi.n() || s.projection.len() != chi.n() {
            return Err(Error::DimensionMismatch {
                expected: chi.n(),
                found: s.projection.len(),
            });
        }
    }
    means(chi.matrix(), settings, rate, (1usize << chi.n()) as f64)
}

fn means(op: &CMatrix, settings: &[MeasurementSetting], rate: f64, scale: f64) -> Result<Vec<f64>> {
    if !(rate > 0.0) {
        return Err(Error::InvalidArgument(format!("rate {rate} must be positive")));
    }
    let rows: Vec<Vec<MubState>> = settings.iter().map(MeasurementSetting::row).collect();
    let trie = ProductTrie::new(&rows)?;
    if op.nrows() != 1 << trie.depth() {
        return Err(Error::DimensionMismatch {
            expected: op.nrows(),
            found: 1 << trie.depth(),
        });
    }
    let p = trie.probabilities(op);
    Ok(settings
        .iter()
        .zip(p)
        .map(|(s, p)| rate * s.duration * scale * p.max(0.0))
        .collect())
}

/// Draws Poisson counts around the given means.
pub fn poisson_counts(means: &[f64], seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_poisson(means.iter().copied(), &mut rng)
}

pub(crate) fn draw_poisson<R: rand::Rng>(means: impl Iterator<Item = f64>, rng: &mut R) -> Vec<u64> {
    means
        .map(|m| match Poisson::new(m) {
            Ok(d) => d.sample(rng) as u64,
            Err(_) => 0,
        })
        .collect()
}

/// Simulated state tomogram with Poissonian counts.
pub fn simulate_counts(
    true_state: &DensityMatrix,
    settings: &[MeasurementSetting],
    rate: f64,
    seed: u64,
) -> Result<Tomogram> {
    let m = expected_counts(true_state, settings, rate)?;
    Tomogram::new(settings.to_vec(), poisson_counts(&m, seed), rate)
}

/// Simulated process tomogram of the channel with Choi matrix `chi`.
pub fn simulate_process_counts(
    chi: &ProcessMatrix,
    settings: &[MeasurementSetting],
    rate: f64,
    seed: u64,
) -> Result<Tomogram> {
    let m = expected_process_counts(chi, settings, rate)?;
    Tomogram::new(settings.to_vec(), poisson_counts(&m, seed), rate)
}
