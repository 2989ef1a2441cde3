use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{draw_poisson, Tomogram};
use crate::error::{Error, Result};

pub const DEFAULT_BOOTSTRAP_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapEstimate {
    /// Statistic evaluated on the observed tomogram.
    pub value: f64,
    /// Mean over the resampled tomograms.
    pub mean: f64,
    /// Sample standard deviation over the resampled tomograms.
    pub std: f64,
    pub samples: usize,
}

impl BootstrapEstimate {
    /// An exact value with no sampling uncertainty.
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            mean: value,
            std: 0.0,
            samples: 0,
        }
    }
}

/// Poissonian bootstrap of one statistic.
pub fn bootstrap<F>(tomogram: &Tomogram, statistic: F, samples: usize, seed: u64) -> Result<BootstrapEstimate>
where
    F: Fn(&Tomogram) -> Result<f64> + Sync,
{
    let v = bootstrap_many(tomogram, |t| statistic(t).map(|x| vec![x]), samples, seed)?;
    Ok(v[0])
}

/// Bootstrap of a vector-valued statistic. Replica `i` redraws every count as
/// `Poisson(observed)` from a ChaCha stream `(seed, i)`, so the result does
/// not depend on scheduling.
pub fn bootstrap_many<F>(tomogram: &Tomogram, statistic: F, samples: usize, seed: u64) -> Result<Vec<BootstrapEstimate>>
where
    F: Fn(&Tomogram) -> Result<Vec<f64>> + Sync,
{
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("bootstrap needs at least 2 samples, got {samples}")));
    }
    let value = statistic(tomogram)?;
    let replicas: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let counts = draw_poisson(tomogram.counts.iter().map(|&c| c as f64), &mut rng);
            let t = tomogram.with_counts(counts)?;
            let s = statistic(&t)?;
            if s.len() != value.len() {
                return Err(Error::InvalidArgument("statistic changed length between replicas".into()));
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let n = samples as f64;
    Ok(value
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let mean = replicas.iter().map(|r| r[k]).sum::<f64>() / n;
            let var = replicas.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            BootstrapEstimate {
                value: v,
                mean,
                std: var.sqrt(),
                samples,
            }
        })
        .collect())
}
