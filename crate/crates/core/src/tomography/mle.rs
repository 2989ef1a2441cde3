//! Iterative maximum-likelihood reconstruction.
//!
//! With unequal or incomplete-basis durations the Poisson likelihood with a
//! free source rate is `L(rho) = sum_j f_j ln p_j - F ln Tr[G rho]`, where
//! `p_j = Tr[Pi_j rho]`, `F = sum_j f_j` and `G = sum_j t_j Pi_j`. The fixed
//! point iteration is `rho <- N[G^-1 R rho R G^-1]` with
//! `R = sum_j (f_j / p_j) Pi_j`, which reduces to the plain `R rho R` step
//! when `G` is proportional to the identity. A step that lowers `L` is
//! replaced by the diluted step `(I + eps K) rho (I + eps K)` along the
//! gradient direction `K = R / F - G / Tr[G rho]`, with `eps` halved until
//! `L` does not decrease.

use crate::error::{Error, Result};
use crate::qmath::linalg::{self, CMatrix, C64};
use crate::qmath::{DensityMatrix, MubState};

use super::trie::ProductTrie;
use super::{MeasurementSetting, ProcessMatrix, Tomogram};

const P_FLOOR: f64 = 1e-14;
const MAX_HALVINGS: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop once the largest elementwise change of `rho` falls below this.
    pub tolerance: f64,
    /// Keep the likelihood after every iteration in [`MleFit::history`].
    pub record_history: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            tolerance: 1e-10,
            record_history: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MleFit {
    pub rho: DensityMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// Log-likelihood of the starting point followed by one entry per
    /// iteration, when requested.
    pub history: Vec<f64>,
    /// `F / Tr[G rho]`: the fitted number of events per unit duration and
    /// unit probability.
    pub fitted_rate: f64,
}

/// Product-projector data prepared for reconstruction.
#[derive(Clone, Debug)]
pub struct MleProblem {
    trie: ProductTrie,
    durations: Vec<f64>,
    data: Vec<f64>,
}

impl MleProblem {
    /// Rows of single-qubit labels (first label most significant), durations
    /// and observed frequencies (counts, or exact means for noiseless data).
    pub fn new(rows: &[Vec<MubState>], durations: Vec<f64>, data: Vec<f64>) -> Result<Self> {
        if rows.len() != durations.len() || rows.len() != data.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: data.len().min(durations.len()),
            });
        }
        if data.iter().any(|&f| !(f >= 0.0 && f.is_finite())) {
            return Err(Error::InvalidArgument("frequencies must be non-negative".into()));
        }
        if !(data.iter().sum::<f64>() > 0.0) {
            return Err(Error::ZeroCounts);
        }
        let trie = ProductTrie::new(rows)?;
        trie.check_complete(rows)?;
        Ok(Self { trie, durations, data })
    }

    pub fn from_tomogram(t: &Tomogram) -> Result<Self> {
        let rows: Vec<Vec<MubState>> = t.settings.iter().map(MeasurementSetting::row).collect();
        Self::new(
            &rows,
            t.settings.iter().map(|s| s.duration).collect(),
            t.counts.iter().map(|&c| c as f64).collect(),
        )
    }

    pub fn qubits(&self) -> usize {
        self.trie.depth()
    }

    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.trie.probabilities(rho)
    }

    fn likelihood(&self, p: &[f64]) -> f64 {
        let total: f64 = self.data.iter().sum();
        let mut l = 0.0;
        let mut norm = 0.0;
        for ((&f, &pj), &t) in self.data.iter().zip(p).zip(&self.durations) {
            if f > 0.0 {
                l += f * pj.max(P_FLOOR).ln();
            }
            norm += t * pj;
        }
        l - total * norm.max(f64::MIN_POSITIVE).ln()
    }

    pub fn log_likelihood(&self, rho: &CMatrix) -> f64 {
        self.likelihood(&self.probabilities(rho))
    }

    pub fn solve(&self, opts: &MleOptions) -> Result<MleFit> {
        let d = 1usize << self.qubits();
        let total: f64 = self.data.iter().sum();
        let g = self.trie.accumulate(&self.durations);
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::IncompleteMeasurements("singular duration operator".into()))?;

        let mut rho = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        let mut p = self.probabilities(&rho);
        let mut l = self.likelihood(&p);
        let mut history = if opts.record_history { vec![l] } else { Vec::new() };
        let mut converged = false;
        let mut iterations = 0;

        while iterations < opts.max_iterations {
            iterations += 1;
            let weights: Vec<f64> = self
                .data
                .iter()
                .zip(&p)
                .map(|(&f, &pj)| if f > 0.0 { f / pj.max(P_FLOOR) } else { 0.0 })
                .collect();
            let r = self.trie.accumulate(&weights);
            let a = &g_inv * &r;
            let mut cand = normalize(&a * &rho * a.adjoint());
            let mut p_c = self.probabilities(&cand);
            let mut l_c = self.likelihood(&p_c);

            if !(l_c >= l) {
                let norm: f64 = self.durations.iter().zip(&p).map(|(t, pj)| t * pj).sum();
                let k = &r * C64::new(1.0 / total, 0.0) - &g * C64::new(1.0 / norm, 0.0);
                let mut eps = 1.0;
                let mut accepted = false;
                for _ in 0..MAX_HALVINGS {
                    let x = CMatrix::identity(d, d) + &k * C64::new(eps, 0.0);
                    cand = normalize(&x * &rho * &x);
                    p_c = self.probabilities(&cand);
                    l_c = self.likelihood(&p_c);
                    if l_c >= l {
                        accepted = true;
                        break;
                    }
                    eps *= 0.5;
                }
                if !accepted {
                    // no ascent direction left at working precision
                    converged = true;
                    iterations -= 1;
                    break;
                }
            }

            let delta = linalg::max_abs_diff(&cand, &rho);
            rho = cand;
            p = p_c;
            l = l_c;
            if opts.record_history {
                history.push(l);
            }
            if delta < opts.tolerance {
                converged = true;
                break;
            }
        }

        let norm: f64 = self.durations.iter().zip(&p).map(|(t, pj)| t * pj).sum();
        Ok(MleFit {
            rho: DensityMatrix::from_unnormalized(rho)?,
            iterations,
            converged,
            log_likelihood: l,
            history,
            fitted_rate: total / norm,
        })
    }
}

fn normalize(m: CMatrix) -> CMatrix {
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = linalg::trace(&h).re;
    h * C64::new(1.0 / tr, 0.0)
}

/// Maximum-likelihood density matrix of dimension `dim` from a state tomogram.
pub fn mle_state(tomogram: &Tomogram, dim: usize) -> Result<DensityMatrix> {
    mle_state_with(tomogram, dim, &MleOptions::default()).map(|f| f.rho)
}

pub fn mle_state_with(tomogram: &Tomogram, dim: usize, opts: &MleOptions) -> Result<MleFit> {
    if tomogram.settings.iter().any(|s| !s.preparation.is_empty()) {
        return Err(Error::InvalidArgument("state tomogram must not carry preparations".into()));
    }
    let problem = MleProblem::from_tomogram(tomogram)?;
    if 1usize << problem.qubits() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: 1 << problem.qubits(),
        });
    }
    problem.solve(opts)
}

/// Maximum-likelihood Choi matrix of an `n`-qubit channel. Only positivity is
/// imposed; the trace is fixed by the per-setting normalisation
/// `rate_reference * duration`, so a post-selected channel keeps its success
/// probability as `Tr[chi]`.
pub fn mle_process(tomogram: &Tomogram, n: usize) -> Result<ProcessMatrix> {
    mle_process_with(tomogram, n, &MleOptions::default()).map(|(chi, _)| chi)
}

pub fn mle_process_with(tomogram: &Tomogram, n: usize, opts: &MleOptions) -> Result<(ProcessMatrix, MleFit)> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidArgument(format!("process tomography supports 1 to 3 qubits, got {n}")));
    }
    for s in &tomogram.settings {
        if s.preparation.len() != n || s.projection.len() != n {
            return Err(Error::IncompleteMeasurements(format!(
                "setting needs {n} preparation and {n} projection labels"
            )));
        }
    }
    let fit = MleProblem::from_tomogram(tomogram)?.solve(opts)?;
    let d = (1usize << n) as f64;
    let scale = fit.fitted_rate / (tomogram.rate_reference * d);
    let chi = ProcessMatrix::new(fit.rho.matrix() * C64::new(scale, 0.0), n)?;
    Ok((chi, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{MubState, PureState};
    use crate::tomography::{expected_counts, simulate_counts, state_settings};

    fn noiseless(rho: &DensityMatrix, settings: &[MeasurementSetting]) -> MleProblem {
        let rows: Vec<_> = settings.iter().map(MeasurementSetting::row).collect();
        let means = expected_counts(rho, settings, 1000.0).unwrap();
        MleProblem::new(&rows, settings.iter().map(|s| s.duration).collect(), means).unwrap()
    }

    #[test]
    fn noiseless_pure_state_is_recovered() {
        let plus = PureState::from_label(MubState::Plus);
        let fit = noiseless(&plus.density(), &state_settings(1, 1.0).unwrap())
            .solve(&MleOptions::default())
            .unwrap();
        assert!(fit.rho.fidelity(&plus).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn unequal_durations_are_accounted_for() {
        let rho = DensityMatrix::diagonal(&[0.8, 0.2]).unwrap();
        let settings: Vec<_> = MubState::ALL
            .into_iter()
            .enumerate()
            .map(|(i, l)| MeasurementSetting::projection(vec![l], 1.0 + i as f64).unwrap())
            .collect();
        let fit = noiseless(&rho, &settings).solve(&MleOptions::default()).unwrap();
        assert!(fit.rho.trace_distance(&rho).unwrap() < 1e-6);
        assert!((fit.fitted_rate - 1000.0).abs() < 1e-3);
    }

    #[test]
    fn likelihood_never_decreases() {
        let rho = DensityMatrix::maximally_mixed(2);
        let t = simulate_counts(&rho, &state_settings(2, 1.0).unwrap(), 50.0, 4).unwrap();
        let opts = MleOptions {
            record_history: true,
            ..MleOptions::default()
        };
        let fit = mle_state_with(&t, 4, &opts).unwrap();
        assert!(fit.history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn zero_counts_and_incomplete_sets_are_reported() {
        let s = state_settings(1, 1.0).unwrap();
        let t = Tomogram::new(s.clone(), vec![0; 6], 1.0).unwrap();
        assert!(matches!(mle_state(&t, 2), Err(Error::ZeroCounts)));
        let z: Vec<_> = s.into_iter().filter(|s| !s.projection[0].is_superposition()).collect();
        let t = Tomogram::new(z, vec![5, 5], 1.0).unwrap();
        assert!(matches!(mle_state(&t, 2), Err(Error::IncompleteMeasurements(_))));
    }

    #[test]
    fn dimension_must_match() {
        let t = simulate_counts(&DensityMatrix::maximally_mixed(1), &state_settings(1, 1.0).unwrap(), 100.0, 1).unwrap();
        assert!(mle_state(&t, 4).is_err());
    }
}
