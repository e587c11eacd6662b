//! Seeded simulation of photon-counting phase estimation.
//!
//! Each shot produces either a detected pair `(N, mu)` with `N <= n_res`, or
//! an overflow event when more photons arrive than the detectors resolve.
//! Overflow probability does not depend on the phase, so it never moves the
//! likelihood maximum.
//!
//! Repeat `i` of an experiment draws from ChaCha20 seeded with `seed` on
//! stream `i`, so results do not depend on thread scheduling.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fisher::{total_cfi, Resolution};
use crate::nphoton::embed;
use crate::optimize::{golden_max, linear_grid};
use crate::special_fn::wigner_d;
use crate::states::{component_amplitudes, generation_probability, InterferometerInput};

pub const MLE_GRID_POINTS: usize = 256;
pub const MLE_TOL: f64 = 1e-6;
/// Phase search interval; the endpoints `0` and `pi` are degenerate.
pub const SEARCH_INTERVAL: (f64, f64) = (0.01, PI - 0.01);
pub const MIN_REPEATS: usize = 100;
/// Likelihood curves flatter than this are rejected.
pub const FLAT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// `N = N_1 + N_2` photons with `mu = (N_1 - N_2) / 2`.
    Detected { n: u32, two_mu: i32 },
    Overflow,
}

#[derive(Debug, Clone)]
struct Component {
    n: u32,
    g: f64,
    embedded: Vec<f64>,
}

/// Joint outcome probabilities `G_N P_N(mu|phi)` over all resolvable
/// outcomes, plus the overflow bucket.
#[derive(Debug, Clone)]
pub struct LikelihoodModel {
    input: InterferometerInput,
    n_res: Resolution,
    components: Vec<Component>,
    outcomes: Vec<Outcome>,
    overflow: f64,
}

impl LikelihoodModel {
    pub fn new(input: &InterferometerInput, n_res: Resolution) -> Result<Self> {
        input.require_phase_matched()?;
        let x = input.ratio_x();
        let n_max = n_res.cutoff(input);
        let components: Vec<Component> = (0..=n_max)
            .map(|n| Component {
                n,
                g: generation_probability(input, n),
                embedded: embed(n, &component_amplitudes(n, x)),
            })
            .collect();
        let mut outcomes = Vec::new();
        for c in &components {
            for i in 0..=c.n as i32 {
                outcomes.push(Outcome::Detected {
                    n: c.n,
                    two_mu: 2 * i - c.n as i32,
                });
            }
        }
        outcomes.push(Outcome::Overflow);
        let kept: f64 = components.iter().map(|c| c.g).sum();
        Ok(Self {
            input: *input,
            n_res,
            components,
            outcomes,
            overflow: (1.0 - kept).max(0.0),
        })
    }

    pub fn input(&self) -> &InterferometerInput {
        &self.input
    }

    pub fn resolution(&self) -> Resolution {
        self.n_res
    }

    /// Outcome labels in the order used by [`Self::probabilities`] and
    /// [`OutcomeSample::counts`]; overflow is last.
    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn overflow_probability(&self) -> f64 {
        self.overflow
    }

    pub fn probabilities(&self, phi: f64) -> Result<Vec<f64>> {
        check_phase(phi)?;
        let mut out = Vec::with_capacity(self.outcomes.len());
        for c in &self.components {
            let psi = wigner_d(c.n, phi)?.apply(&c.embedded);
            out.extend(psi.iter().map(|a| c.g * a * a));
        }
        out.push(self.overflow);
        Ok(out)
    }

    /// Counting Fisher information per shot at `phi`.
    pub fn fisher_information(&self, phi: f64) -> Result<f64> {
        check_phase(phi)?;
        total_cfi(&self.input, phi, self.n_res)
    }

    /// Draws `shots` outcomes at phase `phi` from stream `stream` of `seed`.
    pub fn sample(&self, phi: f64, shots: u64, seed: u64, stream: u64) -> Result<OutcomeSample> {
        if shots == 0 {
            return Err(invalid("shots", "must be > 0"));
        }
        let probs = self.probabilities(phi)?;
        let dist = WeightedIndex::new(&probs)
            .map_err(|e| invalid("phi", format!("outcome distribution unusable: {e}")))?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut counts = vec![0u64; probs.len()];
        for _ in 0..shots {
            counts[dist.sample(&mut rng)] += 1;
        }
        Ok(OutcomeSample { counts })
    }

    fn log_probabilities(&self, phi: f64) -> Result<Vec<f64>> {
        Ok(self.probabilities(phi)?.into_iter().map(f64::ln).collect())
    }
}

/// Outcome multiplicities aligned with [`LikelihoodModel::outcomes`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSample {
    pub counts: Vec<u64>,
}

impl OutcomeSample {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn overflow(&self) -> u64 {
        self.counts.last().copied().unwrap_or(0)
    }

    /// Non-zero `(outcome, count)` pairs.
    pub fn iter<'a>(&'a self, model: &'a LikelihoodModel) -> impl Iterator<Item = (Outcome, u64)> + 'a {
        model
            .outcomes()
            .iter()
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(|(&o, &c)| (o, c))
    }
}

/// Draws `shots` outcomes from stream 0 of `seed`.
pub fn sample_outcomes(
    input: &InterferometerInput,
    phi: f64,
    shots: u64,
    n_res: Resolution,
    seed: u64,
) -> Result<OutcomeSample> {
    LikelihoodModel::new(input, n_res)?.sample(phi, shots, seed, 0)
}

fn log_likelihood(counts: &[u64], ln_p: &[f64]) -> f64 {
    // The overflow term is phase independent and left out.
    let n = counts.len() - 1;
    counts[..n]
        .iter()
        .zip(&ln_p[..n])
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &l)| c as f64 * l)
        .sum()
}

struct LogTable {
    grid: Vec<f64>,
    ln_p: Vec<Vec<f64>>,
}

impl LogTable {
    fn new(model: &LikelihoodModel) -> Result<Self> {
        let grid = linear_grid(SEARCH_INTERVAL.0, SEARCH_INTERVAL.1, MLE_GRID_POINTS);
        let ln_p = grid
            .par_iter()
            .map(|&phi| model.log_probabilities(phi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, ln_p })
    }
}

fn mle_with_table(model: &LikelihoodModel, sample: &OutcomeSample, table: &LogTable) -> Result<f64> {
    if sample.counts.len() != model.outcomes().len() {
        return Err(invalid("sample", "outcome count does not match the model"));
    }
    let values: Vec<f64> = table.ln_p.iter().map(|l| log_likelihood(&sample.counts, l)).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if !max.is_finite() || !(range >= FLAT_TOL) {
        return Err(Error::FlatLikelihood { range });
    }
    let best = values.iter().position(|&v| v == max).unwrap_or(0);
    let lo = table.grid[best.saturating_sub(1)];
    let hi = table.grid[(best + 1).min(table.grid.len() - 1)];
    let (phi, ll) = golden_max(
        |phi| {
            model
                .log_probabilities(phi)
                .map(|l| log_likelihood(&sample.counts, &l))
                .unwrap_or(f64::NEG_INFINITY)
        },
        lo,
        hi,
        MLE_TOL,
    );
    Ok(if ll >= max { phi } else { table.grid[best] })
}

/// Maximum-likelihood phase on [`SEARCH_INTERVAL`].
pub fn mle_phase(model: &LikelihoodModel, sample: &OutcomeSample) -> Result<f64> {
    mle_with_table(model, sample, &LogTable::new(model)?)
}

/// Parameters of a repeated estimation experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrbConfig {
    pub input: InterferometerInput,
    pub true_phase: f64,
    pub shots: u64,
    pub n_res: Resolution,
    pub repeats: usize,
    pub seed: u64,
}

/// Spread of repeated maximum-likelihood estimates against the Cramer-Rao
/// bound `1 / (shots * F)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationRun {
    pub config: CrbConfig,
    /// Per-shot counting Fisher information at the true phase.
    pub fisher_information: f64,
    pub crb_prediction: f64,
    /// One estimate per repeat; `None` where the likelihood was flat.
    pub estimates: Vec<Option<f64>>,
    pub mean_estimate: f64,
    /// Unbiased sample variance of the accepted estimates.
    pub empirical_variance: f64,
    pub mean_squared_error: f64,
    pub variance_ratio: f64,
}

impl EstimationRun {
    pub fn excluded(&self) -> usize {
        self.estimates.iter().filter(|e| e.is_none()).count()
    }
}

pub fn crb_experiment(config: &CrbConfig) -> Result<EstimationRun> {
    if config.repeats < MIN_REPEATS {
        return Err(invalid(
            "repeats",
            format!("{} is below the minimum of {MIN_REPEATS}", config.repeats),
        ));
    }
    let phi = config.true_phase;
    if !(phi > SEARCH_INTERVAL.0 && phi < SEARCH_INTERVAL.1) {
        return Err(invalid(
            "phi",
            format!("{phi} must lie inside ({}, {})", SEARCH_INTERVAL.0, SEARCH_INTERVAL.1),
        ));
    }
    let model = LikelihoodModel::new(&config.input, config.n_res)?;
    let fisher_information = model.fisher_information(phi)?;
    if !(fisher_information > 0.0) {
        return Err(Error::NoInformation(format!(
            "counting Fisher information is zero with n_res = {}",
            config.n_res
        )));
    }
    let crb_prediction = 1.0 / (config.shots as f64 * fisher_information);
    let table = LogTable::new(&model)?;
    let estimates = (0..config.repeats as u64)
        .into_par_iter()
        .map(|stream| {
            let sample = model.sample(phi, config.shots, config.seed, stream)?;
            match mle_with_table(&model, &sample, &table) {
                Ok(e) => Ok(Some(e)),
                Err(Error::FlatLikelihood { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let accepted: Vec<f64> = estimates.iter().flatten().copied().collect();
    if accepted.len() < 2 {
        return Err(Error::NoInformation(format!(
            "only {} of {} repeats gave an estimate",
            accepted.len(),
            config.repeats
        )));
    }
    let n = accepted.len() as f64;
    let mean_estimate = accepted.iter().sum::<f64>() / n;
    let empirical_variance = accepted.iter().map(|e| (e - mean_estimate).powi(2)).sum::<f64>() / (n - 1.0);
    let mean_squared_error = accepted.iter().map(|e| (e - phi).powi(2)).sum::<f64>() / n;
    Ok(EstimationRun {
        config: *config,
        fisher_information,
        crb_prediction,
        estimates,
        mean_estimate,
        empirical_variance,
        mean_squared_error,
        variance_ratio: empirical_variance / crb_prediction,
    })
}

fn check_phase(phi: f64) -> Result<()> {
    if phi.is_finite() {
        Ok(())
    } else {
        Err(invalid("phi", "must be finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input() -> InterferometerInput {
        InterferometerInput::balanced(3.0).unwrap()
    }

    #[test]
    fn probabilities_sum_to_one() {
        let model = LikelihoodModel::new(&input(), Resolution::Finite(8)).unwrap();
        let p = model.probabilities(0.7).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(p.len(), model.outcomes().len());
        assert!(model.overflow_probability() > 0.0);
        assert_eq!(*model.outcomes().last().unwrap(), Outcome::Overflow);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_outcomes(&input(), 0.5, 2000, Resolution::Finite(10), 9).unwrap();
        let b = sample_outcomes(&input(), 0.5, 2000, Resolution::Finite(10), 9).unwrap();
        let c = sample_outcomes(&input(), 0.5, 2000, Resolution::Finite(10), 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.shots(), 2000);
    }

    #[test]
    fn zero_resolution_has_no_information() {
        let cfg = CrbConfig {
            input: input(),
            true_phase: 0.8,
            shots: 100,
            n_res: Resolution::Finite(0),
            repeats: MIN_REPEATS,
            seed: 1,
        };
        assert!(matches!(crb_experiment(&cfg), Err(Error::NoInformation(_))));
        let model = LikelihoodModel::new(&input(), Resolution::Finite(0)).unwrap();
        let s = model.sample(0.8, 50, 1, 0).unwrap();
        assert!(matches!(mle_phase(&model, &s), Err(Error::FlatLikelihood { .. })));
    }

    #[test]
    fn mle_recovers_phase() {
        let model = LikelihoodModel::new(&input(), Resolution::Finite(12)).unwrap();
        let s = model.sample(1.1, 200_000, 3, 0).unwrap();
        let est = mle_phase(&model, &s).unwrap();
        assert!((est - 1.1).abs() < 0.01, "{est}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut cfg = CrbConfig {
            input: input(),
            true_phase: 0.8,
            shots: 100,
            n_res: Resolution::Finite(5),
            repeats: 10,
            seed: 1,
        };
        assert!(crb_experiment(&cfg).is_err());
        cfg.repeats = MIN_REPEATS;
        cfg.true_phase = 0.0;
        assert!(crb_experiment(&cfg).is_err());
    }
}
