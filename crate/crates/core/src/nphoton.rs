//! Observables of a single N-photon component after the first beam splitter:
//! the relative-count distribution `p_mu`, the NOON-state fidelity, the
//! component QFI `F_{Q,N}` and the optimal-ratio scans.
//!
//! Projections `mu` are carried as twice-valued integers so half-integer
//! grids stay exact.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::optimize::{log_grid, scan_and_refine};
use crate::special_fn::{offset, wigner_d, WignerDMatrix};
use crate::states::component_amplitudes;

/// Points in the coarse log-spaced scan over `x`.
pub const RATIO_SCAN_POINTS: usize = 32;
/// Target width of the final golden-section bracket in `x`.
pub const RATIO_TOL: f64 = 1e-5;

/// What a [`CountDistribution`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DistributionContext {
    /// `p_mu` of the component after the first beam splitter.
    BeamSplitter,
    /// `P_N(mu | phi)` at the interferometer output.
    Output { phi: f64 },
    /// Outcome distribution after `exp(-i phi J_eta)`.
    Rotated { phi: f64, eta: f64 },
}

/// A probability vector over `mu = -J, ..., +J`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    pub two_j: u32,
    /// `probs[i]` is the probability of `mu = i - J`.
    pub probs: Vec<f64>,
    pub context: DistributionContext,
}

impl CountDistribution {
    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    /// Probability of the outcome `mu = two_mu / 2`; zero off the grid.
    pub fn prob(&self, two_mu: i32) -> f64 {
        offset(self.two_j, two_mu).map_or(0.0, |i| self.probs[i])
    }

    /// `(2 mu, p_mu)` pairs in ascending `mu`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        let two_j = self.two_j as i32;
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (2 * i as i32 - two_j, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `sum_mu mu p_mu`.
    pub fn mean(&self) -> f64 {
        self.iter().map(|(m, p)| 0.5 * f64::from(m) * p).sum()
    }

    /// `sum_mu mu^2 p_mu`.
    pub fn second_moment(&self) -> f64 {
        self.iter()
            .map(|(m, p)| 0.25 * f64::from(m) * f64::from(m) * p)
            .sum()
    }
}

/// `d^J(pi/2)`, cached per `2J`.
pub(crate) fn beam_splitter_matrix(two_j: u32) -> Result<Arc<WignerDMatrix>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<WignerDMatrix>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(d) = cache.lock().unwrap().get(&two_j) {
        return Ok(Arc::clone(d));
    }
    let d = Arc::new(wigner_d(two_j, FRAC_PI_2)?);
    cache
        .lock()
        .unwrap()
        .entry(two_j)
        .or_insert_with(|| Arc::clone(&d));
    Ok(d)
}

/// Embeds the component amplitudes (index `k`) into the `J_z` basis, where
/// `|N-2k, 2k>` sits at `nu = J - 2k`, i.e. offset `2J - 2k`.
pub(crate) fn embed(n: u32, amplitudes: &[f64]) -> Vec<f64> {
    let dim = n as usize + 1;
    let mut v = vec![0.0; dim];
    for (k, a) in amplitudes.iter().enumerate() {
        v[dim - 1 - 2 * k] = *a;
    }
    v
}

/// `J_y v` in the real representation, returned as `i J_y v`'s real part
/// `(J_+ - J_-) v / 2` (so `|J_y v|^2 = |result|^2`).
pub(crate) fn ladder_jy(two_j: u32, v: &[f64]) -> Vec<f64> {
    let j = f64::from(two_j) / 2.0;
    let jj1 = j * (j + 1.0);
    let dim = v.len();
    let mut out = vec![0.0; dim];
    for (i, &a) in v.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let nu = i as f64 - j;
        if i + 1 < dim {
            out[i + 1] += 0.5 * (jj1 - nu * (nu + 1.0)).sqrt() * a;
        }
        if i > 0 {
            out[i - 1] -= 0.5 * (jj1 - nu * (nu - 1.0)).sqrt() * a;
        }
    }
    out
}

/// Per-N analysis with the beam-splitter matrix held for repeated use across `x`.
#[derive(Debug, Clone)]
pub struct ComponentAnalyzer {
    n: u32,
    bs: Arc<WignerDMatrix>,
}

impl ComponentAnalyzer {
    pub fn new(n: u32) -> Result<Self> {
        Ok(Self {
            n,
            bs: beam_splitter_matrix(n)?,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `p_mu(x)`.
    pub fn distribution(&self, x: f64) -> CountDistribution {
        let a = component_amplitudes(self.n, x);
        let dim = self.bs.dim();
        let probs = (0..dim)
            .map(|row| {
                let amp: f64 = a
                    .iter()
                    .enumerate()
                    .map(|(k, ak)| self.bs.at(row, dim - 1 - 2 * k) * ak.abs())
                    .sum();
                amp * amp
            })
            .collect();
        CountDistribution {
            two_j: self.n,
            probs,
            context: DistributionContext::BeamSplitter,
        }
    }

    /// `2 p_J(x)`.
    pub fn noon_fidelity(&self, x: f64) -> f64 {
        let a = component_amplitudes(self.n, x);
        let dim = self.bs.dim();
        let amp: f64 = a
            .iter()
            .enumerate()
            .map(|(k, ak)| self.bs.at(dim - 1, dim - 1 - 2 * k) * ak.abs())
            .sum();
        2.0 * amp * amp
    }

    /// `4 sum_mu mu^2 p_mu`.
    pub fn qfi(&self, x: f64) -> f64 {
        4.0 * self.distribution(x).second_moment()
    }
}

pub fn beam_splitter_distribution(n: u32, x: f64) -> Result<CountDistribution> {
    check_ratio(x)?;
    Ok(ComponentAnalyzer::new(n)?.distribution(x))
}

/// NOON-state fidelity `2 p_J(x)` of the component after the beam splitter.
pub fn noon_fidelity(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "NOON fidelity needs N >= 1"));
    }
    check_ratio(x)?;
    Ok(ComponentAnalyzer::new(n)?.noon_fidelity(x))
}

/// Component QFI `F_{Q,N} = 4 sum_mu mu^2 p_mu`.
pub fn component_qfi(n: u32, x: f64) -> Result<f64> {
    check_ratio(x)?;
    Ok(ComponentAnalyzer::new(n)?.qfi(x))
}

/// `F_{Q,N} = 4 <psi~_N| J_y^2 |psi~_N>` straight from the Fock amplitudes.
pub fn component_qfi_from_amplitudes(n: u32, x: f64) -> Result<f64> {
    check_ratio(x)?;
    let v = embed(n, &component_amplitudes(n, x));
    Ok(4.0 * ladder_jy(n, &v).iter().map(|w| w * w).sum::<f64>())
}

/// `F_{Q,N}` split into the NOON part, the `|mu| = J - 1` part and the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiDecomposition {
    /// `N^2 F_NOON(x)`
    pub noon_term: f64,
    /// `2 (N-2)^2 p_{J-1}(x)`
    pub next_term: f64,
    pub remainder: f64,
}

impl QfiDecomposition {
    pub fn total(&self) -> f64 {
        self.noon_term + self.next_term + self.remainder
    }
}

pub fn qfi_partial_decomposition(n: u32, x: f64) -> Result<QfiDecomposition> {
    if n < 2 {
        return Err(invalid("n", "decomposition needs N >= 2"));
    }
    check_ratio(x)?;
    let dist = ComponentAnalyzer::new(n)?.distribution(x);
    let two_j = n as i32;
    let nf = f64::from(n);
    let noon_term = nf * nf * 2.0 * dist.prob(two_j);
    let next_term = 2.0 * (nf - 2.0).powi(2) * dist.prob(two_j - 2);
    let qfi = 4.0 * dist.second_moment();
    Ok(QfiDecomposition {
        noon_term,
        next_term,
        remainder: qfi - noon_term - next_term,
    })
}

/// Ratios maximising the NOON fidelity and the component QFI for one `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioScanResult {
    pub n: u32,
    pub x_opt_fidelity: f64,
    pub x_opt_fisher: f64,
    pub fidelity_at_opt: f64,
    pub qfi_at_opt: f64,
}

impl RatioScanResult {
    /// `F_{Q,N} / N^2` at the QFI-optimal ratio.
    pub fn qfi_ratio(&self) -> f64 {
        self.qfi_at_opt / f64::from(self.n).powi(2)
    }
}

/// Maximises the NOON fidelity and `F_{Q,N}` over `x in (0, N]`.
pub fn scan_optimal_ratio(n: u32) -> Result<RatioScanResult> {
    if n < 2 {
        return Err(invalid("n", "ratio scan needs N >= 2"));
    }
    let analyzer = ComponentAnalyzer::new(n)?;
    let nf = f64::from(n);
    let grid = log_grid(nf * 1e-3, nf, RATIO_SCAN_POINTS);
    let (x_opt_fidelity, fidelity_at_opt) =
        scan_and_refine(|x| analyzer.noon_fidelity(x), &grid, RATIO_TOL)?;
    let (x_opt_fisher, qfi_at_opt) = scan_and_refine(|x| analyzer.qfi(x), &grid, RATIO_TOL)?;
    Ok(RatioScanResult {
        n,
        x_opt_fidelity,
        x_opt_fisher,
        fidelity_at_opt,
        qfi_at_opt,
    })
}

fn check_ratio(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(invalid("x", format!("{x} must be >= 0")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_component() {
        let d = beam_splitter_distribution(0, 2.0).unwrap();
        assert_eq!(d.probs, vec![1.0]);
        assert_eq!(component_qfi(0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn two_photon_closed_form() {
        // F_{Q,2}(x) = 2 (x + 1)^2 / (1 + x^2)
        for &x in &[0.0, 0.3, 1.0, 2.7] {
            let want = 2.0 * (x + 1.0) * (x + 1.0) / (1.0 + x * x);
            assert!((component_qfi(2, x).unwrap() - want).abs() < 1e-12);
            assert!((component_qfi_from_amplitudes(2, x).unwrap() - want).abs() < 1e-12);
        }
        assert!((noon_fidelity(2, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((component_qfi(2, 1.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn four_photon_caption_values() {
        let x = 3f64.sqrt();
        // exactly (2 + sqrt 3) / 4
        assert!((noon_fidelity(4, x).unwrap() - (2.0 + x) / 4.0).abs() < 1e-12);
        let dec = qfi_partial_decomposition(4, x).unwrap();
        assert!(dec.next_term.abs() < 1e-9);
        assert!(dec.remainder.abs() < 1e-9);
        assert!((dec.total() - component_qfi(4, x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn decomposition_at_zero_ratio_and_identity() {
        let d = beam_splitter_distribution(6, 0.0).unwrap();
        let dec = qfi_partial_decomposition(6, 0.0).unwrap();
        assert!((dec.noon_term - 36.0 * 2.0 * d.prob(6)).abs() < 1e-14);
        let dec = qfi_partial_decomposition(5, 2.016).unwrap();
        assert!((dec.total() - component_qfi(5, 2.016).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn distribution_symmetric_and_normalised() {
        for n in 1..=30u32 {
            for &x in &[0.0, 0.4, 1.0, 3.0, 17.0] {
                let d = beam_splitter_distribution(n, x).unwrap();
                assert!((d.total() - 1.0).abs() < 1e-10);
                assert!(d.mean().abs() < 1e-10);
                for (m, p) in d.iter() {
                    assert!((p - d.prob(-m)).abs() < 1e-10, "N={n} x={x} 2mu={m}");
                }
            }
        }
    }

    #[test]
    fn noon_requires_photons() {
        assert!(noon_fidelity(0, 1.0).is_err());
        assert!(component_qfi(3, -1.0).is_err());
        assert!(qfi_partial_decomposition(1, 1.0).is_err());
    }

    #[test]
    fn small_n_scans() {
        let r = scan_optimal_ratio(2).unwrap();
        assert!((r.x_opt_fidelity - 1.0).abs() < 1e-3);
        assert!((r.x_opt_fisher - 1.0).abs() < 1e-3);
        assert!((r.fidelity_at_opt - 1.0).abs() < 1e-9);
        let r = scan_optimal_ratio(4).unwrap();
        assert!((r.x_opt_fidelity - 3f64.sqrt()).abs() < 1e-3);
        assert!((r.x_opt_fisher - 3f64.sqrt()).abs() < 1e-3);
    }
}
