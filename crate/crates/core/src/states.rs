//! Fock-basis description of the coherent and squeezed-vacuum inputs and of
//! their post-selected N-photon components.
//!
//! All amplitude products are formed in log space. For the phase-matched
//! input the N-photon amplitudes are real and, once normalised, depend on the
//! input only through the ratio `x = |alpha|^2 / tanh|xi|`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special_fn::log_factorial;

/// Tolerance on `|cos(theta_b - 2 theta_a) - 1|` for phase matching.
pub const PHASE_MATCH_TOL: f64 = 1e-9;

/// Generation probabilities below this are treated as absent components.
pub const NEGLIGIBLE_FLOOR: f64 = 1e-300;

/// Default total tail mass discarded by Fock-space truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// `|alpha> (x) |xi>` with `alpha = alpha_mag e^{i theta_a}` and
/// `xi = xi_mag e^{i theta_b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerInput {
    pub alpha_mag: f64,
    pub theta_a: f64,
    pub xi_mag: f64,
    pub theta_b: f64,
}

impl InterferometerInput {
    pub fn new(alpha_mag: f64, theta_a: f64, xi_mag: f64, theta_b: f64) -> Result<Self> {
        if !(alpha_mag.is_finite() && alpha_mag >= 0.0) {
            return Err(invalid("alpha_mag", format!("{alpha_mag} is not a finite value >= 0")));
        }
        if !(xi_mag.is_finite() && xi_mag >= 0.0) {
            return Err(invalid("xi_mag", format!("{xi_mag} is not a finite value >= 0")));
        }
        if !theta_a.is_finite() {
            return Err(invalid("theta_a", "must be finite"));
        }
        if !theta_b.is_finite() {
            return Err(invalid("theta_b", "must be finite"));
        }
        Ok(Self {
            alpha_mag,
            theta_a,
            xi_mag,
            theta_b,
        })
    }

    /// Real, hence phase-matched, amplitudes `alpha = sqrt(alpha_sq)`, `xi = xi_mag`.
    pub fn real(alpha_sq: f64, xi_mag: f64) -> Result<Self> {
        if !(alpha_sq.is_finite() && alpha_sq >= 0.0) {
            return Err(invalid("alpha_sq", format!("{alpha_sq} is not a finite value >= 0")));
        }
        Self::new(alpha_sq.sqrt(), 0.0, xi_mag, 0.0)
    }

    /// Real input with mean photon number `n_bar` of which `alpha_sq` are coherent.
    pub fn with_split(n_bar: f64, alpha_sq: f64) -> Result<Self> {
        if !(n_bar.is_finite() && n_bar >= 0.0) {
            return Err(invalid("n_bar", format!("{n_bar} is not a finite value >= 0")));
        }
        if !(0.0..=n_bar).contains(&alpha_sq) {
            return Err(invalid("alpha_sq", format!("{alpha_sq} is outside [0, n_bar = {n_bar}]")));
        }
        let n_b = (n_bar - alpha_sq).max(0.0);
        Self::real(alpha_sq, n_b.sqrt().asinh())
    }

    /// `alpha^2 = sinh^2 xi = n_bar / 2`.
    pub fn balanced(n_bar: f64) -> Result<Self> {
        Self::with_split(n_bar, n_bar / 2.0)
    }

    /// Mean coherent photon number `|alpha|^2`.
    pub fn n_a(&self) -> f64 {
        self.alpha_mag * self.alpha_mag
    }

    /// Mean squeezed photon number `sinh^2 |xi|`.
    pub fn n_b(&self) -> f64 {
        let s = self.xi_mag.sinh();
        s * s
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.n_a() + self.n_b()
    }

    pub fn phase_mismatch_cos(&self) -> f64 {
        (self.theta_b - 2.0 * self.theta_a).cos()
    }

    pub fn is_phase_matched(&self) -> bool {
        (self.phase_mismatch_cos() - 1.0).abs() < PHASE_MATCH_TOL
    }

    pub fn require_phase_matched(&self) -> Result<()> {
        if self.is_phase_matched() {
            Ok(())
        } else {
            Err(Error::PhaseMismatch {
                cos: self.phase_mismatch_cos(),
            })
        }
    }

    /// `x = |alpha|^2 / tanh|xi|`; `+inf` for a pure coherent state and `0`
    /// when there is no coherent light.
    pub fn ratio_x(&self) -> f64 {
        let n_a = self.n_a();
        if n_a == 0.0 {
            0.0
        } else if self.xi_mag == 0.0 {
            f64::INFINITY
        } else {
            n_a / self.xi_mag.tanh()
        }
    }
}

/// A truncated Fock-basis amplitude vector together with the probability
/// mass it leaves out.
#[derive(Debug, Clone, PartialEq)]
pub struct FockAmplitudes {
    pub amplitudes: Vec<f64>,
    pub tail_mass: f64,
}

impl FockAmplitudes {
    /// Fails if more than `tol` of the norm lies beyond the truncation.
    pub fn ensure_complete(self, tol: f64) -> Result<Self> {
        if self.tail_mass > tol {
            Err(Error::Truncation {
                n_max: self.amplitudes.len() - 1,
                tail: self.tail_mass,
                tol,
            })
        } else {
            Ok(self)
        }
    }
}

/// `ln c_n^2` for the coherent state with `|alpha|^2 = n_a`.
pub fn ln_coherent_sq(n_a: f64, n: u64) -> f64 {
    if n_a == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -n_a + n as f64 * n_a.ln() - log_factorial(n)
}

/// `ln s_{2k}^2` for the squeezed vacuum with `|xi| = r`.
pub fn ln_squeezed_sq(r: f64, k: u64) -> f64 {
    if r == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let t_half = (r.tanh() / 2.0).ln();
    log_factorial(2 * k) - 2.0 * log_factorial(k) - ln_cosh(r) + 2.0 * k as f64 * t_half
}

pub(crate) fn ln_cosh(r: f64) -> f64 {
    let r = r.abs();
    r + (-2.0 * r).exp().ln_1p() - std::f64::consts::LN_2
}

/// Coherent-state amplitudes `c_0 .. c_{n_max}` with `theta_a = 0`.
pub fn coherent_amplitudes(alpha_mag: f64, n_max: usize) -> Result<FockAmplitudes> {
    if !(alpha_mag.is_finite() && alpha_mag >= 0.0) {
        return Err(invalid("alpha_mag", "must be finite and >= 0"));
    }
    let n_a = alpha_mag * alpha_mag;
    let amplitudes: Vec<f64> = (0..=n_max as u64)
        .map(|n| (0.5 * ln_coherent_sq(n_a, n)).exp())
        .collect();
    let mass: f64 = amplitudes.iter().map(|c| c * c).sum();
    Ok(FockAmplitudes {
        amplitudes,
        tail_mass: (1.0 - mass).max(0.0),
    })
}

/// Squeezed-vacuum amplitudes `s_0 .. s_{n_max}` with `theta_b = 0`.
///
/// Odd entries are exactly zero; `s_{2k}` carries the sign `(-1)^k`.
pub fn squeezed_amplitudes(xi_mag: f64, n_max: usize) -> Result<FockAmplitudes> {
    if !(xi_mag.is_finite() && xi_mag >= 0.0) {
        return Err(invalid("xi_mag", "must be finite and >= 0"));
    }
    let amplitudes: Vec<f64> = (0..=n_max as u64)
        .map(|n| {
            if n % 2 == 1 {
                0.0
            } else {
                let k = n / 2;
                let mag = (0.5 * ln_squeezed_sq(xi_mag, k)).exp();
                if k % 2 == 1 {
                    -mag
                } else {
                    mag
                }
            }
        })
        .collect();
    // The terms past n_max decay at least geometrically with ratio tanh^2|xi|.
    let t2 = xi_mag.tanh().powi(2);
    let last_even = (n_max as u64 / 2 + 1) * 2;
    let tail_mass = if xi_mag == 0.0 {
        0.0
    } else {
        (0.5 * ln_squeezed_sq(xi_mag, last_even / 2)).exp().powi(2) / (1.0 - t2)
    };
    Ok(FockAmplitudes {
        amplitudes,
        tail_mass,
    })
}

/// `ln R_N(x)`, or `-inf` where `R_N(x) = 0`.
///
/// `R_N(x) = sum_k (2k)! / [(N-2k)! (k!)^2] (2x)^{N-2k}`, a sum of non-negative
/// terms combined by log-sum-exp.
pub fn ln_poly_r(n: u32, x: f64) -> f64 {
    if x.is_infinite() {
        return if n == 0 { 0.0 } else { f64::INFINITY };
    }
    let n = u64::from(n);
    let ln_2x = (2.0 * x).ln();
    let terms = (0..=n / 2).map(|k| {
        let m = n - 2 * k;
        let power = if m == 0 { 0.0 } else { m as f64 * ln_2x };
        log_factorial(2 * k) - log_factorial(m) - 2.0 * log_factorial(k) + power
    });
    log_sum_exp(terms)
}

/// `R_N(x)`; overflows to `+inf` for large `N` where [`ln_poly_r`] does not.
pub fn poly_r(n: u32, x: f64) -> f64 {
    ln_poly_r(n, x).exp()
}

pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `ln G_N`.
pub fn ln_generation_probability(input: &InterferometerInput, n: u32) -> f64 {
    let n_a = input.n_a();
    let r = input.xi_mag;
    if r == 0.0 {
        // Poisson limit: no squeezed photons, x would diverge.
        return ln_coherent_sq(n_a, u64::from(n));
    }
    let t = r.tanh();
    -n_a - ln_cosh(r) + f64::from(n) * (t / 2.0).ln() + ln_poly_r(n, n_a / t)
}

/// Probability `G_N` that the input holds exactly `N` photons in total.
pub fn generation_probability(input: &InterferometerInput, n: u32) -> f64 {
    ln_generation_probability(input, n).exp()
}

/// Smallest `N_max` with a certified bound `sum_{N > N_max} G_N <= tol`.
///
/// The coherent tail uses the Chernoff bound `P(n >= A) <= e^{-l} (e l / A)^A`,
/// the squeezed tail the geometric ratio `tanh^2|xi|` of successive even
/// probabilities; each gets half the budget.
pub fn tail_cutoff(input: &InterferometerInput, tol: f64) -> u32 {
    let half = (tol / 2.0).ln();
    let lambda = input.n_a();
    let mut a = 0u64;
    if lambda > 0.0 {
        a = lambda.floor() as u64;
        loop {
            let big_a = (a + 1) as f64;
            let ln_bound = -lambda + big_a * (1.0 + lambda.ln() - big_a.ln());
            if big_a > lambda && ln_bound <= half {
                break;
            }
            a += 1;
        }
    }
    let r = input.xi_mag;
    let mut k = 0u64;
    if r > 0.0 {
        let ln_cosh2 = 2.0 * ln_cosh(r);
        while ln_squeezed_sq(r, k + 1) + ln_cosh2 > half {
            k += 1;
        }
    }
    (a + 2 * k) as u32
}

/// The normalised component `|psi~_N>` of a phase-matched input.
#[derive(Debug, Clone, PartialEq)]
pub struct NPhotonComponent {
    pub n: u32,
    /// Coefficient of `|N-2k, 2k>` for `k = 0 ..= N/2`.
    pub amplitudes: Vec<f64>,
    pub generation_probability: f64,
    pub x: f64,
}

/// Normalised real amplitudes of `|psi~_N>` as a function of `x` alone.
///
/// `x = +inf` is the pure coherent limit (all weight on `k = 0`); at `x = 0`
/// the limit `x -> 0+` is taken, which puts all weight on `k = floor(N/2)`.
pub fn component_amplitudes(n: u32, x: f64) -> Vec<f64> {
    let len = n as usize / 2 + 1;
    let sign = |k: usize| if k % 2 == 1 { -1.0 } else { 1.0 };
    if x.is_infinite() || x == 0.0 {
        let k = if x == 0.0 { len - 1 } else { 0 };
        let mut v = vec![0.0; len];
        v[k] = sign(k);
        return v;
    }
    let n64 = u64::from(n);
    let ln_2x = (2.0 * x).ln();
    let logs: Vec<f64> = (0..len as u64)
        .map(|k| {
            let m = n64 - 2 * k;
            0.5 * log_factorial(2 * k) - log_factorial(k) - 0.5 * log_factorial(m)
                + 0.5 * m as f64 * ln_2x
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut v: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    for (k, a) in v.iter_mut().enumerate() {
        *a *= sign(k) / norm;
    }
    v
}

/// The post-selected N-photon component of a phase-matched input.
pub fn n_photon_component(input: &InterferometerInput, n: u32) -> Result<NPhotonComponent> {
    input.require_phase_matched()?;
    let g = generation_probability(input, n);
    if !(g >= NEGLIGIBLE_FLOOR) {
        return Err(Error::NegligibleComponent { n, g });
    }
    let x = input.ratio_x();
    Ok(NPhotonComponent {
        n,
        amplitudes: component_amplitudes(n, x),
        generation_probability: g,
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_examples() {
        let vac = coherent_amplitudes(0.0, 4).unwrap();
        assert_eq!(vac.amplitudes, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let one = coherent_amplitudes(1.0, 0).unwrap();
        assert!((one.amplitudes[0] - (-0.5f64).exp()).abs() < 1e-15);
        assert!((one.amplitudes[0] - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert!(one.clone().ensure_complete(1e-12).is_err());
        let long = coherent_amplitudes(1.0, 40).unwrap();
        assert!(long.tail_mass < 1e-14);
    }

    #[test]
    fn squeezed_examples() {
        let vac = squeezed_amplitudes(0.0, 6).unwrap();
        assert_eq!(vac.amplitudes, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let s = squeezed_amplitudes(0.5, 4).unwrap();
        assert_eq!(s.amplitudes[1], 0.0);
        assert_eq!(s.amplitudes[3], 0.0);
        // sqrt(2)/sqrt(cosh 0.5) * (-tanh(0.5)/2)
        let want = 2f64.sqrt() / 0.5f64.cosh().sqrt() * (-0.5f64.tanh() / 2.0);
        assert!((s.amplitudes[2] - want).abs() < 1e-15);
        assert!((s.amplitudes[2] + 0.3077).abs() < 5e-5);
        let long = squeezed_amplitudes(1.0, 400).unwrap();
        let mass: f64 = long.amplitudes.iter().map(|a| a * a).sum();
        assert!((mass - 1.0).abs() < 1e-13);
        assert!(long.tail_mass < 1e-12);
    }

    #[test]
    fn poly_r_examples() {
        assert_eq!(poly_r(0, 3.7), 1.0);
        assert_eq!(poly_r(3, 0.0), 0.0);
        assert!((poly_r(2, 1.0) - 4.0).abs() < 1e-14);
        for &x in &[0.0, 0.3, 2.5] {
            assert!((poly_r(2, x) - (2.0 + 2.0 * x * x)).abs() < 1e-13);
        }
        // R_N(0) = N! / ((N/2)!)^2 for even N
        assert!((poly_r(6, 0.0) - 20.0).abs() < 1e-12);
        assert!(ln_poly_r(400, 100.0).is_finite());
    }

    #[test]
    fn generation_probability_limits() {
        let sq = InterferometerInput::real(0.0, 0.8).unwrap();
        assert_eq!(generation_probability(&sq, 1), 0.0);
        assert!((generation_probability(&sq, 0) - 1.0 / 0.8f64.cosh()).abs() < 1e-15);
        let coh = InterferometerInput::real(2.0, 0.0).unwrap();
        for n in 0..20u32 {
            let want = (-2.0f64).exp() * 2f64.powi(n as i32)
                / (1..=n).map(f64::from).product::<f64>();
            assert!((generation_probability(&coh, n) - want).abs() < 1e-15);
        }
        let vac = InterferometerInput::real(0.0, 0.0).unwrap();
        assert_eq!(generation_probability(&vac, 0), 1.0);
        assert_eq!(generation_probability(&vac, 2), 0.0);
    }

    #[test]
    fn generation_probabilities_sum_to_one() {
        for &(a2, r) in &[(1.0, 0.5), (2.5, 1.2), (0.0, 1.0), (5.0, 0.0), (0.2, 0.05)] {
            let input = InterferometerInput::real(a2, r).unwrap();
            let cut = tail_cutoff(&input, 1e-12);
            let sum: f64 = (0..=cut).map(|n| generation_probability(&input, n)).sum();
            assert!((sum - 1.0).abs() < 2e-12, "({a2}, {r}): {sum}");
        }
    }

    #[test]
    fn small_xi_approaches_poisson() {
        let a = InterferometerInput::real(1.5, 1e-9).unwrap();
        let b = InterferometerInput::real(1.5, 0.0).unwrap();
        for n in 0..30 {
            let (ga, gb) = (generation_probability(&a, n), generation_probability(&b, n));
            assert!((ga - gb).abs() < 1e-10);
        }
    }

    #[test]
    fn component_examples() {
        let input = InterferometerInput::real(1.0, 1.0).unwrap();
        let c0 = n_photon_component(&input, 0).unwrap();
        assert_eq!(c0.amplitudes, vec![1.0]);
        // N = 2, x = 1: amplitudes proportional to (c_2 s_0, c_0 s_2)
        let v = component_amplitudes(2, 1.0);
        assert!((v[0] + v[1]).abs() < 1e-15);
        assert!(v[0] > 0.0);
        let mismatched = InterferometerInput::new(1.0, 0.3, 1.0, 0.0).unwrap();
        assert!(matches!(
            n_photon_component(&mismatched, 2),
            Err(Error::PhaseMismatch { .. })
        ));
        let sq = InterferometerInput::real(0.0, 0.5).unwrap();
        assert!(matches!(
            n_photon_component(&sq, 3),
            Err(Error::NegligibleComponent { n: 3, .. })
        ));
    }

    #[test]
    fn phase_matching_accepts_rotated_pairs() {
        let input = InterferometerInput::new(1.0, 0.4, 0.7, 0.8).unwrap();
        assert!(input.is_phase_matched());
        assert!(n_photon_component(&input, 5).is_ok());
        let off = InterferometerInput::new(1.0, 0.4, 0.7, 0.8 + 1e-3).unwrap();
        assert!(!off.is_phase_matched());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(InterferometerInput::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(InterferometerInput::new(1.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(InterferometerInput::with_split(2.0, 3.0).is_err());
    }

    #[test]
    fn balanced_split() {
        let input = InterferometerInput::balanced(5.0).unwrap();
        assert!((input.n_a() - 2.5).abs() < 1e-14);
        assert!((input.n_b() - 2.5).abs() < 1e-13);
        assert!((input.mean_photon_number() - 5.0).abs() < 1e-13);
    }
}
