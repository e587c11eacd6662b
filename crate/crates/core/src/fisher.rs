//! Fisher information of photon counting at the interferometer output.
//!
//! The total QFI of a phase-matched input is the `G_N`-weighted sum of the
//! component values `F_{Q,N}`. A detector pair that resolves at most `n_res`
//! photons in total only sees the terms with `N <= n_res`. Each weighted term
//! is evaluated twice: once as `G_N * F_{Q,N}` with `F_{Q,N}` from the
//! beam-splitter distribution, and once from the explicit Fock double sum
//! `sum_k [N + 4k(N-2k) + 4k x] (c_{N-2k} s_{2k})^2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::nphoton::{embed, ladder_jy, ComponentAnalyzer, CountDistribution, DistributionContext};
use crate::optimize::{linear_grid, scan_and_refine};
use crate::special_fn::{erf_pair, wigner_d};
use crate::states::{
    component_amplitudes, generation_probability, ln_coherent_sq, ln_squeezed_sq, tail_cutoff,
    InterferometerInput, DEFAULT_TAIL_TOL, NEGLIGIBLE_FLOOR,
};

/// Relative agreement demanded between the two per-N evaluation routes.
pub const CROSS_CHECK_TOL: f64 = 1e-9;
/// Below this probability `(dP)^2 / P` is replaced by its limit `4 psi'^2`.
pub const CFI_PROBABILITY_FLOOR: f64 = 1e-14;
/// Points in the coarse pre-scan over `alpha^2`.
pub const SPLIT_SCAN_POINTS: usize = 65;
pub const SPLIT_TOL: f64 = 1e-4;

/// Total-photon-number resolution of the detector pair.
///
/// `Finite(n)` keeps the events with `N = N_1 + N_2 <= n`. `Infinite` keeps
/// all events; sums are then cut where the certified tail weight drops
/// below [`DEFAULT_TAIL_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resolution {
    Finite(u32),
    Infinite,
}

impl Resolution {
    /// Largest `N` actually summed for `input`.
    pub fn cutoff(self, input: &InterferometerInput) -> u32 {
        let tail = tail_cutoff(input, DEFAULT_TAIL_TOL);
        match self {
            Resolution::Finite(n) => n.min(tail),
            Resolution::Infinite => tail,
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Finite(n) => write!(f, "{n}"),
            Resolution::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Resolution::Infinite);
        }
        s.parse()
            .map(Resolution::Finite)
            .map_err(|_| invalid("n_res", format!("`{s}` is neither a non-negative integer nor `inf`")))
    }
}

fn real_output_amplitudes(n: u32, x: f64, phi: f64) -> Result<Vec<f64>> {
    let d = wigner_d(n, phi)?;
    Ok(d.apply(&embed(n, &component_amplitudes(n, x))))
}

/// `P_N(mu | phi) = <J,mu| exp(-i phi J_y) |psi~_N>^2`.
pub fn conditional_probabilities(n: u32, x: f64, phi: f64) -> Result<CountDistribution> {
    check_ratio(x)?;
    let psi = real_output_amplitudes(n, x, phi)?;
    Ok(CountDistribution {
        two_j: n,
        probs: psi.iter().map(|a| a * a).collect(),
        context: DistributionContext::Output { phi },
    })
}

/// Outcome distribution after `exp(-i phi J_eta)` with
/// `J_eta = J_x cos(eta) + J_y sin(eta)`.
///
/// The amplitude of `|J,mu>` is, up to a `mu`-dependent phase,
/// `sum_k e^{-2ik eta} |a_k| d_{mu,J-2k}(phi)`. `eta = pi/2` reproduces
/// [`conditional_probabilities`]; `eta = 0, phi = pi/2` is the first beam
/// splitter.
pub fn rotated_distribution(n: u32, x: f64, phi: f64, eta: f64) -> Result<CountDistribution> {
    check_ratio(x)?;
    if !eta.is_finite() {
        return Err(invalid("eta", "must be finite"));
    }
    let d = wigner_d(n, phi)?;
    let a = component_amplitudes(n, x);
    let dim = d.dim();
    let probs = (0..dim)
        .map(|row| {
            a.iter()
                .enumerate()
                .map(|(k, ak)| {
                    Complex64::from_polar(ak.abs() * d.at(row, dim - 1 - 2 * k), -2.0 * k as f64 * eta)
                })
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect();
    Ok(CountDistribution {
        two_j: n,
        probs,
        context: DistributionContext::Rotated { phi, eta },
    })
}

/// `P_N(mu|phi)` and its analytic derivative, in ascending `mu`.
///
/// `dP/dphi = 2 psi_mu (d psi/d phi)_mu` with `d psi / d phi = -i J_y psi`,
/// which is real and tridiagonal in the `J_z` basis.
pub fn output_probabilities_with_derivative(n: u32, x: f64, phi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_ratio(x)?;
    let psi = real_output_amplitudes(n, x, phi)?;
    let dpsi: Vec<f64> = ladder_jy(n, &psi).into_iter().map(|w| -w).collect();
    let p = psi.iter().map(|a| a * a).collect();
    let dp = psi.iter().zip(&dpsi).map(|(a, b)| 2.0 * a * b).collect();
    Ok((p, dp))
}

/// Classical Fisher information `F_N(phi) = sum_mu (dP/dphi)^2 / P` of photon
/// counting on the N-photon component.
pub fn component_cfi(n: u32, x: f64, phi: f64) -> Result<f64> {
    check_ratio(x)?;
    let psi = real_output_amplitudes(n, x, phi)?;
    let dpsi = ladder_jy(n, &psi);
    let mut total = 0.0;
    for (i, (&a, &w)) in psi.iter().zip(&dpsi).enumerate() {
        let p = a * a;
        let dp = -2.0 * a * w;
        let term = if p < CFI_PROBABILITY_FLOOR {
            // (2 psi psi')^2 / psi^2 = 4 psi'^2, which stays finite where psi
            // crosses zero even though P and dP both vanish.
            4.0 * w * w
        } else {
            dp * dp / p
        };
        if !term.is_finite() {
            return Err(Error::InconsistentDerivative {
                two_mu: 2 * i as i32 - n as i32,
                p,
                dp,
            });
        }
        total += term;
    }
    Ok(total)
}

/// Total counting CFI `sum_{N <= n_res} G_N F_N(phi)` of a phase-matched input.
pub fn total_cfi(input: &InterferometerInput, phi: f64, n_res: Resolution) -> Result<f64> {
    input.require_phase_matched()?;
    let x = input.ratio_x();
    let top = n_res.cutoff(input);
    let terms: Vec<Result<f64>> = (0..=top)
        .into_par_iter()
        .map(|n| {
            let g = generation_probability(input, n);
            if g < NEGLIGIBLE_FLOOR {
                return Ok(0.0);
            }
            Ok(g * component_cfi(n, x, phi)?)
        })
        .collect();
    terms.into_iter().sum()
}

/// Ideal QFI `n_a [1 + 2 n_b + 2 sqrt(n_b (1 + n_b)) cos(theta_b - 2 theta_a)] + n_b`
/// for arbitrary input phases.
pub fn ideal_qfi(input: &InterferometerInput) -> f64 {
    let (n_a, n_b) = (input.n_a(), input.n_b());
    n_a * (1.0 + 2.0 * n_b + 2.0 * (n_b * (1.0 + n_b)).sqrt() * input.phase_mismatch_cos()) + n_b
}

/// Phase-matched ideal QFI `|alpha|^2 e^{2|xi|} + sinh^2|xi|`.
pub fn ideal_qfi_phase_matched(input: &InterferometerInput) -> f64 {
    input.n_a() * (2.0 * input.xi_mag).exp() + input.n_b()
}

/// `G_N F_{Q,N}` from the explicit Fock double sum.
pub fn weighted_component_qfi(input: &InterferometerInput, n: u32) -> f64 {
    let n_a = input.n_a();
    let r = input.xi_mag;
    let nf = f64::from(n);
    let n64 = u64::from(n);
    if r == 0.0 {
        // No squeezed photons: only k = 0 survives.
        return nf * ln_coherent_sq(n_a, n64).exp();
    }
    let x = n_a / r.tanh();
    (0..=n64 / 2)
        .map(|k| {
            let w = (ln_coherent_sq(n_a, n64 - 2 * k) + ln_squeezed_sq(r, k)).exp();
            if w == 0.0 {
                return 0.0;
            }
            let kf = k as f64;
            (nf + 4.0 * kf * (nf - 2.0 * kf) + 4.0 * kf * x) * w
        })
        .sum()
}

/// Finite-resolution QFI from the explicit double sum alone.
pub fn truncated_qfi(input: &InterferometerInput, n_res: Resolution) -> Result<f64> {
    input.require_phase_matched()?;
    let top = n_res.cutoff(input);
    Ok((0..=top).map(|n| weighted_component_qfi(input, n)).sum())
}

/// One row of a [`FisherReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentTerm {
    pub n: u32,
    pub generation_probability: f64,
    /// `F_{Q,N}`; zero for negligible components.
    pub qfi: f64,
    /// `G_N F_{Q,N}`.
    pub weighted: f64,
    /// The same weighted term from the explicit Fock double sum.
    pub weighted_explicit: f64,
}

/// Finite-resolution Fisher information of one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    pub input: InterferometerInput,
    /// Resolution bounds the total detected photon number `N = N_1 + N_2`.
    pub n_res: Resolution,
    /// Largest `N` included in the sums.
    pub n_max: u32,
    pub per_n: Vec<ComponentTerm>,
    pub total_qfi: f64,
    pub ideal_qfi_closed_form: f64,
    pub lost_qfi_asymptotic: Option<f64>,
    pub mean_photon_number: f64,
}

impl FisherReport {
    pub fn retained_fraction(&self) -> f64 {
        self.total_qfi / self.ideal_qfi_closed_form
    }
}

/// Total QFI (equal to the counting CFI under phase matching) for detectors
/// resolving at most `n_res` photons.
pub fn finite_resolution_qfi(input: &InterferometerInput, n_res: Resolution) -> Result<FisherReport> {
    input.require_phase_matched()?;
    let x = input.ratio_x();
    let n_max = n_res.cutoff(input);
    let rows: Vec<Result<ComponentTerm>> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let g = generation_probability(input, n);
            let explicit = weighted_component_qfi(input, n);
            let (qfi, weighted) = if g >= NEGLIGIBLE_FLOOR {
                let q = ComponentAnalyzer::new(n)?.qfi(x);
                (q, g * q)
            } else {
                (0.0, 0.0)
            };
            let scale = weighted.abs().max(explicit.abs());
            if (weighted - explicit).abs() > CROSS_CHECK_TOL * scale + 1e-280 {
                return Err(Error::CrossCheck {
                    what: "weighted component QFI",
                    a: weighted,
                    b: explicit,
                });
            }
            Ok(ComponentTerm {
                n,
                generation_probability: g,
                qfi,
                weighted,
                weighted_explicit: explicit,
            })
        })
        .collect();
    let per_n = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let total_qfi = per_n.iter().map(|t| t.weighted).sum();
    let lost_qfi_asymptotic = match n_res {
        Resolution::Finite(n) if f64::from(n) > input.n_a() && input.n_b() > 0.0 => {
            lost_qfi(n, input.n_a(), input.n_b()).ok()
        }
        _ => None,
    };
    Ok(FisherReport {
        input: *input,
        n_res,
        n_max,
        per_n,
        total_qfi,
        ideal_qfi_closed_form: ideal_qfi(input),
        lost_qfi_asymptotic,
        mean_photon_number: input.mean_photon_number(),
    })
}

/// How the mean photon number is split between the two inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Split {
    /// `n_a = n_b = n_bar / 2` in the large-`n_bar` limit.
    Balanced,
    Explicit { n_a: f64, n_b: f64 },
}

/// Estimated QFI lost to a finite resolution and the fraction kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LostQfi {
    pub lost: f64,
    pub retained_fraction: f64,
}

/// Asymptotic estimate of the QFI lost above `n_res`.
///
/// `Explicit` evaluates the general erfc form with
/// `B = n_b ln((1 + n_b) / n_b)`. `Balanced` uses its `n_bar -> inf` limit,
/// `F/F_opt = erf(sqrt(x - 1/2)) - 2 e^{-(x - 1/2)} sqrt(x - 1/2) / sqrt(pi)`
/// with `x = n_res / n_bar`, defined only for `x > 1/2`.
pub fn lost_qfi_asymptotic(n_res: u32, n_bar: f64, split: Split) -> Result<LostQfi> {
    match split {
        Split::Balanced => {
            if !(n_bar > 0.0) {
                return Err(invalid("n_bar", "must be > 0"));
            }
            let x = f64::from(n_res) / n_bar;
            let retained = retained_fraction_limit(x)?;
            Ok(LostQfi {
                lost: n_bar * n_bar * (1.0 - retained),
                retained_fraction: retained,
            })
        }
        Split::Explicit { n_a, n_b } => {
            let lost = lost_qfi(n_res, n_a, n_b)?;
            let ideal = n_a * (1.0 + 2.0 * n_b + 2.0 * (n_b * (1.0 + n_b)).sqrt()) + n_b;
            Ok(LostQfi {
                lost,
                retained_fraction: 1.0 - lost / ideal,
            })
        }
    }
}

/// Balanced large-`n_bar` limit of the retained fraction at `x = n_res / n_bar`.
pub fn retained_fraction_limit(x: f64) -> Result<f64> {
    if !(x > 0.5) {
        return Err(invalid("x", format!("n_res / n_bar = {x} must exceed 1/2")));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let y = x - 0.5;
    let (erf, _) = erf_pair(y.sqrt());
    Ok(erf - 2.0 * (-y).exp() * y.sqrt() / PI.sqrt())
}

/// General erfc-form estimate of the lost QFI for `n_res > n_a`.
pub fn lost_qfi(n_res: u32, n_a: f64, n_b: f64) -> Result<f64> {
    if !(n_a >= 0.0 && n_b > 0.0 && n_a.is_finite() && n_b.is_finite()) {
        return Err(invalid("n_b", "need n_a >= 0 and n_b > 0"));
    }
    let n_res = f64::from(n_res);
    if !(n_res > n_a) {
        return Err(invalid("n_res", format!("{n_res} must exceed n_a = {n_a}")));
    }
    let b = n_b * ((1.0 + n_b) / n_b).ln();
    let y = (n_res - n_a) * b / (2.0 * n_b);
    let (_, erfc) = erf_pair(y.sqrt());
    let bracket = erfc + 2.0 / PI.sqrt() * (-y).exp() * y.sqrt();
    Ok(2.0 * n_a * n_b / b.powf(1.5) * (1.0 + (-b / (2.0 * n_b)).exp()) * bracket)
}

/// Optimal coherent share of a fixed photon budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitOptimum {
    pub n_bar: f64,
    pub n_res: Resolution,
    pub alpha_sq_opt: f64,
    pub qfi_opt: f64,
}

/// Total QFI at `alpha^2` with `sinh^2 xi = n_bar - alpha^2`; the closed form
/// when the resolution is infinite.
pub fn split_qfi(n_bar: f64, alpha_sq: f64, n_res: Resolution) -> Result<f64> {
    let input = InterferometerInput::with_split(n_bar, alpha_sq)?;
    match n_res {
        Resolution::Infinite => Ok(ideal_qfi_phase_matched(&input)),
        Resolution::Finite(_) => truncated_qfi(&input, n_res),
    }
}

/// Maximises the total QFI over `alpha^2 in [0, n_bar]`.
pub fn optimize_split(n_bar: f64, n_res: Resolution) -> Result<SplitOptimum> {
    if !(n_bar > 0.0 && n_bar.is_finite()) {
        return Err(invalid("n_bar", format!("{n_bar} must be finite and > 0")));
    }
    let grid = linear_grid(0.0, n_bar, SPLIT_SCAN_POINTS);
    let objective = |a2: f64| split_qfi(n_bar, a2.clamp(0.0, n_bar), n_res).unwrap_or(f64::NAN);
    let (alpha_sq_opt, qfi_opt) = scan_and_refine(objective, &grid, SPLIT_TOL)?;
    if !qfi_opt.is_finite() {
        return Err(Error::NoInformation(format!("QFI not finite at n_bar = {n_bar}")));
    }
    Ok(SplitOptimum {
        n_bar,
        n_res,
        alpha_sq_opt,
        qfi_opt,
    })
}

fn check_ratio(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(invalid("x", format!("{x} must be >= 0")))
    }
}
