//! Classical and quantum Fisher information of a Mach-Zehnder interferometer
//! fed with a coherent state and a squeezed vacuum.
//!
//! The input `|alpha> (x) |xi>` is decomposed into post-selected N-photon
//! components. For each component the library computes the photon-count
//! distribution after the first beam splitter, the NOON-state fidelity and the
//! per-component quantum Fisher information; the classical Fisher information
//! of photon counting is evaluated independently and saturates it under phase
//! matching. Summing the weighted components up to a detector cutoff gives the
//! Fisher information available with finite photon-number resolution.
//!
//! Modules, bottom-up:
//!
//! * [`special_fn`]: log-factorials, Wigner d-matrices, `erf`/`erfc`.
//! * [`states`]: Fock amplitudes, `R_N(x)`, generation probabilities `G_N`.
//! * [`nphoton`]: beam-splitter distribution, NOON fidelity, `F_{Q,N}`, ratio scans.
//! * [`fisher`]: counting statistics, total and finite-resolution QFI, split optimisation.
//! * [`montecarlo`]: seeded sampling, maximum-likelihood phase estimation, Cramer-Rao check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fisher;
pub mod montecarlo;
pub mod nphoton;
pub mod optimize;
pub mod special_fn;
pub mod states;

pub use error::{Error, Result};
pub use fisher::{FisherReport, Resolution};
pub use montecarlo::EstimationRun;
pub use nphoton::{CountDistribution, RatioScanResult};
pub use special_fn::WignerDMatrix;
pub use states::{InterferometerInput, NPhotonComponent};
