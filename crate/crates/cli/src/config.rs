use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mzi_fisher::montecarlo::MIN_REPEATS;
use mzi_fisher::special_fn::DEFAULT_MAX_TWO_J;
use mzi_fisher::{Error, InterferometerInput, Resolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// Optimal ratios x_opt, x_FI with the NOON fidelity and F_Q,N / N^2.
    Table1,
    /// Beam-splitter distributions, NOON fidelity and F_Q,N / N^2 against x.
    Fig1,
    /// G_N, F_Q,N, weighted QFI, finite-resolution QFI sweeps and optimal splits.
    Fig2,
    /// Retained QFI fraction against n_res / n_bar with the asymptotic estimate.
    Fig3,
    /// Finite-resolution QFI report for one input.
    Qfi,
    /// Counting distribution and Fisher information of one N-photon component.
    Cfi,
    /// Monte Carlo maximum-likelihood estimation against the Cramer-Rao bound.
    Crb,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Table1 => "table1",
            CommandKind::Fig1 => "fig1",
            CommandKind::Fig2 => "fig2",
            CommandKind::Fig3 => "fig3",
            CommandKind::Qfi => "qfi",
            CommandKind::Cfi => "cfi",
            CommandKind::Crb => "crb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Command parameters; every field is optional and falls back to a
/// per-command default.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
pub struct Params {
    /// Mean photon number |alpha|^2 + sinh^2|xi|.
    #[arg(long, global = true)]
    pub n_bar: Option<f64>,
    /// Coherent photon number |alpha|^2.
    #[arg(long, global = true)]
    pub alpha_sq: Option<f64>,
    /// Squeezing magnitude |xi|.
    #[arg(long, global = true)]
    pub xi: Option<f64>,
    /// Coherent-state phase.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta_a: Option<f64>,
    /// Squeezing phase; defaults to 2 theta_a.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta_b: Option<f64>,
    /// Total photon number N of a component.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Ratio |alpha|^2 / tanh|xi|.
    #[arg(long, global = true)]
    pub x: Option<f64>,
    /// Phase shift in radians.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Total photon-number resolution: an integer or `inf`.
    #[arg(long, global = true, value_parser = parse_resolution)]
    pub n_res: Option<Resolution>,
    /// Shots per estimate.
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    /// Independent estimation repeats.
    #[arg(long, global = true)]
    pub repeats: Option<usize>,
    /// Random seed for the Monte Carlo run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

fn parse_resolution(s: &str) -> Result<Resolution, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: Params,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
}

fn bad(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

fn finite(name: &'static str, v: Option<f64>) -> Result<(), Error> {
    match v {
        Some(v) if !v.is_finite() => Err(bad(name, "must be finite")),
        _ => Ok(()),
    }
}

fn non_negative(name: &'static str, v: Option<f64>) -> Result<(), Error> {
    finite(name, v)?;
    match v {
        Some(v) if v < 0.0 => Err(bad(name, format!("{v} must be >= 0"))),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            CommandKind::Crb => Format::Json,
            _ => Format::Csv,
        })
    }

    /// Range checks on every supplied parameter.
    pub fn validate(&self) -> Result<(), Error> {
        let p = &self.params;
        non_negative("alpha_sq", p.alpha_sq)?;
        non_negative("xi", p.xi)?;
        non_negative("x", p.x)?;
        finite("theta_a", p.theta_a)?;
        finite("theta_b", p.theta_b)?;
        finite("phi", p.phi)?;
        if let Some(n_bar) = p.n_bar {
            if !(n_bar > 0.0 && n_bar.is_finite()) {
                return Err(bad("n_bar", format!("{n_bar} must be finite and > 0")));
            }
            if p.xi.is_some() {
                return Err(bad("n_bar", "give either --n-bar or --xi, not both"));
            }
            if let Some(a2) = p.alpha_sq {
                if a2 > n_bar {
                    return Err(bad("alpha_sq", format!("{a2} exceeds n_bar = {n_bar}")));
                }
            }
        }
        if let Some(n) = p.n {
            if n > DEFAULT_MAX_TWO_J {
                return Err(Error::ResourceGuard {
                    two_j: n,
                    max: DEFAULT_MAX_TWO_J,
                });
            }
        }
        if p.shots == Some(0) {
            return Err(bad("shots", "must be >= 1"));
        }
        if let Some(r) = p.repeats {
            if r < MIN_REPEATS {
                return Err(bad("repeats", format!("{r} is below the minimum of {MIN_REPEATS}")));
            }
        }
        if self.command == CommandKind::Crb && self.format == Some(Format::Csv) {
            return Err(bad("format", "crb writes JSON only"));
        }
        if matches!(self.command, CommandKind::Qfi | CommandKind::Crb) {
            self.input(2.0)?.require_phase_matched()?;
        }
        Ok(())
    }

    /// Input state from `--xi`/`--alpha-sq`, or from `--n-bar` with
    /// `--alpha-sq` defaulting to an even split, or balanced at
    /// `default_n_bar`.
    pub fn input(&self, default_n_bar: f64) -> Result<InterferometerInput, Error> {
        let p = &self.params;
        let theta_a = p.theta_a.unwrap_or(0.0);
        let theta_b = p.theta_b.unwrap_or(2.0 * theta_a);
        let (alpha_sq, xi) = match (p.xi, p.n_bar) {
            (Some(xi), _) => (p.alpha_sq.unwrap_or(0.0), xi),
            (None, n_bar) => {
                let n_bar = n_bar.unwrap_or(default_n_bar);
                let split = InterferometerInput::with_split(n_bar, p.alpha_sq.unwrap_or(n_bar / 2.0))?;
                (split.n_a(), split.xi_mag)
            }
        };
        InterferometerInput::new(alpha_sq.sqrt(), theta_a, xi, theta_b)
    }
}
