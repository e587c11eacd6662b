use std::f64::consts::FRAC_PI_4;

use serde_json::{json, Value};

use mzi_fisher::fisher::{
    component_cfi, finite_resolution_qfi, ideal_qfi, optimize_split,
    output_probabilities_with_derivative, retained_fraction_limit, split_qfi, truncated_qfi,
};
use mzi_fisher::montecarlo::{crb_experiment, CrbConfig};
use mzi_fisher::nphoton::{component_qfi, scan_optimal_ratio, ComponentAnalyzer};
use mzi_fisher::optimize::{linear_grid, log_grid};
use mzi_fisher::{Error, InterferometerInput, Resolution};

use crate::config::{CommandKind, RunConfig};
use crate::output::{Cell, Table};

pub enum Output {
    Tables(Vec<Table>),
    Record(Value),
}

pub fn run(cfg: &RunConfig) -> Result<Output, Error> {
    match cfg.command {
        CommandKind::Table1 => table1(cfg).map(Output::Tables),
        CommandKind::Fig1 => fig1(cfg).map(Output::Tables),
        CommandKind::Fig2 => fig2(cfg).map(Output::Tables),
        CommandKind::Fig3 => fig3(cfg).map(Output::Tables),
        CommandKind::Qfi => qfi(cfg),
        CommandKind::Cfi => cfi(cfg).map(Output::Tables),
        CommandKind::Crb => crb(cfg),
    }
}

fn table1(cfg: &RunConfig) -> Result<Vec<Table>, Error> {
    let ns: Vec<u32> = match cfg.params.n {
        Some(n) => vec![n],
        None => (2..=10).chain([100]).collect(),
    };
    let mut t = Table::new(
        "table1",
        &["N", "x_opt", "x_FI", "fidelity_at_x_opt", "qfi_over_N2_at_x_FI"],
    );
    for n in ns {
        let r = scan_optimal_ratio(n)?;
        t.push(vec![
            n.into(),
            r.x_opt_fidelity.into(),
            r.x_opt_fisher.into(),
            r.fidelity_at_opt.into(),
            r.qfi_ratio().into(),
        ]);
    }
    Ok(vec![t])
}

fn fig1(cfg: &RunConfig) -> Result<Vec<Table>, Error> {
    let p = &cfg.params;
    let n_dist = p.n.unwrap_or(20);
    let analyzer = ComponentAnalyzer::new(n_dist)?;
    let mut dist = Table::new("b_distribution", &["N", "x", "mu", "p"]);
    for i in 0..=100 {
        let x = f64::from(i) / 10.0;
        for (two_mu, prob) in analyzer.distribution(x).iter() {
            dist.push(vec![n_dist.into(), x.into(), (f64::from(two_mu) / 2.0).into(), prob.into()]);
        }
    }

    let ns: Vec<u32> = match p.n {
        Some(n) => vec![n],
        None => vec![2, 3, 4, 5, 6, 10, 20],
    };
    let xs = log_grid(1e-2, 1e2, 81);
    let mut fid = Table::new("c_fidelity", &["N", "x", "fidelity"]);
    let mut qfi = Table::new("d_qfi", &["N", "x", "qfi_over_N2"]);
    for &n in &ns {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "NOON fidelity needs N >= 1".into(),
            });
        }
        let a = ComponentAnalyzer::new(n)?;
        let n2 = f64::from(n).powi(2);
        for &x in &xs {
            fid.push(vec![n.into(), x.into(), a.noon_fidelity(x).into()]);
            qfi.push(vec![n.into(), x.into(), (a.qfi(x) / n2).into()]);
        }
    }

    let scan_ns: Vec<u32> = match p.n {
        Some(n) => vec![n],
        None => (2..=30).collect(),
    };
    let mut opt = Table::new("optimal_ratios", &["N", "x_opt", "x_FI", "half_N"]);
    for n in scan_ns {
        let r = scan_optimal_ratio(n)?;
        opt.push(vec![
            n.into(),
            r.x_opt_fidelity.into(),
            r.x_opt_fisher.into(),
            (f64::from(n) / 2.0).into(),
        ]);
    }
    Ok(vec![dist, fid, qfi, opt])
}

/// The resolutions swept for one `n_bar`: the explicit `--n-res`, or
/// `3 n_bar`, `5 n_bar`, `10 n_bar` and infinite.
fn resolutions(cfg: &RunConfig, n_bar: f64) -> Vec<(String, Resolution)> {
    match cfg.params.n_res {
        Some(r) => vec![(r.to_string(), r)],
        None => [3.0, 5.0, 10.0]
            .iter()
            .map(|m| (format!("{m}n_bar"), Resolution::Finite((m * n_bar).round() as u32)))
            .chain([("inf".to_string(), Resolution::Infinite)])
            .collect(),
    }
}

fn fig2(cfg: &RunConfig) -> Result<Vec<Table>, Error> {
    let p = &cfg.params;
    let n_bar = p.n_bar.unwrap_or(5.0);
    let alpha_sq = match p.alpha_sq {
        Some(a) => a,
        None => optimize_split(n_bar, Resolution::Infinite)?.alpha_sq_opt,
    };
    let input = InterferometerInput::with_split(n_bar, alpha_sq)?;
    let report = finite_resolution_qfi(&input, Resolution::Infinite)?;
    let mut comps = Table::new("a_c_components", &["N", "G_N", "F_QN", "G_N_F_QN"]);
    for t in &report.per_n {
        comps.push(vec![
            t.n.into(),
            t.generation_probability.into(),
            t.qfi.into(),
            t.weighted.into(),
        ]);
    }

    let mut sweep = Table::new("d_qfi_vs_alpha_sq", &["setting", "n_res", "alpha_sq", "qfi"]);
    for (label, r) in resolutions(cfg, n_bar) {
        for a2 in linear_grid(0.0, n_bar, 51) {
            sweep.push(vec![
                label.clone().into(),
                r.to_string().into(),
                a2.into(),
                split_qfi(n_bar, a2, r)?.into(),
            ]);
        }
    }

    let mut best = Table::new(
        "e_f_optimal_split",
        &["setting", "n_bar", "n_res", "alpha_sq_opt_over_n_bar", "qfi_opt", "classical_limit"],
    );
    for i in 2..=20 {
        let nb = f64::from(i) / 2.0;
        for (label, r) in resolutions(cfg, nb) {
            let o = optimize_split(nb, r)?;
            best.push(vec![
                label.into(),
                nb.into(),
                r.to_string().into(),
                (o.alpha_sq_opt / nb).into(),
                o.qfi_opt.into(),
                nb.into(),
            ]);
        }
    }
    Ok(vec![comps, sweep, best])
}

fn fig3(cfg: &RunConfig) -> Result<Vec<Table>, Error> {
    let n_bars = match cfg.params.n_bar {
        Some(v) => vec![v],
        None => vec![2.0, 5.0, 10.0, 20.0],
    };
    let mut t = Table::new(
        "fig3",
        &["n_bar", "n_res", "x", "ratio_balanced", "ratio_optimal_split", "asymptotic"],
    );
    for nb in n_bars {
        let balanced = InterferometerInput::balanced(nb)?;
        let ideal_balanced = ideal_qfi(&balanced);
        let opt = optimize_split(nb, Resolution::Infinite)?;
        let opt_input = InterferometerInput::with_split(nb, opt.alpha_sq_opt)?;
        for n_res in 1..=(8.0 * nb).ceil() as u32 {
            let r = Resolution::Finite(n_res);
            let x = f64::from(n_res) / nb;
            t.push(vec![
                nb.into(),
                n_res.into(),
                x.into(),
                (truncated_qfi(&balanced, r)? / ideal_balanced).into(),
                (truncated_qfi(&opt_input, r)? / opt.qfi_opt).into(),
                retained_fraction_limit(x).ok().into(),
            ]);
        }
    }
    Ok(vec![t])
}

fn qfi(cfg: &RunConfig) -> Result<Output, Error> {
    let input = cfg.input(5.0)?;
    let n_res = cfg.params.n_res.unwrap_or(Resolution::Infinite);
    let report = finite_resolution_qfi(&input, n_res)?;
    if cfg.format() == crate::config::Format::Json {
        return Ok(Output::Record(json!({ "report": report })));
    }
    let mut summary = Table::new("summary", &["quantity", "value"]);
    let rows: [(&str, Cell); 10] = [
        ("alpha_sq", input.n_a().into()),
        ("xi", input.xi_mag.into()),
        ("theta_a", input.theta_a.into()),
        ("theta_b", input.theta_b.into()),
        ("mean_photon_number", report.mean_photon_number.into()),
        ("n_max", report.n_max.into()),
        ("total_qfi", report.total_qfi.into()),
        ("ideal_qfi", report.ideal_qfi_closed_form.into()),
        ("retained_fraction", report.retained_fraction().into()),
        ("lost_qfi_asymptotic", report.lost_qfi_asymptotic.into()),
    ];
    for (k, v) in rows {
        summary.push(vec![k.to_string().into(), v]);
    }
    let mut per_n = Table::new("per_n", &["N", "G_N", "F_QN", "G_N_F_QN", "G_N_F_QN_explicit"]);
    for t in &report.per_n {
        per_n.push(vec![
            t.n.into(),
            t.generation_probability.into(),
            t.qfi.into(),
            t.weighted.into(),
            t.weighted_explicit.into(),
        ]);
    }
    Ok(Output::Tables(vec![summary, per_n]))
}

fn cfi(cfg: &RunConfig) -> Result<Vec<Table>, Error> {
    let p = &cfg.params;
    let n = p.n.unwrap_or(4);
    let x = p.x.unwrap_or(3f64.sqrt());
    let phi = p.phi.unwrap_or(FRAC_PI_4);
    let (probs, dp) = output_probabilities_with_derivative(n, x, phi)?;
    let mut outcomes = Table::new("outcomes", &["mu", "p", "dp_dphi"]);
    for (i, (pr, d)) in probs.iter().zip(&dp).enumerate() {
        let mu = (2.0 * i as f64 - f64::from(n)) / 2.0;
        outcomes.push(vec![mu.into(), (*pr).into(), (*d).into()]);
    }
    let mut summary = Table::new("summary", &["N", "x", "phi", "cfi", "qfi"]);
    summary.push(vec![
        n.into(),
        x.into(),
        phi.into(),
        component_cfi(n, x, phi)?.into(),
        component_qfi(n, x)?.into(),
    ]);
    Ok(vec![summary, outcomes])
}

fn crb(cfg: &RunConfig) -> Result<Output, Error> {
    let p = &cfg.params;
    let config = CrbConfig {
        input: cfg.input(2.0)?,
        true_phase: p.phi.unwrap_or(FRAC_PI_4),
        shots: p.shots.unwrap_or(10_000),
        n_res: p.n_res.unwrap_or(Resolution::Finite(20)),
        repeats: p.repeats.unwrap_or(200),
        seed: p.seed.unwrap_or(42),
    };
    let run = crb_experiment(&config)?;
    Ok(Output::Record(json!({ "run": run })))
}
