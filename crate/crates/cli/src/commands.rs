//! Command implementations. Exit code 0 on success, 2 when a premise or
//! bound check failed (outputs still written), 1 on errors.

use serde::Serialize;
use serde_json::json;
use std::path::Path;

use wfi_core::capacity::{beta_from_capacity, check_necessary, default_tail_grid};
use wfi_core::decay::{iterated_decay_curve, lo_decay_curve, xi_from_beta, BoundCurve};
use wfi_core::hardy::{fit_rate_exponents, hardy_bounds};
use wfi_core::measure::Measure1D;
use wfi_core::rate::{
    detect_poincare, gbi_to_wlsi, perturb_bounded, tensorize, tensorize_gbi, wlsi_to_gbi,
    wlsi_to_spi, wlsi_to_swlsi, wlsi_to_wpi, wpi_to_wlsi, Certificate, ConstantsPolicy,
    InequalityKind,
};
use wfi_core::semigroup::{
    euler_maruyama, evolve, overlay_bounds, InitialDensity, OverlaidCurve, Scheme, SolverConfig,
};
use wfi_core::verify::{check_wlsi, empirical_beta, generate_family, probe_entropy_osc_ratio};

use crate::config::*;
use crate::manifest::{OutputDir, RunManifest};
use crate::CliError;

pub struct RunContext<'a> {
    pub config_path: &'a Path,
    pub out_dir: &'a Path,
    pub seed: u64,
    pub policy: ConstantsPolicy,
}

fn load<T: serde::de::DeserializeOwned>(ctx: &RunContext) -> Result<(T, Vec<u8>), CliError> {
    let bytes = std::fs::read(ctx.config_path).map_err(|e| {
        CliError::Config(format!("cannot read {}: {e}", ctx.config_path.display()))
    })?;
    let cfg = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("{}: {e}", ctx.config_path.display())))?;
    Ok((cfg, bytes))
}

fn outputs(ctx: &RunContext, command: &str, bytes: &[u8]) -> Result<OutputDir, CliError> {
    let manifest = RunManifest::new(command, bytes, ctx.policy.clone(), ctx.seed);
    OutputDir::new(ctx.out_dir, manifest)
}

pub fn cmd_measure(ctx: &RunContext) -> Result<i32, CliError> {
    let (cfg, bytes) = load::<MeasureCmdConfig>(ctx)?;
    let mu = cfg.measure.build()?;
    let mut out = outputs(ctx, "measure", &bytes)?;
    let (lo, hi) = mu.domain();
    out.write_json(
        "measure.json",
        &json!({
            "z": mu.z(),
            "median": mu.median(),
            "domain": [lo, hi],
            "cells": mu.n_cells(),
            "mass_deficit": mu.mass_deficit(),
            "is_probability": mu.is_probability(),
        }),
    )?;
    let nodes = mu.nodes().to_vec();
    out.write_csv(
        "cdf.csv",
        "x,cdf",
        nodes.iter().map(|&x| format!("{x},{}", mu.cdf(x))),
    )?;
    out.finalize()?;
    Ok(0)
}

pub fn cmd_capacity(ctx: &RunContext) -> Result<i32, CliError> {
    let (cfg, bytes) = load::<CapacityCmdConfig>(ctx)?;
    let mu = cfg.measure.build()?;
    let scan = cfg.scan.unwrap_or_default();
    let grid = default_tail_grid(&mu, scan.per_side, scan.mass_lo)?;
    let beta = match &cfg.beta {
        Some(rc) => rc.build()?,
        None => {
            let raw = beta_from_capacity(&mu, &grid)?;
            let hb = hardy_bounds(&mu, &raw, &grid)?;
            raw.scaled(hb.upper())
        }
    };
    let report = check_necessary(&mu, &beta, &grid)?;
    let mut out = outputs(ctx, "capacity", &bytes)?;
    out.write_csv(
        "profile.csv",
        "x,mass,cap,s_star,lhs,ratio",
        report.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.x, r.mass, r.cap, r.s_star, r.lhs, r.ratio
            )
        }),
    )?;
    out.write_json(
        "capacity.json",
        &json!({
            "worst_ratio": report.worst_ratio,
            "violations": report.violations.len(),
        }),
    )?;
    out.finalize()?;
    Ok(if report.violations.is_empty() { 0 } else { 2 })
}

#[derive(Serialize)]
struct BetaReport {
    b_plus: f64,
    x_at_b_plus: f64,
    b_minus: f64,
    x_at_b_minus: f64,
    big_b_plus: f64,
    x_at_big_b_plus: f64,
    big_b_minus: f64,
    x_at_big_b_minus: f64,
    lower: f64,
    upper: f64,
    divergent: Vec<&'static str>,
    fit: serde_json::Value,
    poincare: bool,
    summary: String,
}

pub fn cmd_beta(ctx: &RunContext) -> Result<i32, CliError> {
    let (cfg, bytes) = load::<BetaCmdConfig>(ctx)?;
    let mu = cfg.measure.build()?;
    let scan = cfg.scan.unwrap_or_default();
    let grid = default_tail_grid(&mu, scan.per_side, scan.mass_lo)?;
    let beta = beta_from_capacity(&mu, &grid)?;
    let hb = hardy_bounds(&mu, &beta, &grid)?;
    let fit = fit_rate_exponents(&beta)?;
    let poincare = detect_poincare(&beta).map(|d| d.poincare).unwrap_or(false);

    // bounded ⇔ spread ≤ 3 over s ∈ [1e-6, 1e-1]
    let vals: Vec<f64> = beta
        .sample_log(1e-6, 1e-1, 64)
        .into_iter()
        .map(|(_, b)| b)
        .collect();
    let spread = vals.iter().cloned().fold(0.0_f64, f64::max)
        / vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let summary = if spread <= 3.0 {
        "bounded β (LSI regime)".to_string()
    } else if poincare {
        format!("log-type β (Poincaré regime), exponents p={:.3} q={:.3}", fit.power, fit.log_exp)
    } else {
        format!("weak regime, exponents p={:.3} q={:.3}", fit.power, fit.log_exp)
    };

    let mut out = outputs(ctx, "beta", &bytes)?;
    let table = beta.table_points().unwrap_or_default();
    out.write_csv(
        "beta.csv",
        "s,beta",
        table.iter().map(|(s, b)| format!("{s},{b}")),
    )?;
    out.write_json(
        "hardy.json",
        &BetaReport {
            b_plus: hb.b_plus.value,
            x_at_b_plus: hb.b_plus.x_at,
            b_minus: hb.b_minus.value,
            x_at_b_minus: hb.b_minus.x_at,
            big_b_plus: hb.big_b_plus.value,
            x_at_big_b_plus: hb.big_b_plus.x_at,
            big_b_minus: hb.big_b_minus.value,
            x_at_big_b_minus: hb.big_b_minus.x_at,
            lower: hb.lower(),
            upper: hb.upper(),
            divergent: hb.divergent_names(),
            fit: json!({"p": fit.power, "q": fit.log_exp, "coeff": fit.coeff, "residual_rms": fit.residual_rms}),
            poincare,
            summary,
        },
    )?;
    out.finalize()?;
    Ok(0)
}

pub fn cmd_convert(ctx: &RunContext) -> Result<i32, CliError> {
    let (cfg, bytes) = load::<ConvertCmdConfig>(ctx)?;
    let rate = cfg.rate.build()?;
    let kind = match cfg.kind.as_str() {
        "wlsi" => InequalityKind::Wlsi,
        "wpi" => InequalityKind::Wpi,
        "spi" => InequalityKind::Spi,
        "gbi" => InequalityKind::Gbi,
        other => return Err(CliError::Config(format!("unknown certificate kind {other:?}"))),
    };
    let cert = Certificate::new(kind, rate, "input");
    let policy = &ctx.policy;
    let mut warnings: Vec<String> = Vec::new();

    let constants = |names: &[(&str, f64)]| {
        names
            .iter()
            .map(|(n, v)| (n.to_string(), *v))
            .collect::<Vec<_>>()
    };
    let derived = match cfg.target.as_str() {
        "wpi" => cert.derived(InequalityKind::Wpi, wlsi_to_wpi(&cert.rate), "wlsi_to_wpi", vec![]),
        "wlsi_from_wpi" => cert.derived(
            InequalityKind::Wlsi,
            wpi_to_wlsi(&cert.rate, policy),
            "wpi_to_wlsi",
            constants(&[("c", policy.c), ("c_prime", policy.c_prime), ("s0", policy.s0)]),
        ),
        "spi" => {
            let conv = wlsi_to_spi(&cert.rate);
            warnings.extend(conv.warnings);
            cert.derived(InequalityKind::Spi, conv.rate, "wlsi_to_spi", vec![])
        }
        "gbi" => {
            let conv = wlsi_to_gbi(&cert.rate);
            warnings.extend(conv.warnings);
            cert.derived(InequalityKind::Gbi, conv.rate, "wlsi_to_gbi", vec![])
        }
        "wlsi_from_gbi" => cert.derived(
            InequalityKind::Wlsi,
            gbi_to_wlsi(&cert.rate, policy)?,
            "gbi_to_wlsi",
            constants(&[("C", policy.gbi_c), ("C_prime", policy.gbi_c_prime)]),
        ),
        "swlsi" => cert.derived(
            InequalityKind::Rlsi,
            wlsi_to_swlsi(&cert.rate, policy),
            "wlsi_to_swlsi",
            constants(&[("kappa", policy.kappa)]),
        ),
        "tensorize" => {
            let n = cfg.n.unwrap_or(1);
            cert.derived(
                cert.kind,
                tensorize(&cert.rate, n),
                "tensorize",
                constants(&[("n", n as f64)]),
            )
        }
        "tensorize_gbi" => {
            let n = cfg.n.unwrap_or(1);
            cert.derived(
                cert.kind,
                tensorize_gbi(&cert.rate, n, policy)?,
                "tensorize_gbi",
                constants(&[
                    ("n", n as f64),
                    ("C", policy.gbi_c),
                    ("C_prime", policy.gbi_c_prime),
                ]),
            )
        }
        "perturb" => {
            let osc = cfg
                .osc_v
                .ok_or_else(|| CliError::Config("target perturb requires osc_v".into()))?;
            perturb_bounded(&cert, osc)?
        }
        other => return Err(CliError::Config(format!("unknown target {other:?}"))),
    };

    let mut out = outputs(ctx, "convert", &bytes)?;
    let export = cfg.export.unwrap_or(ExportRange {
        lo: 1e-8,
        hi: 0.1,
        n: 200,
    });
    out.write_csv(
        "rate.csv",
        "s,beta",
        derived
            .rate
            .sample_log(export.lo, export.hi, export.n)
            .iter()
            .map(|(s, b)| format!("{s},{b}")),
    )?;
    out.write_json(
        "certificate.json",
        &json!({
            "kind": derived.kind.name(),
            "rate": derived.rate.descriptor(),
            "provenance": derived.provenance,
            "warnings": warnings,
        }),
    )?;
    out.finalize()?;
    Ok(if warnings.is_empty() { 0 } else { 2 })
}

pub fn cmd_verify(ctx: &RunContext) -> Result<i32, CliError> {
    let (cfg, bytes) = load::<VerifyCmdConfig>(ctx)?;
    let mu = cfg.measure.build()?;
    let mut beta = cfg.beta.build()?;
    if let Some(scale) = cfg.beta_scale {
        beta = beta.scaled(scale);
    }
    let family = generate_family(&mu, &cfg.family)?;
    let s_grid: Vec<f64> = wfi_core::log_spaced(cfg.s_grid.lo, cfg.s_grid.hi, cfg.s_grid.n);

    let eb = empirical_beta(&mu, &family, &s_grid)?;
    let mut failures = Vec::new();
    for m in &family {
        let r = check_wlsi(&mu, &m.f, &beta, &s_grid)?;
        if !r.holds {
            failures.push(json!({"id": m.id, "worst_margin": r.worst_margin, "worst_s": r.worst_s}));
        }
    }
    let ratio = probe_entropy_osc_ratio(&mu, &family)?;

    let mut out = outputs(ctx, "verify", &bytes)?;
    out.write_csv(
        "verify.csv",
        "s,beta_emp,worst_f_id",
        eb.rows
            .iter()
            .map(|r| format!("{},{},{}", r.s, r.beta_emp, r.worst_f)),
    )?;
    let n_failures = failures.len();
    out.write_json(
        "margins.json",
        &json!({
            "family_size": family.len(),
            "failures": failures,
            "entropy_osc_ratio_sup": ratio,
        }),
    )?;
    out.finalize()?;
    Ok(if n_failures == 0 { 0 } else { 2 })
}

fn initial_density(mu: &Measure1D, cfg: &InitialConfig) -> Result<InitialDensity, CliError> {
    Ok(match cfg {
        InitialConfig::Dirac { x, width } => InitialDensity::DiracAt {
            x: *x,
            width: *width,
        },
        InitialConfig::TwoLevel {
            low,
            high,
            split_mass,
        } => {
            let split = mu.quantile_mass(*split_mass)?;
            let (lo, hi) = (*low, *high);
            InitialDensity::Grid(mu.grid_function(|x| if x >= split { hi } else { lo }))
        }
        InitialConfig::ExpLaw { lambda } => {
            let l = *lambda;
            InitialDensity::Grid(mu.grid_function(|x| 0.5 * l * (-l * x.abs()).exp() / mu.rho(x)))
        }
    })
}

pub fn cmd_simulate(ctx: &RunContext) -> Result<i32, CliError> {
    let (cfg, bytes) = load::<SimulateCmdConfig>(ctx)?;
    let mu = cfg.measure.build()?;
    let initial = initial_density(&mu, &cfg.initial)?;
    let mut solver = SolverConfig::new(mu.clone(), initial, cfg.t_end);
    solver.dt = cfg.dt;
    solver.scheme = cfg.scheme.unwrap_or(Scheme::Explicit);
    solver.n_samples = cfg.n_samples;
    let trace = evolve(&solver)?;

    let mut out = outputs(ctx, "simulate", &bytes)?;
    out.write_csv(
        "trace.csv",
        "t,entropy,variance,tv,fisher",
        (0..trace.times.len()).map(|i| {
            format!(
                "{},{},{},{},{}",
                trace.times[i], trace.entropy[i], trace.variance[i], trace.tv[i], trace.fisher[i]
            )
        }),
    )?;

    let mut exit = 0;
    if let Some(rc) = &cfg.xi_beta {
        let beta = rc.build()?;
        let xi = xi_from_beta(&beta, cfg.xi_eps)?;
        // Osc²(√h₀) prefactor from the initial density
        let h0 = match &solver.initial {
            InitialDensity::Grid(g) => g.clone(),
            InitialDensity::DiracAt { .. } => {
                return Err(CliError::Config(
                    "xi overlay needs a bounded initial density".into(),
                ))
            }
        };
        let mass = mu.integral_gf(&h0);
        let osc2 = h0.map(|v| (v / mass).max(0.0).sqrt()).oscillation().powi(2);
        let verdicts = overlay_bounds(
            &trace,
            &[OverlaidCurve {
                curve: xi.bound_curve(),
                prefactor: osc2,
            }],
            0.05,
        );
        if verdicts.iter().any(|v| !v.holds) {
            exit = 2;
        }
        out.write_json("verdicts.json", &json!({ "verdicts": verdicts }))?;
    }

    if let Some(paths) = cfg.mc_paths {
        let mc = euler_maruyama(&solver, paths, ctx.seed, 128)?;
        out.write_csv(
            "mc.csv",
            "t,mean,variance,tv",
            (0..mc.times.len()).map(|i| {
                format!(
                    "{},{},{},{}",
                    mc.times[i], mc.mean[i], mc.variance[i], mc.tv[i]
                )
            }),
        )?;
    }
    out.finalize()?;
    Ok(exit)
}

pub fn cmd_bounds(ctx: &RunContext) -> Result<i32, CliError> {
    let (cfg, bytes) = load::<BoundsCmdConfig>(ctx)?;
    let mut curves: Vec<BoundCurve> = Vec::new();
    for c in &cfg.curves {
        match c {
            CurveConfig::Xi { beta, eps } => {
                let b = beta.build()?;
                curves.push(xi_from_beta(&b, *eps)?.bound_curve());
            }
            CurveConfig::LoDecay {
                alpha,
                eps,
                t_offset,
            } => curves.push(lo_decay_curve(*alpha, *eps, *t_offset)),
            CurveConfig::Iterated {
                beta,
                eps,
                k,
                iter_eps,
            } => {
                let b = beta.build()?;
                let xi = xi_from_beta(&b, *eps)?;
                curves.push(iterated_decay_curve(&xi, *k, *iter_eps));
            }
        }
    }
    let ts: Vec<f64> = wfi_core::log_spaced(cfg.t_grid.lo, cfg.t_grid.hi, cfg.t_grid.n);
    let mut out = outputs(ctx, "bounds", &bytes)?;
    out.write_csv(
        "bounds.csv",
        "t,bound,name",
        curves.iter().flat_map(|c| {
            let name = c.name.clone();
            ts.iter()
                .filter(|&&t| t >= c.t_min && t <= c.t_max)
                .map(move |&t| format!("{t},{},{name}", c.value(t)))
                .collect::<Vec<_>>()
        }),
    )?;
    out.finalize()?;
    Ok(0)
}

pub fn cmd_report(ctx: &RunContext) -> Result<i32, CliError> {
    // aggregate every manifest found under --out
    let mut entries = Vec::new();
    let dir = std::fs::read_dir(ctx.out_dir)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", ctx.out_dir.display())))?;
    let mut stack: Vec<std::path::PathBuf> = dir.filter_map(|e| e.ok().map(|e| e.path())).collect();
    stack.sort();
    let mut dirs = vec![ctx.out_dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        if p.is_dir() {
            dirs.push(p.clone());
            if let Ok(rd) = std::fs::read_dir(&p) {
                stack.extend(rd.filter_map(|e| e.ok().map(|e| e.path())));
            }
        }
    }
    dirs.sort();
    for d in dirs {
        let m = d.join("manifest.json");
        if m.exists() {
            if let Ok(text) = std::fs::read_to_string(&m) {
                if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
                    entries.push(json!({"dir": d.display().to_string(), "manifest": v}));
                }
            }
        }
    }
    let report = json!({ "runs": entries });
    let path = ctx.out_dir.join("report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap() + "\n")
        .map_err(|e| CliError::Io(e.to_string()))?;
    println!("aggregated {} runs into {}", report["runs"].as_array().unwrap().len(), path.display());
    Ok(0)
}
