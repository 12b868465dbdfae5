use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::Context;
use log::info;
use serde_json::json;

use menger::check::{check_suite, format_table};
use menger::energy::{
    energy_convergence, energy_decomposed_with, energy_weighted, loglog_slope,
    strand_pair_experiment,
};
use menger::flow::{run_flow, write_run, FlowConfig, FlowOutcome};
use menger::geometry::{make_preset, min_segment_distance};
use menger::io::read_curve;
use menger::sobolev::{self, equivalence_check, SeminormSpec, SeminormVariant};
use menger::symbol::rho_asymptotic;
use menger::variation::{gradient_fd_error, projected_gradient};
use menger::{ClosedCurve, EnergyParams, EnergyReport, MengerError, Preset, QuadratureSpec};

use crate::{CurveSource, Exponents};

type Outcome = anyhow::Result<ExitCode>;

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn params(exp: &Exponents) -> anyhow::Result<EnergyParams> {
    Ok(EnergyParams::new(exp.p, exp.q)?)
}

/// Parameters for commands whose theory needs the sub-critical range.
fn gated_params(exp: &Exponents) -> anyhow::Result<EnergyParams> {
    let pq = params(exp)?;
    let class = pq.classify();
    if !class.is_subcritical() {
        eprintln!(
            "warning: ({}, {}) is in the {:?} regime: {}",
            exp.p, exp.q, class.label, class.detail
        );
    }
    Ok(pq)
}

fn preset_dim(preset: &Preset, dim: Option<usize>) -> usize {
    dim.unwrap_or(match preset {
        Preset::TorusKnot { .. } => 3,
        _ => 2,
    })
}

fn load_curve(src: &CurveSource) -> anyhow::Result<ClosedCurve> {
    match (&src.input, &src.preset) {
        (Some(path), None) => {
            read_curve(path).with_context(|| format!("reading {}", path.display()))
        }
        (None, Some(name)) => {
            let preset: Preset = name.parse()?;
            Ok(make_preset(&preset, src.n, preset_dim(&preset, src.dim))?)
        }
        _ => Err(MengerError::BadParams("give exactly one of --input and --preset".into()).into()),
    }
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn energy(exp: &Exponents, src: &CurveSource, deterministic: bool) -> Outcome {
    let pq = params(exp)?;
    let curve = load_curve(src)?;
    let report = if curve.is_arclength() {
        let spec = QuadratureSpec {
            deterministic_reduction: deterministic,
            ..QuadratureSpec::for_curve(&curve)
        };
        energy_decomposed_with(&curve, &pq, &spec)?
    } else {
        let n = curve.len() as u64;
        EnergyReport {
            value: energy_weighted(&curve, &pq)?,
            n: curve.len(),
            params: pq,
            decomposition_used: true,
            kernel_evaluations: n * (n - 1) * (n - 2) / 6,
        }
    };
    print_json(&report)?;
    Ok(ExitCode::SUCCESS)
}

pub fn classify(exp: &Exponents) -> Outcome {
    let pq = params(exp)?;
    let class = pq.classify();
    print_json(&json!({
        "label": class.label,
        "detail": class.detail,
        "p": pq.p(),
        "q": pq.q(),
        "s": pq.s(),
        "alpha": pq.alpha(),
        "subcritical": class.is_subcritical(),
    }))?;
    Ok(ExitCode::SUCCESS)
}

pub fn converge(
    exp: &Exponents,
    preset: &str,
    dim: Option<usize>,
    ns: &[usize],
    out: Option<&Path>,
) -> Outcome {
    let pq = params(exp)?;
    let preset: Preset = preset.parse()?;
    let table = energy_convergence(&preset, preset_dim(&preset, dim), &pq, ns)?;
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let mut csv = String::from("N,energy,extrapolated\n");
        for r in &table.rows {
            let ex = r
                .extrapolated
                .map(|v| format!("{v:.17e}"))
                .unwrap_or_default();
            let _ = writeln!(csv, "{},{:.17e},{ex}", r.n, r.energy);
        }
        fs::write(dir.join("converge.csv"), csv)?;
    }
    print_json(&table)?;
    Ok(ExitCode::SUCCESS)
}

pub fn strands(exp: &Exponents, deltas: &[f64], n: usize, out: Option<&Path>) -> Outcome {
    let pq = params(exp)?;
    let values = deltas
        .iter()
        .map(|&d| strand_pair_experiment(d, &pq, n))
        .collect::<Result<Vec<_>, _>>()?;
    let slope = (deltas.len() >= 2).then(|| loglog_slope(deltas, &values));
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let mut csv = String::from("delta,energy\n");
        for (d, v) in deltas.iter().zip(&values) {
            let _ = writeln!(csv, "{d:.17e},{v:.17e}");
        }
        fs::write(dir.join("strands.csv"), csv)?;
    }
    print_json(&json!({ "N": n, "deltas": deltas, "energies": values, "slope": slope }))?;
    Ok(ExitCode::SUCCESS)
}

pub fn grad(
    exp: &Exponents,
    src: &CurveSource,
    fd_step: Option<f64>,
    out: Option<&Path>,
) -> Outcome {
    let pq = gated_params(exp)?;
    let curve = load_curve(src)?;
    let pg = projected_gradient(&curve, &pq)?;
    let max_fd_error = fd_step
        .map(|h| gradient_fd_error(&curve, &pq, h))
        .transpose()?;
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let mut csv = String::from("i,gx,gy,gz,fx,fy,fz\n");
        for (i, (g, f)) in pg
            .energy_gradient
            .vectors
            .iter()
            .zip(&pg.field.vectors)
            .enumerate()
        {
            let _ = writeln!(
                csv,
                "{i},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                g.x, g.y, g.z, f.x, f.y, f.z
            );
        }
        fs::write(dir.join("gradient.csv"), csv)?;
    }
    let mut report = json!({
        "residual": pg.residual,
        "lambda": pg.lambda,
        "energy": pg.energy,
        "gradient_sup": pg.energy_gradient.sup_norm(),
    });
    if let Some(e) = max_fd_error {
        report["max_fd_error"] = json!(e);
    }
    print_json(&report)?;
    Ok(ExitCode::SUCCESS)
}

pub struct FlowFlags {
    pub steps: usize,
    pub step_size: f64,
    pub tol: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub resample_every: usize,
    pub guard_factor: f64,
    pub snapshot_every: usize,
}

pub fn flow(exp: &Exponents, src: &CurveSource, flags: &FlowFlags, out: &Path) -> Outcome {
    let pq = gated_params(exp)?;
    let curve = load_curve(src)?;
    let cfg = FlowConfig {
        max_steps: flags.steps,
        initial_step: flags.step_size,
        residual_tol: flags.tol,
        armijo_c: flags.armijo_c,
        backtrack_factor: flags.backtrack,
        resample_every: flags.resample_every,
        guard_distance_factor: flags.guard_factor,
        snapshot_every: flags.snapshot_every,
        ..FlowConfig::new(pq)
    };
    let run = run_flow(curve, &cfg)?;
    write_run(&run, out)?;
    info!(
        "wrote {} snapshots to {}",
        run.snapshots.len(),
        out.display()
    );
    let state = &run.state;
    let outcome = match &run.outcome {
        FlowOutcome::Converged => "converged".to_string(),
        FlowOutcome::MaxSteps => "max_steps".to_string(),
        FlowOutcome::Failed(e) => format!("failed: {e}"),
    };
    print_json(&json!({
        "outcome": outcome,
        "steps": state.step_index,
        "initial_energy": run.history[0].energy,
        "energy": state.energy,
        "residual": state.residual,
        "lambda": state.lambda,
        "guard_trips": state.guard_trips,
        "min_dist": min_segment_distance(&state.curve),
        "config": cfg,
    }))?;
    match run.outcome {
        FlowOutcome::Failed(e) => Err(e.into()),
        _ => Ok(ExitCode::SUCCESS),
    }
}

pub fn seminorm(src: &CurveSource, s: f64, rho: f64, variant: &str) -> Outcome {
    let curve = load_curve(src)?;
    if variant == "both" {
        print_json(&equivalence_check(&curve, s, rho)?)?;
    } else {
        let v: SeminormVariant = variant.parse()?;
        let spec = SeminormSpec::new(s, rho, v)?;
        print_json(
            &json!({ "variant": variant, "s": s, "rho": rho, "value": sobolev::seminorm(&curve, &spec)? }),
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn symbol(p: f64, ks: &[u32], lambda: f64, out: Option<&Path>) -> Outcome {
    // the symbol is only defined for q = 2
    gated_params(&Exponents { p, q: 2.0 })?;
    let table = rho_asymptotic(p, ks)?;
    let tilde = table.tilde(lambda);
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let mut csv = String::from("k,rho,scaled,tilde_rho\n");
        for (((k, r), sc), t) in table
            .ks
            .iter()
            .zip(&table.rho)
            .zip(&table.scaled)
            .zip(&tilde)
        {
            let _ = writeln!(csv, "{k},{r:.17e},{sc:.17e},{t:.17e}");
        }
        fs::write(dir.join("symbol.csv"), csv)?;
    }
    print_json(&json!({
        "p": p,
        "plateau": table.plateau,
        "slope": table.slope,
        "expected_slope": 3.0 * p - 4.0,
        "deviation": table.deviation,
        "rows": table.ks.iter().zip(&table.rho).zip(&table.scaled).zip(&tilde)
            .map(|(((k, r), sc), t)| json!({ "k": k, "rho": r, "scaled": sc, "tilde_rho": t }))
            .collect::<Vec<_>>(),
    }))?;
    Ok(ExitCode::SUCCESS)
}

pub fn check(fast: bool) -> Outcome {
    let results = check_suite(fast)?;
    print!("{}", format_table(&results));
    Ok(if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
