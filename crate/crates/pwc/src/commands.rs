use std::path::{Path, PathBuf};

use anyhow::Context;
use pwc_core::bohm::{integrate_trajectories, sample_initial_positions, TrajectoryOptions};
use pwc_core::correlators::{contradiction_report, correlation_sweep, CorrelationSweep};
use pwc_core::grid::expectation;
use pwc_core::grid::Operator;
use pwc_core::oscillator::{build_state, oscillator_potential};
use pwc_core::Executor;
use serde_json::{json, Value};

use crate::config::{format_state, ConfigError, Resolved};
use crate::export::{
    num, output_path, sweep_rows_json, write_json, write_sweep_csv, write_trajectories_csv,
    write_wavefunction_csv, Format,
};
use crate::verify::run_suite;

/// Relative tolerances on the half-period row of the contradiction demo.
pub const DEMO_QM_TOLERANCE: f64 = 2e-4;
pub const DEMO_BOHM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

fn sweep_json(cfg: &Resolved, sweep: &CorrelationSweep) -> Value {
    json!({
        "config": cfg.echo(),
        "params": cfg.params_json(),
        "grid": cfg.grid_json(),
        "state": format_state(&sweep.state),
        "q2_quadrature": sweep.q2,
        "fock_dimension": sweep.fock_dimension,
        "lags": sweep_rows_json(sweep),
    })
}

fn write_sweep(
    cfg: &Resolved,
    sweep: &CorrelationSweep,
    extra: Option<(&str, Value)>,
    out: &Path,
    stem: &str,
    format: Format,
) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if format.json() {
        let mut value = sweep_json(cfg, sweep);
        if let Some((key, v)) = extra {
            value[key] = v;
        }
        let path = output_path(out, &format!("{stem}.json"))?;
        write_json(&path, &value)?;
        files.push(path);
    }
    if format.csv() {
        let path = output_path(out, &format!("{stem}.csv"))?;
        write_sweep_csv(&path, sweep)?;
        files.push(path);
    }
    Ok(files)
}

fn print_sweep(sweep: &CorrelationSweep, period: f64) {
    println!(
        "{:>10} {:>14} {:>14} {:>14} {:>14}  flag",
        "tau/T", "qm_re", "qm_im", "qm_sym", "bohm_sym"
    );
    for r in &sweep.rows {
        println!(
            "{:>10.4} {:>14.8} {:>14.8} {:>14.8} {:>14.8}  {}",
            r.tau / period,
            r.grid.value.re,
            r.grid.value.im,
            r.grid.symmetrized,
            r.bohm.symmetrized,
            r.flag.as_str()
        );
    }
}

/// Runs the full check suite; passes iff every check passes. The JSON
/// report is always written.
pub fn run_verify<E: Executor>(
    cfg: &Resolved,
    out: &Path,
    format: Format,
    exec: &E,
) -> anyhow::Result<Outcome> {
    let checks = run_suite(cfg, exec);
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let note = c
            .note
            .as_deref()
            .map(|n| format!("  ({n})"))
            .unwrap_or_default();
        println!(
            "{status} {:<45} measured {:>12.4e} target {:>10.3e} tol {:>9.2e}{note}",
            c.name, c.measured, c.target, c.tolerance
        );
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        println!("all {} checks passed", checks.len());
    } else {
        println!(
            "{} of {} checks failed: {}",
            failed.len(),
            checks.len(),
            failed.join(", ")
        );
    }

    let mut files = Vec::new();
    let path = output_path(out, "verify.json")?;
    write_json(
        &path,
        &json!({ "config": cfg.echo(), "passed": passed, "failed": failed, "checks": checks }),
    )?;
    files.push(path);
    if format.csv() {
        let path = output_path(out, "verify.csv")?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["name", "measured", "target", "tolerance", "passed", "note"])?;
        for c in &checks {
            w.write_record([
                c.name.clone(),
                num(c.measured),
                num(c.target),
                num(c.tolerance),
                c.passed.to_string(),
                c.note.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        files.push(path);
    }
    Ok(Outcome { passed, files })
}

/// Ground-state sweep over the configured lags (plus `T/2`). Passes iff the
/// half-period row has `qm_sym < 0 < bohm_sym` with both magnitudes within
/// tolerance of `2 <q^2>`.
pub fn run_contradiction_demo<E: Executor>(
    cfg: &Resolved,
    out: &Path,
    format: Format,
    exec: &E,
) -> anyhow::Result<Outcome> {
    if !cfg.state.is_ground_state() {
        return Err(ConfigError(format!(
            "demo-contradiction needs state = \"eigenstate:0\" (got {:?}): the opposite-sign argument \
             relies on ground-state particles standing still",
            cfg.raw.state
        ))
        .into());
    }
    let half = 0.5 * cfg.period();
    let mut lags = cfg.lags.clone();
    if !lags.iter().any(|&l| (l - half).abs() <= 1e-12 * half) {
        lags.push(half);
    }
    lags.sort_by(f64::total_cmp);
    lags.dedup();
    let sweep = contradiction_report(&cfg.sweep_config(lags), exec)?;
    let row = sweep.row_at(half).context("half-period row missing")?;
    let two_q2 = 2.0 * cfg.params.ground_q2();
    let (qm, bohm) = (row.grid.symmetrized, row.bohm.symmetrized);
    let passed = qm < 0.0
        && bohm > 0.0
        && (qm + two_q2).abs() <= DEMO_QM_TOLERANCE * two_q2
        && (bohm - two_q2).abs() <= DEMO_BOHM_TOLERANCE * two_q2;

    print_sweep(&sweep, cfg.period());
    println!(
        "T/2: qm_sym = {qm:.8}, bohm_sym = {bohm:.8}, 2<q^2> = {two_q2:.8} (quadrature {:.8}) -> {}",
        2.0 * sweep.q2,
        if passed { "opposite signs confirmed" } else { "expected signs NOT reproduced" }
    );
    let verdict = json!({
        "tau": half,
        "qm_sym": qm,
        "bohm_sym": bohm,
        "two_q2": two_q2,
        "qm_tolerance": DEMO_QM_TOLERANCE * two_q2,
        "bohm_tolerance": DEMO_BOHM_TOLERANCE * two_q2,
        "flag": row.flag.as_str(),
        "passed": passed,
    });
    let files = write_sweep(
        cfg,
        &sweep,
        Some(("half_period", verdict)),
        out,
        "contradiction",
        format,
    )?;
    Ok(Outcome { passed, files })
}

/// Trajectories of the configured state over `duration`, plus the initial
/// and final wavefunctions.
pub fn run_trajectories<E: Executor>(
    cfg: &Resolved,
    out: &Path,
    format: Format,
    exec: &E,
) -> anyhow::Result<Outcome> {
    let units = cfg.params.units();
    let potential = oscillator_potential(&cfg.params, &cfg.grid);
    let psi0 = build_state(&cfg.state, &cfg.params, &cfg.grid)?;
    let ensemble = sample_initial_positions(&psi0, cfg.ensemble_size, cfg.sampling)?
        .with_source(cfg.state.clone());
    let options = TrajectoryOptions::new(cfg.dt).record_every(cfg.record_every);
    let run = integrate_trajectories(
        &ensemble,
        &psi0,
        &potential,
        units,
        cfg.duration,
        &options,
        exec,
    )?;

    let mut files = Vec::new();
    let path = output_path(out, "trajectories.csv")?;
    write_trajectories_csv(&path, &run.ensemble)?;
    files.push(path);
    for (name, psi) in [
        ("wavefunction_initial.csv", &psi0),
        ("wavefunction_final.csv", &run.final_state),
    ] {
        let path = output_path(out, name)?;
        write_wavefunction_csv(&path, psi)?;
        files.push(path);
    }

    let positions = run.ensemble.positions_at(cfg.duration)?;
    let weights = run.ensemble.particles().iter().map(|p| p.weight);
    let bohm_q: f64 = positions.iter().zip(weights).map(|(x, w)| x * w).sum();
    let qm_q = expectation(Operator::Position, &run.final_state, units)?.re;
    println!(
        "{} particles over t = {:.6}: <q>_bohm = {bohm_q:.8}, <q>_qm = {qm_q:.8}",
        run.ensemble.len(),
        cfg.duration
    );
    if format.json() {
        let path = output_path(out, "trajectories.json")?;
        write_json(
            &path,
            &json!({
                "config": cfg.echo(),
                "particles": run.ensemble.len(),
                "samples_per_particle": run.ensemble.particles()[0].path.len(),
                "duration": cfg.duration,
                "final_q_bohm": bohm_q,
                "final_q_qm": qm_q,
            }),
        )?;
        files.push(path);
    }
    Ok(Outcome {
        passed: true,
        files,
    })
}

/// Correlation sweep of the configured state over the configured lags.
pub fn run_correlate<E: Executor>(
    cfg: &Resolved,
    out: &Path,
    format: Format,
    exec: &E,
) -> anyhow::Result<Outcome> {
    let sweep = correlation_sweep(&cfg.state, &cfg.sweep_config(cfg.lags.clone()), exec)?;
    print_sweep(&sweep, cfg.period());
    let files = write_sweep(cfg, &sweep, None, out, "correlation", format)?;
    Ok(Outcome {
        passed: true,
        files,
    })
}
