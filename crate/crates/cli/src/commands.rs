//! The four commands. Each returns its rows or report; [`render`] turns them
//! into output bytes plus any diagnostics meant for standard error.

use std::io::Write;

use kcc_core::dynamics::{find_t0, integrate_deviation, integrate_lorenz, p_along_trajectory, DeviationIc, T0Report};
use kcc_core::lorenz::LorenzParams;
use rayon::prelude::*;

use crate::config::{Cli, CommandKind, Format, RunConfig, T0Options};
use crate::error::CliError;
use crate::format::format_f64;
use crate::report::{sweep_table, to_json, DeviationRow, StabilityReport, SweepPoint, TrajectoryRow};

pub fn analyze(cfg: &RunConfig) -> Result<StabilityReport, CliError> {
    StabilityReport::new(&cfg.params)
}

pub fn trajectory(cfg: &RunConfig) -> Result<Vec<TrajectoryRow>, CliError> {
    let traj = integrate_lorenz(&cfg.params, cfg.state, &cfg.integrator)?;
    let ps = p_along_trajectory(&cfg.params, &traj);
    Ok(traj
        .times
        .iter()
        .zip(&traj.states)
        .zip(ps)
        .map(|((&t, s), [[p11, p12], [p21, p22]])| TrajectoryRow {
            t,
            x: s.x,
            y: s.y,
            z: s.z,
            p11,
            p12,
            p21,
            p22,
        })
        .collect())
}

pub fn deviation(cfg: &RunConfig) -> Result<Vec<DeviationRow>, CliError> {
    let tr = integrate_deviation(
        &cfg.params,
        cfg.anchor,
        DeviationIc::from_velocity(cfg.xi10, cfg.xi20),
        &cfg.integrator,
    )?;
    Ok((0..tr.len())
        .map(|k| DeviationRow {
            t: tr.times[k],
            xi1: tr.xi1[k],
            xi2: tr.xi2[k],
            xi_norm: tr.xi_norm[k],
            delta1: tr.delta1[k],
            delta2: tr.delta2[k],
            delta: tr.delta[k],
            kappa0: tr.kappa0[k],
        })
        .collect())
}

pub fn t0(cfg: &RunConfig, opts: &T0Options) -> Result<T0Report, CliError> {
    Ok(find_t0(&cfg.params, cfg.xi10, cfg.xi20, opts.search_max)?)
}

/// Lines printed to standard error for `--t0`.
pub fn t0_lines(r: &T0Report, critical: Option<f64>) -> Vec<String> {
    let mut lines = vec![
        format!(
            "t0 = {}  approximation 1.099/(rho+10.02) = {}  relative deviation = {}",
            format_f64(r.t0),
            format_f64(r.approximation),
            format_f64(r.relative_deviation)
        ),
        format!(
            "xi1(t0) = {}  xi2(t0) = {}",
            format_f64(r.xi1_at_t0),
            format_f64(r.xi2_at_t0)
        ),
    ];
    if let Some(c) = critical {
        lines.push(format!("t0 < t0_crit = {}: {}", format_f64(c), r.t0 < c));
    }
    lines
}

/// Grid points are evaluated in parallel; the result keeps grid order.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepPoint>, CliError> {
    let grid = cfg
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Usage("sweep needs a grid".into()))?;
    if grid.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    grid.points()
        .into_par_iter()
        .map(|(sigma, rho, beta)| {
            let p = LorenzParams::new(sigma, rho, beta)?;
            let report = StabilityReport::new(&p)?;
            let t0 = cfg
                .t0
                .map(|opts| match find_t0(&p, cfg.xi10, cfg.xi20, opts.search_max) {
                    Ok(r) => Some(r.t0),
                    Err(e) => {
                        log::warn!("sigma = {sigma}, rho = {rho}, beta = {beta}: no t0 ({e})");
                        None
                    }
                });
            Ok(SweepPoint { report, t0 })
        })
        .collect()
}

/// Output of one command run.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub bytes: Vec<u8>,
    pub diagnostics: Vec<String>,
}

pub fn render(kind: CommandKind, cfg: &RunConfig) -> Result<Rendered, CliError> {
    let mut diagnostics = Vec::new();
    let bytes = match kind {
        CommandKind::Analyze => {
            let r = analyze(cfg)?;
            match cfg.format {
                Format::Json => to_json(&r),
                Format::Csv => r.to_table().to_bytes(),
            }
        }
        CommandKind::Trajectory => {
            let rows = trajectory(cfg)?;
            match cfg.format {
                Format::Json => to_json(&rows),
                Format::Csv => TrajectoryRow::table(&rows).to_bytes(),
            }
        }
        CommandKind::Deviation => {
            if let Some(opts) = &cfg.t0 {
                diagnostics = t0_lines(&t0(cfg, opts)?, opts.critical);
            }
            let rows = deviation(cfg)?;
            match cfg.format {
                Format::Json => to_json(&rows),
                Format::Csv => DeviationRow::table(&rows).to_bytes(),
            }
        }
        CommandKind::Sweep => {
            let points = sweep(cfg)?;
            match cfg.format {
                Format::Json => to_json(&points),
                Format::Csv => sweep_table(&points, cfg.t0.is_some()).to_bytes(),
            }
        }
    };
    Ok(Rendered { bytes, diagnostics })
}

/// Resolves the configuration, runs the command and writes its output to
/// `--out` or standard output.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let (kind, opts) = cli.command.split();
    let cfg = RunConfig::resolve(kind, opts)?;
    let out = render(kind, &cfg)?;
    for line in &out.diagnostics {
        eprintln!("{line}");
    }
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &out.bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&out.bytes)
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::io("writing standard output", e))
        }
    }
}
