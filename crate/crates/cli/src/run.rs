//! Sweeps and distribution dumps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use otto_core::pointer::Mixture1D;
use otto_core::stats::{joint_distribution, kl_divergence, l1_coherence, marginal_work, scheme_cumulants};
use otto_core::strokes::{gibbs_state, Protocol, DEFAULT_PROTOCOL_STEPS};
use otto_core::{
    BathSpec, ColdStroke, CycleBlocks, CycleSpec, PointerWidth, SchemeConfig, SchemeRegistry,
    StrokeHamiltonian,
};
use rayon::prelude::*;

use crate::config::{ColdMode, RunConfig, StrokeMode, SweepVariable, WidthSpec};
use crate::error::{CliError, CliResult};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "OTTO_THREADS";

/// Support points closer than this are merged in discrete dumps.
const SUPPORT_TOL: f64 = 1e-12;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parameters that a sweep may override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub tau_b: f64,
    pub tau_u: Option<f64>,
    pub r: Option<f64>,
    pub sigma: Option<PointerWidth>,
}

impl Point {
    pub fn base(config: &RunConfig) -> Self {
        Self {
            tau_b: config.tau_b,
            tau_u: config.tau_u,
            r: config.r,
            sigma: None,
        }
    }

    pub fn at(config: &RunConfig, variable: SweepVariable, value: f64) -> CliResult<Self> {
        let mut p = Self::base(config);
        match variable {
            SweepVariable::TauB => p.tau_b = value,
            SweepVariable::TauU => p.tau_u = Some(value),
            SweepVariable::R => p.r = Some(value),
            SweepVariable::Sigma => p.sigma = Some(PointerWidth::new(value)?),
        }
        Ok(p)
    }
}

pub fn build_cycle(config: &RunConfig, point: &Point) -> CliResult<CycleSpec> {
    let convention = config.convention();
    let hot = BathSpec::new(config.beta_h, config.gamma_h, point.tau_b).with_convention(convention);
    let cold = match config.cold {
        ColdMode::Gksl => ColdStroke::Bath(
            BathSpec::new(config.beta_c, config.gamma_c, point.tau_b).with_convention(convention),
        ),
        ColdMode::Reset => ColdStroke::PerfectReset { beta: config.beta_c },
    };
    let cycle = match config.stroke {
        StrokeMode::Parametric => {
            let eps = config.epsilon.unwrap_or(0.0);
            CycleSpec::parametric(
                StrokeHamiltonian::pauli(config.omega1, eps)?,
                StrokeHamiltonian::pauli(config.omega2, eps)?,
                point.r.expect("validated"),
                config.phi.unwrap_or(0.0),
                hot,
                cold,
            )?
        }
        StrokeMode::Protocol => {
            let protocol = Protocol {
                omega1: config.omega1,
                omega2: config.omega2,
                tau_u: point.tau_u.expect("validated"),
                steps: config.steps.unwrap_or(DEFAULT_PROTOCOL_STEPS),
            };
            CycleSpec::protocol(protocol, hot, cold)?
        }
    };
    Ok(cycle)
}

/// A scheme with its widths, or a width slot filled by the sweep.
#[derive(Debug, Clone)]
struct Group {
    label: String,
    scheme: String,
    widths: Option<WidthSpec>,
}

fn groups(config: &RunConfig, registry: &SchemeRegistry) -> CliResult<Vec<Group>> {
    let sweeping_sigma = config.sweep.as_ref().is_some_and(|s| s.variable == SweepVariable::Sigma);
    let mut out = Vec::new();
    for name in &config.schemes {
        let scheme = registry.get(name)?;
        if scheme.pointer_count() == 0 || sweeping_sigma {
            out.push(Group {
                label: name.clone(),
                scheme: name.clone(),
                widths: None,
            });
            continue;
        }
        let sigmas = config
            .sigmas
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("sigmas: scheme {name} needs pointer widths")))?;
        for spec in sigmas {
            if let WidthSpec::PerPointer(ws) = spec {
                if ws.len() != scheme.pointer_count() {
                    return Err(CliError::WidthCount {
                        scheme: name.clone(),
                        expected: scheme.pointer_count(),
                        got: ws.len(),
                    });
                }
            }
            out.push(Group {
                label: format!("{name}_sigma{spec}"),
                scheme: name.clone(),
                widths: Some(spec.clone()),
            });
        }
    }
    Ok(out)
}

fn scheme_config(
    registry: &SchemeRegistry,
    group: &Group,
    point: &Point,
) -> CliResult<SchemeConfig> {
    let scheme = registry.get(&group.scheme)?;
    let spec = match (&group.widths, point.sigma) {
        (Some(spec), _) => spec.clone(),
        (None, Some(sigma)) => WidthSpec::Uniform(sigma),
        (None, None) => WidthSpec::Uniform(PointerWidth::Infinite),
    };
    Ok(match spec {
        WidthSpec::Uniform(w) => SchemeConfig::uniform(scheme, w),
        WidthSpec::PerPointer(ws) => SchemeConfig::new(scheme, ws)?,
    })
}

const COLUMNS: [&str; 6] = ["w", "w2c", "qh", "kl", "l1", "engine"];

fn evaluate_point(
    config: &RunConfig,
    registry: &SchemeRegistry,
    groups: &[Group],
    point: &Point,
) -> CliResult<Vec<f64>> {
    let cycle = build_cycle(config, point)?;
    let blocks = CycleBlocks::new(&cycle)?;
    let reference = gibbs_state(&cycle.h1, config.beta_c)?;
    let mut row = Vec::with_capacity(groups.len() * COLUMNS.len());
    for group in groups {
        let scheme = scheme_config(registry, group, point)?;
        let ss = blocks.steady_state(&scheme)?;
        let c = scheme_cumulants(&blocks, &scheme, &ss)?;
        let engine = -c.w > 0.0 && c.q_h > 0.0;
        row.extend([
            c.w,
            c.w2c,
            c.q_h,
            kl_divergence(&ss, &reference)?,
            l1_coherence(&ss, &cycle.h1),
            if engine { 1.0 } else { 0.0 },
        ]);
    }
    Ok(row)
}

fn with_threads<T: Send>(f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match std::env::var(THREADS_ENV).ok().filter(|v| !v.is_empty()) {
        None => Ok(f()),
        Some(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| CliError::Config(format!("{THREADS_ENV}: not a thread count: {raw:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("{THREADS_ENV}: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Sweep table as CSV text.
pub fn sweep_csv(config: &RunConfig) -> CliResult<String> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: missing (run needs a sweep variable)".into()))?;
    let registry = SchemeRegistry::with_builtin();
    let groups = groups(config, &registry)?;
    let values = sweep.values();
    let points = values
        .iter()
        .map(|&v| Point::at(config, sweep.variable, v))
        .collect::<CliResult<Vec<_>>>()?;

    let rows = with_threads(|| {
        points
            .par_iter()
            .map(|p| evaluate_point(config, &registry, &groups, p))
            .collect::<CliResult<Vec<_>>>()
    })??;

    let mut out = String::new();
    let mut header = vec![sweep.variable.name().to_string()];
    for g in &groups {
        header.extend(COLUMNS.iter().map(|c| format!("{}_{c}", g.label)));
    }
    let _ = writeln!(out, "{}", header.join(","));
    for (value, row) in values.iter().zip(rows) {
        let mut fields = vec![fmt_num(*value)];
        fields.extend(row.into_iter().map(fmt_num));
        let _ = writeln!(out, "{}", fields.join(","));
    }
    Ok(out)
}

fn single_scheme(config: &RunConfig, registry: &SchemeRegistry, name: &str) -> CliResult<SchemeConfig> {
    let scheme = registry.get(name)?;
    if scheme.pointer_count() == 0 {
        return Ok(SchemeConfig::uniform(scheme, PointerWidth::Infinite));
    }
    let spec = match config.sigmas.as_deref() {
        Some([spec]) => spec.clone(),
        _ => return Err(CliError::Config("sigmas: dist needs exactly one width entry".into())),
    };
    Ok(match spec {
        WidthSpec::Uniform(w) => SchemeConfig::uniform(scheme, w),
        WidthSpec::PerPointer(ws) => SchemeConfig::new(scheme, ws)?,
    })
}

fn work_marginal(blocks: &CycleBlocks, config: &SchemeConfig) -> CliResult<Mixture1D> {
    let ss = blocks.steady_state(config)?;
    Ok(marginal_work(&joint_distribution(blocks, config, &ss)?))
}

/// Atoms of a discrete mixture, merged and sorted by position.
pub fn atoms(m: &Mixture1D) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = m.means.iter().copied().zip(m.weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (x, p) in pairs {
        match out.last_mut() {
            Some(last) if (last.0 - x).abs() <= SUPPORT_TOL => last.1 += p,
            _ => out.push((x, p)),
        }
    }
    out
}

fn probability_at(atoms: &[(f64, f64)], x: f64) -> f64 {
    atoms
        .iter()
        .find(|(y, _)| (y - x).abs() <= SUPPORT_TOL)
        .map_or(0.0, |a| a.1)
}

/// Work-marginal dump as CSV text.
pub fn distribution_csv(config: &RunConfig) -> CliResult<String> {
    if config.sweep.is_some() {
        return Err(CliError::Config("sweep: dist takes a single parameter point".into()));
    }
    let name = match config.schemes.as_slice() {
        [name] => name,
        _ => return Err(CliError::Config("schemes: dist needs exactly one scheme".into())),
    };
    let registry = SchemeRegistry::with_builtin();
    let scheme = single_scheme(config, &registry, name)?;
    let blocks = CycleBlocks::new(&build_cycle(config, &Point::base(config))?)?;
    let marginal = work_marginal(&blocks, &scheme)?;
    let reference = config
        .dist_compare
        .as_deref()
        .map(|other| work_marginal(&blocks, &single_scheme(config, &registry, other)?))
        .transpose()?;

    let mut out = String::new();
    if marginal.is_discrete() {
        let own = atoms(&marginal);
        let total: f64 = own.iter().map(|a| a.1).sum();
        match &reference {
            None => {
                let _ = writeln!(out, "w,probability");
                for (x, p) in &own {
                    let _ = writeln!(out, "{},{}", fmt_num(*x), fmt_num(*p));
                }
            }
            Some(r) if r.is_discrete() => {
                let theirs = atoms(r);
                let mut support: Vec<f64> = own.iter().chain(&theirs).map(|a| a.0).collect();
                support.sort_by(f64::total_cmp);
                support.dedup_by(|a, b| (*a - *b).abs() <= SUPPORT_TOL);
                let _ = writeln!(out, "w,probability,reference,difference");
                for x in support {
                    let (p, q) = (probability_at(&own, x), probability_at(&theirs, x));
                    let _ = writeln!(out, "{},{},{},{}", fmt_num(x), fmt_num(p), fmt_num(q), fmt_num(p - q));
                }
            }
            Some(_) => {
                return Err(CliError::Config(
                    "dist_compare: cannot compare a discrete distribution with a density".into(),
                ))
            }
        }
        let _ = writeln!(out, "# total probability = {}", fmt_num(total));
        return Ok(out);
    }

    let grid = config
        .dist
        .ok_or_else(|| CliError::Config("dist_points: a density needs a w grid".into()))?;
    if reference.as_ref().is_some_and(Mixture1D::is_discrete) {
        return Err(CliError::Config(
            "dist_compare: cannot compare a density with a discrete distribution".into(),
        ));
    }
    let step = (grid.w_max - grid.w_min) / (grid.points - 1) as f64;
    let xs: Vec<f64> = (0..grid.points).map(|i| grid.w_min + i as f64 * step).collect();
    let density: Vec<f64> = xs.iter().map(|&x| marginal.pdf(x)).collect();
    let _ = writeln!(
        out,
        "{}",
        if reference.is_some() { "w,density,reference,difference" } else { "w,density" }
    );
    for (x, p) in xs.iter().zip(&density) {
        match &reference {
            None => {
                let _ = writeln!(out, "{},{}", fmt_num(*x), fmt_num(*p));
            }
            Some(r) => {
                let q = r.pdf(*x);
                let _ = writeln!(out, "{},{},{},{}", fmt_num(*x), fmt_num(*p), fmt_num(q), fmt_num(p - q));
            }
        }
    }
    let trapezoid: f64 = density.windows(2).map(|w| 0.5 * (w[0] + w[1]) * step).sum();
    let _ = writeln!(out, "# normalization (trapezoid) = {}", fmt_num(trapezoid));
    Ok(out)
}

fn emit(config: &RunConfig, text: &str) -> CliResult<()> {
    match &config.output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::parse(&text)
}

/// Runs the sweep in `config` and writes the table to its output.
pub fn run_sweep(config: &RunConfig) -> CliResult<()> {
    let csv = sweep_csv(config)?;
    emit(config, &csv)
}

/// Writes the work marginal of the single configured scheme.
pub fn emit_distribution(config: &RunConfig) -> CliResult<()> {
    let csv = distribution_csv(config)?;
    emit(config, &csv)
}
