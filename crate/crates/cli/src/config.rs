//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment. Pointer widths accept the
//! literals `0` (projective) and `inf` (no measurement).

use std::fmt::Write as _;
use std::path::PathBuf;

use otto_core::{OccupationConvention, PointerWidth};

use crate::error::{CliError, CliResult};

/// Keys in canonical serialization order.
const KEYS: &[&str] = &[
    "omega1",
    "omega2",
    "epsilon",
    "beta_c",
    "beta_h",
    "gamma_c",
    "gamma_h",
    "tau_u",
    "tau_b",
    "stroke",
    "r",
    "phi",
    "steps",
    "cold",
    "occupation",
    "schemes",
    "sigmas",
    "sweep",
    "sweep_start",
    "sweep_stop",
    "sweep_points",
    "sweep_values",
    "output",
    "dist_w_min",
    "dist_w_max",
    "dist_points",
    "dist_compare",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrokeMode {
    Parametric,
    Protocol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColdMode {
    Gksl,
    Reset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    TauB,
    TauU,
    Sigma,
    R,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::TauB => "tau_b",
            SweepVariable::TauU => "tau_u",
            SweepVariable::Sigma => "sigma",
            SweepVariable::R => "r",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepGrid {
    Linear { start: f64, stop: f64, points: usize },
    Values(Vec<PointerWidth>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub grid: SweepGrid,
}

impl Sweep {
    /// Grid points; `inf` is only possible for a width sweep.
    pub fn values(&self) -> Vec<f64> {
        match &self.grid {
            SweepGrid::Linear { start, stop, points } => {
                let step = (stop - start) / (*points - 1) as f64;
                (0..*points)
                    .map(|i| if i + 1 == *points { *stop } else { start + i as f64 * step })
                    .collect()
            }
            SweepGrid::Values(v) => v.iter().map(|w| w.sigma()).collect(),
        }
    }
}

/// One entry of `sigmas`: a width shared by all pointers, or one width per
/// pointer written as `a/b/c`.
#[derive(Debug, Clone, PartialEq)]
pub enum WidthSpec {
    Uniform(PointerWidth),
    PerPointer(Vec<PointerWidth>),
}

impl std::fmt::Display for WidthSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WidthSpec::Uniform(w) => write!(f, "{w}"),
            WidthSpec::PerPointer(ws) => {
                let parts: Vec<String> = ws.iter().map(ToString::to_string).collect();
                write!(f, "{}", parts.join("/"))
            }
        }
    }
}

fn parse_width_spec(key: &str, raw: &str) -> CliResult<WidthSpec> {
    if raw.contains('/') {
        let ws = raw.split('/').map(|s| parse_width(key, s.trim())).collect::<CliResult<Vec<_>>>()?;
        Ok(WidthSpec::PerPointer(ws))
    } else {
        Ok(WidthSpec::Uniform(parse_width(key, raw)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistGrid {
    pub w_min: f64,
    pub w_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega1: f64,
    pub omega2: f64,
    /// `sigma_x` admixture of both stroke Hamiltonians (parametric strokes).
    pub epsilon: Option<f64>,
    pub beta_c: f64,
    pub beta_h: f64,
    pub gamma_c: f64,
    pub gamma_h: f64,
    pub tau_u: Option<f64>,
    pub tau_b: f64,
    pub stroke: StrokeMode,
    pub r: Option<f64>,
    pub phi: Option<f64>,
    pub steps: Option<usize>,
    pub cold: ColdMode,
    pub occupation: Option<OccupationConvention>,
    pub schemes: Vec<String>,
    pub sigmas: Option<Vec<WidthSpec>>,
    pub sweep: Option<Sweep>,
    pub output: Option<PathBuf>,
    pub dist: Option<DistGrid>,
    pub dist_compare: Option<String>,
}

fn bad(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Config(format!("{key}: {}", msg.into()))
}

fn parse_f64(key: &str, raw: &str) -> CliResult<f64> {
    let v: f64 = raw.parse().map_err(|_| bad(key, format!("not a number: {raw:?}")))?;
    if !v.is_finite() {
        return Err(bad(key, "must be finite"));
    }
    Ok(v)
}

fn parse_usize(key: &str, raw: &str) -> CliResult<usize> {
    raw.parse().map_err(|_| bad(key, format!("not a non-negative integer: {raw:?}")))
}

pub fn parse_width(key: &str, raw: &str) -> CliResult<PointerWidth> {
    let v = match raw {
        "inf" => f64::INFINITY,
        _ => parse_f64(key, raw)?,
    };
    PointerWidth::new(v).map_err(|e| bad(key, e.to_string()))
}

fn parse_list<T>(key: &str, raw: &str, item: impl Fn(&str, &str) -> CliResult<T>) -> CliResult<Vec<T>> {
    let items = raw
        .split(',')
        .map(str::trim)
        .map(|s| item(key, s))
        .collect::<CliResult<Vec<T>>>()?;
    if items.is_empty() {
        return Err(bad(key, "empty list"));
    }
    Ok(items)
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
            }
            if entries.iter().any(|(k, _)| k == key) {
                return Err(CliError::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
            entries.push((key.to_string(), value.to_string()));
        }
        let get = |key: &str| entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let required = |key: &str| get(key).ok_or_else(|| bad(key, "missing"));
        let float = |key: &str| required(key).and_then(|v| parse_f64(key, v));
        let opt_float = |key: &str| get(key).map(|v| parse_f64(key, v)).transpose();

        let stroke = match required("stroke")? {
            "parametric" => StrokeMode::Parametric,
            "protocol" => StrokeMode::Protocol,
            other => return Err(bad("stroke", format!("expected parametric or protocol, got {other:?}"))),
        };
        let cold = match get("cold").unwrap_or("gksl") {
            "gksl" => ColdMode::Gksl,
            "reset" => ColdMode::Reset,
            other => return Err(bad("cold", format!("expected gksl or reset, got {other:?}"))),
        };
        let occupation = get("occupation")
            .map(|v| match v {
                "gibbs" => Ok(OccupationConvention::GibbsConsistent),
                "printed" => Ok(OccupationConvention::AsPrinted),
                other => Err(bad("occupation", format!("expected gibbs or printed, got {other:?}"))),
            })
            .transpose()?;
        let schemes = parse_list("schemes", required("schemes")?, |_, s| Ok(s.to_string()))?;
        let sigmas = get("sigmas").map(|v| parse_list("sigmas", v, parse_width_spec)).transpose()?;

        let sweep = match get("sweep") {
            None => {
                for key in ["sweep_start", "sweep_stop", "sweep_points", "sweep_values"] {
                    if get(key).is_some() {
                        return Err(bad(key, "given without `sweep`"));
                    }
                }
                None
            }
            Some(var) => {
                let variable = match var {
                    "tau_b" => SweepVariable::TauB,
                    "tau_u" => SweepVariable::TauU,
                    "sigma" => SweepVariable::Sigma,
                    "r" => SweepVariable::R,
                    other => return Err(bad("sweep", format!("unknown sweep variable {other:?}"))),
                };
                let grid = match get("sweep_values") {
                    Some(v) => {
                        if get("sweep_start").or(get("sweep_stop")).or(get("sweep_points")).is_some() {
                            return Err(bad("sweep_values", "conflicts with sweep_start/stop/points"));
                        }
                        SweepGrid::Values(parse_list("sweep_values", v, parse_width)?)
                    }
                    None => SweepGrid::Linear {
                        start: float("sweep_start")?,
                        stop: float("sweep_stop")?,
                        points: parse_usize("sweep_points", required("sweep_points")?)?,
                    },
                };
                Some(Sweep { variable, grid })
            }
        };

        let dist = match (get("dist_w_min"), get("dist_w_max"), get("dist_points")) {
            (None, None, None) => None,
            (Some(lo), Some(hi), Some(n)) => Some(DistGrid {
                w_min: parse_f64("dist_w_min", lo)?,
                w_max: parse_f64("dist_w_max", hi)?,
                points: parse_usize("dist_points", n)?,
            }),
            _ => return Err(bad("dist_w_min", "dist_w_min, dist_w_max and dist_points go together")),
        };

        let config = RunConfig {
            omega1: float("omega1")?,
            omega2: float("omega2")?,
            epsilon: opt_float("epsilon")?,
            beta_c: float("beta_c")?,
            beta_h: float("beta_h")?,
            gamma_c: float("gamma_c")?,
            gamma_h: float("gamma_h")?,
            tau_u: opt_float("tau_u")?,
            tau_b: float("tau_b")?,
            stroke,
            r: opt_float("r")?,
            phi: opt_float("phi")?,
            steps: get("steps").map(|v| parse_usize("steps", v)).transpose()?,
            cold,
            occupation,
            schemes,
            sigmas,
            sweep,
            output: get("output").map(PathBuf::from),
            dist,
            dist_compare: get("dist_compare").map(str::to_string),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> CliResult<()> {
        match self.stroke {
            StrokeMode::Parametric => {
                if self.r.is_none() {
                    return Err(bad("r", "required for parametric strokes"));
                }
            }
            StrokeMode::Protocol => {
                if self.tau_u.is_none() {
                    return Err(bad("tau_u", "required for protocol strokes"));
                }
                for (key, set) in [("r", self.r.is_some()), ("phi", self.phi.is_some()), ("epsilon", self.epsilon.is_some())] {
                    if set {
                        return Err(bad(key, "only applies to parametric strokes"));
                    }
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            match (&sweep.grid, sweep.variable) {
                (SweepGrid::Linear { points, .. }, _) if *points < 2 => {
                    return Err(bad("sweep_points", "need at least 2 points"));
                }
                (SweepGrid::Values(v), var) if var != SweepVariable::Sigma && v.contains(&PointerWidth::Infinite) => {
                    return Err(bad("sweep_values", "inf is only allowed in a sigma sweep"));
                }
                _ => {}
            }
            let values = sweep.values();
            if values.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(bad("sweep", "grid must be strictly increasing"));
            }
            match sweep.variable {
                SweepVariable::Sigma if self.sigmas.is_some() => {
                    return Err(bad("sigmas", "must not be set when sweeping sigma"));
                }
                SweepVariable::TauU if self.stroke != StrokeMode::Protocol => {
                    return Err(bad("sweep", "tau_u sweeps need protocol strokes"));
                }
                SweepVariable::R if self.stroke != StrokeMode::Parametric => {
                    return Err(bad("sweep", "r sweeps need parametric strokes"));
                }
                _ => {}
            }
        }
        if let Some(d) = &self.dist {
            if d.points < 2 {
                return Err(bad("dist_points", "need at least 2 points"));
            }
            if !(d.w_max > d.w_min) {
                return Err(bad("dist_w_max", "must exceed dist_w_min"));
            }
        }
        Ok(())
    }

    pub fn convention(&self) -> OccupationConvention {
        self.occupation.unwrap_or_default()
    }

    /// Canonical text form: every set key once, in canonical order.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        let join = |ws: &[PointerWidth]| ws.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        for key in KEYS {
            let value = match *key {
                "omega1" => Some(self.omega1.to_string()),
                "omega2" => Some(self.omega2.to_string()),
                "epsilon" => self.epsilon.map(|v| v.to_string()),
                "beta_c" => Some(self.beta_c.to_string()),
                "beta_h" => Some(self.beta_h.to_string()),
                "gamma_c" => Some(self.gamma_c.to_string()),
                "gamma_h" => Some(self.gamma_h.to_string()),
                "tau_u" => self.tau_u.map(|v| v.to_string()),
                "tau_b" => Some(self.tau_b.to_string()),
                "stroke" => Some(
                    match self.stroke {
                        StrokeMode::Parametric => "parametric",
                        StrokeMode::Protocol => "protocol",
                    }
                    .to_string(),
                ),
                "r" => self.r.map(|v| v.to_string()),
                "phi" => self.phi.map(|v| v.to_string()),
                "steps" => self.steps.map(|v| v.to_string()),
                "cold" => Some(
                    match self.cold {
                        ColdMode::Gksl => "gksl",
                        ColdMode::Reset => "reset",
                    }
                    .to_string(),
                ),
                "occupation" => self.occupation.map(|c| {
                    match c {
                        OccupationConvention::GibbsConsistent => "gibbs",
                        OccupationConvention::AsPrinted => "printed",
                    }
                    .to_string()
                }),
                "schemes" => Some(self.schemes.join(", ")),
                "sigmas" => self.sigmas.as_ref().map(|v| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")),
                "sweep" => self.sweep.as_ref().map(|s| s.variable.name().to_string()),
                "sweep_start" | "sweep_stop" | "sweep_points" => match self.sweep.as_ref().map(|s| &s.grid) {
                    Some(SweepGrid::Linear { start, stop, points }) => Some(match *key {
                        "sweep_start" => start.to_string(),
                        "sweep_stop" => stop.to_string(),
                        _ => points.to_string(),
                    }),
                    _ => None,
                },
                "sweep_values" => match self.sweep.as_ref().map(|s| &s.grid) {
                    Some(SweepGrid::Values(v)) => Some(join(v)),
                    _ => None,
                },
                "output" => self.output.as_ref().map(|p| p.display().to_string()),
                "dist_w_min" => self.dist.map(|d| d.w_min.to_string()),
                "dist_w_max" => self.dist.map(|d| d.w_max.to_string()),
                "dist_points" => self.dist.map(|d| d.points.to_string()),
                "dist_compare" => self.dist_compare.clone(),
                _ => unreachable!("key list and serializer out of sync"),
            };
            if let Some(value) = value {
                put(key, value);
            }
        }
        out
    }
}
