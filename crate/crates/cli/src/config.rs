//! Command-line flags, the flat `key = value` config file, and their merge
//! into a validated [`RunConfig`]. Flags win over the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcc_core::dynamics::{Anchor, IntegratorConfig, DEFAULT_T0_SEARCH_MAX};
use kcc_core::lorenz::{LorenzParams, LorenzState};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "kcc-jacobi",
    version,
    about = "Jacobi stability analysis of the Lorenz system"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Analyze,
    Trajectory,
    Deviation,
    Sweep,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stability report for every equilibrium.
    Analyze(Options),
    /// Sampled trajectory with the deviation curvature along it.
    Trajectory(Options),
    /// Deviation vector, instability exponents and curvature of the deviation curve.
    Deviation(Options),
    /// Theorem conditions over a parameter grid.
    Sweep(Options),
}

impl Command {
    pub fn split(self) -> (CommandKind, Options) {
        match self {
            Self::Analyze(o) => (CommandKind::Analyze, o),
            Self::Trajectory(o) => (CommandKind::Trajectory, o),
            Self::Deviation(o) => (CommandKind::Deviation, o),
            Self::Sweep(o) => (CommandKind::Sweep, o),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnchorArg {
    S0,
    Splus,
    Sminus,
    /// Coefficients along the trajectory from `--x0 --y0 --z0`.
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by all commands; each command reads the ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<f64>,
    #[arg(long, value_enum)]
    pub anchor: Option<AnchorArg>,
    /// Initial deviation velocity components.
    #[arg(long, allow_hyphen_values = true)]
    pub xi10: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi20: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    /// Fixed RK4 step.
    #[arg(long, conflicts_with = "tol", allow_hyphen_values = true)]
    pub step: Option<f64>,
    /// Adaptive Dormand–Prince tolerance (absolute and relative).
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Output cadence.
    #[arg(long, allow_hyphen_values = true)]
    pub sample_every: Option<f64>,
    /// Locate the first sign change of the deviation-curve curvature.
    #[arg(long)]
    pub t0: bool,
    /// Search window for `--t0`.
    #[arg(long, allow_hyphen_values = true)]
    pub t0_max: Option<f64>,
    /// Threshold the located root is compared against.
    #[arg(long, allow_hyphen_values = true)]
    pub t0_crit: Option<f64>,
    /// `A:B:STEP` (inclusive) or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid_rho: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid_beta: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file using the flag names as keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const FILE_KEYS: &[&str] = &[
    "sigma",
    "rho",
    "beta",
    "x0",
    "y0",
    "z0",
    "anchor",
    "xi10",
    "xi20",
    "t-end",
    "step",
    "tol",
    "sample-every",
    "t0",
    "t0-max",
    "t0-crit",
    "grid-sigma",
    "grid-rho",
    "grid-beta",
    "format",
    "out",
];

/// Parsed config file. Blank lines and `#` comments are ignored; keys may use
/// `-` or `_`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
            let key = key.trim().replace('_', "-");
            if !FILE_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key {key:?}", n + 1)));
            }
            if values.insert(key.clone(), value.trim().to_owned()).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key {key:?}", n + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text)
    }

    fn get<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>, CliError> {
        self.values
            .get(key)
            .map(|v| parse(v).ok_or_else(|| CliError::Usage(format!("config key {key}: invalid value {v:?}"))))
            .transpose()
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key, |v| v.parse().ok())
    }

    fn string(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    fn enum_value<T: ValueEnum>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key, |v| T::from_str(v, true).ok())
    }

    fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.get(key, |v| match v {
            "true" | "yes" | "1" => Some(true),
            "false" | "no" | "0" => Some(false),
            _ => None,
        })
    }
}

impl Options {
    /// Fills every flag left unset from the file.
    pub fn merge(mut self, file: &ConfigFile) -> Result<Self, CliError> {
        macro_rules! fill {
            ($($field:ident: $getter:ident($key:literal)),* $(,)?) => {
                $(if self.$field.is_none() { self.$field = file.$getter($key)?; })*
            };
        }
        fill!(
            sigma: f64("sigma"),
            rho: f64("rho"),
            beta: f64("beta"),
            x0: f64("x0"),
            y0: f64("y0"),
            z0: f64("z0"),
            anchor: enum_value("anchor"),
            xi10: f64("xi10"),
            xi20: f64("xi20"),
            t_end: f64("t-end"),
            sample_every: f64("sample-every"),
            t0_max: f64("t0-max"),
            t0_crit: f64("t0-crit"),
            format: enum_value("format"),
        );
        // an explicit flag for either integrator choice overrides the file's
        if self.step.is_none() && self.tol.is_none() {
            self.step = file.f64("step")?;
            self.tol = file.f64("tol")?;
            if self.step.is_some() && self.tol.is_some() {
                return Err(CliError::Usage("config sets both step and tol".into()));
            }
        }
        self.t0 |= file.bool("t0")?.unwrap_or(false);
        self.grid_sigma = self.grid_sigma.or_else(|| file.string("grid-sigma"));
        self.grid_rho = self.grid_rho.or_else(|| file.string("grid-rho"));
        self.grid_beta = self.grid_beta.or_else(|| file.string("grid-beta"));
        self.out = self.out.or_else(|| file.string("out").map(PathBuf::from));
        Ok(self)
    }
}

/// Parameter values of one sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis(pub Vec<f64>);

impl GridAxis {
    const MAX_POINTS: usize = 1_000_000;

    /// `A:B:STEP` with `A ≤ B`, `STEP > 0` (both ends included when `B` is
    /// reached), a comma-separated list, or a single value.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = |msg: &str| CliError::Usage(format!("grid {spec:?}: {msg}"));
        let num = |s: &str| -> Result<f64, CliError> {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(&format!("{:?} is not a finite number", s.trim())))
        };
        let values = if spec.contains(':') {
            let parts: Vec<&str> = spec.split(':').collect();
            let [a, b, step] = parts[..] else {
                return Err(bad("expected A:B:STEP"));
            };
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step <= 0.0 {
                return Err(bad("STEP must be positive"));
            }
            if b < a {
                return Err(bad("empty range"));
            }
            let n = ((b - a) / step + 1e-9).floor();
            if n >= Self::MAX_POINTS as f64 {
                return Err(bad("too many points"));
            }
            (0..=n as usize)
                .map(|k| {
                    let v = a + k as f64 * step;
                    if (v - b).abs() <= 1e-9 * step {
                        b
                    } else {
                        v
                    }
                })
                .collect()
        } else {
            spec.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(num)
                .collect::<Result<Vec<_>, _>>()?
        };
        if values.is_empty() {
            return Err(bad("empty grid"));
        }
        Ok(Self(values))
    }
}

/// Sweep points in lexicographic `(σ, ρ, β)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub sigma: Vec<f64>,
    pub rho: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.sigma.len() * self.rho.len() * self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &s in &self.sigma {
            for &r in &self.rho {
                for &b in &self.beta {
                    out.push((s, r, b));
                }
            }
        }
        out
    }
}

/// `--t0` settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T0Options {
    pub search_max: f64,
    pub critical: Option<f64>,
}

/// Fully resolved and validated settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: LorenzParams,
    pub state: LorenzState,
    pub anchor: Anchor,
    pub xi10: f64,
    pub xi20: f64,
    pub integrator: IntegratorConfig,
    pub t0: Option<T0Options>,
    pub grid: Option<Grid>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SIGMA: f64 = 10.0;
pub const DEFAULT_RHO: f64 = 28.0;
pub const DEFAULT_BETA: f64 = 8.0 / 3.0;
pub const DEFAULT_STATE: [f64; 3] = [1.0, 5.0, 10.0];
pub const DEFAULT_XI10: f64 = 1e-10;
pub const DEFAULT_XI20: f64 = 1e-9;
pub const DEFAULT_SAMPLE_EVERY: f64 = 0.01;

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be finite, got {v}")))
    }
}

impl RunConfig {
    /// Reads the config file named by `--config` (if any), merges, applies
    /// the per-command defaults and validates.
    pub fn resolve(kind: CommandKind, opts: Options) -> Result<Self, CliError> {
        let opts = match &opts.config {
            Some(path) => {
                let file = ConfigFile::load(path)?;
                opts.merge(&file)?
            }
            None => opts,
        };
        let params = LorenzParams::new(
            opts.sigma.unwrap_or(DEFAULT_SIGMA),
            opts.rho.unwrap_or(DEFAULT_RHO),
            opts.beta.unwrap_or(DEFAULT_BETA),
        )?;
        let state = LorenzState::new(
            finite("x0", opts.x0.unwrap_or(DEFAULT_STATE[0]))?,
            finite("y0", opts.y0.unwrap_or(DEFAULT_STATE[1]))?,
            finite("z0", opts.z0.unwrap_or(DEFAULT_STATE[2]))?,
        );
        let anchor = match opts.anchor.unwrap_or(AnchorArg::S0) {
            AnchorArg::S0 => Anchor::S0,
            AnchorArg::Splus => Anchor::SPlus,
            AnchorArg::Sminus => Anchor::SMinus,
            AnchorArg::Trajectory => Anchor::Trajectory(state),
        };
        let xi10 = finite("xi10", opts.xi10.unwrap_or(DEFAULT_XI10))?;
        let xi20 = finite("xi20", opts.xi20.unwrap_or(DEFAULT_XI20))?;

        let default_t_end = match kind {
            CommandKind::Trajectory => 50.0,
            _ => 5.0,
        };
        let t_end = opts.t_end.unwrap_or(default_t_end);
        let sample_every = opts.sample_every.unwrap_or(DEFAULT_SAMPLE_EVERY);
        let integrator = match (opts.step, opts.tol, kind) {
            (Some(step), _, _) => IntegratorConfig::rk4(step, t_end, sample_every),
            (None, Some(tol), _) => IntegratorConfig::adaptive(tol, t_end, sample_every),
            (None, None, CommandKind::Trajectory) => IntegratorConfig::rk4(1e-3, t_end, sample_every),
            (None, None, _) => IntegratorConfig::adaptive(1e-10, t_end, sample_every),
        };
        if matches!(kind, CommandKind::Trajectory | CommandKind::Deviation) {
            integrator.validate()?;
        }

        let t0 = if opts.t0 {
            let search_max = opts.t0_max.unwrap_or(DEFAULT_T0_SEARCH_MAX);
            if !(search_max.is_finite() && search_max > 0.0) {
                return Err(CliError::Usage(format!("--t0-max must be positive, got {search_max}")));
            }
            let critical = opts.t0_crit.map(|v| finite("t0-crit", v)).transpose()?;
            if kind == CommandKind::Deviation && anchor != Anchor::S0 {
                return Err(CliError::Usage("--t0 is defined for --anchor s0 only".into()));
            }
            Some(T0Options { search_max, critical })
        } else {
            None
        };

        let grid = if kind == CommandKind::Sweep {
            if opts.grid_sigma.is_none() && opts.grid_rho.is_none() && opts.grid_beta.is_none() {
                return Err(CliError::Usage(
                    "sweep needs at least one of --grid-sigma, --grid-rho, --grid-beta".into(),
                ));
            }
            let axis = |spec: &Option<String>, fixed: f64| -> Result<Vec<f64>, CliError> {
                match spec {
                    Some(s) => Ok(GridAxis::parse(s)?.0),
                    None => Ok(vec![fixed]),
                }
            };
            Some(Grid {
                sigma: axis(&opts.grid_sigma, params.sigma())?,
                rho: axis(&opts.grid_rho, params.rho())?,
                beta: axis(&opts.grid_beta, params.beta())?,
            })
        } else {
            None
        };

        Ok(Self {
            params,
            state,
            anchor,
            xi10,
            xi20,
            integrator,
            t0,
            grid,
            format: opts.format.unwrap_or_default(),
            out: opts.out,
        })
    }
}
