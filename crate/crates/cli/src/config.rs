//! Run configuration: defaults, overlaid by a JSON file, overlaid by flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use relboltz::{CrossSection, PhysicsConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaModel {
    Constant,
    PowerLaw,
}

/// `sigma` block of the config file. Exponents are ignored by the constant
/// model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaFile {
    pub model: Option<SigmaModel>,
    #[serde(rename = "C")]
    pub amplitude: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

/// Config file contents; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dimension: Option<usize>,
    pub c: Option<f64>,
    pub sigma: Option<SigmaFile>,
    pub sphere_order: Option<usize>,
    pub radial_order: Option<usize>,
    pub ball_radius: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub tol_algebra: Option<f64>,
    pub tol_quadrature: Option<f64>,
    pub trials: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))
    }
}

/// Flags shared by every subcommand; each overrides the matching file key.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON config file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Spatial dimension n >= 2
    #[arg(short = 'n', long, global = true)]
    pub dimension: Option<usize>,
    /// Speed of light
    #[arg(short = 'c', long = "c", global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub sigma_model: Option<SigmaModel>,
    /// Cross-section amplitude C
    #[arg(long, global = true)]
    pub sigma_c: Option<f64>,
    /// Power-law exponent of rho
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma_a: Option<f64>,
    /// Power-law exponent of sin(theta)
    #[arg(long, global = true)]
    pub sigma_b: Option<f64>,
    #[arg(long, global = true)]
    pub sphere_order: Option<usize>,
    #[arg(long, global = true)]
    pub radial_order: Option<usize>,
    /// Outer ball radius; defaults to 8c + |p|
    #[arg(long, global = true)]
    pub ball_radius: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output path; stdout when absent
    #[arg(short = 'o', long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol_algebra: Option<f64>,
    #[arg(long, global = true)]
    pub tol_quadrature: Option<f64>,
    /// Random trials per algebraic verification suite
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaConfig {
    pub model: SigmaModel,
    #[serde(rename = "C")]
    pub amplitude: f64,
    pub a: f64,
    pub b: f64,
}

impl SigmaConfig {
    pub fn cross_section(&self) -> relboltz::Result<CrossSection> {
        match self.model {
            SigmaModel::Constant => CrossSection::constant(self.amplitude),
            SigmaModel::PowerLaw => CrossSection::power_law(self.amplitude, self.a, self.b),
        }
    }
}

/// Effective configuration, echoed into every output.
///
/// Optional orders and radius are filled by each command's own default and
/// reported next to its results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub dimension: usize,
    pub c: f64,
    pub sigma: SigmaConfig,
    pub sphere_order: Option<usize>,
    pub radial_order: Option<usize>,
    pub ball_radius: Option<f64>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub tol_algebra: f64,
    pub tol_quadrature: f64,
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dimension: 3,
            c: 1.0,
            sigma: SigmaConfig {
                model: SigmaModel::Constant,
                amplitude: 1.0,
                a: 0.0,
                b: 0.0,
            },
            sphere_order: None,
            radial_order: None,
            ball_radius: None,
            seed: relboltz::verification::VerifySettings::default().seed,
            format: Format::Json,
            out: None,
            tol_algebra: PhysicsConfig::DEFAULT_TOL_ALGEBRA,
            tol_quadrature: PhysicsConfig::DEFAULT_TOL_QUADRATURE,
            trials: relboltz::verification::VerifySettings::default().trials,
        }
    }
}

impl RunConfig {
    pub fn resolve(args: &ConfigArgs) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut cfg = RunConfig::default();
        cfg.overlay_file(file);
        cfg.overlay_args(args);
        cfg.validate()?;
        Ok(cfg)
    }

    fn overlay_file(&mut self, f: FileConfig) {
        set(&mut self.dimension, f.dimension);
        set(&mut self.c, f.c);
        if let Some(s) = f.sigma {
            set(&mut self.sigma.model, s.model);
            set(&mut self.sigma.amplitude, s.amplitude);
            set(&mut self.sigma.a, s.a);
            set(&mut self.sigma.b, s.b);
        }
        self.sphere_order = f.sphere_order.or(self.sphere_order);
        self.radial_order = f.radial_order.or(self.radial_order);
        self.ball_radius = f.ball_radius.or(self.ball_radius);
        set(&mut self.seed, f.seed);
        set(&mut self.format, f.format);
        self.out = f.out.or(self.out.take());
        set(&mut self.tol_algebra, f.tol_algebra);
        set(&mut self.tol_quadrature, f.tol_quadrature);
        set(&mut self.trials, f.trials);
    }

    fn overlay_args(&mut self, a: &ConfigArgs) {
        set(&mut self.dimension, a.dimension);
        set(&mut self.c, a.c);
        set(&mut self.sigma.model, a.sigma_model);
        set(&mut self.sigma.amplitude, a.sigma_c);
        set(&mut self.sigma.a, a.sigma_a);
        set(&mut self.sigma.b, a.sigma_b);
        self.sphere_order = a.sphere_order.or(self.sphere_order);
        self.radial_order = a.radial_order.or(self.radial_order);
        self.ball_radius = a.ball_radius.or(self.ball_radius);
        set(&mut self.seed, a.seed);
        set(&mut self.format, a.format);
        self.out = a.out.clone().or(self.out.take());
        set(&mut self.tol_algebra, a.tol_algebra);
        set(&mut self.tol_quadrature, a.tol_quadrature);
        set(&mut self.trials, a.trials);
    }

    /// Checks every field against the library preconditions before any
    /// computation starts.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.physics()?;
        self.sigma.cross_section()?;
        if self.sphere_order == Some(0) {
            bail!("sphere_order must be at least 1");
        }
        if self.radial_order == Some(0) {
            bail!("radial_order must be at least 1");
        }
        if let Some(r) = self.ball_radius {
            if !(r.is_finite() && r > 0.0) {
                bail!("ball_radius must be positive and finite, got {r}");
            }
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        Ok(())
    }

    pub fn physics(&self) -> relboltz::Result<PhysicsConfig> {
        PhysicsConfig::with_tolerances(
            self.dimension,
            self.c,
            self.tol_algebra,
            self.tol_quadrature,
        )
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Comma-separated vector of reals, e.g. `0.3,0,-0.2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(pub Vec<f64>);

impl FromStr for Vector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Vector)
    }
}
