//! problem.json loading and validation for `paravolt solve`.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use paravolt_core::grid::{GridFunction, GridSpec, VectorField};
use paravolt_core::kernels::taper;
use paravolt_core::models::{clock, sample_bm, sample_fbm};
use paravolt_core::solver::InitialData;
use paravolt_core::spectral::{synthesize_decay, DyadicPartition};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(alias = "N")]
    pub n: usize,
    #[serde(alias = "L")]
    pub l: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelsConfig {
    pub phi1: String,
    #[serde(default = "zero_kernel")]
    pub phi2: String,
}

fn zero_kernel() -> String {
    "zero".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaConfig {
    pub kind: String,
    pub epsilon: f64,
}

impl SigmaConfig {
    pub fn field(&self) -> Result<VectorField> {
        Ok(match self.kind.as_str() {
            "linear" => VectorField::Linear { eps: self.epsilon },
            "sine" => VectorField::Sine { eps: self.epsilon },
            "rational" => VectorField::Rational { eps: self.epsilon },
            "tanh" => VectorField::Tanh { eps: self.epsilon },
            "zero" => VectorField::Zero,
            other => bail!(
                "unknown sigma kind `{other}` (expected linear, sine, rational, tanh, zero)"
            ),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentsConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DelaysConfig {
    #[serde(default)]
    pub r1: f64,
    #[serde(default)]
    pub r2: f64,
}

/// Initial condition: a constant, a sampled file, or the decomposed triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum U0Config {
    Constant { constant: f64 },
    File { file: String },
    Triple { triple: TripleFiles },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TripleFiles {
    pub u1: String,
    pub u2: String,
    pub usharp: String,
}

impl U0Config {
    pub fn build(&self, spec: GridSpec, rough: bool) -> Result<InitialData> {
        let read = |p: &str| -> Result<GridFunction> {
            GridFunction::read_csv(Path::new(p)).with_context(|| format!("reading u0 file {p}"))
        };
        Ok(match self {
            U0Config::Constant { constant } => {
                if rough {
                    InitialData::Triple {
                        u1: GridFunction::zeros(spec),
                        u2: GridFunction::zeros(spec),
                        usharp: GridFunction::constant(spec, *constant),
                    }
                } else {
                    InitialData::Plain(GridFunction::constant(spec, *constant))
                }
            }
            U0Config::File { file } => {
                let f = read(file)?;
                if rough {
                    InitialData::Triple {
                        u1: GridFunction::zeros(spec),
                        u2: GridFunction::zeros(spec),
                        usharp: f,
                    }
                } else {
                    InitialData::Plain(f)
                }
            }
            U0Config::Triple { triple } => {
                if !rough {
                    bail!("a triple u0 only makes sense in rough mode");
                }
                InitialData::Triple {
                    u1: read(&triple.u1)?,
                    u2: read(&triple.u2)?,
                    usharp: read(&triple.usharp)?,
                }
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    pub grid: GridConfig,
    pub kernels: KernelsConfig,
    pub sigma: SigmaConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<SigmaConfig>,
    pub noise: String,
    pub u0: U0Config,
    pub exponents: ExponentsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delays: Option<DelaysConfig>,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// end of the drift window for the clock noise in the second slot
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_clock: Option<f64>,
}

impl Config {
    pub fn noise_spec(&self) -> Result<NoiseSpec> {
        NoiseSpec::parse(&self.noise)
    }
}

/// Parsed noise spec string.
#[derive(Debug, Clone)]
pub enum NoiseSpec {
    Bm,
    Fbm { h: f64 },
    /// windowed drift indicator `clock:T=..`
    Clock { t: f64 },
    /// band-limited synthetic noise `smooth:alpha=..` (admissible for the
    /// canonical lift in rough mode)
    Smooth { alpha: f64 },
    File { path: String },
}

impl NoiseSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "bm" {
            return Ok(NoiseSpec::Bm);
        }
        if let Some(rest) = s.strip_prefix("file:") {
            return Ok(NoiseSpec::File { path: rest.to_string() });
        }
        let parse_kv = |rest: &str, key: &str| -> Result<f64> {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| anyhow!("bad noise spec `{s}` (expected {key}=<value>)"))?;
            if k.trim() != key {
                bail!("bad noise spec `{s}` (expected key `{key}`)");
            }
            v.trim().parse().map_err(|_| anyhow!("bad number in noise spec `{s}`"))
        };
        if let Some(rest) = s.strip_prefix("fbm:") {
            return Ok(NoiseSpec::Fbm { h: parse_kv(rest, "H")? });
        }
        if let Some(rest) = s.strip_prefix("clock:") {
            return Ok(NoiseSpec::Clock { t: parse_kv(rest, "T")? });
        }
        if let Some(rest) = s.strip_prefix("smooth:") {
            return Ok(NoiseSpec::Smooth { alpha: parse_kv(rest, "alpha")? });
        }
        bail!("unknown noise spec `{s}` (expected bm, fbm:H=.., clock:T=.., smooth:alpha=.., file:..)")
    }

    pub fn describe(&self) -> String {
        match self {
            NoiseSpec::Bm => "bm".into(),
            NoiseSpec::Fbm { h } => format!("fbm:H={h}"),
            NoiseSpec::Clock { t } => format!("clock:T={t}"),
            NoiseSpec::Smooth { alpha } => format!("smooth:alpha={alpha}"),
            NoiseSpec::File { path } => format!("file:{path}"),
        }
    }

    pub fn build(&self, spec: GridSpec, seed: u64) -> Result<GridFunction> {
        Ok(match self {
            NoiseSpec::Bm => sample_bm(spec, seed)?.noise,
            NoiseSpec::Fbm { h } => sample_fbm(spec, *h, seed)?.noise,
            NoiseSpec::Clock { t } => clock(spec, *t),
            NoiseSpec::Smooth { alpha } => {
                let part = DyadicPartition::build(spec)?;
                let l = spec.l();
                let chi = taper(spec, 0.1 * l, 0.375 * l, 0.5 * l)?;
                synthesize_decay(&part, *alpha, f64::INFINITY, part.j_max() - 4, seed)?.mul(&chi)?
            }
            NoiseSpec::File { path } => GridFunction::read_csv(Path::new(path))
                .with_context(|| format!("reading noise file {path}"))?,
        })
    }
}

/// Load and schema-check a problem.json: every missing required field is
/// reported, not only the first one serde happens to hit.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let required = ["grid", "kernels", "sigma", "noise", "u0", "exponents", "tol", "max_iter"];
    let missing: Vec<&str> = required
        .iter()
        .filter(|k| value.get(**k).is_none())
        .copied()
        .collect();
    if !missing.is_empty() {
        bail!("config {} is missing required fields: {}", path.display(), missing.join(", "));
    }
    let cfg: Config = serde_json::from_value(value)
        .with_context(|| format!("validating {}", path.display()))?;
    if !(cfg.tol > 0.0) {
        bail!("tol must be positive");
    }
    if cfg.max_iter == 0 {
        bail!("max_iter must be at least 1");
    }
    Ok(cfg)
}
