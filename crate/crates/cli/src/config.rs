//! Run settings assembled from defaults, an optional key = value config
//! file, the `CEV_RUIN_SEED` environment variable, and CLI flags.
//!
//! Precedence, highest first: CLI flag, environment (seed only), config
//! file, built-in default. Keys mirror the library's field names:
//! `mu`, `sigma`, `gamma`, `horizon`, `initial_k`, `scheme`, `n_paths`,
//! `n_steps`, `seed`, `importance_sampling`, and `k_list` (comma-separated,
//! sweeps only). Lines starting with `#` and blank lines are ignored.

use anyhow::{bail, Context, Result};
use cev_ruin::{ModelParams, ScaleParams, Scheme, SimConfig};
use std::path::Path;
use std::str::FromStr;

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub horizon: f64,
    pub initial_k: f64,
    pub scheme: Scheme,
    pub n_paths: u64,
    pub n_steps: usize,
    pub seed: u64,
    pub importance_sampling: bool,
    pub k_list: Option<Vec<f64>>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            mu: 0.0,
            sigma: 1.0,
            gamma: 0.5,
            horizon: 1.0,
            initial_k: 1.0,
            scheme: Scheme::Lamperti,
            n_paths: 10_000,
            n_steps: 1_000,
            seed: 1,
            importance_sampling: false,
            k_list: None,
        }
    }
}

impl Settings {
    /// Model parameters for this invocation (validated by the library).
    pub fn model(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(
            self.mu,
            self.sigma,
            self.gamma,
            self.horizon,
        )?)
    }

    /// Starting-level scale for this invocation.
    pub fn scale(&self) -> Result<ScaleParams> {
        Ok(ScaleParams::new(self.initial_k)?)
    }

    /// Full simulation configuration for single-estimate commands.
    pub fn sim_config(&self) -> Result<SimConfig> {
        Ok(SimConfig::new(
            self.model()?,
            self.scale()?,
            self.scheme,
            self.n_steps,
            self.n_paths,
            self.seed,
            self.importance_sampling,
        )?)
    }
}

/// A subset of settings, each field optional; later layers override earlier
/// ones field by field.
#[derive(Debug, Clone, Default)]
pub struct PartialSettings {
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    pub horizon: Option<f64>,
    pub initial_k: Option<f64>,
    pub scheme: Option<Scheme>,
    pub n_paths: Option<u64>,
    pub n_steps: Option<usize>,
    pub seed: Option<u64>,
    pub importance_sampling: Option<bool>,
    pub k_list: Option<Vec<f64>>,
}

impl PartialSettings {
    /// Apply this layer on top of `base`, field by field.
    fn apply(&self, base: &mut Settings) {
        if let Some(v) = self.mu {
            base.mu = v;
        }
        if let Some(v) = self.sigma {
            base.sigma = v;
        }
        if let Some(v) = self.gamma {
            base.gamma = v;
        }
        if let Some(v) = self.horizon {
            base.horizon = v;
        }
        if let Some(v) = self.initial_k {
            base.initial_k = v;
        }
        if let Some(v) = self.scheme {
            base.scheme = v;
        }
        if let Some(v) = self.n_paths {
            base.n_paths = v;
        }
        if let Some(v) = self.n_steps {
            base.n_steps = v;
        }
        if let Some(v) = self.seed {
            base.seed = v;
        }
        if let Some(v) = self.importance_sampling {
            base.importance_sampling = v;
        }
        if let Some(v) = &self.k_list {
            base.k_list = Some(v.clone());
        }
    }
}

/// Parse a comma-separated list of levels, e.g. `1,2,4,8`.
pub fn parse_k_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|item| {
            item.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid level {item:?} in k_list"))
        })
        .collect()
}

fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => bail!("expected a boolean, got {other:?}"),
    }
}

/// Parse the text of a config file into an override layer.
pub fn parse_config_text(text: &str) -> Result<PartialSettings> {
    let mut out = PartialSettings::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("line {}: expected key = value, got {line:?}", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let context = || format!("line {}: bad value for {key}", lineno + 1);
        match key {
            "mu" => out.mu = Some(value.parse().with_context(context)?),
            "sigma" => out.sigma = Some(value.parse().with_context(context)?),
            "gamma" => out.gamma = Some(value.parse().with_context(context)?),
            "horizon" => out.horizon = Some(value.parse().with_context(context)?),
            "initial_k" => out.initial_k = Some(value.parse().with_context(context)?),
            "scheme" => out.scheme = Some(Scheme::from_str(value).with_context(context)?),
            "n_paths" => out.n_paths = Some(value.parse().with_context(context)?),
            "n_steps" => out.n_steps = Some(value.parse().with_context(context)?),
            "seed" => out.seed = Some(value.parse().with_context(context)?),
            "importance_sampling" => {
                out.importance_sampling = Some(parse_bool(value).with_context(context)?)
            }
            "k_list" => out.k_list = Some(parse_k_list(value).with_context(context)?),
            other => bail!("line {}: unknown config key {other:?}", lineno + 1),
        }
    }
    Ok(out)
}

/// Load and parse a config file.
pub fn load_config_file(path: &Path) -> Result<PartialSettings> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    parse_config_text(&text).with_context(|| format!("parsing config file {}", path.display()))
}

/// Combine the layers in precedence order (lowest to highest: defaults,
/// config file, environment seed, CLI flags).
pub fn resolve(
    file: Option<&PartialSettings>,
    env_seed: Option<u64>,
    cli: &PartialSettings,
) -> Settings {
    let mut settings = Settings::default();
    if let Some(layer) = file {
        layer.apply(&mut settings);
    }
    if let Some(seed) = env_seed {
        settings.seed = seed;
    }
    cli.apply(&mut settings);
    settings
}

/// Read the seed override from the environment, if present and well formed.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var("CEV_RUIN_SEED") {
        Ok(text) => {
            let seed = text
                .parse::<u64>()
                .with_context(|| format!("CEV_RUIN_SEED must be an integer, got {text:?}"))?;
            Ok(Some(seed))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context("reading CEV_RUIN_SEED"),
    }
}
