//! `cev-ruin`: closed forms, Monte Carlo estimation, K-sweeps, minimizing
//! paths, variational comparisons and a self-check suite for the CEV ruin
//! model, driven by CLI flags with optional config-file defaults.

use anyhow::{Context, Result};
use cev_ruin::{
    asymptotic_exponent, best_theta, bracket_variance, estimate_ruin, estimate_ruin_is,
    exact_ruin_cir, gaussian_lower_bound, most_likely_path_sampled, optimal_action,
    optimal_control_sampled, path_rng, rate_j, simulate_path_recorded, Scheme,
};
use cev_ruin_cli::config::{self, parse_k_list, PartialSettings, Settings};
use cev_ruin_cli::sweep::{self, SweepSpec};
use cev_ruin_cli::validate;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "cev-ruin",
    version,
    about = "Ruin probabilities of the CEV diffusion: closed forms, Monte Carlo, sweeps"
)]
struct Cli {
    /// Optional key = value config file supplying defaults for all flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; unset flags fall back to the config
/// file (if given), then to built-in defaults. The seed additionally honors
/// the CEV_RUIN_SEED environment variable (CLI flag wins).
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Drift coefficient mu.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Volatility coefficient sigma (> 0).
    #[arg(long)]
    sigma: Option<f64>,
    /// Volatility elasticity gamma in [1/2, 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Time horizon T (> 0).
    #[arg(long = "T", value_name = "T")]
    horizon: Option<f64>,
    /// Starting level K (> 0).
    #[arg(long = "K", value_name = "K")]
    initial_k: Option<f64>,
    /// Sampling scheme: euler_full_truncation (alias: euler), lamperti, exact_cir.
    #[arg(long)]
    scheme: Option<String>,
    /// Number of Monte Carlo paths.
    #[arg(long = "n-paths")]
    n_paths: Option<u64>,
    /// Number of time steps per path.
    #[arg(long = "n-steps")]
    n_steps: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Estimate under the tilted drift with likelihood-ratio reweighting.
    #[arg(long = "is")]
    importance_sampling: bool,
    /// Output file (subcommand-specific; see each subcommand's help).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn to_partial(&self) -> Result<PartialSettings> {
        Ok(PartialSettings {
            mu: self.mu,
            sigma: self.sigma,
            gamma: self.gamma,
            horizon: self.horizon,
            initial_k: self.initial_k,
            scheme: self
                .scheme
                .as_deref()
                .map(Scheme::from_str)
                .transpose()
                .context("parsing --scheme")?,
            n_paths: self.n_paths,
            n_steps: self.n_steps,
            seed: self.seed,
            // A boolean flag cannot distinguish "absent" from "false", so it
            // only overrides when set; config files can still enable it.
            importance_sampling: if self.importance_sampling {
                Some(true)
            } else {
                None
            },
            k_list: None,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed forms for the given parameters as JSON.
    Exact {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run one Monte Carlo estimate and print it as JSON.
    Mc {
        #[command(flatten)]
        common: CommonArgs,
        /// Also record the first N simulated paths as CSV (path_id,t,x).
        #[arg(long, value_name = "N")]
        record: Option<u64>,
        /// Where to write recorded paths (defaults to recorded_paths.csv).
        #[arg(long, value_name = "FILE")]
        record_out: Option<PathBuf>,
    },
    /// Sweep the starting level over a ladder; write CSV rows to --out and
    /// print a JSON summary (recomputed from the written file) to stdout.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated, strictly increasing levels, e.g. 1,2,4,8.
        #[arg(long = "k-list", value_name = "LIST")]
        k_list: Option<String>,
    },
    /// Emit the minimizing absorbed path as CSV (t,u) plus a JSON record of
    /// its rate evaluation. With --out the CSV goes to the file and the JSON
    /// to stdout; otherwise CSV goes to stdout and JSON to stderr.
    Path {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare the discrete least-norm control against the closed form;
    /// with --out, also write the control samples as CSV (t,w).
    Control {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the cross-module self-check suite; nonzero exit on any failure.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn resolve_settings(config_path: Option<&PathBuf>, common: &CommonArgs) -> Result<Settings> {
    let file = config_path
        .map(|p| config::load_config_file(p))
        .transpose()?;
    Ok(config::resolve(
        file.as_ref(),
        config::env_seed()?,
        &common.to_partial()?,
    ))
}

fn emit_json(value: &serde_json::Value, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .with_context(|| format!("writing JSON to {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_exact(settings: &Settings, out: Option<&PathBuf>) -> Result<()> {
    let params = settings.model()?;
    let scale = settings.scale()?;
    let exact = if params.gamma() == 0.5 {
        Some(exact_ruin_cir(&params, &scale)?)
    } else {
        None
    };
    let value = json!({
        "mu": params.mu(),
        "sigma": params.sigma(),
        "gamma": params.gamma(),
        "T": params.horizon(),
        "K": scale.initial_k(),
        "asymptotic_exponent": asymptotic_exponent(&params),
        "limit_value": -asymptotic_exponent(&params),
        "bracket_variance_at_horizon": bracket_variance(&params, params.horizon())?,
        "gaussian_lower_bound": gaussian_lower_bound(&params, &scale),
        "exact_ruin_probability": exact,
    });
    emit_json(&value, out)
}

fn cmd_mc(
    settings: &Settings,
    record: Option<u64>,
    record_out: Option<&PathBuf>,
    out: Option<&PathBuf>,
) -> Result<()> {
    let config = settings.sim_config()?;
    let estimate = if settings.importance_sampling {
        estimate_ruin_is(&config)?
    } else {
        estimate_ruin(&config)?
    };
    if let Some(n) = record {
        let n = n.min(settings.n_paths);
        let default_path = PathBuf::from("recorded_paths.csv");
        let path = record_out.unwrap_or(&default_path);
        let mut file = std::fs::File::create(path)
            .with_context(|| format!("creating path record file {}", path.display()))?;
        writeln!(file, "path_id,t,x")?;
        let dt = settings.horizon / settings.n_steps as f64;
        for path_id in 0..n {
            // Replaying the estimator's per-path stream, so recorded paths
            // are the ones the estimate actually averaged over.
            let mut rng = path_rng(settings.seed, path_id);
            let (_, nodes) = simulate_path_recorded(&config, &mut rng);
            for (i, x) in nodes.iter().enumerate() {
                writeln!(file, "{path_id},{},{x}", i as f64 * dt)?;
            }
        }
    }
    emit_json(&serde_json::to_value(&estimate)?, out)
}

fn cmd_sweep(settings: &Settings, k_list_flag: Option<&str>, out: Option<&PathBuf>) -> Result<()> {
    let k_list = match k_list_flag {
        Some(text) => parse_k_list(text)?,
        None => settings
            .k_list
            .clone()
            .context("sweep needs --k-list or a k_list config entry")?,
    };
    let out = out.context("sweep needs --out for the CSV rows")?;
    let params = settings.model()?;
    let spec = SweepSpec::new(
        params,
        k_list,
        settings.scheme,
        settings.n_steps,
        settings.n_paths,
        settings.seed,
        settings.importance_sampling,
        out.clone(),
    )?;
    let rows = sweep::run_sweep(&spec)?;
    sweep::write_csv_file(&rows, spec.output_path())?;
    // Summarize from the file just written so the summary always reflects
    // what a reader of the CSV will see.
    let text = std::fs::read_to_string(spec.output_path())
        .with_context(|| format!("re-reading sweep output {}", spec.output_path().display()))?;
    let loaded = sweep::read_csv(&text)?;
    let summary = sweep::summarize(&loaded, &params)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn cmd_path(settings: &Settings, out: Option<&PathBuf>) -> Result<()> {
    let params = settings.model()?;
    let path = most_likely_path_sampled(&params, settings.n_steps)?;
    let record = json!({
        "n_steps": settings.n_steps,
        "rate_on_path": rate_j(&path, &params),
        "asymptotic_exponent": asymptotic_exponent(&params),
        "absorption_time": path.absorption_time(),
    });
    match out {
        Some(file_path) => {
            let mut file = std::fs::File::create(file_path)
                .with_context(|| format!("creating path output {}", file_path.display()))?;
            path.write_csv(&mut file)
                .with_context(|| format!("writing path output {}", file_path.display()))?;
            println!("{}", serde_json::to_string_pretty(&record)?);
        }
        None => {
            let stdout = std::io::stdout();
            path.write_csv(&mut stdout.lock())?;
            eprintln!("{}", serde_json::to_string_pretty(&record)?);
        }
    }
    Ok(())
}

fn cmd_control(settings: &Settings, out: Option<&PathBuf>) -> Result<()> {
    let params = settings.model()?;
    let closed = asymptotic_exponent(&params);
    let (theta, action) = best_theta(&params, settings.n_steps)?;
    if let Some(path) = out {
        let control = optimal_control_sampled(&params, settings.n_steps)?;
        let mut file = std::fs::File::create(path)
            .with_context(|| format!("creating control output {}", path.display()))?;
        writeln!(file, "t,w")?;
        for (t, w) in control.grid().iter().zip(control.values()) {
            writeln!(file, "{t},{w}")?;
        }
    }
    let value = json!({
        "closed_form_exponent": closed,
        "closed_form_action": optimal_action(&params),
        "discrete_action": action,
        "best_theta": theta,
        "relative_gap": (action - closed).abs() / closed,
        "n_steps": settings.n_steps,
    });
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn cmd_validate(settings: &Settings) -> Result<bool> {
    let reports = validate::run_validate(settings.seed)?;
    let mut all_passed = true;
    for report in &reports {
        let verdict = if report.passed { "PASS" } else { "FAIL" };
        println!("[{verdict}] {}: {}", report.name, report.detail);
        all_passed &= report.passed;
    }
    Ok(all_passed)
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Exact { common } => {
            let settings = resolve_settings(cli.config.as_ref(), common)?;
            cmd_exact(&settings, common.out.as_ref())?;
        }
        Command::Mc {
            common,
            record,
            record_out,
        } => {
            let settings = resolve_settings(cli.config.as_ref(), common)?;
            cmd_mc(&settings, *record, record_out.as_ref(), common.out.as_ref())?;
        }
        Command::Sweep { common, k_list } => {
            let settings = resolve_settings(cli.config.as_ref(), common)?;
            cmd_sweep(&settings, k_list.as_deref(), common.out.as_ref())?;
        }
        Command::Path { common } => {
            let settings = resolve_settings(cli.config.as_ref(), common)?;
            cmd_path(&settings, common.out.as_ref())?;
        }
        Command::Control { common } => {
            let settings = resolve_settings(cli.config.as_ref(), common)?;
            cmd_control(&settings, common.out.as_ref())?;
        }
        Command::Validate { common } => {
            let settings = resolve_settings(cli.config.as_ref(), common)?;
            return cmd_validate(&settings);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
