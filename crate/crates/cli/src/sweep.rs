//! K-sweeps: estimate the ruin probability over an increasing ladder of
//! starting levels and emit tidy CSV plus a JSON summary of how fast the
//! normalized log probability approaches its predicted limit.

use anyhow::{bail, Context, Result};
use cev_ruin::{
    asymptotic_exponent, estimate_ruin, estimate_ruin_is, gaussian_lower_bound, ModelParams,
    ScaleParams, Scheme, SimConfig,
};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Exact column header of the sweep CSV output.
pub const SWEEP_CSV_HEADER: &str = "K,p_hat,stderr,normalized_log,limit_value,gaussian_lb,scheme";

/// One sweep: a ladder of starting levels under fixed model parameters.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    params: ModelParams,
    k_list: Vec<f64>,
    scheme: Scheme,
    n_steps: usize,
    n_paths: u64,
    seed: u64,
    importance_sampling: bool,
    output_path: PathBuf,
}

impl SweepSpec {
    /// Validates the ladder: nonempty, strictly increasing, all positive.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        params: ModelParams,
        k_list: Vec<f64>,
        scheme: Scheme,
        n_steps: usize,
        n_paths: u64,
        seed: u64,
        importance_sampling: bool,
        output_path: PathBuf,
    ) -> Result<Self> {
        if k_list.is_empty() {
            bail!("k_list must not be empty");
        }
        if k_list[0] <= 0.0 || !k_list[0].is_finite() {
            bail!(
                "k_list entries must be positive and finite, got {}",
                k_list[0]
            );
        }
        for pair in k_list.windows(2) {
            if !pair[1].is_finite() || pair[1] <= pair[0] {
                bail!(
                    "k_list must be strictly increasing, got {} after {}",
                    pair[1],
                    pair[0]
                );
            }
        }
        Ok(Self {
            params,
            k_list,
            scheme,
            n_steps,
            n_paths,
            seed,
            importance_sampling,
            output_path,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn k_list(&self) -> &[f64] {
        &self.k_list
    }

    pub fn output_path(&self) -> &Path {
        &self.output_path
    }
}

/// One estimated ladder rung. `normalized_log` is `ln(p_hat)` divided by
/// the speed factor K^(2(1-gamma)); it is undefined (and flagged) when the
/// estimate is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: f64,
    pub p_hat: f64,
    pub stderr: f64,
    pub normalized_log: Option<f64>,
    pub limit_value: f64,
    pub gaussian_lb: f64,
    pub scheme: Scheme,
}

/// Run the sweep: one estimate per level, sequential over the ladder.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let limit_value = -asymptotic_exponent(&spec.params);
    spec.k_list
        .iter()
        .map(|&k| {
            let scale = ScaleParams::new(k)?;
            let config = SimConfig::new(
                spec.params,
                scale,
                spec.scheme,
                spec.n_steps,
                spec.n_paths,
                spec.seed,
                spec.importance_sampling,
            )
            .with_context(|| format!("invalid configuration at K = {k}"))?;
            let estimate = if spec.importance_sampling {
                estimate_ruin_is(&config)?
            } else {
                estimate_ruin(&config)?
            };
            let normalized_log = if estimate.p_hat > 0.0 {
                Some(estimate.p_hat.ln() / scale.speed_scale(&spec.params))
            } else {
                None
            };
            Ok(SweepRow {
                k,
                p_hat: estimate.p_hat,
                stderr: estimate.stderr,
                normalized_log,
                limit_value,
                gaussian_lb: gaussian_lower_bound(&spec.params, &scale),
                scheme: spec.scheme,
            })
        })
        .collect()
}

/// Serialize rows as CSV (UTF-8, LF). Zero-probability rows carry `nan`
/// in the normalized_log column. Floats use the shortest representation
/// that parses back to the same value, so emitted files round-trip.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        let normalized = match row.normalized_log {
            Some(v) => v.to_string(),
            None => "nan".to_string(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.k, row.p_hat, row.stderr, normalized, row.limit_value, row.gaussian_lb, row.scheme
        )?;
    }
    Ok(())
}

/// Write rows to the sweep's configured output path; failures name the path.
pub fn write_csv_file(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating sweep output file {}", path.display()))?;
    write_csv(rows, &mut file)
        .with_context(|| format!("writing sweep output to {}", path.display()))?;
    Ok(())
}

/// Parse CSV text produced by [`write_csv`] back into rows.
pub fn read_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    let header = lines.next().context("empty sweep file")?;
    if header != SWEEP_CSV_HEADER {
        bail!("unexpected sweep header {header:?}");
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                bail!("row {}: expected 7 fields, got {}", i + 2, fields.len());
            }
            let float = |text: &str, name: &str| -> Result<f64> {
                text.parse::<f64>()
                    .with_context(|| format!("row {}: bad {name} value {text:?}", i + 2))
            };
            let normalized_log = if fields[3] == "nan" {
                None
            } else {
                Some(float(fields[3], "normalized_log")?)
            };
            Ok(SweepRow {
                k: float(fields[0], "K")?,
                p_hat: float(fields[1], "p_hat")?,
                stderr: float(fields[2], "stderr")?,
                normalized_log,
                limit_value: float(fields[4], "limit_value")?,
                gaussian_lb: float(fields[5], "gaussian_lb")?,
                scheme: Scheme::from_str(fields[6])
                    .with_context(|| format!("row {}: bad scheme tag", i + 2))?,
            })
        })
        .collect()
}

/// JSON summary of a sweep. `limit_value` is recomputed from the model
/// parameters at summary time, never copied from the file, and
/// `max_abs_gap_top_half` is the worst |normalized_log - limit_value| over
/// the upper half of the ladder (null if every such row is flagged).
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub k_min: f64,
    pub k_max: f64,
    pub limit_value: f64,
    pub max_abs_gap_top_half: Option<f64>,
    pub flagged_rows: usize,
}

pub fn summarize(rows: &[SweepRow], params: &ModelParams) -> Result<SweepSummary> {
    if rows.is_empty() {
        bail!("cannot summarize an empty sweep");
    }
    let limit_value = -asymptotic_exponent(params);
    let top_half = &rows[rows.len() / 2..];
    let max_abs_gap_top_half = top_half
        .iter()
        .filter_map(|row| row.normalized_log.map(|nl| (nl - limit_value).abs()))
        .fold(None, |acc: Option<f64>, gap| {
            Some(acc.map_or(gap, |a| a.max(gap)))
        });
    Ok(SweepSummary {
        rows: rows.len(),
        k_min: rows[0].k,
        k_max: rows[rows.len() - 1].k,
        limit_value,
        max_abs_gap_top_half,
        flagged_rows: rows.iter().filter(|r| r.normalized_log.is_none()).count(),
    })
}
