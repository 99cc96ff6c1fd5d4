//! Path-space objects: absorbed paths, steering controls, the action
//! functional whose minimum gives the ruin exponent, and the closed-form
//! minimizing path and control.
//!
//! Scaled paths u live on [0, T] with u(0) = 1 and are frozen at zero once
//! they hit it. The cost of a path is
//!
//!   J(u) = 1/(2 sigma^2) * int_0^(theta ^ T) ((u' - mu u) / u^gamma)^2 dt,
//!
//! where theta is the absorption time. Writing v = u^(1-gamma) turns the
//! integrand into ((v'/(1-gamma) - mu v))^2, which is how [`rate_j`]
//! evaluates it: the transformed form is algebraically identical on positive
//! paths, stays finite through absorption, and is exact (not just
//! convergent) on the piecewise-linear-in-v minimizer when mu = 0.
//!
//! The minimizer over paths that reach zero by T is [`most_likely_path`];
//! the control that steers it is [`optimal_control`], and the attained
//! minimum [`optimal_action`] equals the ruin exponent.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::model::{self, ModelParams, MuBranch};

/// A scaled trajectory on a strictly increasing time grid starting at 0,
/// nonnegative everywhere and frozen at zero from its first hit onward.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbedPath {
    grid: Vec<f64>,
    values: Vec<f64>,
    absorption_index: Option<usize>,
}

impl AbsorbedPath {
    /// Validates the grid/value pair and locates the absorption point.
    ///
    /// Requirements: equal lengths of at least 2, grid starting at exactly
    /// 0 and strictly increasing, all entries finite, values nonnegative,
    /// and no positive value after the first zero.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidPath(format!(
                "grid has {} points but values has {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidPath("need at least two grid points".into()));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidPath(format!(
                "grid must start at 0, got {}",
                grid[0]
            )));
        }
        for pair in grid.windows(2) {
            if !pair[1].is_finite() || pair[1] <= pair[0] {
                return Err(Error::InvalidPath(format!(
                    "grid must be strictly increasing and finite, got {} after {}",
                    pair[1], pair[0]
                )));
            }
        }
        let mut absorption_index = None;
        for (i, &u) in values.iter().enumerate() {
            if !u.is_finite() || u < 0.0 {
                return Err(Error::InvalidPath(format!(
                    "values must be finite and nonnegative, got {u} at index {i}"
                )));
            }
            match absorption_index {
                None if u == 0.0 => absorption_index = Some(i),
                Some(z) if u > 0.0 => {
                    return Err(Error::InvalidPath(format!(
                        "path hits zero at index {z} but is positive again at index {i}"
                    )));
                }
                _ => {}
            }
        }
        Ok(Self {
            grid,
            values,
            absorption_index,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Final grid time.
    pub fn horizon(&self) -> f64 {
        *self.grid.last().expect("non-empty by construction")
    }

    /// Index of the first zero value, if the path is absorbed.
    pub fn absorption_index(&self) -> Option<usize> {
        self.absorption_index
    }

    /// Grid time of the first zero value, if the path is absorbed.
    pub fn absorption_time(&self) -> Option<f64> {
        self.absorption_index.map(|i| self.grid[i])
    }

    pub fn is_absorbed(&self) -> bool {
        self.absorption_index.is_some()
    }

    /// Writes the path as CSV with header `t,u`, one row per grid point,
    /// LF line endings, and shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "t,u")?;
        for (t, u) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{t},{u}")?;
        }
        Ok(())
    }
}

/// A square-integrable steering control sampled on a strictly increasing
/// grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl ControlFunction {
    /// Validates the grid/value pair: equal lengths of at least 2, grid
    /// starting at 0 and strictly increasing, everything finite.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidPath(format!(
                "grid has {} points but values has {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidPath("need at least two grid points".into()));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidPath(format!(
                "grid must start at 0, got {}",
                grid[0]
            )));
        }
        for pair in grid.windows(2) {
            if !pair[1].is_finite() || pair[1] <= pair[0] {
                return Err(Error::InvalidPath(format!(
                    "grid must be strictly increasing and finite, got {} after {}",
                    pair[1], pair[0]
                )));
            }
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPath(format!(
                "control values must be finite, got {bad}"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Action of a discretized path under the trapezoid-in-the-transformed-
/// coordinate rule described in the module docs. Returns `f64::INFINITY`
/// for paths that do not start at 1; segments frozen at zero contribute
/// nothing, so absorbed paths are integrated exactly up to absorption.
pub fn rate_j(path: &AbsorbedPath, params: &ModelParams) -> f64 {
    if path.values()[0] != 1.0 {
        return f64::INFINITY;
    }
    let g1 = params.norm_exponent();
    let mu = params.mu();
    let sigma = params.sigma();
    let grid = path.grid();
    let values = path.values();
    let mut acc = 0.0;
    let mut v_lo = transform(values[0], g1);
    for i in 0..grid.len() - 1 {
        let dt = grid[i + 1] - grid[i];
        let v_hi = transform(values[i + 1], g1);
        let q = (v_hi - v_lo) / (dt * g1) - mu * 0.5 * (v_lo + v_hi);
        acc += q * q * dt;
        v_lo = v_hi;
    }
    acc / (2.0 * sigma * sigma)
}

/// Variant of [`rate_j`] that regularizes steep descents: the raw integrand
/// is accumulated only until the path first drops to `floor` or below, and
/// the remaining time is charged the cost of holding level `floor`,
/// mu^2 floor^(2(1-gamma)) (T - tau_floor) / (2 sigma^2). As floor -> 0
/// this recovers [`rate_j`]. Non-positive floors delegate to [`rate_j`].
pub fn rate_j_floored(path: &AbsorbedPath, params: &ModelParams, floor: f64) -> f64 {
    if !floor.is_finite() || floor <= 0.0 {
        return rate_j(path, params);
    }
    if path.values()[0] != 1.0 {
        return f64::INFINITY;
    }
    let g1 = params.norm_exponent();
    let mu = params.mu();
    let sigma = params.sigma();
    let grid = path.grid();
    let values = path.values();
    let crossing = values.iter().position(|&u| u <= floor);
    let stop = crossing.unwrap_or(grid.len() - 1).min(grid.len() - 1);
    let mut acc = 0.0;
    for i in 0..stop {
        let dt = grid[i + 1] - grid[i];
        let v_lo = transform(values[i], g1);
        let v_hi = transform(values[i + 1], g1);
        let q = (v_hi - v_lo) / (dt * g1) - mu * 0.5 * (v_lo + v_hi);
        acc += q * q * dt;
    }
    if crossing.is_some() {
        let held = path.horizon() - grid[stop];
        acc += mu * mu * floor.powf(2.0 * g1) * held;
    }
    acc / (2.0 * sigma * sigma)
}

fn transform(u: f64, g1: f64) -> f64 {
    if g1 == 0.5 {
        u.sqrt()
    } else {
        u.powf(g1)
    }
}

/// Transformed minimizer v*(t) = e^(-bt) (T-t) omega(2b(T-t)) /
/// (T omega(2bT)) with b = (1-gamma) mu and omega(x) = (1-e^(-x))/x.
/// Exactly 1 at t = 0 and exactly 0 at t = T, strictly decreasing between.
fn v_star_br(params: &ModelParams, t: f64, branch: MuBranch) -> f64 {
    let b = (1.0 - params.gamma()) * params.mu();
    let remaining = params.horizon() - t;
    let num = remaining * model::one_minus_exp_over(2.0 * b * remaining, branch);
    let den = params.horizon() * model::one_minus_exp_over(2.0 * b * params.horizon(), branch);
    (-b * t).exp() * num / den
}

/// Value at time t of the minimizing (most likely ruin) path
/// u*(t) = v*(t)^(1/(1-gamma)); see [`rate_j`] for the functional it
/// minimizes over paths absorbed by T. Errors if t is outside [0, T].
pub fn most_likely_path(params: &ModelParams, t: f64) -> Result<f64> {
    check_time(params, t)?;
    let v = v_star_br(params, t, params.mu_branch());
    Ok(inverse_transform(v, params.norm_exponent()))
}

fn inverse_transform(v: f64, g1: f64) -> f64 {
    v.powf(1.0 / g1)
}

/// The minimizing path sampled on a uniform grid with `n_steps` intervals.
pub fn most_likely_path_sampled(params: &ModelParams, n_steps: usize) -> Result<AbsorbedPath> {
    if n_steps < 1 {
        return Err(Error::InvalidArgument("need at least one interval".into()));
    }
    let branch = params.mu_branch();
    let t_end = params.horizon();
    let g1 = params.norm_exponent();
    let n = n_steps;
    let mut grid = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = t_end * i as f64 / n as f64;
        grid.push(t);
        values.push(inverse_transform(v_star_br(params, t, branch), g1));
    }
    AbsorbedPath::new(grid, values)
}

fn control_amplitude_br(params: &ModelParams, branch: MuBranch) -> f64 {
    let b = (1.0 - params.gamma()) * params.mu();
    let t_end = params.horizon();
    -1.0 / (params.sigma()
        * params.norm_exponent()
        * t_end
        * model::one_minus_exp_over(2.0 * b * t_end, branch))
}

fn w_star_br(params: &ModelParams, t: f64, branch: MuBranch) -> f64 {
    let b = (1.0 - params.gamma()) * params.mu();
    control_amplitude_br(params, branch) * (-b * t).exp()
}

/// Value at time t of the control steering the minimizing path:
/// w*(t) = -e^(-bt) / (sigma (1-gamma) T omega(2bT)). It satisfies the
/// steering constraint int_0^T e^(-bs) w*(s) ds = -1/(sigma (1-gamma)) and
/// minimizes (1/2) int w^2 among all controls doing so. Errors if t is
/// outside [0, T].
pub fn optimal_control(params: &ModelParams, t: f64) -> Result<f64> {
    check_time(params, t)?;
    Ok(w_star_br(params, t, params.mu_branch()))
}

/// The minimizing control sampled on a uniform grid with `n_steps`
/// intervals.
pub fn optimal_control_sampled(params: &ModelParams, n_steps: usize) -> Result<ControlFunction> {
    if n_steps < 1 {
        return Err(Error::InvalidArgument("need at least one interval".into()));
    }
    let branch = params.mu_branch();
    let t_end = params.horizon();
    let n = n_steps;
    let mut grid = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = t_end * i as f64 / n as f64;
        grid.push(t);
        values.push(w_star_br(params, t, branch));
    }
    ControlFunction::new(grid, values)
}

/// The attained minimum (1/2) int_0^T w*(t)^2 dt in closed form:
/// mu / (sigma^2 (1-gamma) (1 - e^(-2(1-gamma) mu T))), with its small-drift
/// limit 1 / (2 sigma^2 (1-gamma)^2 T). Coincides with
/// [`model::asymptotic_exponent`] through a different algebraic route.
pub fn optimal_action(params: &ModelParams) -> f64 {
    optimal_action_br(params, params.mu_branch())
}

pub(crate) fn optimal_action_br(params: &ModelParams, branch: MuBranch) -> f64 {
    let g1 = params.norm_exponent();
    let s2 = params.sigma() * params.sigma();
    let t_end = params.horizon();
    match branch {
        MuBranch::Generic => {
            let span = -f64::exp_m1(-2.0 * g1 * params.mu() * t_end);
            params.mu() / (s2 * g1 * span)
        }
        MuBranch::SmallMu => {
            let omega =
                model::one_minus_exp_over(2.0 * g1 * params.mu() * t_end, MuBranch::SmallMu);
            1.0 / (2.0 * s2 * g1 * g1 * t_end * omega)
        }
    }
}

fn check_time(params: &ModelParams, t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 || t > params.horizon() {
        return Err(Error::InvalidArgument(format!(
            "time {t} outside the horizon [0, {}]",
            params.horizon()
        )));
    }
    Ok(())
}

/// Largest relative gap between the two evaluation branches over the path
/// quantities (minimizing path and control on a time grid, attained
/// action). Used by [`crate::mu_seam_gap`].
pub(crate) fn seam_gap_paths(params: &ModelParams) -> f64 {
    let mut worst = 0.0f64;
    let mut push = |a: f64, b: f64| {
        let denom = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((a - b).abs() / denom);
    };
    let t_grid = 10;
    for j in 0..=t_grid {
        let t = params.horizon() * j as f64 / t_grid as f64;
        push(
            v_star_br(params, t, MuBranch::Generic),
            v_star_br(params, t, MuBranch::SmallMu),
        );
        push(
            w_star_br(params, t, MuBranch::Generic),
            w_star_br(params, t, MuBranch::SmallMu),
        );
    }
    push(
        optimal_action_br(params, MuBranch::Generic),
        optimal_action_br(params, MuBranch::SmallMu),
    );
    worst
}
