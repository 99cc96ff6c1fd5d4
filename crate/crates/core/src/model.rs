//! Model parameters and closed-form quantities for the CEV ruin problem.
//!
//! The process is dX = mu X dt + sigma X^gamma dB started at X_0 = K > 0,
//! with elasticity gamma in [1/2, 1), stopped the first time it hits zero.
//! For large K the ruin probability P(tau_0 <= T) decays like
//! exp(-K^(2(1-gamma)) * I) where I is [`asymptotic_exponent`]. The variance
//! that drives everything is [`bracket_variance`], the variance of the
//! Gaussian martingale M_t = int_0^t sigma (1-gamma) e^(-(1-gamma) mu s) dB_s.
//!
//! Every closed form here has two evaluation branches: a generic one built on
//! `exp_m1`, and a small-drift expansion used when |mu| * T falls below
//! [`MU_BRANCH_THRESHOLD`]. The two agree to near machine precision at the
//! seam; [`crate::mu_seam_gap`] measures the residual disagreement.

use crate::error::{Error, Result};

/// Threshold on |mu| * T below which the small-drift series branch replaces
/// the generic `exp_m1`-based closed forms. Both branches agree to better
/// than 1e-12 relative on either side of this value.
pub const MU_BRANCH_THRESHOLD: f64 = 1e-6;

/// Which evaluation branch of a closed form to use. Normally chosen from the
/// parameters; [`crate::mu_seam_gap`] evaluates both on purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum MuBranch {
    /// `exp_m1`-based formulas, valid whenever the drift term is not tiny.
    Generic,
    /// Second-order series in the drift, exact at mu = 0.
    SmallMu,
}

/// (1 - e^(-x)) / x, extended continuously by 1 at x = 0.
///
/// The generic branch divides `-exp_m1(-x)` by x, which is accurate for any
/// x bounded away from 0; the small branch uses 1 - x/2 + x^2/6, whose
/// relative error is below 1e-18 for |x| <= 1e-6.
pub(crate) fn one_minus_exp_over(x: f64, branch: MuBranch) -> f64 {
    match branch {
        MuBranch::Generic => {
            if x == 0.0 {
                1.0
            } else {
                -f64::exp_m1(-x) / x
            }
        }
        MuBranch::SmallMu => 1.0 - x / 2.0 + x * x / 6.0,
    }
}

/// Drift, volatility, elasticity and horizon of the CEV diffusion
/// dX = mu X dt + sigma X^gamma dB on [0, T].
///
/// Constructed through [`ModelParams::new`], which enforces: mu finite,
/// sigma finite and nonzero, gamma in [1/2, 1), T finite and positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    mu: f64,
    sigma: f64,
    gamma: f64,
    horizon: f64,
}

impl ModelParams {
    /// Validates and builds a parameter set.
    pub fn new(mu: f64, sigma: f64, gamma: f64, horizon: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "mu must be finite, got {mu}"
            )));
        }
        if !sigma.is_finite() || sigma == 0.0 {
            return Err(Error::InvalidParameters(format!(
                "sigma must be finite and nonzero, got {sigma}"
            )));
        }
        if !(0.5..1.0).contains(&gamma) {
            return Err(Error::InvalidParameters(format!(
                "gamma must lie in [1/2, 1), got {gamma}"
            )));
        }
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::InvalidParameters(format!(
                "horizon T must be finite and positive, got {horizon}"
            )));
        }
        Ok(Self {
            mu,
            sigma,
            gamma,
            horizon,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Time horizon T.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// 1 - gamma: the power normalizing the initial level (K^(1-gamma)).
    pub fn norm_exponent(&self) -> f64 {
        1.0 - self.gamma
    }

    /// 2(1 - gamma): the power governing the large-deviations speed
    /// (K^(2(1-gamma))).
    pub fn speed_exponent(&self) -> f64 {
        2.0 * (1.0 - self.gamma)
    }

    /// b = (1 - gamma) mu, the decay rate of the exponential weight
    /// e^(-b t) that appears throughout the closed forms.
    pub(crate) fn decay_rate(&self) -> f64 {
        (1.0 - self.gamma) * self.mu
    }

    /// Selects the evaluation branch from |mu| * T.
    pub(crate) fn mu_branch(&self) -> MuBranch {
        if self.mu.abs() * self.horizon < MU_BRANCH_THRESHOLD {
            MuBranch::SmallMu
        } else {
            MuBranch::Generic
        }
    }
}

/// Initial level K of the diffusion, the large parameter of the asymptotics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleParams {
    initial_k: f64,
}

impl ScaleParams {
    /// Validates and builds the initial level; K must be finite and positive.
    pub fn new(initial_k: f64) -> Result<Self> {
        if !initial_k.is_finite() || initial_k <= 0.0 {
            return Err(Error::InvalidParameters(format!(
                "initial level K must be finite and positive, got {initial_k}"
            )));
        }
        Ok(Self { initial_k })
    }

    pub fn initial_k(&self) -> f64 {
        self.initial_k
    }

    /// K^(1-gamma), the normalization of the transformed process.
    pub fn norm_scale(&self, params: &ModelParams) -> f64 {
        self.initial_k.powf(params.norm_exponent())
    }

    /// K^(2(1-gamma)), the large-deviations speed.
    pub fn speed_scale(&self, params: &ModelParams) -> f64 {
        self.initial_k.powf(params.speed_exponent())
    }
}

/// Branch-parameterized core of [`bracket_variance`]; no domain checks.
pub(crate) fn bracket_variance_br(params: &ModelParams, t: f64, branch: MuBranch) -> f64 {
    let s = params.sigma();
    let g1 = params.norm_exponent();
    let x = 2.0 * params.decay_rate() * t;
    s * s * g1 * g1 * t * one_minus_exp_over(x, branch)
}

/// Variance <M>_t of the Gaussian martingale
/// M_t = int_0^t sigma (1-gamma) e^(-(1-gamma) mu s) dB_s, i.e.
///
///   <M>_t = sigma^2 (1-gamma)^2 * (1 - e^(-2(1-gamma) mu t)) / (2(1-gamma) mu),
///
/// reducing to sigma^2 (1-gamma)^2 t when mu = 0. Strictly increasing in t.
/// Errors if t is outside [0, T].
pub fn bracket_variance(params: &ModelParams, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 || t > params.horizon() {
        return Err(Error::InvalidArgument(format!(
            "time {t} outside the horizon [0, {}]",
            params.horizon()
        )));
    }
    Ok(bracket_variance_br(params, t, params.mu_branch()))
}

/// Branch-parameterized core of [`asymptotic_exponent`].
pub(crate) fn asymptotic_exponent_br(params: &ModelParams, branch: MuBranch) -> f64 {
    1.0 / (2.0 * bracket_variance_br(params, params.horizon(), branch))
}

/// The exponential decay rate I of the ruin probability:
///
///   -log P(tau_0 <= T) ~ K^(2(1-gamma)) * I,   I = 1 / (2 <M>_T).
///
/// Equivalently I = mu / (sigma^2 (1-gamma) (1 - e^(-2(1-gamma) mu T))) when
/// mu != 0, and 1 / (2 sigma^2 (1-gamma)^2 T) at mu = 0.
pub fn asymptotic_exponent(params: &ModelParams) -> f64 {
    asymptotic_exponent_br(params, params.mu_branch())
}

/// Branch-parameterized per-unit-K decay rate of the square-root case, i.e.
/// -log P(tau_0 <= T) / K = 2 mu / (sigma^2 (1 - e^(-mu T))) written in the
/// cancellation-free form 2 / (sigma^2 T * omega(mu T)) with
/// omega(x) = (1 - e^(-x)) / x.
pub(crate) fn cir_decay_rate_br(params: &ModelParams, branch: MuBranch) -> f64 {
    let s = params.sigma();
    let t = params.horizon();
    2.0 / (s * s * t * one_minus_exp_over(params.mu() * t, branch))
}

/// Exact ruin probability for the square-root case gamma = 1/2:
///
///   P(tau_0 <= T) = exp(-K * 2 mu / (sigma^2 (1 - e^(-mu T)))),
///
/// reducing to exp(-2 K / (sigma^2 T)) at mu = 0. Errors unless gamma is
/// exactly 1/2. For this case -log P / K coincides with
/// [`asymptotic_exponent`] at every K, so the asymptotics are exact.
pub fn exact_ruin_cir(params: &ModelParams, scale: &ScaleParams) -> Result<f64> {
    if params.gamma() != 0.5 {
        return Err(Error::InvalidArgument(format!(
            "exact ruin formula requires gamma = 1/2, got {}",
            params.gamma()
        )));
    }
    let rate = cir_decay_rate_br(params, params.mu_branch());
    Ok((-scale.initial_k() * rate).exp())
}

/// Branch-parameterized z-score K^(1-gamma) / sqrt(<M>_T) of the Gaussian
/// lower bound.
fn gaussian_z_br(params: &ModelParams, scale: &ScaleParams, branch: MuBranch) -> f64 {
    scale.norm_scale(params) / bracket_variance_br(params, params.horizon(), branch).sqrt()
}

/// Lower bound on the ruin probability from the event {M_T < -K^(1-gamma)}:
///
///   P(tau_0 <= T) >= Phi(-K^(1-gamma) / sqrt(<M>_T)),
///
/// where Phi is the standard normal distribution function. Underflows to 0
/// for very large K; see [`gaussian_lower_bound_log`] for that regime.
pub fn gaussian_lower_bound(params: &ModelParams, scale: &ScaleParams) -> f64 {
    normal::cdf_neg(gaussian_z_br(params, scale, params.mu_branch()))
}

pub(crate) fn gaussian_lower_bound_br(
    params: &ModelParams,
    scale: &ScaleParams,
    branch: MuBranch,
) -> f64 {
    normal::cdf_neg(gaussian_z_br(params, scale, branch))
}

/// Natural log of [`gaussian_lower_bound`], finite for any K. Uses an
/// asymptotic expansion of log Phi(-z) once z is large enough that Phi(-z)
/// underflows, so log(bound) ~ -K^(2(1-gamma)) / (2 <M>_T) is visible even
/// at K = 10^6.
pub fn gaussian_lower_bound_log(params: &ModelParams, scale: &ScaleParams) -> f64 {
    normal::ln_cdf_neg(gaussian_z_br(params, scale, params.mu_branch()))
}

pub(crate) fn gaussian_lower_bound_log_br(
    params: &ModelParams,
    scale: &ScaleParams,
    branch: MuBranch,
) -> f64 {
    normal::ln_cdf_neg(gaussian_z_br(params, scale, branch))
}

/// The coordinate change v = x^(1-gamma) that turns the CEV diffusion into a
/// unit-elasticity one. Errors if x is negative or gamma is outside [1/2, 1).
pub fn lamperti_forward(x: f64, gamma: f64) -> Result<f64> {
    check_lamperti_gamma(gamma)?;
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lamperti transform needs x >= 0, got {x}"
        )));
    }
    Ok(x.powf(1.0 - gamma))
}

/// Inverse of [`lamperti_forward`]: x = v^(1/(1-gamma)) for v >= 0.
pub fn lamperti_inverse(v: f64, gamma: f64) -> Result<f64> {
    check_lamperti_gamma(gamma)?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "inverse lamperti transform needs v >= 0, got {v}"
        )));
    }
    Ok(v.powf(1.0 / (1.0 - gamma)))
}

fn check_lamperti_gamma(gamma: f64) -> Result<()> {
    if !(0.5..1.0).contains(&gamma) {
        return Err(Error::InvalidParameters(format!(
            "gamma must lie in [1/2, 1), got {gamma}"
        )));
    }
    Ok(())
}

/// Largest relative gap between the two evaluation branches over the scalar
/// closed forms of this module (bracket variance on a time grid, exponent,
/// Gaussian lower bound, and the exact square-root-case decay rate when
/// gamma = 1/2). Used by [`crate::mu_seam_gap`].
pub(crate) fn seam_gap_scalars(params: &ModelParams, scale: &ScaleParams) -> f64 {
    let mut worst = 0.0f64;
    let mut push = |a: f64, b: f64| {
        let denom = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((a - b).abs() / denom);
    };
    let t_grid = 10;
    for j in 1..=t_grid {
        let t = params.horizon() * j as f64 / t_grid as f64;
        push(
            bracket_variance_br(params, t, MuBranch::Generic),
            bracket_variance_br(params, t, MuBranch::SmallMu),
        );
    }
    push(
        asymptotic_exponent_br(params, MuBranch::Generic),
        asymptotic_exponent_br(params, MuBranch::SmallMu),
    );
    push(
        gaussian_lower_bound_br(params, scale, MuBranch::Generic),
        gaussian_lower_bound_br(params, scale, MuBranch::SmallMu),
    );
    push(
        gaussian_lower_bound_log_br(params, scale, MuBranch::Generic),
        gaussian_lower_bound_log_br(params, scale, MuBranch::SmallMu),
    );
    if params.gamma() == 0.5 {
        push(
            cir_decay_rate_br(params, MuBranch::Generic),
            cir_decay_rate_br(params, MuBranch::SmallMu),
        );
    }
    worst
}

/// Standard normal distribution function helpers, including a log version
/// that stays finite far into the tail.
pub(crate) mod normal {
    const SQRT_2: f64 = std::f64::consts::SQRT_2;
    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

    /// Phi(-z), the upper-tail probability beyond z, accurate to a few ulp.
    pub fn cdf_neg(z: f64) -> f64 {
        0.5 * libm::erfc(z / SQRT_2)
    }

    /// log Phi(-z). Below z = 30 this is the direct log of `cdf_neg`; beyond
    /// it switches to the asymptotic series
    ///
    ///   log Phi(-z) = -z^2/2 - log(z sqrt(2 pi))
    ///                 + log(1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8),
    ///
    /// whose truncation error at z = 30 is below 1e-12 relative.
    pub fn ln_cdf_neg(z: f64) -> f64 {
        if z < 30.0 {
            cdf_neg(z).ln()
        } else {
            let r = 1.0 / (z * z);
            let series = 1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * 105.0)));
            -0.5 * z * z - z.ln() - LN_SQRT_2PI + series.ln()
        }
    }
}
