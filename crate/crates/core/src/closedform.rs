//! Analytic secure-connection-probability expressions.
//!
//! The heterogeneous-Rician model approximates the sum of eavesdropper
//! channel power gains with a moment-matched gamma surrogate, collapses the
//! product of per-hop Marcum Q-functions into a single equivalent Marcum
//! Q-function by least-squares fitting of its first parameter, and composes
//! both into a per-layer exponent
//!
//! ```text
//! P_l = exp[ -kappa_l (Σ_i (K_i + 1) d_i^alpha)^(2/alpha) ]
//! kappa_l = pi lambda_l Γ(m_l + 2/alpha)/Γ(m_l) (2 theta_l / a_hat_l²)^(2/alpha)
//! ```
//!
//! Three Rayleigh-family baselines share the same outer form with different
//! coefficients and are provided for comparison. All exponent arithmetic
//! runs in log space; raw `d^alpha` sums over satellite-scale distances in
//! meters would otherwise be fragile.

use crate::error::{Error, Result};
use crate::model::{Hop, Layer, Scenario};
use crate::specfun::{ln_gamma_raw, q1};

/// Number of abscissas in the least-squares fit grid.
pub const FIT_GRID_POINTS: usize = 200;
/// Lower end of the fit grid (an SNR threshold, dimensionless).
pub const FIT_GRID_MIN: f64 = 1e-9;
/// Upper end of the fit grid.
pub const FIT_GRID_MAX: f64 = 1e-2;
/// Absolute tolerance of the one-dimensional fit for `a_hat`.
pub const FIT_TOLERANCE: f64 = 1e-4;

/// Moment-matched gamma surrogate for the sum of eavesdropper channel power
/// gains in one layer: `shape = (E[Y])²/Var(Y)`, `scale = Var(Y)/E[Y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSurrogate {
    pub shape: f64,
    pub scale: f64,
}

/// The single equivalent Marcum Q-function replacing the per-hop product:
/// `Q1(a_hat, sqrt(b_hat_sq_coeff * x))`, where `b_hat_sq_coeff` is the
/// exact sum of the per-hop `b_i²` coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarcumCollapse {
    pub a_hat: f64,
    pub b_hat_sq_coeff: f64,
    /// The minimizer landed on the upper search bracket; the fit regime is
    /// suspect and the result should be treated as a diagnostic.
    pub hit_upper_bracket: bool,
}

/// Per-layer closed-form result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerScp {
    pub kappa: f64,
    pub scp: f64,
}

/// The four closed-form models this crate evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScpModel {
    Rician,
    RayleighMulti,
    RayleighSingle,
    Erlang,
}

impl ScpModel {
    pub const ALL: [ScpModel; 4] = [
        ScpModel::Rician,
        ScpModel::RayleighMulti,
        ScpModel::RayleighSingle,
        ScpModel::Erlang,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScpModel::Rician => "rician",
            ScpModel::RayleighMulti => "rayleigh_multi",
            ScpModel::RayleighSingle => "rayleigh_single",
            ScpModel::Erlang => "erlang",
        }
    }
}

/// The logarithmically spaced abscissas used for the `a_hat` fit.
pub fn fit_grid() -> Vec<f64> {
    log_spaced_grid(FIT_GRID_POINTS)
}

fn log_spaced_grid(points: usize) -> Vec<f64> {
    let ln_lo = FIT_GRID_MIN.ln();
    let ln_hi = FIT_GRID_MAX.ln();
    (0..points)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn log_sum_exp(ln_terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = ln_terms.collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn check_hops(hops: &[Hop], layer: &Layer) -> Result<()> {
    if hops.is_empty() {
        return Err(Error::Domain("hop list is empty".into()));
    }
    for hop in hops {
        if hop.layer_id != layer.id {
            return Err(Error::Domain(format!(
                "hop belongs to layer `{}`, expected `{}`",
                hop.layer_id, layer.id
            )));
        }
    }
    Ok(())
}

/// Moment-matches the gamma surrogate for one layer's hops.
///
/// With unit-mean hop gains, `E[Y] = I` and
/// `Var(Y) = Σ (2K_i + 1)/(K_i + 1)²`.
pub fn moment_match(hops: &[Hop]) -> Result<GammaSurrogate> {
    if hops.is_empty() {
        return Err(Error::Domain("moment_match on empty hop list".into()));
    }
    if let Some(other) = hops.iter().find(|h| h.layer_id != hops[0].layer_id) {
        return Err(Error::Domain(format!(
            "moment_match mixes layers `{}` and `{}`",
            hops[0].layer_id, other.layer_id
        )));
    }
    let count = hops.len() as f64;
    let variance: f64 = hops
        .iter()
        .map(|h| (2.0 * h.k_factor + 1.0) / ((h.k_factor + 1.0) * (h.k_factor + 1.0)))
        .sum();
    Ok(GammaSurrogate {
        shape: count * count / variance,
        scale: variance / count,
    })
}

/// Per-hop `b_i²` coefficient: `2 (K_i + 1) n0 d_i^alpha / P`.
fn b_sq_coeffs(hops: &[Hop], layer: &Layer) -> Vec<f64> {
    hops.iter()
        .map(|h| {
            2.0 * (h.k_factor + 1.0) * layer.noise_power * h.distance.powf(layer.alpha)
                / layer.tx_power
        })
        .collect()
}

/// Exact product of the per-hop Marcum Q-functions at each grid abscissa.
pub fn marcum_product_on_grid(hops: &[Hop], layer: &Layer, grid: &[f64]) -> Result<Vec<f64>> {
    check_hops(hops, layer)?;
    let b_sq = b_sq_coeffs(hops, layer);
    let a: Vec<f64> = hops.iter().map(|h| (2.0 * h.k_factor).sqrt()).collect();
    Ok(grid
        .iter()
        .map(|&x| {
            a.iter()
                .zip(&b_sq)
                .map(|(&ai, &bi)| q1(ai, (bi * x).sqrt()))
                .product()
        })
        .collect())
}

/// Collapsed single Marcum Q-function at each grid abscissa.
pub fn marcum_collapsed_on_grid(collapse: &MarcumCollapse, grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&x| q1(collapse.a_hat, (collapse.b_hat_sq_coeff * x).sqrt()))
        .collect()
}

/// Fits the equivalent Marcum parameter `a_hat` for one layer's hops.
///
/// `b_hat²` is fixed to the exact sum of the per-hop coefficients; `a_hat`
/// minimizes the summed squared deviation between the exact product and the
/// collapsed curve over the fit grid, by golden-section search on
/// `[0, 3 max_i sqrt(2 K_i)]` refined to [`FIT_TOLERANCE`].
pub fn fit_marcum_a_hat(hops: &[Hop], layer: &Layer) -> Result<MarcumCollapse> {
    fit_with_grid(hops, layer, &fit_grid())
}

fn fit_with_grid(hops: &[Hop], layer: &Layer, grid: &[f64]) -> Result<MarcumCollapse> {
    check_hops(hops, layer)?;
    let b_sq = b_sq_coeffs(hops, layer);
    let b_hat_sq_coeff: f64 = b_sq.iter().sum();
    let a_max = hops
        .iter()
        .map(|h| (2.0 * h.k_factor).sqrt())
        .fold(0.0, f64::max);
    let upper = 3.0 * a_max;
    if upper == 0.0 {
        // All-Rayleigh route: the product is exactly exp(-b_hat² x / 2).
        return Ok(MarcumCollapse {
            a_hat: 0.0,
            b_hat_sq_coeff,
            hit_upper_bracket: false,
        });
    }
    let product = marcum_product_on_grid(hops, layer, grid)?;
    let objective = |a_hat: f64| -> f64 {
        grid.iter()
            .zip(&product)
            .map(|(&x, &p)| {
                let d = p - q1(a_hat, (b_hat_sq_coeff * x).sqrt());
                d * d
            })
            .sum()
    };
    let a_hat = golden_section_min(&objective, 0.0, upper, FIT_TOLERANCE);
    Ok(MarcumCollapse {
        a_hat,
        b_hat_sq_coeff,
        hit_upper_bracket: a_hat > upper - 2.0 * FIT_TOLERANCE,
    })
}

/// Golden-section minimization on `[lo, hi]` to absolute tolerance `tol`.
fn golden_section_min<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Per-layer coefficient of the heterogeneous-Rician exponent:
/// `pi lambda Γ(m + 2/alpha)/Γ(m) (2 theta / a_hat²)^(2/alpha)`.
///
/// Fails when `a_hat` is exactly zero: the expression divides by `a_hat²`,
/// which is the all-Rayleigh regime where this model is invalid and a
/// Rayleigh/Erlang baseline applies instead.
pub fn kappa_rician(
    surrogate: &GammaSurrogate,
    collapse: &MarcumCollapse,
    layer: &Layer,
) -> Result<f64> {
    if collapse.a_hat == 0.0 {
        return Err(Error::SingularCoefficient(
            "a_hat = 0 (all-Rayleigh route); use a Rayleigh baseline".into(),
        ));
    }
    if layer.eve_density == 0.0 {
        return Ok(0.0);
    }
    let s = 2.0 / layer.alpha;
    let ln_gamma_ratio = ln_gamma_raw(surrogate.shape + s) - ln_gamma_raw(surrogate.shape);
    let ln_ratio = (2.0 * surrogate.scale).ln() - 2.0 * collapse.a_hat.ln();
    Ok(std::f64::consts::PI
        * layer.eve_density
        * (ln_gamma_ratio + s * ln_ratio).exp())
}

fn ln_weighted_distance_sum(hops: &[Hop], layer: &Layer, with_k: bool) -> f64 {
    log_sum_exp(hops.iter().map(|h| {
        let w = if with_k { (h.k_factor + 1.0).ln() } else { 0.0 };
        w + layer.alpha * h.distance.ln()
    }))
}

/// Per-layer SCP under the heterogeneous-Rician model.
pub fn layer_scp_rician(hops: &[Hop], layer: &Layer) -> Result<LayerScp> {
    check_hops(hops, layer)?;
    let surrogate = moment_match(hops)?;
    let collapse = fit_marcum_a_hat(hops, layer)?;
    let kappa = if layer.eve_density == 0.0 && collapse.a_hat == 0.0 {
        // No eavesdroppers: the exponent vanishes regardless of the fade
        // family, so the Rayleigh-regime singularity is moot.
        0.0
    } else {
        kappa_rician(&surrogate, &collapse, layer)?
    };
    let exponent = if kappa == 0.0 {
        0.0
    } else {
        let ln_sum = ln_weighted_distance_sum(hops, layer, true);
        (kappa.ln() + (2.0 / layer.alpha) * ln_sum).exp()
    };
    Ok(LayerScp {
        kappa,
        scp: (-exponent).exp(),
    })
}

fn rayleigh_kappa(layer: &Layer) -> Result<f64> {
    if layer.alpha <= 2.0 {
        return Err(Error::Domain(format!(
            "Rayleigh coefficient needs alpha > 2, got {}",
            layer.alpha
        )));
    }
    let s = 2.0 / layer.alpha;
    Ok(std::f64::consts::PI
        * layer.eve_density
        * (ln_gamma_raw(1.0 + s) + ln_gamma_raw(1.0 - s)).exp())
}

fn erlang_kappa(layer: &Layer, hop_count: usize) -> Result<f64> {
    if layer.alpha <= 2.0 {
        return Err(Error::Domain(format!(
            "Erlang coefficient needs alpha > 2, got {}",
            layer.alpha
        )));
    }
    let s = 2.0 / layer.alpha;
    let i = hop_count as f64;
    Ok(std::f64::consts::PI
        * layer.eve_density
        * (ln_gamma_raw(1.0 - s) + ln_gamma_raw(i + s) - ln_gamma_raw(i)).exp())
}

/// Per-layer exponent for one model; the end-to-end SCP is
/// `exp(-Σ_l exponent_l)`.
pub fn layer_exponent(model: ScpModel, hops: &[Hop], layer: &Layer) -> Result<f64> {
    check_hops(hops, layer)?;
    match model {
        ScpModel::Rician => {
            let layer_scp = layer_scp_rician(hops, layer)?;
            if layer_scp.kappa == 0.0 {
                Ok(0.0)
            } else {
                Ok(-layer_scp.scp.ln())
            }
        }
        ScpModel::RayleighMulti => {
            let kappa = rayleigh_kappa(layer)?;
            if kappa == 0.0 {
                return Ok(0.0);
            }
            let ln_sum = ln_weighted_distance_sum(hops, layer, false);
            Ok((kappa.ln() + (2.0 / layer.alpha) * ln_sum).exp())
        }
        ScpModel::RayleighSingle => {
            let kappa = rayleigh_kappa(layer)?;
            if kappa == 0.0 {
                return Ok(0.0);
            }
            let sum_sq: f64 = hops.iter().map(|h| h.distance * h.distance).sum();
            Ok(kappa * sum_sq)
        }
        ScpModel::Erlang => {
            let kappa = erlang_kappa(layer, hops.len())?;
            if kappa == 0.0 {
                return Ok(0.0);
            }
            let ln_sum = ln_weighted_distance_sum(hops, layer, false);
            Ok((kappa.ln() + (2.0 / layer.alpha) * ln_sum).exp())
        }
    }
}

/// Per-layer SCP under the chosen model.
pub fn layer_scp(model: ScpModel, hops: &[Hop], layer: &Layer) -> Result<f64> {
    Ok((-layer_exponent(model, hops, layer)?).exp())
}

/// End-to-end SCP under the chosen model: the product over layers,
/// computed as the exponential of the summed per-layer exponents.
pub fn end_to_end_scp(model: ScpModel, scenario: &Scenario) -> Result<f64> {
    scenario.validate()?;
    let mut total = 0.0;
    for (layer_idx, hops) in scenario.hops_by_layer() {
        total += layer_exponent(model, &hops, &scenario.layers[layer_idx])?;
    }
    Ok((-total).exp())
}

/// End-to-end SCP under the heterogeneous-Rician model.
pub fn end_to_end_scp_rician(scenario: &Scenario) -> Result<f64> {
    end_to_end_scp(ScpModel::Rician, scenario)
}

/// Multi-hop Rayleigh baseline:
/// `exp[-Σ_l pi λ Γ(1+2/α)Γ(1-2/α) (Σ_i d_i^α)^(2/α)]`.
pub fn scp_rayleigh_multihop(scenario: &Scenario) -> Result<f64> {
    end_to_end_scp(ScpModel::RayleighMulti, scenario)
}

/// Single-hop Rayleigh baseline: the distance aggregate is `Σ_i d_i²` with
/// no outer `2/α` power.
pub fn scp_rayleigh_singlehop(scenario: &Scenario) -> Result<f64> {
    end_to_end_scp(ScpModel::RayleighSingle, scenario)
}

/// Multi-hop Erlang baseline with
/// `kappa_l = pi λ Γ(1-2/α) Γ(I_l+2/α) / Γ(I_l)`.
pub fn scp_erlang_multihop(scenario: &Scenario) -> Result<f64> {
    end_to_end_scp(ScpModel::Erlang, scenario)
}
