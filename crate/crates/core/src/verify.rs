//! Numerical oracles for the identities and approximations behind the
//! closed form: quadrature checks of the spatial-integral identity and the
//! Marcum-integral approximation, a sampling check of the minimum-of-
//! exponentials lemma, and the Marcum product-collapse error study.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::closedform::{
    fit_grid, fit_marcum_a_hat, marcum_collapsed_on_grid, marcum_product_on_grid,
};
use crate::error::{Error, Result};
use crate::model::{random_route, Layer};
use crate::quad;
use crate::specfun::{gamma_ur_raw, ln_gamma_raw, q1};

/// Relative residual of the spatial-integral identity
///
/// ```text
/// 2π ∫₀^∞ [1 − γ(m, k r^α)/Γ(m)] r dr  =  π Γ(m + 2/α)/Γ(m) k^(−2/α)
/// ```
///
/// The left side is integrated adaptively on `[0, r_max]`, where `r_max` is
/// chosen so the gamma survival factor has decayed below 1e-17 of the
/// result scale; only quadrature error remains.
pub fn lemma1_residual(m: f64, alpha: f64, k: f64) -> Result<f64> {
    if !(m > 0.0) || !(alpha > 2.0) || !(k > 0.0)
        || !m.is_finite()
        || !alpha.is_finite()
        || !k.is_finite()
    {
        return Err(Error::Domain(format!(
            "lemma1_residual requires m > 0, alpha > 2, k > 0; got m={m}, alpha={alpha}, k={k}"
        )));
    }
    let s = 2.0 / alpha;
    let rhs = std::f64::consts::PI * (ln_gamma_raw(m + s) - ln_gamma_raw(m)).exp() * k.powf(-s);
    // Beyond u0 the integrand's gamma survival factor is below e^-40 of its
    // scale; the omitted tail is far under the quadrature tolerance.
    let u0 = (4.0 * m).max(40.0) + 100.0;
    let r_max = (u0 / k).powf(1.0 / alpha);
    let integrand = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        2.0 * std::f64::consts::PI * r * gamma_ur_raw(m, k * r.powf(alpha))
    };
    let r_mid = (m.max(1.0) / k).powf(1.0 / alpha).min(r_max);
    let tol = 1e-11 * rhs;
    let lhs = quad::integrate(&integrand, 0.0, r_mid, 0.5 * tol)?
        + quad::integrate(&integrand, r_mid, r_max, 0.5 * tol)?;
    Ok((lhs - rhs).abs() / rhs)
}

/// Signed relative deviation of the Marcum-integral approximation
///
/// ```text
/// ∫₀^∞ x^(−2/α−1) e^(−λC x^(−2/α)) [1 − Q1(â, b̂ √x)] dx
///   ≈ α/(2 λC) [1 − exp(−λC (b̂²/â²)^(2/α))]
/// ```
///
/// evaluated with the substitution `u = x^(−2/α)`, which maps the integral
/// to `(α/2) ∫₀^∞ e^(−λC u) [1 − Q1(â, b̂ u^(−α/4))] du` with finite
/// endpoint behaviour.
pub fn lemma2_residual(a_hat: f64, b_hat: f64, lambda_c: f64, alpha: f64) -> Result<f64> {
    if !(a_hat > 0.0) || !(b_hat > 0.0) || !(lambda_c > 0.0) || !(alpha > 2.0) {
        return Err(Error::Domain(format!(
            "lemma2_residual requires positive a_hat, b_hat, lambda_c and alpha > 2; \
             got {a_hat}, {b_hat}, {lambda_c}, {alpha}"
        )));
    }
    let s = 2.0 / alpha;
    let ratio = (b_hat * b_hat / (a_hat * a_hat)).powf(s);
    let rhs = alpha / (2.0 * lambda_c) * (1.0 - (-lambda_c * ratio).exp());
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 1.0;
        }
        let b = b_hat * u.powf(-0.25 * alpha);
        let tail = if b.is_finite() { q1(a_hat, b) } else { 0.0 };
        (-lambda_c * u).exp() * (1.0 - tail)
    };
    // Transition of the Marcum factor sits near u* where b̂ u^(−α/4) = â.
    let u_star = (b_hat / a_hat).powf(4.0 / alpha);
    let upper = (40.0 / lambda_c).max(100.0 * u_star);
    let cut_1 = u_star.min(upper);
    let cut_2 = (10.0 * u_star).min(upper);
    let tol = 1e-12 * rhs.abs().max(1e-8);
    let mut lhs = quad::integrate(&integrand, 0.0, cut_1, tol)?;
    if cut_2 > cut_1 {
        lhs += quad::integrate(&integrand, cut_1, cut_2, tol)?;
    }
    if upper > cut_2 {
        lhs += quad::integrate(&integrand, cut_2, upper, tol)?;
    }
    lhs *= alpha / 2.0;
    Ok((lhs - rhs) / rhs)
}

/// Outcome of the minimum-of-exponentials identity check.
#[derive(Debug, Clone, Copy)]
pub struct Lemma3Outcome {
    pub analytic: f64,
    pub empirical: f64,
    pub std_error: f64,
}

impl Lemma3Outcome {
    /// Agreement within `k` standard errors, with an absolute floor for the
    /// degenerate regime where every sample rounds to the same f64 value
    /// and the standard error collapses to machine noise.
    pub fn agrees_within(&self, k: f64) -> bool {
        (self.analytic - self.empirical).abs() <= k * self.std_error + 1e-9
    }
}

/// Checks `E[Σ_{i<N} e^(−cX) (cX)^i / i!] = 1 − (c/(c+Σλ))^N` for
/// `X = min` of independent exponentials with the given rates, by Monte
/// Carlo with the requested sample count.
pub fn lemma3_check<R: Rng + ?Sized>(
    rates: &[f64],
    c: f64,
    samples: u64,
    rng: &mut R,
) -> Result<Lemma3Outcome> {
    if rates.is_empty() || rates.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Domain("rates must be nonempty and positive".into()));
    }
    if !(c > 0.0) || !c.is_finite() || samples < 2 {
        return Err(Error::Domain(format!(
            "need c > 0 and samples >= 2, got c={c}, samples={samples}"
        )));
    }
    let n = rates.len();
    let total: f64 = rates.iter().sum();
    let analytic = 1.0 - (c / (c + total)).powi(n as i32);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let u: f64 = rng.gen();
        let x = -(1.0 - u).ln() / total;
        let cx = c * x;
        let mut term = (-cx).exp();
        let mut f = term;
        for i in 1..n {
            term *= cx / i as f64;
            f += term;
        }
        sum += f;
        sum_sq += f * f;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    Ok(Lemma3Outcome {
        analytic,
        empirical: mean,
        std_error: (var / samples as f64).sqrt(),
    })
}

/// Pointwise mean absolute error of the Marcum product collapse over the
/// fit grid, averaged over randomly sampled routes.
#[derive(Debug, Clone)]
pub struct ErrorCurve {
    pub grid: Vec<f64>,
    pub mean_abs_error: Vec<f64>,
}

impl ErrorCurve {
    pub fn max_mean_abs_error(&self) -> f64 {
        self.mean_abs_error.iter().cloned().fold(0.0, f64::max)
    }
}

/// Samples `trials` random routes inside one layer (hop count uniform over
/// `hop_range`, distances and K-factors from the layer), fits the collapsed
/// Marcum parameter for each, and returns the pointwise mean absolute
/// deviation between the exact product and the collapsed curve.
pub fn marcum_product_error<R: Rng + ?Sized>(
    layer: &Layer,
    trials: u32,
    hop_range: (usize, usize),
    rng: &mut R,
) -> Result<ErrorCurve> {
    layer.validate()?;
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let grid = fit_grid();
    let seeds: Vec<u64> = (0..trials).map(|_| rng.gen()).collect();
    let sum = seeds
        .par_iter()
        .map(|&seed| {
            let mut trial_rng = ChaCha8Rng::seed_from_u64(seed);
            let route = random_route(std::slice::from_ref(layer), hop_range, &mut trial_rng);
            let collapse =
                fit_marcum_a_hat(&route.hops, layer).expect("sampled route is fit-compatible");
            let product = marcum_product_on_grid(&route.hops, layer, &grid)
                .expect("sampled route is grid-compatible");
            let collapsed = marcum_collapsed_on_grid(&collapse, &grid);
            product
                .iter()
                .zip(&collapsed)
                .map(|(p, q)| (p - q).abs())
                .collect::<Vec<f64>>()
        })
        .reduce(
            || vec![0.0; grid.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );
    let mean_abs_error = sum.iter().map(|s| s / trials as f64).collect();
    Ok(ErrorCurve {
        grid,
        mean_abs_error,
    })
}
