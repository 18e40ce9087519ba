//! Ground-truth SCP estimation by direct simulation.
//!
//! Each trial draws Rician fades for the legitimate hops, deploys
//! eavesdroppers in every layer by a homogeneous Poisson process on a
//! truncated disc, combines their wiretap SNRs across the layer's hops
//! (maximal-ratio combining), and declares the layer secure when the worst
//! legitimate hop still beats the best eavesdropper. The route is secure
//! when every layer is.
//!
//! Determinism: trial `t` runs on an independent counter-derived stream
//! (`ChaCha8` with stream id `t`), so estimates are bit-identical for a
//! fixed seed regardless of thread count or execution order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Layer, Scenario};
use crate::specfun::{q1, rician_power};

/// How eavesdropper-to-transmitter distances are modelled within a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveGeometry {
    /// Every hop sees the eavesdropper at the same distance, measured from
    /// the layer's reference point (its first transmitter). This is the
    /// geometry under which the closed form was derived.
    CommonDistance,
    /// Transmitters sit on a line with the route's hop spacings; each hop
    /// sees its own exact distance to the eavesdropper.
    Exact,
}

/// Simulation controls.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub mode: EveGeometry,
    /// Per-layer disc radii in meters (scenario layer order). `None` selects
    /// the automatic rule described in [`SimContext::new`].
    pub truncation_radii: Option<Vec<f64>>,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig {
            trials,
            seed,
            mode: EveGeometry::CommonDistance,
            truncation_radii: None,
        }
    }
}

/// Empirical SCP estimate with a normal-approximation confidence interval.
#[derive(Debug, Clone)]
pub struct McEstimate {
    pub scp_hat: f64,
    /// `1.96 * sqrt(scp_hat (1 - scp_hat) / trials)`.
    pub half_width_95: f64,
    /// Per-layer secure fractions, in scenario layer order.
    pub per_layer_scp_hat: Vec<f64>,
    /// Disc radii actually used, in scenario layer order (zero for layers
    /// the route never visits).
    pub truncation_radii: Vec<f64>,
    pub trials: u64,
}

/// Outcome of a single trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub per_layer_secure: Vec<bool>,
    pub secure: bool,
}

/// Samples a homogeneous Poisson point process on a disc of the given
/// radius centered at the origin: the point count is Poisson with mean
/// `density * pi * radius²` and positions are uniform on the disc.
pub fn sample_hppp_disc<R: Rng + ?Sized>(
    density: f64,
    radius: f64,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    if !(density >= 0.0) || !density.is_finite() || !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!(
            "sample_hppp_disc requires density >= 0 and radius > 0, got {density}, {radius}"
        )));
    }
    let mean = density * std::f64::consts::PI * radius * radius;
    let count = poisson_count(mean, rng);
    Ok((0..count)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let theta = rng.gen::<f64>() * std::f64::consts::TAU;
            (r * theta.cos(), r * theta.sin())
        })
        .collect())
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(rng) as u64
}

struct HopSim {
    k_factor: f64,
    /// Transmitter position along the layer's hop chain (exact mode).
    offset: f64,
    /// `P / (n0 d^alpha)`: legitimate SNR per unit power gain.
    legit_coeff: f64,
}

struct LayerSim {
    layer_idx: usize,
    alpha: f64,
    /// `P / n0`.
    snr_scale: f64,
    radius: f64,
    poisson_mean: f64,
    hops: Vec<HopSim>,
}

/// Prevalidated simulation state shared by all trials.
pub struct SimContext {
    mode: EveGeometry,
    layer_count: usize,
    layers: Vec<LayerSim>,
}

impl SimContext {
    /// Builds the per-layer simulation tables and truncation radii.
    ///
    /// The automatic radius rule: an eavesdropper at the disc edge whose
    /// every hop fade sits at its 99.99th percentile must still combine to
    /// less than the 0.01th percentile of the minimum legitimate SNR, with a
    /// hard floor of ten times the layer's longest hop. In exact mode the
    /// chain length is added so the bound covers the farthest transmitter.
    pub fn new(scenario: &Scenario, config: &McConfig) -> Result<Self> {
        scenario.validate()?;
        if scenario.layers.len() > 63 {
            return Err(Error::InvalidScenario(
                "at most 63 layers are supported".into(),
            ));
        }
        if let Some(radii) = &config.truncation_radii {
            if radii.len() != scenario.layers.len() {
                return Err(Error::InvalidScenario(format!(
                    "{} truncation radii for {} layers",
                    radii.len(),
                    scenario.layers.len()
                )));
            }
            if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
                return Err(Error::InvalidScenario(
                    "truncation radii must be positive and finite".into(),
                ));
            }
        }
        let mut layers = Vec::new();
        for (layer_idx, hops) in scenario.hops_by_layer() {
            let layer = &scenario.layers[layer_idx];
            let mut offset = 0.0;
            let mut sims = Vec::with_capacity(hops.len());
            for hop in &hops {
                sims.push(HopSim {
                    k_factor: hop.k_factor,
                    offset,
                    legit_coeff: layer.tx_power
                        / (layer.noise_power * hop.distance.powf(layer.alpha)),
                });
                offset += hop.distance;
            }
            let radius = match &config.truncation_radii {
                Some(radii) => radii[layer_idx],
                None => auto_radius(layer, &sims, offset, config.mode),
            };
            layers.push(LayerSim {
                layer_idx,
                alpha: layer.alpha,
                snr_scale: layer.tx_power / layer.noise_power,
                radius,
                poisson_mean: layer.eve_density * std::f64::consts::PI * radius * radius,
                hops: sims,
            });
        }
        Ok(SimContext {
            mode: config.mode,
            layer_count: scenario.layers.len(),
            layers,
        })
    }

    /// Radii in scenario layer order; zero for layers without hops.
    pub fn truncation_radii(&self) -> Vec<f64> {
        let mut radii = vec![0.0; self.layer_count];
        for ls in &self.layers {
            radii[ls.layer_idx] = ls.radius;
        }
        radii
    }

    fn all_secure_mask(&self) -> u64 {
        (1u64 << self.layer_count) - 1
    }

    /// Runs one trial. Returns the per-layer security masks for the full
    /// disc and, when `inner` radii are given, for eavesdroppers within
    /// those radii only (used by the truncation sufficiency check).
    fn trial_masks<R: Rng + ?Sized>(&self, rng: &mut R, inner: Option<&[f64]>) -> (u64, u64) {
        let mut full = self.all_secure_mask();
        let mut restricted = full;
        for ls in &self.layers {
            let mut min_snr = f64::INFINITY;
            for hop in &ls.hops {
                let snr = hop.legit_coeff * rician_power(hop.k_factor, rng);
                if snr < min_snr {
                    min_snr = snr;
                }
            }
            let inner_radius = inner.map_or(ls.radius, |r| r[ls.layer_idx]);
            let mut max_eve = 0.0_f64;
            let mut max_eve_inner = 0.0_f64;
            let count = poisson_count(ls.poisson_mean, rng);
            for _ in 0..count {
                let r = ls.radius * rng.gen::<f64>().sqrt();
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                let snr_e = match self.mode {
                    EveGeometry::CommonDistance => {
                        let sum_gain: f64 = ls
                            .hops
                            .iter()
                            .map(|h| rician_power(h.k_factor, rng))
                            .sum();
                        ls.snr_scale * sum_gain / r.max(1e-3).powf(ls.alpha)
                    }
                    EveGeometry::Exact => {
                        let (x, y) = (r * theta.cos(), r * theta.sin());
                        ls.hops
                            .iter()
                            .map(|h| {
                                let dx = x - h.offset;
                                let d = (dx * dx + y * y).sqrt().max(1e-3);
                                ls.snr_scale * rician_power(h.k_factor, rng) / d.powf(ls.alpha)
                            })
                            .sum()
                    }
                };
                if snr_e > max_eve {
                    max_eve = snr_e;
                }
                if r <= inner_radius && snr_e > max_eve_inner {
                    max_eve_inner = snr_e;
                }
            }
            if min_snr <= max_eve {
                full &= !(1 << ls.layer_idx);
            }
            if min_snr <= max_eve_inner {
                restricted &= !(1 << ls.layer_idx);
            }
        }
        (full, restricted)
    }
}

/// Percentile of the Rician power gain: smallest `x` with
/// `P(gain <= x) >= p`, found by bisection on the Marcum survival function.
fn rician_power_quantile(k_factor: f64, p: f64) -> f64 {
    let a = (2.0 * k_factor).sqrt();
    let ccdf = |x: f64| q1(a, (2.0 * (k_factor + 1.0) * x).sqrt());
    let target = 1.0 - p;
    let mut hi = 1.0;
    while ccdf(hi) > target && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ccdf(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Low quantile of the minimum legitimate SNR over a layer's hops.
fn min_legit_snr_quantile(hops: &[HopSim], p: f64) -> f64 {
    let survival = |s: f64| -> f64 {
        hops.iter()
            .map(|h| {
                let a = (2.0 * h.k_factor).sqrt();
                q1(a, (2.0 * (h.k_factor + 1.0) * s / h.legit_coeff).sqrt())
            })
            .product()
    };
    let target = 1.0 - p;
    let mut hi = 1e-30;
    while survival(hi) > target && hi < 1e300 {
        hi *= 10.0;
    }
    let mut lo = hi / 10.0;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if survival(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn auto_radius(layer: &Layer, hops: &[HopSim], span: f64, mode: EveGeometry) -> f64 {
    let s_low = min_legit_snr_quantile(hops, 1e-4);
    let worst_combined: f64 = hops
        .iter()
        .map(|h| rician_power_quantile(h.k_factor, 0.9999) * layer.tx_power / layer.noise_power)
        .sum();
    let radius = (worst_combined / s_low).powf(1.0 / layer.alpha);
    let max_hop = hops
        .iter()
        .map(|h| (layer.tx_power / (h.legit_coeff * layer.noise_power)).powf(1.0 / layer.alpha))
        .fold(0.0, f64::max);
    let radius = match mode {
        EveGeometry::Exact => radius + span,
        EveGeometry::CommonDistance => radius,
    };
    radius.max(10.0 * max_hop)
}

/// Runs one simulation trial with a caller-supplied stream.
pub fn simulate_trial<R: Rng + ?Sized>(
    scenario: &Scenario,
    config: &McConfig,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let ctx = SimContext::new(scenario, config)?;
    let (mask, _) = ctx.trial_masks(rng, None);
    let per_layer_secure = (0..ctx.layer_count).map(|l| mask & (1 << l) != 0).collect();
    Ok(TrialOutcome {
        per_layer_secure,
        secure: mask == ctx.all_secure_mask(),
    })
}

struct Counts {
    secure: u64,
    per_layer: Vec<u64>,
}

fn run_counted(
    ctx: &SimContext,
    trials: u64,
    seed: u64,
    inner: Option<&[f64]>,
) -> (Counts, Counts) {
    let layer_count = ctx.layer_count;
    let zero = || {
        (
            Counts {
                secure: 0,
                per_layer: vec![0; layer_count],
            },
            Counts {
                secure: 0,
                per_layer: vec![0; layer_count],
            },
        )
    };
    let merge = |mut a: (Counts, Counts), b: (Counts, Counts)| {
        a.0.secure += b.0.secure;
        a.1.secure += b.1.secure;
        for l in 0..layer_count {
            a.0.per_layer[l] += b.0.per_layer[l];
            a.1.per_layer[l] += b.1.per_layer[l];
        }
        a
    };
    let all = ctx.all_secure_mask();
    (0..trials)
        .into_par_iter()
        .fold(zero, |mut acc, trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let (full, restricted) = ctx.trial_masks(&mut rng, inner);
            if full == all {
                acc.0.secure += 1;
            }
            if restricted == all {
                acc.1.secure += 1;
            }
            for l in 0..layer_count {
                if full & (1 << l) != 0 {
                    acc.0.per_layer[l] += 1;
                }
                if restricted & (1 << l) != 0 {
                    acc.1.per_layer[l] += 1;
                }
            }
            acc
        })
        .reduce(zero, merge)
}

/// Estimates the end-to-end and per-layer SCP over independent trials.
///
/// Bit-identical for a fixed `(seed, trials)` pair regardless of
/// parallelism; layers the route never visits report probability one.
pub fn estimate_scp(scenario: &Scenario, config: &McConfig) -> Result<McEstimate> {
    if config.trials == 0 {
        return Err(Error::InvalidScenario("trials must be at least 1".into()));
    }
    let ctx = SimContext::new(scenario, config)?;
    let (counts, _) = run_counted(&ctx, config.trials, config.seed, None);
    let n = config.trials as f64;
    let scp_hat = counts.secure as f64 / n;
    Ok(McEstimate {
        scp_hat,
        half_width_95: 1.96 * (scp_hat * (1.0 - scp_hat) / n).sqrt(),
        per_layer_scp_hat: counts.per_layer.iter().map(|&c| c as f64 / n).collect(),
        truncation_radii: ctx.truncation_radii(),
        trials: config.trials,
    })
}

/// Truncation sufficiency check: simulates on discs of twice the configured
/// radii while also scoring each trial against the original radii, so the
/// two estimates are coupled. Returns `(scp_at_radius, scp_at_twice)`.
pub fn truncation_margin(scenario: &Scenario, config: &McConfig) -> Result<(f64, f64)> {
    if config.trials == 0 {
        return Err(Error::InvalidScenario("trials must be at least 1".into()));
    }
    let base = SimContext::new(scenario, config)?;
    let inner = base.truncation_radii();
    let doubled = McConfig {
        truncation_radii: Some(inner.iter().map(|r| (r * 2.0).max(1.0)).collect()),
        ..config.clone()
    };
    let ctx = SimContext::new(scenario, &doubled)?;
    let (full, restricted) = run_counted(&ctx, config.trials, config.seed, Some(&inner));
    let n = config.trials as f64;
    Ok((restricted.secure as f64 / n, full.secure as f64 / n))
}
