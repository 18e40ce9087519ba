//! Domain types for layers, hops, routes, and scenarios, plus topology
//! sampling and SNR arithmetic.
//!
//! All quantities are SI internally: distances in meters, densities per
//! square meter, powers in watts. K-factors are linear (not dB) on hops;
//! layers carry the dB-domain normal distribution K is drawn from.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Per-layer physics: path loss, eavesdropper density, radio parameters and
/// the distribution of link distances and Rician K-factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub id: String,
    /// Path-loss exponent; must exceed 2 for the spatial integrals to converge.
    pub alpha: f64,
    /// Eavesdropper density, per square meter.
    pub eve_density: f64,
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Noise power in watts.
    pub noise_power: f64,
    /// Mean of the K-factor distribution, in dB.
    pub k_db_mean: f64,
    /// Variance of the K-factor distribution, in dB².
    pub k_db_var: f64,
    /// Inclusive link-distance range in meters.
    pub link_distance_range: (f64, f64),
}

impl Layer {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidScenario("layer id must be nonempty".into()));
        }
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "layer `{}`: alpha must be finite and > 2, got {}",
                self.id, self.alpha
            )));
        }
        if !(self.eve_density >= 0.0) || !self.eve_density.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "layer `{}`: eve_density must be finite and >= 0, got {}",
                self.id, self.eve_density
            )));
        }
        if !(self.tx_power > 0.0) || !(self.noise_power > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "layer `{}`: tx_power and noise_power must be positive",
                self.id
            )));
        }
        if !(self.k_db_var >= 0.0) || !self.k_db_var.is_finite() || !self.k_db_mean.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "layer `{}`: K_dB mean must be finite and variance nonnegative",
                self.id
            )));
        }
        let (lo, hi) = self.link_distance_range;
        if !(lo > 0.0 && lo <= hi) || !hi.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "layer `{}`: link distance range must satisfy 0 < min <= max, got [{lo}, {hi}]",
                self.id
            )));
        }
        Ok(())
    }
}

/// One legitimate link: the layer it lives in, its length, and its realized
/// Rician K-factor (linear scale).
#[derive(Debug, Clone, PartialEq)]
pub struct Hop {
    pub layer_id: String,
    /// Transmitter-to-receiver distance in meters.
    pub distance: f64,
    /// Realized Rician K-factor, linear scale.
    pub k_factor: f64,
}

impl Hop {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0) || !self.distance.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "hop in layer `{}`: distance must be positive and finite, got {}",
                self.layer_id, self.distance
            )));
        }
        if !(self.k_factor >= 0.0) || !self.k_factor.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "hop in layer `{}`: k_factor must be nonnegative and finite, got {}",
                self.layer_id, self.k_factor
            )));
        }
        Ok(())
    }
}

/// An ordered multi-hop relay route.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Route {
    pub hops: Vec<Hop>,
}

/// A complete evaluation input: the layer environment, the route under
/// study, and the seed that fixes all derived randomness.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub layers: Vec<Layer>,
    pub route: Route,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidScenario("scenario has no layers".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for layer in &self.layers {
            layer.validate()?;
            if !seen.insert(layer.id.as_str()) {
                return Err(Error::InvalidScenario(format!(
                    "duplicate layer id `{}`",
                    layer.id
                )));
            }
        }
        if self.route.hops.is_empty() {
            return Err(Error::InvalidScenario("route has no hops".into()));
        }
        for hop in &self.route.hops {
            hop.validate()?;
            if self.layer_index(&hop.layer_id).is_none() {
                return Err(Error::InvalidScenario(format!(
                    "hop references unknown layer `{}`",
                    hop.layer_id
                )));
            }
        }
        Ok(())
    }

    pub fn layer_index(&self, id: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.id == id)
    }

    /// Groups the route's hops by layer, in layer-vector order. Layers with
    /// no hops are omitted; they contribute no eavesdropping exposure.
    pub fn hops_by_layer(&self) -> Vec<(usize, Vec<Hop>)> {
        self.layers
            .iter()
            .enumerate()
            .filter_map(|(idx, layer)| {
                let hops: Vec<Hop> = self
                    .route
                    .hops
                    .iter()
                    .filter(|h| h.layer_id == layer.id)
                    .cloned()
                    .collect();
                if hops.is_empty() {
                    None
                } else {
                    Some((idx, hops))
                }
            })
            .collect()
    }
}

/// Draws a linear K-factor from the layer's dB-domain normal distribution:
/// `K_dB ~ N(mean, var)` and `K = 10^(K_dB/10)`.
pub fn sample_k_factor<R: Rng + ?Sized>(layer: &Layer, rng: &mut R) -> f64 {
    let normal = Normal::new(layer.k_db_mean, layer.k_db_var.sqrt())
        .expect("validated layer has nonnegative K variance");
    let k_db = normal.sample(rng);
    10.0_f64.powf(k_db / 10.0)
}

/// Legitimate-link SNR for a given realized power gain:
/// `P · gain / (n0 · d^alpha)`.
pub fn legit_snr(hop: &Hop, layer: &Layer, power_gain: f64) -> f64 {
    layer.tx_power * power_gain / (layer.noise_power * hop.distance.powf(layer.alpha))
}

/// Samples a random route: hop count uniform over the inclusive range, each
/// hop assigned a uniformly random layer, a distance uniform over that
/// layer's range, and a K-factor from the layer's distribution.
pub fn random_route<R: Rng + ?Sized>(
    layers: &[Layer],
    hop_count_range: (usize, usize),
    rng: &mut R,
) -> Route {
    assert!(!layers.is_empty(), "random_route needs at least one layer");
    let (lo, hi) = hop_count_range;
    assert!(lo >= 1 && lo <= hi, "bad hop count range [{lo}, {hi}]");
    let count = rng.gen_range(lo..=hi);
    let hops = (0..count)
        .map(|_| {
            let layer = &layers[rng.gen_range(0..layers.len())];
            let (dmin, dmax) = layer.link_distance_range;
            let distance = if dmin == dmax {
                dmin
            } else {
                rng.gen_range(dmin..=dmax)
            };
            let k_factor = sample_k_factor(layer, rng);
            Hop {
                layer_id: layer.id.clone(),
                distance,
                k_factor,
            }
        })
        .collect();
    Route { hops }
}

/// Representative layer environments used by the examples, the shipped
/// sample data, and the validation suites. Distances follow the usual
/// LEO / HAPS / ground / sea envelopes; transmit and noise power default to
/// 1 W and 1e-6 W so that legitimate-link SNR thresholds of interest fall
/// inside the curve-fit grid of [`crate::closedform`].
pub mod presets {
    use super::Layer;

    pub const TX_POWER_W: f64 = 1.0;
    pub const NOISE_POWER_W: f64 = 1e-6;

    fn layer(
        id: &str,
        alpha: f64,
        k_db_mean: f64,
        k_db_var: f64,
        range_km: (f64, f64),
        eve_density: f64,
    ) -> Layer {
        Layer {
            id: id.to_string(),
            alpha,
            eve_density,
            tx_power: TX_POWER_W,
            noise_power: NOISE_POWER_W,
            k_db_mean,
            k_db_var,
            link_distance_range: (range_km.0 * 1e3, range_km.1 * 1e3),
        }
    }

    pub fn leo(eve_density: f64) -> Layer {
        layer("leo", 2.1, 13.5, 1.8, (200.0, 550.0), eve_density)
    }

    pub fn haps(eve_density: f64) -> Layer {
        layer("haps", 2.3, 13.5, 1.8, (20.0, 380.0), eve_density)
    }

    pub fn ground(eve_density: f64) -> Layer {
        layer("ground", 2.9, 7.0, 4.0, (10.0, 30.0), eve_density)
    }

    pub fn sea(eve_density: f64) -> Layer {
        layer("sea", 2.5, 12.7, 1.2, (10.0, 30.0), eve_density)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_layer() -> Layer {
        Layer {
            id: "t".into(),
            alpha: 2.9,
            eve_density: 1e-10,
            tx_power: 1.0,
            noise_power: 1e-6,
            k_db_mean: 7.0,
            k_db_var: 4.0,
            link_distance_range: (10e3, 30e3),
        }
    }

    #[test]
    fn k_factor_mean_matches_layer() {
        let layer = Layer {
            k_db_mean: 13.5,
            k_db_var: 1.8,
            ..test_layer()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mean_db: f64 = (0..n)
            .map(|_| 10.0 * sample_k_factor(&layer, &mut rng).log10())
            .sum::<f64>()
            / n as f64;
        assert!((mean_db - 13.5).abs() < 0.1, "mean K_dB {mean_db}");
    }

    #[test]
    fn k_factor_zero_variance_is_deterministic() {
        let layer = Layer {
            k_db_mean: 9.0,
            k_db_var: 0.0,
            ..test_layer()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let want = 10.0_f64.powf(0.9);
        for _ in 0..100 {
            assert_eq!(sample_k_factor(&layer, &mut rng), want);
        }
    }

    #[test]
    fn k_factor_variance_matches_layer() {
        let layer = test_layer(); // (7.0, 4.0)
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| 10.0 * sample_k_factor(&layer, &mut rng).log10())
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
        assert!((var - 4.0).abs() < 0.05 * 4.0, "K_dB variance {var}");
    }

    #[test]
    fn k_factor_deterministic_per_stream_state() {
        let layer = test_layer();
        let a = sample_k_factor(&layer, &mut ChaCha8Rng::seed_from_u64(42));
        let b = sample_k_factor(&layer, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn legit_snr_zero_gain() {
        let layer = test_layer();
        let hop = Hop {
            layer_id: "t".into(),
            distance: 12e3,
            k_factor: 3.0,
        };
        assert_eq!(legit_snr(&hop, &layer, 0.0), 0.0);
    }

    #[test]
    fn legit_snr_unit_geometry() {
        let layer = Layer {
            tx_power: 1.0,
            noise_power: 1.0,
            alpha: 2.5,
            link_distance_range: (1.0, 1.0),
            ..test_layer()
        };
        let hop = Hop {
            layer_id: "t".into(),
            distance: 1.0,
            k_factor: 0.0,
        };
        for g in [0.0, 0.3, 1.7] {
            assert_eq!(legit_snr(&hop, &layer, g), g);
        }
    }

    #[test]
    fn legit_snr_large_exponent_arithmetic() {
        // P = 10 W, n0 = 1e-12 W, d = 1e4 m, alpha = 2.9:
        // expected 10 / (1e-12 * 10^(4*2.9)), with the power computed on an
        // independent route through exp/ln.
        let layer = Layer {
            tx_power: 10.0,
            noise_power: 1e-12,
            alpha: 2.9,
            ..test_layer()
        };
        let hop = Hop {
            layer_id: "t".into(),
            distance: 1e4,
            k_factor: 1.0,
        };
        let want = 10.0 / (1e-12 * (11.6 * std::f64::consts::LN_10).exp());
        let got = legit_snr(&hop, &layer, 1.0);
        assert!((got / want - 1.0).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn random_route_degenerate_count() {
        let layers = vec![test_layer()];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let route = random_route(&layers, (3, 3), &mut rng);
            assert_eq!(route.hops.len(), 3);
            assert!(route.hops.iter().all(|h| h.layer_id == "t"));
        }
    }

    #[test]
    fn random_route_hop_count_uniform() {
        // chi-square goodness of fit over the 6 hop counts, 1% significance
        // (critical value 15.086 at 5 degrees of freedom).
        let layers = vec![
            presets::leo(0.0),
            presets::haps(0.0),
            presets::ground(0.0),
            presets::sea(0.0),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let mut counts = [0u64; 6];
        for _ in 0..n {
            let route = random_route(&layers, (2, 7), &mut rng);
            counts[route.hops.len() - 2] += 1;
        }
        let expect = n as f64 / 6.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expect;
                d * d / expect
            })
            .sum();
        assert!(chi2 < 15.086, "hop count chi-square {chi2}, counts {counts:?}");
    }

    #[test]
    fn random_route_distances_in_layer_range() {
        let layers = vec![
            presets::leo(0.0),
            presets::haps(0.0),
            presets::ground(0.0),
            presets::sea(0.0),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let route = random_route(&layers, (2, 7), &mut rng);
            for hop in &route.hops {
                let layer = layers.iter().find(|l| l.id == hop.layer_id).unwrap();
                let (lo, hi) = layer.link_distance_range;
                assert!(hop.distance >= lo && hop.distance <= hi);
                assert!(hop.k_factor > 0.0);
            }
        }
    }

    #[test]
    fn hops_by_layer_partitions_route() {
        let scenario = Scenario {
            layers: vec![presets::leo(0.0), presets::ground(0.0)],
            route: Route {
                hops: vec![
                    Hop {
                        layer_id: "ground".into(),
                        distance: 11e3,
                        k_factor: 4.0,
                    },
                    Hop {
                        layer_id: "leo".into(),
                        distance: 300e3,
                        k_factor: 20.0,
                    },
                    Hop {
                        layer_id: "ground".into(),
                        distance: 14e3,
                        k_factor: 6.0,
                    },
                ],
            },
            seed: 1,
        };
        scenario.validate().unwrap();
        let grouped = scenario.hops_by_layer();
        let total: usize = grouped.iter().map(|(_, hops)| hops.len()).sum();
        assert_eq!(total, scenario.route.hops.len());
        assert_eq!(grouped.len(), 2);
        // layer-vector order: leo first
        assert_eq!(grouped[0].0, 0);
        assert_eq!(grouped[0].1.len(), 1);
        assert_eq!(grouped[1].1.len(), 2);
    }

    #[test]
    fn validation_catches_unknown_layer() {
        let scenario = Scenario {
            layers: vec![presets::leo(0.0)],
            route: Route {
                hops: vec![Hop {
                    layer_id: "nope".into(),
                    distance: 1.0,
                    k_factor: 0.0,
                }],
            },
            seed: 0,
        };
        assert!(scenario.validate().is_err());
    }

    #[test]
    fn validation_catches_bad_alpha() {
        let mut layer = test_layer();
        layer.alpha = 2.0;
        assert!(layer.validate().is_err());
        layer.alpha = 1.5;
        assert!(layer.validate().is_err());
    }

    #[test]
    fn validation_catches_bad_range() {
        let mut layer = test_layer();
        layer.link_distance_range = (0.0, 10.0);
        assert!(layer.validate().is_err());
        layer.link_distance_range = (20.0, 10.0);
        assert!(layer.validate().is_err());
    }
}
