//! On-disk file formats and their conversion to core types.
//!
//! Files use field-friendly units: distances in kilometers, powers in dBm,
//! eavesdropper densities per square meter. The core works in SI (meters,
//! watts), so conversion happens exactly once, at load time.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use ntnscp_core::model::{sample_k_factor, Hop, Layer, Route, Scenario};

use crate::CliError;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10.0_f64.powf(dbm / 10.0)
}

fn default_tx_power_dbm() -> f64 {
    40.0 // 10 W
}

fn default_noise_power_dbm() -> f64 {
    -100.0 // 1e-13 W
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    pub id: String,
    pub alpha: f64,
    /// Eavesdroppers per square meter.
    pub eve_density: f64,
    #[serde(default = "default_tx_power_dbm")]
    pub tx_power_dbm: f64,
    #[serde(default = "default_noise_power_dbm")]
    pub noise_power_dbm: f64,
    pub k_db_mean: f64,
    pub k_db_var: f64,
    /// `[min, max]` in kilometers.
    pub link_distance_km: (f64, f64),
}

impl LayerFile {
    pub fn to_layer(&self) -> Layer {
        Layer {
            id: self.id.clone(),
            alpha: self.alpha,
            eve_density: self.eve_density,
            tx_power: dbm_to_watts(self.tx_power_dbm),
            noise_power: dbm_to_watts(self.noise_power_dbm),
            k_db_mean: self.k_db_mean,
            k_db_var: self.k_db_var,
            link_distance_range: (self.link_distance_km.0 * 1e3, self.link_distance_km.1 * 1e3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopFile {
    pub layer: String,
    pub distance_km: f64,
    /// Linear-scale Rician K-factor. Omitted values are drawn from the
    /// hop's layer distribution using the scenario seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteFile {
    pub hops: Vec<HopFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub layers: Vec<LayerFile>,
    pub route: RouteFile,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioFile {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    /// Converts to core units and resolves omitted hop K-factors by drawing
    /// them from the layer distributions with a stream derived from the
    /// scenario seed. Deterministic for a fixed file.
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let layers: Vec<Layer> = self.layers.iter().map(LayerFile::to_layer).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut hops = Vec::with_capacity(self.route.hops.len());
        for hop in &self.route.hops {
            let layer = layers
                .iter()
                .find(|l| l.id == hop.layer)
                .ok_or_else(|| {
                    CliError::Input(format!("hop references unknown layer `{}`", hop.layer))
                })?;
            let k_factor = match hop.k_factor {
                Some(k) => k,
                None => sample_k_factor(layer, &mut rng),
            };
            hops.push(Hop {
                layer_id: hop.layer.clone(),
                distance: hop.distance_km * 1e3,
                k_factor,
            });
        }
        let scenario = Scenario {
            layers,
            route: Route { hops },
            seed: self.seed,
        };
        scenario.validate().map_err(CliError::from_input)?;
        Ok(scenario)
    }
}

/// A bare layer set, for commands that need the environment but no route.
/// Unknown fields are tolerated so a full scenario file also works.
#[derive(Debug, Clone, Deserialize)]
pub struct LayerSetFile {
    pub layers: Vec<LayerFile>,
}

impl LayerSetFile {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

// ---------------------------------------------------------------------
// Sweep specification
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Per-square-meter density applied to every layer.
    EveDensity,
    /// dB value applied to every hop's K-factor.
    KFactorDb,
    /// Target mean hop length in kilometers; all hops scale proportionally.
    AvgLinkDistance,
    /// Route regenerated with exactly this many hops.
    HopCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValues {
    Explicit(Vec<f64>),
    Range {
        from: f64,
        to: f64,
        count: usize,
        spacing: Spacing,
    },
}

impl SweepValues {
    pub fn expand(&self) -> Result<Vec<f64>, CliError> {
        match self {
            SweepValues::Explicit(v) => {
                if v.is_empty() {
                    return Err(CliError::Input("sweep values list is empty".into()));
                }
                Ok(v.clone())
            }
            SweepValues::Range {
                from,
                to,
                count,
                spacing,
            } => {
                if *count < 2 {
                    return Err(CliError::Input("sweep range needs count >= 2".into()));
                }
                match spacing {
                    Spacing::Linear => Ok((0..*count)
                        .map(|i| from + (to - from) * i as f64 / (*count - 1) as f64)
                        .collect()),
                    Spacing::Log => {
                        if !(*from > 0.0) || !(*to > 0.0) {
                            return Err(CliError::Input(
                                "log spacing needs positive endpoints".into(),
                            ));
                        }
                        let (lf, lt) = (from.ln(), to.ln());
                        Ok((0..*count)
                            .map(|i| (lf + (lt - lf) * i as f64 / (*count - 1) as f64).exp())
                            .collect())
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Erlang,
    MonteCarlo,
    RayleighMulti,
    RayleighSingle,
    Rician,
}

impl ModelChoice {
    pub fn name(&self) -> &'static str {
        match self {
            ModelChoice::Erlang => "erlang",
            ModelChoice::MonteCarlo => "monte_carlo",
            ModelChoice::RayleighMulti => "rayleigh_multi",
            ModelChoice::RayleighSingle => "rayleigh_single",
            ModelChoice::Rician => "rician",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub parameter: SweepParameter,
    pub values: SweepValues,
    pub models: Vec<ModelChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

impl SweepFile {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let file: SweepFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if file.models.is_empty() {
            return Err(CliError::Input("sweep lists no models".into()));
        }
        if file.models.contains(&ModelChoice::MonteCarlo) && file.trials.is_none() {
            return Err(CliError::Input(
                "monte_carlo in a sweep requires the `trials` field".into(),
            ));
        }
        Ok(file)
    }
}

// ---------------------------------------------------------------------
// Node dataset (classification input)
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub layer: String,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EdgeRecord {
    pub id_a: String,
    pub id_b: String,
}

pub fn load_nodes(path: &std::path::Path) -> Result<Vec<NodeRecord>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    reader
        .deserialize()
        .collect::<Result<Vec<NodeRecord>, _>>()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_edges(path: &std::path::Path) -> Result<Vec<EdgeRecord>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    reader
        .deserialize()
        .collect::<Result<Vec<EdgeRecord>, _>>()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
