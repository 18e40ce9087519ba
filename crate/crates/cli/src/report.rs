//! JSON report shapes emitted on standard output.

use serde::Serialize;

use ntnscp_core::closedform::{layer_scp, ScpModel};
use ntnscp_core::model::Scenario;
use ntnscp_core::montecarlo::McEstimate;

use crate::CliError;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelValues {
    pub rician: f64,
    pub rayleigh_multi: f64,
    pub rayleigh_single: f64,
    pub erlang: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerReport {
    pub layer: String,
    pub rician: f64,
    pub rayleigh_multi: f64,
    pub rayleigh_single: f64,
    pub erlang: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerMc {
    pub layer: String,
    pub scp_hat: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub trials: u64,
    pub seed: u64,
    pub mode: String,
    pub scp_hat: f64,
    pub half_width_95: f64,
    pub truncation_radii_m: Vec<f64>,
    pub per_layer: Vec<LayerMc>,
}

impl McReport {
    pub fn new(scenario: &Scenario, estimate: &McEstimate, seed: u64, mode: &str) -> Self {
        McReport {
            trials: estimate.trials,
            seed,
            mode: mode.to_string(),
            scp_hat: estimate.scp_hat,
            half_width_95: estimate.half_width_95,
            truncation_radii_m: estimate.truncation_radii.clone(),
            per_layer: scenario
                .layers
                .iter()
                .zip(&estimate.per_layer_scp_hat)
                .map(|(layer, &scp_hat)| LayerMc {
                    layer: layer.id.clone(),
                    scp_hat,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScpReport {
    pub end_to_end: ModelValues,
    pub per_layer: Vec<LayerReport>,
    pub monte_carlo: Option<McReport>,
}

/// Evaluates all four closed-form models per layer and end to end. Layers
/// the route never visits carry no exposure and report probability one.
pub fn closed_form_report(scenario: &Scenario) -> Result<ScpReport, CliError> {
    let grouped = scenario.hops_by_layer();
    let mut per_layer = Vec::with_capacity(scenario.layers.len());
    let mut totals = [1.0_f64; 4];
    for (idx, layer) in scenario.layers.iter().enumerate() {
        let values = match grouped.iter().find(|(gidx, _)| *gidx == idx) {
            Some((_, hops)) => {
                let mut v = [0.0_f64; 4];
                for (slot, model) in ScpModel::ALL.iter().enumerate() {
                    v[slot] = layer_scp(*model, hops, layer).map_err(CliError::from_numerical)?;
                    totals[slot] *= v[slot];
                }
                v
            }
            None => [1.0; 4],
        };
        per_layer.push(LayerReport {
            layer: layer.id.clone(),
            rician: values[0],
            rayleigh_multi: values[1],
            rayleigh_single: values[2],
            erlang: values[3],
        });
    }
    Ok(ScpReport {
        end_to_end: ModelValues {
            rician: totals[0],
            rayleigh_multi: totals[1],
            rayleigh_single: totals[2],
            erlang: totals[3],
        },
        per_layer,
        monte_carlo: None,
    })
}
