//! Node classification for base-station datasets: which nodes have a relay
//! route from the source whose SCP meets a threshold, per model.
//!
//! Geodetic positions are converted to Earth-centered Cartesian coordinates
//! (WGS84), so inter-node distances come out in meters. The per-layer SCP
//! exponent is not additive over hops on a path, so no shortest-path
//! relaxation applies; instead every simple path from the source up to the
//! hop bound is enumerated and the full route is re-evaluated per model,
//! keeping the best SCP seen per node.

use serde::Serialize;
use std::collections::HashMap;

use ntnscp_core::closedform::{end_to_end_scp, ScpModel};
use ntnscp_core::model::{Hop, Layer, Route, Scenario};

use crate::report::ModelValues;
use crate::schema::{EdgeRecord, NodeRecord};
use crate::CliError;

const MAX_PATHS: u64 = 1_000_000;

/// WGS84 geodetic to Earth-centered Cartesian, meters.
pub fn geodetic_to_ecef(lat_deg: f64, lon_deg: f64, alt_m: f64) -> [f64; 3] {
    const A: f64 = 6_378_137.0;
    const F: f64 = 1.0 / 298.257_223_563;
    let e2 = F * (2.0 - F);
    let lat = lat_deg.to_radians();
    let lon = lon_deg.to_radians();
    let sin_lat = lat.sin();
    let n = A / (1.0 - e2 * sin_lat * sin_lat).sqrt();
    [
        (n + alt_m) * lat.cos() * lon.cos(),
        (n + alt_m) * lat.cos() * lon.sin(),
        (n * (1.0 - e2) + alt_m) * sin_lat,
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct SecureFlags {
    pub rician: bool,
    pub rayleigh_multi: bool,
    pub rayleigh_single: bool,
    pub erlang: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeClassification {
    pub id: String,
    pub layer: String,
    pub reachable: bool,
    /// Best route SCP per model; absent when unreachable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_scp: Option<ModelValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secure: Option<SecureFlags>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub source: String,
    pub threshold: f64,
    pub hop_bound: u32,
    pub nodes: Vec<NodeClassification>,
}

struct Graph {
    ids: Vec<String>,
    layer_of: Vec<usize>,
    ecef: Vec<[f64; 3]>,
    adjacency: Vec<Vec<usize>>,
}

fn build_graph(
    nodes: &[NodeRecord],
    edges: &[EdgeRecord],
    layers: &[Layer],
) -> Result<Graph, CliError> {
    let mut index = HashMap::new();
    let mut ids = Vec::new();
    let mut layer_of = Vec::new();
    let mut ecef = Vec::new();
    for node in nodes {
        if index.insert(node.id.clone(), ids.len()).is_some() {
            return Err(CliError::Input(format!("duplicate node id `{}`", node.id)));
        }
        if !(-90.0..=90.0).contains(&node.lat_deg) || !(-180.0..=180.0).contains(&node.lon_deg) {
            return Err(CliError::Input(format!(
                "node `{}` has invalid position ({}, {})",
                node.id, node.lat_deg, node.lon_deg
            )));
        }
        let layer_idx = layers
            .iter()
            .position(|l| l.id == node.layer)
            .ok_or_else(|| {
                CliError::Input(format!(
                    "node `{}` references unknown layer `{}`",
                    node.id, node.layer
                ))
            })?;
        ids.push(node.id.clone());
        layer_of.push(layer_idx);
        ecef.push(geodetic_to_ecef(node.lat_deg, node.lon_deg, node.alt_m));
    }
    let mut adjacency = vec![Vec::new(); ids.len()];
    for edge in edges {
        let a = *index
            .get(&edge.id_a)
            .ok_or_else(|| CliError::Input(format!("edge endpoint `{}` not found", edge.id_a)))?;
        let b = *index
            .get(&edge.id_b)
            .ok_or_else(|| CliError::Input(format!("edge endpoint `{}` not found", edge.id_b)))?;
        if a == b {
            return Err(CliError::Input(format!("self-loop on `{}`", edge.id_a)));
        }
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }
    Ok(Graph {
        ids,
        layer_of,
        ecef,
        adjacency,
    })
}

fn distance_m(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Classifies every node against the threshold for all four models.
pub fn classify(
    nodes: &[NodeRecord],
    edges: &[EdgeRecord],
    layers: &[Layer],
    source: &str,
    threshold: f64,
    hop_bound: u32,
) -> Result<ClassifyReport, CliError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(CliError::Input(format!(
            "threshold must lie in [0, 1], got {threshold}"
        )));
    }
    for layer in layers {
        layer.validate().map_err(CliError::from_input)?;
    }
    let graph = build_graph(nodes, edges, layers)?;
    let source_idx = graph
        .ids
        .iter()
        .position(|id| id == source)
        .ok_or_else(|| CliError::Input(format!("source node `{}` not found", source)))?;

    // Hop physics comes from the transmitting node's layer; the K-factor is
    // pinned to the layer's mean so classification is deterministic.
    let mean_k: Vec<f64> = layers
        .iter()
        .map(|l| 10.0_f64.powf(l.k_db_mean / 10.0))
        .collect();

    let n = graph.ids.len();
    let mut best: Vec<Option<[f64; 4]>> = vec![None; n];
    best[source_idx] = Some([1.0; 4]); // zero-hop route to itself

    let mut visited = vec![false; n];
    visited[source_idx] = true;
    let mut path: Vec<usize> = vec![source_idx];
    let mut hops: Vec<Hop> = Vec::new();
    let mut paths_seen: u64 = 0;

    evaluate_paths(
        &graph,
        layers,
        &mean_k,
        hop_bound as usize,
        &mut visited,
        &mut path,
        &mut hops,
        &mut best,
        &mut paths_seen,
    )?;

    let mut report_nodes: Vec<NodeClassification> = (0..n)
        .map(|i| {
            let layer = layers[graph.layer_of[i]].id.clone();
            match best[i] {
                Some(values) => NodeClassification {
                    id: graph.ids[i].clone(),
                    layer,
                    reachable: true,
                    best_scp: Some(ModelValues {
                        rician: values[0],
                        rayleigh_multi: values[1],
                        rayleigh_single: values[2],
                        erlang: values[3],
                    }),
                    secure: Some(SecureFlags {
                        rician: values[0] >= threshold,
                        rayleigh_multi: values[1] >= threshold,
                        rayleigh_single: values[2] >= threshold,
                        erlang: values[3] >= threshold,
                    }),
                },
                None => NodeClassification {
                    id: graph.ids[i].clone(),
                    layer,
                    reachable: false,
                    best_scp: None,
                    secure: None,
                },
            }
        })
        .collect();
    report_nodes.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(ClassifyReport {
        source: source.to_string(),
        threshold,
        hop_bound,
        nodes: report_nodes,
    })
}

#[allow(clippy::too_many_arguments)]
fn evaluate_paths(
    graph: &Graph,
    layers: &[Layer],
    mean_k: &[f64],
    hops_left: usize,
    visited: &mut Vec<bool>,
    path: &mut Vec<usize>,
    hops: &mut Vec<Hop>,
    best: &mut Vec<Option<[f64; 4]>>,
    paths_seen: &mut u64,
) -> Result<(), CliError> {
    if hops_left == 0 {
        return Ok(());
    }
    let current = *path.last().expect("path holds at least the source");
    for &next in &graph.adjacency[current] {
        if visited[next] {
            continue;
        }
        *paths_seen += 1;
        if *paths_seen > MAX_PATHS {
            return Err(CliError::Input(format!(
                "more than {MAX_PATHS} candidate paths; lower --hop-bound or prune the graph"
            )));
        }
        let tx_layer = graph.layer_of[current];
        let distance = distance_m(&graph.ecef[current], &graph.ecef[next]);
        if !(distance > 0.0) {
            return Err(CliError::Input(format!(
                "nodes `{}` and `{}` are coincident",
                graph.ids[current], graph.ids[next]
            )));
        }
        hops.push(Hop {
            layer_id: layers[tx_layer].id.clone(),
            distance,
            k_factor: mean_k[tx_layer],
        });
        let scenario = Scenario {
            layers: layers.to_vec(),
            route: Route { hops: hops.clone() },
            seed: 0,
        };
        let mut values = [0.0_f64; 4];
        for (slot, model) in ScpModel::ALL.iter().enumerate() {
            values[slot] =
                end_to_end_scp(*model, &scenario).map_err(CliError::from_numerical)?;
        }
        let entry = best[next].get_or_insert([0.0; 4]);
        for slot in 0..4 {
            if values[slot] > entry[slot] {
                entry[slot] = values[slot];
            }
        }

        visited[next] = true;
        path.push(next);
        evaluate_paths(
            graph, layers, mean_k, hops_left - 1, visited, path, hops, best, paths_seen,
        )?;
        path.pop();
        visited[next] = false;
        hops.pop();
    }
    Ok(())
}
