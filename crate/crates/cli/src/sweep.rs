//! Parameter sweeps: one scenario, one varying parameter, CSV out.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ntnscp_core::closedform::end_to_end_scp;
use ntnscp_core::closedform::ScpModel;
use ntnscp_core::model::{random_route, Scenario};
use ntnscp_core::montecarlo::{estimate_scp, EveGeometry, McConfig};

use crate::schema::{ModelChoice, SweepFile, SweepParameter};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub parameter_value: f64,
    pub model: &'static str,
    pub scp: f64,
    pub mc_half_width: Option<f64>,
}

fn model_of(choice: ModelChoice) -> Option<ScpModel> {
    match choice {
        ModelChoice::Rician => Some(ScpModel::Rician),
        ModelChoice::RayleighMulti => Some(ScpModel::RayleighMulti),
        ModelChoice::RayleighSingle => Some(ScpModel::RayleighSingle),
        ModelChoice::Erlang => Some(ScpModel::Erlang),
        ModelChoice::MonteCarlo => None,
    }
}

/// Applies one sweep value to a copy of the base scenario.
fn apply_value(
    base: &Scenario,
    parameter: SweepParameter,
    value: f64,
) -> Result<Scenario, CliError> {
    let mut scenario = base.clone();
    match parameter {
        SweepParameter::EveDensity => {
            if !(value >= 0.0) {
                return Err(CliError::Input(format!("negative density {value}")));
            }
            for layer in &mut scenario.layers {
                layer.eve_density = value;
            }
        }
        SweepParameter::KFactorDb => {
            let k = 10.0_f64.powf(value / 10.0);
            for hop in &mut scenario.route.hops {
                hop.k_factor = k;
            }
        }
        SweepParameter::AvgLinkDistance => {
            if !(value > 0.0) {
                return Err(CliError::Input(format!(
                    "average link distance must be positive, got {value}"
                )));
            }
            let mean: f64 = scenario.route.hops.iter().map(|h| h.distance).sum::<f64>()
                / scenario.route.hops.len() as f64;
            let scale = value * 1e3 / mean;
            for hop in &mut scenario.route.hops {
                hop.distance *= scale;
            }
        }
        SweepParameter::HopCount => {
            let count = value.round();
            if !(count >= 1.0) || (value - count).abs() > 1e-9 {
                return Err(CliError::Input(format!(
                    "hop_count values must be positive integers, got {value}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
            rng.set_stream(count as u64);
            scenario.route = random_route(&scenario.layers, (count as usize, count as usize), &mut rng);
        }
    }
    Ok(scenario)
}

/// Runs the sweep. Rows are ordered by parameter value, then model name.
pub fn run_sweep(
    base: &Scenario,
    sweep: &SweepFile,
    seed: u64,
    mode: EveGeometry,
) -> Result<Vec<SweepRow>, CliError> {
    let mut values = sweep.values.expand()?;
    values.sort_by(|a, b| a.partial_cmp(b).expect("sweep values are ordered"));
    let mut models = sweep.models.clone();
    models.sort();
    models.dedup();

    let mut rows = Vec::new();
    for &value in &values {
        let scenario = apply_value(base, sweep.parameter, value)?;
        scenario.validate().map_err(CliError::from_input)?;
        for &choice in &models {
            match model_of(choice) {
                Some(model) => {
                    let scp =
                        end_to_end_scp(model, &scenario).map_err(CliError::from_numerical)?;
                    rows.push(SweepRow {
                        parameter_value: value,
                        model: choice.name(),
                        scp,
                        mc_half_width: None,
                    });
                }
                None => {
                    let config = McConfig {
                        trials: sweep.trials.expect("validated at load"),
                        seed,
                        mode,
                        truncation_radii: None,
                    };
                    let est =
                        estimate_scp(&scenario, &config).map_err(CliError::from_numerical)?;
                    rows.push(SweepRow {
                        parameter_value: value,
                        model: choice.name(),
                        scp: est.scp_hat,
                        mc_half_width: Some(est.half_width_95),
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(["parameter_value", "model", "scp", "mc_half_width"])
        .map_err(|e| CliError::Input(format!("csv write failed: {e}")))?;
    for row in rows {
        let half_width = row.mc_half_width.map_or(String::new(), |h| h.to_string());
        writer
            .write_record([
                row.parameter_value.to_string(),
                row.model.to_string(),
                row.scp.to_string(),
                half_width,
            ])
            .map_err(|e| CliError::Input(format!("csv write failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Input(format!("csv flush failed: {e}")))
}
