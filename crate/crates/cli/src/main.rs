//! Command-line driver: scenario evaluation, Monte-Carlo estimation,
//! figure-style parameter sweeps, Marcum-collapse diagnostics, identity
//! verification, and node-dataset classification.
//!
//! Exit codes: 0 on success, 2 for input errors, 3 for numerical failures.

// `!(x > 0.0)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod classify;
mod report;
mod schema;
mod sweep;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ntnscp_core::closedform::{
    fit_marcum_a_hat, marcum_collapsed_on_grid, marcum_product_on_grid, fit_grid,
};
use ntnscp_core::montecarlo::{estimate_scp, EveGeometry, McConfig};
use ntnscp_core::verify::{lemma1_residual, lemma2_residual, lemma3_check, marcum_product_error};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn from_input(e: ntnscp_core::Error) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn from_numerical(e: ntnscp_core::Error) -> Self {
        match e {
            ntnscp_core::Error::InvalidScenario(_) => CliError::Input(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }

    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Common,
    Exact,
}

impl ModeArg {
    fn geometry(self) -> EveGeometry {
        match self {
            ModeArg::Common => EveGeometry::CommonDistance,
            ModeArg::Exact => EveGeometry::Exact,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeArg::Common => "common",
            ModeArg::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "ntnscp",
    version,
    about = "Secure connection probability of multi-hop routes in multi-layer networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the four closed-form SCP models for a scenario
    Eval {
        /// Scenario JSON file
        scenario: PathBuf,
    },
    /// Estimate the SCP by Monte-Carlo simulation
    Mc {
        /// Scenario JSON file
        scenario: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Overrides the scenario seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Common)]
        mode: ModeArg,
    },
    /// Sweep one parameter and write per-model SCP rows as CSV
    Sweep {
        /// Scenario JSON file
        scenario: PathBuf,
        /// Sweep specification JSON file
        sweep: PathBuf,
        /// CSV output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the scenario seed for Monte-Carlo points
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report the Marcum-collapse fit per layer of a scenario
    Fit {
        /// Scenario JSON file
        scenario: PathBuf,
        /// Also run the random-route error study with this many trials
        #[arg(long)]
        study_trials: Option<u32>,
        /// Seed for the error study
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path for residual/error curves (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the identities and approximations behind the closed form
    Verify,
    /// Classify dataset nodes by their best-route SCP from a source node
    Classify {
        /// Node CSV: id,layer,lat_deg,lon_deg,alt_m
        nodes: PathBuf,
        /// Adjacency CSV: id_a,id_b
        edges: PathBuf,
        /// Layer-set JSON ({"layers": [...]}; a scenario file also works)
        #[arg(long)]
        layers: PathBuf,
        /// Source node id
        #[arg(long)]
        source: String,
        /// SCP threshold a route must meet
        #[arg(long, default_value_t = 0.99)]
        threshold: f64,
        /// Maximum hops explored per route
        #[arg(long, default_value_t = 7)]
        hop_bound: u32,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Eval { scenario } => cmd_eval(&scenario),
        Command::Mc {
            scenario,
            trials,
            seed,
            mode,
        } => cmd_mc(&scenario, trials, seed, mode),
        Command::Sweep {
            scenario,
            sweep,
            out,
            seed,
        } => cmd_sweep(&scenario, &sweep, out.as_deref(), seed),
        Command::Fit {
            scenario,
            study_trials,
            seed,
            out,
        } => cmd_fit(&scenario, study_trials, seed, out.as_deref()),
        Command::Verify => cmd_verify(),
        Command::Classify {
            nodes,
            edges,
            layers,
            source,
            threshold,
            hop_bound,
            format,
            out,
        } => cmd_classify(
            &nodes, &edges, &layers, &source, threshold, hop_bound, format, out.as_deref(),
        ),
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("serialization failed: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_eval(scenario_path: &Path) -> Result<(), CliError> {
    let file = schema::ScenarioFile::load(scenario_path)?;
    let scenario = file.to_scenario()?;
    let report = report::closed_form_report(&scenario)?;
    emit_json(&report, None)
}

fn cmd_mc(
    scenario_path: &Path,
    trials: u64,
    seed: Option<u64>,
    mode: ModeArg,
) -> Result<(), CliError> {
    let file = schema::ScenarioFile::load(scenario_path)?;
    let scenario = file.to_scenario()?;
    let seed = seed.unwrap_or(scenario.seed);
    let config = McConfig {
        trials,
        seed,
        mode: mode.geometry(),
        truncation_radii: None,
    };
    let estimate = estimate_scp(&scenario, &config).map_err(CliError::from_numerical)?;
    let report = report::McReport::new(&scenario, &estimate, seed, mode.name());
    emit_json(&report, None)
}

fn cmd_sweep(
    scenario_path: &Path,
    sweep_path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let scenario = schema::ScenarioFile::load(scenario_path)?.to_scenario()?;
    let spec = schema::SweepFile::load(sweep_path)?;
    let mode = match spec.mode.as_deref() {
        None | Some("common") => EveGeometry::CommonDistance,
        Some("exact") => EveGeometry::Exact,
        Some(other) => {
            return Err(CliError::Input(format!(
                "unknown mode `{other}` (expected `common` or `exact`)"
            )))
        }
    };
    let seed = seed.unwrap_or(scenario.seed);
    let rows = sweep::run_sweep(&scenario, &spec, seed, mode)?;
    match out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            sweep::write_csv(&rows, file)
        }
        None => sweep::write_csv(&rows, std::io::stdout().lock()),
    }
}

#[derive(Serialize)]
struct LayerFit {
    layer: String,
    hop_count: usize,
    a_hat: f64,
    b_hat_sq_coeff: f64,
    residual_mean: f64,
    residual_max: f64,
    rayleigh_regime: bool,
    hit_upper_bracket: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    study_max_mean_error: Option<f64>,
}

#[derive(Serialize)]
struct FitReport {
    per_layer: Vec<LayerFit>,
}

fn cmd_fit(
    scenario_path: &Path,
    study_trials: Option<u32>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let scenario = schema::ScenarioFile::load(scenario_path)?.to_scenario()?;
    let seed = seed.unwrap_or(scenario.seed);
    let grid = fit_grid();
    let mut per_layer = Vec::new();
    let mut curves: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for (idx, hops) in scenario.hops_by_layer() {
        let layer = &scenario.layers[idx];
        let collapse = fit_marcum_a_hat(&hops, layer).map_err(CliError::from_numerical)?;
        let product =
            marcum_product_on_grid(&hops, layer, &grid).map_err(CliError::from_numerical)?;
        let collapsed = marcum_collapsed_on_grid(&collapse, &grid);
        let residuals: Vec<f64> = product
            .iter()
            .zip(&collapsed)
            .map(|(p, q)| (p - q).abs())
            .collect();
        let residual_mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
        let residual_max = residuals.iter().cloned().fold(0.0, f64::max);
        let rayleigh_regime = collapse.a_hat == 0.0;
        if rayleigh_regime {
            eprintln!(
                "warning: layer `{}`: all K-factors are zero; the Rician coefficient is \
                 singular there, use a Rayleigh baseline",
                layer.id
            );
        }
        if collapse.hit_upper_bracket {
            eprintln!(
                "warning: layer `{}`: fitted a_hat sits on the search bracket; fit regime \
                 violated",
                layer.id
            );
        }
        let study_max_mean_error = match study_trials {
            Some(trials) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let curve = marcum_product_error(layer, trials, (2, 7), &mut rng)
                    .map_err(CliError::from_numerical)?;
                curves.push((
                    layer.id.clone(),
                    curve.grid.clone(),
                    curve.mean_abs_error.clone(),
                ));
                Some(curve.max_mean_abs_error())
            }
            None => {
                curves.push((layer.id.clone(), grid.clone(), residuals.clone()));
                None
            }
        };
        per_layer.push(LayerFit {
            layer: layer.id.clone(),
            hop_count: hops.len(),
            a_hat: collapse.a_hat,
            b_hat_sq_coeff: collapse.b_hat_sq_coeff,
            residual_mean,
            residual_max,
            rayleigh_regime,
            hit_upper_bracket: collapse.hit_upper_bracket,
            study_max_mean_error,
        });
    }
    emit_json(&FitReport { per_layer }, None)?;
    if let Some(path) = out {
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        let mut writer = csv::Writer::from_writer(file);
        writer
            .write_record(["layer", "grid_x", "mean_abs_error"])
            .map_err(|e| CliError::Input(format!("csv write failed: {e}")))?;
        for (layer, grid_x, errors) in &curves {
            for (x, e) in grid_x.iter().zip(errors) {
                writer
                    .write_record([layer.clone(), x.to_string(), e.to_string()])
                    .map_err(|e| CliError::Input(format!("csv write failed: {e}")))?;
            }
        }
        writer
            .flush()
            .map_err(|e| CliError::Input(format!("csv flush failed: {e}")))?;
    }
    Ok(())
}

fn cmd_verify() -> Result<(), CliError> {
    let mut failures = 0u32;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut print_row = |name: &str, detail: String, pass: bool| {
        writeln!(
            out,
            "{:<26} {:<52} {}",
            name,
            detail,
            if pass { "PASS" } else { "FAIL" }
        )
        .expect("stdout");
        pass
    };

    // Spatial-integral identity over the full parameter grid.
    let mut worst = 0.0_f64;
    let mut converged = true;
    for m in [0.8, 1.0, 2.0, 5.0, 10.5] {
        for alpha in [2.1, 2.3, 2.5, 2.9] {
            for k in [1e-6, 1e-3, 1.0, 1e3] {
                match lemma1_residual(m, alpha, k) {
                    Ok(r) => worst = worst.max(r),
                    Err(_) => converged = false,
                }
            }
        }
    }
    if !print_row(
        "spatial integral",
        format!("max residual {worst:.3e} over 80-point grid"),
        converged && worst < 1e-6,
    ) {
        failures += 1;
    }

    // Marcum-integral approximation: |deviation| must fall as a_hat grows.
    let mut devs = Vec::new();
    for a_hat in [2.0, 4.0, 6.0, 8.0, 10.0] {
        let dev = lemma2_residual(a_hat, 1.0, 1.0, 2.5).map_err(CliError::from_numerical)?;
        devs.push((a_hat, dev));
    }
    let monotone = devs.windows(2).all(|w| w[1].1.abs() < w[0].1.abs());
    for (a_hat, dev) in &devs {
        writeln!(
            std::io::stdout().lock(),
            "{:<26} a_hat = {:>4}  relative deviation = {:+.4e}",
            "marcum integral",
            a_hat,
            dev
        )
        .expect("stdout");
    }
    if !print_row(
        "marcum integral",
        "|deviation| strictly decreasing in a_hat".to_string(),
        monotone,
    ) {
        failures += 1;
    }

    // Minimum-of-exponentials identity on 20 random configurations.
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e3);
    let mut all_agree = true;
    let mut worst_sigma = 0.0_f64;
    for case in 0..20 {
        use rand::Rng;
        let n = rng.gen_range(1..=7);
        let rates: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
        let c = rng.gen_range(0.1..2.0);
        let outcome =
            lemma3_check(&rates, c, 1_000_000, &mut rng).map_err(CliError::from_numerical)?;
        let sigmas = (outcome.analytic - outcome.empirical).abs() / outcome.std_error.max(1e-12);
        worst_sigma = worst_sigma.max(sigmas);
        if !outcome.agrees_within(3.0) {
            all_agree = false;
            writeln!(
                std::io::stdout().lock(),
                "{:<26} case {case}: analytic {:.6} empirical {:.6} ({:.1} sigma)",
                "min-exponential identity",
                outcome.analytic,
                outcome.empirical,
                sigmas
            )
            .expect("stdout");
        }
    }
    if !print_row(
        "min-exponential identity",
        format!("20 random configurations, worst {worst_sigma:.2} sigma"),
        all_agree,
    ) {
        failures += 1;
    }

    if failures > 0 {
        Err(CliError::Numerical(format!(
            "{failures} verification check(s) failed"
        )))
    } else {
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_classify(
    nodes_path: &Path,
    edges_path: &Path,
    layers_path: &Path,
    source: &str,
    threshold: f64,
    hop_bound: u32,
    format: FormatArg,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let nodes = schema::load_nodes(nodes_path)?;
    let edges = schema::load_edges(edges_path)?;
    let layers: Vec<_> = schema::LayerSetFile::load(layers_path)?
        .layers
        .iter()
        .map(schema::LayerFile::to_layer)
        .collect();
    let report = classify::classify(&nodes, &edges, &layers, source, threshold, hop_bound)?;
    match format {
        FormatArg::Json => emit_json(&report, out),
        FormatArg::Csv => {
            let write = |w: &mut dyn Write| -> Result<(), CliError> {
                let mut writer = csv::Writer::from_writer(w);
                writer
                    .write_record([
                        "id",
                        "layer",
                        "reachable",
                        "rician_scp",
                        "rician_secure",
                        "rayleigh_multi_scp",
                        "rayleigh_multi_secure",
                        "rayleigh_single_scp",
                        "rayleigh_single_secure",
                        "erlang_scp",
                        "erlang_secure",
                    ])
                    .map_err(|e| CliError::Input(format!("csv write failed: {e}")))?;
                for node in &report.nodes {
                    let (scp, secure) = (&node.best_scp, &node.secure);
                    let field = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
                    let flag =
                        |v: Option<bool>| v.map_or(String::new(), |x| x.to_string());
                    writer
                        .write_record([
                            node.id.clone(),
                            node.layer.clone(),
                            node.reachable.to_string(),
                            field(scp.as_ref().map(|s| s.rician)),
                            flag(secure.as_ref().map(|s| s.rician)),
                            field(scp.as_ref().map(|s| s.rayleigh_multi)),
                            flag(secure.as_ref().map(|s| s.rayleigh_multi)),
                            field(scp.as_ref().map(|s| s.rayleigh_single)),
                            flag(secure.as_ref().map(|s| s.rayleigh_single)),
                            field(scp.as_ref().map(|s| s.erlang)),
                            flag(secure.as_ref().map(|s| s.erlang)),
                        ])
                        .map_err(|e| CliError::Input(format!("csv write failed: {e}")))?;
                }
                writer
                    .flush()
                    .map_err(|e| CliError::Input(format!("csv flush failed: {e}")))
            };
            match out {
                Some(path) => {
                    let mut file = std::fs::File::create(path).map_err(|e| {
                        CliError::Input(format!("cannot write {}: {e}", path.display()))
                    })?;
                    write(&mut file)
                }
                None => write(&mut std::io::stdout().lock()),
            }
        }
    }
}
