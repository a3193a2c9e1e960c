use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{parse, prepare as prepare_params, Command, Params};
use super::table::{Cell, Table};
use super::{CliError, Format, RunConfig};
use crate::dataset::{load_dataset, run_pca, sliding_window_mean, ColumnMapping, Dataset, Impute, DEFAULT_MIN_COUNT};
use crate::demography::{
    forward_log_likelihood, infer_transitions, read_observations, render_population_svg, sample_radiocarbon, simulate_hmm,
    write_observations, AscentConfig, DemographicHmm, LikelihoodGraph, Observation,
};
use crate::hinge::{fit_sawtooth, mg_timing_report, render_hinge_svg, select_breakpoint_count, Onset};
use crate::markov::{
    check_embeddability, coarse_grain, estimate_chain, integrate_master_equation, simulate_chain, stationary_distribution,
    test_markov_order, RateMatrix, TransitionKernel,
};
use crate::nullmodel::{histogram_svg, reference_config, run_null_model, NullModelConfig};
use crate::rng::derive_seed;
use crate::sde::{
    estimate_drift_diffusion, helmholtz_decompose, render_field_svg, return_probability, sample_sde, CycleQuery,
    DriftDiffusionField, GridSpec, SampledTrajectory,
};

/// One file produced by a pipeline, named relative to the output directory.
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Output {
    fn json(name: &str, value: &impl Serialize) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serialisable");
        bytes.push(b'\n');
        Output { name: name.into(), bytes }
    }

    fn table(stem: &str, table: &Table, format: Format) -> Result<Self, CliError> {
        Ok(Output { name: format!("{stem}.{}", format.extension()), bytes: table.render(format)? })
    }

    fn text(name: &str, text: String) -> Self {
        Output { name: name.into(), bytes: text.into_bytes() }
    }
}

pub(crate) fn prepare(command: Command, params: Value, base: &Path) -> Result<(Value, u64), CliError> {
    match command {
        Command::Pca => prepare_params::<PcaParams>(params, base),
        Command::MarkovEstimate => prepare_params::<EstimateParams>(params, base),
        Command::MarkovSimulate => prepare_params::<SimulateParams>(params, base),
        Command::MarkovEmbed => prepare_params::<EmbedParams>(params, base),
        Command::MarkovOrder => prepare_params::<OrderParams>(params, base),
        Command::MarkovMaster => prepare_params::<MasterParams>(params, base),
        Command::SdeFit => prepare_params::<SdeFitParams>(params, base),
        Command::SdeSample => prepare_params::<SdeSampleParams>(params, base),
        Command::SdeCycles => prepare_params::<CyclesParams>(params, base),
        Command::SdeHelmholtz => prepare_params::<HelmholtzParams>(params, base),
        Command::SdePlot => prepare_params::<SdePlotParams>(params, base),
        Command::Nullmodel => prepare_params::<NullModelParams>(params, base),
        Command::Hinge => prepare_params::<HingeParams>(params, base),
        Command::DemographySimulate => prepare_params::<DemographySimulateParams>(params, base),
        Command::DemographyLoglik => prepare_params::<LoglikParams>(params, base),
        Command::DemographyFit => prepare_params::<DemographyFitParams>(params, base),
    }
}

pub(crate) fn execute(config: &RunConfig) -> Result<Vec<Output>, CliError> {
    let (p, seed, format) = (&config.params, config.seed, config.format);
    match config.command {
        Command::Pca => pca(parse(p)?, format),
        Command::MarkovEstimate => markov_estimate(parse(p)?),
        Command::MarkovSimulate => markov_simulate(parse(p)?, seed, format),
        Command::MarkovEmbed => markov_embed(parse(p)?),
        Command::MarkovOrder => markov_order(parse(p)?),
        Command::MarkovMaster => markov_master(parse(p)?, format),
        Command::SdeFit => sde_fit(parse(p)?),
        Command::SdeSample => sde_sample(parse(p)?, seed, format),
        Command::SdeCycles => sde_cycles(parse(p)?, seed),
        Command::SdeHelmholtz => sde_helmholtz(parse(p)?),
        Command::SdePlot => sde_plot(parse(p)?, seed),
        Command::Nullmodel => nullmodel(parse(p)?, seed, format),
        Command::Hinge => hinge(parse(p)?, seed),
        Command::DemographySimulate => demography_simulate(parse(p)?, seed, format),
        Command::DemographyLoglik => demography_loglik(parse(p)?),
        Command::DemographyFit => demography_fit(parse(p)?, seed),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let at = || path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read: {e}")).at(at()))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("cannot parse: {e}")).at(at()))
}

fn open(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|e| CliError::input(format!("cannot read: {e}")).at(path.display().to_string()))
}

/// A value given inline in the config or as a path to a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Source<T> {
    File(PathBuf),
    Inline(T),
}

impl<T: DeserializeOwned + Clone> Source<T> {
    fn load(&self) -> Result<T, CliError> {
        match self {
            Source::File(p) => read_json(p),
            Source::Inline(v) => Ok(v.clone()),
        }
    }

    fn path(&mut self) -> Vec<&mut PathBuf> {
        match self {
            Source::File(p) => vec![p],
            Source::Inline(_) => Vec::new(),
        }
    }
}

/// Reads a `state` column, split into sequences by an optional `sequence` column.
fn read_sequences(path: &Path) -> Result<Vec<Vec<i64>>, CliError> {
    let at = || path.display().to_string();
    let mut r = csv::Reader::from_reader(open(path)?);
    let headers = r.headers().map_err(|e| CliError::input(e.to_string()).at(at()))?.clone();
    let state = headers.iter().position(|h| h == "state").ok_or_else(|| CliError::input("missing `state` column").at(at()))?;
    let group = headers.iter().position(|h| h == "sequence");
    let mut ids: Vec<String> = Vec::new();
    let mut out: Vec<Vec<i64>> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(e.to_string()).at(at()))?;
        let id = group.and_then(|g| rec.get(g)).unwrap_or("").to_string();
        let v: i64 = rec
            .get(state)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| CliError::input(format!("line {}: state is not an integer", line + 2)).at(at()))?;
        let k = match ids.iter().position(|i| *i == id) {
            Some(k) => k,
            None => {
                ids.push(id);
                out.push(Vec::new());
                out.len() - 1
            }
        };
        out[k].push(v);
    }
    if out.is_empty() {
        return Err(CliError::input("no states").at(at()));
    }
    Ok(out)
}

fn default_series_column() -> Option<String> {
    Some("series_id".into())
}

fn default_time_column() -> String {
    "time".into()
}

fn default_impute() -> Impute {
    Impute::DropIncomplete
}

fn default_plane() -> [String; 2] {
    ["pc1".into(), "pc2".into()]
}

fn load_plane(path: &Path, vars: &[String; 2]) -> Result<Dataset, CliError> {
    Ok(load_dataset(path, &ColumnMapping::standard(&[&vars[0], &vars[1]]))?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PcaParams {
    input: PathBuf,
    variables: Vec<String>,
    #[serde(default = "default_series_column")]
    series_column: Option<String>,
    #[serde(default = "default_time_column")]
    time_column: String,
    #[serde(default = "default_impute")]
    impute: Impute,
}

impl Params for PcaParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.input]
    }
}

fn pca(p: PcaParams, format: Format) -> Result<Vec<Output>, CliError> {
    let mapping = ColumnMapping {
        series_column: p.series_column.clone(),
        time_column: p.time_column.clone(),
        variable_columns: p.variables.clone(),
    };
    let ds = load_dataset(&p.input, &mapping)?;
    let res = run_pca(&ds, p.impute)?;
    let mut cols = vec!["series_id".to_string(), "time".into()];
    cols.extend((1..=res.components.len()).map(|k| format!("pc{k}")));
    let mut t = Table::with_columns(cols);
    for (key, s) in res.rows.iter().zip(&res.scores) {
        let mut row = vec![Cell::from(key.series_id.as_str()), key.time.into()];
        row.extend(s.iter().map(|&v| Cell::from(v)));
        t.push(row);
    }
    let summary = json!({
        "variables": p.variables,
        "components": res.components,
        "explained_fraction": res.explained_fraction,
        "mean": res.mean,
        "observations": res.rows.len(),
    });
    Ok(vec![Output::json("pca.json", &summary), Output::table("scores", &t, format)?])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimateParams {
    sequences: PathBuf,
    /// Defaults to one more than the largest observed state.
    #[serde(default)]
    states: Option<usize>,
    #[serde(default)]
    prior: f64,
}

impl Params for EstimateParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.sequences]
    }
}

fn markov_estimate(p: EstimateParams) -> Result<Vec<Output>, CliError> {
    let seqs = read_sequences(&p.sequences)?;
    let seqs: Vec<Vec<usize>> = seqs
        .into_iter()
        .map(|s| s.into_iter().map(usize::try_from).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::input("states must be non-negative").at(p.sequences.display().to_string()))?;
    let observed = seqs.iter().flatten().max().map_or(0, |m| m + 1);
    let kernel = estimate_chain(&seqs, p.states.unwrap_or(observed), p.prior)?;
    Ok(vec![Output::json("kernel.json", &kernel)])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateParams {
    kernel: Source<TransitionKernel>,
    start: usize,
    steps: usize,
}

impl Params for SimulateParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        self.kernel.path()
    }
}

fn markov_simulate(p: SimulateParams, seed: u64, format: Format) -> Result<Vec<Output>, CliError> {
    let kernel = p.kernel.load()?;
    let seq = simulate_chain(&kernel, p.start, p.steps, seed)?;
    let mut t = Table::new(&["step", "state"]);
    for (i, s) in seq.into_iter().enumerate() {
        t.push(vec![i.into(), s.into()]);
    }
    Ok(vec![Output::table("sequence", &t, format)?])
}

fn default_embed_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbedParams {
    kernel: Source<TransitionKernel>,
    #[serde(default = "default_embed_tolerance")]
    tolerance: f64,
}

impl Params for EmbedParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        self.kernel.path()
    }
}

fn markov_embed(p: EmbedParams) -> Result<Vec<Output>, CliError> {
    let kernel = p.kernel.load()?;
    let verdict = check_embeddability(&kernel, p.tolerance);
    let stationary = stationary_distribution(&kernel).ok();
    Ok(vec![Output::json("embed.json", &json!({ "kernel": kernel, "embeddability": verdict, "stationary": stationary }))])
}

fn default_lag() -> usize {
    1
}

fn default_threshold() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrderParams {
    sequence: PathBuf,
    #[serde(default = "default_lag")]
    max_lag: usize,
    #[serde(default = "default_threshold")]
    threshold: f64,
    /// Coarse-grain into bins of this width before testing.
    #[serde(default)]
    bin_width: Option<u64>,
}

impl Params for OrderParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.sequence]
    }
}

fn markov_order(p: OrderParams) -> Result<Vec<Output>, CliError> {
    let mut seqs = read_sequences(&p.sequence)?;
    if seqs.len() != 1 {
        return Err(CliError::input(format!("expected one sequence, found {}", seqs.len())).at(p.sequence.display().to_string()));
    }
    let mut seq = seqs.remove(0);
    if let Some(w) = p.bin_width {
        if w == 0 {
            return Err(CliError::schema("bin_width must be positive"));
        }
        seq = coarse_grain(&seq, w);
    }
    let report = test_markov_order(&seq, p.max_lag, p.threshold)?;
    Ok(vec![Output::json("order.json", &report)])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MasterParams {
    rates: Source<RateMatrix>,
    initial: Vec<f64>,
    t_final: f64,
    dt: f64,
}

impl Params for MasterParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        self.rates.path()
    }
}

fn markov_master(p: MasterParams, format: Format) -> Result<Vec<Output>, CliError> {
    let rates = p.rates.load()?;
    let traj = integrate_master_equation(&rates, &p.initial, p.t_final, p.dt)?;
    let mut cols = vec!["time".to_string()];
    cols.extend((0..rates.states()).map(|i| format!("p{i}")));
    let mut t = Table::with_columns(cols);
    for (time, probs) in traj.times.iter().zip(&traj.probabilities) {
        let mut row = vec![Cell::from(*time)];
        row.extend(probs.iter().map(|&v| Cell::from(v)));
        t.push(row);
    }
    Ok(vec![Output::table("trajectory", &t, format)?])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SdeFitParams {
    input: PathBuf,
    #[serde(default = "default_plane")]
    variables: [String; 2],
    grid: GridSpec,
    /// Defaults to the grid's own bandwidth.
    #[serde(default)]
    bandwidth: Option<f64>,
}

impl Params for SdeFitParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.input]
    }
}

fn sde_fit(p: SdeFitParams) -> Result<Vec<Output>, CliError> {
    let ds = load_plane(&p.input, &p.variables)?;
    let bw = p.bandwidth.unwrap_or_else(|| p.grid.default_bandwidth());
    let field = estimate_drift_diffusion(&ds, (&p.variables[0], &p.variables[1]), p.grid, bw)?;
    Ok(vec![Output::json("field.json", &field)])
}

fn default_replicates() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SdeSampleParams {
    field: PathBuf,
    starts: Vec<[f64; 2]>,
    dt: f64,
    t_final: f64,
    /// Paths per start.
    #[serde(default = "default_replicates")]
    replicates: usize,
}

impl Params for SdeSampleParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.field]
    }
}

fn sample_paths(
    field: &DriftDiffusionField,
    starts: &[[f64; 2]],
    replicates: usize,
    dt: f64,
    t_final: f64,
    seed: u64,
) -> Result<Vec<SampledTrajectory>, CliError> {
    let mut out = Vec::new();
    for (i, x0) in starts.iter().enumerate() {
        for r in 0..replicates {
            let k = (i * replicates + r) as u64;
            out.push(sample_sde(field, *x0, dt, t_final, derive_seed(seed, k))?);
        }
    }
    Ok(out)
}

fn sde_sample(p: SdeSampleParams, seed: u64, format: Format) -> Result<Vec<Output>, CliError> {
    let field: DriftDiffusionField = read_json(&p.field)?;
    let paths = sample_paths(&field, &p.starts, p.replicates, p.dt, p.t_final, seed)?;
    let mut t = Table::new(&["trajectory", "time", "x", "y"]);
    let mut summary = Vec::new();
    for (k, path) in paths.iter().enumerate() {
        for (time, pt) in path.times.iter().zip(&path.points) {
            t.push(vec![k.into(), (*time).into(), pt[0].into(), pt[1].into()]);
        }
        summary.push(json!({ "trajectory": k, "start": path.points[0], "end": path.end(), "termination": path.termination }));
    }
    Ok(vec![Output::table("trajectories", &t, format)?, Output::json("terminations.json", &summary)])
}

fn default_cycle_dt() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CyclesParams {
    field: PathBuf,
    origin: [f64; 2],
    epsilon1: f64,
    epsilon2: f64,
    horizon: f64,
    n_samples: usize,
    #[serde(default = "default_cycle_dt")]
    dt: f64,
}

impl Params for CyclesParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.field]
    }
}

fn sde_cycles(p: CyclesParams, seed: u64) -> Result<Vec<Output>, CliError> {
    let field: DriftDiffusionField = read_json(&p.field)?;
    let query = CycleQuery {
        origin: p.origin,
        epsilon1: p.epsilon1,
        epsilon2: p.epsilon2,
        horizon: p.horizon,
        n_samples: p.n_samples,
        seed,
        dt: p.dt,
    };
    let estimate = return_probability(&field, &query)?;
    Ok(vec![Output::json("cycles.json", &json!({ "query": query, "estimate": estimate }))])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HelmholtzParams {
    field: PathBuf,
}

impl Params for HelmholtzParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.field]
    }
}

fn sde_helmholtz(p: HelmholtzParams) -> Result<Vec<Output>, CliError> {
    let field: DriftDiffusionField = read_json(&p.field)?;
    Ok(vec![Output::json("helmholtz.json", &helmholtz_decompose(&field)?)])
}

fn default_plot_dt() -> f64 {
    0.05
}

fn default_plot_horizon() -> f64 {
    10.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SdePlotParams {
    field: PathBuf,
    /// Scores CSV whose points are drawn as dots.
    #[serde(default)]
    data: Option<PathBuf>,
    #[serde(default = "default_plane")]
    variables: [String; 2],
    /// Starts of sample trajectories drawn as polylines.
    #[serde(default)]
    starts: Vec<[f64; 2]>,
    #[serde(default = "default_plot_dt")]
    dt: f64,
    #[serde(default = "default_plot_horizon")]
    t_final: f64,
}

impl Params for SdePlotParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        let mut v = vec![&mut self.field];
        v.extend(self.data.as_mut());
        v
    }
}

fn sde_plot(p: SdePlotParams, seed: u64) -> Result<Vec<Output>, CliError> {
    let field: DriftDiffusionField = read_json(&p.field)?;
    let mut dots = Vec::new();
    if let Some(path) = &p.data {
        let ds = load_plane(path, &p.variables)?;
        for s in &ds.series {
            for o in &s.observations {
                if let (Some(x), Some(y)) = (o.values[0], o.values[1]) {
                    dots.push([x, y]);
                }
            }
        }
    }
    let paths = sample_paths(&field, &p.starts, 1, p.dt, p.t_final, seed)?;
    Ok(vec![Output::text("field.svg", render_field_svg(&field, &dots, &paths))])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NullModelParams {
    /// Kernel plus ensemble spec; the shipped reference run when absent.
    #[serde(default)]
    spec: Option<PathBuf>,
    #[serde(default)]
    n_bootstrap: Option<usize>,
    #[serde(default)]
    jitter: Option<bool>,
}

impl NullModelParams {
    fn config(&self) -> Result<NullModelConfig, CliError> {
        let mut c = match &self.spec {
            Some(p) => read_json(p)?,
            None => reference_config(),
        };
        if let Some(b) = self.n_bootstrap {
            c.n_bootstrap = b;
        }
        if let Some(j) = self.jitter {
            c.jitter = j;
        }
        Ok(c)
    }
}

impl Params for NullModelParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        self.spec.iter_mut().collect()
    }

    fn default_seed(&self) -> Result<u64, CliError> {
        Ok(self.config()?.ensemble.seed)
    }
}

fn nullmodel(p: NullModelParams, seed: u64, format: Format) -> Result<Vec<Output>, CliError> {
    let mut config = p.config()?;
    config.ensemble.seed = seed;
    let run = run_null_model(&config)?;
    let mut t = Table::new(&["series_id", "time", "value"]);
    for s in &run.dataset.series {
        for o in &s.observations {
            t.push(vec![s.id.as_str().into(), o.time.into(), o.values[0].unwrap_or(f64::NAN).into()]);
        }
    }
    let report = json!({
        "report": run.report,
        "stationary": run.stationary,
        "clusters_without_attractor": run.clusters_without_attractor(0.05),
    });
    Ok(vec![
        Output::json("report.json", &report),
        Output::table("ensemble", &t, format)?,
        Output::text("histogram.svg", histogram_svg(&run.report, "value")),
    ])
}

fn default_x() -> String {
    "pc1".into()
}

fn default_y() -> String {
    "pc2".into()
}

fn default_max_breaks() -> usize {
    3
}

fn default_restarts() -> usize {
    8
}

fn default_window() -> f64 {
    1.0
}

fn default_min_count() -> usize {
    DEFAULT_MIN_COUNT
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HingeParams {
    scores: PathBuf,
    /// `series_id,onset_time` rows.
    #[serde(default)]
    events: Option<PathBuf>,
    #[serde(default = "default_x")]
    x: String,
    #[serde(default = "default_y")]
    y: String,
    /// Fixed breakpoint count; selected by BIC up to `max_breaks` when absent.
    #[serde(default)]
    n_breaks: Option<usize>,
    #[serde(default = "default_max_breaks")]
    max_breaks: usize,
    #[serde(default = "default_restarts")]
    restarts: usize,
    #[serde(default = "default_window")]
    window_width: f64,
    #[serde(default = "default_min_count")]
    min_count: usize,
}

impl Params for HingeParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        let mut v = vec![&mut self.scores];
        v.extend(self.events.as_mut());
        v
    }
}

fn read_onsets(path: &Path) -> Result<Vec<Onset>, CliError> {
    let mut r = csv::Reader::from_reader(open(path)?);
    r.deserialize().collect::<Result<Vec<Onset>, _>>().map_err(|e| CliError::input(e.to_string()).at(path.display().to_string()))
}

fn hinge(p: HingeParams, seed: u64) -> Result<Vec<Output>, CliError> {
    let ds = load_dataset(&p.scores, &ColumnMapping::standard(&[&p.x, &p.y]))?;
    let points: Vec<(f64, f64)> =
        ds.series.iter().flat_map(|s| s.observations.iter()).filter_map(|o| Some((o.values[0]?, o.values[1]?))).collect();
    let fit = match p.n_breaks {
        Some(m) => fit_sawtooth(&points, m, p.restarts, seed)?,
        None => select_breakpoint_count(&points, p.max_breaks, p.restarts, seed)?,
    };
    let curve = sliding_window_mean(&points, p.window_width, p.min_count)?;
    let mut warnings = Vec::new();
    let timing = match &p.events {
        Some(path) if fit.n_breaks() == 2 => Some(mg_timing_report(&ds, 0, &read_onsets(path)?, &fit)?),
        Some(_) => {
            warnings.push(format!("event timing needs two breakpoints, the fit has {}", fit.n_breaks()));
            None
        }
        None => None,
    };
    let report = json!({
        "n_points": fit.n_points,
        "breakpoints": fit.breakpoints,
        "bic": fit.bic,
        "continuity_gap": fit.continuity_gap(),
        "window": curve,
        "timing": timing,
        "warnings": warnings,
    });
    Ok(vec![
        Output::json("fit.json", &fit),
        Output::json("report.json", &report),
        Output::text("hinge.svg", render_hinge_svg(&points, &curve, &fit, &p.x, &p.y)),
    ])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemographySimulateParams {
    model: PathBuf,
    /// Defaults to the length of the climate path.
    #[serde(default)]
    periods: Option<usize>,
    /// Radiocarbon dates to draw from the simulated totals.
    #[serde(default)]
    radiocarbon_samples: Option<u64>,
}

impl Params for DemographySimulateParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.model]
    }
}

fn demography_simulate(p: DemographySimulateParams, seed: u64, format: Format) -> Result<Vec<Output>, CliError> {
    let model: DemographicHmm = read_json(&p.model)?;
    let sim = simulate_hmm(&model, p.periods.unwrap_or(model.periods()), derive_seed(seed, 0))?;
    let classes = sim.populations.first().map_or(0, Vec::len);
    let mut cols = vec!["period".to_string(), "regime".into(), "total".into()];
    cols.extend((0..classes).map(|j| format!("z{j}")));
    let mut t = Table::with_columns(cols);
    for (k, z) in sim.populations.iter().enumerate() {
        let mut row = vec![Cell::from(k), sim.path[k].into(), sim.annual_totals[k].into()];
        row.extend(z.iter().map(|&v| Cell::from(v)));
        t.push(row);
    }
    let mut out = vec![
        Output::table("trajectory", &t, format)?,
        Output::json("simulation.json", &sim),
        Output::text("population.svg", render_population_svg(&sim)),
    ];
    if let Some(n) = p.radiocarbon_samples {
        let obs = sample_radiocarbon(&sim.annual_totals, n, derive_seed(seed, 1))?;
        let mut bytes = Vec::new();
        write_observations(&obs, &mut bytes)?;
        out.push(Output { name: "observations.csv".into(), bytes });
    }
    Ok(out)
}

fn read_model_and_observations(model: &Path, observations: &Path) -> Result<(DemographicHmm, Vec<Observation>), CliError> {
    let m: DemographicHmm = read_json(model)?;
    let obs = read_observations(open(observations)?).map_err(|e| CliError::from(e).at(observations.display().to_string()))?;
    Ok((m, obs))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoglikParams {
    model: PathBuf,
    observations: PathBuf,
}

impl Params for LoglikParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.model, &mut self.observations]
    }
}

fn demography_loglik(p: LoglikParams) -> Result<Vec<Output>, CliError> {
    let (model, obs) = read_model_and_observations(&p.model, &p.observations)?;
    let states = LikelihoodGraph::new(&model, &obs)?.state_count();
    let ll = forward_log_likelihood(&model, &obs)?;
    Ok(vec![Output::json("loglik.json", &json!({ "log_likelihood": ll, "states": states, "observations": obs.len() }))])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemographyFitParams {
    model: PathBuf,
    observations: PathBuf,
    #[serde(default)]
    ascent: AscentConfig,
}

impl Params for DemographyFitParams {
    fn inputs(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.model, &mut self.observations]
    }
}

fn demography_fit(p: DemographyFitParams, seed: u64) -> Result<Vec<Output>, CliError> {
    let (model, obs) = read_model_and_observations(&p.model, &p.observations)?;
    let res = infer_transitions(&model, &obs, &p.ascent, seed)?;
    Ok(vec![Output::json("fitted.json", &res)])
}
