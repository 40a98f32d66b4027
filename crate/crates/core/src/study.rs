//! Run orchestration: configuration files, single simulations, and the
//! six-scenario optimization study with its CSV/JSON artifacts.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    ConfigError, CostParams, DeliveryWindow, GeneError, NetworkConfig, PolicyParams, RetailerSpec,
    Scenario, ScenarioError, TransportSpec,
};
use crate::sim::{run_with_options, write_trace_csv, SimError, SimOptions, SimResult};
use crate::ssga::{run_ssga, write_convergence_csv, GaParams, GenerationLog, SsgaError};
use crate::stats::{mean_and_ci, run_until_precise_with, PrecisionPolicy, StatsError};

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Ssga(#[from] SsgaError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Gene(#[from] GeneError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioBlock {
    pub ids: Vec<u32>,
}

impl Default for ScenarioBlock {
    fn default() -> Self {
        Self {
            ids: Scenario::IDS.iter().map(|&i| i as u32).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsBlock {
    pub confidence: f64,
    pub delta: f64,
    /// Replicate cap per fitness evaluation.
    pub max_n: usize,
    /// Replicate cap for whole-GA runs in a study.
    pub ga_max_n: usize,
}

impl Default for StatsBlock {
    fn default() -> Self {
        Self {
            confidence: 0.95,
            delta: 0.05,
            max_n: 100,
            ga_max_n: 30,
        }
    }
}

impl StatsBlock {
    pub fn simulation(&self) -> PrecisionPolicy {
        PrecisionPolicy {
            confidence: self.confidence,
            delta: self.delta,
            max_n: self.max_n,
        }
    }

    pub fn ga_runs(&self) -> PrecisionPolicy {
        PrecisionPolicy {
            max_n: self.ga_max_n,
            ..self.simulation()
        }
    }
}

/// On-disk configuration. Every block is optional and defaults to the
/// reference instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub retailers: Vec<RetailerSpec>,
    pub costs: CostParams,
    pub transport: TransportSpec,
    pub window: DeliveryWindow,
    pub horizon_days: f64,
    pub scenario: ScenarioBlock,
    pub ga: GaParams,
    pub stats: StatsBlock,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let net = NetworkConfig::reference_instance();
        Self {
            retailers: net.retailers,
            costs: net.costs,
            transport: net.transport,
            window: net.window,
            horizon_days: net.horizon_days,
            scenario: ScenarioBlock::default(),
            ga: GaParams::default(),
            stats: StatsBlock::default(),
        }
    }
}

impl ConfigFile {
    pub fn network(&self) -> NetworkConfig {
        NetworkConfig {
            retailers: self.retailers.clone(),
            costs: self.costs.clone(),
            transport: self.transport.clone(),
            window: self.window,
            horizon_days: self.horizon_days,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Simulate,
    Optimize,
    Study,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenarios: Vec<Scenario>,
    pub mode: Mode,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub precision: PrecisionPolicy,
    pub ga_precision: PrecisionPolicy,
    pub ga: GaParams,
    pub config_path: Option<PathBuf>,
}

impl RunManifest {
    pub fn from_config(
        file: &ConfigFile,
        config_path: Option<PathBuf>,
    ) -> Result<Self, RunnerError> {
        let scenarios = file
            .scenario
            .ids
            .iter()
            .map(|&id| Scenario::from_id(id))
            .collect::<Result<Vec<_>, _>>()?;
        file.stats.simulation().validate()?;
        file.stats.ga_runs().validate()?;
        file.ga.validate()?;
        Ok(Self {
            scenarios,
            mode: Mode::Study,
            seed: 0,
            out_dir: PathBuf::from("out"),
            precision: file.stats.simulation(),
            ga_precision: file.stats.ga_runs(),
            ga: file.ga,
            config_path,
        })
    }

    /// Small population and generation counts for smoke runs.
    pub fn apply_fast_profile(&mut self) {
        self.ga.population_size = 20;
        self.ga.generations = 100;
        self.precision.max_n = 10;
        self.ga_precision.max_n = self.ga_precision.max_n.min(10);
    }
}

pub fn parse_config(text: &str, path: &Path) -> Result<ConfigFile, RunnerError> {
    serde_json::from_str(text).map_err(|e| RunnerError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Reads, parses and validates a configuration file.
pub fn load_manifest(path: &Path) -> Result<(RunManifest, NetworkConfig), RunnerError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file = parse_config(&text, path)?;
    let config = file.network().validate()?;
    let manifest = RunManifest::from_config(&file, Some(path.to_path_buf()))?;
    Ok((manifest, config))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, RunnerError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(io_err(path))
}

fn write_with<F>(path: &Path, f: F) -> Result<(), RunnerError>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// One seeded replication with trace, writing `trace.csv` and `ledger.csv`.
pub fn simulate_once(
    manifest: &RunManifest,
    config: &NetworkConfig,
    scenario: Scenario,
    policy: &PolicyParams,
    options: &SimOptions,
) -> Result<SimResult, RunnerError> {
    let mut options = options.clone();
    options.record_trace = true;
    let result = run_with_options(config, policy, scenario, manifest.seed, &options)?;
    let trace = result.trace.as_deref().unwrap_or_default();
    write_with(&manifest.out_dir.join("trace.csv"), |w| {
        write_trace_csv(trace, w)
    })?;
    write_with(&manifest.out_dir.join("ledger.csv"), |w| {
        result.breakdown.write_csv(w)
    })?;
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub ci_halfwidth: f64,
}

impl MetricSummary {
    fn of(values: &[f64], confidence: f64) -> Result<Self, StatsError> {
        let (mean, width) = mean_and_ci(values, confidence)?;
        Ok(Self {
            mean,
            ci_halfwidth: width / 2.0,
        })
    }
}

/// Best chromosome of one whole-GA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaRun {
    pub seed: u64,
    pub genes: Vec<i64>,
    pub policy: PolicyParams,
    pub f: f64,
    pub total_cost: f64,
    pub fill_rate: f64,
    pub evaluations: usize,
    #[serde(skip)]
    pub convergence: Vec<GenerationLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: u8,
    pub description: String,
    pub replicates: usize,
    pub precise: bool,
    pub fitness: MetricSummary,
    pub total_cost: MetricSummary,
    pub fill_rate: MetricSummary,
    pub reorder_point: MetricSummary,
    pub order_quantity: MetricSummary,
    /// The run whose best solution has the lowest total cost.
    pub best: GaRun,
    pub runs: Vec<GaRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub seed: u64,
    pub ga: GaParams,
    pub precision: PrecisionPolicy,
    pub scenarios: Vec<ScenarioReport>,
}

impl StudyReport {
    pub fn scenario(&self, id: u8) -> Option<&ScenarioReport> {
        self.scenarios.iter().find(|s| s.scenario == id)
    }
}

/// Seed source for the GA runs of one scenario.
fn scenario_seeds(base: u64, scenario: Scenario) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(100 + scenario.id as u64);
    rng
}

/// Repeats whole GA runs for one scenario until the best-F estimate is precise.
pub fn study_scenario(
    manifest: &RunManifest,
    config: &NetworkConfig,
    scenario: Scenario,
) -> Result<ScenarioReport, RunnerError> {
    let mut seeds = scenario_seeds(manifest.seed, scenario);
    let (summary, runs) = run_until_precise_with(
        |seed| {
            run_ssga(scenario, config, &manifest.ga, &manifest.precision, seed).map(|o| (seed, o))
        },
        |r| r.as_ref().map_or(f64::NAN, |(_, o)| o.best.f()),
        &mut seeds,
        &manifest.ga_precision,
    )?;
    let runs = runs
        .into_iter()
        .map(|r| {
            let (seed, o) = r?;
            let fit = o.best_fitness();
            let policy =
                crate::model::decode_chromosome(&o.best.genes, scenario, config.retailer_count())?;
            Ok(GaRun {
                seed,
                genes: o.best.genes.clone(),
                policy,
                f: fit.f,
                total_cost: fit.total_cost,
                fill_rate: fit.fill_rate,
                evaluations: o.evaluations,
                convergence: o.log,
            })
        })
        .collect::<Result<Vec<_>, RunnerError>>()?;

    let conf = manifest.ga_precision.confidence;
    let col = |f: fn(&GaRun) -> f64| runs.iter().map(f).collect::<Vec<_>>();
    let best = runs
        .iter()
        .min_by(|a, b| a.total_cost.total_cmp(&b.total_cost))
        .cloned()
        .expect("at least three runs");
    Ok(ScenarioReport {
        scenario: scenario.id,
        description: scenario.describe().to_string(),
        replicates: summary.n,
        precise: summary.precise,
        fitness: MetricSummary::of(&col(|r| r.f), conf)?,
        total_cost: MetricSummary::of(&col(|r| r.total_cost), conf)?,
        fill_rate: MetricSummary::of(&col(|r| r.fill_rate), conf)?,
        reorder_point: MetricSummary::of(&col(|r| r.genes[0] as f64), conf)?,
        order_quantity: MetricSummary::of(&col(|r| r.genes[1] as f64), conf)?,
        best,
        runs,
    })
}

/// Runs every scenario of the manifest (concurrently) and writes the study
/// artifacts into `manifest.out_dir`.
pub fn run_study(
    manifest: &RunManifest,
    config: &NetworkConfig,
) -> Result<StudyReport, RunnerError> {
    let out = &manifest.out_dir;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut reports = manifest
        .scenarios
        .par_iter()
        .map(|&s| {
            let report = study_scenario(manifest, config, s)?;
            write_scenario_artifacts(out, &report)?;
            Ok(report)
        })
        .collect::<Result<Vec<_>, RunnerError>>()?;
    reports.sort_by_key(|r| r.scenario);
    let report = StudyReport {
        seed: manifest.seed,
        ga: manifest.ga,
        precision: manifest.precision,
        scenarios: reports,
    };
    write_study_artifacts(out, &report)?;
    Ok(report)
}

fn write_scenario_artifacts(out: &Path, report: &ScenarioReport) -> Result<(), RunnerError> {
    for (k, run) in report.runs.iter().enumerate() {
        let path =
            out.join("convergence")
                .join(format!("scenario{}_run{}.csv", report.scenario, k + 1));
        write_with(&path, |w| write_convergence_csv(&run.convergence, w))?;
    }
    let path = out.join(format!("scenario{}.json", report.scenario));
    write_with(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, report).map_err(io::Error::other)
    })
}

pub const SUMMARY_HEADER: &str = "scenario,metric,mean,ci_halfwidth";
pub const BEST_SOLUTIONS_HEADER: &str = "scenario,TC,r,Q,dispatch_params";
pub const RQ_SUMMARY_HEADER: &str = "scenario,metric,mean,ci_halfwidth";

pub fn write_summary_csv<W: Write>(report: &StudyReport, mut w: W) -> io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for s in &report.scenarios {
        for (name, m) in [("F", s.fitness), ("TC", s.total_cost), ("FR", s.fill_rate)] {
            writeln!(w, "{},{name},{},{}", s.scenario, m.mean, m.ci_halfwidth)?;
        }
    }
    Ok(())
}

pub fn write_best_solutions_csv<W: Write>(report: &StudyReport, mut w: W) -> io::Result<()> {
    writeln!(w, "{BEST_SOLUTIONS_HEADER}")?;
    for s in &report.scenarios {
        let b = &s.best;
        writeln!(
            w,
            "{},{},{},{},{}",
            s.scenario,
            b.total_cost,
            b.policy.reorder_point,
            b.policy.order_quantity,
            b.policy.dispatch_label()
        )?;
    }
    Ok(())
}

pub fn write_rq_summary_csv<W: Write>(report: &StudyReport, mut w: W) -> io::Result<()> {
    writeln!(w, "{RQ_SUMMARY_HEADER}")?;
    for s in &report.scenarios {
        for (name, m) in [("r", s.reorder_point), ("Q", s.order_quantity)] {
            writeln!(w, "{},{name},{},{}", s.scenario, m.mean, m.ci_halfwidth)?;
        }
    }
    Ok(())
}

fn write_study_artifacts(out: &Path, report: &StudyReport) -> Result<(), RunnerError> {
    write_with(&out.join("summary.csv"), |w| write_summary_csv(report, w))?;
    write_with(&out.join("best_solutions.csv"), |w| {
        write_best_solutions_csv(report, w)
    })?;
    write_with(&out.join("rq_summary.csv"), |w| {
        write_rq_summary_csv(report, w)
    })?;
    write_with(&out.join("study.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, report).map_err(io::Error::other)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_from_reference_instance() {
        let file = parse_config("{}", Path::new("x.json")).unwrap();
        assert_eq!(file.network(), NetworkConfig::reference_instance());
        assert_eq!(file.ga, GaParams::default());
        assert_eq!(file.ga.population_size, 100);
        assert_eq!(file.ga.generations, 1000);
        assert_eq!(file.ga.mutation_probability, 0.2);
        assert_eq!(file.scenario.ids, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn partial_ga_block_keeps_other_defaults() {
        let file = parse_config(r#"{"ga": {"generations": 10}}"#, Path::new("x.json")).unwrap();
        assert_eq!(file.ga.generations, 10);
        assert_eq!(file.ga.population_size, 100);
    }

    #[test]
    fn unknown_scenario_rejected() {
        let file = parse_config(r#"{"scenario": {"ids": [2, 7]}}"#, Path::new("x.json")).unwrap();
        let err = RunManifest::from_config(&file, None).unwrap_err();
        assert!(err.to_string().contains("unknown scenario"), "{err}");
    }

    #[test]
    fn parse_error_has_line() {
        let err = parse_config("{\n  \"horizon_days\": ,\n}", Path::new("bad.json")).unwrap_err();
        match err {
            RunnerError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn typo_in_field_is_a_parse_error() {
        assert!(parse_config(r#"{"horizon": 30}"#, Path::new("x.json")).is_err());
    }
}
