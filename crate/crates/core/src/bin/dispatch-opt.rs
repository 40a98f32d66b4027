use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dispatch_opt::model::{DispatchKind, NetworkConfig, PolicyParams, Scenario};
use dispatch_opt::sim::SimOptions;
use dispatch_opt::ssga::{run_ssga, write_convergence_csv};
use dispatch_opt::study::{
    load_manifest, run_study, simulate_once, ConfigFile, Mode, RunManifest, RunnerError,
};

/// Warehouse reorder/dispatch simulation and ssGA optimization.
#[derive(Parser)]
#[command(name = "dispatch-opt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one replication of an explicit policy.
    Simulate(SimulateArgs),
    /// Run the ssGA once for a single scenario.
    Optimize(OptimizeArgs),
    /// Run the replicated multi-scenario study.
    Study(StudyArgs),
}

#[derive(Args)]
struct Common {
    /// JSON configuration; omitted blocks take reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "DISPATCH_OPT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Simulated days per replication.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Args)]
struct GaArgs {
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// Relative CI width target.
    #[arg(long)]
    delta: Option<f64>,
    /// N=20, G=100, max_n=10. Quick, but far from converged.
    #[arg(long)]
    fast: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2)]
    scenario: u32,
    #[arg(long = "reorder-point", short = 'r')]
    reorder_point: u32,
    #[arg(long = "order-quantity", short = 'Q')]
    order_quantity: u32,
    /// Thresholds M or intervals S, comma separated; one value is applied
    /// to every queue.
    #[arg(long, value_delimiter = ',', required = true)]
    dispatch: Vec<u32>,
    /// Record trace.csv (always written by simulate; kept for symmetry).
    #[arg(long)]
    trace: bool,
    /// Skip the reorder review at time zero.
    #[arg(long)]
    no_initial_review: bool,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    ga: GaArgs,
    #[arg(long, default_value_t = 2)]
    scenario: u32,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    ga: GaArgs,
    /// Restrict to these scenarios (repeatable); defaults to the config's list.
    #[arg(long, value_delimiter = ',')]
    scenario: Vec<u32>,
}

fn prepare(common: &Common, mode: Mode) -> Result<(RunManifest, NetworkConfig), RunnerError> {
    let (mut manifest, mut config) = match &common.config {
        Some(path) => load_manifest(path)?,
        None => {
            let file = ConfigFile::default();
            (
                RunManifest::from_config(&file, None)?,
                file.network().validate()?,
            )
        }
    };
    if let Some(h) = common.horizon {
        config.horizon_days = h;
        config = config.validate()?;
    }
    manifest.mode = mode;
    manifest.seed = common.seed;
    manifest.out_dir = common.out.clone();
    Ok((manifest, config))
}

fn apply_ga(manifest: &mut RunManifest, ga: &GaArgs) -> Result<(), RunnerError> {
    if ga.fast {
        manifest.apply_fast_profile();
    }
    if let Some(g) = ga.generations {
        manifest.ga.generations = g;
    }
    if let Some(n) = ga.population {
        manifest.ga.population_size = n;
    }
    if let Some(d) = ga.delta {
        manifest.precision.delta = d;
        manifest.ga_precision.delta = d;
    }
    manifest.ga.validate()?;
    manifest.precision.validate()?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), RunnerError> {
    let (manifest, config) = prepare(&args.common, Mode::Simulate)?;
    let scenario = Scenario::from_id(args.scenario)?;
    let queues = scenario.queue_count(config.retailer_count());
    let dispatch = if args.dispatch.len() == 1 {
        vec![args.dispatch[0]; queues]
    } else {
        args.dispatch
    };
    let policy = match scenario.dispatch_kind {
        DispatchKind::QuantityBased => {
            PolicyParams::quantity(args.reorder_point, args.order_quantity, dispatch)
        }
        DispatchKind::ScheduleBased => {
            PolicyParams::schedule(args.reorder_point, args.order_quantity, dispatch)
        }
    };
    let mut options = SimOptions::new(config.horizon_days).with_trace();
    options.review_at_start = !args.no_initial_review;
    let result = simulate_once(&manifest, &config, scenario, &policy, &options)?;

    let b = &result.breakdown;
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{scenario}  policy {policy}  seed {}", manifest.seed);
    for (name, v) in [
        ("holding", b.holding),
        ("ordering", b.ordering),
        ("delivery", b.delivery),
        ("penalty", b.penalty),
        ("  backorder", b.backorder_penalty),
        ("  window", b.window_penalty),
        ("total", result.total_cost),
    ] {
        let _ = writeln!(out, "{name:<12} {v:>14.2}");
    }
    let _ = writeln!(
        out,
        "fill rate    {:>14.4}  ({} of {} orders)",
        result.fill_rate, b.orders_filled_immediately, b.orders_received
    );
    let _ = writeln!(out, "wrote {}", manifest.out_dir.display());
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), RunnerError> {
    let io_err = |source| RunnerError::Io {
        path: path.to_path_buf(),
        source,
    };
    let text = serde_json::to_string_pretty(value)
        .map_err(io::Error::other)
        .map_err(io_err)?;
    fs::write(path, text).map_err(io_err)
}

fn optimize(args: OptimizeArgs) -> Result<(), RunnerError> {
    let (mut manifest, config) = prepare(&args.common, Mode::Optimize)?;
    apply_ga(&mut manifest, &args.ga)?;
    let scenario = Scenario::from_id(args.scenario)?;
    let outcome = run_ssga(
        scenario,
        &config,
        &manifest.ga,
        &manifest.precision,
        manifest.seed,
    )?;

    let dir = &manifest.out_dir;
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| RunnerError::Io { path: p, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let conv = dir.join("convergence.csv");
    let file = fs::File::create(&conv).map_err(io_err(&conv))?;
    write_convergence_csv(&outcome.log, io::BufWriter::new(file)).map_err(io_err(&conv))?;

    let fit = outcome.best_fitness();
    let policy = dispatch_opt::model::decode_chromosome(
        &outcome.best.genes,
        scenario,
        config.retailer_count(),
    )?;
    write_json(
        &dir.join("optimize.json"),
        &serde_json::json!({
            "scenario": scenario.id,
            "seed": manifest.seed,
            "genes": outcome.best.genes,
            "policy": policy,
            "F": fit.f,
            "TC": fit.total_cost,
            "FR": fit.fill_rate,
            "evaluations": outcome.evaluations,
            "imprecise_evaluations": outcome.imprecise_evaluations,
        }),
    )?;
    println!(
        "{scenario}: best {policy}  F={:.2} TC={:.2} FR={:.4}  ({} evaluations)",
        fit.f, fit.total_cost, fit.fill_rate, outcome.evaluations
    );
    Ok(())
}

fn study(args: StudyArgs) -> Result<(), RunnerError> {
    let (mut manifest, config) = prepare(&args.common, Mode::Study)?;
    apply_ga(&mut manifest, &args.ga)?;
    if !args.scenario.is_empty() {
        manifest.scenarios = args
            .scenario
            .iter()
            .map(|&id| Scenario::from_id(id))
            .collect::<Result<_, _>>()?;
    }
    let report = run_study(&manifest, &config)?;
    println!("scenario  n   mean F        mean TC       mean FR   best policy");
    for s in &report.scenarios {
        println!(
            "{:>8} {:>3}{} {:>12.1} {:>12.1}   {:.4}    {}",
            s.scenario,
            s.replicates,
            if s.precise { ' ' } else { '*' },
            s.fitness.mean,
            s.total_cost.mean,
            s.fill_rate.mean,
            s.best.policy
        );
    }
    if report.scenarios.iter().any(|s| !s.precise) {
        println!("* replicate cap reached before the precision target");
    }
    println!("wrote {}", manifest.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Optimize(a) => optimize(a),
        Command::Study(a) => study(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
