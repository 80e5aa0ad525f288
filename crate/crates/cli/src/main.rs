use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

use rlga_core::baselines::{cds, neh};
use rlga_core::experiment::{
    self, emit_results, load_instances, run_experiment, write_training_log, ExperimentConfig, Method, RunRng,
    DATA_DIR_ENV,
};
use rlga_core::rl::{train_offline, QNetwork, RlParams};
use rlga_core::{makespan, pfsp, taillard, Budget, Instance, SizeClass};

#[derive(Parser)]
#[command(name = "rlga", version, about = "Flow-shop scheduling with an RL-controlled genetic algorithm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an offline (DQN) controller and write it to a model file.
    Train(TrainArgs),
    /// Solve one instance with one method.
    Solve(SolveArgs),
    /// Run a full experiment grid described by a TOML config.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the deterministic heuristics (NEH, CDS) on every instance.
    Baselines {
        #[arg(long, num_args = 1.., required = true)]
        instances: Vec<PathBuf>,
        /// Also write runs/summary/permutations CSVs into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write Taillard-generated instances in benchmark format.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
}

impl BudgetArgs {
    fn apply(&self, base: Budget) -> Budget {
        Budget {
            episodes: self.episodes.unwrap_or(base.episodes),
            iterations: self.iterations.unwrap_or(base.iterations),
            population: self.population.unwrap_or(base.population),
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, num_args = 1.., required = true)]
    instances: Vec<PathBuf>,
    #[arg(long = "class")]
    class: SizeClass,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-episode training log (CSV).
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// 1-based block within the instance file.
    #[arg(long, default_value_t = 1)]
    index: usize,
    #[arg(long)]
    method: Method,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size class for default budgets; inferred from the instance when omitted.
    #[arg(long = "class")]
    class: Option<SizeClass>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct GenerateArgs {
    /// Standard class to generate with its published seeds and bounds (only 20_5 is bundled).
    #[arg(long, conflicts_with_all = ["jobs", "machines", "seeds"])]
    preset: Option<SizeClass>,
    #[arg(long, requires = "machines")]
    jobs: Option<usize>,
    #[arg(long)]
    machines: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn class_for(instance: &Instance, explicit: Option<SizeClass>) -> Result<SizeClass> {
    if let Some(c) = explicit {
        return Ok(c);
    }
    [SizeClass::J20M5, SizeClass::J50M10, SizeClass::J100M10]
        .into_iter()
        .find(|c| c.matches(instance.n_jobs(), instance.n_machines()))
        .with_context(|| {
            format!(
                "{} is {}x{}, not a known size class; pass --class",
                instance.id,
                instance.n_jobs(),
                instance.n_machines()
            )
        })
}

fn train(args: TrainArgs) -> Result<()> {
    let (n, m) = args.class.dims();
    let mut instances = Vec::new();
    for path in &args.instances {
        instances.extend(
            load_instances(path)
                .with_context(|| format!("reading {}", path.display()))?
                .into_iter()
                .filter(|i| args.class.matches(i.n_jobs(), i.n_machines())),
        );
    }
    if instances.is_empty() {
        bail!("no {n}x{m} instances found in the given files");
    }
    let budget = args.budget.apply(args.class.training());
    log::info!("training on {} instances with {budget:?}", instances.len());
    let started = Instant::now();
    let report = train_offline(&instances, budget, &RlParams::default(), &mut RunRng::seed_from_u64(args.seed))?;
    report.network.save(&args.out)?;
    if let Some(path) = &args.log {
        write_training_log(&report.episodes, path)?;
    }
    let last = report.episodes.last().expect("at least one episode");
    println!(
        "trained {} episodes in {:.1}s; last episode reward {:.4}, best {}; model written to {}",
        report.episodes.len(),
        started.elapsed().as_secs_f64(),
        last.cumulative_reward,
        last.best_fitness,
        args.out.display()
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    if args.method == Method::OfflineTrain {
        bail!("use the `train` subcommand to train a model");
    }
    let instances = load_instances(&args.instance).with_context(|| format!("reading {}", args.instance.display()))?;
    let instance = instances
        .get(args.index.wrapping_sub(1))
        .with_context(|| format!("{} has {} instances", args.instance.display(), instances.len()))?;
    let budget = match args.method {
        Method::Neh | Method::Cds => Budget::new(1, 1, 2),
        Method::StandardGa => args.budget.apply(class_for(instance, args.class)?.standard_ga()),
        _ => args.budget.apply(class_for(instance, args.class)?.agent_test()),
    };
    let model = match (args.method, &args.model) {
        (Method::OfflineFrozen, Some(path)) => Some(QNetwork::load(path)?),
        (Method::OfflineFrozen, None) => bail!("offline_frozen needs --model"),
        _ => None,
    };
    let started = Instant::now();
    let (best, generations, _) =
        experiment::solve(instance, args.method, budget, &RlParams::default(), model.as_ref(), args.seed)?;
    let elapsed = started.elapsed().as_secs_f64();
    let check = makespan(instance, best.perm())?;
    println!("instance:    {}", instance.id);
    println!("method:      {}", args.method);
    println!("makespan:    {check}");
    println!("generations: {generations}");
    println!("time_s:      {elapsed:.3}");
    println!("permutation: {}", best.perm());
    Ok(())
}

fn bench(config: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let result = run_experiment(&cfg)?;
    let files = emit_results(&result.records, &cfg.output)?;
    if !result.training_log.is_empty() {
        write_training_log(&result.training_log, cfg.output.join("training_log.csv"))?;
    }
    for row in experiment::summarize(&result.records.iter().map(Into::into).collect::<Vec<_>>()) {
        println!(
            "{:<14} {:<15} runs={:<3} min={:<6} mean={:<9.1} max={:<6} time={:.3}s",
            row.instance, row.method.name(), row.runs, row.min, row.mean, row.max, row.mean_time_s
        );
    }
    println!("results written to {}", files.runs.parent().unwrap_or(Path::new(".")).display());
    Ok(())
}

fn baselines(paths: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let mut records = Vec::new();
    println!("{:<14} {:>6} {:>6} {:>6} {:>6}", "instance", "NEH", "CDS", "LB", "UB");
    for path in paths {
        for inst in load_instances(path).with_context(|| format!("reading {}", path.display()))? {
            let mut row = Vec::new();
            for method in [Method::Neh, Method::Cds] {
                let started = Instant::now();
                let perm = match method {
                    Method::Neh => neh(&inst),
                    _ => cds(&inst)?,
                };
                let value = makespan(&inst, &perm)?;
                row.push(value);
                records.push(experiment::RunRecord {
                    instance: inst.id.clone(),
                    method,
                    seed: None,
                    best_makespan: value,
                    permutation: perm,
                    time_s: (started.elapsed().as_secs_f64() * 1000.0).round() / 1000.0,
                    generations: 0,
                    trace: None,
                });
            }
            let show = |b: Option<u64>| b.map_or_else(|| "-".to_string(), |v| v.to_string());
            println!(
                "{:<14} {:>6} {:>6} {:>6} {:>6}",
                inst.id,
                row[0],
                row[1],
                show(inst.lower_bound),
                show(inst.upper_bound)
            );
        }
    }
    if let Some(dir) = out {
        emit_results(&records, dir)?;
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let instances = match (args.preset, args.jobs, args.machines) {
        (Some(SizeClass::J20M5), _, _) => taillard::tai_20_5(),
        (Some(other), _, _) => bail!("no bundled seed table for class {other}; pass --jobs/--machines/--seeds"),
        (None, Some(n), Some(m)) => {
            if args.seeds.is_empty() {
                bail!("--seeds is required with --jobs/--machines");
            }
            args.seeds
                .iter()
                .enumerate()
                .map(|(k, &s)| taillard::generate(format!("gen{n}_{m}_{}", k + 1), n, m, s))
                .collect::<rlga_core::Result<Vec<_>>>()?
        }
        _ => bail!("pass --preset or --jobs/--machines/--seeds"),
    };
    let text = pfsp::to_taillard(&instances);
    match args.out {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => train(args),
        Command::Solve(args) => solve(args),
        Command::Bench { config } => bench(&config),
        Command::Baselines { instances, out } => baselines(&instances, out.as_deref()),
        Command::Generate(args) => generate(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if std::env::var_os(DATA_DIR_ENV).is_none() {
                log::debug!("{DATA_DIR_ENV} is unset; relative instance paths resolve against the working directory");
            }
            ExitCode::FAILURE
        }
    }
}
