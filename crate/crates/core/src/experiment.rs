//! Seeded experiment grids over instances and methods, with CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{cds, neh, STANDARD_GA_PARAMS};
use crate::budget::{Budget, SizeClass};
use crate::error::{Error, Result};
use crate::ga::{ga_step, init_population, Individual};
use crate::pfsp::{makespan, parse_taillard, Instance, Permutation, Time};
use crate::rl::{run_frozen, run_online, train_offline, EpisodeLog, QNetwork, RlParams};

/// Environment variable naming the directory searched for relative instance paths.
pub const DATA_DIR_ENV: &str = "RLGA_DATA_DIR";

/// Every run in an experiment uses this generator, seeded per cell.
pub type RunRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    OfflineTrain,
    OfflineFrozen,
    Online,
    StandardGa,
    Neh,
    Cds,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::OfflineTrain,
        Method::OfflineFrozen,
        Method::Online,
        Method::StandardGa,
        Method::Neh,
        Method::Cds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::OfflineTrain => "offline_train",
            Method::OfflineFrozen => "offline_frozen",
            Method::Online => "online",
            Method::StandardGa => "standard_ga",
            Method::Neh => "neh",
            Method::Cds => "cds",
        }
    }

    pub fn is_deterministic(self) -> bool {
        matches!(self, Method::Neh | Method::Cds)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// A benchmark file and the 1-based block indices to use (all blocks when absent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    pub path: PathBuf,
    #[serde(default)]
    pub indices: Option<Vec<usize>>,
}

/// Per-method budget overrides; unset entries come from the size class.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    pub offline_train: Option<Budget>,
    pub offline_frozen: Option<Budget>,
    pub online: Option<Budget>,
    /// `episodes > 1` runs that many independent restarts and keeps the best.
    pub standard_ga: Option<Budget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Size class supplying default budgets; inferred from instance dimensions when absent.
    #[serde(default)]
    pub class: Option<SizeClass>,
    pub instances: Vec<InstanceSource>,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub output: PathBuf,
    /// Written by `offline_train`, read by `offline_frozen`.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub rl: RlParams,
    #[serde(default)]
    pub budgets: Budgets,
    /// Keep the per-generation best makespan of each stochastic run.
    #[serde(default)]
    pub traces: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("method list is empty".into()));
        }
        if self.instances.is_empty() {
            return Err(Error::Config("no instances configured".into()));
        }
        if self.seeds.is_empty() && self.methods.iter().any(|m| !m.is_deterministic()) {
            return Err(Error::Config("stochastic methods need at least one seed".into()));
        }
        self.rl.validate()?;
        for b in [
            &self.budgets.offline_train,
            &self.budgets.offline_frozen,
            &self.budgets.online,
            &self.budgets.standard_ga,
        ]
        .into_iter()
        .flatten()
        {
            b.validate()?;
        }
        let trains = self.methods.contains(&Method::OfflineTrain);
        if trains || self.methods.contains(&Method::OfflineFrozen) {
            let model = self
                .model
                .as_ref()
                .ok_or_else(|| Error::Config("offline methods need a model path".into()))?;
            if !trains && !model.is_file() {
                return Err(Error::Config(format!(
                    "model file {} does not exist",
                    model.display()
                )));
            }
        }
        Ok(())
    }

    fn budget(&self, method: Method, instance: &Instance) -> Result<Budget> {
        let explicit = match method {
            Method::OfflineTrain => self.budgets.offline_train,
            Method::OfflineFrozen => self.budgets.offline_frozen,
            Method::Online => self.budgets.online,
            Method::StandardGa => self.budgets.standard_ga,
            Method::Neh | Method::Cds => return Ok(Budget::new(1, 1, 2)),
        };
        if let Some(b) = explicit {
            return Ok(b);
        }
        let class = self
            .class
            .or_else(|| class_of(instance))
            .ok_or_else(|| {
                Error::Config(format!(
                    "no budget for {method} on {} ({}x{}); set `class` or `budgets.{method}`",
                    instance.id,
                    instance.n_jobs(),
                    instance.n_machines()
                ))
            })?;
        Ok(match method {
            Method::OfflineTrain => class.training(),
            Method::OfflineFrozen | Method::Online => class.agent_test(),
            _ => class.standard_ga(),
        })
    }
}

fn class_of(instance: &Instance) -> Option<SizeClass> {
    [SizeClass::J20M5, SizeClass::J50M10, SizeClass::J100M10]
        .into_iter()
        .find(|c| c.matches(instance.n_jobs(), instance.n_machines()))
}

/// Resolves a relative path against the data directory when it does not exist as given.
pub fn resolve_data_path(path: &Path) -> PathBuf {
    if path.is_absolute() || path.exists() {
        return path.to_path_buf();
    }
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) => Path::new(&dir).join(path),
        None => path.to_path_buf(),
    }
}

/// Reads and parses a Taillard file; instance ids use the file stem.
pub fn load_instances(path: impl AsRef<Path>) -> Result<Vec<Instance>> {
    let path = resolve_data_path(path.as_ref());
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    parse_taillard(&text, &stem)
}

/// Loads the instances named by `source`, honouring its index selection.
pub fn load_source(source: &InstanceSource) -> Result<Vec<Instance>> {
    let all = load_instances(&source.path)?;
    match &source.indices {
        None => Ok(all),
        Some(indices) => indices
            .iter()
            .map(|&k| {
                all.get(k.wrapping_sub(1)).cloned().ok_or_else(|| {
                    Error::Config(format!(
                        "{} has {} instances, index {k} requested",
                        source.path.display(),
                        all.len()
                    ))
                })
            })
            .collect(),
    }
}

/// Result of one (instance, method, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub method: Method,
    /// `None` for deterministic methods.
    pub seed: Option<u64>,
    pub best_makespan: Time,
    pub permutation: Permutation,
    /// Wall-clock seconds of the optimisation call, rounded to milliseconds.
    pub time_s: f64,
    pub generations: usize,
    pub trace: Option<Vec<Time>>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub training_log: Vec<EpisodeLog>,
}

struct Solved {
    best: Individual,
    generations: usize,
    trace: Vec<Time>,
}

/// GA with the fixed reference operators; `budget.episodes` independent restarts.
pub fn run_standard_ga(instance: &Instance, budget: Budget, rng: &mut RunRng) -> Result<(Individual, Vec<Time>)> {
    budget.validate()?;
    let mut best: Option<Individual> = None;
    let mut trace = Vec::with_capacity(budget.total_generations());
    for _ in 0..budget.episodes {
        let mut pop = init_population(instance, budget.population, rng)?;
        for _ in 0..budget.iterations {
            pop = ga_step(instance, &pop, STANDARD_GA_PARAMS, rng)?.0;
            trace.push(pop.best().fitness());
        }
        if best.as_ref().is_none_or(|b| pop.best().fitness() < b.fitness()) {
            best = Some(pop.best().clone());
        }
    }
    Ok((best.expect("episodes >= 1"), trace))
}

/// Runs a single method on one instance.
pub fn solve(
    instance: &Instance,
    method: Method,
    budget: Budget,
    rl: &RlParams,
    model: Option<&QNetwork>,
    seed: u64,
) -> Result<(Individual, usize, Vec<Time>)> {
    let mut rng = RunRng::seed_from_u64(seed);
    let solved = match method {
        Method::Neh => Solved {
            best: Individual::evaluate(instance, neh(instance))?,
            generations: 0,
            trace: vec![],
        },
        Method::Cds => Solved {
            best: Individual::evaluate(instance, cds(instance)?)?,
            generations: 0,
            trace: vec![],
        },
        Method::StandardGa => {
            let (best, trace) = run_standard_ga(instance, budget, &mut rng)?;
            Solved {
                best,
                generations: budget.total_generations(),
                trace,
            }
        }
        Method::Online => {
            let out = run_online(instance, budget, rl, &mut rng)?;
            Solved {
                best: out.best,
                generations: budget.total_generations(),
                trace: out.history.iter().map(|r| r.best_fitness).collect(),
            }
        }
        Method::OfflineFrozen => {
            let net = model.ok_or_else(|| Error::Config("frozen run needs a model".into()))?;
            let out = run_frozen(net, instance, budget, &mut rng)?;
            Solved {
                best: out.best,
                generations: budget.total_generations(),
                trace: out.history.iter().map(|r| r.best_fitness).collect(),
            }
        }
        Method::OfflineTrain => {
            return Err(Error::Config("offline_train is not a solving method".into()));
        }
    };
    Ok((solved.best, solved.generations, solved.trace))
}

fn round_ms(seconds: f64) -> f64 {
    (seconds * 1000.0).round() / 1000.0
}

/// Executes every (instance, method, seed) cell. Deterministic methods run once.
///
/// Cells run in parallel; records come back in canonical (instance, method, seed)
/// order and each best makespan is re-evaluated from its permutation.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut instances = Vec::new();
    for source in &cfg.instances {
        instances.extend(load_source(source)?);
    }

    let mut training_log = Vec::new();
    let model = if cfg.methods.contains(&Method::OfflineTrain) {
        let budget = cfg.budget(Method::OfflineTrain, &instances[0])?;
        let seed = cfg.seeds[0];
        log::info!("training offline model on {} instances, seed {seed}", instances.len());
        let report = train_offline(&instances, budget, &cfg.rl, &mut RunRng::seed_from_u64(seed))?;
        let path = cfg.model.as_ref().expect("validated");
        report.network.save(path)?;
        training_log = report.episodes;
        Some(report.network)
    } else if cfg.methods.contains(&Method::OfflineFrozen) {
        Some(QNetwork::load(cfg.model.as_ref().expect("validated"))?)
    } else {
        None
    };

    let mut cells = Vec::new();
    for (ii, inst) in instances.iter().enumerate() {
        for &method in cfg.methods.iter().filter(|&&m| m != Method::OfflineTrain) {
            let budget = cfg.budget(method, inst)?;
            if method.is_deterministic() {
                cells.push((ii, method, budget, None));
            } else {
                cells.extend(cfg.seeds.iter().map(|&s| (ii, method, budget, Some(s))));
            }
        }
    }

    let records = cells
        .into_par_iter()
        .map(|(ii, method, budget, seed)| {
            let inst = &instances[ii];
            let start = Instant::now();
            let (best, generations, trace) = solve(inst, method, budget, &cfg.rl, model.as_ref(), seed.unwrap_or(0))?;
            let elapsed = start.elapsed().as_secs_f64();
            let recheck = makespan(inst, best.perm())?;
            if recheck != best.fitness() {
                return Err(Error::contract(format!(
                    "{method} on {} reported {} but its permutation evaluates to {recheck}",
                    inst.id,
                    best.fitness()
                )));
            }
            Ok(RunRecord {
                instance: inst.id.clone(),
                method,
                seed,
                best_makespan: recheck,
                time_s: round_ms(elapsed),
                generations,
                trace: cfg.traces.then_some(trace),
                permutation: best.into_perm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentResult {
        records,
        training_log,
    })
}

/// One row of the raw per-run CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub instance: String,
    pub method: Method,
    pub seed: Option<u64>,
    pub best_makespan: Time,
    pub time_s: f64,
    pub generations: usize,
}

impl From<&RunRecord> for RawRecord {
    fn from(r: &RunRecord) -> Self {
        Self {
            instance: r.instance.clone(),
            method: r.method,
            seed: r.seed,
            best_makespan: r.best_makespan,
            time_s: r.time_s,
            generations: r.generations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub method: Method,
    pub runs: usize,
    pub min: Time,
    pub mean: f64,
    pub max: Time,
    pub mean_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationRow {
    pub instance: String,
    pub method: Method,
    pub seed: Option<u64>,
    pub permutation: String,
}

/// Aggregates per (instance, method), in order of first appearance.
pub fn summarize(rows: &[RawRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, Method)> = Vec::new();
    let mut groups: BTreeMap<(String, Method), Vec<&RawRecord>> = BTreeMap::new();
    for r in rows {
        let key = (r.instance.clone(), r.method);
        let group = groups.entry(key.clone()).or_default();
        if group.is_empty() {
            order.push(key);
        }
        group.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let n = g.len() as f64;
            SummaryRow {
                instance: key.0,
                method: key.1,
                runs: g.len(),
                min: g.iter().map(|r| r.best_makespan).min().expect("non-empty group"),
                mean: g.iter().map(|r| r.best_makespan as f64).sum::<f64>() / n,
                max: g.iter().map(|r| r.best_makespan).max().expect("non-empty group"),
                mean_time_s: g.iter().map(|r| r.time_s).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Paths of the files written by [`emit_results`].
#[derive(Debug, Clone)]
pub struct EmittedFiles {
    pub runs: PathBuf,
    pub summary: PathBuf,
    pub permutations: PathBuf,
    pub traces: Option<PathBuf>,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `runs.csv`, `summary.csv`, `permutations.csv` (and `traces.csv` when
/// any record carries a trace) into `dir`.
pub fn emit_results(records: &[RunRecord], dir: impl AsRef<Path>) -> Result<EmittedFiles> {
    if records.is_empty() {
        return Err(Error::contract("no records to emit"));
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let raw: Vec<RawRecord> = records.iter().map(RawRecord::from).collect();
    let files = EmittedFiles {
        runs: dir.join("runs.csv"),
        summary: dir.join("summary.csv"),
        permutations: dir.join("permutations.csv"),
        traces: records.iter().any(|r| r.trace.is_some()).then(|| dir.join("traces.csv")),
    };

    // The raw file is written by hand so `time_s` keeps exactly three decimals.
    let mut w = csv::Writer::from_path(&files.runs)?;
    w.write_record(["instance", "method", "seed", "best_makespan", "time_s", "generations"])?;
    for r in &raw {
        w.write_record([
            r.instance.clone(),
            r.method.to_string(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.best_makespan.to_string(),
            format!("{:.3}", r.time_s),
            r.generations.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&files.runs, e))?;

    write_csv(&files.summary, summarize(&raw))?;
    write_csv(
        &files.permutations,
        records.iter().map(|r| PermutationRow {
            instance: r.instance.clone(),
            method: r.method,
            seed: r.seed,
            permutation: r.permutation.to_string(),
        }),
    )?;
    if let Some(path) = &files.traces {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["instance", "method", "seed", "generation", "best_makespan"])?;
        for r in records {
            for (g, best) in r.trace.iter().flatten().enumerate() {
                w.write_record([
                    r.instance.clone(),
                    r.method.to_string(),
                    r.seed.map(|s| s.to_string()).unwrap_or_default(),
                    g.to_string(),
                    best.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    Ok(files)
}

pub fn write_training_log(log: &[EpisodeLog], path: impl AsRef<Path>) -> Result<()> {
    write_csv(path.as_ref(), log)
}

pub fn read_runs(path: impl AsRef<Path>) -> Result<Vec<RawRecord>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_permutations(path: impl AsRef<Path>) -> Result<Vec<PermutationRow>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(instance: &str, method: Method, seed: Option<u64>, best: Time, time_s: f64) -> RunRecord {
        RunRecord {
            instance: instance.into(),
            method,
            seed,
            best_makespan: best,
            permutation: Permutation::identity(3),
            time_s,
            generations: 10,
            trace: None,
        }
    }

    #[test]
    fn summary_of_single_record() {
        let rows = vec![RawRecord::from(&record("a", Method::Neh, None, 42, 0.5))];
        let s = summarize(&rows);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].min, s[0].mean, s[0].max), (42, 42.0, 42));
    }

    #[test]
    fn summary_min_of_cell() {
        let rows: Vec<RawRecord> = [1297, 1288, 1282, 1255]
            .iter()
            .enumerate()
            .map(|(k, &b)| RawRecord::from(&record("B_20_5_1", Method::Online, Some(k as u64), b, 0.1)))
            .collect();
        let s = summarize(&rows);
        assert_eq!(s[0].min, 1255);
        assert_eq!(s[0].max, 1297);
        assert_eq!(s[0].runs, 4);
    }

    #[test]
    fn emit_and_reparse() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            record("x_1", Method::StandardGa, Some(3), 100, 0.123),
            record("x_1", Method::Cds, None, 120, 0.0),
        ];
        let files = emit_results(&records, dir.path()).unwrap();
        let header = std::fs::read_to_string(&files.runs).unwrap();
        assert!(header.starts_with("instance,method,seed,best_makespan,time_s,generations\n"));
        let back = read_runs(&files.runs).unwrap();
        assert_eq!(back, records.iter().map(RawRecord::from).collect::<Vec<_>>());
        let perms = read_permutations(&files.permutations).unwrap();
        assert_eq!(perms[0].permutation, "0 1 2");
        assert!(files.traces.is_none());
    }

    #[test]
    fn emit_rejects_empty() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_results(&[], dir.path()).is_err());
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn config_validation() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            instances = [{ path = "x.txt" }]
            methods = []
            output = "out"
            "#,
        )
        .unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));

        let cfg = ExperimentConfig::from_toml(
            r#"
            instances = [{ path = "x.txt" }]
            methods = ["online"]
            output = "out"
            "#,
        )
        .unwrap();
        assert!(cfg.validate().is_err(), "stochastic methods need seeds");

        let cfg = ExperimentConfig::from_toml(
            r#"
            instances = [{ path = "x.txt" }]
            methods = ["offline_frozen"]
            seeds = [1]
            output = "out"
            model = "/nonexistent/model.json"
            "#,
        )
        .unwrap();
        assert!(cfg.validate().is_err(), "frozen runs need an existing model");
        assert!(ExperimentConfig::from_toml("methods = [\"bogus\"]").is_err());
    }
}
