use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rlga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlga"))
        .args(args)
        .env_remove("RLGA_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn data_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/tai20_5.txt")
}

#[test]
fn generate_preset_matches_bundled_file() {
    let out = rlga(&["generate", "--preset", "20_5"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), std::fs::read_to_string(data_file()).unwrap());
}

#[test]
fn generate_custom_writes_parseable_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let out = rlga(&["generate", "--jobs", "6", "--machines", "3", "--seeds", "11,12", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let insts = rlga_core::experiment::load_instances(&path).unwrap();
    assert_eq!(insts.len(), 2);
    assert_eq!((insts[1].n_jobs(), insts[1].n_machines()), (6, 3));
}

#[test]
fn baselines_prints_known_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = rlga(&["baselines", "--instances", data_file().to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let first: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(first, ["tai20_5_1", "1286", "1390", "1232", "1278"]);
    assert!(dir.path().join("runs.csv").is_file());
    assert!(dir.path().join("permutations.csv").is_file());
}

#[test]
fn solve_reports_a_consistent_permutation() {
    let out = rlga(&[
        "solve", "--instance", data_file().to_str().unwrap(), "--index", "2", "--method", "standard_ga",
        "--seed", "4", "--iterations", "10", "--population", "10",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let field = |key: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(key))
            .map(|v| v.trim().to_string())
            .unwrap()
    };
    let inst = &rlga_core::experiment::load_instances(data_file()).unwrap()[1];
    let perm: rlga_core::Permutation = field("permutation:").parse().unwrap();
    let value: u64 = field("makespan:").parse().unwrap();
    assert_eq!(rlga_core::makespan(inst, &perm).unwrap(), value);
    assert_eq!(field("generations:"), "10");
}

#[test]
fn bench_runs_a_small_grid_and_trains() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = dir.path().join("grid.toml");
    std::fs::write(
        &config,
        format!(
            r#"
instances = [{{ path = "{}", indices = [1, 2] }}]
methods = ["offline_train", "offline_frozen", "online", "standard_ga", "neh", "cds"]
seeds = [1, 2]
output = "{}"
model = "{}"

[budgets]
offline_train = {{ episodes = 2, iterations = 5, population = 8 }}
offline_frozen = {{ episodes = 1, iterations = 5, population = 8 }}
online = {{ episodes = 1, iterations = 5, population = 8 }}
standard_ga = {{ episodes = 1, iterations = 5, population = 8 }}
"#,
            data_file().display(),
            out_dir.display(),
            dir.path().join("model.json").display()
        ),
    )
    .unwrap();
    let out = rlga(&["bench", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = rlga_core::experiment::read_runs(out_dir.join("runs.csv")).unwrap();
    // two instances x (3 stochastic methods x 2 seeds + 2 heuristics)
    assert_eq!(runs.len(), 16);
    assert!(out_dir.join("training_log.csv").is_file());
    assert!(dir.path().join("model.json").is_file());
}

#[test]
fn errors_exit_nonzero() {
    let missing = rlga(&["solve", "--instance", "no/such/file.txt", "--method", "neh"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));

    let frozen = rlga(&["solve", "--instance", data_file().to_str().unwrap(), "--method", "offline_frozen"]);
    assert!(!frozen.status.success());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2 2\n1 2\n3\n").unwrap();
    let parse = rlga(&["baselines", "--instances", bad.to_str().unwrap()]);
    assert!(!parse.status.success());
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line 3"));
}
