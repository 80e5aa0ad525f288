//! Permutation flow-shop instances, Taillard-format I/O and makespan evaluation.
//!
//! Processing times are stored machine-major: `proc_times[machine][job]`, which is
//! also the row layout of Taillard benchmark files.

use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integral processing time / completion time.
pub type Time = u64;

/// A permutation flow-shop problem instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    n_jobs: usize,
    n_machines: usize,
    proc_times: Vec<Vec<Time>>,
    /// Generator seed from the benchmark header, if present.
    pub seed: Option<u64>,
    pub upper_bound: Option<Time>,
    pub lower_bound: Option<Time>,
}

impl Instance {
    /// Builds an instance from a `[machine][job]` matrix.
    pub fn new(id: impl Into<String>, proc_times: Vec<Vec<Time>>) -> Result<Self> {
        let n_machines = proc_times.len();
        if n_machines == 0 {
            return Err(Error::contract("instance needs at least one machine"));
        }
        let n_jobs = proc_times[0].len();
        if n_jobs == 0 {
            return Err(Error::contract("instance needs at least one job"));
        }
        if let Some(row) = proc_times.iter().position(|r| r.len() != n_jobs) {
            return Err(Error::contract(format!(
                "machine {row} has {} processing times, expected {n_jobs}",
                proc_times[row].len()
            )));
        }
        Ok(Self {
            id: id.into(),
            n_jobs,
            n_machines,
            proc_times,
            seed: None,
            upper_bound: None,
            lower_bound: None,
        })
    }

    /// Attaches benchmark bounds, checking `lower <= upper` when both are known.
    pub fn with_bounds(mut self, lower: Option<Time>, upper: Option<Time>) -> Result<Self> {
        if let (Some(lb), Some(ub)) = (lower, upper) {
            if lb > ub {
                return Err(Error::contract(format!(
                    "lower bound {lb} exceeds upper bound {ub}"
                )));
            }
        }
        self.lower_bound = lower;
        self.upper_bound = upper;
        Ok(self)
    }

    pub fn n_jobs(&self) -> usize {
        self.n_jobs
    }

    pub fn n_machines(&self) -> usize {
        self.n_machines
    }

    pub fn proc_times(&self) -> &[Vec<Time>] {
        &self.proc_times
    }

    /// Processing time of `job` on `machine`.
    #[inline]
    pub fn time(&self, machine: usize, job: usize) -> Time {
        self.proc_times[machine][job]
    }

    /// Total processing time of a job over all machines.
    pub fn job_total(&self, job: usize) -> Time {
        self.proc_times.iter().map(|row| row[job]).sum()
    }

    /// Largest machine load and largest job total; both bound the makespan from below.
    pub fn trivial_lower_bound(&self) -> Time {
        let machine_load = self
            .proc_times
            .iter()
            .map(|row| row.iter().sum::<Time>())
            .max()
            .unwrap_or(0);
        let job_len = (0..self.n_jobs).map(|j| self.job_total(j)).max().unwrap_or(0);
        machine_load.max(job_len)
    }

    /// Makespan of a job sequence that is assumed to be valid.
    ///
    /// Also accepts partial sequences (a subset of jobs), which NEH relies on.
    pub(crate) fn sequence_makespan(&self, seq: &[usize]) -> Time {
        let mut completion = vec![0; self.n_machines];
        for &job in seq {
            let mut prev = 0;
            for (machine, done) in completion.iter_mut().enumerate() {
                *done = (*done).max(prev) + self.proc_times[machine][job];
                prev = *done;
            }
        }
        completion[self.n_machines - 1]
    }
}

/// A job order: position `k` holds the index of the `k`-th job processed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    /// Wraps `seq` after checking it is a bijection on `0..seq.len()`.
    pub fn new(seq: Vec<usize>) -> Result<Self> {
        let violations = check_sequence(seq.len(), &seq);
        if violations.is_empty() {
            Ok(Self(seq))
        } else {
            Err(Error::InvalidPermutation(violations))
        }
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub(crate) fn from_vec_unchecked(seq: Vec<usize>) -> Self {
        debug_assert!(check_sequence(seq.len(), &seq).is_empty());
        Self(seq)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for Permutation {
    /// Space-separated job indices.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, job) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_char(' ')?;
            }
            write!(f, "{job}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let seq = s
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|e| Error::Parse {
                    line: 1,
                    message: format!("bad job index {tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(seq)
    }
}

/// A reason a sequence is not a permutation of an instance's jobs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WrongLength { expected: usize, actual: usize },
    OutOfRange { position: usize, job: usize },
    Duplicate { job: usize, first: usize, again: usize },
}

fn check_sequence(n_jobs: usize, seq: &[usize]) -> Vec<Violation> {
    let mut violations = Vec::new();
    if seq.len() != n_jobs {
        violations.push(Violation::WrongLength {
            expected: n_jobs,
            actual: seq.len(),
        });
    }
    let mut seen: Vec<Option<usize>> = vec![None; n_jobs];
    for (position, &job) in seq.iter().enumerate() {
        match seen.get_mut(job) {
            None => violations.push(Violation::OutOfRange { position, job }),
            Some(Some(first)) => violations.push(Violation::Duplicate {
                job,
                first: *first,
                again: position,
            }),
            Some(slot) => *slot = Some(position),
        }
    }
    violations
}

/// Checks that `seq` schedules every job of `instance` exactly once.
pub fn validate_permutation(instance: &Instance, seq: &[usize]) -> std::result::Result<(), Vec<Violation>> {
    let violations = check_sequence(instance.n_jobs(), seq);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Completion time of the last job on the last machine.
pub fn makespan(instance: &Instance, perm: &Permutation) -> Result<Time> {
    validate_permutation(instance, perm.as_slice()).map_err(Error::InvalidPermutation)?;
    Ok(instance.sequence_makespan(perm.as_slice()))
}

/// Uniformly random permutation of `0..n_jobs`.
pub fn random_permutation<R: Rng + ?Sized>(n_jobs: usize, rng: &mut R) -> Result<Permutation> {
    if n_jobs == 0 {
        return Err(Error::contract("random_permutation needs n_jobs >= 1"));
    }
    let mut seq: Vec<usize> = (0..n_jobs).collect();
    seq.shuffle(rng);
    Ok(Permutation(seq))
}

fn parse_tokens(line: &str, lineno: usize) -> Result<Vec<i64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<i64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("expected an integer, found {tok:?}"),
            })
        })
        .collect()
}

fn is_banner(line: &str) -> bool {
    line.split_whitespace()
        .next()
        .is_some_and(|tok| tok.parse::<i64>().is_err())
}

fn non_negative(value: i64, lineno: usize, what: &str) -> Result<u64> {
    u64::try_from(value).map_err(|_| Error::Parse {
        line: lineno,
        message: format!("negative {what} {value}"),
    })
}

/// Parses one or more concatenated Taillard-format instance blocks.
///
/// Each block is a header `n_jobs n_machines [seed [upper [lower]]]` followed by
/// `n_machines` rows of `n_jobs` times. Lines whose first token is not an integer
/// (the usual "number of jobs, ..." / "processing times :" banners) are skipped.
/// Instances are named `<stem>_<k>` with `k` counting blocks from 1.
pub fn parse_taillard(text: &str, stem: &str) -> Result<Vec<Instance>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !is_banner(l));

    let mut instances = Vec::new();
    while let Some((lineno, header)) = lines.next() {
        let fields = parse_tokens(header, lineno)?;
        if !(2..=5).contains(&fields.len()) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("header needs 2 to 5 integers, found {}", fields.len()),
            });
        }
        let n_jobs = non_negative(fields[0], lineno, "job count")? as usize;
        let n_machines = non_negative(fields[1], lineno, "machine count")? as usize;
        if n_jobs == 0 || n_machines == 0 {
            return Err(Error::Parse {
                line: lineno,
                message: "job and machine counts must be positive".into(),
            });
        }
        let optional = |k: usize| -> Result<Option<u64>> {
            fields
                .get(k)
                .map(|&v| non_negative(v, lineno, "header field"))
                .transpose()
        };
        let seed = optional(2)?;
        let upper = optional(3)?;
        let lower = optional(4)?;

        let mut rows = Vec::with_capacity(n_machines);
        for machine in 0..n_machines {
            let (row_line, text) = lines.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!(
                    "instance ends after {machine} of {n_machines} machine rows"
                ),
            })?;
            let values = parse_tokens(text, row_line)?;
            if values.len() != n_jobs {
                return Err(Error::Parse {
                    line: row_line,
                    message: format!("expected {n_jobs} processing times, found {}", values.len()),
                });
            }
            let row = values
                .into_iter()
                .map(|v| non_negative(v, row_line, "processing time"))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }

        let id = format!("{stem}_{}", instances.len() + 1);
        let mut instance = Instance::new(id, rows)?
            .with_bounds(lower, upper)
            .map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
        instance.seed = seed;
        instances.push(instance);
    }
    Ok(instances)
}

/// Writes instances in the layout accepted by [`parse_taillard`].
///
/// Header fields are emitted up to the last one that is known; an unknown field
/// followed by a known one is written as `0`.
pub fn to_taillard(instances: &[Instance]) -> String {
    let mut out = String::new();
    for inst in instances {
        let extra = [inst.seed, inst.upper_bound, inst.lower_bound];
        let keep = extra.iter().rposition(Option::is_some).map_or(0, |k| k + 1);
        out.push_str("number of jobs, number of machines, initial seed, upper bound and lower bound :\n");
        let _ = write!(out, "{:>12}{:>12}", inst.n_jobs, inst.n_machines);
        for field in &extra[..keep] {
            let _ = write!(out, "{:>12}", field.unwrap_or(0));
        }
        out.push_str("\nprocessing times :\n");
        for row in &inst.proc_times {
            for t in row {
                let _ = write!(out, "{t:>3} ");
            }
            out.pop();
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_job_chain() {
        let inst = Instance::new("chain", vec![vec![2], vec![3], vec![4]]).unwrap();
        assert_eq!(makespan(&inst, &perm(&[0])).unwrap(), 9);
    }

    #[test]
    fn two_by_two_orders() {
        let inst = Instance::new("t", vec![vec![3, 2], vec![2, 4]]).unwrap();
        assert_eq!(makespan(&inst, &perm(&[0, 1])).unwrap(), 9);
        assert_eq!(makespan(&inst, &perm(&[1, 0])).unwrap(), 8);
    }

    #[test]
    fn makespan_rejects_wrong_length() {
        let inst = Instance::new("t", vec![vec![3, 2], vec![2, 4]]).unwrap();
        assert!(matches!(
            makespan(&inst, &Permutation::identity(3)),
            Err(Error::InvalidPermutation(_))
        ));
    }

    #[test]
    fn validation_reports() {
        let inst = Instance::new("t", vec![vec![1, 1, 1]]).unwrap();
        assert!(validate_permutation(&inst, &[0, 1, 2]).is_ok());
        assert_eq!(
            validate_permutation(&inst, &[0, 0, 2]).unwrap_err(),
            vec![Violation::Duplicate { job: 0, first: 0, again: 1 }]
        );
        assert_eq!(
            validate_permutation(&inst, &[0, 1]).unwrap_err(),
            vec![Violation::WrongLength { expected: 3, actual: 2 }]
        );
        assert_eq!(
            validate_permutation(&inst, &[0, 1, 5]).unwrap_err(),
            vec![Violation::OutOfRange { position: 2, job: 5 }]
        );
    }

    #[test]
    fn random_permutation_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_permutation(1, &mut rng).unwrap().as_slice(), &[0]);
        assert!(random_permutation(0, &mut rng).is_err());
        let a = random_permutation(5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_permutation(5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_permutation_is_uniform_on_three_jobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = std::collections::HashMap::new();
        let draws = 6000;
        for _ in 0..draws {
            *counts
                .entry(random_permutation(3, &mut rng).unwrap().into_vec())
                .or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (p, c) in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 6.0).abs() <= 0.03, "{p:?}: {freq}");
        }
    }

    #[test]
    fn parse_minimal_block() {
        let insts = parse_taillard("1 1\n7\n", "mini").unwrap();
        assert_eq!(insts.len(), 1);
        assert_eq!(insts[0].proc_times(), &[vec![7]]);
        assert_eq!(insts[0].id, "mini_1");
        assert_eq!(insts[0].upper_bound, None);
    }

    #[test]
    fn parse_with_banners_and_bounds() {
        let text = "number of jobs, number of machines, initial seed, upper bound and lower bound :\n\
                    3 2 42 20 10\n\
                    processing times :\n\
                    1 2 3\n\
                    4 5 6\n";
        let insts = parse_taillard(text, "b").unwrap();
        let inst = &insts[0];
        assert_eq!((inst.n_jobs(), inst.n_machines()), (3, 2));
        assert_eq!(inst.time(1, 0), 4);
        assert_eq!(inst.seed, Some(42));
        assert_eq!(inst.upper_bound, Some(20));
        assert_eq!(inst.lower_bound, Some(10));
    }

    #[test]
    fn parse_errors_name_lines() {
        let err = parse_taillard("2 2\n1 2\n3\n", "e").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_taillard("2 2\n1 -2\n3 4\n", "e").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_taillard("2 2x\n1 2\n3 4\n", "e").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_taillard("2 2\n1 2\n", "e").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_taillard("2 1 0 5 9\n1 2\n", "e").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn zero_times_allowed() {
        let inst = &parse_taillard("2 2\n0 3\n4 0\n", "z").unwrap()[0];
        assert_eq!(makespan(inst, &perm(&[1, 0])).unwrap(), 3 + 4);
    }

    #[test]
    fn serialize_roundtrip_keeps_header() {
        let text = "3 2 42 20 10\n1 2 3\n4 5 6\n2 1\n9 8\n1 2 7\n4\n5\n";
        let insts = parse_taillard(text, "r").unwrap();
        let again = parse_taillard(&to_taillard(&insts), "r").unwrap();
        assert_eq!(insts, again);
    }

    #[test]
    fn permutation_display_parse() {
        let p = perm(&[2, 0, 1]);
        assert_eq!(p.to_string(), "2 0 1");
        assert_eq!("2 0 1".parse::<Permutation>().unwrap(), p);
        assert!("0 0 1".parse::<Permutation>().is_err());
    }
}
