//! Test-only oracles, independent of the library's evaluation code.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rlga_core::{Instance, Time};

/// Discrete-event simulation of a permutation flow shop.
///
/// Machines and jobs are resources; an operation starts as soon as its machine
/// has finished the previous job in the sequence and the job has left the
/// previous machine. Events are processed in time order from a heap.
pub fn simulate_makespan(times: &[Vec<Time>], seq: &[usize]) -> Time {
    let m = times.len();
    let n = seq.len();
    // next position each machine will process; whether (machine, position) is done
    let mut next_pos = vec![0usize; m];
    let mut done = vec![vec![false; n]; m];
    let mut busy = vec![false; m];
    let mut events: BinaryHeap<Reverse<(Time, usize, usize)>> = BinaryHeap::new();
    let mut now = 0;
    let mut last_finish = 0;

    loop {
        for machine in 0..m {
            if busy[machine] || next_pos[machine] == n {
                continue;
            }
            let pos = next_pos[machine];
            let ready = machine == 0 || done[machine - 1][pos];
            if ready {
                busy[machine] = true;
                let job = seq[pos];
                events.push(Reverse((now + times[machine][job], machine, pos)));
            }
        }
        let Some(Reverse((t, machine, pos))) = events.pop() else {
            break;
        };
        now = t;
        busy[machine] = false;
        done[machine][pos] = true;
        next_pos[machine] += 1;
        last_finish = last_finish.max(t);
        // Finish every other event at the same instant before starting anything new.
        while let Some(&Reverse((t2, machine2, pos2))) = events.peek() {
            if t2 != now {
                break;
            }
            events.pop();
            busy[machine2] = false;
            done[machine2][pos2] = true;
            next_pos[machine2] += 1;
        }
    }
    assert!(next_pos.iter().all(|&p| p == n), "simulation stalled");
    last_finish
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

/// (best, worst) makespan over all permutations, by simulation.
pub fn brute_force_range(inst: &Instance) -> (Time, Time) {
    all_permutations(inst.n_jobs())
        .iter()
        .map(|p| simulate_makespan(inst.proc_times(), p))
        .fold((Time::MAX, 0), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn random_instance<R: Rng>(rng: &mut R, max_jobs: usize, max_machines: usize, max_time: Time) -> Instance {
    let n = rng.gen_range(1..=max_jobs);
    let m = rng.gen_range(1..=max_machines);
    random_instance_sized(rng, n, m, max_time)
}

pub fn random_instance_sized<R: Rng>(rng: &mut R, n: usize, m: usize, max_time: Time) -> Instance {
    let rows = (0..m).map(|_| (0..n).map(|_| rng.gen_range(1..=max_time)).collect()).collect();
    Instance::new("rand", rows).unwrap()
}

/// Path of the bundled 20x5 benchmark file.
pub fn tai20_5_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/tai20_5.txt")
}
