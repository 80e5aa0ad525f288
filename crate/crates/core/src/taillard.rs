//! Taillard's benchmark generator: a Lehmer LCG (Park-Miller constants,
//! Schrage factorisation) drawing integer times uniformly in `1..=99`.

use crate::error::Result;
use crate::pfsp::{Instance, Time};

/// Seeds, upper bounds and lower bounds of the ten published 20-job 5-machine instances.
pub const TAI_20_5: [(u64, Time, Time); 10] = [
    (873654221, 1278, 1232),
    (379008056, 1359, 1290),
    (1866992158, 1081, 1073),
    (216771124, 1293, 1268),
    (495070989, 1235, 1198),
    (402959317, 1195, 1180),
    (1369363414, 1239, 1226),
    (2021925980, 1206, 1170),
    (573109518, 1230, 1206),
    (88325120, 1108, 1082),
];

#[derive(Debug, Clone)]
pub struct TaillardLcg {
    state: i64,
}

impl TaillardLcg {
    const M: i64 = 2_147_483_647;
    const A: i64 = 16_807;
    const B: i64 = 127_773;
    const C: i64 = 2_836;

    pub fn new(seed: u64) -> Self {
        Self { state: seed as i64 }
    }

    fn next_unit(&mut self) -> f64 {
        let k = self.state / Self::B;
        self.state = Self::A * (self.state % Self::B) - k * Self::C;
        if self.state < 0 {
            self.state += Self::M;
        }
        self.state as f64 / Self::M as f64
    }

    /// Integer uniformly drawn from `low..=high`.
    pub fn uniform(&mut self, low: i64, high: i64) -> i64 {
        low + (self.next_unit() * (high - low + 1) as f64).floor() as i64
    }
}

/// Generates a flow-shop instance the way the published benchmark files were produced:
/// machine by machine, job by job.
pub fn generate(id: impl Into<String>, n_jobs: usize, n_machines: usize, seed: u64) -> Result<Instance> {
    let mut rng = TaillardLcg::new(seed);
    let rows = (0..n_machines)
        .map(|_| (0..n_jobs).map(|_| rng.uniform(1, 99) as Time).collect())
        .collect();
    let mut inst = Instance::new(id, rows)?;
    inst.seed = Some(seed);
    Ok(inst)
}

/// The ten standard 20x5 instances with their published bounds.
pub fn tai_20_5() -> Vec<Instance> {
    TAI_20_5
        .iter()
        .enumerate()
        .map(|(k, &(seed, ub, lb))| {
            generate(format!("tai20_5_{}", k + 1), 20, 5, seed)
                .and_then(|i| i.with_bounds(Some(lb), Some(ub)))
                .expect("static benchmark table is consistent")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TA001: [[Time; 20]; 5] = [
        [54, 83, 15, 71, 77, 36, 53, 38, 27, 87, 76, 91, 14, 29, 12, 77, 32, 87, 68, 94],
        [79, 3, 11, 99, 56, 70, 99, 60, 5, 56, 3, 61, 73, 75, 47, 14, 21, 86, 5, 77],
        [16, 89, 49, 15, 89, 45, 60, 23, 57, 64, 7, 1, 63, 41, 63, 47, 26, 75, 77, 40],
        [66, 58, 31, 68, 78, 91, 13, 59, 49, 85, 85, 9, 39, 41, 56, 40, 54, 77, 51, 31],
        [58, 56, 20, 85, 53, 35, 53, 41, 69, 13, 86, 72, 8, 49, 47, 87, 58, 18, 68, 28],
    ];

    #[test]
    fn reproduces_ta001() {
        let inst = generate("ta001", 20, 5, 873654221).unwrap();
        for (row, expected) in inst.proc_times().iter().zip(TA001.iter()) {
            assert_eq!(row.as_slice(), expected.as_slice());
        }
    }

    #[test]
    fn bundled_class_has_bounds() {
        let all = tai_20_5();
        assert_eq!(all.len(), 10);
        assert_eq!(all[0].upper_bound, Some(1278));
        assert_eq!(all[6].lower_bound, Some(1226));
    }
}
