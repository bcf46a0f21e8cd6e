//! Seeded inputs shared by the benchmarks.

use mdcc::{BitArray, Codec, ConstraintConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_bits(len: usize, density: f64, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_bool(density)).collect()
}

pub fn random_array(n: usize, d: usize, density: f64, seed: u64) -> BitArray {
    let len = mdcc::array::cell_count(n, d).expect("array size");
    BitArray::from_bits(n, d, random_bits(len, density, seed)).expect("array size")
}

/// Messages sized for `cfg`, one per seed in `0..count`.
pub fn messages(cfg: &ConstraintConfig, count: usize, density: f64) -> Vec<Vec<bool>> {
    let len = cfg.cells().expect("array size") - 1;
    (0..count as u64).map(|s| random_bits(len, density, s)).collect()
}

pub fn codec(cfg: ConstraintConfig) -> Codec {
    Codec::new(cfg).expect("feasible config")
}

/// Configs at the smallest feasible square side for each constraint.
pub fn standard_configs(n: usize) -> Vec<ConstraintConfig> {
    vec![
        ConstraintConfig::zrcf(n, &[5, 5]).unwrap(),
        ConstraintConfig::vzrcf(n, 2, 30).unwrap(),
        ConstraintConfig::rf(n, &[6, 6]).unwrap(),
        ConstraintConfig::hdrf(n, &[8, 8], 2).unwrap(),
    ]
}
